//! Expression mini-language: immutable symbolic trees over the variables
//! `t`, `x`, `u` and the jet variables `u_x`, `u_t`, `u_xx`, `u_tx`, `u_tt`,
//! with named symbolic constants, exact rational literals and a small set of
//! elementary functions.
//!
//! Every constructor canonicalizes bottom-up: sums are flattened, like terms
//! merged and sorted under a fixed total term order; products are flattened
//! with the numeric coefficient collected first and powers of a common base
//! merged; trivial powers and zero terms are removed.  Two canonical
//! expressions are structurally equal iff the rewrite system considers them
//! equal; deciding equality beyond that is delegated to numeric sampling
//! (`num_equivalent`).
//!
//! Powers with non-integer exponents use `|base|^p` evaluation semantics;
//! odd integer exponents keep exact sign bookkeeping.

mod diff;
mod eval;
pub(crate) mod integrate;
mod numeq;
mod parse;
mod print;
pub mod rational;

pub use diff::diff;
pub use eval::{Bindings, EvalError};
pub use integrate::{affine_in_x, antiderivative};
pub use numeq::{num_equivalent, num_equivalent_tol, NumEqError, DEFAULT_TRIALS};
pub use parse::{parse, ParseError};
pub use rational::{as_rational, Poly, RationalFunc};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Independent, dependent and jet variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T,
    X,
    U,
    Ux,
    Ut,
    Uxx,
    Utx,
    Utt,
}

impl Var {
    pub const ALL: [Var; 8] = [
        Var::T,
        Var::X,
        Var::U,
        Var::Ux,
        Var::Ut,
        Var::Uxx,
        Var::Utx,
        Var::Utt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
            Var::U => "u",
            Var::Ux => "u_x",
            Var::Ut => "u_t",
            Var::Uxx => "u_xx",
            Var::Utx => "u_tx",
            Var::Utt => "u_tt",
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        Var::ALL.iter().copied().find(|v| v.name() == s)
    }
}

/// Elementary functions closed under the needs of the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Atan,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Atan => "atan",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        match s {
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "atan" => Some(Func::Atan),
            "abs" => Some(Func::Abs),
            _ => None,
        }
    }
}

/// Canonical immutable expression tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(BigRational),
    Sym(String),
    Var(Var),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Apply(Func, Box<Expr>),
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(big(n))
    }

    pub fn rat(p: i64, q: i64) -> Expr {
        assert!(q != 0, "zero denominator");
        Expr::Const(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(name.to_string())
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn t() -> Expr {
        Expr::Var(Var::T)
    }

    pub fn x() -> Expr {
        Expr::Var(Var::X)
    }

    pub fn u() -> Expr {
        Expr::Var(Var::U)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Exact integer value, if the expression is an integer constant.
    pub fn as_integer(&self) -> Option<BigInt> {
        match self {
            Expr::Const(c) if c.is_integer() => Some(c.to_integer()),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        self.as_const().and_then(|c| c.to_f64())
    }

    /// n-ary canonical sum.
    pub fn add(terms: Vec<Expr>) -> Expr {
        // monomial part -> accumulated coefficient
        let mut acc: BTreeMap<ExprOrd, BigRational> = BTreeMap::new();
        let mut stack = terms;
        stack.reverse();
        while let Some(term) = stack.pop() {
            match term {
                Expr::Sum(ts) => {
                    for t in ts.into_iter().rev() {
                        stack.push(t);
                    }
                }
                other => {
                    let (coeff, mono) = split_coeff(other);
                    if coeff.is_zero() {
                        continue;
                    }
                    let e = acc.entry(ExprOrd(mono)).or_insert_with(BigRational::zero);
                    *e += coeff;
                }
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(acc.len());
        for (ExprOrd(mono), coeff) in acc {
            if coeff.is_zero() {
                continue;
            }
            out.push(attach_coeff(coeff, mono));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Sum(out),
        }
    }

    /// n-ary canonical product.
    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut coeff = BigRational::one();
        // base -> accumulated exponent terms
        let mut bases: BTreeMap<ExprOrd, Vec<Expr>> = BTreeMap::new();
        let mut exp_args: Vec<Expr> = Vec::new();
        let mut stack = factors;
        stack.reverse();
        loop {
            while let Some(f) = stack.pop() {
                match f {
                    Expr::Prod(fs) => {
                        for g in fs.into_iter().rev() {
                            stack.push(g);
                        }
                    }
                    Expr::Const(c) => {
                        if c.is_zero() {
                            return Expr::zero();
                        }
                        coeff *= c;
                    }
                    Expr::Apply(Func::Exp, a) => exp_args.push(*a),
                    Expr::Pow(b, e) => bases.entry(ExprOrd(*b)).or_default().push(*e),
                    other => bases.entry(ExprOrd(other)).or_default().push(Expr::one()),
                }
            }
            if exp_args.is_empty() {
                break;
            }
            // merge exponentials; log splitting may surface new factor kinds,
            // so feed anything that is not a plain exp back through the stack
            let a = Expr::add(std::mem::take(&mut exp_args));
            match Expr::apply(Func::Exp, a) {
                Expr::Const(c) => coeff *= c,
                e @ Expr::Apply(Func::Exp, _) => {
                    bases.entry(ExprOrd(e)).or_default().push(Expr::one());
                }
                other => stack.push(other),
            }
        }
        let mut out: Vec<Expr> = Vec::new();
        for (ExprOrd(base), exps) in bases {
            // a merged exponential re-enters as its own base with exponent 1
            let f = if matches!(base, Expr::Apply(Func::Exp, _))
                && exps.len() == 1
                && exps[0].is_one()
            {
                base
            } else {
                Expr::pow(base, Expr::add(exps))
            };
            match f {
                Expr::Const(c) => {
                    if c.is_zero() {
                        return Expr::zero();
                    }
                    coeff *= c;
                }
                Expr::Prod(fs) => {
                    for g in fs {
                        match g {
                            Expr::Const(c) => coeff *= c,
                            other => out.push(other),
                        }
                    }
                }
                other => out.push(other),
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        // a Pow over a product base can surface factors whose base already
        // occurs; rerun the merge in that rare case
        let mut seen: Vec<&Expr> = Vec::with_capacity(out.len());
        let mut needs_rerun = false;
        for f in &out {
            let base: &Expr = match f {
                Expr::Pow(b, _) => b,
                other => other,
            };
            if seen.iter().any(|s| *s == base) {
                needs_rerun = true;
                break;
            }
            seen.push(base);
        }
        if needs_rerun {
            out.insert(0, Expr::Const(coeff));
            return Expr::mul(out);
        }
        out.sort_by(expr_cmp);
        if !coeff.is_one() || out.is_empty() {
            out.insert(0, Expr::Const(coeff));
        }
        match out.len() {
            0 => Expr::one(),
            1 => out.pop().unwrap(),
            _ => Expr::Prod(out),
        }
    }

    /// Canonical power. Non-integer exponents carry `|base|^p` evaluation
    /// semantics; `0^0` is taken as 1.
    pub fn pow(base: Expr, exponent: Expr) -> Expr {
        let exponent = rational_cancel(&expand(&exponent));
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return base;
        }
        if base.is_one() {
            return Expr::one();
        }
        if let (Expr::Const(b), Expr::Const(e)) = (&base, &exponent) {
            if e.is_integer() {
                if let Some(k) = e.to_integer().to_i64() {
                    if k.unsigned_abs() <= 64 {
                        return Expr::Const(rational_int_pow(b, k));
                    }
                }
            }
            if b.is_zero() && e.is_positive() {
                return Expr::zero();
            }
        }
        if base.is_zero() {
            if let Expr::Const(e) = &exponent {
                if e.is_positive() {
                    return Expr::zero();
                }
            }
        }
        // (b^p)^k -> b^(p*k) when the outer exponent is an integer constant or
        // the base is syntactically nonnegative, so |.|-semantics agree.
        if let Expr::Pow(inner_base, inner_exp) = &base {
            let outer_int = matches!(&exponent, Expr::Const(c) if c.is_integer());
            if outer_int || nonneg_base(inner_base) {
                let merged = Expr::mul(vec![(**inner_exp).clone(), exponent]);
                return Expr::pow((**inner_base).clone(), merged);
            }
        }
        // |b|^(even integer) -> b^(even integer)
        if let Expr::Apply(Func::Abs, inner) = &base {
            if let Expr::Const(c) = &exponent {
                if c.is_integer() && (c.to_integer() % BigInt::from(2)).is_zero() {
                    return Expr::pow((**inner).clone(), exponent);
                }
            }
        }
        // exp(a)^e -> exp(a*e)
        if let Expr::Apply(Func::Exp, a) = &base {
            let merged = Expr::mul(vec![(**a).clone(), exponent]);
            return Expr::apply(Func::Exp, merged);
        }
        // (c * m)^k for integer k distributes over the factors exactly.
        if let Expr::Prod(fs) = &base {
            if let Expr::Const(c) = &exponent {
                if c.is_integer() {
                    let parts: Vec<Expr> = fs
                        .iter()
                        .map(|f| Expr::pow(f.clone(), exponent.clone()))
                        .collect();
                    return Expr::mul(parts);
                }
            }
        }
        Expr::Pow(Box::new(base), Box::new(exponent))
    }

    pub fn apply(f: Func, arg: Expr) -> Expr {
        match (f, &arg) {
            (Func::Exp, a) if a.is_zero() => return Expr::one(),
            (Func::Exp, Expr::Apply(Func::Ln, inner)) => return (**inner).clone(),
            (Func::Exp, _) => {
                // exp(c*ln(w) + rest) -> w^c * exp(rest); extends the domain
                // the same way exp(ln(x)) -> x does
                if let Some(e) = split_exp_of_logs(&arg) {
                    return e;
                }
            }
            (Func::Ln, a) if a.is_one() => return Expr::zero(),
            (Func::Ln, Expr::Apply(Func::Exp, inner)) => return (**inner).clone(),
            (Func::Sin, a) if a.is_zero() => return Expr::zero(),
            (Func::Cos, a) if a.is_zero() => return Expr::one(),
            (Func::Atan, a) if a.is_zero() => return Expr::zero(),
            (Func::Abs, Expr::Const(c)) => return Expr::Const(c.abs()),
            (Func::Abs, Expr::Apply(Func::Abs, _)) => return arg,
            (Func::Abs, Expr::Apply(Func::Exp, _)) => return arg,
            _ => {}
        }
        if f == Func::Abs {
            // |c * m| -> |c| * |m|, |b^(2k)| -> b^(2k)
            match &arg {
                Expr::Prod(fs) => {
                    if let Expr::Const(c) = &fs[0] {
                        if c.is_negative() {
                            let rest = Expr::mul(fs[1..].to_vec());
                            return Expr::mul(vec![
                                Expr::Const(c.abs()),
                                Expr::apply(Func::Abs, rest),
                            ]);
                        }
                    }
                }
                Expr::Pow(b, e) => {
                    if let Expr::Const(c) = &**e {
                        if c.is_integer() && (c.to_integer() % BigInt::from(2)).is_zero() {
                            return Expr::pow((**b).clone(), (**e).clone());
                        }
                    }
                    if nonneg_base(b) {
                        return arg;
                    }
                }
                _ => {}
            }
        }
        Expr::Apply(f, Box::new(arg))
    }

    pub fn neg(self) -> Expr {
        Expr::mul(vec![Expr::int(-1), self])
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs.neg()])
    }

    pub fn div(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, Expr::pow(rhs, Expr::int(-1))])
    }

    pub fn recip(self) -> Expr {
        Expr::pow(self, Expr::int(-1))
    }

    pub fn sqrt(self) -> Expr {
        Expr::pow(self, Expr::rat(1, 2))
    }

    pub fn exp(self) -> Expr {
        Expr::apply(Func::Exp, self)
    }

    pub fn ln(self) -> Expr {
        Expr::apply(Func::Ln, self)
    }

    pub fn abs(self) -> Expr {
        Expr::apply(Func::Abs, self)
    }

    /// Re-canonicalize the whole tree bottom-up. Idempotent.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Sym(_) | Expr::Var(_) => self.clone(),
            Expr::Sum(ts) => Expr::add(ts.iter().map(|t| t.simplify()).collect()),
            Expr::Prod(fs) => Expr::mul(fs.iter().map(|f| f.simplify()).collect()),
            Expr::Pow(b, e) => Expr::pow(b.simplify(), e.simplify()),
            Expr::Apply(f, a) => Expr::apply(*f, a.simplify()),
        }
    }

    /// Capture-free replacement of a variable or symbol, then simplify.
    pub fn substitute(&self, target: &Expr, replacement: &Expr) -> Expr {
        if self == target {
            return replacement.clone();
        }
        match self {
            Expr::Const(_) | Expr::Sym(_) | Expr::Var(_) => self.clone(),
            Expr::Sum(ts) => {
                Expr::add(ts.iter().map(|t| t.substitute(target, replacement)).collect())
            }
            Expr::Prod(fs) => {
                Expr::mul(fs.iter().map(|f| f.substitute(target, replacement)).collect())
            }
            Expr::Pow(b, e) => Expr::pow(
                b.substitute(target, replacement),
                e.substitute(target, replacement),
            ),
            Expr::Apply(f, a) => Expr::apply(*f, a.substitute(target, replacement)),
        }
    }

    pub fn contains(&self, atom: &Expr) -> bool {
        if self == atom {
            return true;
        }
        match self {
            Expr::Const(_) | Expr::Sym(_) | Expr::Var(_) => false,
            Expr::Sum(ts) | Expr::Prod(ts) => ts.iter().any(|t| t.contains(atom)),
            Expr::Pow(b, e) => b.contains(atom) || e.contains(atom),
            Expr::Apply(_, a) => a.contains(atom),
        }
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.contains(&Expr::Var(v))
    }

    /// All free atoms (variables and symbols), sorted by name.
    pub fn free_atoms(&self) -> Vec<Expr> {
        let mut set = std::collections::BTreeSet::new();
        collect_atoms(self, &mut set);
        set.into_iter().map(|ExprOrd(e)| e).collect()
    }
}

fn collect_atoms(e: &Expr, out: &mut std::collections::BTreeSet<ExprOrd>) {
    match e {
        Expr::Const(_) => {}
        Expr::Sym(_) | Expr::Var(_) => {
            out.insert(ExprOrd(e.clone()));
        }
        Expr::Sum(ts) | Expr::Prod(ts) => {
            for t in ts {
                collect_atoms(t, out);
            }
        }
        Expr::Pow(b, ex) => {
            collect_atoms(b, out);
            collect_atoms(ex, out);
        }
        Expr::Apply(_, a) => collect_atoms(a, out),
    }
}

/// Rewrite exp(sum of c_i * ln(w_i) + rest) as prod w_i^c_i * exp(rest).
/// Returns None when no logarithm factor is present.
fn split_exp_of_logs(arg: &Expr) -> Option<Expr> {
    let terms: Vec<Expr> = match arg {
        Expr::Sum(ts) => ts.clone(),
        other => vec![other.clone()],
    };
    let mut powers: Vec<Expr> = Vec::new();
    let mut rest: Vec<Expr> = Vec::new();
    for term in &terms {
        match extract_log_factor(term) {
            Some((coeff, inner)) => powers.push(Expr::pow(inner, coeff)),
            None => rest.push(term.clone()),
        }
    }
    if powers.is_empty() {
        return None;
    }
    if !rest.is_empty() {
        powers.push(Expr::Apply(Func::Exp, Box::new(Expr::add(rest))));
    }
    Some(Expr::mul(powers))
}

/// Split `c * ln(w)` into (c, w); the term must contain exactly one ln factor.
fn extract_log_factor(term: &Expr) -> Option<(Expr, Expr)> {
    match term {
        Expr::Apply(Func::Ln, w) => Some((Expr::one(), (**w).clone())),
        Expr::Prod(fs) => {
            let mut inner: Option<Expr> = None;
            let mut coeff = Vec::new();
            for f in fs {
                match f {
                    Expr::Apply(Func::Ln, w) if inner.is_none() => inner = Some((**w).clone()),
                    Expr::Apply(Func::Ln, _) => return None,
                    other => coeff.push(other.clone()),
                }
            }
            inner.map(|w| (Expr::mul(coeff), w))
        }
        _ => None,
    }
}

/// Syntactic nonnegativity: enough for safe power merging.
fn nonneg_base(e: &Expr) -> bool {
    match e {
        Expr::Const(c) => !c.is_negative(),
        Expr::Apply(Func::Abs, _) | Expr::Apply(Func::Exp, _) => true,
        Expr::Pow(b, ex) => {
            if let Expr::Const(c) = ex {
                if c.is_integer() && (c.to_integer() % BigInt::from(2)).is_zero() {
                    return true;
                }
            }
            nonneg_base(b)
        }
        _ => false,
    }
}

fn rational_int_pow(b: &BigRational, k: i64) -> BigRational {
    if k == 0 {
        return BigRational::one();
    }
    let mut acc = BigRational::one();
    let base = if k > 0 { b.clone() } else { b.recip() };
    for _ in 0..k.unsigned_abs() {
        acc *= base.clone();
    }
    acc
}

/// Split a canonical non-sum term into (numeric coefficient, monomial part).
fn split_coeff(e: Expr) -> (BigRational, Expr) {
    match e {
        Expr::Const(c) => (c, Expr::one()),
        Expr::Prod(fs) => {
            if let Expr::Const(c) = &fs[0] {
                let c = c.clone();
                let rest = fs[1..].to_vec();
                let mono = match rest.len() {
                    0 => Expr::one(),
                    1 => rest.into_iter().next().unwrap(),
                    _ => Expr::Prod(rest),
                };
                (c, mono)
            } else {
                (BigRational::one(), Expr::Prod(fs))
            }
        }
        other => (BigRational::one(), other),
    }
}

fn attach_coeff(coeff: BigRational, mono: Expr) -> Expr {
    if mono.is_one() {
        return Expr::Const(coeff);
    }
    if coeff.is_one() {
        return mono;
    }
    match mono {
        Expr::Prod(mut fs) => {
            fs.insert(0, Expr::Const(coeff));
            Expr::Prod(fs)
        }
        other => Expr::Prod(vec![Expr::Const(coeff), other]),
    }
}

/// Fixed total order on canonical expressions; any such order makes the
/// canonical form unique.
pub fn expr_cmp(a: &Expr, b: &Expr) -> Ordering {
    fn rank(e: &Expr) -> u8 {
        match e {
            Expr::Const(_) => 0,
            Expr::Sym(_) => 1,
            Expr::Var(_) => 2,
            Expr::Apply(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Prod(_) => 5,
            Expr::Sum(_) => 6,
        }
    }
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => x.cmp(y),
        (Expr::Sym(x), Expr::Sym(y)) => x.cmp(y),
        (Expr::Var(x), Expr::Var(y)) => x.cmp(y),
        (Expr::Apply(f, x), Expr::Apply(g, y)) => f.cmp(g).then_with(|| expr_cmp(x, y)),
        (Expr::Pow(bx, ex), Expr::Pow(by, ey)) => {
            expr_cmp(bx, by).then_with(|| expr_cmp(ex, ey))
        }
        (Expr::Prod(xs), Expr::Prod(ys)) | (Expr::Sum(xs), Expr::Sum(ys)) => {
            for (p, q) in xs.iter().zip(ys.iter()) {
                let c = expr_cmp(p, q);
                if c != Ordering::Equal {
                    return c;
                }
            }
            xs.len().cmp(&ys.len())
        }
        _ => rank(a).cmp(&rank(b)),
    }
}

/// Ordered wrapper so expressions can key BTreeMaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ExprOrd(pub Expr);

impl PartialOrd for ExprOrd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExprOrd {
    fn cmp(&self, other: &Self) -> Ordering {
        expr_cmp(&self.0, &other.0)
    }
}

/// Distribute products over sums and expand small integer powers of sums.
/// Exponents are left untouched (they are canonicalized separately).
pub fn expand(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Sym(_) | Expr::Var(_) => e.clone(),
        Expr::Sum(ts) => Expr::add(ts.iter().map(expand).collect()),
        Expr::Apply(f, a) => Expr::apply(*f, expand(a)),
        Expr::Pow(b, ex) => {
            let b = expand(b);
            if let Some(k) = ex.as_integer() {
                if let Some(k) = k.to_i64() {
                    if (2..=8).contains(&k) {
                        if let Expr::Sum(_) = b {
                            let mut acc = b.clone();
                            for _ in 1..k {
                                acc = expand_product(&acc, &b);
                            }
                            return acc;
                        }
                    } else if (-8..=-2).contains(&k) {
                        if let Expr::Sum(_) = b {
                            let mut acc = b.clone();
                            for _ in 1..(-k) {
                                acc = expand_product(&acc, &b);
                            }
                            return Expr::pow(acc, Expr::int(-1));
                        }
                    }
                }
            }
            Expr::pow(b, (**ex).clone())
        }
        Expr::Prod(fs) => {
            let fs: Vec<Expr> = fs.iter().map(expand).collect();
            let mut acc = Expr::one();
            for f in fs {
                acc = expand_product(&acc, &f);
            }
            acc
        }
    }
}

fn expand_product(a: &Expr, b: &Expr) -> Expr {
    let aterms: Vec<Expr> = match a {
        Expr::Sum(ts) => ts.clone(),
        other => vec![other.clone()],
    };
    let bterms: Vec<Expr> = match b {
        Expr::Sum(ts) => ts.clone(),
        other => vec![other.clone()],
    };
    let mut out = Vec::with_capacity(aterms.len() * bterms.len());
    for p in &aterms {
        for q in &bterms {
            out.push(Expr::mul(vec![p.clone(), q.clone()]));
        }
    }
    Expr::add(out)
}

/// Cancel a ratio of univariate polynomials with numeric coefficients, e.g.
/// (2n+2)/(n+1) -> 2.  Used on exponents where such ratios arise constantly.
pub fn rational_cancel(e: &Expr) -> Expr {
    let atoms = e.free_atoms();
    if atoms.len() != 1 {
        return e.clone();
    }
    let atom = &atoms[0];
    match rational::as_rational_in(e, atom) {
        Some(rf) if rf.is_numeric() => {
            let cancelled = rf.normalized();
            if cancelled.den_degree() == 0 {
                cancelled.to_expr(atom)
            } else {
                let simple = cancelled.to_expr(atom);
                if expr_size(&simple) < expr_size(e) {
                    simple
                } else {
                    e.clone()
                }
            }
        }
        _ => e.clone(),
    }
}

pub(crate) fn expr_size(e: &Expr) -> usize {
    match e {
        Expr::Const(_) | Expr::Sym(_) | Expr::Var(_) => 1,
        Expr::Sum(ts) | Expr::Prod(ts) => 1 + ts.iter().map(expr_size).sum::<usize>(),
        Expr::Pow(b, ex) => 1 + expr_size(b) + expr_size(ex),
        Expr::Apply(_, a) => 1 + expr_size(a),
    }
}

/// Zero test through the rewrite system: canonical, then expanded.
pub fn is_zero_expr(e: &Expr) -> bool {
    if e.is_zero() {
        return true;
    }
    let s = e.simplify();
    if s.is_zero() {
        return true;
    }
    expand(&s).is_zero()
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::fmt_expr(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::x()
    }

    #[test]
    fn sum_collects_like_terms() {
        let e = x() + x() + Expr::int(2) * x();
        assert_eq!(e, Expr::int(4) * x());
    }

    #[test]
    fn zero_terms_removed() {
        let e = x() + Expr::zero() + Expr::int(0) * Expr::sym("n");
        assert_eq!(e, x());
    }

    #[test]
    fn product_merges_powers() {
        let e = x() * x().recip();
        assert_eq!(e, Expr::one());
        let n = Expr::sym("n");
        let e = Expr::pow(Expr::u(), n.clone()) * Expr::u().recip() * Expr::u();
        assert_eq!(e, Expr::pow(Expr::u(), n));
    }

    #[test]
    fn exp_ln_cancel() {
        let e = Expr::apply(Func::Exp, Expr::apply(Func::Ln, x()));
        assert_eq!(e, x());
        let e = Expr::apply(Func::Ln, Expr::apply(Func::Exp, x()));
        assert_eq!(e, x());
    }

    #[test]
    fn exp_products_merge() {
        let a = x().exp() * (Expr::int(2) * x()).exp();
        assert_eq!(a, (Expr::int(3) * x()).exp());
    }

    #[test]
    fn constant_powers_fold() {
        assert_eq!(Expr::pow(Expr::int(2), Expr::int(10)), Expr::int(1024));
        assert_eq!(Expr::pow(Expr::int(2), Expr::int(-2)), Expr::rat(1, 4));
        // non-integer exponents stay symbolic
        let s = Expr::pow(Expr::int(2), Expr::rat(1, 2));
        assert!(matches!(s, Expr::Pow(..)));
    }

    #[test]
    fn exponent_rational_cancel() {
        let n = Expr::sym("n");
        let e2 = (Expr::int(2) * n.clone() + Expr::int(2))
            / (n.clone() + Expr::one());
        assert_eq!(e2, Expr::int(2));
        let e = Expr::pow(
            x(),
            (Expr::int(2) * n.clone() + Expr::int(2)) * (n + Expr::one()).recip(),
        );
        assert_eq!(e, Expr::pow(x(), Expr::int(2)));
    }

    #[test]
    fn simplify_idempotent() {
        let e = (x() + Expr::one()) * (x() - Expr::one()) + Expr::pow(x(), Expr::int(2));
        assert_eq!(e.simplify(), e.simplify().simplify());
    }

    #[test]
    fn abs_even_power_drops() {
        let e = Expr::pow(x().abs(), Expr::int(-2));
        assert_eq!(e, Expr::pow(x(), Expr::int(-2)));
    }

    #[test]
    fn expand_square() {
        let e = Expr::pow(x() + Expr::one(), Expr::int(2));
        let ex = expand(&e);
        let want = Expr::pow(x(), Expr::int(2)) + Expr::int(2) * x() + Expr::one();
        assert_eq!(ex, want);
    }

    #[test]
    fn substitute_simple() {
        let e = Expr::pow(x(), Expr::int(2));
        let r = e.substitute(&x(), &x().recip());
        assert_eq!(r, Expr::pow(x(), Expr::int(-2)));
    }
}
