//! Univariate polynomials and rational functions in one atom (usually `x`)
//! with expression coefficients.  Fully numeric instances get exact gcd
//! cancellation and monic-denominator normalization; symbolic coefficients
//! stay untouched beyond zero-trimming.

use super::{expand, Expr};
use num::rational::BigRational;
use num::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    /// coefficient of s^i at index i; highest entry nonzero (empty = zero)
    pub coeffs: Vec<Expr>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: Expr) -> Poly {
        let mut p = Poly { coeffs: vec![c] };
        p.trim();
        p
    }

    pub fn one() -> Poly {
        Poly::constant(Expr::one())
    }

    pub fn variable() -> Poly {
        Poly {
            coeffs: vec![Expr::zero(), Expr::one()],
        }
    }

    pub fn from_coeffs(coeffs: Vec<Expr>) -> Poly {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn from_rationals(rs: &[BigRational]) -> Poly {
        Poly::from_coeffs(rs.iter().map(|r| Expr::Const(r.clone())).collect())
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Expr {
        self.coeffs.last().cloned().unwrap_or_else(Expr::zero)
    }

    pub fn coeff(&self, i: usize) -> Expr {
        self.coeffs.get(i).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn is_numeric(&self) -> bool {
        self.coeffs.iter().all(|c| matches!(c, Expr::Const(_)))
    }

    pub fn to_rationals(&self) -> Option<Vec<BigRational>> {
        self.coeffs.iter().map(|c| c.as_const().cloned()).collect()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + other.coeff(i));
        }
        Poly::from_coeffs(out)
    }

    pub fn neg(&self) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|c| c.clone().neg()).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Expr::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let t = std::mem::replace(&mut out[i + j], Expr::zero());
                out[i + j] = t + a.clone() * b.clone();
            }
        }
        Poly::from_coeffs(out)
    }

    pub fn scale(&self, k: &Expr) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|c| c.clone() * k.clone()).collect())
    }

    pub fn pow(&self, k: usize) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - 1);
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            out.push(Expr::int(i as i64) * c.clone());
        }
        Poly::from_coeffs(out)
    }

    /// Exact division with remainder; numeric coefficients only.
    pub fn div_rem(&self, den: &Poly) -> Option<(Poly, Poly)> {
        let a = self.to_rationals()?;
        let b = den.to_rationals()?;
        if b.is_empty() {
            return None;
        }
        let mut rem = a;
        let mut quo = vec![BigRational::zero(); rem.len().saturating_sub(b.len() - 1)];
        let lead = b.last().unwrap().clone();
        while rem.len() >= b.len() && !rem.is_empty() {
            let k = rem.len() - b.len();
            let q = rem.last().unwrap() / lead.clone();
            if q.is_zero() {
                break;
            }
            quo[k] = q.clone();
            for (i, bc) in b.iter().enumerate() {
                let t = std::mem::take(&mut rem[k + i]);
                rem[k + i] = t - q.clone() * bc.clone();
            }
            while matches!(rem.last(), Some(c) if c.is_zero()) {
                rem.pop();
            }
        }
        Some((Poly::from_rationals(&quo), Poly::from_rationals(&rem)))
    }

    /// Monic gcd; numeric coefficients only.
    pub fn gcd(&self, other: &Poly) -> Option<Poly> {
        let mut a = self.clone();
        let mut b = other.clone();
        a.to_rationals()?;
        b.to_rationals()?;
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r;
        }
        if a.is_zero() {
            return Some(a);
        }
        let lead = a.leading().as_const().cloned()?;
        Some(a.scale(&Expr::Const(lead.recip())))
    }

    pub fn to_expr(&self, atom: &Expr) -> Expr {
        let mut terms = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            terms.push(c.clone() * Expr::pow(atom.clone(), Expr::int(i as i64)));
        }
        Expr::add(terms)
    }

    pub fn eval_rational(&self, at: &BigRational) -> Option<BigRational> {
        let cs = self.to_rationals()?;
        let mut acc = BigRational::zero();
        for c in cs.iter().rev() {
            acc = acc * at.clone() + c.clone();
        }
        Some(acc)
    }

    /// Rational roots with multiplicity; numeric coefficients only.
    /// Returns None when the coefficient arithmetic is out of reach.
    pub fn rational_roots(&self) -> Option<Vec<(BigRational, usize)>> {
        use num::bigint::BigInt;
        let cs = self.to_rationals()?;
        if cs.len() <= 1 {
            return Some(vec![]);
        }
        // strip powers of s
        let mut poly = cs;
        let mut zero_mult = 0usize;
        while poly.first().map(|c| c.is_zero()).unwrap_or(false) {
            poly.remove(0);
            zero_mult += 1;
        }
        let mut roots: Vec<(BigRational, usize)> = Vec::new();
        if zero_mult > 0 {
            roots.push((BigRational::zero(), zero_mult));
        }
        // integer normalization
        let mut denlcm = BigInt::one();
        for c in &poly {
            denlcm = num::integer::lcm(denlcm, c.denom().clone());
        }
        let ints: Vec<BigInt> = poly
            .iter()
            .map(|c| (c.clone() * BigRational::from_integer(denlcm.clone())).to_integer())
            .collect();
        let a0 = ints.first()?.clone();
        let ak = ints.last()?.clone();
        let p_divs = divisors(&a0.abs())?;
        let q_divs = divisors(&ak.abs())?;
        let mut work = poly;
        'outer: loop {
            if work.len() <= 1 {
                break;
            }
            for p in &p_divs {
                for q in &q_divs {
                    for sign in [1i64, -1] {
                        let cand = BigRational::new(p.clone() * BigInt::from(sign), q.clone());
                        if eval_rats(&work, &cand).is_zero() {
                            let mut mult = 0usize;
                            while work.len() > 1 && eval_rats(&work, &cand).is_zero() {
                                work = deflate(&work, &cand);
                                mult += 1;
                            }
                            if mult > 0 {
                                roots.push((cand, mult));
                                continue 'outer;
                            }
                        }
                    }
                }
            }
            break;
        }
        // root list plus the remaining (root-free over Q) cofactor degree
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        if work.len() > 1 {
            // irreducible-over-Q part remains; caller decides what to do
            return Some(roots_with_cofactor(roots, work.len() - 1));
        }
        Some(roots_with_cofactor(roots, 0))
    }
}

fn roots_with_cofactor(
    mut roots: Vec<(BigRational, usize)>,
    cofactor_degree: usize,
) -> Vec<(BigRational, usize)> {
    // encode the cofactor degree as metadata the caller recomputes; the
    // public contract is: sum of multiplicities + cofactor = degree.
    roots.shrink_to_fit();
    let _ = cofactor_degree;
    roots
}

fn eval_rats(cs: &[BigRational], at: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in cs.iter().rev() {
        acc = acc * at.clone() + c.clone();
    }
    acc
}

fn deflate(cs: &[BigRational], root: &BigRational) -> Vec<BigRational> {
    // synthetic division by (s - root)
    let mut out = vec![BigRational::zero(); cs.len() - 1];
    let mut carry = BigRational::zero();
    for i in (0..cs.len()).rev() {
        let v = cs[i].clone() + carry.clone() * root.clone();
        if i == 0 {
            debug_assert!(v.is_zero());
        } else {
            out[i - 1] = v.clone();
            carry = v;
        }
    }
    out
}

fn divisors(n: &num::bigint::BigInt) -> Option<Vec<num::bigint::BigInt>> {
    use num::bigint::BigInt;
    use num::ToPrimitive;
    if n.is_zero() {
        return Some(vec![BigInt::one()]);
    }
    let n = n.to_u64()?; // desk-scale coefficients only
    if n > 10_000_000 {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(BigInt::from(d));
            if d != n / d {
                out.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    out.sort();
    Some(out)
}

/// Canonical co-prime numerator/denominator pair with monic denominator
/// (after normalization, when the coefficients are numeric).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFunc {
    pub fn new(num: Poly, den: Poly) -> Option<RationalFunc> {
        if den.is_zero() {
            return None;
        }
        Some(RationalFunc { num, den }.normalized())
    }

    pub fn is_numeric(&self) -> bool {
        self.num.is_numeric() && self.den.is_numeric()
    }

    pub fn num_degree(&self) -> usize {
        self.num.degree()
    }

    pub fn den_degree(&self) -> usize {
        self.den.degree()
    }

    /// gcd-cancel and make the denominator monic (numeric path); for
    /// symbolic coefficients only a constant leading coefficient is divided
    /// out of the denominator.
    pub fn normalized(&self) -> RationalFunc {
        if self.is_numeric() && !self.num.is_zero() {
            if let Some(g) = self.num.gcd(&self.den) {
                if g.degree() >= 1 {
                    let (n, _) = self.num.div_rem(&g).unwrap();
                    let (d, _) = self.den.div_rem(&g).unwrap();
                    return RationalFunc { num: n, den: d }.monic();
                }
            }
            return self.clone().monic();
        }
        if let Expr::Const(c) = self.den.leading() {
            if !c.is_one() && !c.is_zero() {
                let inv = Expr::Const(c.recip());
                return RationalFunc {
                    num: self.num.scale(&inv),
                    den: self.den.scale(&inv),
                };
            }
        }
        self.clone()
    }

    fn monic(self) -> RationalFunc {
        if let Expr::Const(c) = self.den.leading() {
            if !c.is_one() && !c.is_zero() {
                let inv = Expr::Const(c.recip());
                return RationalFunc {
                    num: self.num.scale(&inv),
                    den: self.den.scale(&inv),
                };
            }
        }
        self
    }

    pub fn add(&self, other: &RationalFunc) -> Option<RationalFunc> {
        RationalFunc::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn mul(&self, other: &RationalFunc) -> Option<RationalFunc> {
        RationalFunc::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn recip(&self) -> Option<RationalFunc> {
        RationalFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn pow_int(&self, k: i64) -> Option<RationalFunc> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let mut acc = RationalFunc::new(Poly::one(), Poly::one())?;
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Some(acc)
    }

    pub fn to_expr(&self, atom: &Expr) -> Expr {
        self.num.to_expr(atom) / self.den.to_expr(atom)
    }
}

/// Interpret an expression as a rational function of `x`.
pub fn as_rational(e: &Expr) -> Option<RationalFunc> {
    as_rational_in(e, &Expr::x())
}

/// Interpret an expression as a rational function of the given atom; other
/// atoms are carried inside the coefficients when they do not obstruct the
/// polynomial structure.
pub fn as_rational_in(e: &Expr, atom: &Expr) -> Option<RationalFunc> {
    let e = expand(e);
    build(&e, atom)
}

fn build(e: &Expr, atom: &Expr) -> Option<RationalFunc> {
    use num::ToPrimitive;
    if e == atom {
        return RationalFunc::new(Poly::variable(), Poly::one());
    }
    if !e.contains(atom) {
        return RationalFunc::new(Poly::constant(e.clone()), Poly::one());
    }
    match e {
        Expr::Sum(ts) => {
            let mut acc = RationalFunc::new(Poly::zero(), Poly::one())?;
            for t in ts {
                acc = acc.add(&build(t, atom)?)?;
            }
            Some(acc)
        }
        Expr::Prod(fs) => {
            let mut acc = RationalFunc::new(Poly::one(), Poly::one())?;
            for f in fs {
                acc = acc.mul(&build(f, atom)?)?;
            }
            Some(acc)
        }
        Expr::Pow(b, ex) => {
            if ex.contains(atom) {
                return None;
            }
            let k = ex.as_const()?;
            if !k.is_integer() {
                return None;
            }
            let k = k.to_integer().to_i64()?;
            build(b, atom)?.pow_int(k)
        }
        _ => None, // Apply with the atom inside, etc.
    }
}

#[cfg(test)]
mod tests {
    use super::super::{diff, parse};
    use super::*;

    #[test]
    fn gcd_cancellation() {
        // (x^2-1)/(x-1) -> (x+1)/1
        let e = parse("(x^2-1)/(x-1)").unwrap();
        let r = as_rational(&e).unwrap();
        assert_eq!(r.num.to_expr(&Expr::x()), parse("x+1").unwrap());
        assert_eq!(r.den.to_expr(&Expr::x()), Expr::one());
    }

    #[test]
    fn exp_is_not_rational() {
        assert!(as_rational(&parse("exp(x)").unwrap()).is_none());
    }

    #[test]
    fn log_derivative_of_power() {
        // d/dx ln(x^d') = d'/x : degree (0, 1)
        let d = Expr::sym("dp");
        let f = Expr::pow(Expr::x(), d.clone());
        let lf = diff(&f, &Expr::x()) / f;
        let r = as_rational(&lf).unwrap();
        assert_eq!(r.num_degree(), 0);
        assert_eq!(r.den_degree(), 1);
        assert_eq!(r.num.coeff(0), d);
    }

    #[test]
    fn roundtrip_to_expr() {
        let e = parse("(3*x^2 + 1)/(x - 2)").unwrap();
        let r = as_rational(&e).unwrap();
        let back = as_rational(&r.to_expr(&Expr::x())).unwrap();
        assert_eq!(r, back);
    }

    #[test]
    fn monic_denominator() {
        let e = parse("x/(2*x - 4)").unwrap();
        let r = as_rational(&e).unwrap();
        assert_eq!(r.den.leading(), Expr::one());
        assert_eq!(r.den.coeff(0), Expr::int(-2));
        assert_eq!(r.num.leading(), Expr::rat(1, 2));
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        // (x-1)^2 (x+2) = x^3 - 3x + 2
        let p = Poly::from_rationals(&[
            BigRational::from_integer(2.into()),
            BigRational::from_integer((-3).into()),
            BigRational::from_integer(0.into()),
            BigRational::from_integer(1.into()),
        ]);
        let roots = p.rational_roots().unwrap();
        let total: usize = roots.iter().map(|(_, m)| m).sum();
        assert_eq!(total, 3);
        assert!(roots
            .iter()
            .any(|(r, m)| *r == BigRational::from_integer(1.into()) && *m == 2));
    }

    #[test]
    fn symbolic_coefficients_allowed() {
        let e = parse("(n*x + 1)/(x^2)").unwrap();
        let r = as_rational(&e).unwrap();
        assert_eq!(r.num_degree(), 1);
        assert_eq!(r.den_degree(), 2);
        assert!(!r.is_numeric());
    }
}
