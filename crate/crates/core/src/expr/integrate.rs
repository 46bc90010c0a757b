//! Antiderivative table in `x`: linear combinations of powers of affine
//! arguments, exponentials of affine arguments, and rational functions with
//! rational linear factors (via partial fractions). Everything outside the
//! table is refused with `None` rather than guessed.

use super::rational::{as_rational, Poly};
use super::{expand, Expr, Func};
use crate::linalg;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// Antiderivative of `e` with respect to `x`, integration constant zero in
/// the canonical table form. Logarithms are emitted as `ln(abs(..))` so the
/// result is evaluable on either side of a root.
pub fn antiderivative(e: &Expr) -> Option<Expr> {
    let x = Expr::x();
    if !e.contains(&x) {
        return Some(e.clone() * x);
    }
    match e {
        Expr::Sum(ts) => {
            let mut out = Vec::with_capacity(ts.len());
            for t in ts {
                out.push(antiderivative(t)?);
            }
            Some(Expr::add(out))
        }
        _ => single_term(e).or_else(|| {
            let ex = expand(e);
            if &ex != e {
                antiderivative(&ex)
            } else {
                None
            }
        }),
    }
}

fn single_term(e: &Expr) -> Option<Expr> {
    let x = Expr::x();
    // split x-free factors out of a product
    if let Expr::Prod(fs) = e {
        let (xfree, xdep): (Vec<Expr>, Vec<Expr>) =
            fs.iter().cloned().partition(|f| !f.contains(&x));
        if !xfree.is_empty() {
            let inner = antiderivative(&Expr::mul(xdep))?;
            return Some(Expr::mul(xfree) * inner);
        }
    }
    if e == &x {
        return Some(Expr::pow(x, Expr::int(2)) * Expr::rat(1, 2));
    }
    // power of an affine argument
    if let Expr::Pow(base, exp) = e {
        if !exp.contains(&x) {
            if let Some((a, _b)) = affine_in_x(base) {
                if !a.is_zero() {
                    let k = (**exp).clone();
                    if k == Expr::int(-1) {
                        return Some(
                            Expr::apply(Func::Ln, (**base).clone().abs()) / a,
                        );
                    }
                    // exclude a symbolic k possibly equal to -1 only when
                    // numerically distinguishable; rational k != -1 is safe
                    if let Some(c) = k.as_const() {
                        if *c == -BigRational::one() {
                            unreachable!("handled above");
                        }
                        let k1 = k.clone() + Expr::one();
                        return Some(
                            Expr::pow((**base).clone(), k1.clone()) / (a * k1),
                        );
                    }
                    return None;
                }
            }
        }
    }
    // exponential of an affine argument
    if let Expr::Apply(Func::Exp, arg) = e {
        if let Some((a, _)) = affine_in_x(arg) {
            if !a.is_zero() {
                return Some(e.clone() / a);
            }
        }
    }
    // rational function with rational linear factors
    if let Some(result) = rational_route(e) {
        return Some(result);
    }
    None
}

/// Decompose `e` as `a*x + b` with x-free `a`, `b`.
pub fn affine_in_x(e: &Expr) -> Option<(Expr, Expr)> {
    let x = Expr::x();
    let a = super::diff::diff(e, &x);
    if a.contains(&x) {
        return None;
    }
    let b = e.clone() - a.clone() * x.clone();
    let b = expand(&b).simplify();
    if b.contains(&x) {
        return None;
    }
    Some((a, b))
}

fn rational_route(e: &Expr) -> Option<Expr> {
    let rf = as_rational(e)?;
    if !rf.is_numeric() {
        return None;
    }
    let x = Expr::x();
    if rf.den_degree() == 0 {
        // plain polynomial
        let num = rf.num.to_rationals()?;
        let d0 = rf.den.coeff(0).as_const()?.clone();
        let mut terms = Vec::new();
        for (i, c) in num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let coeff = c / (d0.clone() * BigRational::from_integer(((i + 1) as i64).into()));
            terms.push(Expr::Const(coeff) * Expr::pow(x.clone(), Expr::int(i as i64 + 1)));
        }
        return Some(Expr::add(terms));
    }
    // num/den with deg num < deg den after polynomial division
    let (quot, rem) = rf.num.div_rem(&rf.den)?;
    let mut result = Vec::new();
    if !quot.is_zero() {
        result.push(antiderivative(&quot.to_expr(&x))?);
    }
    if rem.is_zero() {
        return Some(Expr::add(result));
    }
    // factor denominator into rational linear factors, allowing one
    // leftover irreducible quadratic cofactor (-> ln/atan terms)
    let roots = rf.den.rational_roots()?;
    let total: usize = roots.iter().map(|(_, m)| m).sum();
    let cof_deg = rf.den_degree() - total;
    if cof_deg != 0 && cof_deg != 2 {
        return None; // beyond the table
    }
    let lead = rf.den.leading().as_const()?.clone();
    // cofactor = den / prod (x-r_i)^{m_i} (monic)
    let mut lin_prod = Poly::one();
    for (r, m) in &roots {
        let lin = Poly::from_rationals(&[-r.clone(), BigRational::one()]);
        lin_prod = lin_prod.mul(&lin.pow(*m));
    }
    let monic_den = rf.den.scale(&Expr::Const(lead.recip()));
    let (cofactor, rem_check) = monic_den.div_rem(&lin_prod)?;
    if !rem_check.is_zero() {
        return None;
    }
    // unknowns: A_ij for each (root, 1..=mult), then P, Q for the quadratic
    let unknowns: Vec<(BigRational, usize)> = roots
        .iter()
        .flat_map(|(r, m)| (1..=*m).map(move |j| (r.clone(), j)))
        .collect();
    let n = unknowns.len() + cof_deg; // = deg den
    let mut columns: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    for (r, j) in &unknowns {
        let mut p = cofactor.clone();
        for (ri, mi) in &roots {
            let mult = if ri == r { mi - j } else { *mi };
            let lin = Poly::from_rationals(&[-ri.clone(), BigRational::one()]);
            p = p.mul(&lin.pow(mult));
        }
        let mut col = p.to_rationals()?;
        col.resize(n, BigRational::zero());
        columns.push(col);
    }
    if cof_deg == 2 {
        // columns for P*x and Q over the quadratic
        for power in [1usize, 0] {
            let mut p = lin_prod.clone();
            if power == 1 {
                p = p.mul(&Poly::variable());
            }
            let mut col = p.to_rationals()?;
            col.resize(n, BigRational::zero());
            columns.push(col);
        }
    }
    let mut rhs = rem.scale(&Expr::Const(lead.recip())).to_rationals()?;
    rhs.resize(n, BigRational::zero());
    let mut m = vec![vec![BigRational::zero(); n]; n];
    for (ci, col) in columns.iter().enumerate() {
        for (ri, v) in col.iter().enumerate() {
            m[ri][ci] = v.clone();
        }
    }
    let coeffs = linalg::solve(m, rhs)?;
    for ((r, j), a) in unknowns.iter().zip(coeffs.iter()) {
        if a.is_zero() {
            continue;
        }
        let lin = x.clone() - Expr::Const(r.clone());
        let term = if *j == 1 {
            Expr::Const(a.clone()) * Expr::apply(Func::Ln, lin.abs())
        } else {
            let p = 1 - (*j as i64);
            Expr::Const(a / BigRational::from_integer(p.into()))
                * Expr::pow(lin, Expr::int(p))
        };
        result.push(term);
    }
    if cof_deg == 2 {
        let p_coef = coeffs[n - 2].clone();
        let q_coef = coeffs[n - 1].clone();
        result.push(integrate_over_quadratic(&cofactor, p_coef, q_coef)?);
    }
    Some(Expr::add(result))
}

/// Integral of (P x + Q) / (x^2 + b x + c) with no rational roots.
fn integrate_over_quadratic(quad: &Poly, p: BigRational, q: BigRational) -> Option<Expr> {
    let x = Expr::x();
    let b = quad.coeff(1).as_const()?.clone();
    let disc = b.clone() * b.clone()
        - BigRational::from_integer(4.into()) * quad.coeff(0).as_const()?.clone();
    let quad_e = quad.to_expr(&x);
    let mut terms = Vec::new();
    let half_p = p.clone() / BigRational::from_integer(2.into());
    if !half_p.is_zero() {
        terms.push(Expr::Const(half_p) * Expr::apply(Func::Ln, quad_e.clone().abs()));
    }
    // residual constant numerator: Q - P*b/2 over the same quadratic
    let c0 = q - p * b.clone() / BigRational::from_integer(2.into());
    if !c0.is_zero() {
        let shifted = Expr::int(2) * x + Expr::Const(b); // 2x + b
        if disc.is_negative() {
            let s = Expr::Const(-disc).sqrt(); // sqrt(-disc)
            terms.push(
                Expr::int(2) * Expr::Const(c0)
                    * Expr::apply(Func::Atan, shifted / s.clone())
                    / s,
            );
        } else if disc.is_positive() {
            let s = Expr::Const(disc).sqrt();
            let arg = (shifted.clone() - s.clone()) / (shifted + s.clone());
            terms.push(Expr::Const(c0) * Expr::apply(Func::Ln, arg.abs()) / s);
        } else {
            return None; // rational double root would have been deflated
        }
    }
    Some(Expr::add(terms))
}

#[cfg(test)]
mod tests {
    use super::super::{diff, num_equivalent, parse};
    use super::*;

    fn check(src: &str, domain: (f64, f64)) {
        let e = parse(src).unwrap();
        let anti = antiderivative(&e).unwrap_or_else(|| panic!("no antiderivative for {src}"));
        let back = diff(&anti, &Expr::x());
        assert!(
            num_equivalent(&e, &back, domain, 32).unwrap(),
            "d/dx of antiderivative of {src} mismatch: got {back}"
        );
    }

    #[test]
    fn table_members() {
        check("x^2", (0.5, 2.0));
        check("1/x", (0.5, 2.0));
        check("x^(-2)", (0.5, 2.0));
        check("exp(-3*x)", (0.0, 1.0));
        check("(2*x+1)^(-1)", (0.5, 2.0));
        check("(x+2)^(3/2)", (0.5, 2.0));
        check("3*x^2 + 1/x + exp(x)", (0.5, 2.0));
    }

    #[test]
    fn partial_fractions_simple_poles() {
        check("1/(x^2 - 1)", (2.0, 3.0));
        check("1/(x^2 + 3*x + 2)", (0.5, 2.0));
        check("x/(x^2 - 1)", (2.0, 3.0));
    }

    #[test]
    fn partial_fractions_repeated_pole() {
        check("1/(x^2*(x-1))", (2.0, 3.0));
    }

    #[test]
    fn irreducible_quadratics() {
        check("1/(x^2+1)", (-1.0, 1.0));
        check("(x+3)/(2*x^2+1)", (-1.0, 1.0));
        check("1/(x^2-2)", (2.0, 3.0));
        check("1/(x*(x^2+1))", (0.5, 2.0));
    }

    #[test]
    fn refuses_outside_table() {
        assert!(antiderivative(&parse("exp(x^2)").unwrap()).is_none());
        assert!(antiderivative(&parse("sin(x)/x").unwrap()).is_none());
        assert!(antiderivative(&parse("1/(x^4+1)").unwrap()).is_none());
    }

    #[test]
    fn reciprocal_of_square_is_minus_inverse() {
        let a = antiderivative(&parse("x^(-2)").unwrap()).unwrap();
        assert_eq!(a, parse("-x^(-1)").unwrap());
    }

    #[test]
    fn reciprocal_of_exp() {
        let a = antiderivative(&parse("exp(-x)").unwrap()).unwrap();
        assert_eq!(a, parse("-exp(-x)").unwrap());
    }
}
