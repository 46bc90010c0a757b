//! Partial differentiation with respect to a variable or symbol atom.
//! Jet variables are treated as independent; total derivatives are built on
//! top of this by the consumers that know the jet structure.

use super::{Expr, Func};

/// d e / d v, where `v` is a `Var` or `Sym` atom. Total function: any
/// expression can be differentiated, producing a canonical result.
///
/// `|b|^p` semantics: d/dv |b| = b * b_v / |b|, so chains through abs keep the
/// exact sign factor.
pub fn diff(e: &Expr, v: &Expr) -> Expr {
    debug_assert!(
        matches!(v, Expr::Var(_) | Expr::Sym(_)),
        "differentiation target must be an atom"
    );
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Sym(_) | Expr::Var(_) => {
            if e == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Sum(ts) => Expr::add(ts.iter().map(|t| diff(t, v)).collect()),
        Expr::Prod(fs) => {
            let mut terms = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                let df = diff(f, v);
                if df.is_zero() {
                    continue;
                }
                let mut parts = Vec::with_capacity(fs.len());
                for (j, g) in fs.iter().enumerate() {
                    parts.push(if i == j { df.clone() } else { g.clone() });
                }
                terms.push(Expr::mul(parts));
            }
            Expr::add(terms)
        }
        Expr::Pow(b, ex) => {
            let db = diff(b, v);
            let de = diff(ex, v);
            let mut terms = Vec::new();
            if !db.is_zero() {
                // e * b^(e-1) * b'
                terms.push(Expr::mul(vec![
                    (**ex).clone(),
                    Expr::pow((**b).clone(), (**ex).clone() - Expr::one()),
                    db,
                ]));
            }
            if !de.is_zero() {
                // ln(b) * b^e * e'
                terms.push(Expr::mul(vec![
                    Expr::apply(Func::Ln, (**b).clone()),
                    e.clone(),
                    de,
                ]));
            }
            Expr::add(terms)
        }
        Expr::Apply(f, a) => {
            let da = diff(a, v);
            if da.is_zero() {
                return Expr::zero();
            }
            let outer = match f {
                Func::Exp => e.clone(),
                Func::Ln => (**a).clone().recip(),
                Func::Sin => Expr::apply(Func::Cos, (**a).clone()),
                Func::Cos => Expr::apply(Func::Sin, (**a).clone()).neg(),
                Func::Atan => {
                    (Expr::one() + Expr::pow((**a).clone(), Expr::int(2))).recip()
                }
                // d|a| = a/|a| * da, exact sign bookkeeping
                Func::Abs => Expr::mul(vec![(**a).clone(), e.clone().recip()]),
            };
            Expr::mul(vec![outer, da])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{num_equivalent, parse};
    use super::*;

    fn x() -> Expr {
        Expr::x()
    }

    #[test]
    fn power_rule() {
        let e = Expr::pow(x(), Expr::int(3));
        assert_eq!(diff(&e, &x()), Expr::int(3) * Expr::pow(x(), Expr::int(2)));
    }

    #[test]
    fn chain_rule_exp() {
        let k = Expr::sym("k");
        let e = (k.clone() * x()).exp();
        assert_eq!(diff(&e, &x()), k.clone() * (k * x()).exp());
    }

    #[test]
    fn linearity() {
        let a = parse("3*x^2 + sin(x)").unwrap();
        let want = parse("6*x + cos(x)").unwrap();
        assert_eq!(diff(&a, &x()), want);
    }

    #[test]
    fn psi_template_derivative() {
        // d/dx (1-(n+1)(d3*x+d4))^(-1/(n+1))
        //   = d3 * (1-(n+1)(d3*x+d4))^(-1/(n+1)-1)
        let e = parse("(1-(n+1)*(d3*x+d4))^(-1/(n+1))").unwrap();
        let got = diff(&e, &x());
        let want = parse("d3*(1-(n+1)*(d3*x+d4))^(-1/(n+1)-1)").unwrap();
        let lhs = got - want;
        // compare numerically with several sampled bindings
        for (n, d3, d4) in [(2.0, 0.5, 0.25), (0.5, 0.125, 0.0), (-3.0, 0.2, 0.1)] {
            let mut bound = lhs.clone();
            for (name, val) in [("n", n), ("d3", d3), ("d4", d4)] {
                // substitute exact rationals for the constants
                let r = Expr::Const(num::rational::BigRational::from_float(val).unwrap());
                bound = bound.substitute(&Expr::sym(name), &r);
            }
            assert_eq!(
                num_equivalent(&Expr::zero(), &bound, (0.05, 0.9), 20).unwrap(),
                true,
                "mismatch at n={n}"
            );
        }
    }

    #[test]
    fn abs_derivative_sign() {
        // d/dx |x| = x/|x|
        let e = x().abs();
        let d = diff(&e, &x());
        let want = x() * x().abs().recip();
        assert_eq!(d, want);
    }

    #[test]
    fn jet_vars_independent() {
        use super::super::Var;
        let e = Expr::var(Var::Ux) * Expr::u();
        assert_eq!(diff(&e, &Expr::u()), Expr::var(Var::Ux));
        assert_eq!(diff(&e, &Expr::var(Var::Ux)), Expr::u());
        assert_eq!(diff(&e, &x()), Expr::zero());
    }
}
