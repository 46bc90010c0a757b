//! The reaction-diffusion equation value `f(x) u_t = (g(x) u^n u_x)_x +
//! h(x) u^m`, its symbolic residual operator, and the diffusion-coefficient
//! gauge `g -> 1`.

use crate::expr::{
    antiderivative, diff, is_zero_expr, num_equivalent, parse, Bindings, Expr, ParseError, Var,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquationError {
    #[error("n = 0 excluded: the diffusion coefficient must be nonlinear")]
    LinearDiffusion,
    #[error("f*g vanishes identically on the working domain")]
    DegenerateCoefficients,
    #[error("coefficient `{0}` must depend on x only")]
    BadCoefficient(String),
    #[error("equation literal: {0}")]
    Literal(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("antiderivative of 1/g is outside the integrable family")]
    NotIntegrable,
    #[error("the substitution x -> X(x) has no closed-form inverse in the expression language")]
    NotInvertible,
}

/// One member of the class, defined by the arbitrary elements (f, g, h, n, m).
#[derive(Debug, Clone, PartialEq)]
pub struct RDEquation {
    pub f: Expr,
    pub g: Expr,
    pub h: Expr,
    pub n: Expr,
    pub m: Expr,
}

impl RDEquation {
    /// Construct and validate. When `h` vanishes identically, `m` is
    /// normalized to `n + 1`.
    pub fn new(f: Expr, g: Expr, h: Expr, n: Expr, m: Expr) -> Result<RDEquation, EquationError> {
        let f = f.simplify();
        let g = g.simplify();
        let h = h.simplify();
        let n = n.simplify();
        let m = m.simplify();
        if is_zero_expr(&n) {
            return Err(EquationError::LinearDiffusion);
        }
        for (name, e) in [("f", &f), ("g", &g), ("h", &h)] {
            for v in [Var::T, Var::U, Var::Ux, Var::Ut, Var::Uxx, Var::Utx, Var::Utt] {
                if e.contains_var(v) {
                    return Err(EquationError::BadCoefficient(name.to_string()));
                }
            }
        }
        let fg = f.clone() * g.clone();
        if is_zero_expr(&fg) {
            return Err(EquationError::DegenerateCoefficients);
        }
        // numeric spot check on a default window away from common poles
        if fg.free_atoms().iter().all(|a| *a == Expr::x()) {
            let mut all_zero = true;
            for i in 0..16 {
                let x = 1.0 + (i as f64) / 16.0;
                match fg.evaluate(&Bindings::from([("x", x)])) {
                    Ok(v) if v != 0.0 => {
                        all_zero = false;
                        break;
                    }
                    _ => {}
                }
            }
            if all_zero {
                return Err(EquationError::DegenerateCoefficients);
            }
        }
        let m = if is_zero_expr(&h) {
            n.clone() + Expr::one()
        } else {
            m
        };
        Ok(RDEquation { f, g, h, n, m })
    }

    /// Parse the CLI literal `f=<expr>; g=<expr>; h=<expr>; n=<expr>; m=<expr>`.
    pub fn from_literal(text: &str) -> Result<RDEquation, EquationError> {
        let mut f = None;
        let mut g = None;
        let mut h = None;
        let mut n = None;
        let mut m = None;
        for part in text.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| EquationError::Literal(format!("expected key=expr, got `{part}`")))?;
            let e = parse(value.trim())?;
            match key.trim() {
                "f" => f = Some(e),
                "g" => g = Some(e),
                "h" => h = Some(e),
                "n" => n = Some(e),
                "m" => m = Some(e),
                other => {
                    return Err(EquationError::Literal(format!("unknown key `{other}`")));
                }
            }
        }
        let missing = |k: &str| EquationError::Literal(format!("missing `{k}=`"));
        RDEquation::new(
            f.ok_or_else(|| missing("f"))?,
            g.ok_or_else(|| missing("g"))?,
            h.ok_or_else(|| missing("h"))?,
            n.ok_or_else(|| missing("n"))?,
            m.ok_or_else(|| missing("m"))?,
        )
    }

    pub fn to_literal(&self) -> String {
        format!(
            "f={}; g={}; h={}; n={}; m={}",
            self.f, self.g, self.h, self.n, self.m
        )
    }

    pub fn h_is_zero(&self) -> bool {
        is_zero_expr(&self.h)
    }

    pub fn g_is_one(&self) -> bool {
        self.g.is_one()
    }

    pub fn n_f64(&self) -> Option<f64> {
        self.n.as_f64()
    }

    pub fn m_f64(&self) -> Option<f64> {
        self.m.as_f64()
    }

    /// Right-hand side solved for u_t on the jet space:
    /// ((g u^n u_x)_x + h u^m) / f, with jet variables left symbolic.
    pub fn ut_rhs(&self) -> Expr {
        let u = Expr::u();
        let ux = Expr::var(Var::Ux);
        let uxx = Expr::var(Var::Uxx);
        let x = Expr::x();
        let un = Expr::pow(u.clone(), self.n.clone());
        // (g u^n u_x)_x expanded over the jet: g_x u^n u_x + g n u^(n-1) u_x^2 + g u^n u_xx
        let gx = diff(&self.g, &x);
        let diffusion = gx * un.clone() * ux.clone()
            + self.g.clone()
                * self.n.clone()
                * Expr::pow(u.clone(), self.n.clone() - Expr::one())
                * Expr::pow(ux, Expr::int(2))
            + self.g.clone() * un * uxx;
        let source = self.h.clone() * Expr::pow(u, self.m.clone());
        (diffusion + source) / self.f.clone()
    }

    /// Residual of a candidate solution u(t, x):
    /// f u_t - (g u^n u_x)_x - h u^m with everything substituted.
    pub fn residual(&self, u: &Expr) -> Expr {
        let x = Expr::x();
        let t = Expr::t();
        let ut = diff(u, &t);
        let ux = diff(u, &x);
        let flux = self.g.clone() * Expr::pow(u.clone(), self.n.clone()) * ux;
        let lhs = self.f.clone() * ut;
        let rhs = diff(&flux, &x) + self.h.clone() * Expr::pow(u.clone(), self.m.clone());
        crate::expr::expand(&(lhs - rhs)).simplify()
    }

    /// Gauge the diffusion coefficient to 1 via x~ = integral dx/g, which
    /// turns (f, g, h) into (g f, 1, g h) re-expressed in the new variable.
    /// Returns the gauged equation and the transformation that realizes it.
    pub fn gauge_to_g1(
        &self,
    ) -> Result<(RDEquation, crate::equivgroup::PointTransformation), EquationError> {
        use crate::equivgroup::PointTransformation;
        if self.g_is_one() {
            return Ok((self.clone(), PointTransformation::identity()));
        }
        let x = Expr::x();
        let integrand = self.g.clone().recip().simplify();
        let big_x = antiderivative(&integrand).ok_or(EquationError::NotIntegrable)?;
        let inverse = crate::equivgroup::solve_for_x(&big_x).ok_or(EquationError::NotInvertible)?;
        let ftilde = (self.g.clone() * self.f.clone()).substitute(&x, &inverse);
        let htilde = (self.g.clone() * self.h.clone()).substitute(&x, &inverse);
        let eq = RDEquation::new(
            ftilde.simplify(),
            Expr::one(),
            htilde.simplify(),
            self.n.clone(),
            self.m.clone(),
        )?;
        let tr = PointTransformation::gauge(big_x);
        Ok((eq, tr))
    }

    /// Pointwise identity check of the residual expansion against the
    /// hand-expanded form, used as an internal oracle.
    pub fn residual_expansion_matches(&self, u: &Expr) -> bool {
        let x = Expr::x();
        let t = Expr::t();
        let ux = diff(u, &x);
        let expanded = self.f.clone() * diff(u, &t)
            - diff(&self.g, &x) * Expr::pow(u.clone(), self.n.clone()) * ux.clone()
            - self.g.clone()
                * self.n.clone()
                * Expr::pow(u.clone(), self.n.clone() - Expr::one())
                * Expr::pow(ux.clone(), Expr::int(2))
            - self.g.clone() * Expr::pow(u.clone(), self.n.clone()) * diff(&ux, &x)
            - self.h.clone() * Expr::pow(u.clone(), self.m.clone());
        let r = self.residual(u);
        let d = r - expanded;
        is_zero_expr(&d) || matches!(num_equivalent(&Expr::zero(), &d, (0.4, 2.0), 32), Ok(true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::num_equivalent;

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn constant_coefficient_equation() {
        let eq = RDEquation::new(e("1"), e("1"), e("1"), e("2"), e("5")).unwrap();
        assert_eq!(eq.m, Expr::int(5));
    }

    #[test]
    fn zero_source_normalizes_m() {
        let eq = RDEquation::new(e("1"), e("1"), e("0"), e("1"), e("7")).unwrap();
        assert_eq!(eq.m, Expr::int(2));
    }

    #[test]
    fn n_zero_rejected() {
        let r = RDEquation::new(e("x"), e("1"), e("1"), e("0"), e("2"));
        assert_eq!(r, Err(EquationError::LinearDiffusion));
    }

    #[test]
    fn degenerate_fg_rejected() {
        let r = RDEquation::new(e("0"), e("1"), e("1"), e("1"), e("2"));
        assert_eq!(r, Err(EquationError::DegenerateCoefficients));
    }

    #[test]
    fn literal_roundtrip() {
        let eq = RDEquation::from_literal("f=1; g=1; h=1; n=2; m=5").unwrap();
        let eq2 = RDEquation::from_literal(&eq.to_literal()).unwrap();
        assert_eq!(eq, eq2);
    }

    #[test]
    fn residual_of_exact_solution_vanishes() {
        // u = x^2/(6(1-t)) solves u_t = (u u_x)_x
        let eq = RDEquation::new(e("1"), e("1"), e("0"), e("1"), e("2")).unwrap();
        let u = e("x^2/(6*(1-t))");
        let r = eq.residual(&u);
        assert!(
            is_zero_expr(&r) || num_equivalent(&Expr::zero(), &r, (0.1, 0.9), 32).unwrap(),
            "residual should vanish, got {r}"
        );
    }

    #[test]
    fn residual_of_constant() {
        let eq = RDEquation::new(e("1"), e("1"), e("0"), Expr::sym("n"), e("1")).unwrap();
        let r = eq.residual(&Expr::sym("c"));
        assert!(r.is_zero());
        // with a source the constant picks up -eps*c^m
        let eq =
            RDEquation::new(e("1"), e("1"), Expr::sym("eps"), Expr::sym("n"), Expr::sym("m"))
                .unwrap();
        let r = eq.residual(&Expr::sym("c"));
        let want = (Expr::sym("eps") * Expr::pow(Expr::sym("c"), Expr::sym("m"))).neg();
        assert_eq!(r, want);
    }

    #[test]
    fn residual_expansion_identity() {
        let eq = RDEquation::new(e("x"), e("x^2"), e("1"), e("2"), e("3")).unwrap();
        assert!(eq.residual_expansion_matches(&e("x^2*t + x")));
    }

    #[test]
    fn gauge_identity_when_g_is_one() {
        let eq = RDEquation::new(e("1"), e("1"), e("1"), e("1"), e("3")).unwrap();
        let (gauged, tr) = eq.gauge_to_g1().unwrap();
        assert_eq!(gauged, eq);
        assert!(tr.is_identity());
    }

    #[test]
    fn gauge_power_and_exponential() {
        // g = x^2: X = -1/x
        let eq = RDEquation::new(e("x"), e("x^2"), e("0"), e("1"), e("2")).unwrap();
        let (gauged, tr) = eq.gauge_to_g1().unwrap();
        assert!(gauged.g_is_one());
        assert_eq!(tr.x_map, e("-1/x"));
        // f~(X(x)) must equal g(x) f(x)
        let lhs = gauged.f.substitute(&Expr::x(), &tr.x_map);
        let want = e("x^3");
        assert!(num_equivalent(&lhs, &want, (0.5, 2.0), 32).unwrap());

        // g = e^x: X = -e^(-x)
        let eq = RDEquation::new(e("1"), e("exp(x)"), e("0"), e("1"), e("2")).unwrap();
        let (gauged, tr) = eq.gauge_to_g1().unwrap();
        assert_eq!(tr.x_map, e("-exp(-x)"));
        let lhs = gauged.f.substitute(&Expr::x(), &tr.x_map);
        assert!(num_equivalent(&lhs, &e("exp(x)"), (0.2, 1.5), 32).unwrap());
    }

    #[test]
    fn gauge_is_projection() {
        let eq = RDEquation::new(e("x"), e("x^2"), e("0"), e("1"), e("2")).unwrap();
        let (g1, _) = eq.gauge_to_g1().unwrap();
        let (g2, tr2) = g1.gauge_to_g1().unwrap();
        assert_eq!(g1, g2);
        assert!(tr2.is_identity());
    }

    #[test]
    fn not_integrable_reported() {
        let eq = RDEquation::new(e("1"), e("exp(x^2)"), e("0"), e("1"), e("2")).unwrap();
        assert_eq!(eq.gauge_to_g1().unwrap_err(), EquationError::NotIntegrable);
    }
}
