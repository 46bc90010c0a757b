//! IEEE-double evaluation under explicit bindings.

use super::{Expr, Func, Var};
use num::ToPrimitive;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("domain error ({what}) in `{subexpr}`")]
    Domain { what: String, subexpr: String },
}

/// Map from variable/symbol names to values. Deterministic iteration order.
#[derive(Debug, Clone, Default)]
pub struct Bindings(BTreeMap<String, f64>);

impl Bindings {
    pub fn new() -> Self {
        Bindings(BTreeMap::new())
    }

    pub fn bind(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn set_var(&mut self, v: Var, value: f64) {
        self.0.insert(v.name().to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }
}

impl<const N: usize> From<[(&str, f64); N]> for Bindings {
    fn from(pairs: [(&str, f64); N]) -> Self {
        let mut b = Bindings::new();
        for (k, v) in pairs {
            b.set(k, v);
        }
        b
    }
}

impl Expr {
    /// Evaluate to an IEEE double. Every symbol and variable must be bound.
    /// Powers with non-integer exponents use `|base|^p`; integer exponents
    /// keep the exact sign.
    pub fn evaluate(&self, bindings: &Bindings) -> Result<f64, EvalError> {
        let v = self.eval_inner(bindings)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Domain {
                what: "non-finite result".into(),
                subexpr: self.to_string(),
            })
        }
    }

    fn eval_inner(&self, b: &Bindings) -> Result<f64, EvalError> {
        match self {
            Expr::Const(c) => c.to_f64().ok_or_else(|| EvalError::Domain {
                what: "constant out of f64 range".into(),
                subexpr: self.to_string(),
            }),
            Expr::Sym(s) => b.get(s).ok_or_else(|| EvalError::Unbound(s.clone())),
            Expr::Var(v) => b
                .get(v.name())
                .ok_or_else(|| EvalError::Unbound(v.name().to_string())),
            Expr::Sum(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval_inner(b)?;
                }
                Ok(acc)
            }
            Expr::Prod(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval_inner(b)?;
                }
                Ok(acc)
            }
            Expr::Pow(base, ex) => {
                let bb = base.eval_inner(b)?;
                let ee = ex.eval_inner(b)?;
                let integral = ee.fract() == 0.0 && ee.abs() < 9.0e15;
                if bb == 0.0 {
                    if ee > 0.0 {
                        return Ok(0.0);
                    }
                    if ee == 0.0 {
                        return Ok(1.0);
                    }
                    return Err(EvalError::Domain {
                        what: "zero raised to a negative power".into(),
                        subexpr: self.to_string(),
                    });
                }
                let mag = bb.abs().powf(ee);
                if integral {
                    let odd = (ee as i64) % 2 != 0;
                    Ok(if bb < 0.0 && odd { -mag } else { mag })
                } else {
                    Ok(mag)
                }
            }
            Expr::Apply(f, a) => {
                let av = a.eval_inner(b)?;
                match f {
                    Func::Exp => Ok(av.exp()),
                    Func::Ln => {
                        if av <= 0.0 {
                            Err(EvalError::Domain {
                                what: format!("ln of non-positive value {av}"),
                                subexpr: self.to_string(),
                            })
                        } else {
                            Ok(av.ln())
                        }
                    }
                    Func::Sin => Ok(av.sin()),
                    Func::Cos => Ok(av.cos()),
                    Func::Atan => Ok(av.atan()),
                    Func::Abs => Ok(av.abs()),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn square() {
        let e = parse("x^2").unwrap();
        let b = Bindings::from([("x", 3.0)]);
        assert_eq!(e.evaluate(&b).unwrap(), 9.0);
    }

    #[test]
    fn abs_power_semantics() {
        // |x|^(1/2) at x=-4 -> 2
        let e = parse("abs(x)^(1/2)").unwrap();
        let b = Bindings::from([("x", -4.0)]);
        assert_eq!(e.evaluate(&b).unwrap(), 2.0);
        // bare x^(1/2) follows the same |.| semantics
        let e = parse("x^(1/2)").unwrap();
        assert_eq!(e.evaluate(&b).unwrap(), 2.0);
    }

    #[test]
    fn odd_integer_power_keeps_sign() {
        let e = parse("x^3").unwrap();
        let b = Bindings::from([("x", -2.0)]);
        assert_eq!(e.evaluate(&b).unwrap(), -8.0);
    }

    #[test]
    fn exp_at_one() {
        let e = parse("exp(x)").unwrap();
        let b = Bindings::from([("x", 1.0)]);
        assert!((e.evaluate(&b).unwrap() - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn unbound_symbol() {
        let e = parse("n*x").unwrap();
        let b = Bindings::from([("x", 1.0)]);
        assert_eq!(e.evaluate(&b), Err(EvalError::Unbound("n".into())));
    }

    #[test]
    fn pole_reports_subexpression() {
        let e = parse("1/x").unwrap();
        let b = Bindings::from([("x", 0.0)]);
        match e.evaluate(&b) {
            Err(EvalError::Domain { subexpr, .. }) => assert!(subexpr.contains('x')),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let e = parse("sin(x) + x^3 - 1/7*exp(x)").unwrap();
        let b = Bindings::from([("x", 0.37)]);
        let v1 = e.evaluate(&b).unwrap();
        let v2 = e.evaluate(&b).unwrap();
        assert_eq!(v1.to_bits(), v2.to_bits());
    }
}
