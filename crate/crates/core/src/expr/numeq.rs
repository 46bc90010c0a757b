//! Numeric equivalence by sampling: the semantic-equality fallback for
//! everything the rewrite system cannot prove.

use super::{Bindings, Expr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const DEFAULT_TRIALS: usize = 64;
const SEED: u64 = 0x52444c4945; // fixed: results must be reproducible

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumEqError {
    #[error("domain exhausted: all sampled points were singular")]
    DomainExhausted,
}

/// True iff |a-b| <= 1e-9 * (1 + |a|) at every sampled point.  All free
/// atoms of both expressions are sampled uniformly from `domain` with a
/// fixed seed; singular points are skipped and resampled.
pub fn num_equivalent(
    a: &Expr,
    b: &Expr,
    domain: (f64, f64),
    trials: usize,
) -> Result<bool, NumEqError> {
    num_equivalent_tol(a, b, domain, trials, 1e-9)
}

pub fn num_equivalent_tol(
    a: &Expr,
    b: &Expr,
    domain: (f64, f64),
    trials: usize,
    tol: f64,
) -> Result<bool, NumEqError> {
    let mut atoms = a.free_atoms();
    for atom in b.free_atoms() {
        if !atoms.contains(&atom) {
            atoms.push(atom);
        }
    }
    let names: Vec<String> = atoms
        .iter()
        .map(|e| match e {
            Expr::Sym(s) => s.clone(),
            Expr::Var(v) => v.name().to_string(),
            _ => unreachable!("free_atoms returns atoms"),
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (lo, hi) = domain;
    let mut done = 0usize;
    let mut attempts = 0usize;
    let max_attempts = trials.max(1) * 32;
    while done < trials {
        attempts += 1;
        if attempts > max_attempts {
            return Err(NumEqError::DomainExhausted);
        }
        let mut bind = Bindings::new();
        for n in &names {
            bind.set(n, rng.gen_range(lo..=hi));
        }
        let va = match a.evaluate(&bind) {
            Ok(v) => v,
            Err(_) => continue, // singular point, resample
        };
        let vb = match b.evaluate(&bind) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if (va - vb).abs() > tol * (1.0 + va.abs()) {
            return Ok(false);
        }
        done += 1;
    }
    Ok(true)
}

/// Convenience zero test: |e| <= tol at sampled points.
pub(crate) fn num_zero(e: &Expr, domain: (f64, f64), trials: usize, tol: f64) -> bool {
    matches!(
        num_equivalent_tol(&Expr::zero(), e, domain, trials, tol),
        Ok(true)
    )
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn binomial_identity() {
        let a = parse("(x+1)^2").unwrap();
        let b = parse("x^2 + 2*x + 1").unwrap();
        assert!(num_equivalent(&a, &b, (-2.0, 2.0), DEFAULT_TRIALS).unwrap());
    }

    #[test]
    fn sin_is_not_identity() {
        let a = parse("sin(x)").unwrap();
        let b = parse("x").unwrap();
        assert!(!num_equivalent(&a, &b, (-1.0, 1.0), DEFAULT_TRIALS).unwrap());
    }

    #[test]
    fn multiplier_limit_near_singular_exponent() {
        // (1-(n+1)F)^(-1/(n+1)) at n = -1 + 1e-6 approaches e^F
        let n = -1.0 + 1e-6;
        let nr = num::rational::BigRational::from_float(n).unwrap();
        let psi = parse("(1-(n+1)*(1/2*x+1/4))^(-1/(n+1))")
            .unwrap()
            .substitute(&Expr::sym("n"), &Expr::Const(nr));
        let limit = parse("exp(1/2*x+1/4)").unwrap();
        assert!(num_equivalent_tol(&psi, &limit, (0.0, 1.0), DEFAULT_TRIALS, 1e-4).unwrap());
    }

    #[test]
    fn domain_exhausted() {
        let a = parse("ln(0 - x^2 - 1)").unwrap(); // never evaluable
        let r = num_equivalent(&a, &Expr::zero(), (-1.0, 1.0), 8);
        assert_eq!(r, Err(NumEqError::DomainExhausted));
    }

    #[test]
    fn singular_points_resampled() {
        let a = parse("1/x * x").unwrap_or_else(|_| unreachable!());
        // canonicalization folds this to 1, so force a pole another way
        let b = parse("x/x").unwrap();
        assert!(num_equivalent(&a, &b, (-1.0, 1.0), 16).unwrap());
        assert_eq!(a, Expr::one());
        assert_eq!(b, Expr::one());
        // genuine runtime pole: ln(x) near 0 with domain straddling it
        let c = parse("ln(x*x)").unwrap();
        let d = parse("2*ln(abs(x))").unwrap();
        assert!(num_equivalent(&c, &d, (-1.0, 1.0), 16).unwrap());
    }
}
