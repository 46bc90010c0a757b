//! Small exact linear algebra over the rationals plus an f64 least-squares
//! helper. Sized for the handful-of-unknowns systems this crate produces:
//! partial-fraction coefficients, family-matching kernels, span checks.

use num::rational::BigRational;
use num::Zero;

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut Vec<Vec<BigRational>>) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].clone().recip();
        for j in c..cols {
            let v = std::mem::take(&mut m[r][j]);
            m[r][j] = v * inv.clone();
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in c..cols {
                    let sub = factor.clone() * m[r][j].clone();
                    let v = std::mem::take(&mut m[i][j]);
                    m[i][j] = v - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the null space of the homogeneous system `m v = 0`.
pub fn kernel(mut m: Vec<Vec<BigRational>>, cols: usize) -> Vec<Vec<BigRational>> {
    if m.is_empty() {
        // whole space
        let mut basis = Vec::new();
        for i in 0..cols {
            let mut v = vec![BigRational::zero(); cols];
            v[i] = BigRational::from_integer(1.into());
            basis.push(v);
        }
        return basis;
    }
    let pivots = rref(&mut m);
    let mut basis = Vec::new();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    for &fc in &free {
        let mut v = vec![BigRational::zero(); cols];
        v[fc] = BigRational::from_integer(1.into());
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[ri][fc].clone();
        }
        basis.push(v);
    }
    basis
}

/// Solve `a v = b` exactly; None when inconsistent or underdetermined.
pub fn solve(a: Vec<Vec<BigRational>>, b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let cols = if rows == 0 { return None } else { a[0].len() };
    let mut m: Vec<Vec<BigRational>> = a
        .into_iter()
        .zip(b)
        .map(|(mut row, rhs)| {
            row.push(rhs);
            row
        })
        .collect();
    let pivots = rref(&mut m);
    // inconsistency: pivot in the augmented column
    if pivots.contains(&cols) {
        return None;
    }
    if pivots.len() < cols {
        return None;
    }
    let mut out = vec![BigRational::zero(); cols];
    for (ri, &pc) in pivots.iter().enumerate() {
        out[pc] = m[ri][cols].clone();
    }
    Some(out)
}

/// f64 least squares via normal equations; fine at this problem size.
pub fn lstsq(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let rows = a.len();
    if rows == 0 || rows != b.len() {
        return None;
    }
    let cols = a[0].len();
    let mut ata = vec![vec![0.0; cols]; cols];
    let mut atb = vec![0.0; cols];
    for i in 0..rows {
        for j in 0..cols {
            atb[j] += a[i][j] * b[i];
            for k in 0..cols {
                ata[j][k] += a[i][j] * a[i][k];
            }
        }
    }
    // Gaussian elimination with partial pivoting
    let mut m = ata;
    let mut rhs = atb;
    for c in 0..cols {
        let p = (c..cols).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, p);
        rhs.swap(c, p);
        let d = m[c][c];
        for j in c..cols {
            m[c][j] /= d;
        }
        rhs[c] /= d;
        for i in 0..cols {
            if i != c && m[i][c] != 0.0 {
                let f = m[i][c];
                for j in c..cols {
                    m[i][j] -= f * m[c][j];
                }
                rhs[i] -= f * rhs[c];
            }
        }
    }
    Some(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::bigint::BigInt;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn solve_2x2() {
        let a = vec![vec![r(2), r(1)], vec![r(1), r(-1)]];
        let b = vec![r(3), r(0)];
        let v = solve(a, b).unwrap();
        assert_eq!(v, vec![r(1), r(1)]);
    }

    #[test]
    fn kernel_of_rank1() {
        let m = vec![vec![r(1), r(2), r(3)]];
        let k = kernel(m, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let dot = v[0].clone() * r(1) + v[1].clone() * r(2) + v[2].clone() * r(3);
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn lstsq_exact_fit() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 2.0], vec![1.0, 3.0]];
        let b = vec![2.0, 3.0, 4.0];
        let v = lstsq(&a, &b).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
    }
}
