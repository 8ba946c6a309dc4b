//! Exhaustive support enumeration for tiny weighted basis pursuit problems.

use nalgebra::{DMatrix, DVector};

use super::check_weights;
use crate::error::{Error, Result};

/// Largest number of columns accepted.
pub const ORACLE_MAX_COLS: usize = 12;
const FEASIBLE: f64 = 1e-9;

/// Minimizes ‖z‖_{1,w} over {Az = y} by enumerating every support of at most
/// `s_max` linearly independent columns. The minimum of a weighted ℓ¹ norm over
/// an affine set is attained at such a basic solution, so with
/// s_max ≥ rank(A) the result is the global minimizer.
pub fn oracle_min_l1(a: &DMatrix<f64>, y: &[f64], w: &[f64], s_max: usize) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if n > ORACLE_MAX_COLS {
        return Err(Error::CapExceeded(format!("oracle accepts at most {ORACLE_MAX_COLS} columns, got {n}")));
    }
    if s_max > n {
        return Err(Error::Precondition(format!("s_max = {s_max} exceeds {n} columns")));
    }
    check_weights(w, n, 1)?;
    if y.len() != m {
        return Err(Error::Shape(format!("y has length {} but A has {m} rows", y.len())));
    }
    let yv = DVector::from_column_slice(y);
    let mut best: Option<(f64, Vec<f64>)> = None;
    if yv.norm() <= FEASIBLE {
        return Ok(vec![0.0; n]);
    }
    for mask in 1u32..(1u32 << n) {
        let support: Vec<usize> = (0..n).filter(|&j| mask & (1 << j) != 0).collect();
        if support.len() > s_max || support.len() > m {
            continue;
        }
        let sub = DMatrix::from_fn(m, support.len(), |i, k| a[(i, support[k])]);
        let svd = sub.clone().svd(true, true);
        let smax = svd.singular_values.max();
        if svd.singular_values.min() <= 1e-10 * smax.max(1.0) {
            continue;
        }
        let Ok(coef) = svd.solve(&yv, 0.0) else { continue };
        if (&sub * &coef - &yv).norm() > FEASIBLE * yv.norm().max(1.0) {
            continue;
        }
        let obj: f64 = support.iter().zip(coef.iter()).map(|(&j, c)| w[j] * c.abs()).sum();
        if best.as_ref().is_none_or(|b| obj < b.0 - 1e-14) {
            let mut x = vec![0.0; n];
            for (&j, c) in support.iter().zip(coef.iter()) {
                x[j] = *c;
            }
            best = Some((obj, x));
        }
    }
    best.map(|b| b.1)
        .ok_or_else(|| Error::Infeasible(format!("no support of size <= {s_max} reproduces y")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_data() {
        let a = DMatrix::identity(4, 4);
        let y = [1.0, -2.0, 0.0, 3.0];
        let x = oracle_min_l1(&a, &y, &[1.0; 4], 4).unwrap();
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-14));
    }

    #[test]
    fn one_by_two() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert_eq!(oracle_min_l1(&a, &[2.0], &[1.0, 1.0], 1).unwrap(), vec![0.0, 1.0]);
        assert_eq!(oracle_min_l1(&a, &[2.0], &[1.0, 4.0], 1).unwrap(), vec![2.0, 0.0]);
        // scaling all weights keeps the minimizer
        assert_eq!(oracle_min_l1(&a, &[2.0], &[3.0, 12.0], 1).unwrap(), vec![2.0, 0.0]);
    }

    #[test]
    fn caps() {
        let a = DMatrix::<f64>::zeros(2, 13);
        assert!(oracle_min_l1(&a, &[1.0, 0.0], &[1.0; 13], 2).is_err());
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        assert!(matches!(oracle_min_l1(&a, &[1.0, 2.0], &[1.0; 2], 2), Err(Error::Infeasible(_))));
    }
}
