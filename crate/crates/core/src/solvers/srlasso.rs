//! Weighted square-root LASSO by the Chambolle–Pock primal-dual method.

use super::{check_weights, dual_scale, soft_threshold, weighted_l1, SolveOptions, SolveReport, SolveStatus};
use crate::error::{Error, Result};
use crate::sampling::operator::{dot, norm, operator_norm};
use crate::sampling::LinearOperator;

const POWER_ITERS: usize = 100;

/// minimize λ‖z‖_{1,w} + ‖Az − y‖₂.
///
/// Steps τ = ρ·0.99/‖A‖ and σ = 0.99/(ρ‖A‖) with ρ = `step_ratio`, so that
/// τσ‖A‖² < 1. The dual iterate lies in the unit ball; rescaled so that
/// |Aᵀv| ≤ λw it gives the dual value −⟨v, y⟩ used for the gap test.
pub fn weighted_sqrt_lasso(
    a: &dyn LinearOperator,
    y: &[f64],
    w: &[f64],
    lambda: f64,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    opts.validate()?;
    let group = a.group();
    let n = a.cols();
    check_weights(w, n, group)?;
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!("lambda must be positive, got {lambda}")));
    }
    if y.len() != a.rows() {
        return Err(Error::Shape(format!("y has length {} but A has {} rows", y.len(), a.rows())));
    }
    let lw: Vec<f64> = w.iter().map(|v| v * lambda).collect();
    let objective = |x: &[f64], ax: &[f64]| -> f64 {
        weighted_l1(x, &lw, group) + ax.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
    };
    let mut x = vec![0.0; n];
    let mut ax = vec![0.0; y.len()];
    let mut best = (objective(&x, &ax), x.clone());
    if norm(y) == 0.0 {
        return Ok((x, report(a, &best.1, y, best.0, 0, 0.0, SolveStatus::Converged)));
    }
    let op_norm = operator_norm(a, POWER_ITERS, 0).max(f64::MIN_POSITIVE);
    let tau = opts.step_ratio * 0.99 / op_norm;
    let sigma = 0.99 / (opts.step_ratio * op_norm);

    let mut v = vec![0.0; y.len()];
    let mut ax_prev = ax.clone();
    let mut status = SolveStatus::MaxIters;
    let mut iterations = opts.max_iters;
    let mut gap = f64::INFINITY;
    for it in 1..=opts.max_iters {
        // dual step at the extrapolated point 2x − x_prev
        for i in 0..v.len() {
            v[i] += sigma * (2.0 * ax[i] - ax_prev[i] - y[i]);
        }
        let vn = norm(&v);
        if vn > 1.0 {
            v.iter_mut().for_each(|t| *t /= vn);
        }
        let atv = a.adjoint(&v);
        // primal step
        let mut xn: Vec<f64> = x.iter().zip(&atv).map(|(p, q)| p - tau * q).collect();
        soft_threshold(&mut xn, &lw, tau, group);
        ax_prev = std::mem::replace(&mut ax, a.apply(&xn));
        x = xn;

        let primal = objective(&x, &ax);
        let c = dual_scale(&atv, &lw, group).max(1.0);
        let dual = -dot(&v, y) / c;
        gap = primal - dual;
        if primal < best.0 {
            best = (primal, x.clone());
        }
        if gap <= opts.opt_tol * (1.0 + primal.abs()) {
            status = SolveStatus::Converged;
            iterations = it;
            break;
        }
        if opts.verbosity > 1 && it % 500 == 0 {
            eprintln!("srlasso iter {it}: objective {primal:.6e} gap {gap:.3e}");
        }
    }
    let (obj, xb) = best;
    Ok((xb.clone(), report(a, &xb, y, obj, iterations, gap.max(0.0), status)))
}

fn report(
    a: &dyn LinearOperator,
    x: &[f64],
    y: &[f64],
    objective: f64,
    iterations: usize,
    gap: f64,
    status: SolveStatus,
) -> SolveReport {
    let ax = a.apply(x);
    SolveReport {
        iterations,
        primal_residual: ax.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt(),
        objective,
        gap,
        status,
        dual: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::DenseOperator;
    use nalgebra::DMatrix;

    #[test]
    fn zero_data_gives_zero() {
        let a = DenseOperator::new(DMatrix::identity(4, 4));
        let (x, rep) = weighted_sqrt_lasso(&a, &[0.0; 4], &[1.0; 4], 0.5, &SolveOptions::default()).unwrap();
        assert!(x.iter().all(|v| *v == 0.0));
        assert_eq!(rep.status, SolveStatus::Converged);
    }

    #[test]
    fn identity_large_lambda_is_zero() {
        let a = DenseOperator::new(DMatrix::identity(3, 3));
        let y = [0.3, -2.0, 1.1];
        let (x, rep) = weighted_sqrt_lasso(&a, &y, &[1.0; 3], 1.0, &SolveOptions::default()).unwrap();
        let ynorm = norm(&y);
        assert!((rep.objective - ynorm).abs() < 1e-5 * ynorm);
        assert!(norm(&x) < 1e-3);
    }

    #[test]
    fn identity_one_dimensional_scan() {
        // f(z) = λ|z| + |z − y| is minimized at y for λ < 1
        let a = DenseOperator::new(DMatrix::identity(1, 1));
        let opts = SolveOptions { opt_tol: 1e-10, ..Default::default() };
        let (x, _) = weighted_sqrt_lasso(&a, &[2.0], &[1.0], 0.5, &opts).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-6, "{x:?}");
    }
}
