//! Weighted basis pursuit by Douglas–Rachford splitting.

use super::projector::AffineProjector;
use super::{check_weights, dual_scale, soft_threshold, weighted_l1, SolveOptions, SolveReport, SolveStatus};
use crate::error::{Error, Result};
use crate::sampling::operator::{dot, norm};
use crate::sampling::LinearOperator;

/// Threshold scale relative to the largest entry of the least-norm solution.
const STEP_FRACTION: f64 = 0.1;
/// Iterations over which the relative objective change is measured.
pub const WINDOW: usize = 50;
/// With a stored matrix Az is updated from the sparse prox output and
/// recomputed in full this often.
const REFRESH: usize = 50;

/// minimize ‖z‖_{1,w} subject to Az = y.
///
/// Iterates x = P(z), u = prox_{γ‖·‖_w}(2x − z), z ← z + u − x, where P is
/// the exact projection onto the constraint set. Since x − z lies in the range
/// of Aᵀ, s = (x − z)/γ gives a dual point after rescaling and the duality gap
/// ‖x‖_w − ⟨x, s⟩/max(1, max|s_i|/w_i) is checked every iteration. The run
/// also stops once the objective moved by less than opt_tol (relative) over
/// the last WINDOW iterations.
pub fn weighted_basis_pursuit(
    a: &dyn LinearOperator,
    y: &[f64],
    w: &[f64],
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    opts.validate()?;
    let group = a.group();
    let n = a.cols();
    check_weights(w, n, group)?;
    if y.len() != a.rows() {
        return Err(Error::Shape(format!("y has length {} but A has {} rows", y.len(), a.rows())));
    }
    let ynorm = norm(y);
    let tol = opts.bp_tol * ynorm.max(1.0);
    let mut proj = AffineProjector::new(a, y);
    let least_norm = proj.project(&vec![0.0; n]);
    let ln_residual = residual(a, &least_norm, y);
    if norm(&least_norm) == 0.0 {
        let report = finish(a, &least_norm, y, w, 0, 0.0, SolveStatus::Converged, proj.multiplier().map(|m| m.to_vec()));
        return Ok((least_norm, report));
    }

    let peak = least_norm
        .chunks(group)
        .map(|g| g.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let wmean = w.iter().sum::<f64>() / w.len() as f64;
    let gamma = opts.step_ratio * STEP_FRACTION * peak / wmean;

    let mut z = least_norm.clone();
    // Ax = y after each projection, so A z⁺ = A z + A u − y with u sparse
    let dense = proj.dense_matrix();
    let full_product = |m: &nalgebra::DMatrix<f64>, v: &[f64]| -> Vec<f64> {
        let mut out = nalgebra::DVector::<f64>::zeros(m.nrows());
        out.gemv(1.0, m, &nalgebra::DVector::from_column_slice(v), 0.0);
        out.data.into()
    };
    let mut az: Option<Vec<f64>> = dense.map(|m| full_product(m, &z));
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut status = SolveStatus::MaxIters;
    let mut iterations = opts.max_iters;
    let mut gap = f64::INFINITY;
    let mut history = std::collections::VecDeque::with_capacity(WINDOW + 1);
    for it in 1..=opts.max_iters {
        let x = match &az {
            Some(v) => proj.project_known(&z, v),
            None => proj.project(&z),
        };
        let obj = weighted_l1(&x, w, group);
        history.push_back(obj);
        if history.len() > WINDOW + 1 {
            history.pop_front();
        }
        let s: Vec<f64> = x.iter().zip(&z).map(|(a, b)| (a - b) / gamma).collect();
        let c = dual_scale(&s, w, group).max(1.0);
        gap = obj - dot(&x, &s) / c;
        if best.as_ref().is_none_or(|b| obj < b.0) {
            best = Some((obj, x.clone(), z.clone()));
        }
        if gap <= opts.opt_tol * (1.0 + obj) {
            status = SolveStatus::Converged;
            iterations = it;
            best = Some((obj, x, z));
            break;
        }
        if history.len() == WINDOW + 1 && (obj - history[0]).abs() <= opts.opt_tol * obj {
            status = SolveStatus::Converged;
            iterations = it;
            break;
        }
        let mut u: Vec<f64> = x.iter().zip(&z).map(|(a, b)| 2.0 * a - b).collect();
        soft_threshold(&mut u, w, gamma, group);
        z.iter_mut().zip(u.iter().zip(&x)).for_each(|(zi, (ui, xi))| *zi += ui - xi);
        if let (Some(m), Some(v)) = (dense, az.as_mut()) {
            if it % REFRESH == 0 {
                *v = full_product(m, &z);
            } else {
                v.iter_mut().zip(y).for_each(|(vi, yi)| *vi -= yi);
                for (j, &uj) in u.iter().enumerate() {
                    if uj != 0.0 {
                        v.iter_mut().zip(m.column(j).iter()).for_each(|(vi, aij)| *vi += uj * aij);
                    }
                }
            }
        }
        if opts.verbosity > 1 && it % 500 == 0 {
            eprintln!("bp iter {it}: objective {obj:.6e} gap {gap:.3e}");
        }
    }
    let (_, x, zb) = best.expect("at least one iterate");
    // multiplier belonging to the returned iterate
    let x_check = proj.project(&zb);
    let dual = proj.multiplier().map(|m| {
        let c = {
            let s: Vec<f64> = x_check.iter().zip(&zb).map(|(a, b)| (a - b) / gamma).collect();
            dual_scale(&s, w, group).max(1.0)
        };
        m.iter().map(|v| -v / (gamma * c)).collect()
    });
    if ln_residual > tol {
        status = SolveStatus::Infeasible;
    }
    let mut report = finish(a, &x, y, w, iterations, gap.max(0.0), status, dual);
    if report.primal_residual > tol {
        report.status = SolveStatus::Infeasible;
    }
    Ok((x, report))
}

/// Unweighted basis pursuit.
pub fn basis_pursuit(a: &dyn LinearOperator, y: &[f64], opts: &SolveOptions) -> Result<(Vec<f64>, SolveReport)> {
    let w = vec![1.0; a.cols() / a.group()];
    weighted_basis_pursuit(a, y, &w, opts)
}

fn residual(a: &dyn LinearOperator, x: &[f64], y: &[f64]) -> f64 {
    let ax = a.apply(x);
    ax.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

#[allow(clippy::too_many_arguments)]
fn finish(
    a: &dyn LinearOperator,
    x: &[f64],
    y: &[f64],
    w: &[f64],
    iterations: usize,
    gap: f64,
    status: SolveStatus,
    dual: Option<Vec<f64>>,
) -> SolveReport {
    SolveReport {
        iterations,
        primal_residual: residual(a, x, y),
        objective: weighted_l1(x, w, a.group()),
        gap,
        status,
        dual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{gaussian_matrix, DenseOperator};
    use nalgebra::DMatrix;

    fn tight() -> SolveOptions {
        SolveOptions {
            opt_tol: 1e-9,
            ..Default::default()
        }
    }

    #[test]
    fn one_by_two() {
        let a = DenseOperator::new(DMatrix::from_row_slice(1, 2, &[1.0, 2.0]));
        let (x, rep) = basis_pursuit(&a, &[2.0], &tight()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!(x[0].abs() < 1e-6 && (x[1] - 1.0).abs() < 1e-6, "{x:?}");
        let (x, _) = weighted_basis_pursuit(&a, &[2.0], &[1.0, 4.0], &tight()).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-6 && x[1].abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn zero_data() {
        let a = DenseOperator::new(gaussian_matrix(4, 9, 3));
        let (x, rep) = basis_pursuit(&a, &[0.0; 4], &SolveOptions::default()).unwrap();
        assert!(x.iter().all(|v| *v == 0.0));
        assert_eq!(rep.status, SolveStatus::Converged);
    }

    #[test]
    fn square_invertible() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 3.0]);
        let a = DenseOperator::new(m);
        let y = [1.0, -2.0, 0.5];
        let (x, _) = weighted_basis_pursuit(&a, &y, &[1.0, 5.0, 0.2], &tight()).unwrap();
        let r = a.apply(&x);
        assert!(r.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-9));
    }

    #[test]
    fn infeasible_detected() {
        let a = DenseOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]));
        let (_, rep) = basis_pursuit(&a, &[1.0, 2.0], &SolveOptions::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Infeasible);
    }

    #[test]
    fn gaussian_recovery() {
        let n = 128;
        let a = DenseOperator::new(gaussian_matrix(40, n, 7));
        let mut x0 = vec![0.0; n];
        for (i, v) in [(3, 1.0), (40, -1.0), (77, 1.0), (100, -1.0)] {
            x0[i] = v;
        }
        let y = a.apply(&x0);
        let (x, rep) = basis_pursuit(&a, &y, &SolveOptions::default()).unwrap();
        let err = x.iter().zip(&x0).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-4, "err {err} after {} iterations", rep.iterations);
    }
}
