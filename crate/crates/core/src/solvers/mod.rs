//! ℓ¹ decoders: (weighted) basis pursuit, weighted square-root LASSO and a
//! brute-force oracle for tiny instances.

mod bp;
mod oracle;
mod projector;
mod srlasso;

pub use bp::{basis_pursuit, weighted_basis_pursuit};
pub use oracle::oracle_min_l1;
pub use projector::AffineProjector;
pub use srlasso::weighted_sqrt_lasso;

use serde::Serialize;

use crate::error::{Error, Result};

/// Iteration limits and tolerances shared by the decoders.
#[derive(Debug, Clone, Serialize)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Feasibility tolerance: ‖Ax − y‖ ≤ bp_tol · max(1, ‖y‖).
    pub bp_tol: f64,
    /// Relative duality-gap tolerance.
    pub opt_tol: f64,
    /// Scales the primal step relative to the dual step.
    pub step_ratio: f64,
    pub verbosity: u8,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            bp_tol: 1e-6,
            opt_tol: 1e-6,
            step_ratio: 1.0,
            verbosity: 0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 || !(self.bp_tol > 0.0) || !(self.opt_tol > 0.0) || !(self.step_ratio > 0.0) {
            return Err(Error::Precondition(
                "solver options need max_iters >= 1 and positive tolerances and step ratio".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Infeasible,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::MaxIters => "MaxIters",
            SolveStatus::Infeasible => "Infeasible",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// ‖Ax̂ − y‖₂.
    pub primal_residual: f64,
    pub objective: f64,
    /// Last computed duality gap.
    pub gap: f64,
    pub status: SolveStatus,
    /// Dual vector v in measurement space (basis pursuit with a stored matrix).
    #[serde(skip)]
    pub dual: Option<Vec<f64>>,
}

/// Σ_g w_g ‖x_g‖ over coordinate groups of size `group`.
pub fn weighted_l1(x: &[f64], w: &[f64], group: usize) -> f64 {
    x.chunks(group).zip(w).map(|(g, wi)| wi * group_norm(g)).sum()
}

#[inline]
fn group_norm(g: &[f64]) -> f64 {
    if g.len() == 1 {
        g[0].abs()
    } else {
        g.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Group soft-thresholding: x_g ↦ x_g · max(0, 1 − t_g/‖x_g‖).
fn soft_threshold(x: &mut [f64], thresholds: &[f64], scale: f64, group: usize) {
    for (g, &t) in x.chunks_mut(group).zip(thresholds) {
        let n = group_norm(g);
        let t = t * scale;
        if n <= t {
            g.iter_mut().for_each(|v| *v = 0.0);
        } else {
            let f = 1.0 - t / n;
            g.iter_mut().for_each(|v| *v *= f);
        }
    }
}

/// max_g ‖s_g‖ / w_g.
fn dual_scale(s: &[f64], w: &[f64], group: usize) -> f64 {
    s.chunks(group).zip(w).map(|(g, wi)| group_norm(g) / wi).fold(0.0, f64::max)
}

fn check_weights(w: &[f64], cols: usize, group: usize) -> Result<()> {
    if !cols.is_multiple_of(group) || w.len() != cols / group {
        return Err(Error::Shape(format!(
            "{} weights for {cols} unknowns in groups of {group}",
            w.len()
        )));
    }
    if w.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Precondition("weights must be positive and finite".into()));
    }
    Ok(())
}
