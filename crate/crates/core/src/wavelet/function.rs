use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature;

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function on [0, 1] that is smooth except at finitely many jumps.
///
/// The evaluator must return the right limit at a breakpoint.
#[derive(Clone)]
pub struct PiecewiseFunction {
    evaluator: Evaluator,
    breakpoints: Vec<f64>,
    /// Smoothness label of the pieces (Hölder exponent).
    pub alpha: f64,
    /// L² norm on [0, 1], computed by panel quadrature at construction.
    pub norm_estimate: f64,
}

impl fmt::Debug for PiecewiseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewiseFunction")
            .field("breakpoints", &self.breakpoints)
            .field("alpha", &self.alpha)
            .field("norm_estimate", &self.norm_estimate)
            .finish()
    }
}

impl PiecewiseFunction {
    pub fn new<F>(evaluator: F, breakpoints: Vec<f64>, alpha: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if breakpoints.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return Err(Error::Precondition("breakpoints must lie in the open interval (0, 1)".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition("breakpoints must be strictly increasing".into()));
        }
        let evaluator: Evaluator = Arc::new(evaluator);
        let e2 = evaluator.clone();
        let sq = quadrature::integrate(move |x| e2(x).powi(2), 0.0, 1.0, &breakpoints, 1.0 / 64.0);
        Ok(Self {
            evaluator,
            breakpoints,
            alpha,
            norm_estimate: sq.sqrt(),
        })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }

    /// Evaluates the 1-periodic extension.
    #[inline]
    pub fn eval_periodic(&self, x: f64) -> f64 {
        let y = x - x.floor();
        (self.evaluator)(y)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// 𝒩(f): number of smooth pieces.
    pub fn piece_count(&self) -> usize {
        self.breakpoints.len() + 1
    }

    /// Whether the periodic extension jumps at 0 ≡ 1.
    pub fn has_periodic_jump(&self) -> bool {
        let left = self.eval(1.0 - 1e-12);
        let right = self.eval(0.0);
        (left - right).abs() > 1e-8 * (1.0 + left.abs().max(right.abs()))
    }

    /// Discontinuities of the periodic extension in [0, 1).
    pub fn periodic_breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.breakpoints.len() + 1);
        if self.has_periodic_jump() {
            out.push(0.0);
        }
        out.extend_from_slice(&self.breakpoints);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_breakpoints() {
        assert!(PiecewiseFunction::new(|x| x, vec![0.5, 0.2], 1.0).is_err());
        assert!(PiecewiseFunction::new(|x| x, vec![0.0], 1.0).is_err());
        assert!(PiecewiseFunction::new(|x| x, vec![0.5, 1.0], 1.0).is_err());
        let f = PiecewiseFunction::new(|x| x, vec![0.2, 0.5], 1.0).unwrap();
        assert_eq!(f.piece_count(), 3);
    }

    #[test]
    fn norm_and_periodic_jump() {
        let f = PiecewiseFunction::new(|x| x, vec![], 1.0).unwrap();
        assert!((f.norm_estimate - (1.0f64 / 3.0).sqrt()).abs() < 1e-13);
        assert!(f.has_periodic_jump());
        let g = PiecewiseFunction::new(|x| (2.0 * std::f64::consts::PI * x).cos(), vec![], 2.0).unwrap();
        assert!(!g.has_periodic_jump());
        assert!(g.periodic_breakpoints().is_empty());
    }
}
