//! The piecewise polynomial test functions f_K.

use crate::error::{Error, Result};
use crate::wavelet::PiecewiseFunction;

/// Where the jump locations of a test function came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunctionKind {
    /// Jumps at 1.3^{i−9}, i = 1..K.
    Fk,
    /// Same terms with user-supplied jump locations.
    Custom,
}

#[derive(Debug, Clone)]
pub struct TestFunction {
    pub kind: TestFunctionKind,
    pub k: usize,
    pub override_breakpoints: Option<Vec<f64>>,
    pub function: PiecewiseFunction,
}

/// Location of the i-th jump (1-based).
pub fn fk_center(i: usize) -> f64 {
    1.3f64.powi(i as i32 - 9)
}

/// sign with sign(0) = +1, so every term is right-continuous.
fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Σ_{i=1}^{K} (−1)^{i mod 5} x^{i mod 3} sign(x − c_i).
pub fn fk_eval(x: f64, centers: &[f64]) -> f64 {
    centers
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            let i = idx + 1;
            let s = if (i % 5) % 2 == 0 { 1.0 } else { -1.0 };
            s * x.powi((i % 3) as i32) * sign(x - c)
        })
        .sum()
}

fn build(k: usize, centers: Vec<f64>, kind: TestFunctionKind, overridden: Option<Vec<f64>>) -> Result<TestFunction> {
    let mut interior: Vec<f64> = centers.iter().copied().filter(|&c| c > 0.0 && c < 1.0).collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    let function = PiecewiseFunction::new(move |x| fk_eval(x, &centers), interior, f64::INFINITY)?;
    Ok(TestFunction {
        kind,
        k,
        override_breakpoints: overridden,
        function,
    })
}

/// f_K with its jumps at 1.3^{i−9}. Terms with i ≥ 9 have no jump inside (0, 1).
pub fn make_fk(k: usize) -> Result<TestFunction> {
    if k == 0 {
        return Err(Error::Precondition("K must be at least 1".into()));
    }
    build(k, (1..=k).map(fk_center).collect(), TestFunctionKind::Fk, None)
}

/// f_K with the i-th term jumping at `breakpoints[i−1]` instead.
/// Not the literal test function: meant for K genuine interior jumps.
pub fn make_fk_with_breakpoints(k: usize, breakpoints: Vec<f64>) -> Result<TestFunction> {
    if k == 0 {
        return Err(Error::Precondition("K must be at least 1".into()));
    }
    if breakpoints.len() != k {
        return Err(Error::Precondition(format!(
            "{} override breakpoints given for K = {k}",
            breakpoints.len()
        )));
    }
    if breakpoints.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
        return Err(Error::Precondition("override breakpoints must lie in (0, 1)".into()));
    }
    build(k, breakpoints.clone(), TestFunctionKind::Custom, Some(breakpoints))
}

/// K equispaced jumps j/(K+1).
pub fn equispaced_breakpoints(k: usize) -> Vec<f64> {
    (1..=k).map(|j| j as f64 / (k + 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakpoint_counts() {
        let f1 = make_fk(1).unwrap();
        assert_eq!(f1.function.breakpoints().len(), 1);
        assert!((f1.function.breakpoints()[0] - 0.122_59).abs() < 1e-5);
        let f8 = make_fk(8).unwrap();
        assert_eq!(f8.function.breakpoints().len(), 8);
        assert!((f8.function.breakpoints()[7] - 1.0 / 1.3).abs() < 1e-12);
        assert_eq!(make_fk(10).unwrap().function.breakpoints().len(), 8);
        assert!(make_fk(0).is_err());
    }

    #[test]
    fn literal_values() {
        // K = 1: (−1)^1 x^1 sign(x − c_1)
        let f = make_fk(1).unwrap().function;
        assert_eq!(f.eval(0.5), -0.5);
        assert_eq!(f.eval(0.01), 0.01);
        // K = 2 adds (+1) x^2 sign(x − c_2)
        let c2 = fk_center(2);
        let f = make_fk(2).unwrap().function;
        assert!((f.eval(0.9) - (-0.9 + 0.81)).abs() < 1e-15);
        // between the two jumps: c_1 = 0.1226 < x < c_2 = 0.1594
        let x = 0.14;
        assert!(fk_center(1) < x && x < c2);
        assert!((f.eval(x) - (-x - x * x)).abs() < 1e-15);
        // right-continuous at a jump
        assert_eq!(make_fk(1).unwrap().function.eval(fk_center(1)), -fk_center(1));
    }

    #[test]
    fn override_gives_k_jumps() {
        let t = make_fk_with_breakpoints(20, equispaced_breakpoints(20)).unwrap();
        assert_eq!(t.function.breakpoints().len(), 20);
        assert_eq!(t.kind, TestFunctionKind::Custom);
        assert!(make_fk_with_breakpoints(3, vec![0.5]).is_err());
    }
}
