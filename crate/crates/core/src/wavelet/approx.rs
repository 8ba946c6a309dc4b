//! Linear and best s-term approximation errors, and per-scale decay profiles.

use serde::Serialize;

use super::dwt::CoefficientVector;
use super::filter::WaveletSpec;
use super::function::PiecewiseFunction;

/// e_s: ℓ² norm of the coefficients after the first `s`.
pub fn linear_error(d: &[f64], s: usize) -> f64 {
    let s = s.min(d.len());
    d[s..].iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Indices of the `s` largest-magnitude entries; ties keep the smaller index.
pub fn largest_indices(d: &[f64], s: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[b].abs().total_cmp(&d[a].abs()).then(a.cmp(&b)));
    order.truncate(s.min(d.len()));
    order
}

/// σ_s: ℓ² norm of everything except the `s` largest-magnitude entries.
pub fn best_s_term_error(d: &[f64], s: usize) -> f64 {
    let mut sq: Vec<f64> = d.iter().map(|v| v * v).collect();
    sq.sort_by(|a, b| b.total_cmp(a));
    let s = s.min(sq.len());
    // sum from the smallest upward for accuracy
    sq[s..].iter().rev().sum::<f64>().sqrt()
}

/// Per-scale maxima of |d| split by whether the wavelet support meets a jump.
#[derive(Debug, Clone, Serialize)]
pub struct DecayProfile {
    /// Scales j0..j0+r-1.
    pub scales: Vec<usize>,
    /// Max |coefficient| among wavelets whose support contains a jump (None if no such wavelet).
    pub hits: Vec<Option<f64>>,
    /// Max |coefficient| among wavelets whose support avoids all jumps.
    pub misses: Vec<Option<f64>>,
}

/// Whether the open interval (a, b) contains a point of `bps + ℤ`.
fn interval_hits(a: f64, b: f64, bps: &[f64]) -> bool {
    bps.iter().any(|&t| {
        let k = (a - t).floor() + 1.0;
        let first = t + k; // smallest t + integer strictly greater than a (up to rounding)
        let first = if first <= a { first + 1.0 } else { first };
        first < b
    })
}

/// Splits each wavelet scale of `d` into wavelets whose support
/// [(n-p+1)/2^j, (n+p)/2^j] meets a jump of the periodic extension of `f` and those that do not.
pub fn decay_profile(d: &CoefficientVector, f: &PiecewiseFunction, spec: &WaveletSpec) -> DecayProfile {
    let bps = f.periodic_breakpoints();
    let p = spec.p as f64;
    let mut scales = Vec::new();
    let mut hits = Vec::new();
    let mut misses = Vec::new();
    for j in d.j0..d.j0 + d.r {
        let scale = (1u64 << j) as f64;
        let mut hit: Option<f64> = None;
        let mut miss: Option<f64> = None;
        for (n, idx) in d.scale_range(j).enumerate() {
            let a = (n as f64 - p + 1.0) / scale;
            let b = (n as f64 + p) / scale;
            let v = d.values[idx].abs();
            let slot = if interval_hits(a, b, &bps) { &mut hit } else { &mut miss };
            *slot = Some(slot.map_or(v, |m: f64| m.max(v)));
        }
        scales.push(j);
        hits.push(hit);
        misses.push(miss);
    }
    DecayProfile { scales, hits, misses }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_examples() {
        assert!((linear_error(&[3.0, 2.0, 1.0], 2) - 1.0).abs() < 1e-15);
        assert_eq!(linear_error(&[3.0, 2.0, 1.0], 3), 0.0);
    }

    #[test]
    fn best_term_examples() {
        assert!((best_s_term_error(&[1.0, 5.0, 2.0], 1) - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(largest_indices(&[1.0, -2.0, 2.0, 0.5], 2), vec![1, 2]);
    }

    #[test]
    fn smooth_function_has_no_hits() {
        let f = PiecewiseFunction::new(|x| (2.0 * std::f64::consts::PI * x).cos(), vec![], 2.0).unwrap();
        let spec = WaveletSpec::daubechies(2).unwrap();
        let d = super::super::project::function_to_coefficients(&f, &spec, 7, 16).unwrap();
        let prof = decay_profile(&d, &f, &spec);
        assert!(prof.hits.iter().all(|h| h.is_none()));
        assert!(prof.misses.iter().all(|m| m.is_some()));
    }

    #[test]
    fn interval_hit_wraps() {
        assert!(interval_hits(-0.1, 0.05, &[0.95]));
        assert!(!interval_hits(0.1, 0.2, &[0.95]));
        assert!(!interval_hits(0.5, 0.75, &[0.75]));
        assert!(interval_hits(1.5, 1.8, &[0.75]));
    }
}
