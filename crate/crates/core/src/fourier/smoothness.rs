//! Numerical estimate of the Fourier decay exponent q of a scaling function.

use std::sync::OnceLock;

use crate::wavelet::filter::{scaling_hat, MAX_ORDER};
use crate::wavelet::WaveletSpec;

const FIRST_OCTAVE: u32 = 3;
const LAST_OCTAVE: u32 = 16;
const SAMPLES_PER_OCTAVE: usize = 256;

/// Fits log max_{ω ∈ [2^i, 2^{i+1}]} |φ̂(ω)| against log 2^i over dyadic octaves
/// up to 2^16 and returns q = −slope − 1, clamped at 0. Cached per order.
pub fn estimate_smoothness_q(spec: &WaveletSpec) -> f64 {
    static CACHE: [OnceLock<f64>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];
    match CACHE.get(spec.p) {
        Some(cell) => *cell.get_or_init(|| fit_q(&spec.h)),
        None => fit_q(&spec.h),
    }
}

fn fit_q(h: &[f64]) -> f64 {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in FIRST_OCTAVE..LAST_OCTAVE {
        let lo = (1u64 << i) as f64;
        let envelope = (0..SAMPLES_PER_OCTAVE)
            .map(|s| lo * (1.0 + s as f64 / SAMPLES_PER_OCTAVE as f64))
            .map(|w| scaling_hat(h, w).norm())
            .fold(0.0f64, f64::max);
        xs.push(lo.ln());
        ys.push(envelope.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (-(sxy / sxx) - 1.0).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_is_zero() {
        let q = fit_q(&WaveletSpec::haar().h);
        assert!(q.abs() < 0.05, "q = {q}");
    }

    #[test]
    fn nondecreasing_in_p() {
        let qs: Vec<f64> = (1..=4).map(|p| WaveletSpec::daubechies(p).unwrap().q).collect();
        assert!(qs.windows(2).all(|w| w[0] <= w[1]), "{qs:?}");
        assert!(qs[1] > 0.2 && qs[1] < 0.5, "{qs:?}");
    }
}
