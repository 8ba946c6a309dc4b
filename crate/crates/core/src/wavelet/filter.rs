//! Daubechies low-pass filters and the wavelet descriptor built on them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest supported number of vanishing moments.
pub const MAX_ORDER: usize = 10;

/// Minimal-phase Daubechies low-pass filter with `p` vanishing moments.
///
/// The taps are normalized to sum to √2 and follow the usual published
/// ordering (db2 starts with (1+√3)/(4√2)).
pub fn daubechies_filter(p: usize) -> Result<Vec<f64>> {
    if p == 0 || p > MAX_ORDER {
        return Err(Error::UnsupportedOrder(p));
    }
    if p == 1 {
        let t = std::f64::consts::FRAC_1_SQRT_2;
        return Ok(vec![t, t]);
    }

    // |m0|^2 = cos^{2p}(ξ/2) P(sin^2(ξ/2)) with P(y) = Σ C(p-1+k, k) y^k.
    let coeffs: Vec<f64> = (0..p).map(|k| binomial(p - 1 + k, k)).collect();
    let y_roots = polynomial_roots(&coeffs);

    // Each root y of P gives a reciprocal pair z, 1/z of z^2 - (2 - 4y) z + 1;
    // the minimal-phase filter keeps the root inside the unit circle.
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..p {
        poly = convolve(&poly, &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
    }
    for y in y_roots {
        let b = Complex64::new(2.0, 0.0) - 4.0 * y;
        let disc = (b * b - 4.0).sqrt();
        let z1 = (b + disc) / 2.0;
        let z2 = (b - disc) / 2.0;
        let z = if z1.norm() < z2.norm() { z1 } else { z2 };
        poly = convolve(&poly, &[Complex64::new(1.0, 0.0), -z]);
    }

    let mut h: Vec<f64> = poly.iter().map(|c| c.re).collect();
    let sum: f64 = h.iter().sum();
    let scale = std::f64::consts::SQRT_2 / sum;
    h.iter_mut().for_each(|v| *v *= scale);
    Ok(h)
}

/// Coarsest scale j0: 0 for Haar, ⌈log₂(2p)⌉ otherwise.
pub fn coarsest_scale(p: usize) -> usize {
    if p <= 1 {
        0
    } else {
        let two_p = 2 * p;
        let mut j = 0;
        while (1usize << j) < two_p {
            j += 1;
        }
        j
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Roots of Σ c_k y^k via companion-matrix eigenvalues, polished by Newton.
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let mut companion = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        companion[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let eig = companion.complex_eigenvalues();
    eig.iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..50 {
                let (val, der) = horner(coeffs, z);
                if der.norm() == 0.0 {
                    break;
                }
                let step = val / der;
                z -= step;
                if step.norm() <= 1e-16 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect()
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut val = Complex64::new(0.0, 0.0);
    let mut der = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        der = der * z + val;
        val = val * z + c;
    }
    (val, der)
}

/// Low-pass symbol m0(ξ) = 2^{-1/2} Σ h_k e^{-ikξ}, so that m0(0) = 1.
pub fn lowpass_symbol(h: &[f64], xi: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &hk) in h.iter().enumerate() {
        acc += hk * Complex64::from_polar(1.0, -(k as f64) * xi);
    }
    acc * std::f64::consts::FRAC_1_SQRT_2
}

/// Fourier transform φ̂(ω) = ∫ φ(x) e^{-iωx} dx of the scaling function,
/// evaluated by the infinite product Π_{k≥1} m0(ω/2^k).
pub fn scaling_hat(h: &[f64], omega: f64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut xi = omega;
    for _ in 0..64 {
        xi *= 0.5;
        if xi.abs() < 1e-17 {
            break;
        }
        acc *= lowpass_symbol(h, xi);
    }
    acc
}

/// High-pass symbol for ψ(x) = √2 Σ_i g_i φ(2x - i) with g_i = (-1)^i h_{1-i},
/// i.e. the wavelet supported on [-p+1, p].
pub fn highpass_symbol(h: &[f64], xi: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let len = h.len() as i64;
    for l in 0..len {
        // g at index i = l + 2 - len equals (-1)^l h_{len-1-l}
        let i = l + 2 - len;
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * h[(len - 1 - l) as usize] * Complex64::from_polar(1.0, -(i as f64) * xi);
    }
    acc * std::f64::consts::FRAC_1_SQRT_2
}

/// Fourier transform of the mother wavelet, ψ̂(ω) = m1(ω/2) φ̂(ω/2).
pub fn wavelet_hat(h: &[f64], omega: f64) -> Complex64 {
    highpass_symbol(h, omega / 2.0) * scaling_hat(h, omega / 2.0)
}

/// A periodized Daubechies wavelet family.
#[derive(Debug, Clone, Serialize)]
pub struct WaveletSpec {
    /// Number of vanishing moments.
    pub p: usize,
    /// Coarsest scale of the periodized basis.
    pub j0: usize,
    /// Low-pass filter taps (length 2p).
    pub h: Vec<f64>,
    /// Fourier decay exponent: |φ̂(ω)| ≲ (1+|ω|)^{-1-q}.
    pub q: f64,
}

impl WaveletSpec {
    /// Daubechies wavelet with `p` vanishing moments. `q` is 0 for Haar and
    /// estimated numerically otherwise.
    pub fn daubechies(p: usize) -> Result<Self> {
        let h = daubechies_filter(p)?;
        let mut spec = WaveletSpec {
            p,
            j0: coarsest_scale(p),
            h,
            q: 0.0,
        };
        if p > 1 {
            spec.q = crate::fourier::estimate_smoothness_q(&spec);
        }
        Ok(spec)
    }

    pub fn haar() -> Self {
        Self::daubechies(1).expect("Haar is always supported")
    }

    /// Parses names such as `haar`, `db1`, `db2`, `db4`.
    pub fn from_name(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        if lower == "haar" {
            return Ok(Self::haar());
        }
        let digits = lower
            .strip_prefix("db")
            .ok_or_else(|| Error::Parse(format!("unknown wavelet '{name}' (expected haar or dbP)")))?;
        let p: usize = digits
            .parse()
            .map_err(|_| Error::Parse(format!("bad wavelet order in '{name}'")))?;
        Self::daubechies(p)
    }

    pub fn name(&self) -> String {
        if self.p == 1 {
            "haar".to_string()
        } else {
            format!("db{}", self.p)
        }
    }

    pub fn filter_len(&self) -> usize {
        self.h.len()
    }

    pub fn is_haar(&self) -> bool {
        self.p == 1
    }

    pub fn scaling_hat(&self, omega: f64) -> Complex64 {
        scaling_hat(&self.h, omega)
    }

    pub fn wavelet_hat(&self, omega: f64) -> Complex64 {
        wavelet_hat(&self.h, omega)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_filter() {
        let h = daubechies_filter(1).unwrap();
        assert_eq!(h.len(), 2);
        assert!((h[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((h[1] - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn db2_matches_closed_form() {
        let s3 = 3f64.sqrt();
        let d = 4.0 * 2f64.sqrt();
        let expected = [(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
        let h = daubechies_filter(2).unwrap();
        for (a, b) in h.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn db4_matches_published_table() {
        // db4 (p = 4) taps as tabulated in standard references.
        let expected = [
            0.230_377_813_308_896_4,
            0.714_846_570_552_915_4,
            0.630_880_767_929_858_7,
            -0.027_983_769_416_859_9,
            -0.187_034_811_719_093_1,
            0.030_841_381_835_560_7,
            0.032_883_011_666_885_2,
            -0.010_597_401_785_069_0,
        ];
        let h = daubechies_filter(4).unwrap();
        for (a, b) in h.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn filters_are_normalized_and_orthonormal() {
        for p in 1..=MAX_ORDER {
            let h = daubechies_filter(p).unwrap();
            assert_eq!(h.len(), 2 * p);
            let sum: f64 = h.iter().sum();
            assert!((sum - 2f64.sqrt()).abs() < 1e-12, "p={p} sum={sum}");
            for shift in 0..p {
                let dot: f64 = (0..h.len() - 2 * shift).map(|k| h[k] * h[k + 2 * shift]).sum();
                let target = if shift == 0 { 1.0 } else { 0.0 };
                assert!((dot - target).abs() < 1e-12, "p={p} shift={shift} dot={dot}");
            }
        }
    }

    #[test]
    fn unsupported_orders() {
        assert!(matches!(daubechies_filter(0), Err(Error::UnsupportedOrder(0))));
        assert!(matches!(daubechies_filter(11), Err(Error::UnsupportedOrder(11))));
    }

    #[test]
    fn coarsest_scale_values() {
        assert_eq!(coarsest_scale(1), 0);
        assert_eq!(coarsest_scale(2), 2);
        assert_eq!(coarsest_scale(3), 3);
        assert_eq!(coarsest_scale(4), 3);
        assert_eq!(coarsest_scale(5), 4);
    }

    #[test]
    fn haar_scaling_hat_closed_form() {
        let spec = WaveletSpec::haar();
        for &w in &[0.3, 1.0, 2.5, std::f64::consts::PI, 10.0] {
            let exact = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -w)) / Complex64::new(0.0, w);
            assert!((spec.scaling_hat(w) - exact).norm() < 1e-13);
        }
    }

    #[test]
    fn names_parse() {
        assert_eq!(WaveletSpec::from_name("haar").unwrap().p, 1);
        assert_eq!(WaveletSpec::from_name("db2").unwrap().p, 2);
        assert!(WaveletSpec::from_name("sym4").is_err());
    }
}
