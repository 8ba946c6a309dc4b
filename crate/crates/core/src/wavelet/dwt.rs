//! Periodized discrete wavelet transform in the canonical coarse-to-fine ordering.

use std::ops::{AddAssign, Mul, Range};

use num_complex::Complex64;
use serde::Serialize;

use super::filter::WaveletSpec;
use crate::error::{Error, Result};

/// Scalar types the filter bank can act on.
pub trait Sample: Copy + Default + AddAssign + Mul<f64, Output = Self> + Send + Sync {}
impl Sample for f64 {}
impl Sample for Complex64 {}

/// Wavelet coefficients ordered as: 2^{j0} scaling coefficients at scale j0,
/// then wavelet scale j occupying indices 2^j..2^{j+1} (0-based) for j = j0..j0+r-1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientVector {
    pub values: Vec<f64>,
    pub j0: usize,
    pub r: usize,
}

impl CoefficientVector {
    pub fn new(values: Vec<f64>, j0: usize) -> Result<Self> {
        let r = levels_for_len(values.len(), j0)?;
        Ok(Self { values, j0, r })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index range (0-based) of wavelet scale `j`.
    pub fn scale_range(&self, j: usize) -> Range<usize> {
        (1usize << j)..(1usize << (j + 1))
    }

    /// Keeps the first `len` coefficients (all scales below log₂ len).
    pub fn truncated(&self, len: usize) -> Result<Self> {
        if len > self.len() {
            return Err(Error::Shape(format!("cannot truncate length {} to {len}", self.len())));
        }
        Self::new(self.values[..len].to_vec(), self.j0)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Number of wavelet scales r such that len = 2^{j0 + r}.
pub fn levels_for_len(len: usize, j0: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Shape(format!("length {len} is not a power of two")));
    }
    let big_j = len.trailing_zeros() as usize;
    if big_j < j0 {
        return Err(Error::Scale(format!("length 2^{big_j} is below the coarsest scale 2^{j0}")));
    }
    Ok(big_j - j0)
}

#[inline]
fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

fn highpass_taps(h: &[f64]) -> Vec<f64> {
    let len = h.len();
    (0..len)
        .map(|l| if l % 2 == 0 { h[len - 1 - l] } else { -h[len - 1 - l] })
        .collect()
}

/// One analysis step on the first `n` entries of `data` (n even).
fn analysis_step<T: Sample>(data: &mut [T], n: usize, h: &[f64], g: &[f64], scratch: &mut Vec<T>) {
    let half = n / 2;
    let offset = 2 - h.len() as i64;
    scratch.clear();
    scratch.resize(n, T::default());
    for k in 0..half {
        let mut a = T::default();
        let mut d = T::default();
        let base = 2 * k as i64;
        for (l, (&hl, &gl)) in h.iter().zip(g.iter()).enumerate() {
            a += data[wrap(base + l as i64, n)] * hl;
            d += data[wrap(base + l as i64 + offset, n)] * gl;
        }
        scratch[k] = a;
        scratch[half + k] = d;
    }
    data[..n].copy_from_slice(&scratch[..n]);
}

/// One synthesis step (exact inverse of `analysis_step`).
fn synthesis_step<T: Sample>(data: &mut [T], n: usize, h: &[f64], g: &[f64], scratch: &mut Vec<T>) {
    let half = n / 2;
    let offset = 2 - h.len() as i64;
    scratch.clear();
    scratch.resize(n, T::default());
    for k in 0..half {
        let a = data[k];
        let d = data[half + k];
        let base = 2 * k as i64;
        for (l, (&hl, &gl)) in h.iter().zip(g.iter()).enumerate() {
            scratch[wrap(base + l as i64, n)] += a * hl;
            scratch[wrap(base + l as i64 + offset, n)] += d * gl;
        }
    }
    data[..n].copy_from_slice(&scratch[..n]);
}

/// In-place forward transform of `data` (length 2^J) down to scale `j0`.
pub fn forward_in_place<T: Sample>(data: &mut [T], h: &[f64], j0: usize) -> Result<()> {
    levels_for_len(data.len(), j0)?;
    let g = highpass_taps(h);
    let mut scratch = Vec::with_capacity(data.len());
    let mut n = data.len();
    while n > (1usize << j0) {
        analysis_step(data, n, h, &g, &mut scratch);
        n /= 2;
    }
    Ok(())
}

/// In-place inverse transform from scale `j0` up to the full length.
pub fn inverse_in_place<T: Sample>(data: &mut [T], h: &[f64], j0: usize) -> Result<()> {
    levels_for_len(data.len(), j0)?;
    let g = highpass_taps(h);
    let mut scratch = Vec::with_capacity(data.len());
    let mut n = 1usize << (j0 + 1);
    while n <= data.len() {
        synthesis_step(data, n, h, &g, &mut scratch);
        n *= 2;
    }
    Ok(())
}

/// Periodized DWT of scale-J scaling coefficients.
pub fn periodized_dwt(samples: &[f64], spec: &WaveletSpec) -> Result<CoefficientVector> {
    let mut data = samples.to_vec();
    forward_in_place(&mut data, &spec.h, spec.j0)?;
    CoefficientVector::new(data, spec.j0)
}

/// Inverse of [`periodized_dwt`].
pub fn periodized_idwt(coeffs: &CoefficientVector, spec: &WaveletSpec) -> Result<Vec<f64>> {
    if coeffs.j0 != spec.j0 {
        return Err(Error::Shape(format!(
            "coefficient vector has j0 = {} but wavelet has j0 = {}",
            coeffs.j0, spec.j0
        )));
    }
    let mut data = coeffs.values.clone();
    inverse_in_place(&mut data, &spec.h, spec.j0)?;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn haar_constant_input() {
        let spec = WaveletSpec::haar();
        let c = 0.75;
        let d = periodized_dwt(&[c; 16], &spec).unwrap();
        // only one scaling coefficient at j0 = 0; it carries c·√16 in ℓ² units
        assert!((d.values[0] - c * 4.0).abs() < 1e-14);
        assert!(d.values[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn db2_constant_input_has_zero_wavelets() {
        let spec = WaveletSpec::daubechies(2).unwrap();
        let d = periodized_dwt(&vec![1.0; 64], &spec).unwrap();
        assert!(d.values[4..].iter().all(|v| v.abs() < 1e-12));
        // scaling coefficients at j0 = 2 are all equal
        for v in &d.values[..4] {
            assert!((v - d.values[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn db2_round_trip_256() {
        let spec = WaveletSpec::daubechies(2).unwrap();
        let x = random_vec(256, 7);
        let d = periodized_dwt(&x, &spec).unwrap();
        let back = periodized_idwt(&d, &spec).unwrap();
        for (a, b) in x.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn parseval() {
        for p in 1..=4 {
            let spec = WaveletSpec::daubechies(p).unwrap();
            let x = random_vec(1 << 10, p as u64);
            let d = periodized_dwt(&x, &spec).unwrap();
            let nx: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((d.norm() - nx).abs() < 1e-10 * nx.max(1.0));
        }
    }

    #[test]
    fn shape_and_scale_errors() {
        let spec = WaveletSpec::daubechies(2).unwrap();
        assert!(matches!(periodized_dwt(&[1.0; 2], &spec), Err(Error::Scale(_))));
        assert!(matches!(periodized_dwt(&[1.0; 12], &spec), Err(Error::Shape(_))));
        let bad = CoefficientVector { values: vec![0.0; 6], j0: 2, r: 0 };
        assert!(periodized_idwt(&bad, &spec).is_err());
    }

    #[test]
    fn scale_ranges() {
        let d = CoefficientVector::new(vec![0.0; 32], 2).unwrap();
        assert_eq!(d.r, 3);
        assert_eq!(d.scale_range(2), 4..8);
        assert_eq!(d.scale_range(4), 16..32);
    }

    #[test]
    fn complex_transform_matches_real_parts() {
        let spec = WaveletSpec::daubechies(3).unwrap();
        let re = random_vec(64, 1);
        let im = random_vec(64, 2);
        let mut z: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        forward_in_place(&mut z, &spec.h, spec.j0).unwrap();
        let dr = periodized_dwt(&re, &spec).unwrap();
        let di = periodized_dwt(&im, &spec).unwrap();
        for i in 0..64 {
            assert!((z[i].re - dr.values[i]).abs() < 1e-13);
            assert!((z[i].im - di.values[i]).abs() < 1e-13);
        }
    }
}
