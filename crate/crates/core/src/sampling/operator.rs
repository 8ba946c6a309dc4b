//! Measurement operators acting on real coefficient vectors.
//!
//! Complex-valued measurements are represented as interleaved (re, im) pairs,
//! so every operator is a real linear map and its adjoint is the transpose.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::scheme::SamplingPattern;
use crate::error::{Error, Result};
use crate::fourier::{CrossGramian, GramianRows};
use crate::wavelet::WaveletSpec;

/// A real linear map R^cols → R^rows with its transpose.
pub trait LinearOperator: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn adjoint(&self, y: &[f64]) -> Vec<f64>;

    /// The explicit matrix, when the operator stores one.
    fn dense(&self) -> Option<&DMatrix<f64>> {
        None
    }

    /// An operator B and right-hand side with {x : Ax = y} = {x : Bx = y_B},
    /// where B has (close to) independent rows, together with an approximation
    /// of diag(BBᵀ).
    fn reduced_constraint(&self, _y: &[f64]) -> Option<ReducedConstraint> {
        None
    }

    /// Number of consecutive domain coordinates forming one ℓ¹ group
    /// (1 for real unknowns, 2 for interleaved complex unknowns).
    fn group(&self) -> usize {
        1
    }
}

/// Equivalent constraint used by affine projections.
pub struct ReducedConstraint {
    pub op: Box<dyn LinearOperator>,
    pub rhs: Vec<f64>,
    pub diagonal: Vec<f64>,
}

/// Interleaves complex values as (re, im) pairs.
pub fn complex_to_real(v: &[Complex64]) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Inverse of [`complex_to_real`].
pub fn real_to_complex(v: &[f64]) -> Vec<Complex64> {
    v.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// A stored real matrix.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub matrix: DMatrix<f64>,
    pub group: usize,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self { matrix, group: 1 }
    }
}

impl LinearOperator for DenseOperator {
    fn rows(&self) -> usize {
        self.matrix.nrows()
    }
    fn cols(&self) -> usize {
        self.matrix.ncols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = DVector::<f64>::zeros(self.matrix.nrows());
        out.gemv(1.0, &self.matrix, &DVector::from_column_slice(x), 0.0);
        out.data.into()
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = DVector::<f64>::zeros(self.matrix.ncols());
        out.gemv_tr(1.0, &self.matrix, &DVector::from_column_slice(y), 0.0);
        out.data.into()
    }
    fn dense(&self) -> Option<&DMatrix<f64>> {
        Some(&self.matrix)
    }
    fn group(&self) -> usize {
        self.group
    }
}

/// Realified form of a complex matrix. With `complex_domain` the unknowns are
/// interleaved complex numbers; otherwise they are real.
pub fn realify(a: &DMatrix<Complex64>, complex_domain: bool) -> DenseOperator {
    let (m, n) = a.shape();
    let cols = if complex_domain { 2 * n } else { n };
    let mut r = DMatrix::<f64>::zeros(2 * m, cols);
    for i in 0..m {
        for j in 0..n {
            let v = a[(i, j)];
            if complex_domain {
                r[(2 * i, 2 * j)] = v.re;
                r[(2 * i, 2 * j + 1)] = -v.im;
                r[(2 * i + 1, 2 * j)] = v.im;
                r[(2 * i + 1, 2 * j + 1)] = v.re;
            } else {
                r[(2 * i, j)] = v.re;
                r[(2 * i + 1, j)] = v.im;
            }
        }
    }
    DenseOperator {
        matrix: r,
        group: if complex_domain { 2 } else { 1 },
    }
}

/// m × n matrix with i.i.d. N(0, 1/m) entries, generated column by column.
pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (m as f64).sqrt();
    DMatrix::from_fn(m, n, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z * scale
    })
}

/// Identity on the first N1 coordinates stacked over a Gaussian block on N1..N2.
#[derive(Debug, Clone)]
pub struct TwoLevelOperator {
    pub n1: usize,
    pub n2: usize,
    pub gaussian: DMatrix<f64>,
    full: OnceLock<DMatrix<f64>>,
}

impl TwoLevelOperator {
    pub fn fine_block(&self) -> DenseOperator {
        DenseOperator::new(self.gaussian.clone())
    }
}

impl LinearOperator for TwoLevelOperator {
    fn rows(&self) -> usize {
        self.n1 + self.gaussian.nrows()
    }
    fn cols(&self) -> usize {
        self.n2
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x[..self.n1].to_vec();
        let mut fine = DVector::<f64>::zeros(self.gaussian.nrows());
        fine.gemv(1.0, &self.gaussian, &DVector::from_column_slice(&x[self.n1..self.n2]), 0.0);
        out.extend(fine.iter());
        out
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = y[..self.n1].to_vec();
        let mut fine = DVector::<f64>::zeros(self.n2 - self.n1);
        fine.gemv_tr(1.0, &self.gaussian, &DVector::from_column_slice(&y[self.n1..]), 0.0);
        out.extend(fine.iter());
        out
    }
    fn dense(&self) -> Option<&DMatrix<f64>> {
        Some(self.full.get_or_init(|| {
            let mut a = DMatrix::<f64>::zeros(self.rows(), self.n2);
            for i in 0..self.n1 {
                a[(i, i)] = 1.0;
            }
            a.view_mut((self.n1, self.n1), self.gaussian.shape()).copy_from(&self.gaussian);
            a
        }))
    }
}

/// Rows P_Ω D U P_M applied through one wavelet synthesis and one FFT.
#[derive(Debug, Clone)]
pub struct FourierOperator {
    pub rows: GramianRows,
    pub scale: Vec<f64>,
    spec: WaveletSpec,
}

impl FourierOperator {
    pub fn new(spec: &WaveletSpec, cols: usize, frequencies: Vec<i64>, scale: Vec<f64>) -> Result<Self> {
        if frequencies.len() != scale.len() {
            return Err(Error::Shape("one scaling weight per frequency required".into()));
        }
        Ok(Self {
            rows: GramianRows::new(spec, cols, frequencies)?,
            scale,
            spec: spec.clone(),
        })
    }

    pub fn frequencies(&self) -> &[i64] {
        &self.rows.frequencies
    }
}

impl LinearOperator for FourierOperator {
    fn rows(&self) -> usize {
        2 * self.scale.len()
    }
    fn cols(&self) -> usize {
        self.rows.cols
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = self.rows.apply(x);
        v.iter()
            .zip(&self.scale)
            .flat_map(|(z, d)| [z.re * d, z.im * d])
            .collect()
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.rows.adjoint_real(&real_to_complex(y), Some(&self.scale))
    }

    /// Keeps one real functional per independent direction: rows at ω and −ω
    /// coincide up to conjugation on real vectors, duplicates are dropped, and
    /// self-conjugate frequencies (0 and M/2) contribute one real row.
    fn reduced_constraint(&self, y: &[f64]) -> Option<ReducedConstraint> {
        let m = self.rows.cols as i64;
        let mut seen = std::collections::BTreeMap::<i64, Complex64>::new();
        for (i, &w) in self.rows.frequencies.iter().enumerate() {
            if self.scale[i] == 0.0 {
                continue;
            }
            let v = Complex64::new(y[2 * i], y[2 * i + 1]) / self.scale[i];
            seen.entry(w.abs()).or_insert(if w < 0 { v.conj() } else { v });
        }
        let freqs: Vec<i64> = seen.keys().copied().collect();
        let rows = GramianRows::new(&self.spec, self.rows.cols, freqs.clone()).ok()?;
        let mut kinds = Vec::with_capacity(freqs.len());
        let mut rhs = Vec::new();
        let mut diagonal = Vec::new();
        for (k, &w) in freqs.iter().enumerate() {
            let c = rows.factors[k];
            let v = seen[&w];
            let self_conj = (2 * w).rem_euclid(m) == 0;
            if self_conj {
                let unit = if c.norm() > 0.0 { c / c.norm() } else { Complex64::new(1.0, 0.0) };
                rhs.push((unit.conj() * v).re);
                diagonal.push(c.norm_sqr() * m as f64);
                kinds.push(RowKind::Single(unit));
            } else {
                rhs.push(v.re);
                rhs.push(v.im);
                diagonal.push(c.norm_sqr() * m as f64 / 2.0);
                diagonal.push(c.norm_sqr() * m as f64 / 2.0);
                kinds.push(RowKind::Pair);
            }
        }
        Some(ReducedConstraint {
            op: Box::new(ReducedFourier { rows, kinds, len: rhs.len() }),
            rhs,
            diagonal,
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum RowKind {
    Pair,
    Single(Complex64),
}

struct ReducedFourier {
    rows: GramianRows,
    kinds: Vec<RowKind>,
    len: usize,
}

impl LinearOperator for ReducedFourier {
    fn rows(&self) -> usize {
        self.len
    }
    fn cols(&self) -> usize {
        self.rows.cols
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = self.rows.apply(x);
        let mut out = Vec::with_capacity(self.len);
        for (z, kind) in v.iter().zip(&self.kinds) {
            match kind {
                RowKind::Pair => {
                    out.push(z.re);
                    out.push(z.im);
                }
                RowKind::Single(u) => out.push((u.conj() * z).re),
            }
        }
        out
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.kinds.len());
        let mut pos = 0;
        for kind in &self.kinds {
            match kind {
                RowKind::Pair => {
                    w.push(Complex64::new(y[pos], y[pos + 1]));
                    pos += 2;
                }
                RowKind::Single(u) => {
                    w.push(u * y[pos]);
                    pos += 1;
                }
            }
        }
        self.rows.adjoint_real(&w, None)
    }
}

/// The measurement operators used by the three strategies.
pub enum MeasurementOperator {
    /// i.i.d. Gaussian matrix with variance 1/m.
    GaussianDense(DenseOperator),
    /// Direct coarse sensing plus a Gaussian block on the fine coordinates.
    TwoLevelDirectPlusGaussian(TwoLevelOperator),
    /// P_Ω D U P_M through the FFT.
    SubsampledScaledGramian(FourierOperator),
    /// P_Ω D U P_M from a dense Gramian (realified).
    Dense(DenseOperator),
}

impl MeasurementOperator {
    pub fn variant(&self) -> &'static str {
        match self {
            Self::GaussianDense(_) => "GaussianDense",
            Self::TwoLevelDirectPlusGaussian(_) => "TwoLevelDirectPlusGaussian",
            Self::SubsampledScaledGramian(_) => "SubsampledScaledGramian",
            Self::Dense(_) => "Dense",
        }
    }

    fn inner(&self) -> &dyn LinearOperator {
        match self {
            Self::GaussianDense(a) | Self::Dense(a) => a,
            Self::TwoLevelDirectPlusGaussian(a) => a,
            Self::SubsampledScaledGramian(a) => a,
        }
    }
}

impl LinearOperator for MeasurementOperator {
    fn rows(&self) -> usize {
        self.inner().rows()
    }
    fn cols(&self) -> usize {
        self.inner().cols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.inner().apply(x)
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.inner().adjoint(y)
    }
    fn dense(&self) -> Option<&DMatrix<f64>> {
        self.inner().dense()
    }
    fn reduced_constraint(&self, y: &[f64]) -> Option<ReducedConstraint> {
        self.inner().reduced_constraint(y)
    }
    fn group(&self) -> usize {
        self.inner().group()
    }
}

/// Gaussian encoder with `m` rows on `n` coefficients.
pub fn gaussian_operator(m: usize, n: usize, seed: u64) -> Result<MeasurementOperator> {
    if m == 0 || n == 0 {
        return Err(Error::Precondition("gaussian_operator needs m, N >= 1".into()));
    }
    Ok(MeasurementOperator::GaussianDense(DenseOperator::new(gaussian_matrix(m, n, seed))))
}

/// Two-level encoder: coordinates 1..N1 observed directly, N1+1..N2 through m2 Gaussian rows.
pub fn two_level_operator(n1: usize, n2: usize, m2: usize, seed: u64) -> Result<MeasurementOperator> {
    if n1 >= n2 || m2 == 0 {
        return Err(Error::Precondition(format!(
            "two_level_operator needs N1 < N2 and m2 >= 1 (got {n1}, {n2}, {m2})"
        )));
    }
    Ok(MeasurementOperator::TwoLevelDirectPlusGaussian(TwoLevelOperator {
        n1,
        n2,
        gaussian: gaussian_matrix(m2, n2 - n1, seed),
        full: OnceLock::new(),
    }))
}

/// Rows of D·U selected by Ω (with multiplicity) from a dense Gramian.
pub fn subsampled_gramian_operator(u: &CrossGramian, pattern: &SamplingPattern) -> Result<MeasurementOperator> {
    let d = pattern.row_scaling();
    let mut a = DMatrix::<Complex64>::zeros(pattern.len(), u.cols);
    for (i, e) in pattern.entries.iter().enumerate() {
        if e.natural > u.rows {
            return Err(Error::Shape(format!(
                "pattern index {} exceeds the {} Gramian rows",
                e.natural, u.rows
            )));
        }
        for (j, v) in u.row(e.natural - 1).iter().enumerate() {
            a[(i, j)] = v * d[i];
        }
    }
    Ok(MeasurementOperator::Dense(realify(&a, false)))
}

/// Matrix-free P_Ω D U P_M with M = `cols` columns.
pub fn fourier_operator(spec: &WaveletSpec, cols: usize, pattern: &SamplingPattern) -> Result<MeasurementOperator> {
    Ok(MeasurementOperator::SubsampledScaledGramian(FourierOperator::new(
        spec,
        cols,
        pattern.frequencies(),
        pattern.row_scaling(),
    )?))
}

/// Spectral norm estimate by power iteration on AᵀA from a seeded start.
pub fn operator_norm(op: &dyn LinearOperator, iters: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..op.cols()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut lambda = 0.0;
    for _ in 0..iters.max(1) {
        let nx = norm(&x);
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let y = op.apply(&x);
        lambda = norm(&y);
        x = op.adjoint(&y);
    }
    lambda
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::cross_gramian;
    use crate::sampling::scheme::{draw_multilevel, LevelScheme, SchemeMode};

    fn probe(op: &dyn LinearOperator, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..op.cols()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y: Vec<f64> = (0..op.rows()).map(|_| StandardNormal.sample(&mut rng)).collect();
        (dot(&op.apply(&x), &y) - dot(&x, &op.adjoint(&y))).abs()
    }

    #[test]
    fn adjoint_consistency() {
        let spec = WaveletSpec::daubechies(2).unwrap();
        let scheme = LevelScheme::new(vec![8, 16, 32, 64], vec![8, 8, 6, 10], 2, SchemeMode::Theory).unwrap();
        let pattern = draw_multilevel(&scheme, 5);
        let u = cross_gramian(&spec, 64, 64, 2).unwrap();
        let ops = [
            gaussian_operator(20, 50, 1).unwrap(),
            two_level_operator(8, 40, 12, 2).unwrap(),
            fourier_operator(&spec, 64, &pattern).unwrap(),
            subsampled_gramian_operator(&u, &pattern).unwrap(),
        ];
        for op in &ops {
            assert!(probe(op, 9) < 1e-10, "{}", op.variant());
        }
    }

    #[test]
    fn fft_and_dense_paths_agree() {
        let spec = WaveletSpec::daubechies(2).unwrap();
        let scheme = LevelScheme::new(vec![8, 16, 32, 64], vec![8, 8, 6, 10], 2, SchemeMode::Theory).unwrap();
        let pattern = draw_multilevel(&scheme, 5);
        let u = cross_gramian(&spec, 64, 64, 4).unwrap();
        let a = fourier_operator(&spec, 64, &pattern).unwrap();
        let b = subsampled_gramian_operator(&u, &pattern).unwrap();
        let x: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        let (ya, yb) = (a.apply(&x), b.apply(&x));
        assert!(ya.iter().zip(&yb).all(|(p, q)| (p - q).abs() < 1e-12));
    }

    #[test]
    fn reduced_constraint_has_same_solutions() {
        let spec = WaveletSpec::haar();
        let scheme = LevelScheme::new(vec![2, 4, 8, 16, 32], vec![2, 2, 4, 6, 9], 3, SchemeMode::Theory).unwrap();
        let pattern = draw_multilevel(&scheme, 8);
        let a = fourier_operator(&spec, 32, &pattern).unwrap();
        let x: Vec<f64> = (0..32).map(|i| ((i * 5 % 7) as f64) - 3.0).collect();
        let y = a.apply(&x);
        let red = a.reduced_constraint(&y).unwrap();
        let yb = red.op.apply(&x);
        assert!(yb.iter().zip(&red.rhs).all(|(p, q)| (p - q).abs() < 1e-12));
        // exact diagonal when N = M
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w: Vec<f64> = (0..red.op.rows()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let bbt = red.op.apply(&red.op.adjoint(&w));
        for (i, v) in bbt.iter().enumerate() {
            assert!((v - red.diagonal[i] * w[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn two_level_blocks() {
        let op = two_level_operator(4, 12, 5, 3).unwrap();
        assert_eq!(op.rows(), 9);
        let mut d = vec![0.0; 12];
        d[..4].copy_from_slice(&[1.0, 2.0, 3.0, 4.0]);
        let y = op.apply(&d);
        assert_eq!(&y[..4], &[1.0, 2.0, 3.0, 4.0]);
        assert!(y[4..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gaussian_seeded() {
        let a = gaussian_matrix(10, 10, 4);
        assert_eq!(a, gaussian_matrix(10, 10, 4));
        assert_ne!(a, gaussian_matrix(10, 10, 5));
    }

    #[test]
    fn power_method_matches_svd() {
        let a = gaussian_matrix(30, 50, 2);
        let exact = a.clone().svd(false, false).singular_values.max();
        let est = operator_norm(&DenseOperator::new(a), 100, 0);
        assert!((est - exact).abs() < 0.01 * exact);
    }
}
