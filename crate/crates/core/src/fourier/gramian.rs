//! The truncated Fourier–wavelet cross-Gramian P_N U P_M.

use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::index::{first_frequencies, level_bounds};
use crate::error::{Error, Result};
use crate::wavelet::dwt::{forward_in_place, inverse_in_place, levels_for_len};
use crate::wavelet::WaveletSpec;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Largest dense Gramian (entries) that will be materialized.
pub const DENSE_CAP: usize = 1 << 26;

/// Dense P_N U P_M with rows in natural frequency order and columns in the
/// canonical wavelet order. Entries are row-major.
#[derive(Debug, Clone, Serialize)]
pub struct CrossGramian {
    pub rows: usize,
    pub cols: usize,
    pub j0: usize,
    /// Sampling levels N_1 < … < N_r (natural indices).
    pub sampling_levels: Vec<usize>,
    /// Sparsity levels M_1 < … < M_r (wavelet indices).
    pub sparsity_levels: Vec<usize>,
    #[serde(skip)]
    pub entries: Vec<Complex64>,
}

impl CrossGramian {
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    /// Column norms ‖P_N U e_j‖.
    pub fn column_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (s, v) in sq.iter_mut().zip(self.row(r)) {
                *s += v.norm_sqr();
            }
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    /// Leading `rows × cols` block.
    pub fn truncated(&self, rows: usize, cols: usize) -> Result<Self> {
        if rows > self.rows || cols > self.cols {
            return Err(Error::Shape(format!(
                "cannot truncate {}x{} to {rows}x{cols}",
                self.rows, self.cols
            )));
        }
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            entries.extend_from_slice(&self.row(r)[..cols]);
        }
        Ok(Self {
            rows,
            cols,
            j0: self.j0,
            sampling_levels: self.sampling_levels.iter().copied().filter(|&n| n <= rows).collect(),
            sparsity_levels: self.sparsity_levels.iter().copied().filter(|&n| n <= cols).collect(),
            entries,
        })
    }

    /// Binary layout: u64 LE rows, u64 LE cols, then row-major (re, im) f64 LE pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.rows as u64).to_le_bytes())?;
        w.write_all(&(self.cols as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.cols);
        for r in 0..self.rows {
            buf.clear();
            for v in self.row(r) {
                buf.extend_from_slice(&v.re.to_le_bytes());
                buf.extend_from_slice(&v.im.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    /// Reads the layout written by [`CrossGramian::write_binary`]. Level metadata is
    /// rebuilt from `j0`.
    pub fn read_binary<R: Read>(mut r: R, j0: usize) -> Result<Self> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let rows = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let cols = u64::from_le_bytes(word) as usize;
        let mut entries = Vec::with_capacity(rows * cols);
        let mut pair = [0u8; 16];
        for _ in 0..rows * cols {
            r.read_exact(&mut pair)?;
            let re = f64::from_le_bytes(pair[..8].try_into().unwrap());
            let im = f64::from_le_bytes(pair[8..].try_into().unwrap());
            entries.push(Complex64::new(re, im));
        }
        Ok(Self {
            rows,
            cols,
            j0,
            sampling_levels: level_bounds(j0, levels_for_len(rows, j0)?),
            sparsity_levels: level_bounds(j0, levels_for_len(cols, j0)?),
            entries,
        })
    }
}

/// φ̂(2πω/L)/√L: the Fourier coefficient at ω of the periodized scale-log₂L
/// scaling function with shift 0.
pub fn fine_scaling_factor(spec: &WaveletSpec, omega: i64, len: usize) -> Complex64 {
    spec.scaling_hat(TWO_PI * omega as f64 / len as f64) / (len as f64).sqrt()
}

/// Cross-Gramian with `n_rows` natural frequencies and `n_cols` wavelets.
///
/// Each wavelet is expanded in periodized scaling functions on a grid of
/// `oversample · max(N, M)` cells; their Fourier coefficients are known in
/// closed form, so the entries are exact up to rounding.
pub fn cross_gramian(spec: &WaveletSpec, n_rows: usize, n_cols: usize, oversample: usize) -> Result<CrossGramian> {
    let r_rows = levels_for_len(n_rows, spec.j0)?;
    let r_cols = levels_for_len(n_cols, spec.j0)?;
    if r_rows < 1 || r_cols < 1 {
        return Err(Error::Shape("N and M must be at least 2^{j0+1}".into()));
    }
    if oversample == 0 || !oversample.is_power_of_two() {
        return Err(Error::Precondition(format!("oversample must be a power of two, got {oversample}")));
    }
    if n_rows.saturating_mul(n_cols) > DENSE_CAP {
        return Err(Error::CapExceeded(format!(
            "dense Gramian {n_rows}x{n_cols} exceeds {DENSE_CAP} entries; use the FFT operator"
        )));
    }
    let len = oversample * n_rows.max(n_cols);
    let freqs = first_frequencies(n_rows);
    let factors: Vec<Complex64> = freqs.iter().map(|&w| fine_scaling_factor(spec, w, len)).collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(len);

    let columns: Vec<Vec<Complex64>> = (0..n_cols)
        .into_par_iter()
        .map(|j| {
            let mut c = vec![0.0f64; len];
            c[j] = 1.0;
            inverse_in_place(&mut c, &spec.h, spec.j0).expect("valid length");
            let mut buf: Vec<Complex64> = c.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
            fft.process(&mut buf);
            freqs
                .iter()
                .zip(&factors)
                .map(|(&w, &fac)| fac * buf[w.rem_euclid(len as i64) as usize])
                .collect()
        })
        .collect();

    let mut entries = vec![Complex64::new(0.0, 0.0); n_rows * n_cols];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            entries[i * n_cols + j] = *v;
        }
    }
    Ok(CrossGramian {
        rows: n_rows,
        cols: n_cols,
        j0: spec.j0,
        sampling_levels: level_bounds(spec.j0, r_rows),
        sparsity_levels: level_bounds(spec.j0, r_cols),
        entries,
    })
}

/// Matrix-free rows of U: x ↦ (⟨Σ x_j φ_j, γ_ω⟩)_ω for a fixed list of frequencies.
///
/// A coefficient vector of length M is synthesized to scale log₂M, transformed by
/// one FFT and multiplied by the scaling-function factors.
#[derive(Clone)]
pub struct GramianRows {
    pub h: Vec<f64>,
    pub j0: usize,
    pub cols: usize,
    pub frequencies: Vec<i64>,
    pub factors: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    backward: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GramianRows {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GramianRows")
            .field("cols", &self.cols)
            .field("rows", &self.frequencies.len())
            .finish()
    }
}

impl GramianRows {
    pub fn new(spec: &WaveletSpec, cols: usize, frequencies: Vec<i64>) -> Result<Self> {
        levels_for_len(cols, spec.j0)?;
        let factors = frequencies.iter().map(|&w| fine_scaling_factor(spec, w, cols)).collect();
        let mut planner = FftPlanner::<f64>::new();
        Ok(Self {
            h: spec.h.clone(),
            j0: spec.j0,
            cols,
            forward: planner.plan_fft_forward(cols),
            backward: planner.plan_fft_inverse(cols),
            frequencies,
            factors,
        })
    }

    /// Spectrum of the scale-log₂M synthesis of `x` (unnormalized DFT).
    fn spectrum(&self, x: &[f64]) -> Vec<Complex64> {
        let mut c = x.to_vec();
        inverse_in_place(&mut c, &self.h, self.j0).expect("valid length");
        let mut buf: Vec<Complex64> = c.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// U x restricted to the stored frequencies, for real x.
    pub fn apply(&self, x: &[f64]) -> Vec<Complex64> {
        let spec = self.spectrum(x);
        let n = self.cols as i64;
        self.frequencies
            .iter()
            .zip(&self.factors)
            .map(|(&w, &fac)| fac * spec[w.rem_euclid(n) as usize])
            .collect()
    }

    /// Re(U* y) for y indexed like the stored frequencies, each row scaled by `scale[i]`.
    pub fn adjoint_real(&self, y: &[Complex64], scale: Option<&[f64]>) -> Vec<f64> {
        let n = self.cols as i64;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.cols];
        for (i, ((&w, &fac), &v)) in self.frequencies.iter().zip(&self.factors).zip(y).enumerate() {
            let s = scale.map_or(1.0, |d| d[i]);
            buf[w.rem_euclid(n) as usize] += fac.conj() * v * s;
        }
        self.backward.process(&mut buf);
        let mut out: Vec<f64> = buf.into_iter().map(|v| v.re).collect();
        forward_in_place(&mut out, &self.h, self.j0).expect("valid length");
        out
    }
}

/// Exact ⟨ψ^per_{j,k}, γ_n⟩ for the Haar wavelet.
pub fn haar_entry(spec: &WaveletSpec, j: usize, k: usize, n: i64) -> Result<Complex64> {
    if !spec.is_haar() {
        return Err(Error::Unsupported("haar_entry requires the Haar wavelet".into()));
    }
    if k >= 1usize << j {
        return Err(Error::Precondition(format!("shift {k} out of range at scale {j}")));
    }
    if n == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let scale = (1u64 << j) as f64;
    let omega = TWO_PI * n as f64 / scale;
    let e = Complex64::from_polar(1.0, -omega / 2.0);
    let psi_hat = (Complex64::new(1.0, 0.0) - e).powi(2) / Complex64::new(0.0, omega);
    Ok(psi_hat * Complex64::from_polar(scale.powf(-0.5), -omega * k as f64))
}

/// Exact entry of the Haar cross-Gramian at natural row `row` (1-based) and
/// canonical column `col` (0-based).
pub fn haar_column_entry(spec: &WaveletSpec, col: usize, row: usize) -> Result<Complex64> {
    let n = super::index::frequency_of(row);
    if col == 0 {
        if !spec.is_haar() {
            return Err(Error::Unsupported("haar_column_entry requires the Haar wavelet".into()));
        }
        return Ok(if n == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    }
    let j = (usize::BITS - 1 - col.leading_zeros()) as usize;
    haar_entry(spec, j, col - (1 << j), n)
}

/// μ(U^{(k,l)}) = (N_k − N_{k−1}) · max |u|² over block (k, l), levels 1-based.
pub fn local_coherence(u: &CrossGramian, k: usize, l: usize) -> Result<f64> {
    let rk = u.sampling_levels.len();
    let rl = u.sparsity_levels.len();
    if k < 1 || k > rk || l < 1 || l > rl {
        return Err(Error::LevelOutOfRange(format!(
            "block ({k}, {l}) outside 1..={rk} x 1..={rl}"
        )));
    }
    let row_lo = if k == 1 { 0 } else { u.sampling_levels[k - 2] };
    let row_hi = u.sampling_levels[k - 1];
    let col_lo = if l == 1 { 0 } else { u.sparsity_levels[l - 2] };
    let col_hi = u.sparsity_levels[l - 1];
    let mut best = 0.0f64;
    for r in row_lo..row_hi {
        for v in &u.row(r)[col_lo..col_hi] {
            best = best.max(v.norm_sqr());
        }
    }
    Ok((row_hi - row_lo) as f64 * best)
}

/// Extreme eigenvalues of the Gram matrix P_M U* P_N U P_M.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Balancing {
    /// θ: smallest eigenvalue.
    pub theta: f64,
    pub max_eigenvalue: f64,
    pub condition: f64,
}

/// Gram matrix P_M U* P_N U P_M of the leading block.
pub fn gram_matrix(u: &CrossGramian, n: usize, m: usize) -> Result<DMatrix<Complex64>> {
    if n > u.rows || m > u.cols {
        return Err(Error::Shape(format!("block {n}x{m} exceeds Gramian {}x{}", u.rows, u.cols)));
    }
    let mut g = DMatrix::<Complex64>::zeros(m, m);
    for r in 0..n {
        let row = &u.row(r)[..m];
        for a in 0..m {
            let ca = row[a].conj();
            if ca == Complex64::new(0.0, 0.0) {
                continue;
            }
            for b in a..m {
                g[(a, b)] += ca * row[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            g[(a, b)] = g[(b, a)].conj();
        }
    }
    Ok(g)
}

/// θ = λ_min(P_M U* P_N U P_M), together with λ_max and the condition number.
pub fn balancing(u: &CrossGramian, n: usize, m: usize) -> Result<Balancing> {
    if m > n {
        return Err(Error::Precondition(format!("balancing needs M <= N, got M = {m}, N = {n}")));
    }
    let g = gram_matrix(u, n, m)?;
    let eig = g.symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Balancing {
        theta: min,
        max_eigenvalue: max,
        condition: if min > 0.0 { max / min } else { f64::INFINITY },
    })
}

/// θ only.
pub fn balancing_constant(u: &CrossGramian, n: usize, m: usize) -> Result<f64> {
    Ok(balancing(u, n, m)?.theta)
}
