//! Wavelet coefficients of functions, computed on an oversampled grid.

use nalgebra::{DMatrix, DVector};

use super::dwt::{forward_in_place, CoefficientVector};
use super::filter::WaveletSpec;
use super::function::PiecewiseFunction;
use crate::error::{Error, Result};

/// Default oversampling factor of the fine grid.
pub const DEFAULT_OVERSAMPLE: usize = 16;

/// Dyadic resolution of the tabulated scaling function.
const TABLE_RESOLUTION: u32 = 16;
/// Sub-cell resolution used away from breakpoints.
const SMOOTH_RESOLUTION: u32 = 3;
/// Sub-cell resolution used on cells whose support contains a breakpoint.
const JUMP_RESOLUTION: u32 = 15;

/// How fine-scale scaling coefficients are obtained from `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientMethod {
    /// ⟨f, φ_{J',t}⟩ by quadrature against the tabulated scaling function.
    #[default]
    Projection,
    /// f sampled at cell midpoints and scaled by (2^{J'})^{-1/2}.
    Midpoint,
}

/// Values of the scaling function φ at the dyadic points k·2^{-R}, k = 0..=(2p-1)·2^R.
#[derive(Debug, Clone)]
pub struct ScalingTable {
    pub resolution: u32,
    pub values: Vec<f64>,
}

impl ScalingTable {
    /// Tabulates φ by the cascade recursion φ(x) = √2 Σ h_k φ(2x - k).
    pub fn new(spec: &WaveletSpec, resolution: u32) -> Self {
        let h = &spec.h;
        let len = h.len();
        let width = len - 1;
        let s = 1usize << resolution;
        let mut values = vec![0.0; width * s + 1];

        // Values at the integers: eigenvector of the refinement matrix, Σ φ(n) = 1.
        let ints: Vec<f64> = if spec.is_haar() {
            vec![1.0, 0.0]
        } else {
            let n = width - 1; // interior integers 1..=width-1
            let mut a = DMatrix::<f64>::zeros(n, n);
            for row in 0..n {
                for col in 0..n {
                    let k = 2 * (row + 1) as i64 - (col + 1) as i64;
                    if (0..len as i64).contains(&k) {
                        a[(row, col)] = std::f64::consts::SQRT_2 * h[k as usize];
                    }
                }
                a[(row, row)] -= 1.0;
            }
            for col in 0..n {
                a[(n - 1, col)] = 1.0;
            }
            let mut rhs = DVector::<f64>::zeros(n);
            rhs[n - 1] = 1.0;
            let v = a.lu().solve(&rhs).expect("refinement system is nonsingular");
            let mut out = vec![0.0; width + 1];
            for i in 0..n {
                out[i + 1] = v[i];
            }
            out
        };
        for (n, v) in ints.iter().enumerate() {
            values[n * s] = *v;
        }

        let top = (width * s) as i64;
        for level in 1..=resolution {
            let step = s >> level;
            let mut i = step;
            while i < width * s {
                let mut acc = 0.0;
                for (k, hk) in h.iter().enumerate() {
                    let idx = 2 * i as i64 - (k * s) as i64;
                    if idx >= 0 && idx <= top {
                        acc += hk * values[idx as usize];
                    }
                }
                values[i] = std::f64::consts::SQRT_2 * acc;
                i += 2 * step;
            }
        }
        Self { resolution, values }
    }

    /// φ at k·2^{-resolution}.
    pub fn at(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }
}

/// Quadrature nodes (in units of fine cells) and weights for ∫ g(u) φ(u) du.
fn cell_rule(spec: &WaveletSpec, table: &ScalingTable, sub_resolution: u32) -> (Vec<f64>, Vec<f64>) {
    let width = spec.filter_len() - 1;
    let h = 1.0 / (1u64 << sub_resolution) as f64;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    if spec.is_haar() {
        // midpoints of the sub-cells; φ ≡ 1 on [0, 1)
        let n = 1usize << sub_resolution;
        for i in 0..n {
            nodes.push((i as f64 + 0.5) * h);
            weights.push(h);
        }
    } else {
        // dyadic points, where the Riemann sum reproduces all moments below p
        let stride = 1usize << (table.resolution - sub_resolution);
        let n = width << sub_resolution;
        for i in 0..=n {
            let w = table.at(i * stride);
            if w != 0.0 {
                nodes.push(i as f64 * h);
                weights.push(w * h);
            }
        }
    }
    (nodes, weights)
}

/// Scaling coefficients of `f` at fine level log₂(len) (length `len`).
pub fn fine_scaling_coefficients(
    f: &PiecewiseFunction,
    spec: &WaveletSpec,
    len: usize,
    method: CoefficientMethod,
) -> Vec<f64> {
    let inv_len = 1.0 / len as f64;
    let norm = inv_len.sqrt();
    match method {
        CoefficientMethod::Midpoint => (0..len)
            .map(|t| norm * f.eval((t as f64 + 0.5) * inv_len))
            .collect(),
        CoefficientMethod::Projection => {
            let table = ScalingTable::new(spec, TABLE_RESOLUTION);
            let (nodes, weights) = cell_rule(spec, &table, SMOOTH_RESOLUTION);
            let mut coeffs: Vec<f64> = (0..len)
                .map(|t| {
                    let base = t as f64;
                    nodes
                        .iter()
                        .zip(&weights)
                        .map(|(&u, &w)| w * f.eval_periodic((u + base) * inv_len))
                        .sum::<f64>()
                        * norm
                })
                .collect();

            let width = (spec.filter_len() - 1) as f64;
            let mut jump_cells: Vec<usize> = Vec::new();
            for b in f.periodic_breakpoints() {
                let u = b * len as f64;
                let lo = (u - width).floor() as i64 + 1;
                let hi = u.ceil() as i64 - 1;
                for t in lo..=hi {
                    jump_cells.push(t.rem_euclid(len as i64) as usize);
                }
            }
            jump_cells.sort_unstable();
            jump_cells.dedup();
            if !jump_cells.is_empty() {
                let (jn, jw) = cell_rule(spec, &table, JUMP_RESOLUTION);
                for t in jump_cells {
                    let base = t as f64;
                    coeffs[t] = jn
                        .iter()
                        .zip(&jw)
                        .map(|(&u, &w)| w * f.eval_periodic((u + base) * inv_len))
                        .sum::<f64>()
                        * norm;
                }
            }
            coeffs
        }
    }
}

/// Wavelet coefficients of `f` up to scale J-1 (the first 2^J entries of the
/// canonical ordering), computed on a grid `oversample` times finer.
pub fn function_to_coefficients(
    f: &PiecewiseFunction,
    spec: &WaveletSpec,
    j: usize,
    oversample: usize,
) -> Result<CoefficientVector> {
    function_to_coefficients_with(f, spec, j, oversample, CoefficientMethod::Projection)
}

pub fn function_to_coefficients_with(
    f: &PiecewiseFunction,
    spec: &WaveletSpec,
    j: usize,
    oversample: usize,
    method: CoefficientMethod,
) -> Result<CoefficientVector> {
    if oversample < 2 || !oversample.is_power_of_two() {
        return Err(Error::Precondition(format!(
            "oversample must be a power of two >= 2, got {oversample}"
        )));
    }
    if j < spec.j0 {
        return Err(Error::Scale(format!("J = {j} is below the coarsest scale {}", spec.j0)));
    }
    let len = oversample << j;
    let mut fine = fine_scaling_coefficients(f, spec, len, method);
    forward_in_place(&mut fine, &spec.h, spec.j0)?;
    fine.truncate(1 << j);
    CoefficientVector::new(fine, spec.j0)
}
