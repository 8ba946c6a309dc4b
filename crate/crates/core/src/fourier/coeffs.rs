//! Fourier coefficients ⟨f, e^{2πin·}⟩ of piecewise smooth functions.

use num_complex::Complex64;

use crate::quadrature::{panel_edges, panel_rule};
use crate::wavelet::PiecewiseFunction;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
/// Exact phase recomputation interval in the recurrence.
const RESYNC: usize = 64;

/// ⟨f, γ_n⟩ = ∫_0^1 f(x) e^{-2πinx} dx for each `n` in `frequencies`.
pub fn fourier_coefficients(f: &PiecewiseFunction, frequencies: &[i64]) -> Vec<Complex64> {
    if frequencies.is_empty() {
        return Vec::new();
    }
    let nmax = frequencies.iter().map(|n| n.unsigned_abs()).max().unwrap_or(0) as usize;
    let width = (1.0 / 16.0f64).min(2.0 / nmax.max(1) as f64);
    let (nodes, weights) = panel_rule(&panel_edges(0.0, 1.0, f.breakpoints(), width));
    let g: Vec<f64> = nodes.iter().zip(&weights).map(|(&x, &w)| w * f.eval(x)).collect();

    // f is real, so only |n| is needed
    let mut needed = vec![false; nmax + 1];
    for n in frequencies {
        needed[n.unsigned_abs() as usize] = true;
    }
    let count = needed.iter().filter(|&&b| b).count();
    let mut table = vec![Complex64::new(0.0, 0.0); nmax + 1];
    if count * 4 < nmax {
        for (n, slot) in table.iter_mut().enumerate() {
            if !needed[n] {
                continue;
            }
            let (mut re, mut im) = (0.0, 0.0);
            for (&x, &gj) in nodes.iter().zip(&g) {
                let (s, c) = (TWO_PI * n as f64 * x).sin_cos();
                re += gj * c;
                im -= gj * s;
            }
            *slot = Complex64::new(re, im);
        }
    } else {
        for (&x, &gj) in nodes.iter().zip(&g) {
            let step = Complex64::from_polar(1.0, -TWO_PI * x);
            let mut cur = Complex64::new(gj, 0.0);
            for (n, slot) in table.iter_mut().enumerate() {
                if n % RESYNC == 0 && n > 0 {
                    cur = gj * Complex64::from_polar(1.0, -TWO_PI * n as f64 * x);
                }
                *slot += cur;
                cur *= step;
            }
        }
    }
    frequencies
        .iter()
        .map(|&n| {
            let v = table[n.unsigned_abs() as usize];
            if n < 0 {
                v.conj()
            } else {
                v
            }
        })
        .collect()
}
