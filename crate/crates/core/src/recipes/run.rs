//! Encode–decode pipelines for the three strategies.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use super::params::{
    fourier_params, gauss_params_for, optimal_params_for, FourierRecipe, RecipeMode, DEFAULT_DELTA,
};
use crate::error::{Error, Result};
use crate::fourier::{estimate_smoothness_q, fourier_coefficients, frequency_of, DENSE_CAP};
use crate::sampling::{
    complex_to_real, draw_multilevel, draw_symmetric, fourier_operator, gaussian_operator, two_level_operator,
    LinearOperator, MeasurementOperator, SamplingPattern,
};
use crate::solvers::{basis_pursuit, weighted_basis_pursuit, weighted_sqrt_lasso, SolveOptions, SolveReport};
use crate::wavelet::{function_to_coefficients, CoefficientVector, PiecewiseFunction, WaveletSpec, DEFAULT_OVERSAMPLE};

/// Largest M accepted by theory-mode Fourier runs.
pub const THEORY_DIM_CAP: usize = 1 << 16;
/// Reference coefficients are computed this many scales above the encoded ones.
pub const REFERENCE_EXTRA_SCALES: usize = 2;
/// Default dimension N of experiment-mode runs.
pub const DEFAULT_DIM: usize = 1 << 12;

/// Decoder of the Fourier strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Decoder {
    Bp,
    Wbp,
    WsrLasso,
}

impl Decoder {
    pub fn name(self) -> &'static str {
        match self {
            Decoder::Bp => "bp",
            Decoder::Wbp => "wbp",
            Decoder::WsrLasso => "wsrlasso",
        }
    }
}

impl std::str::FromStr for Decoder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bp" | "l1" => Ok(Decoder::Bp),
            "wbp" | "l1w" => Ok(Decoder::Wbp),
            "wsrlasso" | "srlasso" => Ok(Decoder::WsrLasso),
            _ => Err(Error::Parse(format!("unknown decoder '{s}' (expected bp, wbp or wsrlasso)"))),
        }
    }
}

/// Encoder/decoder pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Method {
    Gauss,
    Optimal,
    Fourier(Decoder),
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Gauss,
        Method::Optimal,
        Method::Fourier(Decoder::Bp),
        Method::Fourier(Decoder::Wbp),
        Method::Fourier(Decoder::WsrLasso),
    ];

    /// Name used in CSV files and configs, e.g. `fourier_wbp`.
    pub fn name(self) -> String {
        match self {
            Method::Gauss => "gauss_bp".into(),
            Method::Optimal => "optimal_bp".into(),
            Method::Fourier(d) => format!("fourier_{}", d.name()),
        }
    }

    /// Small stable id used when deriving per-run seeds.
    pub fn id(self) -> u64 {
        match self {
            Method::Gauss => 1,
            Method::Optimal => 2,
            Method::Fourier(Decoder::Bp) => 3,
            Method::Fourier(Decoder::Wbp) => 4,
            Method::Fourier(Decoder::WsrLasso) => 5,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        match s.as_str() {
            "gauss" | "gauss_bp" => Ok(Method::Gauss),
            "optimal" | "optimal_bp" => Ok(Method::Optimal),
            "fourier" => Ok(Method::Fourier(Decoder::Bp)),
            _ => match s.strip_prefix("fourier_") {
                Some(d) => Ok(Method::Fourier(d.parse()?)),
                None => Err(Error::Parse(format!(
                    "unknown method '{s}' (expected gauss_bp, optimal_bp, fourier_bp, fourier_wbp or fourier_wsrlasso)"
                ))),
            },
        }
    }
}

/// Settings shared by all pipelines.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub mode: RecipeMode,
    /// Dimension N in experiment mode.
    pub dim: usize,
    pub delta: f64,
    pub solve: SolveOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: RecipeMode::Experiment,
            dim: DEFAULT_DIM,
            delta: DEFAULT_DELTA,
            solve: SolveOptions::default(),
        }
    }
}

impl RunConfig {
    fn dim(&self) -> Option<usize> {
        match self.mode {
            RecipeMode::Theory => None,
            RecipeMode::Experiment => Some(self.dim),
        }
    }
}

/// Result of one encode–decode run.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub method: Method,
    pub m: usize,
    /// Number of reconstructed coefficients.
    pub n: usize,
    #[serde(skip)]
    pub coefficients: CoefficientVector,
    pub rel_error: f64,
    pub report: SolveReport,
    pub runtime_ms: f64,
}

/// A function, a wavelet and the cached data every run needs: reference
/// coefficients per scale and Fourier coefficients at the first frequencies.
/// Safe to share between threads.
pub struct Target {
    pub f: PiecewiseFunction,
    pub spec: WaveletSpec,
    pub oversample: usize,
    coefficients: Mutex<HashMap<usize, Arc<CoefficientVector>>>,
    spectrum: Mutex<Option<Arc<Vec<Complex64>>>>,
    q: Mutex<Option<f64>>,
}

impl std::fmt::Debug for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Target").field("f", &self.f).field("wavelet", &self.spec.name()).finish()
    }
}

impl Target {
    pub fn new(f: PiecewiseFunction, spec: WaveletSpec) -> Self {
        Self {
            f,
            spec,
            oversample: DEFAULT_OVERSAMPLE,
            coefficients: Mutex::new(HashMap::new()),
            spectrum: Mutex::new(None),
            q: Mutex::new(None),
        }
    }

    /// First 2^J wavelet coefficients of f.
    pub fn coefficients(&self, j: usize) -> Result<Arc<CoefficientVector>> {
        let mut cache = self.coefficients.lock().unwrap();
        if let Some(c) = cache.get(&j) {
            return Ok(c.clone());
        }
        let c = Arc::new(function_to_coefficients(&self.f, &self.spec, j, self.oversample)?);
        cache.insert(j, c.clone());
        Ok(c)
    }

    /// Coefficients fed to an encoder of dimension `n`.
    pub fn encoded(&self, n: usize) -> Result<Arc<CoefficientVector>> {
        self.coefficients(log2_exact(n)?)
    }

    /// ‖f − f̃‖/‖f‖ in coefficient space, against the reference at scale `j_ref`.
    /// Reference coefficients beyond f̃ count fully, and the energy of f above
    /// scale `j_ref` is added as ‖f‖² − ‖P_{j_ref} f‖², so the result does not
    /// depend on `j_ref` beyond quadrature accuracy.
    pub fn rel_error_at(&self, approx: &[f64], j_ref: usize) -> Result<f64> {
        let reference = self.coefficients(j_ref)?;
        let r = &reference.values;
        if approx.len() > r.len() {
            return Err(Error::Shape(format!(
                "approximation has {} coefficients, reference only {}",
                approx.len(),
                r.len()
            )));
        }
        let head: f64 = approx.iter().zip(r).map(|(a, b)| (a - b).powi(2)).sum();
        let tail: f64 = r[approx.len()..].iter().map(|b| b * b).sum();
        let captured: f64 = r.iter().map(|b| b * b).sum();
        let total = self.f.norm_estimate.powi(2);
        if total == 0.0 {
            return Ok(if head == 0.0 { 0.0 } else { f64::INFINITY });
        }
        // rounding can push a tiny remainder below zero
        let beyond = (total - captured).max(0.0);
        Ok(((head + tail + beyond) / total).sqrt())
    }

    /// Relative error with the reference REFERENCE_EXTRA_SCALES above f̃.
    pub fn rel_error(&self, approx: &[f64]) -> Result<f64> {
        self.rel_error_at(approx, log2_exact(approx.len())? + REFERENCE_EXTRA_SCALES)
    }

    /// f̂(ω) for the frequencies of the first `n` natural indices.
    pub fn spectrum(&self, n: usize) -> Arc<Vec<Complex64>> {
        let mut cache = self.spectrum.lock().unwrap();
        if let Some(s) = cache.as_ref() {
            if s.len() >= n {
                return s.clone();
            }
        }
        let freqs: Vec<i64> = (1..=n).map(frequency_of).collect();
        let s = Arc::new(fourier_coefficients(&self.f, &freqs));
        *cache = Some(s.clone());
        s
    }

    /// Decay exponent q of the scaling function (0 for Haar).
    pub fn q(&self) -> f64 {
        *self.q.lock().unwrap().get_or_insert_with(|| {
            if self.spec.is_haar() {
                0.0
            } else {
                estimate_smoothness_q(&self.spec)
            }
        })
    }
}

fn log2_exact(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Precondition(format!("{n} is not a power of two")));
    }
    Ok(n.trailing_zeros() as usize)
}

fn check_dense(rows: usize, cols: usize) -> Result<()> {
    if rows.saturating_mul(cols) > DENSE_CAP {
        return Err(Error::CapExceeded(format!(
            "a {rows} x {cols} Gaussian matrix exceeds the {DENSE_CAP}-entry cap; use experiment mode with a smaller --dim"
        )));
    }
    Ok(())
}

fn finish(
    target: &Target,
    method: Method,
    m: usize,
    x: Vec<f64>,
    report: SolveReport,
    start: Instant,
) -> Result<RunOutcome> {
    let n = x.len();
    let rel_error = target.rel_error(&x)?;
    Ok(RunOutcome {
        method,
        m,
        n,
        coefficients: CoefficientVector::new(x, target.spec.j0)?,
        rel_error,
        report,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Gaussian encoder on the first N coefficients, basis pursuit decoder.
pub fn run_gauss(target: &Target, m: usize, alpha: f64, seed: u64, cfg: &RunConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let recipe = gauss_params_for(m, alpha, target.spec.p, cfg.dim())?;
    check_dense(m, recipe.n)?;
    let d = target.encoded(recipe.n)?;
    let a = gaussian_operator(m, recipe.n, seed)?;
    let y = a.apply(&d.values);
    let (x, report) = basis_pursuit(&a, &y, &cfg.solve)?;
    finish(target, Method::Gauss, m, x, report, start)
}

/// Coarse coefficients sensed directly, the remaining ones up to N2 by a
/// Gaussian block decoded with basis pursuit.
pub fn run_optimal(target: &Target, m: usize, alpha: f64, seed: u64, cfg: &RunConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut recipe = optimal_params_for(m, alpha, target.spec.p, cfg.dim())?;
    if cfg.mode == RecipeMode::Experiment {
        let m1 = (m as f64 / 2.0).round() as usize;
        recipe.n1 = m1;
        recipe.m1 = m1;
        recipe.m2 = m - m1;
    }
    assert_eq!(recipe.m1 + recipe.m2, m);
    check_dense(recipe.m2, recipe.n2 - recipe.n1)?;
    let d = target.encoded(recipe.n2)?;
    let a = two_level_operator(recipe.n1, recipe.n2, recipe.m2, seed)?;
    let y = a.apply(&d.values);
    let MeasurementOperator::TwoLevelDirectPlusGaussian(two) = &a else {
        unreachable!("two_level_operator returns the two-level variant")
    };
    let fine = two.fine_block();
    let (xf, report) = basis_pursuit(&fine, &y[recipe.n1..], &cfg.solve)?;
    let mut x = y[..recipe.n1].to_vec();
    x.extend(xf);
    finish(target, Method::Optimal, m, x, report, start)
}

/// The Fourier recipe for this target and configuration.
pub fn fourier_recipe(target: &Target, m: usize, alpha: f64, cfg: &RunConfig) -> Result<FourierRecipe> {
    fourier_params(m, alpha, target.spec.p, target.q(), cfg.delta, cfg.mode, cfg.dim())
}

/// Draws Ω for a recipe: symmetric pairs in experiment mode, independent
/// draws in theory mode.
pub fn fourier_pattern(recipe: &FourierRecipe, seed: u64) -> Result<SamplingPattern> {
    let scheme = recipe.scheme()?;
    match recipe.mode {
        RecipeMode::Experiment => draw_symmetric(&scheme, seed),
        RecipeMode::Theory => Ok(draw_multilevel(&scheme, seed)),
    }
}

/// Multilevel subsampled Fourier samples decoded in the wavelet basis.
pub fn run_fourier(
    target: &Target,
    m: usize,
    alpha: f64,
    decoder: Decoder,
    seed: u64,
    cfg: &RunConfig,
) -> Result<RunOutcome> {
    let start = Instant::now();
    let recipe = fourier_recipe(target, m, alpha, cfg)?;
    let dim = recipe
        .dimension()
        .filter(|&d| d <= THEORY_DIM_CAP)
        .ok_or_else(|| {
            Error::CapExceeded(format!(
                "M = 2^{} exceeds the 2^16 cap; use --mode experiment with --dim",
                recipe.log2_m
            ))
        })?;
    let pattern = fourier_pattern(&recipe, seed)?;
    let op = fourier_operator(&target.spec, dim, &pattern)?;
    let spectrum = target.spectrum(dim);
    let scale = pattern.row_scaling();
    let samples: Vec<Complex64> = pattern
        .entries
        .iter()
        .zip(&scale)
        .map(|(e, d)| spectrum[e.natural - 1] * *d)
        .collect();
    let y = complex_to_real(&samples);
    let (x, report) = match decoder {
        Decoder::Bp => basis_pursuit(&op, &y, &cfg.solve)?,
        Decoder::Wbp => weighted_basis_pursuit(&op, &y, &recipe.weights()?, &cfg.solve)?,
        Decoder::WsrLasso => weighted_sqrt_lasso(&op, &y, &recipe.weights()?, recipe.lambda, &cfg.solve)?,
    };
    finish(target, Method::Fourier(decoder), m, x, report, start)
}

/// Dispatches on the method.
pub fn run_method(
    target: &Target,
    method: Method,
    m: usize,
    alpha: f64,
    seed: u64,
    cfg: &RunConfig,
) -> Result<RunOutcome> {
    match method {
        Method::Gauss => run_gauss(target, m, alpha, seed, cfg),
        Method::Optimal => run_optimal(target, m, alpha, seed, cfg),
        Method::Fourier(d) => run_fourier(target, m, alpha, d, seed, cfg),
    }
}
