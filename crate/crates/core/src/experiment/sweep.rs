//! Sweeps over methods, budgets and trials with deterministic CSV output.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functions::{equispaced_breakpoints, make_fk, make_fk_with_breakpoints, TestFunction};
use crate::error::{Error, Result};
use crate::recipes::{run_method, Method, RecipeMode, RunConfig, Target, DEFAULT_DELTA, DEFAULT_DIM};
use crate::solvers::SolveOptions;
use crate::wavelet::WaveletSpec;

pub const CSV_HEADER: &str = "method,p,K,m,trial,seed,rel_l2_error,iterations,runtime_ms,status";

/// Everything a sweep needs. Built from defaults, a key = value file and flags.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    pub p: usize,
    pub k: usize,
    /// Replaces the jump locations of f_K when set.
    pub breakpoints: Option<Vec<f64>>,
    pub m_grid: Vec<usize>,
    pub alpha: f64,
    pub delta: f64,
    pub dim: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub output_path: Option<PathBuf>,
    pub jobs: usize,
    pub mode: RecipeMode,
    pub solve: SolveOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            methods: vec![
                Method::Gauss,
                Method::Optimal,
                Method::Fourier(crate::recipes::Decoder::Bp),
                Method::Fourier(crate::recipes::Decoder::Wbp),
            ],
            p: 1,
            k: 10,
            breakpoints: None,
            m_grid: (3..=11).map(|e| 1usize << e).collect(),
            alpha: 1.0,
            delta: DEFAULT_DELTA,
            dim: DEFAULT_DIM,
            trials: 10,
            master_seed: 0,
            output_path: None,
            jobs: 1,
            mode: RecipeMode::Experiment,
            solve: SolveOptions::default(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value '{value}' for key '{key}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

impl SweepConfig {
    /// Keys: methods, wavelet (or p), K, breakpoints, m_grid, alpha, delta,
    /// dim, trials, seed, out, jobs, mode, max_iters, bp_tol, opt_tol.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().to_ascii_lowercase().as_str() {
            "methods" | "method" => {
                self.methods = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "wavelet" => self.p = WaveletSpec::from_name(value)?.p,
            "p" => self.p = parse_num(key, value)?,
            "k" => self.k = parse_num(key, value)?,
            "breakpoints" | "override_breakpoints" => {
                self.breakpoints = match value {
                    "" | "none" => None,
                    "equispaced" => Some(Vec::new()),
                    _ => Some(parse_list(key, value)?),
                }
            }
            "m_grid" | "m" => self.m_grid = parse_list(key, value)?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "delta" => self.delta = parse_num(key, value)?,
            "dim" | "n_dim" => self.dim = parse_num(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "seed" | "master_seed" => self.master_seed = parse_num(key, value)?,
            "out" | "output_path" => self.output_path = Some(PathBuf::from(value)),
            "jobs" => self.jobs = parse_num(key, value)?,
            "mode" => self.mode = value.parse()?,
            "max_iters" => self.solve.max_iters = parse_num(key, value)?,
            "bp_tol" => self.solve.bp_tol = parse_num(key, value)?,
            "opt_tol" => self.solve.opt_tol = parse_num(key, value)?,
            other => return Err(Error::Parse(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", no + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition("m_grid must be strictly increasing".into()));
        }
        if let Some(&m) = self.m_grid.iter().find(|&&m| m > self.dim || m == 0) {
            return Err(Error::Precondition(format!("m = {m} must lie in 1..=N_dim = {}", self.dim)));
        }
        if !self.dim.is_power_of_two() || self.dim > 1 << 16 {
            return Err(Error::Precondition(format!(
                "N_dim must be a power of two up to 2^16, got {}",
                self.dim
            )));
        }
        if self.trials == 0 || self.jobs == 0 {
            return Err(Error::Precondition("trials and jobs must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Precondition("no methods selected".into()));
        }
        WaveletSpec::daubechies(self.p)?;
        self.solve.validate()
    }

    pub fn test_function(&self) -> Result<TestFunction> {
        match &self.breakpoints {
            None => make_fk(self.k),
            Some(b) if b.is_empty() => make_fk_with_breakpoints(self.k, equispaced_breakpoints(self.k)),
            Some(b) => make_fk_with_breakpoints(self.k, b.clone()),
        }
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            mode: self.mode,
            dim: self.dim,
            delta: self.delta,
            solve: self.solve.clone(),
        }
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub p: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    /// NaN when the run failed.
    pub rel_l2_error: f64,
    pub iterations: usize,
    pub runtime_ms: f64,
    pub status: String,
}

fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `t` of `method` at budget `m`.
pub fn trial_seed(master: u64, method: Method, m: usize, t: usize) -> u64 {
    [method.id(), m as u64, t as u64]
        .into_iter()
        .fold(splitmix64(master), |h, v| splitmix64(h ^ v))
}

fn error_status(e: &Error) -> &'static str {
    match e {
        Error::BudgetTooSmall(_) => "error:budget",
        Error::CapExceeded(_) => "error:cap",
        Error::Precondition(_) => "error:precondition",
        Error::Io(_) => "error:io",
        _ => "error:other",
    }
}

/// Runs one (method, m, trial) cell and never fails: errors become a status.
pub fn run_cell(target: &Target, cfg: &SweepConfig, k: usize, method: Method, m: usize, trial: usize) -> ResultRow {
    let seed = trial_seed(cfg.master_seed, method, m, trial);
    let mut row = ResultRow {
        method: method.name(),
        p: cfg.p,
        k,
        m,
        trial,
        seed,
        rel_l2_error: f64::NAN,
        iterations: 0,
        runtime_ms: 0.0,
        status: String::new(),
    };
    let start = std::time::Instant::now();
    match run_method(target, method, m, cfg.alpha, seed, &cfg.run_config()) {
        Ok(out) => {
            row.rel_l2_error = out.rel_error;
            row.iterations = out.report.iterations;
            row.status = out.report.status.to_string();
        }
        Err(e) => row.status = error_status(&e).to_string(),
    }
    row.runtime_ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;
    row
}

/// Median of the finite values; None if there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Median error per (method, m).
pub fn medians(rows: &[ResultRow]) -> BTreeMap<(String, usize), f64> {
    let mut groups: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.method.clone(), r.m)).or_default().push(r.rel_l2_error);
    }
    groups
        .into_iter()
        .filter_map(|(key, v)| median(v).map(|m| (key, m)))
        .collect()
}

/// Least-squares slope of ln(median error) against ln m over `m_range`.
pub fn fit_slope(rows: &[ResultRow], method: &str, m_range: RangeInclusive<usize>) -> Result<f64> {
    let pts: Vec<(f64, f64)> = medians(rows)
        .into_iter()
        .filter(|((meth, m), e)| meth == method && m_range.contains(m) && *e > 0.0)
        .map(|((_, m), e)| ((m as f64).ln(), e.ln()))
        .collect();
    log_slope(&pts)
}

/// Least-squares slope through (x, y) points; needs three distinct x.
pub fn log_slope(pts: &[(f64, f64)]) -> Result<f64> {
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::InsufficientPoints(format!(
            "{} distinct abscissae, need at least 3",
            xs.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Per-m medians and per-method slopes over the whole grid.
#[derive(Debug, Clone)]
pub struct Summary {
    pub medians: BTreeMap<(String, usize), f64>,
    pub slopes: BTreeMap<String, Option<f64>>,
    pub failures: usize,
}

impl Summary {
    pub fn from_rows(rows: &[ResultRow]) -> Self {
        let medians = medians(rows);
        let mut slopes = BTreeMap::new();
        for r in rows {
            slopes
                .entry(r.method.clone())
                .or_insert_with(|| fit_slope(rows, &r.method, 0..=usize::MAX).ok());
        }
        Self {
            medians,
            slopes,
            failures: rows.iter().filter(|r| r.status.starts_with("error")).count(),
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "method,m,median_rel_l2_error")?;
        for ((meth, m), e) in &self.medians {
            writeln!(f, "{meth},{m},{e:.6e}")?;
        }
        for (meth, s) in &self.slopes {
            match s {
                Some(s) => writeln!(f, "slope {meth} = {s:.4}")?,
                None => writeln!(f, "slope {meth} = n/a")?,
            }
        }
        write!(f, "failed runs = {}", self.failures)
    }
}

pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Summary,
}

/// Writes the header line.
pub fn write_header<W: Write>(w: &mut W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    Ok(())
}

/// Serializes one row without a header.
pub fn write_row<W: Write>(w: &mut W, row: &ResultRow) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    wtr.serialize(row).map_err(|e| Error::Parse(e.to_string()))?;
    let bytes = wtr.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    w.write_all(&bytes)?;
    Ok(())
}

/// Parses a sweep CSV back into rows.
pub fn read_rows<R: std::io::Read>(r: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected header '{}'", header.join(","))));
    }
    rdr.deserialize()
        .map(|row| row.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

/// Runs every (method, m, trial) cell, `jobs` at a time. Rows are written in
/// method, m, trial order as soon as all earlier ones are done, so the file
/// does not depend on `jobs`.
pub fn run_sweep<W: Write + Send>(cfg: &SweepConfig, out: Option<&mut W>) -> Result<SweepOutput> {
    cfg.validate()?;
    let test = cfg.test_function()?;
    let target = Target::new(test.function.clone(), WaveletSpec::daubechies(cfg.p)?);
    let cells: Vec<(Method, usize, usize)> = cfg
        .methods
        .iter()
        .flat_map(|&meth| {
            cfg.m_grid
                .iter()
                .flat_map(move |&m| (0..cfg.trials).map(move |t| (meth, m, t)))
        })
        .collect();

    let mut out = out;
    if let Some(w) = out.as_deref_mut() {
        write_header(w)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Precondition(e.to_string()))?;
    let (tx, rx) = mpsc::channel::<(usize, ResultRow)>();
    let mut rows: Vec<ResultRow> = Vec::with_capacity(cells.len());
    std::thread::scope(|scope| -> Result<()> {
        let target = &target;
        let cells = &cells;
        scope.spawn(move || {
            pool.install(|| {
                cells.par_iter().enumerate().for_each_with(tx, |tx, (i, &(meth, m, t))| {
                    let _ = tx.send((i, run_cell(target, cfg, test.k, meth, m, t)));
                })
            })
        });
        let mut pending = BTreeMap::new();
        for (i, row) in rx {
            pending.insert(i, row);
            while let Some(row) = pending.remove(&rows.len()) {
                if let Some(w) = out.as_deref_mut() {
                    write_row(w, &row)?;
                    w.flush()?;
                }
                rows.push(row);
            }
        }
        Ok(())
    })?;
    let summary = Summary::from_rows(&rows);
    Ok(SweepOutput { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, m: usize, e: f64) -> ResultRow {
        ResultRow {
            method: method.into(),
            p: 1,
            k: 1,
            m,
            trial: 0,
            seed: 0,
            rel_l2_error: e,
            iterations: 1,
            runtime_ms: 0.5,
            status: "converged".into(),
        }
    }

    #[test]
    fn slope_of_power_law() {
        let rows: Vec<_> = [8usize, 16, 32, 64].iter().map(|&m| row("x", m, (m as f64).powi(-2))).collect();
        assert!((fit_slope(&rows, "x", 0..=1000).unwrap() + 2.0).abs() < 1e-12);
        let flat: Vec<_> = [8usize, 16, 32].iter().map(|&m| row("x", m, 0.3)).collect();
        assert!(fit_slope(&flat, "x", 0..=1000).unwrap().abs() < 1e-12);
        assert!(matches!(fit_slope(&rows, "x", 8..=16), Err(Error::InsufficientPoints(_))));
    }

    #[test]
    fn median_is_order_free() {
        assert_eq!(median([3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median([4.0, 1.0, f64::NAN, 2.0, 3.0]), Some(2.5));
        assert_eq!(median([f64::NAN]), None);
    }

    #[test]
    fn config_text() {
        let c = SweepConfig::from_text(
            "# demo\nmethods = gauss_bp, fourier_wbp\nwavelet = db2\nm_grid = 16,32\ntrials=3\nseed = 9\nmode = theory\n",
        )
        .unwrap();
        assert_eq!(c.methods.len(), 2);
        assert_eq!((c.p, c.trials, c.master_seed, c.m_grid.clone()), (2, 3, 9, vec![16, 32]));
        assert_eq!(c.mode, RecipeMode::Theory);
        assert!(SweepConfig::from_text("bogus = 1").is_err());
        let mut bad = SweepConfig::default();
        bad.m_grid = vec![32, 16];
        assert!(bad.validate().is_err());
        bad.m_grid = vec![8192];
        assert!(bad.validate().is_err());
    }

    #[test]
    fn seeds_do_not_collide_on_default_grid() {
        let c = SweepConfig::default();
        let mut seen = std::collections::HashSet::new();
        for meth in Method::ALL {
            for &m in &c.m_grid {
                for t in 0..c.trials {
                    assert!(seen.insert(trial_seed(c.master_seed, meth, m, t)));
                }
            }
        }
    }

    #[test]
    fn rows_round_trip() {
        let mut buf = Vec::new();
        write_header(&mut buf).unwrap();
        let rows = vec![row("gauss_bp", 8, 0.125), row("fourier_bp", 16, 1.0 / 3.0), row("x", 4, f64::NAN)];
        for r in &rows {
            write_row(&mut buf, r).unwrap();
        }
        let back = read_rows(&buf[..]).unwrap();
        assert_eq!(back[..2], rows[..2]);
        assert!(back[2].rel_l2_error.is_nan());
    }

    #[test]
    fn empty_grid_gives_header_only() {
        let cfg = SweepConfig {
            m_grid: vec![],
            ..SweepConfig::default()
        };
        let mut buf = Vec::new();
        let out = run_sweep(&cfg, Some(&mut buf)).unwrap();
        assert!(out.rows.is_empty());
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }
}
