//! Subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_complex::Complex64;

use wavecs::diagnostics::{
    gramian_sqrt, gripl_constant_bruteforce, rip_constant_bruteforce, LevelSparsity,
};
use wavecs::experiment::{emit_plot, run_cell, run_sweep, write_header, write_row, SweepConfig};
use wavecs::fourier::{balancing, cross_gramian, local_coherence};
use wavecs::recipes::{
    fourier_pattern, fourier_recipe, gauss_params_for, optimal_params_for, sparsity_plan, Method, RecipeMode,
    RunConfig, Target, DEFAULT_DIM,
};
use wavecs::sampling::{gaussian_matrix, DenseOperator};
use wavecs::solvers::{oracle_min_l1, weighted_basis_pursuit, weighted_sqrt_lasso, SolveOptions, SolveStatus};
use wavecs::wavelet::{coarsest_scale, WaveletSpec, DEFAULT_OVERSAMPLE};
use wavecs::{Error, Result};

use crate::matrix_io::{format_vector, read_matrix, read_vector};
use crate::{Cli, Command, Global, EXIT_NOT_CONVERGED};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Gauss,
    Optimal,
    Fourier,
}

#[derive(Args, Debug)]
pub struct RecipeArgs {
    #[arg(long, value_enum, default_value = "fourier")]
    pub strategy: Strategy,
}

#[derive(Args, Debug)]
pub struct PatternArgs {}

#[derive(Args, Debug)]
pub struct GramianArgs {
    /// Number of frequencies N.
    #[arg(long)]
    pub rows: usize,
    /// Number of wavelet coefficients M (defaults to N).
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_OVERSAMPLE)]
    pub oversample: usize,
}

#[derive(Args, Debug)]
pub struct CoherenceArgs {
    /// Number of levels r; U is 2^{j0+r} square.
    #[arg(long, default_value_t = 7)]
    pub levels: usize,
}

#[derive(Args, Debug)]
pub struct BalancingArgs {
    /// Frequencies N.
    #[arg(long)]
    pub rows: usize,
    /// Wavelet coefficients M ≤ N.
    #[arg(long)]
    pub cols: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderArg {
    Bp,
    Wbp,
    Wsrlasso,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Real matrix A as CSV.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Right-hand side y.
    #[arg(long)]
    pub rhs: PathBuf,
    #[arg(long, value_enum, default_value = "bp")]
    pub decoder: DecoderArg,
    /// Weights (default all ones).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// λ for the square-root LASSO (default 1/√(rows·cols)).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub bp_tol: Option<f64>,
    #[arg(long)]
    pub opt_tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// gauss_bp, optimal_bp, fourier_bp, fourier_wbp or fourier_wsrlasso.
    #[arg(long, default_value = "fourier_bp")]
    pub method: String,
    /// Number of terms K of the test function f_K.
    #[arg(long = "k", default_value_t = 10)]
    pub k: usize,
    /// Trial index used to derive the seed.
    #[arg(long, default_value_t = 0)]
    pub trial: usize,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// key = value configuration file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma separated methods.
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long = "k")]
    pub k: Option<usize>,
    /// Comma separated jump locations replacing those of f_K, or `equispaced`.
    #[arg(long)]
    pub override_breakpoints: Option<String>,
    /// Also write a log-log SVG of the medians.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnoseKind {
    Rip,
    Gripl,
    Coherence,
    Balancing,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    #[arg(long, value_enum)]
    pub kind: DiagnoseKind,
    /// Rows of the Gaussian matrix (rip) or frequencies N (gripl, coherence, balancing).
    #[arg(long, default_value_t = 12)]
    pub rows: usize,
    /// Columns (≤ 16 for rip and gripl).
    #[arg(long, default_value_t = 8)]
    pub cols: usize,
    /// Order s (rip) or comma separated s_k (gripl).
    #[arg(long, default_value = "2")]
    pub s: String,
    /// Comma separated level boundaries M_k (gripl; default dyadic).
    #[arg(long)]
    pub levels: Option<String>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub rhs: PathBuf,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Largest support size enumerated.
    #[arg(long, default_value_t = 4)]
    pub smax: usize,
}

fn spec(g: &Global) -> Result<WaveletSpec> {
    WaveletSpec::from_name(&g.wavelet)
}

fn mode(g: &Global) -> Result<RecipeMode> {
    g.mode.parse()
}

fn single_m(g: &Global) -> Result<usize> {
    match g.m.as_slice() {
        [m] => Ok(*m),
        [] => Err(Error::Precondition("--m is required".into())),
        _ => Err(Error::Precondition("this command takes a single --m".into())),
    }
}

fn run_config(g: &Global) -> Result<RunConfig> {
    Ok(RunConfig {
        mode: mode(g)?,
        dim: g.dim.unwrap_or(DEFAULT_DIM),
        delta: g.delta,
        solve: SolveOptions::default(),
    })
}

/// stdout, or the --out file.
fn output(g: &Global) -> Result<Box<dyn Write>> {
    Ok(match &g.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn converged_code(g: &Global, status: SolveStatus) -> u8 {
    if g.strict && status != SolveStatus::Converged {
        EXIT_NOT_CONVERGED
    } else {
        0
    }
}

pub fn dispatch(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Recipe(a) => recipe(g, a),
        Command::Pattern(_) => pattern(g),
        Command::Gramian(a) => gramian(g, a),
        Command::Coherence(a) => coherence(g, a),
        Command::Balancing(a) => balancing_cmd(g, a),
        Command::Solve(a) => solve(g, a),
        Command::Run(a) => run(g, a),
        Command::Sweep(a) => sweep(g, a),
        Command::Diagnose(a) => diagnose(g, a),
        Command::Oracle(a) => oracle(g, a),
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn recipe(g: &Global, a: &RecipeArgs) -> Result<u8> {
    let spec = spec(g)?;
    let m = single_m(g)?;
    let cfg = run_config(g)?;
    let dim = (cfg.mode == RecipeMode::Experiment).then_some(cfg.dim);
    let mut out = output(g)?;
    match a.strategy {
        Strategy::Gauss => {
            let r = gauss_params_for(m, g.alpha, spec.p, dim)?;
            writeln!(out, "strategy=gauss\nm={}\nalpha={}\np={}\nj0={}\nr={}\nN={}", r.m, r.alpha, r.p, r.j0, r.r, r.n)?;
        }
        Strategy::Optimal => {
            let r = optimal_params_for(m, g.alpha, spec.p, dim)?;
            writeln!(
                out,
                "strategy=optimal\nm={}\nalpha={}\np={}\nj0={}\nr={}\nr_bar={}\nN1={}\nN2={}\nm1={}\nm2={}",
                r.m, r.alpha, r.p, r.j0, r.r, r.r_bar, r.n1, r.n2, r.m1, r.m2
            )?;
        }
        Strategy::Fourier => {
            let target = Target::new(wavecs::experiment::make_fk(1)?.function, spec.clone());
            let r = fourier_recipe(&target, m, g.alpha, &cfg)?;
            eprintln!("q = {:.4} ({})", r.q, if spec.is_haar() { "Haar" } else { "fitted" });
            writeln!(
                out,
                "strategy=fourier\nmode={:?}\nm={}\nalpha={}\np={}\nq={}\ndelta={}\nj0={}\nr={}\nr_tilde={}\nr_bar={}\nL_bar={}\nlog2_M={}\nlambda={}\nm_k={}\nlevel_weights={}",
                r.mode,
                r.m,
                r.alpha,
                r.p,
                r.q,
                r.delta,
                r.j0,
                r.r,
                r.r_tilde,
                r.r_bar,
                r.l_bar,
                r.log2_m,
                r.lambda,
                join(&r.m_local),
                join(&r.level_weights)
            )?;
            match sparsity_plan(&r) {
                Ok(p) => writeln!(
                    out,
                    "s_k={}\ns_star={}\ns_total={}\nweight_ratios={}",
                    join(&p.s_local),
                    p.s_star,
                    p.s_total,
                    join(&p.weight_ratios)
                )?,
                Err(e) => writeln!(out, "sparsity_plan=unavailable ({e})")?,
            }
        }
    }
    Ok(0)
}

fn pattern(g: &Global) -> Result<u8> {
    let spec = spec(g)?;
    let m = single_m(g)?;
    let cfg = run_config(g)?;
    let target = Target::new(wavecs::experiment::make_fk(1)?.function, spec);
    let r = fourier_recipe(&target, m, g.alpha, &cfg)?;
    let p = fourier_pattern(&r, g.seed)?;
    eprintln!("{}", p.summary());
    p.write_csv(output(g)?)?;
    Ok(0)
}

fn gramian(g: &Global, a: &GramianArgs) -> Result<u8> {
    let spec = spec(g)?;
    let cols = a.cols.unwrap_or(a.rows);
    let u = cross_gramian(&spec, a.rows, cols, a.oversample)?;
    if let Some(p) = &g.out {
        u.write_binary(BufWriter::new(File::create(p)?))?;
        eprintln!("wrote {} x {} Gramian to {}", u.rows, u.cols, p.display());
    }
    write_coherences(&u, &mut std::io::stdout().lock())?;
    Ok(0)
}

fn coherence(g: &Global, a: &CoherenceArgs) -> Result<u8> {
    let spec = spec(g)?;
    let n = 1usize
        .checked_shl((coarsest_scale(spec.p) + a.levels) as u32)
        .filter(|&n| n <= 1 << 13)
        .ok_or_else(|| Error::CapExceeded("coherence tables are limited to 2^13 rows".into()))?;
    let u = cross_gramian(&spec, n, n, DEFAULT_OVERSAMPLE)?;
    write_coherences(&u, &mut output(g)?)?;
    Ok(0)
}

fn write_coherences(u: &wavecs::fourier::CrossGramian, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "k,l,mu")?;
    for k in 1..=u.sampling_levels.len() {
        for l in 1..=u.sparsity_levels.len() {
            writeln!(out, "{k},{l},{}", local_coherence(u, k, l)?)?;
        }
    }
    Ok(())
}

fn balancing_cmd(g: &Global, a: &BalancingArgs) -> Result<u8> {
    let spec = spec(g)?;
    let u = cross_gramian(&spec, a.rows, a.rows, DEFAULT_OVERSAMPLE)?;
    let b = balancing(&u, a.rows, a.cols)?;
    writeln!(
        output(g)?,
        "N={}\nM={}\ntheta={}\nmax_eigenvalue={}\ncondition={}",
        a.rows, a.cols, b.theta, b.max_eigenvalue, b.condition
    )?;
    Ok(0)
}

fn solve(g: &Global, a: &SolveArgs) -> Result<u8> {
    let m = read_matrix(&a.matrix)?;
    let y = read_vector(&a.rhs)?;
    let w = match &a.weights {
        Some(p) => read_vector(p)?,
        None => vec![1.0; m.ncols()],
    };
    let mut opts = SolveOptions::default();
    if let Some(v) = a.max_iters {
        opts.max_iters = v;
    }
    if let Some(v) = a.bp_tol {
        opts.bp_tol = v;
    }
    if let Some(v) = a.opt_tol {
        opts.opt_tol = v;
    }
    let (rows, cols) = m.shape();
    let op = DenseOperator::new(m);
    let (x, report) = match a.decoder {
        DecoderArg::Bp => weighted_basis_pursuit(&op, &y, &vec![1.0; cols], &opts)?,
        DecoderArg::Wbp => weighted_basis_pursuit(&op, &y, &w, &opts)?,
        DecoderArg::Wsrlasso => {
            let lambda = a.lambda.unwrap_or(1.0 / ((rows * cols) as f64).sqrt());
            weighted_sqrt_lasso(&op, &y, &w, lambda, &opts)?
        }
    };
    eprintln!(
        "status={} iterations={} objective={} residual={}",
        report.status, report.iterations, report.objective, report.primal_residual
    );
    output(g)?.write_all(format_vector(&x).as_bytes())?;
    Ok(converged_code(g, report.status))
}

fn sweep_config(g: &Global, a: &SweepArgs) -> Result<SweepConfig> {
    let mut c = SweepConfig::default();
    if let Some(p) = &a.config {
        c.apply_text(&std::fs::read_to_string(p)?)?;
    }
    let explicit = |name: &str| std::env::args().any(|s| s == format!("--{name}") || s.starts_with(&format!("--{name}=")));
    if explicit("wavelet") {
        c.p = spec(g)?.p;
    }
    if explicit("alpha") {
        c.alpha = g.alpha;
    }
    if explicit("delta") {
        c.delta = g.delta;
    }
    if explicit("seed") {
        c.master_seed = g.seed;
    }
    if explicit("mode") {
        c.mode = mode(g)?;
    }
    if let Some(t) = g.trials {
        c.trials = t;
    }
    if !g.m.is_empty() {
        c.m_grid = g.m.clone();
    }
    if let Some(d) = g.dim {
        c.dim = d;
    }
    if let Some(j) = g.jobs {
        c.jobs = j;
    }
    if let Some(o) = &g.out {
        c.output_path = Some(o.clone());
    }
    if let Some(m) = &a.methods {
        c.set("methods", m)?;
    }
    if let Some(k) = a.k {
        c.k = k;
    }
    if let Some(b) = &a.override_breakpoints {
        c.set("breakpoints", b)?;
    }
    Ok(c)
}

fn sweep(g: &Global, a: &SweepArgs) -> Result<u8> {
    let cfg = sweep_config(g, a)?;
    if cfg.breakpoints.is_some() {
        eprintln!("note: jump locations overridden; this is not the literal f_K");
    }
    let out = match &cfg.output_path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            let res = run_sweep(&cfg, Some(&mut w))?;
            w.flush()?;
            res
        }
        None => {
            let mut w = std::io::stdout();
            run_sweep(&cfg, Some(&mut w))?
        }
    };
    eprintln!("{}", out.summary);
    if let Some(p) = &a.plot {
        emit_plot(&out.rows, p)?;
    }
    let all_converged = out.rows.iter().all(|r| r.status == SolveStatus::Converged.to_string());
    Ok(if g.strict && !all_converged { EXIT_NOT_CONVERGED } else { 0 })
}

fn run(g: &Global, a: &RunArgs) -> Result<u8> {
    let method: Method = a.method.parse()?;
    let spec = spec(g)?;
    let m = single_m(g)?;
    let mut cfg = SweepConfig {
        methods: vec![method],
        p: spec.p,
        k: a.k,
        m_grid: vec![m],
        alpha: g.alpha,
        delta: g.delta,
        master_seed: g.seed,
        mode: mode(g)?,
        ..SweepConfig::default()
    };
    if let Some(d) = g.dim {
        cfg.dim = d;
    }
    cfg.validate()?;
    let test = cfg.test_function()?;
    let target = Target::new(test.function, spec);
    let row = run_cell(&target, &cfg, a.k, method, m, a.trial);
    let mut out = output(g)?;
    write_header(&mut out)?;
    write_row(&mut out, &row)?;
    if row.status.starts_with("error") {
        // rerun to surface the underlying error message
        wavecs::recipes::run_method(
            &target,
            method,
            m,
            g.alpha,
            row.seed,
            &cfg.run_config(),
        )?;
    }
    Ok(if g.strict && row.status != SolveStatus::Converged.to_string() { EXIT_NOT_CONVERGED } else { 0 })
}

fn parse_usizes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|v| v.trim().parse().map_err(|_| Error::Parse(format!("bad integer '{v}'"))))
        .collect()
}

fn diagnose(g: &Global, a: &DiagnoseArgs) -> Result<u8> {
    let mut out = output(g)?;
    match a.kind {
        DiagnoseKind::Rip => {
            let s: usize = a.s.trim().parse().map_err(|_| Error::Parse(format!("bad order '{}'", a.s)))?;
            let mat = gaussian_matrix(a.rows, a.cols, g.seed);
            let r = rip_constant_bruteforce(&mat, s)?;
            writeln!(out, "kind,rows,cols,order,constant,supports_checked")?;
            writeln!(out, "rip,{},{},{},{},{}", a.rows, a.cols, r.order, r.constant, r.supports_checked)?;
        }
        DiagnoseKind::Gripl => {
            let spec = spec(g)?;
            let levels = match &a.levels {
                Some(l) => parse_usizes(l)?,
                None => {
                    let mut v = vec![];
                    let mut b = 1usize << (coarsest_scale(spec.p) + 1);
                    while b < a.cols {
                        v.push(b);
                        b *= 2;
                    }
                    v.push(a.cols);
                    v
                }
            };
            let plan = LevelSparsity::new(levels, parse_usizes(&a.s)?)?;
            let rows_pow = a.rows.next_power_of_two().max(a.cols.next_power_of_two());
            let u = cross_gramian(&spec, rows_pow, a.cols.next_power_of_two(), DEFAULT_OVERSAMPLE)?;
            let mat = nalgebra::DMatrix::from_fn(a.rows, a.cols, |i, j| u.get(i, j));
            let gm = gramian_sqrt(&u, a.rows, a.cols)?;
            let r = gripl_constant_bruteforce(&mat, &gm, &plan)?;
            let r_id = gripl_constant_bruteforce(&mat, &nalgebra::DMatrix::<Complex64>::identity(a.cols, a.cols), &plan)?;
            writeln!(out, "kind,rows,cols,order,G,constant,supports_checked")?;
            writeln!(out, "gripl,{},{},{},gram_sqrt,{},{}", a.rows, a.cols, r.order, r.constant, r.supports_checked)?;
            writeln!(out, "gripl,{},{},{},identity,{},{}", a.rows, a.cols, r_id.order, r_id.constant, r_id.supports_checked)?;
        }
        DiagnoseKind::Coherence => {
            let n = a.rows.next_power_of_two();
            if n > 1 << 13 {
                return Err(Error::CapExceeded("coherence tables are limited to 2^13 rows".into()));
            }
            write_coherences(&cross_gramian(&spec(g)?, n, n, DEFAULT_OVERSAMPLE)?, &mut out)?;
        }
        DiagnoseKind::Balancing => {
            let spec = spec(g)?;
            let u = cross_gramian(&spec, a.rows, a.rows, DEFAULT_OVERSAMPLE)?;
            let b = balancing(&u, a.rows, a.cols)?;
            writeln!(out, "kind,rows,cols,theta,max_eigenvalue,condition")?;
            writeln!(out, "balancing,{},{},{},{},{}", a.rows, a.cols, b.theta, b.max_eigenvalue, b.condition)?;
        }
    }
    Ok(0)
}

fn oracle(g: &Global, a: &OracleArgs) -> Result<u8> {
    let m = read_matrix(&a.matrix)?;
    let y = read_vector(&a.rhs)?;
    let w = match &a.weights {
        Some(p) => read_vector(p)?,
        None => vec![1.0; m.ncols()],
    };
    let x = oracle_min_l1(&m, &y, &w, a.smax.min(m.ncols()))?;
    output(g)?.write_all(format_vector(&x).as_bytes())?;
    Ok(0)
}
