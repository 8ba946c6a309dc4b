//! Regression fixtures for recipes and the SVG plot. Set UPDATE_GOLDEN=1 to rewrite.

use std::fmt::Write as _;
use std::path::PathBuf;

use wavecs::experiment::{render_svg, ResultRow};
use wavecs::fourier::estimate_smoothness_q;
use wavecs::recipes::{fourier_params, gauss_params_for, optimal_params_for, RecipeMode};
use wavecs::wavelet::WaveletSpec;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn check(name: &str, actual: &str) {
    let path = fixture(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} differs from its fixture");
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

#[test]
fn recipes_match_fixture() {
    let mut out = String::new();
    for p in [1usize, 2] {
        let q = if p == 1 { 0.0 } else { estimate_smoothness_q(&WaveletSpec::daubechies(p).unwrap()) };
        for m in [64usize, 256, 1024] {
            let g = gauss_params_for(m, 1.0, p, Some(4096)).unwrap();
            writeln!(out, "gauss p={p} m={m}: j0={} r={} N={}", g.j0, g.r, g.n).unwrap();
            let o = optimal_params_for(m, 1.0, p, Some(4096)).unwrap();
            writeln!(out, "optimal p={p} m={m}: r_bar={} N1={} N2={} m1={} m2={}", o.r_bar, o.n1, o.n2, o.m1, o.m2).unwrap();
            for (mode, dim) in [(RecipeMode::Experiment, Some(4096)), (RecipeMode::Theory, None)] {
                match fourier_params(m, 1.0, p, q, 1e-5, mode, dim) {
                    Ok(f) => writeln!(
                        out,
                        "fourier {mode:?} p={p} m={m}: r={} r_tilde={} r_bar={} m_k={} weight={:.6}",
                        f.r,
                        f.r_tilde,
                        f.r_bar,
                        join(&f.m_local),
                        f.level_weights[0]
                    )
                    .unwrap(),
                    Err(e) => writeln!(out, "fourier {mode:?} p={p} m={m}: {e}").unwrap(),
                }
            }
        }
    }
    check("recipes.txt", &out);
}

#[test]
fn experiment_recipe_by_hand() {
    // r = 12, r_tilde = round(log2 128) = 7, inner levels 2*floor(256/20) = 24
    let f = fourier_params(256, 1.0, 1, 0.0, 1e-5, RecipeMode::Experiment, Some(4096)).unwrap();
    assert_eq!(f.m_local, vec![2, 2, 4, 8, 16, 32, 64, 24, 24, 24, 24, 32]);
}

#[test]
fn plot_matches_fixture() {
    let mut rows = Vec::new();
    for (method, scale) in [("gauss_bp", 2.0), ("optimal_bp", 1.0), ("fourier_bp", 0.5)] {
        for (i, m) in [64usize, 128, 256, 512].into_iter().enumerate() {
            rows.push(ResultRow {
                method: method.into(),
                p: 1,
                k: 10,
                m,
                trial: 0,
                seed: i as u64,
                rel_l2_error: scale / m as f64,
                iterations: 100,
                runtime_ms: 1.0,
                status: "Converged".into(),
            });
        }
    }
    check("plot_golden.svg", &render_svg(&rows).unwrap());
}
