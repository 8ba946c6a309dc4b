use proptest::prelude::*;

use wavecs::experiment::{make_fk, trial_seed};
use wavecs::fourier::dyadic_bands;
use wavecs::recipes::{fourier_params, optimal_params_for, Method, RecipeMode};
use wavecs::sampling::{draw_multilevel, draw_symmetric};
use wavecs::solvers::weighted_l1;
use wavecs::wavelet::{coarsest_scale, periodized_dwt, periodized_idwt, WaveletSpec};
use wavecs::Error;

fn q_for(p: usize) -> f64 {
    if p == 1 {
        0.0
    } else {
        wavecs::fourier::estimate_smoothness_q(&WaveletSpec::daubechies(p).unwrap())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dwt_is_orthogonal(p in 1usize..=4, extra in 0u32..=6, seed in any::<u64>()) {
        let spec = WaveletSpec::daubechies(p).unwrap();
        let len = 1usize << (coarsest_scale(p) as u32 + 1 + extra);
        let mut state = seed | 1;
        let x: Vec<f64> = (0..len)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let d = periodized_dwt(&x, &spec).unwrap();
        let back = periodized_idwt(&d, &spec).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let ex: f64 = x.iter().map(|v| v * v).sum();
        let ed: f64 = d.values.iter().map(|v| v * v).sum();
        prop_assert!((ex - ed).abs() <= 1e-12 * ex.max(1.0));
    }

    #[test]
    fn experiment_budget_is_exact_or_refused(p in 1usize..=4, m in 8usize..=4096) {
        match fourier_params(m, 1.0, p, q_for(p), 1e-5, RecipeMode::Experiment, Some(4096)) {
            Ok(r) => {
                prop_assert_eq!(r.m_local.iter().sum::<usize>(), m);
                let bounds = r.sampling_levels();
                for (k, &mk) in r.m_local.iter().enumerate() {
                    let size = bounds[k] - if k == 0 { 0 } else { bounds[k - 1] };
                    prop_assert!(mk <= size);
                }
            }
            // rounding r_tilde up can leave the saturated bands with more than m/2
            Err(e) => prop_assert!(matches!(e, Error::BudgetTooSmall(_)), "{}", e),
        }
    }

    #[test]
    fn theory_budget_never_exceeds_m(p in 1usize..=4, m in 8usize..=100_000) {
        if let Ok(r) = fourier_params(m, 1.0, p, q_for(p), 1e-5, RecipeMode::Theory, None) {
            prop_assert!(r.m_local.iter().sum::<usize>() <= m);
        }
    }

    #[test]
    fn optimal_budget_splits_m(p in 1usize..=4, m in 4usize..=4096) {
        if let Ok(r) = optimal_params_for(m, 1.0, p, Some(4096)) {
            prop_assert_eq!(r.m1 + r.m2, m);
            prop_assert!(r.n1 <= r.n2);
        }
    }

    #[test]
    fn symmetric_patterns_pair_frequencies(e in 4u32..=10, seed in any::<u64>()) {
        let m = 1usize << e;
        let r = fourier_params(m, 1.0, 1, 0.0, 1e-5, RecipeMode::Experiment, Some(4096)).unwrap();
        let scheme = r.scheme().unwrap();
        let pat = draw_symmetric(&scheme, seed).unwrap();
        prop_assert_eq!(pat.len(), m);
        for k in 1..=scheme.r() {
            prop_assert_eq!(pat.count_in_level(k), r.m_local[k - 1]);
            let mut f: Vec<i64> = pat.entries.iter().filter(|e| e.level == k).map(|e| e.frequency).collect();
            let mut mirrored: Vec<i64> = f.iter().map(|w| 1 - w).collect();
            f.sort_unstable();
            mirrored.sort_unstable();
            prop_assert_eq!(f, mirrored);
        }
        for e in &pat.entries {
            let lo = if e.level == 1 { 0 } else { scheme.levels[e.level - 2] };
            prop_assert!(e.natural > lo && e.natural <= scheme.levels[e.level - 1]);
        }
    }

    #[test]
    fn multilevel_patterns_are_reproducible(e in 4u32..=10, seed in any::<u64>()) {
        let r = fourier_params(1 << e, 1.0, 1, 0.0, 1e-5, RecipeMode::Experiment, Some(4096)).unwrap();
        let scheme = r.scheme().unwrap();
        let a = draw_multilevel(&scheme, seed);
        let b = draw_multilevel(&scheme, seed);
        prop_assert_eq!(a.entries, b.entries);
    }

    #[test]
    fn bands_partition_naturals(j0 in 0usize..=3, r in 1usize..=8) {
        let bands = dyadic_bands(j0, r).unwrap();
        let mut next = 1;
        for k in 1..=bands.r() {
            let range = bands.natural_range(k);
            prop_assert_eq!(*range.start(), next);
            next = range.end() + 1;
        }
        prop_assert_eq!(next - 1, 1usize << (j0 + r));
    }

    #[test]
    fn weighted_l1_is_homogeneous(x in prop::collection::vec(-10.0f64..10.0, 1..40), c in -5.0f64..5.0) {
        let w: Vec<f64> = (0..x.len()).map(|i| 1.0 + i as f64 / 7.0).collect();
        let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
        let lhs = weighted_l1(&scaled, &w, 1);
        let rhs = c.abs() * weighted_l1(&x, &w, 1);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn trial_seeds_differ(master in any::<u64>(), m in 1usize..5000, t in 0usize..50) {
        let a = trial_seed(master, Method::Gauss, m, t);
        prop_assert_ne!(a, trial_seed(master, Method::Gauss, m, t + 1));
        prop_assert_ne!(a, trial_seed(master, Method::Optimal, m, t));
        prop_assert_eq!(a, trial_seed(master, Method::Gauss, m, t));
    }

    #[test]
    fn fk_is_finite_on_the_unit_interval(k in 1usize..=20, x in 0.0f64..1.0) {
        let f = make_fk(k).unwrap().function;
        prop_assert!(f.eval(x).is_finite());
    }
}

#[test]
fn powers_of_two_always_have_an_experiment_recipe() {
    for p in 1..=4 {
        for e in 3..=12 {
            let m = 1usize << e;
            let r = fourier_params(m, 1.0, p, q_for(p), 1e-5, RecipeMode::Experiment, Some(4096)).unwrap();
            assert_eq!(r.m_local.iter().sum::<usize>(), m);
        }
    }
}

#[test]
fn odd_budgets_cannot_be_paired() {
    let r = fourier_params(129, 1.0, 1, 0.0, 1e-5, RecipeMode::Experiment, Some(4096)).unwrap();
    assert!(draw_symmetric(&r.scheme().unwrap(), 1).is_err());
    assert_eq!(draw_multilevel(&r.scheme().unwrap(), 1).len(), 129);
}
