//! Parameter sets of the Gaussian, two-level and multilevel Fourier strategies.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::{LevelScheme, SchemeMode};
use crate::wavelet::coarsest_scale;

/// Default δ in L̄ = (ln m)^{6+δ}.
pub const DEFAULT_DELTA: f64 = 1e-5;

/// Theory: parameters exactly as in the recipes. Experiment: fixed dimension N,
/// saturation round(log₂(m/2)) and the budget split used for the figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RecipeMode {
    Theory,
    Experiment,
}

impl std::str::FromStr for RecipeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "theory" => Ok(Self::Theory),
            "experiment" => Ok(Self::Experiment),
            _ => Err(Error::Parse(format!("unknown mode '{s}' (expected theory or experiment)"))),
        }
    }
}

fn floor_log2(x: f64) -> i64 {
    x.log2().floor() as i64
}

fn ceil_alpha(alpha: f64) -> usize {
    (alpha.ceil() as usize).max(1)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Precondition(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// r = ⌊log₂ N⌋ − j0 for a given dimension.
fn levels_from_dim(dim: usize, j0: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Precondition(format!("dimension {dim} is not a power of two")));
    }
    let r = dim.trailing_zeros() as i64 - j0 as i64;
    if r < 1 {
        return Err(Error::BudgetTooSmall(format!("dimension {dim} leaves no wavelet scale above j0 = {j0}")));
    }
    Ok(r as usize)
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussRecipe {
    pub m: usize,
    pub alpha: f64,
    pub p: usize,
    pub j0: usize,
    pub r: usize,
    pub n: usize,
}

/// p = ⌈α⌉, r = ⌊log₂(m^{2α+1}/(ln m)^{2α+2})⌋ − j0, N = 2^{j0+r}.
pub fn gauss_params(m: usize, alpha: f64) -> Result<GaussRecipe> {
    check_alpha(alpha)?;
    let p = ceil_alpha(alpha);
    gauss_params_for(m, alpha, p, None)
}

/// As [`gauss_params`] with a given number of vanishing moments and, when
/// `dim` is set, r = ⌊log₂ N⌋ − j0.
pub fn gauss_params_for(m: usize, alpha: f64, p: usize, dim: Option<usize>) -> Result<GaussRecipe> {
    check_alpha(alpha)?;
    let j0 = coarsest_scale(p);
    let r = match dim {
        Some(d) => levels_from_dim(d, j0)?,
        None => {
            if m < 3 {
                return Err(Error::BudgetTooSmall(format!("m = {m} is too small")));
            }
            let mf = m as f64;
            let x = (2.0 * alpha + 1.0) * mf.log2() - (2.0 * alpha + 2.0) * mf.ln().log2();
            let r = x.floor() as i64 - j0 as i64;
            if r < 1 {
                return Err(Error::BudgetTooSmall(format!("m = {m} gives r = {r} < 1")));
            }
            r as usize
        }
    };
    Ok(GaussRecipe {
        m,
        alpha,
        p,
        j0,
        r,
        n: 1usize
            .checked_shl((j0 + r) as u32)
            .ok_or_else(|| Error::CapExceeded(format!("N = 2^{} overflows", j0 + r)))?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimalRecipe {
    pub m: usize,
    pub alpha: f64,
    pub p: usize,
    pub j0: usize,
    pub r: usize,
    pub r_bar: usize,
    pub n1: usize,
    pub n2: usize,
    pub m1: usize,
    pub m2: usize,
}

/// r = ⌊(2α+1) log₂ m⌋ − j0, r̄ = ⌊log₂(m/2)⌋ − j0, N1 = m1 = 2^{j0+r̄}, m2 = m − m1.
pub fn optimal_params(m: usize, alpha: f64) -> Result<OptimalRecipe> {
    check_alpha(alpha)?;
    optimal_params_for(m, alpha, ceil_alpha(alpha), None)
}

pub fn optimal_params_for(m: usize, alpha: f64, p: usize, dim: Option<usize>) -> Result<OptimalRecipe> {
    check_alpha(alpha)?;
    let j0 = coarsest_scale(p);
    if m < 1usize << (j0 + 2) {
        return Err(Error::Precondition(format!("optimal recipe needs m >= 2^(j0+2) = {}", 1usize << (j0 + 2))));
    }
    let r = match dim {
        Some(d) => levels_from_dim(d, j0)?,
        None => {
            let r = ((2.0 * alpha + 1.0) * (m as f64).log2()).floor() as i64 - j0 as i64;
            r.max(0) as usize
        }
    };
    let r_bar = (floor_log2(m as f64 / 2.0) - j0 as i64) as usize;
    if r_bar == 0 || r_bar >= r {
        return Err(Error::Precondition(format!("optimal recipe needs 0 < r_bar < r, got r_bar = {r_bar}, r = {r}")));
    }
    let n1 = 1usize << (j0 + r_bar);
    let n2 = 1usize
        .checked_shl((j0 + r) as u32)
        .ok_or_else(|| Error::CapExceeded(format!("N2 = 2^{} overflows", j0 + r)))?;
    Ok(OptimalRecipe {
        m,
        alpha,
        p,
        j0,
        r,
        r_bar,
        n1,
        n2,
        m1: n1,
        m2: m - n1,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FourierRecipe {
    pub m: usize,
    pub alpha: f64,
    pub p: usize,
    pub q: f64,
    pub delta: f64,
    pub j0: usize,
    pub r: usize,
    pub r_tilde: usize,
    /// ⌊log₂(m/L̄^{1/(2(q+1))})⌋ − j0; may be ≤ 0 for small m.
    pub r_bar: i64,
    pub l_bar: f64,
    pub m_local: Vec<usize>,
    /// Weight per sparsity level k = 1..r.
    pub level_weights: Vec<f64>,
    pub lambda: f64,
    /// log₂ M = j0 + r.
    pub log2_m: usize,
    pub mode: RecipeMode,
}

impl FourierRecipe {
    /// M = 2^{j0+r}, if it fits in memory-sized integers.
    pub fn dimension(&self) -> Option<usize> {
        1usize.checked_shl(self.log2_m as u32).filter(|_| self.log2_m < usize::BITS as usize)
    }

    /// Sampling levels N_k = 2^{j0+k}.
    pub fn sampling_levels(&self) -> Vec<usize> {
        (1..=self.r).map(|k| 1usize << (self.j0 + k)).collect()
    }

    pub fn scheme(&self) -> Result<LevelScheme> {
        if self.log2_m >= usize::BITS as usize - 1 {
            return Err(Error::CapExceeded(format!("M = 2^{} cannot be indexed", self.log2_m)));
        }
        let mode = match self.mode {
            RecipeMode::Theory => SchemeMode::Theory,
            RecipeMode::Experiment => SchemeMode::Experiment,
        };
        LevelScheme::new(self.sampling_levels(), self.m_local.clone(), self.r_tilde, mode)
    }

    /// Weights expanded over the M coordinates.
    pub fn weights(&self) -> Result<Vec<f64>> {
        let m = self
            .dimension()
            .filter(|&m| m <= 1 << 26)
            .ok_or_else(|| Error::CapExceeded(format!("M = 2^{} weights", self.log2_m)))?;
        let mut w = Vec::with_capacity(m);
        for k in 1..=self.r {
            let size = if k == 1 { 1usize << (self.j0 + 1) } else { 1usize << (self.j0 + k - 1) };
            w.extend(std::iter::repeat_n(self.level_weights[k - 1], size));
        }
        Ok(w)
    }

    pub fn budget(&self) -> usize {
        self.m_local.iter().sum()
    }
}

/// L̄ = (ln m)^{6+δ}.
pub fn l_bar(m: usize, delta: f64) -> f64 {
    (m as f64).ln().powf(6.0 + delta)
}

/// Multilevel Fourier recipe. `dim` (N = M) is required in experiment mode and
/// ignored in theory mode.
pub fn fourier_params(
    m: usize,
    alpha: f64,
    p: usize,
    q: f64,
    delta: f64,
    mode: RecipeMode,
    dim: Option<usize>,
) -> Result<FourierRecipe> {
    if !(alpha > 0.5) {
        return Err(Error::Precondition(format!("Fourier recipe needs alpha > 1/2, got {alpha}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("delta must lie in (0, 1), got {delta}")));
    }
    if m < 4 {
        return Err(Error::BudgetTooSmall(format!("m = {m} is too small")));
    }
    let j0 = coarsest_scale(p);
    let mf = m as f64;
    let lb = l_bar(m, delta);
    let r_bar = floor_log2(mf / lb.powf(1.0 / (2.0 * (q + 1.0)))) - j0 as i64;

    let (r, r_tilde, m_local) = match mode {
        RecipeMode::Theory => {
            let factor = (2.0 * alpha + 1.0).max(alpha / (alpha - 0.5));
            let r = (factor * mf.log2()).floor() as i64 - j0 as i64;
            let r_tilde = floor_log2(mf / 2.0) - j0 as i64;
            if r_tilde < 1 {
                return Err(Error::BudgetTooSmall(format!("m = {m} gives saturation level {r_tilde} < 1")));
            }
            if r <= r_tilde {
                return Err(Error::BudgetTooSmall(format!("m = {m} gives r = {r} <= r_tilde = {r_tilde}")));
            }
            let (r, r_tilde) = (r as usize, r_tilde as usize);
            let mut m_local = Vec::with_capacity(r);
            for k in 1..=r {
                if k <= r_tilde {
                    m_local.push(level_size(j0, k));
                } else {
                    let a = mf.powf(2.0 * q + 2.0) * 2f64.powf(-(2.0 * q + 1.0) * (k + j0 + 2) as f64);
                    let b = mf / (4.0 * (r - r_tilde) as f64);
                    m_local.push((0.25 * (a + b)).floor() as usize);
                }
            }
            (r, r_tilde, m_local)
        }
        RecipeMode::Experiment => {
            let dim = dim.ok_or_else(|| Error::Precondition("experiment mode needs a dimension N".into()))?;
            let r = levels_from_dim(dim, j0)?;
            if m > dim {
                return Err(Error::Precondition(format!("m = {m} exceeds N = {dim}")));
            }
            let r_tilde = ((mf / 2.0).log2().round() as i64 - j0 as i64).clamp(0, r as i64 - 1) as usize;
            let inner = 2 * (m / (4 * (r - r_tilde)));
            let mut m_local = Vec::with_capacity(r);
            for k in 1..r {
                m_local.push(if k <= r_tilde { level_size(j0, k) } else { inner });
            }
            let used: usize = m_local.iter().sum();
            if used > m {
                return Err(Error::BudgetTooSmall(format!("saturated levels need {used} > m = {m} samples")));
            }
            m_local.push(m - used);
            for (k, &mk) in m_local.iter().enumerate() {
                if mk > level_size(j0, k + 1) {
                    return Err(Error::BudgetTooSmall(format!(
                        "level {} would need {mk} samples from {} frequencies",
                        k + 1,
                        level_size(j0, k + 1)
                    )));
                }
            }
            (r, r_tilde, m_local)
        }
    };

    let low = lb.powf(1.0 / (2.0 * (q + 1.0)));
    let high = (lb.powf((2.0 * q + 1.0) / (2.0 * q + 2.0)) * r as f64).sqrt();
    let level_weights = (1..=r)
        .map(|k| {
            if (k as i64) <= r_bar {
                (mf / (2f64.powi(k as i32) * low)).sqrt()
            } else {
                high
            }
        })
        .collect();
    let recipe = FourierRecipe {
        m,
        alpha,
        p,
        q,
        delta,
        j0,
        r,
        r_tilde,
        r_bar,
        l_bar: lb,
        m_local,
        level_weights,
        lambda: 1.0 / ((r * m) as f64).sqrt(),
        log2_m: j0 + r,
        mode,
    };
    match mode {
        RecipeMode::Theory if recipe.budget() > m => Err(Error::BudgetTooSmall(format!(
            "local budgets sum to {} > m = {m}",
            recipe.budget()
        ))),
        RecipeMode::Experiment if recipe.budget() != m => Err(Error::BudgetTooSmall(format!(
            "local budgets sum to {} != m = {m}",
            recipe.budget()
        ))),
        _ => Ok(recipe),
    }
}

/// N_k − N_{k−1} with N_k = 2^{j0+k} and N_0 = 0.
pub fn level_size(j0: usize, k: usize) -> usize {
    if k == 1 {
        1 << (j0 + 1)
    } else {
        1 << (j0 + k - 1)
    }
}

/// Local sparsities s_k for the Fourier recipe.
#[derive(Debug, Clone, Serialize)]
pub struct SparsityPlan {
    pub s_local: Vec<usize>,
    pub s_star: usize,
    pub s_total: usize,
    /// √(s/s_k)/w^{(k)} per level.
    pub weight_ratios: Vec<f64>,
}

/// s_k = M_k − M_{k−1} for k ≤ r̄ and s_k = s_* = ⌊m/(L̄ r)⌋ beyond.
pub fn sparsity_plan(recipe: &FourierRecipe) -> Result<SparsityPlan> {
    let s_star = (recipe.m as f64 / (recipe.l_bar * recipe.r as f64)).floor() as usize;
    if s_star < 1 {
        return Err(Error::BudgetTooSmall(format!(
            "s_* = floor(m / (L_bar r)) = 0 for m = {} (L_bar = {:.3e}, r = {})",
            recipe.m, recipe.l_bar, recipe.r
        )));
    }
    let s_local: Vec<usize> = (1..=recipe.r)
        .map(|k| {
            let size = level_size(recipe.j0, k);
            if (k as i64) <= recipe.r_bar {
                size
            } else {
                s_star.min(size)
            }
        })
        .collect();
    let s_total: usize = s_local.iter().sum();
    let weight_ratios = s_local
        .iter()
        .zip(&recipe.level_weights)
        .map(|(&sk, &w)| (s_total as f64 / sk as f64).sqrt() / w)
        .collect();
    Ok(SparsityPlan {
        s_local,
        s_star,
        s_total,
        weight_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_example() {
        let g = gauss_params(1024, 1.0).unwrap();
        assert_eq!((g.p, g.j0), (1, 0));
        let x = 1024f64.powi(3) / 1024f64.ln().powi(4);
        assert_eq!(g.n, 1usize << (x.log2().floor() as u32));
        assert_eq!(g.n, 1 << 18);
        assert_eq!(gauss_params(1024, 2.5).unwrap().p, 3);
        assert!(gauss_params(2, 1.0).is_err());
    }

    #[test]
    fn gauss_monotone() {
        let mut prev = 0;
        for e in 4..16 {
            let n = gauss_params(1 << e, 1.0).map(|g| g.n).unwrap_or(0);
            // m^{2α+1} grows 2^{2α+1}-fold, the log factor only slows it down
            assert!(n >= prev && (prev == 0 || n <= 8 * prev), "m=2^{e}: {prev} -> {n}");
            prev = n;
        }
    }

    #[test]
    fn optimal_example() {
        let o = optimal_params(64, 1.0).unwrap();
        assert_eq!((o.r_bar, o.n1, o.m1, o.m2), (5, 32, 32, 32));
        assert!(o.r_bar < o.r);
        assert!(optimal_params(2, 1.0).is_err());
    }

    #[test]
    fn fourier_theory_example() {
        let f = fourier_params(64, 1.0, 1, 0.0, 0.5, RecipeMode::Theory, None).unwrap();
        assert_eq!(f.r_tilde, 5);
        assert!(f.budget() <= 64);
        for k in 1..=f.r_tilde {
            assert_eq!(f.m_local[k - 1], level_size(0, k));
        }
    }

    #[test]
    fn fourier_experiment_budget() {
        for p in [1, 2] {
            for e in 3..=12 {
                let m = 1usize << e;
                let f = fourier_params(m, 1.0, p, 0.0, DEFAULT_DELTA, RecipeMode::Experiment, Some(4096)).unwrap();
                assert_eq!(f.budget(), m, "p={p} m={m}");
                f.scheme().unwrap();
            }
        }
    }

    #[test]
    fn experiment_weights_constant_at_small_m() {
        let f = fourier_params(256, 1.0, 1, 0.0, DEFAULT_DELTA, RecipeMode::Experiment, Some(4096)).unwrap();
        assert!(f.level_weights.windows(2).all(|w| w[0] == w[1]));
        let f = fourier_params(1024, 1.0, 1, 0.0, DEFAULT_DELTA, RecipeMode::Experiment, Some(4096)).unwrap();
        assert!(f.level_weights[0] < f.level_weights[f.r - 1]);
    }

    #[test]
    fn sparsity_plan_needs_large_m() {
        let f = fourier_params(2048, 1.0, 1, 0.0, DEFAULT_DELTA, RecipeMode::Experiment, Some(4096)).unwrap();
        assert!(matches!(sparsity_plan(&f), Err(Error::BudgetTooSmall(_))));
    }
}
