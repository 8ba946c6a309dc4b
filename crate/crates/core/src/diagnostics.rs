//! Sparsity-in-levels measures, exhaustive restricted-isometry constants on
//! tiny instances and a seeded success-rate harness.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::trial_seed;
use crate::fourier::{gram_matrix, CrossGramian};
use crate::recipes::{run_method, Method, RunConfig, Target};
use crate::sampling::{gaussian_operator, LinearOperator};
use crate::solvers::{basis_pursuit, SolveOptions};

/// Largest column count accepted by [`rip_constant_bruteforce`].
pub const RIP_MAX_COLS: usize = 16;
pub const RIP_MAX_ORDER: usize = 4;
/// Largest number of level-feasible supports enumerated by the G-adjusted constant.
pub const GRIPL_MAX_SUPPORTS: usize = 1_000_000;

/// Level boundaries M_1 < … < M_r and local sparsities s_k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSparsity {
    pub levels: Vec<usize>,
    pub s_local: Vec<usize>,
}

impl LevelSparsity {
    pub fn new(levels: Vec<usize>, s_local: Vec<usize>) -> Result<Self> {
        if levels.is_empty() || levels.len() != s_local.len() {
            return Err(Error::Shape("one local sparsity per level required".into()));
        }
        if levels[0] == 0 || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition("level boundaries must be positive and increasing".into()));
        }
        let plan = Self { levels, s_local };
        for k in 0..plan.levels.len() {
            let s = plan.s_local[k];
            if s == 0 || s > plan.size(k) {
                return Err(Error::Precondition(format!(
                    "s_{} = {s} must lie in 1..={}",
                    k + 1,
                    plan.size(k)
                )));
            }
        }
        Ok(plan)
    }

    /// One level of size `n` with sparsity `s`.
    pub fn single(n: usize, s: usize) -> Result<Self> {
        Self::new(vec![n], vec![s])
    }

    pub fn dimension(&self) -> usize {
        *self.levels.last().unwrap()
    }

    pub fn range(&self, k: usize) -> std::ops::Range<usize> {
        let lo = if k == 0 { 0 } else { self.levels[k - 1] };
        lo..self.levels[k]
    }

    pub fn size(&self, k: usize) -> usize {
        self.range(k).len()
    }

    pub fn total(&self) -> usize {
        self.s_local.iter().sum()
    }
}

/// min ‖x − z‖_{1,w} over (s, M)-sparse z: per level keep the s_k entries with
/// the largest w_i|x_i| (ties keep the smaller index) and sum the rest.
pub fn sigma_sm_weighted(x: &[f64], plan: &LevelSparsity, w: &[f64]) -> Result<f64> {
    if x.len() != plan.dimension() || w.len() != x.len() {
        return Err(Error::Shape(format!(
            "x has {} entries, w {}, plan covers {}",
            x.len(),
            w.len(),
            plan.dimension()
        )));
    }
    if w.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Precondition("weights must be positive".into()));
    }
    let mut total = 0.0;
    for k in 0..plan.levels.len() {
        let mut idx: Vec<usize> = plan.range(k).collect();
        idx.sort_by(|&a, &b| (w[b] * x[b].abs()).total_cmp(&(w[a] * x[a].abs())).then(a.cmp(&b)));
        total += idx[plan.s_local[k]..].iter().map(|&i| w[i] * x[i].abs()).sum::<f64>();
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize)]
pub struct RipReport {
    /// `s=2` or `(s,M)=(1,2;4,8)`.
    pub order: String,
    pub constant: f64,
    pub supports_checked: usize,
}

/// All k-subsets of 0..n in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let Some(i) = (0..k).rev().find(|&i| c[i] != i + n - k) else {
            return out;
        };
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn hermitian_deviation(h: DMatrix<Complex64>) -> f64 {
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|l| (l - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Support columns sorted by content, so that permuting the columns of A
/// yields bit-identical submatrices.
fn canonical_order(a: &DMatrix<Complex64>, sup: &[usize]) -> Vec<usize> {
    let mut v = sup.to_vec();
    v.sort_by(|&i, &j| {
        a.column(i)
            .iter()
            .zip(a.column(j).iter())
            .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    v
}

fn sub_gram(a: &DMatrix<Complex64>, s: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(s.len(), s.len(), |i, j| {
        a.column(s[i]).iter().zip(a.column(s[j]).iter()).map(|(x, y)| x.conj() * y).sum()
    })
}

/// δ_s = max over s-subsets S of ‖A_S* A_S − I‖, by enumeration.
pub fn rip_constant_bruteforce(a: &DMatrix<f64>, s: usize) -> Result<RipReport> {
    rip_constant_bruteforce_complex(&a.map(|v| Complex64::new(v, 0.0)), s)
}

pub fn rip_constant_bruteforce_complex(a: &DMatrix<Complex64>, s: usize) -> Result<RipReport> {
    if a.ncols() > RIP_MAX_COLS || s > RIP_MAX_ORDER {
        return Err(Error::CapExceeded(format!(
            "exhaustive RIP needs at most {RIP_MAX_COLS} columns and s <= {RIP_MAX_ORDER} (got {} columns, s = {s})",
            a.ncols()
        )));
    }
    if s == 0 || s > a.ncols() {
        return Err(Error::Precondition(format!("s = {s} must lie in 1..={}", a.ncols())));
    }
    let supports = combinations(a.ncols(), s);
    let constant = supports
        .par_iter()
        .map(|sup| hermitian_deviation(sub_gram(a, &canonical_order(a, sup))))
        .reduce(|| 0.0, f64::max);
    Ok(RipReport {
        order: format!("s={s}"),
        constant,
        supports_checked: supports.len(),
    })
}

fn plan_order(plan: &LevelSparsity) -> String {
    let s: Vec<String> = plan.s_local.iter().map(|v| v.to_string()).collect();
    let m: Vec<String> = plan.levels.iter().map(|v| v.to_string()).collect();
    format!("(s,M)=({};{})", s.join(","), m.join(","))
}

/// Supports with exactly s_k entries in level k. Smaller supports give
/// principal submatrices, whose eigenvalues interlace, so these suffice.
fn level_supports(plan: &LevelSparsity) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for k in 0..plan.levels.len() {
        let lo = plan.range(k).start;
        let combos = combinations(plan.size(k), plan.s_local[k]);
        out = out
            .iter()
            .flat_map(|prefix| {
                combos.iter().map(move |c| {
                    let mut v = prefix.clone();
                    v.extend(c.iter().map(|i| i + lo));
                    v
                })
            })
            .collect();
    }
    out
}

/// Smallest δ with (1−δ)‖Gx‖² ≤ ‖Ax‖² ≤ (1+δ)‖Gx‖² for all (s, M)-sparse x:
/// per support, the extreme eigenvalues of L⁻¹ A_S*A_S L⁻* with L the
/// Cholesky factor of (G*G)_{SS}.
pub fn gripl_constant_bruteforce(
    a: &DMatrix<Complex64>,
    g: &DMatrix<Complex64>,
    plan: &LevelSparsity,
) -> Result<RipReport> {
    let n = plan.dimension();
    if n > RIP_MAX_COLS {
        return Err(Error::CapExceeded(format!("total dimension {n} exceeds {RIP_MAX_COLS}")));
    }
    if a.ncols() != n || g.nrows() != g.ncols() || g.ncols() != n {
        return Err(Error::Shape(format!(
            "A is {}x{}, G is {}x{}, plan covers {n}",
            a.nrows(),
            a.ncols(),
            g.nrows(),
            g.ncols()
        )));
    }
    let count: f64 = (0..plan.levels.len()).map(|k| binomial(plan.size(k), plan.s_local[k])).product();
    if count > GRIPL_MAX_SUPPORTS as f64 {
        return Err(Error::CapExceeded(format!("{count} supports exceed {GRIPL_MAX_SUPPORTS}")));
    }
    let gg = g.adjoint() * g;
    let supports = level_supports(plan);
    let deviations: Vec<Option<f64>> = supports
        .par_iter()
        .map(|sup| {
            let b = DMatrix::from_fn(sup.len(), sup.len(), |i, j| gg[(sup[i], sup[j])]);
            let l = b.cholesky()?.l();
            let li = l.try_inverse()?;
            let c = &li * sub_gram(a, sup) * li.adjoint();
            Some(hermitian_deviation((&c + c.adjoint()) * Complex64::new(0.5, 0.0)))
        })
        .collect();
    if deviations.iter().any(Option::is_none) {
        return Err(Error::Precondition("G is singular on some support".into()));
    }
    Ok(RipReport {
        order: plan_order(plan),
        constant: deviations.into_iter().flatten().fold(0.0, f64::max),
        supports_checked: supports.len(),
    })
}

/// Hermitian square root of P_M U* P_N U P_M, the natural G for a truncated Gramian.
pub fn gramian_sqrt(u: &CrossGramian, n: usize, m: usize) -> Result<DMatrix<Complex64>> {
    let eig = gram_matrix(u, n, m)?.symmetric_eigen();
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        m,
        eig.eigenvalues.iter().map(|&l| Complex64::new(l.max(0.0).sqrt(), 0.0)),
    ));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// What a success-rate trial reconstructs.
pub enum SuccessModel<'a> {
    /// Random s-sparse vectors of length n with Gaussian entries.
    Sparse { n: usize, s: usize },
    /// A function through one of the pipelines.
    Function { target: &'a Target, alpha: f64, cfg: RunConfig },
}

/// ‖x̂ − x‖/‖x‖ of Gaussian basis pursuit on a random s-sparse x.
pub fn sparse_trial(m: usize, n: usize, s: usize, seed: u64, opts: &SolveOptions) -> Result<f64> {
    if s == 0 || s > n {
        return Err(Error::Precondition(format!("s = {s} must lie in 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut x = vec![0.0; n];
    for i in sample(&mut rng, n, s) {
        x[i] = StandardNormal.sample(&mut rng);
    }
    let a = gaussian_operator(m, n, seed)?;
    let y = a.apply(&x);
    let (xh, _) = basis_pursuit(&a, &y, opts)?;
    let num: f64 = xh.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = x.iter().map(|v| v * v).sum();
    Ok((num / den).sqrt())
}

/// Fraction of seeded trials whose relative error is at most `threshold`.
/// Failed runs count as error ∞.
pub fn success_rate(
    method: Method,
    model: &SuccessModel<'_>,
    m: usize,
    trials: usize,
    threshold: f64,
    master_seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let outcomes: Vec<Result<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(master_seed, method, m, t);
            match model {
                SuccessModel::Sparse { n, s } => match method {
                    Method::Gauss => sparse_trial(m, *n, *s, seed, &SolveOptions::default()),
                    _ => Err(Error::Unsupported("sparse model trials use the Gaussian encoder".into())),
                },
                SuccessModel::Function { target, alpha, cfg } => {
                    run_method(target, method, m, *alpha, seed, cfg).map(|o| o.rel_error)
                }
            }
        })
        .collect();
    let mut errors = Vec::with_capacity(trials);
    for o in outcomes {
        match o {
            Ok(e) => errors.push(e),
            Err(e @ Error::Unsupported(_)) => return Err(e),
            Err(_) => errors.push(f64::INFINITY),
        }
    }
    Ok(errors.iter().filter(|&&e| e <= threshold).count() as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::cross_gramian;
    use crate::sampling::gaussian_matrix;
    use crate::wavelet::WaveletSpec;

    #[test]
    fn sigma_examples() {
        let plan = LevelSparsity::single(3, 1).unwrap();
        assert_eq!(sigma_sm_weighted(&[3.0, 1.0, 2.0], &plan, &[1.0; 3]).unwrap(), 3.0);
        let full = LevelSparsity::new(vec![2, 5], vec![2, 3]).unwrap();
        assert_eq!(sigma_sm_weighted(&[1.0, -2.0, 3.0, 0.5, 9.0], &full, &[1.0; 5]).unwrap(), 0.0);
        assert!(sigma_sm_weighted(&[1.0], &plan, &[1.0]).is_err());
        assert!(LevelSparsity::new(vec![2, 4], vec![3, 1]).is_err());
    }

    #[test]
    fn sigma_matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let x: Vec<f64> = (0..12).map(|_| StandardNormal.sample(&mut rng)).collect();
            let w: Vec<f64> = (0..12).map(|i| 0.5 + (i % 4) as f64 * 0.3).collect();
            let plan = LevelSparsity::new(vec![3, 7, 12], vec![1, 2, 3]).unwrap();
            let fast = sigma_sm_weighted(&x, &plan, &w).unwrap();
            let mut best = f64::INFINITY;
            for mask in 0u32..1 << 12 {
                let ok = (0..3).all(|k| plan.range(k).filter(|&i| mask >> i & 1 == 1).count() <= plan.s_local[k]);
                if ok {
                    let v: f64 = (0..12).filter(|&i| mask >> i & 1 == 0).map(|i| w[i] * x[i].abs()).sum();
                    best = best.min(v);
                }
            }
            assert!((fast - best).abs() < 1e-12);
        }
    }

    #[test]
    fn rip_examples() {
        let q = DMatrix::<f64>::identity(8, 8);
        assert!(rip_constant_bruteforce(&q, 3).unwrap().constant < 1e-14);
        let mut a = gaussian_matrix(6, 5, 1);
        let c0 = a.column(0).clone_owned();
        a.set_column(1, &c0);
        let n0 = c0.norm();
        a.set_column(0, &(c0.clone() / n0));
        a.set_column(1, &(c0 / n0));
        let r = rip_constant_bruteforce(&a, 2).unwrap();
        assert!(r.constant >= 1.0 - 1e-12);
        assert_eq!(r.supports_checked, 10);
        assert!(rip_constant_bruteforce(&DMatrix::zeros(4, 17), 2).is_err());
        assert!(rip_constant_bruteforce(&DMatrix::zeros(4, 8), 5).is_err());
    }

    #[test]
    fn rip_is_permutation_invariant() {
        let a = gaussian_matrix(10, 9, 2);
        let perm = [4, 0, 8, 2, 6, 1, 7, 3, 5];
        let b = DMatrix::from_fn(10, 9, |i, j| a[(i, perm[j])]);
        assert_eq!(
            rip_constant_bruteforce(&a, 3).unwrap().constant,
            rip_constant_bruteforce(&b, 3).unwrap().constant
        );
    }

    #[test]
    fn gripl_identities() {
        let a = gaussian_matrix(8, 6, 3).map(|v| Complex64::new(v, 0.0));
        let plan = LevelSparsity::new(vec![2, 6], vec![1, 2]).unwrap();
        // A = G
        let sq = DMatrix::from_fn(6, 6, |i, j| a[(i, j)]);
        assert!(gripl_constant_bruteforce(&sq, &sq, &plan).unwrap().constant < 1e-10);
        // G = I is the restricted isometry constant in levels
        let id = DMatrix::<Complex64>::identity(6, 6);
        let r = gripl_constant_bruteforce(&a, &id, &plan).unwrap();
        let mut direct: f64 = 0.0;
        for i in 0..2 {
            for j in 2..6 {
                for k in j + 1..6 {
                    direct = direct.max(hermitian_deviation(sub_gram(&a, &[i, j, k])));
                }
            }
        }
        assert!((r.constant - direct).abs() < 1e-12);
        assert_eq!(r.supports_checked, 12);
    }

    #[test]
    fn gripl_on_haar_gramian() {
        let spec = WaveletSpec::haar();
        let u = cross_gramian(&spec, 16, 8, 16).unwrap();
        let a = DMatrix::from_fn(12, 8, |i, j| u.get(i, j));
        let full = LevelSparsity::new(vec![2, 4, 8], vec![2, 2, 4]).unwrap();
        let g = gramian_sqrt(&u, 12, 8).unwrap();
        assert!(gripl_constant_bruteforce(&a, &g, &full).unwrap().constant < 1e-9);
        // with G = I the full-support constant is the spread of the Gram spectrum
        let b = crate::fourier::balancing(&u, 12, 8).unwrap();
        let r = gripl_constant_bruteforce(&a, &DMatrix::identity(8, 8), &full).unwrap();
        assert!((r.constant - (1.0 - b.theta).max(b.max_eigenvalue - 1.0)).abs() < 1e-10);
        assert!(r.constant < 0.5);
    }

    #[test]
    fn success_rates() {
        let sparse = SuccessModel::Sparse { n: 256, s: 5 };
        assert_eq!(success_rate(Method::Gauss, &sparse, 10, 3, f64::INFINITY, 0).unwrap(), 1.0);
        let m = (4.0 * 5.0 * (256.0f64 / 5.0).ln() + 30.0) as usize;
        assert!(success_rate(Method::Gauss, &sparse, m, 20, 1e-4, 1).unwrap() >= 0.9);
        assert!(success_rate(Method::Optimal, &sparse, m, 2, 1e-4, 1).is_err());
    }
}
