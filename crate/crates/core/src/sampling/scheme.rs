//! Multilevel random subsampling patterns with saturation.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::frequency_of;

/// Whether unsaturated levels may be sampled at their full size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SchemeMode {
    /// m_k < N_k − N_{k−1} strictly above the saturation level.
    Theory,
    /// m_k ≤ N_k − N_{k−1}; levels hitting equality are enumerated.
    Experiment,
}

/// Level boundaries N_1 < … < N_r, local budgets m_k and saturation level r̃.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelScheme {
    pub levels: Vec<usize>,
    pub m_local: Vec<usize>,
    pub saturation: usize,
    pub mode: SchemeMode,
}

impl LevelScheme {
    pub fn new(levels: Vec<usize>, m_local: Vec<usize>, saturation: usize, mode: SchemeMode) -> Result<Self> {
        if levels.is_empty() || levels.len() != m_local.len() {
            return Err(Error::Shape(format!(
                "{} levels but {} local budgets",
                levels.len(),
                m_local.len()
            )));
        }
        if levels[0] == 0 || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition("level bounds must be positive and strictly increasing".into()));
        }
        if saturation > levels.len() {
            return Err(Error::Precondition(format!(
                "saturation {saturation} exceeds the number of levels {}",
                levels.len()
            )));
        }
        let scheme = Self { levels, m_local, saturation, mode };
        for k in 1..=scheme.r() {
            let size = scheme.level_size(k);
            let mk = scheme.m_local[k - 1];
            if k <= saturation && mk != size {
                return Err(Error::Precondition(format!(
                    "saturated level {k} must take all {size} samples, got {mk}"
                )));
            }
            if mk > size {
                return Err(Error::Precondition(format!("level {k} has {mk} samples but only {size} indices")));
            }
            if k > saturation && mode == SchemeMode::Theory && mk == size {
                return Err(Error::Precondition(format!(
                    "level {k} above saturation must satisfy m_k < {size} in theory mode"
                )));
            }
        }
        Ok(scheme)
    }

    pub fn r(&self) -> usize {
        self.levels.len()
    }

    /// N_{k−1} (0 for k = 1).
    pub fn lower(&self, k: usize) -> usize {
        if k == 1 {
            0
        } else {
            self.levels[k - 2]
        }
    }

    pub fn level_size(&self, k: usize) -> usize {
        self.levels[k - 1] - self.lower(k)
    }

    pub fn total(&self) -> usize {
        self.m_local.iter().sum()
    }

    /// Whether level k is enumerated in full.
    pub fn is_full(&self, k: usize) -> bool {
        k <= self.saturation || self.m_local[k - 1] == self.level_size(k)
    }

    /// Levels above r̃ that are nevertheless full (experiment mode only).
    pub fn full_above_saturation(&self) -> Vec<usize> {
        (self.saturation + 1..=self.r()).filter(|&k| self.is_full(k)).collect()
    }
}

/// One sampled row: level (1-based), natural index (1-based) and signed frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PatternEntry {
    pub level: usize,
    pub natural: usize,
    pub frequency: i64,
}

/// A multiset Ω of natural indices, sorted by level then index.
#[derive(Debug, Clone, Serialize)]
pub struct SamplingPattern {
    pub entries: Vec<PatternEntry>,
    pub scheme: LevelScheme,
    pub seed: u64,
}

impl SamplingPattern {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn frequencies(&self) -> Vec<i64> {
        self.entries.iter().map(|e| e.frequency).collect()
    }

    pub fn naturals(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.natural).collect()
    }

    pub fn count_in_level(&self, k: usize) -> usize {
        self.entries.iter().filter(|e| e.level == k).count()
    }

    /// D_{ii} for each sampled row.
    pub fn row_scaling(&self) -> Vec<f64> {
        let w = level_weights(&self.scheme);
        self.entries.iter().map(|e| w[e.level - 1]).collect()
    }

    /// CSV with columns level, signed_frequency, natural_index, multiplicity.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "level,signed_frequency,natural_index,multiplicity")?;
        let mut counts: BTreeMap<PatternEntry, usize> = BTreeMap::new();
        for e in &self.entries {
            *counts.entry(*e).or_default() += 1;
        }
        for (e, c) in counts {
            writeln!(w, "{},{},{},{}", e.level, e.frequency, e.natural, c)?;
        }
        Ok(())
    }

    /// `m = <total> m_k = a,b,c`.
    pub fn summary(&self) -> String {
        let per: Vec<String> = (1..=self.scheme.r()).map(|k| self.count_in_level(k).to_string()).collect();
        format!("m = {} m_k = {}", self.len(), per.join(","))
    }
}

fn entry(level: usize, natural: usize) -> PatternEntry {
    PatternEntry {
        level,
        natural,
        frequency: frequency_of(natural),
    }
}

/// Generator for level `k` under `seed`: one ChaCha8 stream per level.
pub fn level_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// Draws Ω: full levels enumerated, the others sampled uniformly with replacement.
pub fn draw_multilevel(scheme: &LevelScheme, seed: u64) -> SamplingPattern {
    let mut entries = Vec::with_capacity(scheme.total());
    for k in 1..=scheme.r() {
        let lo = scheme.lower(k);
        let hi = scheme.levels[k - 1];
        if scheme.is_full(k) {
            entries.extend((lo + 1..=hi).map(|i| entry(k, i)));
        } else {
            let mut rng = level_rng(seed, k);
            let mut level: Vec<PatternEntry> =
                (0..scheme.m_local[k - 1]).map(|_| entry(k, rng.gen_range(lo + 1..=hi))).collect();
            level.sort_unstable();
            entries.extend(level);
        }
    }
    SamplingPattern {
        entries,
        scheme: scheme.clone(),
        seed,
    }
}

/// Scheme on the positive half of each band: N_k/2 and m_k/2.
pub fn half_scheme(scheme: &LevelScheme) -> Result<LevelScheme> {
    for k in 1..=scheme.r() {
        if !scheme.is_full(k) && !scheme.m_local[k - 1].is_multiple_of(2) {
            return Err(Error::Precondition(format!(
                "symmetric sampling needs even m_k, level {k} has {}",
                scheme.m_local[k - 1]
            )));
        }
    }
    if !scheme.levels[0].is_multiple_of(2) {
        return Err(Error::Precondition("symmetric sampling needs even level bounds".into()));
    }
    LevelScheme::new(
        scheme.levels.iter().map(|n| n / 2).collect(),
        scheme.m_local.iter().map(|m| m / 2).collect(),
        scheme.saturation,
        scheme.mode,
    )
}

/// Draws m_k/2 positive frequencies t per unsaturated level (as
/// [`draw_multilevel`] on the half scheme) and adds each partner −t+1.
pub fn draw_symmetric(scheme: &LevelScheme, seed: u64) -> Result<SamplingPattern> {
    let half = draw_multilevel(&half_scheme(scheme)?, seed);
    let mut entries = Vec::with_capacity(scheme.total());
    for k in 1..=scheme.r() {
        if scheme.is_full(k) {
            entries.extend((scheme.lower(k) + 1..=scheme.levels[k - 1]).map(|i| entry(k, i)));
        } else {
            let mut level: Vec<PatternEntry> = half
                .entries
                .iter()
                .filter(|e| e.level == k)
                .flat_map(|e| [entry(k, 2 * e.natural), entry(k, 2 * e.natural - 1)])
                .collect();
            level.sort_unstable();
            entries.extend(level);
        }
    }
    Ok(SamplingPattern {
        entries,
        scheme: scheme.clone(),
        seed,
    })
}

/// √((N_k − N_{k−1})/m_k) per level, 0 when m_k = 0.
pub fn level_weights(scheme: &LevelScheme) -> Vec<f64> {
    (1..=scheme.r())
        .map(|k| {
            let mk = scheme.m_local[k - 1];
            if mk == 0 {
                0.0
            } else {
                (scheme.level_size(k) as f64 / mk as f64).sqrt()
            }
        })
        .collect()
}

/// Diagonal of D over natural indices 1..=N_r.
pub fn scaling_weights(scheme: &LevelScheme) -> Vec<f64> {
    let w = level_weights(scheme);
    let mut out = Vec::with_capacity(*scheme.levels.last().unwrap());
    for k in 1..=scheme.r() {
        out.extend(std::iter::repeat_n(w[k - 1], scheme.level_size(k)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scheme() -> LevelScheme {
        LevelScheme::new(vec![2, 4, 8, 16, 32], vec![2, 2, 2, 6, 0], 2, SchemeMode::Theory).unwrap()
    }

    #[test]
    fn validation() {
        assert!(LevelScheme::new(vec![2, 4], vec![2, 2], 1, SchemeMode::Theory).is_err());
        assert!(LevelScheme::new(vec![2, 4], vec![2, 2], 1, SchemeMode::Experiment).is_ok());
        assert!(LevelScheme::new(vec![2, 4], vec![1, 1], 1, SchemeMode::Experiment).is_err());
        assert!(LevelScheme::new(vec![2, 4], vec![2, 3], 1, SchemeMode::Experiment).is_err());
        assert!(LevelScheme::new(vec![4, 2], vec![2, 1], 0, SchemeMode::Experiment).is_err());
    }

    #[test]
    fn full_saturation_enumerates() {
        let s = LevelScheme::new(vec![2, 4, 8], vec![2, 2, 4], 3, SchemeMode::Theory).unwrap();
        let p = draw_multilevel(&s, 7);
        assert_eq!(p.naturals(), (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn counts_and_ranges() {
        let s = scheme();
        let p = draw_multilevel(&s, 3);
        for k in 1..=s.r() {
            assert_eq!(p.count_in_level(k), s.m_local[k - 1]);
        }
        assert!(p.entries.iter().all(|e| e.natural > s.lower(e.level) && e.natural <= s.levels[e.level - 1]));
        assert!(p.naturals().iter().all(|&i| i <= 16));
        assert_eq!(p.entries, draw_multilevel(&s, 3).entries);
    }

    #[test]
    fn symmetric_pairs() {
        let s = scheme();
        let p = draw_symmetric(&s, 11).unwrap();
        let half = draw_multilevel(&half_scheme(&s).unwrap(), 11);
        for k in 1..=s.r() {
            assert_eq!(p.count_in_level(k), s.m_local[k - 1]);
        }
        for e in half.entries.iter().filter(|e| e.level > s.saturation) {
            let t = e.natural as i64;
            assert!(p.entries.iter().any(|x| x.frequency == t));
            assert!(p.entries.iter().any(|x| x.frequency == -t + 1));
        }
        let odd = LevelScheme::new(vec![2, 4, 8], vec![2, 2, 3], 2, SchemeMode::Theory).unwrap();
        assert!(draw_symmetric(&odd, 1).is_err());
    }

    #[test]
    fn weights() {
        let s = LevelScheme::new(vec![64, 128], vec![64, 16], 1, SchemeMode::Theory).unwrap();
        let d = scaling_weights(&s);
        assert_eq!(d.len(), 128);
        assert_eq!(d[0], 1.0);
        assert_eq!(d[100], 2.0);
        let s = LevelScheme::new(vec![64, 128], vec![0, 16], 0, SchemeMode::Theory).unwrap();
        let d = scaling_weights(&s);
        assert_eq!(d[0], 0.0);
        assert_eq!(d[127], 2.0);
    }

    #[test]
    fn csv_groups_duplicates() {
        let s = LevelScheme::new(vec![2, 4], vec![2, 1], 1, SchemeMode::Theory).unwrap();
        let p = draw_multilevel(&s, 0);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("level,signed_frequency,natural_index,multiplicity\n1,0,1,1\n1,1,2,1\n"));
        assert_eq!(p.summary(), "m = 3 m_k = 2,1");
    }
}
