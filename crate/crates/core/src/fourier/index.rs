//! Natural ordering of the Fourier basis and dyadic frequency bands.

use serde::Serialize;

use crate::error::{Error, Result};

/// Signed frequency of natural index `i` (1-based): 1 → 0, 2 → 1, 3 → −1, 4 → 2, …
pub fn frequency_of(i: usize) -> i64 {
    assert!(i >= 1, "natural indices start at 1");
    let n = i.div_ceil(2) as i64;
    if i.is_multiple_of(2) {
        n
    } else {
        -(n - 1)
    }
}

/// Natural index (1-based) of a signed frequency.
pub fn natural_of(omega: i64) -> usize {
    if omega > 0 {
        (2 * omega) as usize
    } else {
        (1 - 2 * omega) as usize
    }
}

/// Signed frequencies of the first `n` natural indices.
pub fn first_frequencies(n: usize) -> Vec<i64> {
    (1..=n).map(frequency_of).collect()
}

/// Sampling levels N_k = 2^{j0+k}, k = 1..=r.
pub fn level_bounds(j0: usize, r: usize) -> Vec<usize> {
    (1..=r).map(|k| 1usize << (j0 + k)).collect()
}

/// Partition of the low frequencies into dyadic bands B_1, …, B_r.
#[derive(Debug, Clone, Serialize)]
pub struct BandPartition {
    pub j0: usize,
    /// Signed frequencies of each band, increasing.
    pub bands: Vec<Vec<i64>>,
    /// Upper natural index N_k of each band.
    pub bounds: Vec<usize>,
}

impl BandPartition {
    pub fn r(&self) -> usize {
        self.bands.len()
    }

    /// Natural indices N_{k-1}+1 ..= N_k of band `k` (1-based).
    pub fn natural_range(&self, k: usize) -> std::ops::RangeInclusive<usize> {
        let lo = if k == 1 { 0 } else { self.bounds[k - 2] };
        (lo + 1)..=self.bounds[k - 1]
    }

    /// Band (1-based) containing a signed frequency, if any.
    pub fn band_of(&self, omega: i64) -> Option<usize> {
        let i = natural_of(omega);
        self.bounds.iter().position(|&b| i <= b).map(|k| k + 1)
    }
}

/// B_1 = {−2^{j0}+1, …, 2^{j0}}, B_{k+1} = {−2^{j0+k}+1, …, −2^{j0+k−1}} ∪ {2^{j0+k−1}+1, …, 2^{j0+k}}.
pub fn dyadic_bands(j0: usize, r: usize) -> Result<BandPartition> {
    if r < 1 {
        return Err(Error::Precondition("dyadic_bands needs r >= 1".into()));
    }
    let mut bands = Vec::with_capacity(r);
    let top = 1i64 << j0;
    bands.push((-top + 1..=top).collect());
    for k in 1..r {
        let hi = 1i64 << (j0 + k);
        let lo = 1i64 << (j0 + k - 1);
        let mut band: Vec<i64> = (-hi + 1..=-lo).collect();
        band.extend(lo + 1..=hi);
        bands.push(band);
    }
    Ok(BandPartition {
        j0,
        bands,
        bounds: level_bounds(j0, r),
    })
}
