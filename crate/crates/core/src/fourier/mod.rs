//! Fourier coefficients and the Fourier–wavelet cross-Gramian.

pub mod coeffs;
pub mod gramian;
pub mod index;
pub mod smoothness;

pub use coeffs::fourier_coefficients;
pub use gramian::{
    balancing, balancing_constant, cross_gramian, fine_scaling_factor, gram_matrix, haar_column_entry,
    haar_entry, local_coherence, Balancing, CrossGramian, GramianRows, DENSE_CAP,
};
pub use index::{dyadic_bands, first_frequencies, frequency_of, level_bounds, natural_of, BandPartition};
pub use smoothness::estimate_smoothness_q;
