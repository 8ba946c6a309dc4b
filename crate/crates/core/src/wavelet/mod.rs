//! Periodized Daubechies wavelets on [0, 1].

pub mod approx;
pub mod dwt;
pub mod filter;
pub mod function;
pub mod project;

pub use approx::{best_s_term_error, decay_profile, largest_indices, linear_error, DecayProfile};
pub use dwt::{periodized_dwt, periodized_idwt, CoefficientVector, Sample};
pub use filter::{coarsest_scale, daubechies_filter, WaveletSpec, MAX_ORDER};
pub use function::PiecewiseFunction;
pub use project::{
    function_to_coefficients, function_to_coefficients_with, CoefficientMethod, ScalingTable,
    DEFAULT_OVERSAMPLE,
};
