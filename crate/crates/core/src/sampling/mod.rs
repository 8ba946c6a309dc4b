//! Multilevel subsampling patterns and measurement operators.

pub mod operator;
pub mod scheme;

pub use operator::{
    complex_to_real, fourier_operator, gaussian_matrix, gaussian_operator, operator_norm, real_to_complex,
    realify, subsampled_gramian_operator, two_level_operator, DenseOperator, FourierOperator, LinearOperator,
    MeasurementOperator, ReducedConstraint, TwoLevelOperator,
};
pub use scheme::{
    draw_multilevel, draw_symmetric, half_scheme, level_weights, scaling_weights, LevelScheme, PatternEntry,
    SamplingPattern, SchemeMode,
};
