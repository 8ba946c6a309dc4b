//! Parameter recipes of the three strategies and their pipelines.

mod params;
mod run;

pub use params::{
    fourier_params, gauss_params, gauss_params_for, l_bar, level_size, optimal_params, optimal_params_for,
    sparsity_plan, FourierRecipe, GaussRecipe, OptimalRecipe, RecipeMode, SparsityPlan, DEFAULT_DELTA,
};
pub use run::{
    fourier_pattern, fourier_recipe, run_fourier, run_gauss, run_method, run_optimal, Decoder, Method, RunConfig,
    RunOutcome, Target, DEFAULT_DIM, REFERENCE_EXTRA_SCALES, THEORY_DIM_CAP,
};
