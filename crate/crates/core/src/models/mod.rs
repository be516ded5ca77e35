//! Parameter sets, vector fields and coordinate charts.

pub mod charts;
pub mod fields;
pub mod params;

pub use charts::{
    from_rescaled, from_standard, to_rescaled, to_standard, OriginalState, RescaledState,
    StandardState,
};
pub use fields::{
    fold_points, original_fold_points, rhs_autonomous, rhs_forced, rhs_generalized, rhs_prototype,
    rhs_rescaled, rhs_standard, slow_manifold_df, slow_manifold_f, AutonomousBvp, ForcedBvp,
    GeneralizedBvp, Prototype, RescaledForm, StandardForm,
};
pub use params::{b0_of_mu, mu_of, ParameterSet, PrototypeParams, RescaledParams};
