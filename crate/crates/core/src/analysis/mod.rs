//! Post-processing of trajectories and closed-form bifurcation quantities.

pub mod hopf;
pub mod quadrature;
pub mod regime;
pub mod returnmap;
pub mod signature;
pub mod torus;

pub use crate::models::params::{b0_of_mu, mu_of};
pub use hopf::{bautin_locate, hopf_locate, BautinPoint, Criticality, HopfPoint};
pub use regime::{
    analyze, run_regime, simulate, sweep, validate_sweep_values, RegimeOptions, RegimeReport,
    RegimeSummary, SweepRow,
};
pub use returnmap::{
    lao_increment, return_integral, return_map_analytic, return_map_from_p, return_map_numeric,
    w0_from_p, AnalyticReturn, LandingBranch, PhaseDirection, ReturnMapSample, ReturnOptions,
};
pub use signature::{
    classify_series, detect_bursting, extract_signature, MMOSignature, Oscillation,
    OscillationClass, SignatureAnalysis, SignatureConfig, SignaturePair,
};
pub use torus::{detect_torus, TorusConfig, TorusReport};
