//! Optimal recovery of weighted multiplication operators `φ^{α⁰}·x` from
//! inaccurately known values of `φ^{αʲ}·x` in `L_p(ℝ^d)`.
//!
//! The crate computes the exact recovery error `e^{−S(α⁰)}` from the upper
//! envelope of the points `(αʲ, ln 1/δⱼ)`, builds the closed-form optimal
//! multiplier methods, certifies them on grids, simulates worst-case recovery
//! for `p = 2` (including Fourier-multiplier operators such as Weyl derivatives
//! and powers of the Laplacian), and evaluates the associated sharp
//! Carlson-type inequalities.

pub mod corpus;
pub mod envelope;
pub mod error;
pub mod inequality;
pub mod multipliers;
pub mod oracle;
pub mod problem;
pub mod recovery;
pub mod spectral;
pub mod time_domain;
pub mod weights;

mod linalg;
mod simplex;

pub use envelope::{recovery_error, solve_envelope, ActiveNode, EnvelopeSolution};
pub use error::{Error, Result};
pub use inequality::{carlson_bound, sharpness_gap, verify_inequality, InequalityReport};
pub use multipliers::{
    build_multipliers, check_interpolation, check_norm_condition, lambda_hats, EtaGrid,
    MultiplierFamily,
};
pub use oracle::{envelope_oracle, envelope_oracle_with, OracleConfig};
pub use problem::{AlphaVec, InfoNode, NodeKind, NormIndex, RecoveryProblem};
pub use recovery::{
    apply_method, apply_operator, build_bump, build_bump_with, simulate_trial, BumpConfig,
    BumpOutcome, ExtremalBump, NoiseMode, TrialReport, VariationScale,
};
pub use spectral::{FrequencyGrid, GridAxis, SpectralFunction};
pub use time_domain::{recover_time_domain, SampledSignal};
pub use weights::{weight_levels, weight_power, Levels, TabulatedLevels, WeightFamily};

pub use num_complex::Complex64;
