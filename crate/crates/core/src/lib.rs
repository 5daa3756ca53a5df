//! Estimation of general (possibly multidimensional) association strength
//! between groups of variables.
//!
//! The association score `A` is a generalized coefficient of determination:
//! one minus the geometric mean of squared density ratios between an
//! independence-constrained null model and a mixture alternative model, both
//! estimated with leave-one-out cross-validated Gaussian kernel densities on
//! rank-transformed data. The score lives in `[0, 1)`, equals the classical
//! R-squared for bivariate Gaussian data, and generalizes to vector-valued
//! variables and to more than two variable groups.
//!
//! The crate also provides a permutation test of independence, a non-linear
//! semipartial association (variance in `Y` explained by `X` after
//! controlling for `C`), and synthetic-relationship generators with analytic
//! R-squared oracles for equitability and convergence benchmarking.

pub mod benchgen;
pub mod composite;
pub mod correction;
pub mod density;
mod error;
pub mod estimator;
pub mod inference;
mod optimize;
pub(crate) mod seeding;
pub mod table;

pub use benchgen::{
    convergence_sweep, equitability_sweep, generate_relationship, ConvergenceCell,
    EquitabilityCell, Family, GeneratedData, RelationshipSpec,
};
pub use composite::{semipartial_association, SemipartialRequest};
pub use correction::{calibrate_correction, CalibrationGrid, CorrectionTable};
pub use density::{
    loo_log_density_group, loo_log_lik_alt, loo_log_lik_null, DensityEvaluator, SIGMA2_MAX,
    SIGMA2_MIN,
};
pub use error::{Error, Result};
pub use estimator::{
    apply_small_sample_correction, estimate_association, fit_alt, fit_null, AltFit,
    EstimatorConfig, FitResult, ModelParams, NullFit,
};
pub use inference::{permutation_test, TestResult};
pub use table::{rank_transform, DataTable, RankedTable, VariableGrouping};
