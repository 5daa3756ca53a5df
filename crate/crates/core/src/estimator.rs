//! Model fitting and the association score.
//!
//! The null model has one parameter (the shared marginal kernel variance);
//! the alternative has three (marginal variance, joint variance, mixture
//! weight). Both are fitted by maximizing the leave-one-out
//! cross-validation log-likelihood with deterministic derivative-free
//! searches, and the score follows from the likelihood gap:
//!
//! `a_raw = 1 - exp((2/n) * (loglik_null - loglik_alt))`
//!
//! i.e. one minus the geometric mean of the squared pointwise density
//! ratios, evaluated in log space so the n-fold product cannot overflow.
//! Because the null model is nested in the alternative at `w = 0` and that
//! point is always evaluated, `loglik_alt >= loglik_null` holds exactly and
//! the raw score is never negative.

use serde::{Deserialize, Serialize};

pub use crate::density::ModelParams;

use crate::correction;
use crate::density::{DensityEvaluator, SIGMA2_MAX, SIGMA2_MIN};
use crate::error::{Error, Result};
use crate::optimize::{grid_then_golden_max, nelder_mead_max};
use crate::table::{rank_transform, DataTable, RankedTable, VariableGrouping};

/// Number of samples of the log-uniform variance grid in the null fit.
const NULL_GRID_POINTS: usize = 32;
/// Smallest sample size accepted by [`estimate_association`]; below this the
/// cross-validated fits are dominated by the variance bounds.
pub const MIN_SAMPLES: usize = 8;

/// Tuning knobs for the fits. The defaults are used everywhere in this
/// crate; estimation is deterministic for a fixed config.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Apply the calibrated small-sample correction to the raw score.
    pub apply_correction: bool,
    /// Convergence threshold for the optimizers, relative to the
    /// log-likelihood magnitude.
    pub tolerance: f64,
    /// Objective-evaluation budget per simplex restart.
    pub max_evals: usize,
    /// Lower kernel-variance bound for the searches.
    pub sigma2_min: f64,
    /// Upper kernel-variance bound for the searches.
    pub sigma2_max: f64,
    /// Carried for downstream consumers (tests, sweeps); the estimator
    /// itself uses no randomness.
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            apply_correction: true,
            tolerance: 1e-6,
            max_evals: 500,
            sigma2_min: SIGMA2_MIN,
            sigma2_max: SIGMA2_MAX,
            seed: 0,
        }
    }
}

impl EstimatorConfig {
    fn validate(&self) -> Result<()> {
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_evals < 10 {
            return Err(Error::InvalidParameter(format!(
                "max_evals must be at least 10, got {}",
                self.max_evals
            )));
        }
        if !(self.sigma2_min >= SIGMA2_MIN
            && self.sigma2_max <= SIGMA2_MAX
            && self.sigma2_min < self.sigma2_max)
        {
            return Err(Error::InvalidParameter(format!(
                "variance bounds [{}, {}] must be ordered and lie within [{}, {}]",
                self.sigma2_min, self.sigma2_max, SIGMA2_MIN, SIGMA2_MAX
            )));
        }
        Ok(())
    }
}

/// Fitted null model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NullFit {
    /// Shared marginal kernel variance.
    pub sigma2_indep: f64,
    /// Null LOO cross-validation log-likelihood at that variance.
    pub loglik: f64,
    /// Objective evaluations spent.
    pub evals: usize,
}

/// Fitted alternative model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AltFit {
    pub params: ModelParams,
    /// Alternative LOO cross-validation log-likelihood; never below the
    /// null's.
    pub loglik: f64,
    /// Best log-likelihood over the evaluated candidates with strictly
    /// positive mixture weight. Unlike `loglik` this may fall below the
    /// null's: when the data carry no dependence signal the optimum sits on
    /// the `w = 0` boundary and every mixed candidate loses. Its
    /// distribution is continuous, which is what the permutation test needs
    /// from a statistic.
    pub interior_loglik: f64,
    /// Objective evaluations spent across all restarts.
    pub evals: usize,
}

/// Everything produced by one association estimation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    /// Raw score from the likelihood gap, in `[0, 1)`.
    pub a_raw: f64,
    /// Score after the small-sample correction (equals `a_raw` when the
    /// correction is disabled), in `[0, 1]`.
    pub a_corrected: f64,
    /// Signed score: the likelihood gap of the best strictly-mixed (w > 0)
    /// candidate, without the clamp at the null. Equals `a_raw` whenever
    /// `a_raw > 0`; goes negative where `a_raw` flattens to 0, giving the
    /// permutation test a statistic with a continuous null distribution.
    pub a_signed: f64,
    pub loglik_null: f64,
    pub loglik_alt: f64,
    /// Fitted null marginal variance.
    pub params_null: f64,
    pub params_alt: ModelParams,
    pub n: usize,
    /// Column names of each variable group, in the order supplied.
    pub grouping: Vec<Vec<String>>,
    pub optimizer_evals: usize,
}

fn clamp_sigma2(t: f64, cfg: &EstimatorConfig) -> f64 {
    t.exp().clamp(cfg.sigma2_min, cfg.sigma2_max)
}

pub(crate) fn fit_null_eval(eval: &DensityEvaluator, cfg: &EstimatorConfig) -> NullFit {
    let mut evals = 0usize;
    let objective = |t: f64| {
        evals += 1;
        eval.loglik_null(clamp_sigma2(t, cfg))
    };
    // Grid in log variance, so samples are log-uniform in the variance;
    // the width tolerance is in the same log coordinate.
    let (t_best, loglik) = grid_then_golden_max(
        objective,
        cfg.sigma2_min.ln(),
        cfg.sigma2_max.ln(),
        NULL_GRID_POINTS,
        cfg.tolerance,
    );
    NullFit {
        sigma2_indep: clamp_sigma2(t_best, cfg),
        loglik,
        evals,
    }
}

pub(crate) fn fit_alt_eval(
    eval: &DensityEvaluator,
    null_fit: &NullFit,
    cfg: &EstimatorConfig,
) -> AltFit {
    // The null is the w = 0 slice of the alternative and shares its code
    // path exactly, so seeding the incumbent with the null fit guarantees
    // loglik_alt >= loglik_null; a simplex result replaces it only if
    // strictly better, so exact independence fits keep a_raw = 0 exactly.
    let null_params = ModelParams {
        sigma2_indep: null_fit.sigma2_indep,
        sigma2_dep: null_fit.sigma2_indep,
        w: 0.0,
    };
    let mut best = (null_params, null_fit.loglik);

    let t_null = null_fit.sigma2_indep.ln();
    let spread = (1.0 + null_fit.loglik.abs()) * cfg.tolerance;
    // Restarts: one near the pure-joint corner, one mixed with a tighter
    // joint kernel, one at the null itself.
    let starts = [
        ([t_null, t_null, 0.99], [0.3, 0.3, -0.05]),
        ([t_null, t_null - 4.0_f64.ln(), 0.5], [0.3, 0.3, 0.2]),
        ([t_null, t_null, 0.0], [0.3, 0.3, 0.05]),
    ];

    let mut evals = 0usize;
    let mut interior_loglik = f64::NEG_INFINITY;
    for (start, step) in starts {
        let objective = |x: &[f64; 3]| {
            evals += 1;
            let params = params_from_coords(x, cfg);
            let loglik = eval.loglik_alt(&params);
            if params.w > 0.0 && loglik > interior_loglik {
                interior_loglik = loglik;
            }
            loglik
        };
        let (x, loglik) = nelder_mead_max(objective, start, step, spread, cfg.max_evals);
        if loglik > best.1 {
            best = (params_from_coords(&x, cfg), loglik);
        }
    }
    debug_assert!(interior_loglik.is_finite(), "restarts evaluate mixed candidates");

    AltFit {
        params: best.0,
        loglik: best.1,
        interior_loglik,
        evals,
    }
}

/// Search coordinates are (log sigma2_indep, log sigma2_dep, w); variances
/// clamp to the configured bounds and w projects onto [0, 1].
fn params_from_coords(x: &[f64; 3], cfg: &EstimatorConfig) -> ModelParams {
    ModelParams {
        sigma2_indep: clamp_sigma2(x[0], cfg),
        sigma2_dep: clamp_sigma2(x[1], cfg),
        w: x[2].clamp(0.0, 1.0),
    }
}

/// Maximizes the null LOO likelihood over the marginal kernel variance.
pub fn fit_null(
    ranked: &RankedTable,
    grouping: &VariableGrouping,
    cfg: &EstimatorConfig,
) -> Result<NullFit> {
    cfg.validate()?;
    let eval = DensityEvaluator::new(ranked, grouping)?;
    Ok(fit_null_eval(&eval, cfg))
}

/// Maximizes the alternative LOO likelihood over all three parameters,
/// starting from (and never falling below) the supplied null fit.
pub fn fit_alt(
    ranked: &RankedTable,
    grouping: &VariableGrouping,
    null_fit: &NullFit,
    cfg: &EstimatorConfig,
) -> Result<AltFit> {
    cfg.validate()?;
    let eval = DensityEvaluator::new(ranked, grouping)?;
    Ok(fit_alt_eval(&eval, null_fit, cfg))
}

/// Estimates the association score between the column groups of `grouping`.
///
/// Rank-transforms the table, fits both models, converts the likelihood gap
/// to a score, and (by default) applies the small-sample correction.
pub fn estimate_association(
    table: &DataTable,
    grouping: &VariableGrouping,
    cfg: &EstimatorConfig,
) -> Result<FitResult> {
    cfg.validate()?;
    if table.n_rows() < MIN_SAMPLES {
        return Err(Error::SampleTooSmall {
            n: table.n_rows(),
            min: MIN_SAMPLES,
        });
    }
    grouping.validate_for(table.n_cols())?;

    let ranked = rank_transform(table);
    let eval = DensityEvaluator::new(&ranked, grouping)?;
    let null = fit_null_eval(&eval, cfg);
    let alt = fit_alt_eval(&eval, &null, cfg);

    let n = table.n_rows() as f64;
    let a_raw = 1.0 - ((2.0 / n) * (null.loglik - alt.loglik)).exp();
    let a_signed = 1.0 - ((2.0 / n) * (null.loglik - alt.interior_loglik)).exp();
    let a_corrected = if cfg.apply_correction {
        apply_small_sample_correction(a_raw, table.n_rows())
    } else {
        a_raw
    };

    Ok(FitResult {
        a_raw,
        a_corrected,
        a_signed,
        loglik_null: null.loglik,
        loglik_alt: alt.loglik,
        params_null: null.sigma2_indep,
        params_alt: alt.params,
        n: table.n_rows(),
        grouping: grouping.describe(table),
        optimizer_evals: null.evals + alt.evals,
    })
}

/// Applies the shipped calibration table to a raw score. Zero stays zero;
/// sample sizes beyond the calibrated range pass through unchanged.
pub fn apply_small_sample_correction(a_raw: f64, n: usize) -> f64 {
    correction::default_table().apply(a_raw, n)
}
