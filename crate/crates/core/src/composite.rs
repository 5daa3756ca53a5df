//! Semipartial association: variance in `Y` explained by `X` beyond what
//! the control variables `C` already explain.
//!
//! Defined as the nested-model difference `A(Y; X u C) - A(Y; C)`, clamped
//! below at zero — the same decomposition that yields the linear semipartial
//! R-squared from nested regressions, applied to the association score.
//! When all relationships are linear this agrees with the classical
//! semipartial R-squared; when `Y` and `X` are conditionally independent
//! given `C`, the two fits explain the same variance and the difference
//! collapses toward zero.

use crate::error::{Error, Result};
use crate::estimator::{estimate_association, EstimatorConfig};
use crate::table::{DataTable, VariableGrouping};

/// Column roles for a semipartial run.
#[derive(Debug, Clone)]
pub struct SemipartialRequest {
    /// Response columns.
    pub y_cols: Vec<usize>,
    /// Predictor columns of interest.
    pub x_cols: Vec<usize>,
    /// Control columns. Must be non-empty: without controls the plain
    /// association is the right tool.
    pub c_cols: Vec<usize>,
    pub cfg: EstimatorConfig,
}

impl SemipartialRequest {
    fn validate(&self, n_cols: usize) -> Result<()> {
        for (name, cols) in [
            ("y_cols", &self.y_cols),
            ("x_cols", &self.x_cols),
            ("c_cols", &self.c_cols),
        ] {
            if cols.is_empty() {
                return Err(Error::InvalidGrouping(format!("{} is empty", name)));
            }
            for &c in cols.iter() {
                if c >= n_cols {
                    return Err(Error::InvalidGrouping(format!(
                        "column index {} in {} out of range for table with {} columns",
                        c, name, n_cols
                    )));
                }
            }
        }
        let mut seen = vec![false; n_cols];
        for &c in self
            .y_cols
            .iter()
            .chain(&self.x_cols)
            .chain(&self.c_cols)
        {
            if seen[c] {
                return Err(Error::InvalidGrouping(format!(
                    "column index {} appears in more than one of y/x/c",
                    c
                )));
            }
            seen[c] = true;
        }
        Ok(())
    }
}

/// Computes the semipartial association of `Y` with `X` controlling for
/// `C`: the full fit `A(Y; X u C)` minus the reduced fit `A(Y; C)`,
/// clamped to `[0, 1]`. Uses the corrected score from each fit (the raw
/// score when the correction is disabled in `req.cfg`).
pub fn semipartial_association(table: &DataTable, req: &SemipartialRequest) -> Result<f64> {
    req.validate(table.n_cols())?;

    let mut xc = req.x_cols.clone();
    xc.extend_from_slice(&req.c_cols);
    let full_grouping = VariableGrouping::pair(req.y_cols.clone(), xc)?;
    let reduced_grouping = VariableGrouping::pair(req.y_cols.clone(), req.c_cols.clone())?;

    let full = estimate_association(table, &full_grouping, &req.cfg)?;
    let reduced = estimate_association(table, &reduced_grouping, &req.cfg)?;

    Ok((full.a_corrected - reduced.a_corrected).clamp(0.0, 1.0))
}
