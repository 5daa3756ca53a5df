//! Empirical small-sample correction for the raw association score.
//!
//! Leave-one-out cross-validation likelihood ratios are biased upward at
//! small `n`: even independent data yields a slightly positive raw score.
//! The correction is calibrated by simulation on bivariate Gaussians, where
//! the population association equals the squared correlation. For each grid
//! cell `(n, rho2)` the calibration records the mean raw score; the
//! correction then maps an observed raw score back to the `rho2` whose cell
//! mean it matches, interpolating linearly between grid points and between
//! `n` rows. A calibrated table generated from the default grid ships with
//! the crate as plain text and can be regenerated bit-identically.

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::estimator::{estimate_association, EstimatorConfig};
use crate::seeding::derive_seed;
use crate::table::{DataTable, VariableGrouping};

/// Format version written in the table header.
const FORMAT_VERSION: u32 = 1;

/// Seed of the shipped calibration run.
pub const DEFAULT_CALIBRATION_SEED: u64 = 987_654_321;

const SHIPPED_TABLE: &str = include_str!("../data/correction.tsv");

/// Simulation grid for [`calibrate_correction`].
#[derive(Debug, Clone)]
pub struct CalibrationGrid {
    /// Sample sizes, ascending. Scores at larger `n` pass through unchanged.
    pub ns: Vec<usize>,
    /// Population squared correlations, ascending, starting at 0.
    pub rho2s: Vec<f64>,
    /// Replicates per cell.
    pub replicates: usize,
    /// Base seed; every `(n, rho2, replicate)` derives its own stream.
    pub seed: u64,
}

impl Default for CalibrationGrid {
    fn default() -> Self {
        Self {
            ns: vec![20, 50, 100, 200, 400],
            rho2s: (0..10).map(|i| i as f64 / 10.0).collect(),
            replicates: 200,
            seed: DEFAULT_CALIBRATION_SEED,
        }
    }
}

impl CalibrationGrid {
    fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.ns[0] < 8 || self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "calibration n values must be ascending and at least 8".into(),
            ));
        }
        let ascending = self.rho2s.windows(2).all(|w| w[0] < w[1]);
        if self.rho2s.first() != Some(&0.0)
            || !ascending
            || self.rho2s.iter().any(|&r| !(0.0..1.0).contains(&r))
        {
            return Err(Error::InvalidParameter(
                "calibration rho2 values must start at 0 and ascend within [0, 1)".into(),
            ));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidParameter(
                "calibration needs at least one replicate per cell".into(),
            ));
        }
        Ok(())
    }
}

/// Calibrated mapping from raw scores to corrected scores.
///
/// Serialized as plain text: `#`-prefixed header lines carry the format
/// version, seed, replicate count and both grid axes; each data line is
/// `n<TAB>rho2<TAB>mean_a_raw`, one per grid cell, in row-major (n, rho2)
/// order. Floats print in shortest round-trip form, so parse/serialize is
/// lossless.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionTable {
    version: u32,
    seed: u64,
    replicates: usize,
    ns: Vec<usize>,
    rho2s: Vec<f64>,
    /// `means[i][j]` = mean raw score at `ns[i]`, `rho2s[j]`.
    means: Vec<Vec<f64>>,
}

impl CorrectionTable {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn ns(&self) -> &[usize] {
        &self.ns
    }

    pub fn rho2s(&self) -> &[f64] {
        &self.rho2s
    }

    /// Mean raw score recorded for a grid cell.
    pub fn cell_mean(&self, n: usize, rho2: f64) -> Option<f64> {
        let i = self.ns.iter().position(|&v| v == n)?;
        let j = self.rho2s.iter().position(|&v| v == rho2)?;
        Some(self.means[i][j])
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# association score correction table v{}\n", self.version));
        out.push_str(&format!("# seed\t{}\n", self.seed));
        out.push_str(&format!("# replicates\t{}\n", self.replicates));
        let ns: Vec<String> = self.ns.iter().map(|n| n.to_string()).collect();
        out.push_str(&format!("# n\t{}\n", ns.join("\t")));
        let rho2s: Vec<String> = self.rho2s.iter().map(|r| r.to_string()).collect();
        out.push_str(&format!("# rho2\t{}\n", rho2s.join("\t")));
        out.push_str("# columns\tn\trho2\tmean_a_raw\n");
        for (i, &n) in self.ns.iter().enumerate() {
            for (j, &rho2) in self.rho2s.iter().enumerate() {
                out.push_str(&format!("{}\t{}\t{}\n", n, rho2, self.means[i][j]));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::MalformedCorrectionTable(msg.to_string());
        let mut version = None;
        let mut seed = None;
        let mut replicates = None;
        let mut ns: Option<Vec<usize>> = None;
        let mut rho2s: Option<Vec<f64>> = None;
        let mut cells = Vec::new();

        for line in text.lines() {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                match fields.first() {
                    Some(&"association") => {
                        let v = fields
                            .last()
                            .and_then(|f| f.strip_prefix('v'))
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| bad("missing format version"))?;
                        version = Some(v);
                    }
                    Some(&"seed") => {
                        seed = Some(
                            fields
                                .get(1)
                                .and_then(|f| f.parse().ok())
                                .ok_or_else(|| bad("bad seed line"))?,
                        )
                    }
                    Some(&"replicates") => {
                        replicates = Some(
                            fields
                                .get(1)
                                .and_then(|f| f.parse().ok())
                                .ok_or_else(|| bad("bad replicates line"))?,
                        )
                    }
                    Some(&"n") => {
                        let parsed: Option<Vec<usize>> =
                            fields[1..].iter().map(|f| f.parse().ok()).collect();
                        ns = Some(parsed.ok_or_else(|| bad("bad n grid line"))?);
                    }
                    Some(&"rho2") => {
                        let parsed: Option<Vec<f64>> =
                            fields[1..].iter().map(|f| f.parse().ok()).collect();
                        rho2s = Some(parsed.ok_or_else(|| bad("bad rho2 grid line"))?);
                    }
                    _ => {}
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(bad("data line must have exactly 3 fields"));
            }
            let n: usize = fields[0].parse().map_err(|_| bad("bad n in data line"))?;
            let rho2: f64 = fields[1].parse().map_err(|_| bad("bad rho2 in data line"))?;
            let mean: f64 = fields[2].parse().map_err(|_| bad("bad mean in data line"))?;
            cells.push((n, rho2, mean));
        }

        let version = version.ok_or_else(|| bad("missing header"))?;
        if version != FORMAT_VERSION {
            return Err(bad(&format!("unsupported format version {}", version)));
        }
        let seed = seed.ok_or_else(|| bad("missing seed"))?;
        let replicates = replicates.ok_or_else(|| bad("missing replicates"))?;
        let ns = ns.ok_or_else(|| bad("missing n grid"))?;
        let rho2s = rho2s.ok_or_else(|| bad("missing rho2 grid"))?;
        if cells.len() != ns.len() * rho2s.len() {
            return Err(bad("cell count does not match grid"));
        }

        let mut means = vec![vec![f64::NAN; rho2s.len()]; ns.len()];
        for (idx, (n, rho2, mean)) in cells.into_iter().enumerate() {
            let i = idx / rho2s.len();
            let j = idx % rho2s.len();
            if ns[i] != n || rho2s[j] != rho2 {
                return Err(bad("data lines out of row-major grid order"));
            }
            if !(0.0..1.0).contains(&mean) {
                return Err(bad("cell mean outside [0, 1)"));
            }
            means[i][j] = mean;
        }

        let table = Self {
            version,
            seed,
            replicates,
            ns,
            rho2s,
            means,
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        let grid = CalibrationGrid {
            ns: self.ns.clone(),
            rho2s: self.rho2s.clone(),
            replicates: self.replicates,
            seed: self.seed,
        };
        grid.validate()
            .map_err(|e| Error::MalformedCorrectionTable(e.to_string()))
    }

    /// Knots of one row's piecewise-linear raw-to-corrected map.
    ///
    /// The row's cell means become x-knots against their rho2 y-values,
    /// anchored at (0, 0) and (1, 1). Cell means are forced non-decreasing
    /// (running maximum) and ties keep only the first occurrence, so the
    /// map is a function and monotone by construction. Raw scores below the
    /// rho2 = 0 cell mean map to exactly 0.
    fn row_knots(&self, row: usize) -> (Vec<f64>, Vec<f64>) {
        let mut xs = vec![0.0];
        let mut ys = vec![0.0];
        let mut running = 0.0_f64;
        for (j, &m) in self.means[row].iter().enumerate() {
            let m = m.max(running).min(1.0);
            if m > *xs.last().unwrap() {
                xs.push(m);
                ys.push(self.rho2s[j]);
            }
            running = m;
        }
        if *xs.last().unwrap() < 1.0 {
            xs.push(1.0);
            ys.push(1.0);
        }
        (xs, ys)
    }

    fn apply_row(&self, row: usize, a_raw: f64) -> f64 {
        let (xs, ys) = self.row_knots(row);
        if a_raw <= xs[0] {
            return ys[0];
        }
        for seg in xs.windows(2).enumerate() {
            let (k, w) = seg;
            if a_raw <= w[1] {
                let t = (a_raw - w[0]) / (w[1] - w[0]);
                return ys[k] + t * (ys[k + 1] - ys[k]);
            }
        }
        *ys.last().unwrap()
    }

    /// Maps a raw score to its corrected value for sample size `n`.
    ///
    /// Exact zeros stay zero; `n` beyond the largest calibrated sample size
    /// is the identity; `n` below the smallest uses the smallest row.
    pub fn apply(&self, a_raw: f64, n: usize) -> f64 {
        if a_raw <= 0.0 {
            return 0.0;
        }
        let a_raw = a_raw.min(1.0);
        let last = *self.ns.last().unwrap();
        if n > last {
            return a_raw;
        }
        if n <= self.ns[0] {
            return self.apply_row(0, a_raw);
        }
        let hi = self.ns.iter().position(|&v| v >= n).unwrap();
        if self.ns[hi] == n {
            return self.apply_row(hi, a_raw);
        }
        let lo = hi - 1;
        let c_lo = self.apply_row(lo, a_raw);
        let c_hi = self.apply_row(hi, a_raw);
        let t = (n - self.ns[lo]) as f64 / (self.ns[hi] - self.ns[lo]) as f64;
        c_lo + t * (c_hi - c_lo)
    }
}

/// Runs the calibration simulation over `grid` and returns the table.
///
/// Each cell draws `grid.replicates` bivariate Gaussian samples with
/// population squared correlation `rho2`, estimates the raw score on each
/// (correction disabled), and records the mean. Every replicate seeds its
/// own generator from `(seed, n index, rho2 index, replicate)`, so the
/// result is reproducible regardless of evaluation order.
pub fn calibrate_correction(grid: &CalibrationGrid) -> Result<CorrectionTable> {
    grid.validate()?;
    let grouping = VariableGrouping::pair(vec![0], vec![1])?;
    let cfg = EstimatorConfig {
        apply_correction: false,
        ..EstimatorConfig::default()
    };
    let mut means = Vec::with_capacity(grid.ns.len());
    for (ni, &n) in grid.ns.iter().enumerate() {
        let mut row = Vec::with_capacity(grid.rho2s.len());
        for (ri, &rho2) in grid.rho2s.iter().enumerate() {
            let rho = rho2.sqrt();
            let mut sum = 0.0;
            for rep in 0..grid.replicates {
                let seed = derive_seed(grid.seed, &[ni as u64, ri as u64, rep as u64]);
                let table = gaussian_pair(n, rho, seed);
                let fit = estimate_association(&table, &grouping, &cfg)?;
                sum += fit.a_raw;
            }
            row.push(sum / grid.replicates as f64);
        }
        means.push(row);
    }
    Ok(CorrectionTable {
        version: FORMAT_VERSION,
        seed: grid.seed,
        replicates: grid.replicates,
        ns: grid.ns.clone(),
        rho2s: grid.rho2s.clone(),
        means,
    })
}

/// Samples `n` rows of a bivariate Gaussian with correlation `rho`.
fn gaussian_pair(n: usize, rho: f64, seed: u64) -> DataTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let noise_scale = (1.0 - rho * rho).sqrt();
    for _ in 0..n {
        let u: f64 = StandardNormal.sample(&mut rng);
        let v: f64 = StandardNormal.sample(&mut rng);
        x.push(u);
        y.push(rho * u + noise_scale * v);
    }
    DataTable::new(vec![("x".into(), x), ("y".into(), y)]).expect("generated table is valid")
}

/// The calibration table shipped with the crate, parsed once.
pub fn default_table() -> &'static CorrectionTable {
    static TABLE: OnceLock<CorrectionTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        CorrectionTable::parse(SHIPPED_TABLE).expect("shipped correction table is well-formed")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic_table() -> CorrectionTable {
        CorrectionTable {
            version: FORMAT_VERSION,
            seed: 7,
            replicates: 10,
            ns: vec![20, 100],
            rho2s: vec![0.0, 0.3, 0.6],
            means: vec![vec![0.2, 0.5, 0.8], vec![0.05, 0.32, 0.62]],
        }
    }

    #[test]
    fn text_round_trip_is_lossless() {
        let table = synthetic_table();
        let parsed = CorrectionTable::parse(&table.to_text()).unwrap();
        assert_eq!(table, parsed);
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(CorrectionTable::parse("").is_err());
        let table = synthetic_table();
        let text = table.to_text();
        // Drop one data line: cell count no longer matches the grid.
        let truncated: Vec<&str> = text.lines().take(text.lines().count() - 1).collect();
        assert!(CorrectionTable::parse(&truncated.join("\n")).is_err());
        // Corrupt the version.
        let wrong_version = text.replace("table v1", "table v9");
        assert!(CorrectionTable::parse(&wrong_version).is_err());
    }

    #[test]
    fn zero_maps_to_zero_for_all_n() {
        let table = synthetic_table();
        for n in [8, 20, 60, 100, 5000] {
            assert_eq!(table.apply(0.0, n), 0.0);
        }
    }

    #[test]
    fn identity_beyond_largest_n() {
        let table = synthetic_table();
        assert_eq!(table.apply(0.95, 10_000), 0.95);
        assert_eq!(table.apply(0.4, 101), 0.4);
    }

    #[test]
    fn row_map_hits_calibrated_points() {
        let table = synthetic_table();
        // At n=20 a raw score equal to a cell mean maps to that cell's rho2.
        assert_relative_eq!(table.apply(0.2, 20), 0.0);
        assert_relative_eq!(table.apply(0.5, 20), 0.3);
        assert_relative_eq!(table.apply(0.8, 20), 0.6);
        // Below the rho2=0 cell mean, the correction floors at zero.
        assert_eq!(table.apply(0.1, 20), 0.0);
        // Linear in between.
        assert_relative_eq!(table.apply(0.35, 20), 0.15);
        // Above the last knot, interpolate toward (1, 1).
        assert_relative_eq!(table.apply(0.9, 20), 0.8);
    }

    #[test]
    fn interpolates_between_n_rows() {
        let table = synthetic_table();
        let at_20 = table.apply(0.5, 20);
        let at_100 = table.apply(0.5, 100);
        let at_60 = table.apply(0.5, 60);
        assert_relative_eq!(at_60, at_20 + 0.5 * (at_100 - at_20), max_relative = 1e-12);
        // Below the smallest n, clamp to its row.
        assert_eq!(table.apply(0.5, 10), at_20);
    }

    #[test]
    fn correction_is_monotone_in_raw_score() {
        let table = synthetic_table();
        // Include a non-monotone row to confirm the running-max repair.
        let mut bumpy = table;
        bumpy.means[0] = vec![0.3, 0.2, 0.7];
        for n in [15, 20, 37, 100] {
            let mut prev = -1.0;
            for k in 0..=100 {
                let corrected = bumpy.apply(k as f64 / 100.0, n);
                assert!(corrected >= prev - 1e-12);
                assert!((0.0..=1.0).contains(&corrected));
                prev = corrected;
            }
        }
    }

    #[test]
    fn tiny_calibration_is_reproducible() {
        let grid = CalibrationGrid {
            ns: vec![10],
            rho2s: vec![0.0, 0.8],
            replicates: 2,
            seed: 99,
        };
        let a = calibrate_correction(&grid).unwrap();
        let b = calibrate_correction(&grid).unwrap();
        assert_eq!(a, b);
        // Strong dependence yields larger raw scores on average.
        assert!(a.means[0][1] > a.means[0][0]);
        let round = CorrectionTable::parse(&a.to_text()).unwrap();
        assert_eq!(a, round);
    }

    #[test]
    fn shipped_table_parses_and_matches_default_grid() {
        let table = default_table();
        assert_eq!(table.ns(), &[20, 50, 100, 200, 400]);
        assert_eq!(table.rho2s().len(), 10);
        assert_eq!(table.seed(), DEFAULT_CALIBRATION_SEED);
        assert!(table.replicates() >= 200);
    }

    #[test]
    fn shipped_table_null_cell_is_small_at_n400() {
        let mean = default_table().cell_mean(400, 0.0).unwrap();
        assert!((0.0..=0.05).contains(&mean), "mean raw at (400, 0) = {}", mean);
    }

    #[test]
    fn shipped_table_rows_increase_with_rho2() {
        let table = default_table();
        for (i, &n) in table.ns().iter().enumerate() {
            let row = &table.means[i];
            // Bias shrinks with n at rho2 = 0.
            assert!(row[0] < 0.5, "rho2=0 mean at n={} is {}", n, row[0]);
            // Dependence must dominate the row trend.
            assert!(row[9] > row[0] + 0.3, "flat calibration row at n={}", n);
        }
    }

    /// Mean raw and corrected scores over fresh (non-calibration) draws.
    fn held_out_means(n: usize, rho2: f64, reps: u64, seed0: u64) -> (f64, f64) {
        let cfg = crate::estimator::EstimatorConfig::default();
        let grouping = VariableGrouping::pair(vec![0], vec![1]).unwrap();
        let (mut raw, mut corrected) = (0.0, 0.0);
        for rep in 0..reps {
            let table = gaussian_pair(n, rho2.sqrt(), seed0 + rep);
            let fit = crate::estimator::estimate_association(&table, &grouping, &cfg).unwrap();
            raw += fit.a_raw;
            corrected += fit.a_corrected;
        }
        (raw / reps as f64, corrected / reps as f64)
    }

    #[test]
    fn held_out_corrected_mean_recovers_half_r2_at_n50() {
        let (_, corrected) = held_out_means(50, 0.5, 60, 1_000_000);
        assert!(
            (corrected - 0.5).abs() <= 0.07,
            "corrected mean at (n=50, rho2=0.5) = {}",
            corrected
        );
    }

    #[test]
    fn held_out_correction_halves_raw_bias_at_n50() {
        let mut raw_bias = 0.0;
        let mut corrected_bias = 0.0;
        for (i, rho2) in [0.0, 0.3, 0.6, 0.9].into_iter().enumerate() {
            let (raw, corrected) = held_out_means(50, rho2, 50, 2_000_000 + 10_000 * i as u64);
            raw_bias += (raw - rho2).abs();
            corrected_bias += (corrected - rho2).abs();
        }
        assert!(
            corrected_bias <= 0.5 * raw_bias,
            "held-out bias: raw {} vs corrected {}",
            raw_bias,
            corrected_bias
        );
    }
}
