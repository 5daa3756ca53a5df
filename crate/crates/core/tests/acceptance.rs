//! Acceptance gate: nine numbered criteria, one test each. Every test prints
//! `ACCEPTANCE <k> (<label>): PASS|FAIL <detail>` before asserting, so a
//! `--nocapture` run doubles as the sign-off report. Tolerances are pinned
//! as constants next to the criterion that uses them.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ascore_core::{
    equitability_sweep, estimate_association, generate_relationship, loo_log_lik_alt,
    loo_log_lik_null, permutation_test, rank_transform, semipartial_association, DataTable,
    EstimatorConfig, Family, ModelParams, RelationshipSpec, SemipartialRequest,
    VariableGrouping,
};

/// Criterion 1: corrected score band for a Gaussian with true R² = 0.5.
const GAUSSIAN_MEAN_BAND: (f64, f64) = (0.42, 0.58);
/// Criterion 2: minimum mean score for the noiseless circle at n = 200.
const CIRCLE_MIN_MEAN: f64 = 0.95;
/// Criterion 3: independence floor — mean and per-replicate ceilings.
const INDEP_MAX_MEAN: f64 = 0.05;
const INDEP_MAX_EACH: f64 = 0.12;
/// Criteria 4–5: equitability RMSE ceilings for 1-D and 2-D predictors.
const EQUITABILITY_RMSE_1D: f64 = 0.10;
const EQUITABILITY_RMSE_2D: f64 = 0.12;
/// Criterion 6e: relative tolerance against the brute-force oracle.
const ORACLE_REL_TOL: f64 = 1e-10;
/// Criterion 7: 1% KS critical value for 200 samples, 1.628 / sqrt(200).
const KS_RUNS: usize = 200;
const KS_CRITICAL_1PCT: f64 = 1.628 / 14.142_135_623_730_951;
/// Criterion 8: semipartial tolerances.
const SEMIPARTIAL_LINEAR_TOL: f64 = 0.07;
const SEMIPARTIAL_CONFOUNDED_MAX: f64 = 0.1;
/// Criterion 9: admissible wall-time log-log slope band.
const TIMING_SLOPE_BAND: (f64, f64) = (1.7, 2.3);

fn report(criterion: u32, label: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {criterion} ({label}): {verdict} {detail}");
    assert!(pass, "acceptance criterion {criterion} ({label}) failed: {detail}");
}

fn corrected_scores(family: Family, n: usize, noise: f64, seeds: std::ops::Range<u64>) -> Vec<f64> {
    let cfg = EstimatorConfig::default();
    seeds
        .map(|seed| {
            let data = generate_relationship(&RelationshipSpec {
                family,
                n,
                noise_sigma: noise,
                seed,
                x_dim: 1,
            })
            .unwrap();
            estimate_association(&data.table, &data.grouping(), &cfg)
                .unwrap()
                .a_corrected
        })
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Noise levels whose true R² = 1 / (1 + sigma²) comes out to
/// {0.1, 0.3, 0.6, 0.9}.
fn equitability_noise_grid() -> [f64; 4] {
    [3.0, (7.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt(), 1.0 / 3.0]
}

#[test]
fn criterion_1_gaussian_equivalence() {
    let scores = corrected_scores(Family::GaussianR2Half, 400, 0.0, 0..20);
    let m = mean(&scores);
    let pass = m >= GAUSSIAN_MEAN_BAND.0 && m <= GAUSSIAN_MEAN_BAND.1;
    report(
        1,
        "gaussian-equivalence",
        pass,
        &format!("mean={m:.4} over {} replicates, band [{}, {}]", scores.len(), GAUSSIAN_MEAN_BAND.0, GAUSSIAN_MEAN_BAND.1),
    );
}

#[test]
fn criterion_2_circle_convergence() {
    let scores = corrected_scores(Family::Circle, 200, 0.0, 100..110);
    let m = mean(&scores);
    report(
        2,
        "circle-convergence",
        m >= CIRCLE_MIN_MEAN,
        &format!("mean={m:.4} over {} replicates, needs >= {CIRCLE_MIN_MEAN}", scores.len()),
    );
}

#[test]
fn criterion_3_independence_floor() {
    let scores = corrected_scores(Family::Independent, 400, 0.0, 200..220);
    let m = mean(&scores);
    let worst = scores.iter().cloned().fold(0.0f64, f64::max);
    let pass = m <= INDEP_MAX_MEAN && worst <= INDEP_MAX_EACH;
    report(
        3,
        "independence-floor",
        pass,
        &format!("mean={m:.4} (<= {INDEP_MAX_MEAN}), worst replicate={worst:.4} (<= {INDEP_MAX_EACH})"),
    );
}

fn equitability_rmse(x_dim: u8, seed: u64) -> f64 {
    let cells = equitability_sweep(
        &Family::FUNCTIONAL,
        &equitability_noise_grid(),
        400,
        10,
        x_dim,
        seed,
    )
    .unwrap();
    let mut sq_sum = 0.0;
    let mut count = 0usize;
    for cell in &cells {
        let target = cell.true_r2.expect("functional families have a true R²");
        let dev = cell.mean_a - target;
        sq_sum += dev * dev;
        count += 1;
    }
    (sq_sum / count as f64).sqrt()
}

#[test]
fn criterion_4_equitability_1d() {
    let rmse = equitability_rmse(1, 41);
    report(
        4,
        "equitability-1d",
        rmse <= EQUITABILITY_RMSE_1D,
        &format!("rmse={rmse:.4} over 52 cells, ceiling {EQUITABILITY_RMSE_1D}"),
    );
}

#[test]
fn criterion_5_equitability_2d() {
    let rmse = equitability_rmse(2, 42);
    report(
        5,
        "equitability-2d",
        rmse <= EQUITABILITY_RMSE_2D,
        &format!("rmse={rmse:.4} over 52 cells, ceiling {EQUITABILITY_RMSE_2D}"),
    );
}

#[test]
fn criterion_6_exact_invariances() {
    let cfg = EstimatorConfig::default();

    // (a) Strictly increasing transforms of every column leave the score
    // bit-identical: ranks see only the ordering.
    let data = generate_relationship(&RelationshipSpec {
        family: Family::GaussianR2Half,
        n: 60,
        noise_sigma: 0.0,
        seed: 31,
        x_dim: 1,
    })
    .unwrap();
    let grouping = data.grouping();
    let base = estimate_association(&data.table, &grouping, &cfg).unwrap();
    let transformed = DataTable::new(vec![
        (
            "x".into(),
            data.table.column(0).iter().map(|v| v.exp()).collect(),
        ),
        (
            "y".into(),
            data.table.column(1).iter().map(|v| v.powi(3)).collect(),
        ),
    ])
    .unwrap();
    let trans = estimate_association(&transformed, &grouping, &cfg).unwrap();
    let a_ok = base.a_raw.to_bits() == trans.a_raw.to_bits()
        && base.a_corrected.to_bits() == trans.a_corrected.to_bits();

    // (b) Swapping the group order leaves the score bit-identical.
    let swapped = VariableGrouping::pair(vec![1], vec![0]).unwrap();
    let swap = estimate_association(&data.table, &swapped, &cfg).unwrap();
    let b_ok = base.a_raw.to_bits() == swap.a_raw.to_bits();

    // (c) The w = 0 alternative is the null likelihood, exactly.
    let ranked = rank_transform(&data.table);
    let params = ModelParams::new(0.013, 0.41, 0.0).unwrap();
    let null_ll = loo_log_lik_null(&ranked, &grouping, 0.013).unwrap();
    let alt_ll = loo_log_lik_alt(&ranked, &grouping, &params).unwrap();
    let c_ok = null_ll.to_bits() == alt_ll.to_bits();

    // (d) The fitted alternative never scores below the fitted null, and the
    // raw score stays inside [0, 1).
    let mut d_ok = true;
    for (i, &family) in Family::ALL.iter().cycle().take(100).enumerate() {
        let noise = match family {
            Family::GaussianR2Half | Family::Independent => 0.0,
            _ => 0.25,
        };
        let sample = generate_relationship(&RelationshipSpec {
            family,
            n: 30,
            noise_sigma: noise,
            seed: 500 + i as u64,
            x_dim: 1,
        })
        .unwrap();
        let fit = estimate_association(&sample.table, &sample.grouping(), &cfg).unwrap();
        d_ok &= fit.loglik_alt >= fit.loglik_null && (0.0..1.0).contains(&fit.a_raw);
    }

    // (e) At n <= 10 the log likelihoods match a brute-force probability-
    // space oracle to 1e-10 relative.
    let e_ok = oracle_agreement();

    let pass = a_ok && b_ok && c_ok && d_ok && e_ok;
    report(
        6,
        "exact-invariances",
        pass,
        &format!("transforms={a_ok} swap={b_ok} w0={c_ok} alt>=null={d_ok} oracle={e_ok}"),
    );
}

/// Recomputes both LOO likelihoods directly in probability space, with plain
/// nested loops and no shared code with the library internals.
fn oracle_loglik(
    ranks: &[Vec<f64>],
    groups: &[Vec<usize>],
    params: &ModelParams,
) -> (f64, f64) {
    let n = ranks[0].len();
    let gauss = |d: f64, s2: f64| (-d * d / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt();
    let all_cols: Vec<usize> = {
        let mut v: Vec<usize> = groups.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    };
    let mut null_ll = 0.0;
    let mut alt_ll = 0.0;
    for i in 0..n {
        let mut indep = 1.0;
        for group in groups {
            let mut dens = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let mut kern = 1.0;
                for &c in group {
                    kern *= gauss(ranks[c][i] - ranks[c][j], params.sigma2_indep);
                }
                dens += kern;
            }
            indep *= dens / (n - 1) as f64;
        }
        let mut joint = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut kern = 1.0;
            for &c in &all_cols {
                kern *= gauss(ranks[c][i] - ranks[c][j], params.sigma2_dep);
            }
            joint += kern;
        }
        joint /= (n - 1) as f64;
        null_ll += indep.ln();
        alt_ll += (params.w * joint + (1.0 - params.w) * indep).ln();
    }
    (null_ll, alt_ll)
}

fn oracle_agreement() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let close = |a: f64, b: f64| (a - b).abs() <= ORACLE_REL_TOL * b.abs().max(1.0);
    for case in 0..40 {
        let n = 8 + case % 3; // 8, 9, 10
        let columns = (0..3)
            .map(|c| {
                let values = (0..n).map(|_| rng.gen::<f64>()).collect();
                (format!("v{c}"), values)
            })
            .collect();
        let table = DataTable::new(columns).unwrap();
        let ranked = rank_transform(&table);
        let groups: Vec<Vec<usize>> = if case % 2 == 0 {
            vec![vec![0], vec![1, 2]]
        } else {
            vec![vec![0, 1], vec![2]]
        };
        let grouping = VariableGrouping::new(groups.clone()).unwrap();
        let params = ModelParams::new(
            0.005 + 0.6 * rng.gen::<f64>(),
            0.005 + 0.6 * rng.gen::<f64>(),
            [0.0, 0.3, 0.77, 1.0][case % 4],
        )
        .unwrap();

        let ranks: Vec<Vec<f64>> = (0..3).map(|c| ranked.column(c).to_vec()).collect();
        let (want_null, want_alt) = oracle_loglik(&ranks, &groups, &params);
        let got_null = loo_log_lik_null(&ranked, &grouping, params.sigma2_indep).unwrap();
        let got_alt = loo_log_lik_alt(&ranked, &grouping, &params).unwrap();
        if !close(got_null, want_null) || !close(got_alt, want_alt) {
            return false;
        }
    }
    true
}

#[test]
fn criterion_7_permutation_calibration() {
    let cfg = EstimatorConfig::default();

    // Null p-values are uniform: 200 independent tables, b = 99 each.
    let mut p_values = Vec::with_capacity(KS_RUNS);
    for i in 0..KS_RUNS as u64 {
        let data = generate_relationship(&RelationshipSpec {
            family: Family::Independent,
            n: 100,
            noise_sigma: 0.0,
            seed: 40_000 + i,
            x_dim: 1,
        })
        .unwrap();
        let result = permutation_test(&data.table, &data.grouping(), 99, 50_000 + i, &cfg).unwrap();
        p_values.push(result.p_value);
    }
    p_values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = p_values.len() as f64;
    let mut ks = 0.0f64;
    for (i, p) in p_values.iter().enumerate() {
        ks = ks.max((p - i as f64 / n).abs());
        ks = ks.max(((i + 1) as f64 / n - p).abs());
    }

    // A noiseless line beats every permutation: the add-one p-value floor.
    let line = generate_relationship(&RelationshipSpec {
        family: Family::Linear,
        n: 100,
        noise_sigma: 0.0,
        seed: 3,
        x_dim: 1,
    })
    .unwrap();
    let line_p = permutation_test(&line.table, &line.grouping(), 99, 9, &cfg)
        .unwrap()
        .p_value;

    let pass = ks < KS_CRITICAL_1PCT && line_p == 0.01;
    report(
        7,
        "permutation-calibration",
        pass,
        &format!("ks={ks:.4} (critical {KS_CRITICAL_1PCT:.4}), line p={line_p}"),
    );
}

/// Draws the linear semipartial system: X, C standard normal with
/// correlation 1/2, and Y = X + C + standard normal noise.
fn linear_semipartial_table(n: usize, seed: u64) -> DataTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut x = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let z1 = draw();
        let z2 = draw();
        let eps = draw();
        let xi = z1;
        let ci = 0.5 * z1 + 0.75f64.sqrt() * z2;
        x.push(xi);
        c.push(ci);
        y.push(xi + ci + eps);
    }
    DataTable::new(vec![("x".into(), x), ("c".into(), c), ("y".into(), y)]).unwrap()
}

#[test]
fn criterion_8_semipartial_behavior() {
    // Analytic linear semipartial R² for the system above, from its
    // covariance: Var(X + C) = 3, Var(Y) = 4, Cov(Y, C) = 3/2.
    let var_signal = 3.0;
    let var_y = var_signal + 1.0;
    let r2_full = var_signal / var_y;
    let cov_yc = 1.5;
    let r2_reduced = cov_yc * cov_yc / var_y;
    let sr2 = r2_full - r2_reduced; // 0.1875

    let request = |cfg| SemipartialRequest {
        y_cols: vec![2],
        x_cols: vec![0],
        c_cols: vec![1],
        cfg,
    };
    let linear: Vec<f64> = (0..5)
        .map(|seed| {
            let table = linear_semipartial_table(400, 600 + seed);
            semipartial_association(&table, &request(EstimatorConfig::default())).unwrap()
        })
        .collect();
    let linear_mean = mean(&linear);
    let linear_ok = (linear_mean - sr2).abs() <= SEMIPARTIAL_LINEAR_TOL;

    // Conditional independence: Y and X share only the control C.
    let confounded: Vec<f64> = (0..3)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);
            let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
            let n = 400;
            let mut x = Vec::with_capacity(n);
            let mut c = Vec::with_capacity(n);
            let mut y = Vec::with_capacity(n);
            for _ in 0..n {
                let ci = draw();
                y.push(ci.sin() + 0.3 * draw());
                x.push(ci * ci + 0.3 * draw());
                c.push(ci);
            }
            let table =
                DataTable::new(vec![("x".into(), x), ("c".into(), c), ("y".into(), y)]).unwrap();
            semipartial_association(&table, &request(EstimatorConfig::default())).unwrap()
        })
        .collect();
    let confounded_mean = mean(&confounded);
    let confounded_ok = confounded_mean <= SEMIPARTIAL_CONFOUNDED_MAX;

    report(
        8,
        "semipartial-behavior",
        linear_ok && confounded_ok,
        &format!(
            "linear mean={linear_mean:.4} (analytic {sr2}, tol {SEMIPARTIAL_LINEAR_TOL}); confounded mean={confounded_mean:.4} (<= {SEMIPARTIAL_CONFOUNDED_MAX})"
        ),
    );
}

#[test]
fn criterion_9_quadratic_scaling() {
    let cfg = EstimatorConfig::default();
    let sizes = [100usize, 200, 400, 800];
    let mut points = Vec::with_capacity(sizes.len());
    for (i, &n) in sizes.iter().enumerate() {
        let data = generate_relationship(&RelationshipSpec {
            family: Family::GaussianR2Half,
            n,
            noise_sigma: 0.0,
            seed: 900 + i as u64,
            x_dim: 1,
        })
        .unwrap();
        let grouping = data.grouping();
        // Warm caches, then take the median of three timed runs.
        estimate_association(&data.table, &grouping, &cfg).unwrap();
        let mut times: Vec<f64> = (0..3)
            .map(|_| {
                let start = Instant::now();
                estimate_association(&data.table, &grouping, &cfg).unwrap();
                start.elapsed().as_secs_f64()
            })
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.push(((n as f64).ln(), times[1].ln()));
    }
    // Least-squares slope of ln(time) on ln(n).
    let mx = mean(&points.iter().map(|p| p.0).collect::<Vec<_>>());
    let my = mean(&points.iter().map(|p| p.1).collect::<Vec<_>>());
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let pass = slope >= TIMING_SLOPE_BAND.0 && slope <= TIMING_SLOPE_BAND.1;
    report(
        9,
        "quadratic-scaling",
        pass,
        &format!("log-log slope={slope:.3}, band [{}, {}]", TIMING_SLOPE_BAND.0, TIMING_SLOPE_BAND.1),
    );
}
