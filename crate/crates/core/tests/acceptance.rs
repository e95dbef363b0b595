//! Acceptance criteria. Every test writes one `PASS`/`FAIL` line to stderr
//! (bypassing the test harness capture) before asserting.
//!
//! Run with `cargo test -p pbfree-core --test acceptance`.

use std::io::Write;
use std::time::{Duration, Instant};

use pbfree_core::beamforming::{select_on_off, Scheme, SchemeKind};
use pbfree_core::channel::{complex_normal_vec, sample_channels, CorrelationFactor, CorrelationRegime};
use pbfree_core::montecarlo::{
    crossing_power, exhaustive_oracle, independence_checks, run_trials, scaling_regression, trial_rng, CountBasis,
    ScenarioConfig, TrialSet,
};
use pbfree_core::stats::mean_and_std;
use pbfree_core::theory::{
    activation_prob_quadrature, lognormal_params, outage_closed_form, rate_upper_bound, rop_lower, rop_upper,
    FitCoefficients,
};
use rand::Rng;

fn report(id: u32, name: &str, pass: bool, detail: String, elapsed: Duration, budget: Duration) {
    let in_time = elapsed <= budget;
    let verdict = if pass && in_time { "PASS" } else { "FAIL" };
    let line = format!(
        "criterion {id:>2} [{verdict}] {name}: {detail} ({:.2} s of {} s)\n",
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
    assert!(in_time, "criterion {id} ({name}) exceeded its runtime budget");
}

fn phase_free(n: usize, trials: usize, seed: u64) -> TrialSet {
    run_trials(&ScenarioConfig {
        n_elements: n,
        trials,
        seed,
        ..ScenarioConfig::default()
    })
    .unwrap()
}

fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let count = ((to - from) / step).round() as usize;
    (0..=count).map(|k| from + step * k as f64).collect()
}

#[test]
fn criterion_01_activation_quadrature() {
    let start = Instant::now();
    let q = activation_prob_quadrature().unwrap();
    let elapsed = start.elapsed();
    let checks = [
        (q.p_a1, 0.0182, 5e-4),
        (q.p_a2, 0.0026, 5e-4),
        (q.p_a3, 0.0755, 5e-4),
        (q.p_a4, 0.0286, 5e-4),
        (q.p_geq, 0.125, 1e-3),
        (q.p_leq, 0.125, 1e-3),
        (q.p_a, 0.5, 1e-3),
    ];
    let pass = checks.iter().all(|(v, want, tol)| (v - want).abs() <= *tol);
    let detail = format!(
        "P_A1..4 = {:.4} {:.4} {:.4} {:.4}, subtotals {:.4} {:.4}, P_a = {:.6}",
        q.p_a1, q.p_a2, q.p_a3, q.p_a4, q.p_geq, q.p_leq, q.p_a
    );
    report(1, "activation probability quadrature", pass, detail, elapsed, Duration::from_secs(1));
}

#[test]
fn criterion_02_activation_probability() {
    let start = Instant::now();
    let a = phase_free(100, 10_000, 201).activation(CountBasis::FirstStage);
    let b = phase_free(5000, 10_000, 202).activation(CountBasis::FirstStage);
    let elapsed = start.elapsed();
    let pass = (a.p_a_hat - 0.542).abs() <= 0.010 && (b.p_a_hat - 0.5058).abs() <= 0.007;
    let detail = format!("p_a_hat(100) = {:.4}, p_a_hat(5000) = {:.4}", a.p_a_hat, b.p_a_hat);
    report(2, "simulated activation probability", pass, detail, elapsed, Duration::from_secs(120));
}

#[test]
fn criterion_03_mean_activation() {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, n) in [10usize, 40, 100, 200].into_iter().enumerate() {
        let s = phase_free(n, 10_000, 301 + k as u64).activation(CountBasis::FirstStage);
        pass &= s.mean_na >= n as f64 / 2.0 - 2.0 * s.std_error_na;
        if n == 40 {
            pass &= (0.55..=0.65).contains(&(s.mean_na / 40.0));
        }
        parts.push(format!("N={n}: {:.3}", s.mean_na / n as f64));
    }
    let detail = format!("mean N_a / N {}", parts.join(", "));
    report(3, "mean activated fraction", pass, detail, start.elapsed(), Duration::from_secs(30));
}

#[test]
fn criterion_04_concentration() {
    let start = Instant::now();
    let a = phase_free(100, 10_000, 401).activation(CountBasis::FirstStage);
    let b = phase_free(5000, 10_000, 402).activation(CountBasis::FirstStage);
    let elapsed = start.elapsed();
    let (ca, cb) = (a.concentration(0.02), b.concentration(0.02));
    let pass = (ca - 0.121).abs() <= 0.02 && (cb - 0.9102).abs() <= 0.02;
    let detail = format!("P(|N_a - mean| <= 2% mean): N=100 {ca:.4}, N=5000 {cb:.4}");
    report(4, "activation concentration", pass, detail, elapsed, Duration::from_secs(180));
}

#[test]
fn criterion_05_scaling_law() {
    let start = Instant::now();
    let r = scaling_regression(&[16, 32, 64, 128, 256], 2000, 501).unwrap();
    let elapsed = start.elapsed();
    let pass = (r.slope - 2.0).abs() <= 0.15;
    report(5, "quadratic scaling law", pass, format!("log-log slope {:.4}", r.slope), elapsed, Duration::from_secs(60));
}

#[test]
fn criterion_06_lognormal_fit() {
    let start = Instant::now();
    let mut config = ScenarioConfig {
        n_elements: 200,
        trials: 10_000,
        seed: 601,
        rate_target: 1.0,
        power_grid_dbm: grid(-50.0, 10.0, 0.5),
        ..ScenarioConfig::default()
    };
    config.regime = CorrelationRegime::Iid;
    let set = run_trials(&config).unwrap();
    let logs: Vec<f64> = set.gains().iter().map(|g| g.ln()).collect();
    let (mean, std) = mean_and_std(&logs);
    let coeffs = FitCoefficients::UNCORRELATED;
    let p = lognormal_params(200, &coeffs);
    let mut pass = (mean - p.mu).abs() <= 0.1 && (std - p.sigma).abs() <= 0.05;

    let mut worst = 1.0f64;
    let mut compared = 0;
    for (point, budget) in set.summarize().unwrap().iter().zip(config.budgets().unwrap()) {
        let theory = outage_closed_form(config.rate_target, &budget, 200, &coeffs).unwrap();
        if (1e-2..=1.0).contains(&theory) {
            compared += 1;
            let ratio = point.outage.value / theory;
            let off = if ratio > 0.0 { ratio.max(1.0 / ratio) } else { f64::INFINITY };
            worst = worst.max(off);
        }
    }
    pass &= compared > 0 && worst <= 2.0;
    let detail = format!(
        "ln H mean {mean:.4} vs {:.4}, std {std:.4} vs {:.4}, worst outage ratio {worst:.3} over {compared} points",
        p.mu, p.sigma
    );
    report(6, "log-normal fit at N=200", pass, detail, start.elapsed(), Duration::from_secs(60));
}

#[test]
fn criterion_07_rate_bound() {
    let start = Instant::now();
    let wavelength = ScenarioConfig::default().wavelength();
    let r_source = pbfree_core::channel::far_field_source_distance(50, wavelength);
    let mut pass = true;
    let mut max_gap = f64::NEG_INFINITY;
    let mut worst_excess = f64::NEG_INFINITY;
    for regime in [CorrelationRegime::Iid, CorrelationRegime::SpatiallyCorrelated] {
        for (k, n) in [50usize, 100, 200].into_iter().enumerate() {
            let config = ScenarioConfig {
                n_elements: n,
                regime,
                trials: 10_000,
                seed: 701 + k as u64 + 10 * (regime == CorrelationRegime::SpatiallyCorrelated) as u64,
                power_grid_dbm: grid(-20.0, 30.0, 2.0),
                r_source_override: Some(r_source),
                ..ScenarioConfig::default()
            };
            let set = run_trials(&config).unwrap();
            let coeffs = FitCoefficients::for_regime(regime);
            for (point, budget) in set.summarize().unwrap().iter().zip(config.budgets().unwrap()) {
                let bound = rate_upper_bound(&budget, n, &coeffs);
                let excess = point.rate.value - (bound + 3.0 * point.rate.std_error);
                worst_excess = worst_excess.max(excess);
                max_gap = max_gap.max(bound - point.rate.value);
                pass &= excess <= 0.0 && bound - point.rate.value <= 0.5;
            }
        }
    }
    let detail = format!("largest bound gap {max_gap:.3} bpcu, largest excess over bound + 3 se {worst_excess:.4}");
    report(7, "ergodic rate bound", pass, detail, start.elapsed(), Duration::from_secs(120));
}

fn impaired(scheme: SchemeKind, rate_target: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let config = ScenarioConfig {
        n_elements: 40,
        regime: CorrelationRegime::SpatiallyCorrelated,
        kappa: Some(0.0),
        scheme,
        rate_target,
        trials: 10_000,
        seed: 801,
        power_grid_dbm: grid(-40.0, 30.0, 1.0),
        ..ScenarioConfig::default()
    };
    let summary = run_trials(&config).unwrap().summarize().unwrap();
    (
        config.power_grid_dbm.clone(),
        summary.iter().map(|p| p.outage.value).collect(),
        summary.iter().map(|p| p.rate.value).collect(),
    )
}

#[test]
fn criterion_08_impairment_advantage() {
    let start = Instant::now();
    let (grid, out_pf, rate_pf) = impaired(SchemeKind::PhaseFree, 0.5);
    let mut pass = true;
    let mut parts = Vec::new();
    let p_pf = crossing_power(&grid, &out_pf, 0.1, true);
    for kind in [SchemeKind::ClassicalPb, SchemeKind::Rpsa] {
        let (_, out, rate) = impaired(kind, 0.5);
        let outage_gap = match (p_pf, crossing_power(&grid, &out, 0.1, true)) {
            (Some(a), Some(b)) => b - a,
            _ => f64::NAN,
        };
        pass &= (3.0..=7.0).contains(&outage_gap);
        let mut rate_gaps = Vec::new();
        for level in [1.0, 2.0, 3.0] {
            let gap = match (
                crossing_power(&grid, &rate_pf, level, false),
                crossing_power(&grid, &rate, level, false),
            ) {
                (Some(a), Some(b)) => b - a,
                _ => f64::NAN,
            };
            pass &= (3.0..=7.0).contains(&gap);
            rate_gaps.push(format!("{gap:.2}"));
        }
        parts.push(format!(
            "{}: outage gap {outage_gap:.2} dB, rate gaps at 1/2/3 bpcu {} dB",
            kind.label(),
            rate_gaps.join("/")
        ));
    }
    report(8, "advantage under impairments", pass, parts.join("; "), start.elapsed(), Duration::from_secs(300));
}

#[test]
fn criterion_09_parity_without_impairments() {
    let start = Instant::now();
    let rates: Vec<Vec<f64>> = [SchemeKind::PhaseFree, SchemeKind::ClassicalPb, SchemeKind::Rpsa]
        .into_iter()
        .map(|scheme| {
            let config = ScenarioConfig {
                n_elements: 40,
                scheme,
                trials: 10_000,
                seed: 901,
                ..ScenarioConfig::default()
            };
            let summary = run_trials(&config).unwrap().summarize().unwrap();
            summary.iter().map(|p| p.rate.value).collect()
        })
        .collect();
    let mut worst = 0.0f64;
    for k in 0..rates[0].len() {
        let col: Vec<f64> = rates.iter().map(|r| r[k]).collect();
        let spread = col.iter().copied().fold(f64::MIN, f64::max) - col.iter().copied().fold(f64::MAX, f64::min);
        worst = worst.max(spread);
    }
    let pass = worst <= 0.5;
    report(9, "parity without impairments", pass, format!("largest rate spread {worst:.3} bpcu"), start.elapsed(), Duration::from_secs(120));
}

#[test]
fn criterion_10_rop_sandwich() {
    let start = Instant::now();
    let s = phase_free(100, 10_000, 1001).activation(CountBasis::FirstStage);
    let mut pass = true;
    let mut worst = f64::NEG_INFINITY;
    for n_thr in 31..=50 {
        let emp = s.rop_empirical(n_thr);
        let lower = rop_lower(100, s.p_a_hat, n_thr).unwrap();
        let upper = rop_upper(100, s.p_a_hat, n_thr).unwrap();
        worst = worst.max((lower - 0.01) - emp).max(emp - (upper + 0.01));
        pass &= emp >= lower - 0.01 && emp <= upper + 0.01;
    }
    let detail = format!("p_a_hat {:.4}, n_thr 31..=50, worst violation margin {worst:.4}", s.p_a_hat);
    report(10, "resource outage sandwich", pass, detail, start.elapsed(), Duration::from_secs(60));
}

#[test]
fn criterion_11_oracle_feasibility() {
    let start = Instant::now();
    let factor = CorrelationFactor::Identity(10);
    let scheme = Scheme::phase_free();
    let mut violations = 0;
    let mut ratio_sum = 0.0;
    for t in 0..500 {
        let mut rng = trial_rng(1101, t);
        let ch = sample_channels(&mut rng, &factor);
        let oracle = exhaustive_oracle(&ch.h, &ch.g).unwrap();
        let state = scheme.apply(&ch.h, &ch.g, None).unwrap();
        let gain = pbfree_core::beamforming::effective_gain(&ch.h, &ch.g, &state).unwrap();
        if gain > oracle.best_gain * (1.0 + 1e-12) {
            violations += 1;
        }
        ratio_sum += gain / oracle.best_gain;
    }
    let detail = format!("{violations} violations in 500 draws, mean gain ratio {:.4}", ratio_sum / 500.0);
    report(11, "exhaustive oracle feasibility", violations == 0, detail, start.elapsed(), Duration::from_secs(10));
}

#[test]
fn criterion_12_weight_dominance() {
    let start = Instant::now();
    let r = independence_checks(100_000, 10_000, 1201, 10.0).unwrap();
    let elapsed = start.elapsed();
    let pass = (r.weight_dominance - 0.992).abs() <= 0.005;
    let detail = format!("P(w_(N-1) > 10 w_1) = {:.4} at N = 1e5", r.weight_dominance);
    report(12, "weight dominance limit", pass, detail, elapsed, Duration::from_secs(120));
}

#[test]
fn criterion_13_pairwise_independence() {
    let start = Instant::now();
    let r = independence_checks(200, 100_000, 1301, 10.0).unwrap();
    let elapsed = start.elapsed();
    let pass = (r.joint_cdf_00 - r.product_cdf_00).abs() <= 0.02 && (r.product_cdf_00 - 0.25).abs() <= 0.01;
    let detail = format!("joint {:.4}, product {:.4}", r.joint_cdf_00, r.product_cdf_00);
    report(13, "asymptotic independence", pass, detail, elapsed, Duration::from_secs(60));
}

#[test]
fn criterion_14_structural_invariants() {
    let start = Instant::now();
    let mut dominance = 0;
    let mut monotone = 0;
    let mut counter = 0;
    for t in 0..10_000u64 {
        let mut rng = trial_rng(1401, t);
        let n = rng.random_range(1..=64usize);
        let h = complex_normal_vec(&mut rng, n);
        let g = complex_normal_vec(&mut rng, n);
        let c: Vec<_> = h.iter().zip(&g).map(|(a, b)| a * b).collect();
        let mut norms = Vec::new();
        let (_, trace) = select_on_off(&c, |_, s| norms.push(s));
        let full = trace.full_sum.norm();
        if trace.first_stage_sum.norm() < full * (1.0 - 1e-12) {
            dominance += 1;
        }
        let mut last = trace.first_stage_sum.norm();
        for s in norms {
            if s < last {
                monotone += 1;
                break;
            }
            last = s;
        }
        if trace.membership_tests + trace.improvement_tests > 2 * n {
            counter += 1;
        }
    }
    let pass = dominance + monotone + counter == 0;
    let detail = format!("violations: dominance {dominance}, monotonicity {monotone}, counter {counter}");
    report(14, "structural invariants", pass, detail, start.elapsed(), Duration::from_secs(10));
}
