use rayon::prelude::*;

use super::{trial_rng, TrialOutcome};
use crate::beamforming::{effective_gain, phase_free_pb};
use crate::channel::{sample_channels, CorrelationFactor, LinkBudget};
use crate::error::{Error, Result};
use crate::stats::{linear_fit, mean_and_std_error};

/// A Monte Carlo estimate with its standard error (sample std / sqrt(trials)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: usize,
}

fn rate_of(gain: f64, budget: &LinkBudget) -> f64 {
    (budget.snr_scale() * gain).ln_1p() / std::f64::consts::LN_2
}

/// Fraction of trials with `log2(1 + L rho H) < rate`, one estimate per
/// budget. The standard error is the binomial one.
pub fn estimate_outage(gains: &[f64], budgets: &[LinkBudget], rate: f64) -> Vec<MetricEstimate> {
    let n = gains.len();
    budgets
        .iter()
        .map(|b| {
            let hits = gains.iter().filter(|&&g| rate_of(g, b) < rate).count();
            let p = if n == 0 { f64::NAN } else { hits as f64 / n as f64 };
            MetricEstimate {
                value: p,
                std_error: (p * (1.0 - p) / n as f64).sqrt(),
                trials: n,
            }
        })
        .collect()
}

/// Sample mean of `log2(1 + L rho H)`.
pub fn estimate_rate(gains: &[f64], budget: &LinkBudget) -> MetricEstimate {
    let rates: Vec<f64> = gains.iter().map(|&g| rate_of(g, budget)).collect();
    let (value, std_error) = mean_and_std_error(&rates);
    MetricEstimate {
        value,
        std_error,
        trials: gains.len(),
    }
}

/// Which activation count the statistics are computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountBasis {
    /// Elements switched on by the arc test alone.
    #[default]
    FirstStage,
    /// Elements on after both stages.
    Final,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivationStats {
    pub n_elements: usize,
    pub basis: CountBasis,
    pub counts: Vec<usize>,
    pub mean_na: f64,
    pub std_error_na: f64,
    pub p_a_hat: f64,
}

impl ActivationStats {
    /// Fraction of trials with `N_a <= n_thr`.
    pub fn rop_empirical(&self, n_thr: usize) -> f64 {
        self.fraction(|c| c <= n_thr)
    }

    /// Fraction of trials with `|N_a - mean| <= eps * mean`.
    pub fn concentration(&self, eps: f64) -> f64 {
        let m = self.mean_na;
        self.fraction(|c| (c as f64 - m).abs() <= eps * m)
    }

    /// Empirical `P(N_a - mean >= c)` next to the Hoeffding bound
    /// `exp(-2 c^2 / N)`.
    pub fn upper_deviation(&self, c: f64) -> (f64, f64) {
        let m = self.mean_na;
        let empirical = self.fraction(|k| k as f64 - m >= c);
        (empirical, (-2.0 * c * c / self.n_elements as f64).exp())
    }

    fn fraction(&self, pred: impl Fn(usize) -> bool) -> f64 {
        self.counts.iter().filter(|&&c| pred(c)).count() as f64 / self.counts.len() as f64
    }
}

pub fn activation_stats(outcomes: &[TrialOutcome], n_elements: usize, basis: CountBasis) -> ActivationStats {
    let counts: Vec<usize> = outcomes
        .iter()
        .map(|o| match basis {
            CountBasis::FirstStage => o.n_active_first_stage,
            CountBasis::Final => o.n_active,
        })
        .collect();
    let as_f64: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (mean_na, std_error_na) = mean_and_std_error(&as_f64);
    ActivationStats {
        n_elements,
        basis,
        counts,
        mean_na,
        std_error_na,
        p_a_hat: mean_na / n_elements as f64,
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::invalid("x", "need at least two points"));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("x", "log-log fit needs positive values"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    Ok(linear_fit(&lx, &ly).0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub n: usize,
    pub mean_gain: MetricEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub points: Vec<ScalingPoint>,
    pub slope: f64,
}

/// Mean phase-free channel gain over independent elements for each `n`, and
/// the log-log slope through the means.
pub fn scaling_regression(n_list: &[usize], trials: usize, seed: u64) -> Result<ScalingResult> {
    if n_list.len() < 3 {
        return Err(Error::invalid("n_list", "need at least three sizes"));
    }
    if n_list[0] == 0 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("n_list", "must be positive and strictly increasing"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    let mut points = Vec::with_capacity(n_list.len());
    for (k, &n) in n_list.iter().enumerate() {
        let factor = CorrelationFactor::Identity(n);
        let point_seed = seed.wrapping_add(k as u64);
        let gains = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(point_seed, t);
                let ch = sample_channels(&mut rng, &factor);
                let state = phase_free_pb(&ch.h, &ch.g, None)?;
                effective_gain(&ch.h, &ch.g, &state)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (value, std_error) = mean_and_std_error(&gains);
        points.push(ScalingPoint {
            n,
            mean_gain: MetricEstimate { value, std_error, trials },
        });
    }
    let x: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.mean_gain.value).collect();
    let slope = log_log_slope(&x, &y)?;
    Ok(ScalingResult { points, slope })
}

/// Power (same units as `grid`) at which a monotone curve first reaches
/// `target`, by linear interpolation between grid points. With
/// `log_values`, interpolation is done on `log10` of the curve (for outage
/// probabilities). Returns `None` when the curve never crosses `target`.
pub fn crossing_power(grid: &[f64], values: &[f64], target: f64, log_values: bool) -> Option<f64> {
    let tf = |v: f64| if log_values { v.log10() } else { v };
    let t = tf(target);
    for k in 1..grid.len().min(values.len()) {
        let (a, b) = (tf(values[k - 1]), tf(values[k]));
        let crosses = (a - t) * (b - t) <= 0.0 && a != b;
        if crosses && a.is_finite() && b.is_finite() {
            return Some(grid[k - 1] + (t - a) / (b - a) * (grid[k] - grid[k - 1]));
        }
        if b == t {
            return Some(grid[k]);
        }
    }
    None
}
