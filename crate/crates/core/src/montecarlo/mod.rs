//! Seeded trial engine and the estimators built on it.
//!
//! Trial `t` draws from its own ChaCha8 stream (`seed`, stream `t`), so the
//! outcome vector does not depend on how rayon schedules the work. Channel
//! gain and activation counts do not depend on transmit power; every trial is
//! therefore run once and the SNR is rescaled per power point.

mod checks;
mod estimators;
mod oracle;

pub use checks::{activation_correlation, independence_checks, IndependenceReport};
pub use estimators::{
    activation_stats, crossing_power, estimate_outage, estimate_rate, log_log_slope, scaling_regression,
    ActivationStats, CountBasis, MetricEstimate, ScalingPoint, ScalingResult,
};
pub use oracle::{exhaustive_oracle, OracleResult, ORACLE_MAX_ELEMENTS};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beamforming::{cascade, dominant_direction_of, PhaseErrorModel, PhaseQuantization, Scheme, SchemeKind};
use crate::channel::{
    build_geometry, correlation_factor, dbm_to_watts, far_field_source_distance, sample_channels,
    sample_phase_errors, wavelength, CorrelationFactor, CorrelationRegime, LinkBudget, DEFAULT_CARRIER_HZ,
};
use crate::error::{Error, Result};

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One simulated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_elements: usize,
    pub carrier_freq: f64,
    /// Element spacing in meters; `None` means lambda / 8.
    pub d_h: Option<f64>,
    pub d_v: Option<f64>,
    pub regime: CorrelationRegime,
    /// Von Mises concentration of the phase errors; `None` disables them.
    pub kappa: Option<f64>,
    pub r_dest: f64,
    pub noise_dbm: f64,
    pub power_grid_dbm: Vec<f64>,
    pub rate_target: f64,
    pub scheme: SchemeKind,
    pub quantization: PhaseQuantization,
    pub error_model: PhaseErrorModel,
    pub amplitude_coupling: bool,
    pub ideal_full_reflection: bool,
    pub trials: usize,
    pub seed: u64,
    /// Fixed source distance in meters instead of the far-field rule.
    pub r_source_override: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_elements: 40,
            carrier_freq: DEFAULT_CARRIER_HZ,
            d_h: None,
            d_v: None,
            regime: CorrelationRegime::Iid,
            kappa: None,
            r_dest: 10.0,
            noise_dbm: -90.0,
            power_grid_dbm: (0..=30).map(|k| -40.0 + 2.0 * k as f64).collect(),
            rate_target: 1.0,
            scheme: SchemeKind::PhaseFree,
            quantization: PhaseQuantization::default(),
            error_model: PhaseErrorModel::default(),
            amplitude_coupling: true,
            ideal_full_reflection: true,
            trials: 10_000,
            seed: 1,
            r_source_override: None,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_elements == 0 {
            return Err(Error::invalid("n_elements", "must be at least 1"));
        }
        if !(self.carrier_freq > 0.0 && self.carrier_freq.is_finite()) {
            return Err(Error::invalid("carrier_freq", format!("must be positive, got {}", self.carrier_freq)));
        }
        for (name, v) in [("d_h", self.d_h), ("d_v", self.d_v), ("r_source_override", self.r_source_override)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::invalid(name, format!("must be positive, got {v}")));
                }
            }
        }
        if let Some(k) = self.kappa {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::invalid("kappa", format!("must be non-negative and finite, got {k}")));
            }
        }
        if !(self.r_dest > 0.0 && self.r_dest.is_finite()) {
            return Err(Error::invalid("r_dest", format!("must be positive, got {}", self.r_dest)));
        }
        if !self.noise_dbm.is_finite() {
            return Err(Error::invalid("noise_dbm", "must be finite"));
        }
        if self.power_grid_dbm.is_empty() {
            return Err(Error::invalid("power_grid_dbm", "must not be empty"));
        }
        if self.power_grid_dbm.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("power_grid_dbm", "must be finite"));
        }
        if self.power_grid_dbm.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("power_grid_dbm", "must be strictly increasing"));
        }
        if !(self.rate_target >= 0.0 && self.rate_target.is_finite()) {
            return Err(Error::invalid("rate_target", format!("must be non-negative, got {}", self.rate_target)));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.scheme == SchemeKind::Rpsa && self.quantization == PhaseQuantization::Continuous {
            return Err(Error::invalid("quantization", "rpsa needs a finite number of levels"));
        }
        if let PhaseQuantization::Levels(l) = self.quantization {
            if l < 2 {
                return Err(Error::invalid("quantization", format!("need at least 2 levels, got {l}")));
            }
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.carrier_freq)
    }

    pub fn spacing(&self) -> (f64, f64) {
        let default = self.wavelength() / 8.0;
        (self.d_h.unwrap_or(default), self.d_v.unwrap_or(default))
    }

    pub fn scheme_settings(&self) -> Scheme {
        Scheme {
            kind: self.scheme,
            quantization: self.quantization,
            amplitude_coupling: self.amplitude_coupling,
            ideal_full_reflection: self.ideal_full_reflection,
            error_model: self.error_model,
            ..Scheme::default()
        }
    }

    pub fn r_source(&self) -> f64 {
        self.r_source_override
            .unwrap_or_else(|| far_field_source_distance(self.n_elements, self.wavelength()))
    }

    /// Link budget at each point of the power grid.
    pub fn budgets(&self) -> Result<Vec<LinkBudget>> {
        let noise = dbm_to_watts(self.noise_dbm);
        self.power_grid_dbm
            .iter()
            .map(|&p| LinkBudget::with_source_distance(self.r_source(), self.r_dest, self.wavelength(), dbm_to_watts(p), noise))
            .collect()
    }

    pub fn correlation_factor(&self) -> Result<CorrelationFactor> {
        match self.regime {
            CorrelationRegime::Iid => Ok(CorrelationFactor::Identity(self.n_elements)),
            CorrelationRegime::SpatiallyCorrelated => {
                let (d_h, d_v) = self.spacing();
                let geometry = build_geometry(self.n_elements, d_h, d_v, self.wavelength())?;
                correlation_factor(&geometry, self.regime)
            }
        }
    }
}

/// Result of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// Channel gain `|sum_n h_n g_n v_n|^2`.
    pub gain: f64,
    pub n_active: usize,
    /// Elements switched on by the arc test; equals `n_active` for the
    /// benchmark schemes.
    pub n_active_first_stage: usize,
    pub dominant_direction: f64,
}

/// All trials of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub config: ScenarioConfig,
    pub outcomes: Vec<TrialOutcome>,
}

/// Outage and rate at one transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPointSummary {
    pub tx_power_dbm: f64,
    pub outage: MetricEstimate,
    pub rate: MetricEstimate,
}

impl TrialSet {
    pub fn gains(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.gain).collect()
    }

    pub fn summarize(&self) -> Result<Vec<PowerPointSummary>> {
        let gains = self.gains();
        let budgets = self.config.budgets()?;
        let outage = estimate_outage(&gains, &budgets, self.config.rate_target);
        Ok(self
            .config
            .power_grid_dbm
            .iter()
            .zip(&budgets)
            .zip(outage)
            .map(|((&p, b), out)| PowerPointSummary {
                tx_power_dbm: p,
                outage: out,
                rate: estimate_rate(&gains, b),
            })
            .collect())
    }

    pub fn activation(&self, basis: CountBasis) -> ActivationStats {
        activation_stats(&self.outcomes, self.config.n_elements, basis)
    }
}

/// Runs one trial with its own generator.
pub fn run_trial(config: &ScenarioConfig, factor: &CorrelationFactor, scheme: &Scheme, trial: u64) -> Result<TrialOutcome> {
    let mut rng = trial_rng(config.seed, trial);
    let channels = sample_channels(&mut rng, factor);
    let errors = match config.kappa {
        Some(kappa) => Some(sample_phase_errors(&mut rng, channels.len(), kappa)?),
        None => None,
    };
    let (state, trace) = scheme.apply_traced(&channels.h, &channels.g, errors.as_deref())?;
    let gain = crate::beamforming::effective_gain(&channels.h, &channels.g, &state)?;
    let (n_active, n_first, theta) = match trace {
        Some(t) => (state.n_active(), t.first_stage_count, t.dominant_direction),
        None => {
            let on = state.amplitudes.iter().filter(|&&a| a > 0.0).count();
            (on, on, dominant_direction_of(&cascade(&channels.h, &channels.g)))
        }
    };
    Ok(TrialOutcome {
        gain,
        n_active,
        n_active_first_stage: n_first,
        dominant_direction: theta,
    })
}

/// Runs every trial of `config` in parallel. The outcome vector is in trial
/// order and bitwise identical for any thread count.
pub fn run_trials(config: &ScenarioConfig) -> Result<TrialSet> {
    config.validate()?;
    let factor = config.correlation_factor()?;
    let scheme = config.scheme_settings();
    let outcomes = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(config, &factor, &scheme, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialSet {
        config: config.clone(),
        outcomes,
    })
}
