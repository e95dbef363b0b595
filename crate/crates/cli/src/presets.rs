//! Named experiment presets, one per figure. Each writes one or more CSV
//! files into the output directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use pbfree_core::beamforming::SchemeKind;
use pbfree_core::channel::{far_field_source_distance, CorrelationRegime};
use pbfree_core::montecarlo::{independence_checks, run_trials, scaling_regression, CountBasis, ScenarioConfig};
use pbfree_core::theory::{outage_closed_form, rate_upper_bound, rop_lower, rop_upper, FitCoefficients};

use crate::config::parse_grid;
use crate::table::OutputTable;

pub const PRESETS: [&str; 11] = [
    "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b", "fig6a", "fig6b", "fig7a", "fig7b",
];

pub const DEFAULT_TRIALS: usize = 10_000;
const DEFAULT_GRID: &str = "-40:2:30";
const SCHEMES: [SchemeKind; 3] = [SchemeKind::PhaseFree, SchemeKind::ClassicalPb, SchemeKind::Rpsa];
const REGIMES: [CorrelationRegime; 2] = [CorrelationRegime::Iid, CorrelationRegime::SpatiallyCorrelated];

#[derive(Debug, Clone)]
pub struct PresetOptions {
    pub seed: u64,
    pub trials: Option<usize>,
    pub power_grid_dbm: Option<Vec<f64>>,
}

impl Default for PresetOptions {
    fn default() -> Self {
        PresetOptions {
            seed: 1,
            trials: None,
            power_grid_dbm: None,
        }
    }
}

impl PresetOptions {
    fn trials(&self) -> usize {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    fn grid(&self) -> Vec<f64> {
        self.power_grid_dbm
            .clone()
            .unwrap_or_else(|| parse_grid(DEFAULT_GRID).expect("default grid"))
    }

    fn scenario(&self, offset: u64) -> ScenarioConfig {
        ScenarioConfig {
            trials: self.trials(),
            seed: self.seed.wrapping_add(offset),
            power_grid_dbm: self.grid(),
            ..ScenarioConfig::default()
        }
    }
}

pub fn run_preset(name: &str, opts: &PresetOptions, out: &Path) -> Result<Vec<PathBuf>> {
    if !out.is_dir() {
        bail!("output directory {} does not exist", out.display());
    }
    let tables = match name {
        "fig2b" => fig2b(opts)?,
        "fig3a" => fig3a(opts)?,
        "fig3b" => fig3b(opts)?,
        "fig4a" => fig4a(opts)?,
        "fig4b" => fig4b(opts)?,
        "fig5a" => outage_comparison(opts, "fig5a", CorrelationRegime::Iid, None, 2.0)?,
        "fig5b" => outage_comparison(opts, "fig5b", CorrelationRegime::SpatiallyCorrelated, Some(0.0), 0.5)?,
        "fig6a" => rate_comparison(opts, "fig6a", CorrelationRegime::Iid, None)?,
        "fig6b" => rate_comparison(opts, "fig6b", CorrelationRegime::SpatiallyCorrelated, Some(0.0))?,
        "fig7a" => rop(opts, "fig7a", 100)?,
        "fig7b" => rop(opts, "fig7b", 5000)?,
        other => bail!("unknown preset `{other}`, expected one of {}", PRESETS.join(", ")),
    };
    let mut written = Vec::new();
    for (file, table) in tables {
        table.save(out, &file)?;
        written.push(out.join(file));
    }
    Ok(written)
}

type Tables = Vec<(String, OutputTable)>;

fn fig2b(opts: &PresetOptions) -> Result<Tables> {
    let ns = [10, 20, 50, 100, 200, 300, 400, 500];
    let r = scaling_regression(&ns, opts.trials(), opts.seed)?;
    let mut t = OutputTable::new(&["n", "mean_gain"]);
    for p in &r.points {
        t.push(vec![p.n.into(), p.mean_gain.value.into()]);
    }
    t.push(vec!["slope".into(), r.slope.into()]);
    Ok(vec![("fig2b.csv".into(), t)])
}

fn fig3a(opts: &PresetOptions) -> Result<Tables> {
    let ns = [10, 20, 50, 100, 200, 500, 1000, 2000, 5000];
    let mut t = OutputTable::new(&["n", "p_a_hat", "std_error", "p_a_hat_final", "p_a_asymptotic"]);
    for (k, &n) in ns.iter().enumerate() {
        let set = run_trials(&ScenarioConfig {
            n_elements: n,
            power_grid_dbm: vec![0.0],
            ..opts.scenario(k as u64)
        })?;
        let first = set.activation(CountBasis::FirstStage);
        let last = set.activation(CountBasis::Final);
        t.push(vec![
            n.into(),
            first.p_a_hat.into(),
            (first.std_error_na / n as f64).into(),
            last.p_a_hat.into(),
            0.5.into(),
        ]);
    }
    Ok(vec![("fig3a.csv".into(), t)])
}

fn fig3b(opts: &PresetOptions) -> Result<Tables> {
    let ns = [2, 5, 10, 20, 50, 100, 200, 500, 1000];
    let trials = opts.trials().max(1000);
    let mut t = OutputTable::new(&["n", "joint_cdf_00", "product_cdf_00"]);
    for (k, &n) in ns.iter().enumerate() {
        let r = independence_checks(n, trials, opts.seed.wrapping_add(k as u64), 10.0)?;
        t.push(vec![n.into(), r.joint_cdf_00.into(), r.product_cdf_00.into()]);
    }
    Ok(vec![("fig3b.csv".into(), t)])
}

fn fig4a(opts: &PresetOptions) -> Result<Tables> {
    let mut tables = Vec::new();
    for (ri, regime) in REGIMES.into_iter().enumerate() {
        for (ni, n) in [40usize, 100, 200].into_iter().enumerate() {
            let config = ScenarioConfig {
                n_elements: n,
                regime,
                rate_target: 1.0,
                ..opts.scenario((ri * 3 + ni) as u64)
            };
            let summary = run_trials(&config)?.summarize()?;
            let coeffs = FitCoefficients::for_regime(regime);
            let mut t = OutputTable::new(&["tx_power_dbm", "scheme_or_theory", "outage", "std_error"]);
            for p in &summary {
                t.push(vec![p.tx_power_dbm.into(), "phase_free".into(), p.outage.value.into(), p.outage.std_error.into()]);
            }
            for (p, b) in config.power_grid_dbm.iter().zip(config.budgets()?) {
                let v = outage_closed_form(config.rate_target, &b, n, &coeffs)?;
                t.push(vec![(*p).into(), "theory".into(), v.into(), 0.0.into()]);
            }
            tables.push((format!("fig4a_n{n}_{}.csv", regime.label()), t));
        }
    }
    Ok(tables)
}

fn fig4b(opts: &PresetOptions) -> Result<Tables> {
    let mut tables = Vec::new();
    for (ri, regime) in REGIMES.into_iter().enumerate() {
        for (ni, n) in [50usize, 100, 200].into_iter().enumerate() {
            let mut config = ScenarioConfig {
                n_elements: n,
                regime,
                ..opts.scenario((ri * 3 + ni) as u64)
            };
            config.r_source_override = Some(far_field_source_distance(50, config.wavelength()));
            let summary = run_trials(&config)?.summarize()?;
            let coeffs = FitCoefficients::for_regime(regime);
            let mut t = OutputTable::new(&["tx_power_dbm", "scheme_or_theory", "rate", "std_error"]);
            for p in &summary {
                t.push(vec![p.tx_power_dbm.into(), "phase_free".into(), p.rate.value.into(), p.rate.std_error.into()]);
            }
            for (p, b) in config.power_grid_dbm.iter().zip(config.budgets()?) {
                t.push(vec![(*p).into(), "theory".into(), rate_upper_bound(&b, n, &coeffs).into(), 0.0.into()]);
            }
            tables.push((format!("fig4b_n{n}_{}.csv", regime.label()), t));
        }
    }
    Ok(tables)
}

fn comparison_config(opts: &PresetOptions, regime: CorrelationRegime, kappa: Option<f64>, scheme: SchemeKind) -> ScenarioConfig {
    ScenarioConfig {
        n_elements: 40,
        regime,
        kappa,
        scheme,
        ..opts.scenario(0)
    }
}

fn outage_comparison(opts: &PresetOptions, name: &str, regime: CorrelationRegime, kappa: Option<f64>, rate: f64) -> Result<Tables> {
    let mut t = OutputTable::new(&["tx_power_dbm", "scheme_or_theory", "outage", "std_error"]);
    for scheme in SCHEMES {
        let config = ScenarioConfig {
            rate_target: rate,
            ..comparison_config(opts, regime, kappa, scheme)
        };
        for p in run_trials(&config)?.summarize()? {
            t.push(vec![p.tx_power_dbm.into(), scheme.label().into(), p.outage.value.into(), p.outage.std_error.into()]);
        }
    }
    Ok(vec![(format!("{name}.csv"), t)])
}

fn rate_comparison(opts: &PresetOptions, name: &str, regime: CorrelationRegime, kappa: Option<f64>) -> Result<Tables> {
    let mut t = OutputTable::new(&["tx_power_dbm", "scheme_or_theory", "rate", "std_error"]);
    for scheme in SCHEMES {
        let config = comparison_config(opts, regime, kappa, scheme);
        for p in run_trials(&config)?.summarize()? {
            t.push(vec![p.tx_power_dbm.into(), scheme.label().into(), p.rate.value.into(), p.rate.std_error.into()]);
        }
    }
    Ok(vec![(format!("{name}.csv"), t)])
}

fn rop(opts: &PresetOptions, name: &str, n: usize) -> Result<Tables> {
    let set = run_trials(&ScenarioConfig {
        n_elements: n,
        power_grid_dbm: vec![0.0],
        ..opts.scenario(0)
    })?;
    let stats = set.activation(CountBasis::FirstStage);
    let step = (n / 500).max(1);
    let mut tables = Vec::new();
    for (label, p_a) in [("pa_half", 0.5), ("pa_sim", stats.p_a_hat)] {
        let mut t = OutputTable::new(&["n_thr", "rop_empirical", "rop_lower", "rop_upper"]);
        for n_thr in (0..=n).step_by(step) {
            t.push(vec![
                n_thr.into(),
                stats.rop_empirical(n_thr).into(),
                rop_lower(n, p_a, n_thr)?.into(),
                rop_upper(n, p_a, n_thr)?.into(),
            ]);
        }
        tables.push((format!("{name}_{label}.csv"), t));
    }
    Ok(tables)
}
