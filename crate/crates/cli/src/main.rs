//! `pbfree`: run scenarios, figure presets and closed-form evaluations.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! runtime and I/O failures.

mod config;
mod presets;
mod table;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use pbfree_core::channel::{dbm_to_watts, wavelength, CorrelationRegime, LinkBudget, DEFAULT_CARRIER_HZ};
use pbfree_core::montecarlo::{run_trials, CountBasis};
use pbfree_core::theory::{
    activation_prob_quadrature, lognormal_params, outage_closed_form, rate_upper_bound, rop_lower_detail, rop_upper,
    FitCoefficients,
};

use crate::config::{parse_config, parse_grid};
use crate::presets::{run_preset, PresetOptions};
use crate::table::OutputTable;

#[derive(Parser)]
#[command(name = "pbfree", version, about = "Phase-shift-free RIS beamforming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the scenario described by a key=value file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named figure preset.
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        /// Power grid override, `start:step:stop` or a comma list (dBm).
        #[arg(long, allow_hyphen_values = true)]
        power_grid_dbm: Option<String>,
    },
    /// Evaluate closed-form results; prints CSV on standard output.
    Theory {
        #[command(subcommand)]
        which: TheoryCommand,
    },
}

#[derive(Subcommand)]
enum TheoryCommand {
    /// Activation probability components by 2-D quadrature.
    PaQuadrature,
    /// Resource outage bounds.
    Rop {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        pa: f64,
        /// Single threshold; all thresholds 0..=n when omitted.
        #[arg(long)]
        nthr: Option<usize>,
    },
    /// Outage probability under the log-normal gain model.
    Outage {
        #[command(flatten)]
        link: LinkArgs,
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
    },
    /// Upper bound on the ergodic rate.
    RateBound {
        #[command(flatten)]
        link: LinkArgs,
    },
}

#[derive(clap::Args)]
struct LinkArgs {
    #[arg(long)]
    n: usize,
    /// `iid` or `correlated`.
    #[arg(long, default_value = "iid")]
    regime: String,
    /// Transmit powers, `start:step:stop` or a comma list (dBm).
    #[arg(long, allow_hyphen_values = true, default_value = "-40:2:30")]
    power_dbm: String,
    /// Use this value of `L rho` directly instead of a power grid.
    #[arg(long)]
    lrho: Option<f64>,
    #[arg(long, default_value_t = -90.0, allow_hyphen_values = true)]
    noise_dbm: f64,
    #[arg(long, default_value_t = 10.0)]
    r_dest: f64,
    /// Source distance in meters; far-field rule for `n` when omitted.
    #[arg(long)]
    r_source: Option<f64>,
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.into())
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            config,
            seed,
            trials,
            out,
        } => run(&config, seed, trials, &out),
        Command::Preset {
            name,
            out,
            seed,
            trials,
            power_grid_dbm,
        } => {
            if !presets::PRESETS.contains(&name.as_str()) {
                return Err(usage(anyhow::anyhow!(
                    "unknown preset `{name}`, expected one of {}",
                    presets::PRESETS.join(", ")
                )));
            }
            if trials == Some(0) {
                return Err(usage(anyhow::anyhow!("--trials must be at least 1")));
            }
            let grid = power_grid_dbm
                .map(|g| parse_grid(&g).map_err(|e| usage(anyhow::anyhow!("--power-grid-dbm: {e}"))))
                .transpose()?;
            let opts = PresetOptions {
                seed,
                trials,
                power_grid_dbm: grid,
            };
            for path in run_preset(&name, &opts, &out)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Theory { which } => {
            let table = theory(which)?;
            table.write_to(std::io::stdout().lock())?;
            Ok(())
        }
    }
}

fn run(config_path: &Path, seed: Option<u64>, trials: Option<usize>, out: &Path) -> Result<(), Failure> {
    let mut config = parse_config(config_path).map_err(usage)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(t) = trials {
        config.trials = t;
    }
    config.validate().map_err(usage)?;
    if !out.is_dir() {
        return Err(anyhow::anyhow!("output directory {} does not exist", out.display()).into());
    }
    let set = run_trials(&config).context("simulation failed")?;

    let mut curve = OutputTable::new(&["tx_power_dbm", "outage", "outage_std_error", "rate", "rate_std_error"]);
    for p in set.summarize()? {
        curve.push(vec![
            p.tx_power_dbm.into(),
            p.outage.value.into(),
            p.outage.std_error.into(),
            p.rate.value.into(),
            p.rate.std_error.into(),
        ]);
    }
    curve.save(out, "run.csv")?;

    let first = set.activation(CountBasis::FirstStage);
    let last = set.activation(CountBasis::Final);
    let gains = set.gains();
    let mean_gain = gains.iter().sum::<f64>() / gains.len() as f64;
    let mut summary = OutputTable::new(&["n_elements", "trials", "mean_gain", "mean_na_first_stage", "mean_na", "p_a_hat"]);
    summary.push(vec![
        config.n_elements.into(),
        config.trials.into(),
        mean_gain.into(),
        first.mean_na.into(),
        last.mean_na.into(),
        first.p_a_hat.into(),
    ]);
    summary.save(out, "activation.csv")?;
    println!("{}", out.join("run.csv").display());
    println!("{}", out.join("activation.csv").display());
    Ok(())
}

fn budgets(link: &LinkArgs) -> Result<Vec<(Option<f64>, LinkBudget)>, Failure> {
    if link.n == 0 {
        return Err(usage(anyhow::anyhow!("--n must be at least 1")));
    }
    let lambda = wavelength(DEFAULT_CARRIER_HZ);
    let r_source = link
        .r_source
        .unwrap_or_else(|| pbfree_core::channel::far_field_source_distance(link.n, lambda));
    let base = LinkBudget::with_source_distance(r_source, link.r_dest, lambda, 1.0, dbm_to_watts(link.noise_dbm))
        .map_err(usage)?;
    if let Some(lrho) = link.lrho {
        if !(lrho >= 0.0 && lrho.is_finite()) {
            return Err(usage(anyhow::anyhow!("--lrho must be non-negative")));
        }
        let b = LinkBudget {
            path_gain: 1.0,
            transmit_snr: lrho,
            ..base
        };
        return Ok(vec![(None, b)]);
    }
    let grid = parse_grid(&link.power_dbm).map_err(|e| usage(anyhow::anyhow!("--power-dbm: {e}")))?;
    Ok(grid.into_iter().map(|p| (Some(p), base.at_power(dbm_to_watts(p)))).collect())
}

fn regime(link: &LinkArgs) -> Result<FitCoefficients, Failure> {
    let r: CorrelationRegime = link.regime.parse().map_err(usage)?;
    let coeffs = FitCoefficients::for_regime(r);
    if lognormal_params(link.n, &coeffs).out_of_calibration {
        eprintln!("warning: n = {} is outside the fitted range 10..=500", link.n);
    }
    Ok(coeffs)
}

fn theory(which: TheoryCommand) -> Result<OutputTable, Failure> {
    match which {
        TheoryCommand::PaQuadrature => {
            let q = activation_prob_quadrature()?;
            let mut t = OutputTable::new(&["component", "value"]);
            for (name, v) in q.fields() {
                t.push(vec![name.into(), v.into()]);
            }
            Ok(t)
        }
        TheoryCommand::Rop { n, pa, nthr } => {
            let thresholds: Vec<usize> = match nthr {
                Some(t) => vec![t],
                None => (0..=n).collect(),
            };
            let mut t = OutputTable::new(&["n_thr", "rop_lower", "rop_upper", "branch"]);
            for k in thresholds {
                let lower = rop_lower_detail(n, pa, k).map_err(usage)?;
                let upper = rop_upper(n, pa, k).map_err(usage)?;
                t.push(vec![k.into(), lower.value.into(), upper.into(), format!("{:?}", lower.branch).into()]);
            }
            Ok(t)
        }
        TheoryCommand::Outage { link, rate } => {
            let coeffs = regime(&link)?;
            let mut t = OutputTable::new(&["tx_power_dbm", "l_rho", "outage"]);
            for (p, b) in budgets(&link)? {
                let v = outage_closed_form(rate, &b, link.n, &coeffs).map_err(usage)?;
                t.push(vec![p.unwrap_or(f64::NAN).into(), b.snr_scale().into(), v.into()]);
            }
            Ok(t)
        }
        TheoryCommand::RateBound { link } => {
            let coeffs = regime(&link)?;
            let mut t = OutputTable::new(&["tx_power_dbm", "l_rho", "rate_bound"]);
            for (p, b) in budgets(&link)? {
                t.push(vec![
                    p.unwrap_or(f64::NAN).into(),
                    b.snr_scale().into(),
                    rate_upper_bound(&b, link.n, &coeffs).into(),
                ]);
            }
            Ok(t)
        }
    }
}
