use num_complex::Complex64;
use rayon::prelude::*;

use super::trial_rng;
use crate::beamforming::phase_free_pb;
use crate::channel::{complex_normal, sample_channels, CorrelationFactor};
use crate::error::{Error, Result};
use crate::stats::CompensatedSum;

/// Empirical checks that `theta*` and a single cascaded phase decouple as N
/// grows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependenceReport {
    pub n: usize,
    pub trials: usize,
    /// `P(theta* <= 0, Z_1 <= 0)`.
    pub joint_cdf_00: f64,
    /// `P(theta* <= 0) P(Z_1 <= 0)`.
    pub product_cdf_00: f64,
    pub marginal_theta: f64,
    pub marginal_z: f64,
    pub t: f64,
    /// `P(w_{N-1} > t w_1)` with `w_{N-1} = |sum_{n != 1} h_n g_n|` and
    /// `w_1 = |h_1 g_1|`.
    pub weight_dominance: f64,
}

struct Draw {
    theta_nonpos: bool,
    z_nonpos: bool,
    dominated: bool,
}

/// Streams the channel draw element by element so large `n` needs no
/// allocation. Element 0 plays the role of the tagged element.
fn draw(n: usize, seed: u64, trial: u64, t: f64) -> Draw {
    let mut rng = trial_rng(seed, trial);
    let first = complex_normal(&mut rng) * complex_normal(&mut rng);
    let mut rest = Complex64::new(0.0, 0.0);
    for _ in 1..n {
        let h = complex_normal(&mut rng);
        let g = complex_normal(&mut rng);
        rest += h * g;
    }
    let theta = (first + rest).arg();
    Draw {
        theta_nonpos: theta <= 0.0,
        z_nonpos: first.arg() <= 0.0,
        dominated: rest.norm() > t * first.norm(),
    }
}

pub fn independence_checks(n: usize, trials: usize, seed: u64, t: f64) -> Result<IndependenceReport> {
    if n < 2 {
        return Err(Error::invalid("n", format!("must be at least 2, got {n}")));
    }
    if trials < 1000 {
        return Err(Error::invalid("trials", format!("must be at least 1000, got {trials}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be positive, got {t}")));
    }
    let draws: Vec<Draw> = (0..trials as u64).into_par_iter().map(|k| draw(n, seed, k, t)).collect();
    let frac = |pred: &dyn Fn(&Draw) -> bool| draws.iter().filter(|d| pred(d)).count() as f64 / trials as f64;
    let marginal_theta = frac(&|d| d.theta_nonpos);
    let marginal_z = frac(&|d| d.z_nonpos);
    Ok(IndependenceReport {
        n,
        trials,
        joint_cdf_00: frac(&|d| d.theta_nonpos && d.z_nonpos),
        product_cdf_00: marginal_theta * marginal_z,
        marginal_theta,
        marginal_z,
        t,
        weight_dominance: frac(&|d| d.dominated),
    })
}

/// Pearson correlation of the final on/off indicators of elements `i` and
/// `j` under the phase-free scheme with independent elements.
pub fn activation_correlation(n: usize, trials: usize, seed: u64, i: usize, j: usize) -> Result<f64> {
    if i >= n || j >= n || i == j {
        return Err(Error::invalid("i, j", format!("need distinct indices below {n}")));
    }
    if trials < 2 {
        return Err(Error::invalid("trials", "need at least two trials"));
    }
    let factor = CorrelationFactor::Identity(n);
    let pairs = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k);
            let ch = sample_channels(&mut rng, &factor);
            let state = phase_free_pb(&ch.h, &ch.g, None)?;
            let on = |m: usize| if state.amplitudes[m] > 0.0 { 1.0 } else { 0.0 };
            Ok((on(i), on(j)))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let m = trials as f64;
    let mean_a = pairs.iter().map(|p| p.0).collect::<CompensatedSum>().value() / m;
    let mean_b = pairs.iter().map(|p| p.1).collect::<CompensatedSum>().value() / m;
    let cov = pairs.iter().map(|p| (p.0 - mean_a) * (p.1 - mean_b)).collect::<CompensatedSum>().value();
    let var_a = pairs.iter().map(|p| (p.0 - mean_a).powi(2)).collect::<CompensatedSum>().value();
    let var_b = pairs.iter().map(|p| (p.1 - mean_b).powi(2)).collect::<CompensatedSum>().value();
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::Numerical("indicator has zero variance".into()));
    }
    Ok(cov / (var_a * var_b).sqrt())
}
