//! Von Mises sampling by Best & Fisher's rejection scheme (wrapped-Cauchy
//! envelope). Exact for every `kappa > 0`; `kappa = 0` is plain uniform.

use rand::Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Envelope parameter `r = (1 + rho^2) / (2 rho)` in a form that stays
/// accurate as `kappa -> 0`.
fn envelope_r(kappa: f64) -> f64 {
    let s = (1.0 + 4.0 * kappa * kappa).sqrt();
    let tau = 1.0 + s;
    let rho = 2.0 * kappa * tau.sqrt() / ((tau.sqrt() + 2f64.sqrt()) * (s + 1.0));
    (1.0 + rho * rho) / (2.0 * rho)
}

fn wrap_half_open(theta: f64) -> f64 {
    if theta >= PI {
        theta - 2.0 * PI
    } else {
        theta
    }
}

/// One draw from Von Mises(0, kappa) in `[-pi, pi)`.
pub fn sample_von_mises<R: Rng + ?Sized>(rng: &mut R, kappa: f64) -> f64 {
    if kappa == 0.0 {
        return rng.random::<f64>() * 2.0 * PI - PI;
    }
    let r = envelope_r(kappa);
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let u3: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let theta = f.clamp(-1.0, 1.0).acos();
            let theta = if u3 < 0.5 { -theta } else { theta };
            return wrap_half_open(theta);
        }
    }
}

/// `n` i.i.d. Von Mises(0, kappa) phase errors.
pub fn sample_phase_errors<R: Rng + ?Sized>(rng: &mut R, n: usize, kappa: f64) -> Result<Vec<f64>> {
    if !(kappa >= 0.0) || kappa.is_infinite() {
        return Err(Error::invalid("kappa", format!("must be finite and non-negative, got {kappa}")));
    }
    Ok((0..n).map(|_| sample_von_mises(rng, kappa)).collect())
}
