//! Closed-form and semi-analytical results for the phase-free scheme.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erf;

use crate::channel::{CorrelationRegime, LinkBudget};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::stats::CompensatedSum;

/// Density of the cascaded phase `Z = phi + psi` for independent uniform
/// phases: a triangle on `[-2pi, 2pi)` peaking at `1 / (2 pi)`.
pub fn triangle_pdf(z: f64) -> f64 {
    let four_pi_sq = 4.0 * PI * PI;
    if (-2.0 * PI..0.0).contains(&z) {
        (z + 2.0 * PI) / four_pi_sq
    } else if (0.0..2.0 * PI).contains(&z) {
        (2.0 * PI - z) / four_pi_sq
    } else {
        0.0
    }
}

/// Joint density of `(Z, theta*)` on the rising side, `(z + 2pi) / 8pi^3`.
fn rising(z: f64) -> f64 {
    (z + 2.0 * PI) / (8.0 * PI.powi(3))
}

/// Joint density on the falling side, `(2pi - z) / 8pi^3`.
fn falling(z: f64) -> f64 {
    (2.0 * PI - z) / (8.0 * PI.powi(3))
}

/// Components of the asymptotic activation probability.
///
/// Case one (`wrap(c1) >= wrap(c2)`, `theta*` within ±π/2):
/// `p_geq = P(wrap(Z) >= wrap(c1)) = p_a1 + ... + p_a4` and
/// `p_leq = P(wrap(Z) <= wrap(c2))`; their sum is `p_c1_geq_c2`.
/// Case two (`wrap(c1) <= wrap(c2)`): `p_c1_leq_c2 = p_leq_c2_case2 -
/// p_leq_c1_case2`. The total is `p_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationQuadrature {
    pub p_a1: f64,
    pub p_a2: f64,
    pub p_a3: f64,
    pub p_a4: f64,
    pub p_geq: f64,
    pub p_leq: f64,
    pub p_leq_c1_case2: f64,
    pub p_leq_c2_case2: f64,
    pub p_c1_geq_c2: f64,
    pub p_c1_leq_c2: f64,
    pub p_a: f64,
}

impl ActivationQuadrature {
    /// The separately integrated components (everything except the sums).
    pub fn components(&self) -> [(&'static str, f64); 7] {
        [
            ("p_a1", self.p_a1),
            ("p_a2", self.p_a2),
            ("p_a3", self.p_a3),
            ("p_a4", self.p_a4),
            ("p_leq", self.p_leq),
            ("p_leq_c1_case2", self.p_leq_c1_case2),
            ("p_leq_c2_case2", self.p_leq_c2_case2),
        ]
    }

    pub fn fields(&self) -> [(&'static str, f64); 11] {
        [
            ("p_a1", self.p_a1),
            ("p_a2", self.p_a2),
            ("p_a3", self.p_a3),
            ("p_a4", self.p_a4),
            ("p_geq", self.p_geq),
            ("p_leq", self.p_leq),
            ("p_leq_c1_case2", self.p_leq_c1_case2),
            ("p_leq_c2_case2", self.p_leq_c2_case2),
            ("p_c1_geq_c2", self.p_c1_geq_c2),
            ("p_c1_leq_c2", self.p_c1_leq_c2),
            ("p_a", self.p_a),
        ]
    }
}

/// One double integral `int_{t0}^{t1} int_{lo(t)}^{hi(t)} f(z) dz dt`.
struct Piece {
    density: fn(f64) -> f64,
    t0: f64,
    t1: f64,
    lo: fn(f64) -> f64,
    hi: fn(f64) -> f64,
}

const TWO_PI: f64 = 2.0 * PI;
const HALF_PI: f64 = PI / 2.0;

fn pieces_a() -> [Piece; 4] {
    [
        Piece { density: falling, t0: -HALF_PI, t1: 0.0, lo: |t| t + 1.5 * PI, hi: |_| TWO_PI },
        Piece { density: falling, t0: 0.0, t1: HALF_PI, lo: |t| t + 1.5 * PI, hi: |_| TWO_PI },
        Piece { density: rising, t0: -HALF_PI, t1: 0.0, lo: |t| t - HALF_PI, hi: |_| 0.0 },
        Piece { density: rising, t0: 0.0, t1: HALF_PI, lo: |t| t - HALF_PI, hi: |_| 0.0 },
    ]
}

fn pieces_leq_c2_case1() -> [Piece; 4] {
    [
        Piece { density: falling, t0: -HALF_PI, t1: 0.0, lo: |_| 0.0, hi: |t| t + HALF_PI },
        Piece { density: falling, t0: 0.0, t1: HALF_PI, lo: |_| 0.0, hi: |t| t + HALF_PI },
        Piece { density: rising, t0: -HALF_PI, t1: 0.0, lo: |_| -TWO_PI, hi: |t| t - 1.5 * PI },
        Piece { density: rising, t0: 0.0, t1: HALF_PI, lo: |_| -TWO_PI, hi: |t| t - 1.5 * PI },
    ]
}

fn pieces_leq_c1_case2() -> [Piece; 4] {
    [
        Piece { density: falling, t0: HALF_PI, t1: PI, lo: |_| 0.0, hi: |t| t - HALF_PI },
        Piece { density: rising, t0: HALF_PI, t1: PI, lo: |_| -TWO_PI, hi: |t| t - 2.5 * PI },
        Piece { density: falling, t0: -PI, t1: -HALF_PI, lo: |_| 0.0, hi: |t| t + 1.5 * PI },
        Piece { density: rising, t0: -PI, t1: -HALF_PI, lo: |_| -TWO_PI, hi: |t| t - HALF_PI },
    ]
}

fn pieces_leq_c2_case2() -> [Piece; 4] {
    [
        Piece { density: falling, t0: HALF_PI, t1: PI, lo: |_| 0.0, hi: |t| t + HALF_PI },
        Piece { density: rising, t0: HALF_PI, t1: PI, lo: |_| -TWO_PI, hi: |t| t - 1.5 * PI },
        Piece { density: falling, t0: -PI, t1: -HALF_PI, lo: |_| 0.0, hi: |t| t + 2.5 * PI },
        Piece { density: rising, t0: -PI, t1: -HALF_PI, lo: |_| -TWO_PI, hi: |t| t + HALF_PI },
    ]
}

/// How each double integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureRule {
    /// Adaptive Gauss–Kronrod to the given absolute tolerance.
    Adaptive { tol: f64 },
    /// Composite Simpson with a fixed number of panels per direction.
    Simpson { panels: usize },
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule::Adaptive { tol: 1e-8 }
    }
}

fn integrate(piece: &Piece, rule: QuadratureRule) -> Result<f64> {
    let f = piece.density;
    match rule {
        QuadratureRule::Adaptive { tol } => {
            quadrature::adaptive_2d(|_, z| f(z), piece.t0, piece.t1, piece.lo, piece.hi, tol)
        }
        QuadratureRule::Simpson { panels } => Ok(quadrature::composite_simpson_2d(
            |_, z| f(z),
            piece.t0,
            piece.t1,
            piece.lo,
            piece.hi,
            panels,
        )),
    }
}

fn integrate_all(pieces: &[Piece], rule: QuadratureRule) -> Result<f64> {
    pieces.iter().map(|p| integrate(p, rule)).sum()
}

/// Activation probability components by 2-D quadrature with the default
/// adaptive rule (absolute tolerance 1e-8).
pub fn activation_prob_quadrature() -> Result<ActivationQuadrature> {
    activation_prob_quadrature_with(QuadratureRule::default())
}

pub fn activation_prob_quadrature_with(rule: QuadratureRule) -> Result<ActivationQuadrature> {
    let a = pieces_a();
    let p_a1 = integrate(&a[0], rule)?;
    let p_a2 = integrate(&a[1], rule)?;
    let p_a3 = integrate(&a[2], rule)?;
    let p_a4 = integrate(&a[3], rule)?;
    let p_geq = p_a1 + p_a2 + p_a3 + p_a4;
    let p_leq = integrate_all(&pieces_leq_c2_case1(), rule)?;
    let p_leq_c1_case2 = integrate_all(&pieces_leq_c1_case2(), rule)?;
    let p_leq_c2_case2 = integrate_all(&pieces_leq_c2_case2(), rule)?;
    let p_c1_geq_c2 = p_geq + p_leq;
    let p_c1_leq_c2 = p_leq_c2_case2 - p_leq_c1_case2;
    Ok(ActivationQuadrature {
        p_a1,
        p_a2,
        p_a3,
        p_a4,
        p_geq,
        p_leq,
        p_leq_c1_case2,
        p_leq_c2_case2,
        p_c1_geq_c2,
        p_c1_leq_c2,
        p_a: p_c1_geq_c2 + p_c1_leq_c2,
    })
}

/// Which piece of the pairwise-independent tail bound produced `U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RopBranch {
    /// `N_thr < (N-1) P_a`: `U = 1`.
    BelowMean,
    /// `(N-1) P_a <= N_thr <= 1 + (N-1) P_a`.
    Linear,
    /// `N_thr >= 1 + (N-1) P_a`, with the ceiling term `zeta`.
    Quadratic,
    /// Quadratic branch with an undefined `zeta`; fell back to the linear
    /// expression.
    DegenerateFallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RopLower {
    pub value: f64,
    /// The tail bound `U` before clamping.
    pub raw_tail_bound: f64,
    pub branch: RopBranch,
    pub clamped: bool,
}

fn check_rop_args(n: usize, p_a: f64, n_thr: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("n", format!("must be at least 2, got {n}")));
    }
    if !(p_a > 0.0 && p_a < 1.0) {
        return Err(Error::invalid("p_a", format!("must lie in (0, 1), got {p_a}")));
    }
    if n_thr > n {
        return Err(Error::invalid("n_thr", format!("must not exceed n = {n}, got {n_thr}")));
    }
    Ok(())
}

/// Lower bound on `P(N_a <= N_thr)`: one minus the pairwise-independent tail
/// bound `U`, with `U` clamped to `[0, 1]`.
pub fn rop_lower_detail(n: usize, p_a: f64, n_thr: usize) -> Result<RopLower> {
    check_rop_args(n, p_a, n_thr)?;
    let nf = n as f64;
    let nbar = nf - 1.0;
    let pbar = 1.0 - p_a;
    let t = n_thr as f64;
    let linear = |t: f64| (nbar * pbar + t) * p_a / t;

    let (raw, branch) = if t < nbar * p_a {
        (1.0, RopBranch::BelowMean)
    } else if t <= 1.0 + nbar * p_a {
        (linear(t), RopBranch::Linear)
    } else {
        let gap = t - nf * p_a;
        if gap == 0.0 {
            (linear(t), RopBranch::DegenerateFallback)
        } else {
            let zeta = (nf * p_a * (t - 1.0 - nbar * p_a) / gap).ceil();
            let d = t - zeta;
            let denom = d * d + d;
            if denom <= 0.0 {
                (linear(t), RopBranch::DegenerateFallback)
            } else {
                let num = nf * nbar * p_a * p_a + (zeta - 1.0) * (zeta - 2.0 * nf * p_a);
                (num / denom, RopBranch::Quadratic)
            }
        }
    };
    let u = raw.clamp(0.0, 1.0);
    Ok(RopLower {
        value: 1.0 - u,
        raw_tail_bound: raw,
        branch,
        clamped: u != raw,
    })
}

pub fn rop_lower(n: usize, p_a: f64, n_thr: usize) -> Result<f64> {
    Ok(rop_lower_detail(n, p_a, n_thr)?.value)
}

/// Binomial CDF `P(X <= n_thr)`, `X ~ Bin(n, p_a)`, accumulated in log space.
pub fn rop_upper(n: usize, p_a: f64, n_thr: usize) -> Result<f64> {
    if !(p_a > 0.0 && p_a < 1.0) {
        return Err(Error::invalid("p_a", format!("must lie in (0, 1), got {p_a}")));
    }
    if n_thr > n {
        return Err(Error::invalid("n_thr", format!("must not exceed n = {n}, got {n_thr}")));
    }
    if n_thr == n {
        return Ok(1.0);
    }
    let ln_p = p_a.ln();
    let ln_q = (-p_a).ln_1p();
    // ln C(n, i) by the ratio recurrence C(n, i) = C(n, i-1) (n-i+1) / i
    let mut ln_binom = CompensatedSum::new();
    let mut log_terms = Vec::with_capacity(n_thr + 1);
    for i in 0..=n_thr {
        if i > 0 {
            ln_binom.add(((n - i + 1) as f64 / i as f64).ln());
        }
        log_terms.push(ln_binom.value() + i as f64 * ln_p + (n - i) as f64 * ln_q);
    }
    let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_terms.iter().map(|l| (l - max).exp()).collect::<CompensatedSum>().value();
    Ok((max + sum.ln()).exp().min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RopBounds {
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
    pub n_thr: usize,
    pub p_a: f64,
}

pub fn rop_bounds(n: usize, p_a: f64, n_thr: usize) -> Result<RopBounds> {
    Ok(RopBounds {
        lower: rop_lower(n, p_a, n_thr)?,
        upper: rop_upper(n, p_a, n_thr)?,
        n,
        n_thr,
        p_a,
    })
}

/// Power-law fits `mu(N) = a1 N^b1 + c1`, `sigma(N) = a2 N^b2 + c2` for the
/// log-normal model of the channel gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitCoefficients {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    pub regime: CorrelationRegime,
}

pub const CALIBRATED_N_RANGE: (usize, usize) = (10, 500);

impl FitCoefficients {
    /// Element spacing lambda/8 under the sinc correlation model.
    pub const CORRELATED: FitCoefficients = FitCoefficients {
        a1: -533.1,
        b1: -0.003336,
        c1: 532.3,
        a2: 2.928,
        b2: -0.1783,
        c2: -0.6076,
        regime: CorrelationRegime::SpatiallyCorrelated,
    };

    /// Independent elements.
    pub const UNCORRELATED: FitCoefficients = FitCoefficients {
        a1: 39.59,
        b1: 0.03871,
        c1: -40.54,
        a2: 1.725,
        b2: -0.3917,
        c2: -0.0354,
        regime: CorrelationRegime::Iid,
    };

    pub fn for_regime(regime: CorrelationRegime) -> FitCoefficients {
        match regime {
            CorrelationRegime::Iid => Self::UNCORRELATED,
            CorrelationRegime::SpatiallyCorrelated => Self::CORRELATED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalParams {
    pub mu: f64,
    pub sigma: f64,
    /// `n` lies outside the range the coefficients were fitted on.
    pub out_of_calibration: bool,
}

impl LognormalParams {
    /// Mean of the log-normal gain, `exp(mu + sigma^2 / 2)`.
    pub fn mean_gain(&self) -> f64 {
        (self.mu + 0.5 * self.sigma * self.sigma).exp()
    }
}

pub fn lognormal_params(n: usize, coeffs: &FitCoefficients) -> LognormalParams {
    let nf = n as f64;
    LognormalParams {
        mu: coeffs.a1 * nf.powf(coeffs.b1) + coeffs.c1,
        sigma: coeffs.a2 * nf.powf(coeffs.b2) + coeffs.c2,
        out_of_calibration: !(CALIBRATED_N_RANGE.0..=CALIBRATED_N_RANGE.1).contains(&n),
    }
}

/// Outage probability under the log-normal gain model:
/// `P(H < (2^r - 1) / (L rho))`.
pub fn outage_closed_form(rate: f64, budget: &LinkBudget, n: usize, coeffs: &FitCoefficients) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::invalid("rate", format!("must be positive, got {rate}")));
    }
    let scale = budget.snr_scale();
    if !(scale > 0.0) {
        return Err(Error::invalid("budget", "L * rho must be positive"));
    }
    let params = lognormal_params(n, coeffs);
    let threshold = (2f64.powf(rate) - 1.0) / scale;
    let x = (threshold.ln() - params.mu) / (SQRT_2 * params.sigma);
    Ok((0.5 * (1.0 + erf(x))).clamp(0.0, 1.0))
}

/// Jensen upper bound on the ergodic rate, `log2(1 + L rho E[H])`.
pub fn rate_upper_bound(budget: &LinkBudget, n: usize, coeffs: &FitCoefficients) -> f64 {
    let params = lognormal_params(n, coeffs);
    (budget.snr_scale() * params.mean_gain()).ln_1p() / std::f64::consts::LN_2
}
