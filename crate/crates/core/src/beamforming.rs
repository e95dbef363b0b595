//! Reflection-state selection for the three beamforming schemes.
//!
//! * Phase-free: every element is fabricated with phase π and only the
//!   on/off pattern is chosen. Stage one switches on every element whose
//!   cascaded phase lies within ±π/2 of the dominant direction; stage two
//!   walks the remaining elements in index order and keeps each one that
//!   lengthens the running sum.
//! * Classical: per-element phase cancellation quantised to a discrete level
//!   set, with the level's amplitude given by the coupling model.
//! * RPSA: per-element choice of the level maximising `eta(theta) cos(theta + Z)`.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{check_lengths, Error, Result};

/// Parameters of the amplitude-phase coupling curve
/// `eta(theta) = (1 - a_min) ((sin(theta - b_hrz) + 1) / 2)^c_stp + a_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeModelParams {
    pub a_min: f64,
    pub b_hrz: f64,
    pub c_stp: f64,
}

impl Default for AmplitudeModelParams {
    fn default() -> Self {
        AmplitudeModelParams {
            a_min: 0.2,
            b_hrz: 0.43 * PI,
            c_stp: 1.6,
        }
    }
}

impl AmplitudeModelParams {
    pub fn new(a_min: f64, b_hrz: f64, c_stp: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a_min) {
            return Err(Error::invalid("a_min", format!("must lie in [0, 1], got {a_min}")));
        }
        if !(b_hrz >= 0.0 && b_hrz.is_finite()) {
            return Err(Error::invalid("b_hrz", format!("must be non-negative, got {b_hrz}")));
        }
        if !(c_stp >= 0.0 && c_stp.is_finite()) {
            return Err(Error::invalid("c_stp", format!("must be non-negative, got {c_stp}")));
        }
        Ok(AmplitudeModelParams { a_min, b_hrz, c_stp })
    }

    pub fn amplitude(&self, theta: f64) -> f64 {
        amplitude_of_phase(theta, self)
    }
}

pub fn amplitude_of_phase(theta: f64, params: &AmplitudeModelParams) -> f64 {
    let base = ((theta - params.b_hrz).sin() + 1.0) / 2.0;
    // sin rounding can push the base a hair outside [0, 1]
    let base = base.clamp(0.0, 1.0);
    (1.0 - params.a_min) * base.powf(params.c_stp) + params.a_min
}

/// Maps an angle from `(-2pi, 4pi)` onto `[0, 2pi]` with a single shift.
pub fn wrap_angle(s: f64) -> f64 {
    if s < 0.0 {
        s + TAU
    } else if s > TAU {
        s - TAU
    } else {
        s
    }
}

/// `arg(sum c_n)`, or 0 when the sum vanishes.
pub fn dominant_direction_of(cascaded: &[Complex64]) -> f64 {
    let s: Complex64 = cascaded.iter().sum();
    if s == Complex64::new(0.0, 0.0) {
        0.0
    } else {
        s.arg()
    }
}

pub fn dominant_direction(h: &[Complex64], g: &[Complex64]) -> Result<f64> {
    check_lengths(h.len(), g.len())?;
    Ok(dominant_direction_of(&cascade(h, g)))
}

pub fn cascade(h: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    h.iter().zip(g).map(|(a, b)| a * b).collect()
}

/// Is `z` inside the activation arc between `lo = wrap(c1)` and
/// `hi = wrap(c2)`? Endpoints are inclusive; when `lo > hi` the arc wraps
/// through zero.
fn in_activation_region(z: f64, lo: f64, hi: f64) -> bool {
    if lo <= hi {
        lo <= z && z <= hi
    } else {
        z >= lo || z <= hi
    }
}

/// Bookkeeping from one run of the two-stage selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTrace {
    pub dominant_direction: f64,
    /// Elements switched on by the arc test.
    pub first_stage_count: usize,
    /// Arc membership tests performed (always N).
    pub membership_tests: usize,
    /// Improvement tests performed in the second stage (at most N).
    pub improvement_tests: usize,
    pub full_sum: Complex64,
    pub first_stage_sum: Complex64,
    pub final_sum: Complex64,
}

/// Two-stage on/off selection over decision coefficients `c`.
///
/// `observe(n, |sum|)` is called after every second-stage test with the
/// running-sum magnitude.
pub fn select_on_off(c: &[Complex64], mut observe: impl FnMut(usize, f64)) -> (Vec<bool>, SelectionTrace) {
    let n = c.len();
    let full_sum: Complex64 = c.iter().sum();
    let theta = dominant_direction_of(c);
    let lo = wrap_angle(theta - PI / 2.0);
    let hi = wrap_angle(theta + PI / 2.0);

    let mut active = vec![false; n];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut first_stage_count = 0;
    for (flag, cn) in active.iter_mut().zip(c) {
        if in_activation_region(wrap_angle(cn.arg()), lo, hi) {
            *flag = true;
            sum += cn;
            first_stage_count += 1;
        }
    }
    let first_stage_sum = sum;

    let mut improvement_tests = 0;
    for idx in 0..n {
        if active[idx] {
            continue;
        }
        improvement_tests += 1;
        let candidate = sum + c[idx];
        if candidate.norm() > sum.norm() {
            active[idx] = true;
            sum = candidate;
        }
        observe(idx, sum.norm());
    }

    let trace = SelectionTrace {
        dominant_direction: theta,
        first_stage_count,
        membership_tests: n,
        improvement_tests,
        full_sum,
        first_stage_sum,
        final_sum: sum,
    };
    (active, trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SchemeKind {
    #[default]
    PhaseFree,
    ClassicalPb,
    Rpsa,
}

impl SchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::PhaseFree => "phase_free",
            SchemeKind::ClassicalPb => "classical_pb",
            SchemeKind::Rpsa => "rpsa",
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase_free" => Ok(SchemeKind::PhaseFree),
            "classical_pb" => Ok(SchemeKind::ClassicalPb),
            "rpsa" => Ok(SchemeKind::Rpsa),
            other => Err(Error::invalid("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

/// Discrete phase levels `{2 pi k / L}` or unquantised phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseQuantization {
    Levels(u32),
    Continuous,
}

impl Default for PhaseQuantization {
    fn default() -> Self {
        PhaseQuantization::Levels(2)
    }
}

/// How residual phase errors enter a phase-shift benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PhaseErrorModel {
    /// Errors corrupt the phase estimate the level decision is made from;
    /// the element then realises its discrete level exactly.
    #[default]
    Estimation,
    /// Errors are added on top of the chosen level at reflection time.
    Realized,
}

/// Full configuration of one beamforming scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scheme {
    pub kind: SchemeKind,
    pub quantization: PhaseQuantization,
    pub amplitude_coupling: bool,
    pub ideal_full_reflection: bool,
    pub error_model: PhaseErrorModel,
    pub amplitude: AmplitudeModelParams,
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme {
            kind: SchemeKind::PhaseFree,
            quantization: PhaseQuantization::default(),
            amplitude_coupling: true,
            ideal_full_reflection: true,
            error_model: PhaseErrorModel::default(),
            amplitude: AmplitudeModelParams::default(),
        }
    }
}

impl Scheme {
    pub fn of_kind(kind: SchemeKind) -> Self {
        Scheme {
            kind,
            ..Scheme::default()
        }
    }

    pub fn phase_free() -> Self {
        Self::of_kind(SchemeKind::PhaseFree)
    }

    pub fn classical() -> Self {
        Self::of_kind(SchemeKind::ClassicalPb)
    }

    pub fn rpsa() -> Self {
        Self::of_kind(SchemeKind::Rpsa)
    }

    /// Runs the scheme on one channel draw. `phase_errors` may be omitted for
    /// an error-free run.
    pub fn apply(&self, h: &[Complex64], g: &[Complex64], phase_errors: Option<&[f64]>) -> Result<ReflectionState> {
        Ok(self.apply_traced(h, g, phase_errors)?.0)
    }

    /// Like [`Scheme::apply`], also returning the selection trace for the
    /// phase-free scheme.
    pub fn apply_traced(
        &self,
        h: &[Complex64],
        g: &[Complex64],
        phase_errors: Option<&[f64]>,
    ) -> Result<(ReflectionState, Option<SelectionTrace>)> {
        match self.kind {
            SchemeKind::PhaseFree => {
                let (state, trace) = phase_free_pb_traced(h, g, phase_errors, self, |_, _| {})?;
                Ok((state, Some(trace)))
            }
            SchemeKind::ClassicalPb => Ok((classical_pb(h, g, phase_errors, self)?, None)),
            SchemeKind::Rpsa => Ok((rpsa_pb(h, g, phase_errors, self)?, None)),
        }
    }
}

/// Per-element reflection coefficients chosen by a scheme.
///
/// Element `n` reflects with `amplitude_scale * amplitudes[n] *
/// exp(j (phases[n] + phase_offsets[n]))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionState {
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
    pub phase_offsets: Vec<f64>,
    /// Common magnitude of an "on" element; 1 except for the phase-free
    /// scheme in hardware-faithful mode.
    pub amplitude_scale: f64,
    /// Active elements in ascending index order (phase-free scheme only).
    pub active_set: Vec<usize>,
    pub dominant_direction: Option<f64>,
}

impl ReflectionState {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn n_active(&self) -> usize {
        self.active_set.len()
    }

    pub fn coefficient(&self, n: usize) -> Complex64 {
        Complex64::from_polar(
            self.amplitude_scale * self.amplitudes[n],
            self.phases[n] + self.phase_offsets[n],
        )
    }
}

fn estimated_phases(cascaded: &[Complex64], errors: Option<&[f64]>) -> Result<Vec<Complex64>> {
    match errors {
        None => Ok(cascaded.to_vec()),
        Some(e) => {
            check_lengths(cascaded.len(), e.len())?;
            Ok(cascaded
                .iter()
                .zip(e)
                .map(|(c, &err)| c * Complex64::from_polar(1.0, err))
                .collect())
        }
    }
}

/// Phase-free selection with the default (ideal full reflection) settings.
pub fn phase_free_pb(h: &[Complex64], g: &[Complex64], estimated_phase_errors: Option<&[f64]>) -> Result<ReflectionState> {
    Ok(phase_free_pb_traced(h, g, estimated_phase_errors, &Scheme::phase_free(), |_, _| {})?.0)
}

/// Phase-free selection. Phase errors, when present, rotate the cascaded
/// coefficients the selection sees; the realised phase stays exactly π.
pub fn phase_free_pb_traced(
    h: &[Complex64],
    g: &[Complex64],
    estimated_phase_errors: Option<&[f64]>,
    scheme: &Scheme,
    observe: impl FnMut(usize, f64),
) -> Result<(ReflectionState, SelectionTrace)> {
    check_lengths(h.len(), g.len())?;
    let cascaded = cascade(h, g);
    let decision = estimated_phases(&cascaded, estimated_phase_errors)?;
    let (active, trace) = select_on_off(&decision, observe);
    let n = h.len();
    let amplitude_scale = if scheme.ideal_full_reflection {
        1.0
    } else {
        scheme.amplitude.amplitude(PI)
    };
    let state = ReflectionState {
        amplitudes: active.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect(),
        phases: vec![PI; n],
        phase_offsets: vec![0.0; n],
        amplitude_scale,
        active_set: active
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| a.then_some(i))
            .collect(),
        dominant_direction: Some(trace.dominant_direction),
    };
    Ok((state, trace))
}

/// Shortest angular distance between two angles.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

const TIE_EPS: f64 = 1e-12;

fn levels(count: u32) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::invalid("phase_levels", "must be at least 1"));
    }
    Ok((0..count).map(|k| TAU * k as f64 / count as f64).collect())
}

/// Nearest level to `target` under circular distance; ties go to the lower
/// level.
pub fn quantize_phase(target: f64, quantization: PhaseQuantization) -> Result<f64> {
    match quantization {
        PhaseQuantization::Continuous => Ok(target),
        PhaseQuantization::Levels(count) => {
            let mut best = 0.0;
            let mut best_d = f64::INFINITY;
            for level in levels(count)? {
                let d = circular_distance(level, target);
                if d < best_d - TIE_EPS {
                    best = level;
                    best_d = d;
                }
            }
            Ok(best)
        }
    }
}

/// Splits phase errors into the part that corrupts the decision and the
/// part added at reflection time.
fn split_errors(n: usize, errors: Option<&[f64]>, model: PhaseErrorModel) -> Result<(Option<&[f64]>, Vec<f64>)> {
    match errors {
        None => Ok((None, vec![0.0; n])),
        Some(e) => {
            check_lengths(n, e.len())?;
            match model {
                PhaseErrorModel::Estimation => Ok((Some(e), vec![0.0; n])),
                PhaseErrorModel::Realized => Ok((None, e.to_vec())),
            }
        }
    }
}

fn benchmark_amplitude(theta: f64, scheme: &Scheme) -> f64 {
    if scheme.amplitude_coupling {
        scheme.amplitude.amplitude(theta)
    } else {
        1.0
    }
}

/// Classical phase cancellation: target `-arg(h_n g_n)`, quantised.
pub fn classical_pb(h: &[Complex64], g: &[Complex64], phase_errors: Option<&[f64]>, scheme: &Scheme) -> Result<ReflectionState> {
    check_lengths(h.len(), g.len())?;
    let n = h.len();
    let (decision_errors, phase_offsets) = split_errors(n, phase_errors, scheme.error_model)?;
    let decision = estimated_phases(&cascade(h, g), decision_errors)?;
    let phases = decision
        .iter()
        .map(|c| quantize_phase(-c.arg(), scheme.quantization))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReflectionState {
        amplitudes: phases.iter().map(|&t| benchmark_amplitude(t, scheme)).collect(),
        phases,
        phase_offsets,
        amplitude_scale: 1.0,
        active_set: Vec::new(),
        dominant_direction: None,
    })
}

/// Reflection phase selection: per element, the level maximising the
/// real-axis contribution `eta(theta) cos(theta + Z_n)`; ties go to the
/// lower level.
pub fn rpsa_pb(h: &[Complex64], g: &[Complex64], phase_errors: Option<&[f64]>, scheme: &Scheme) -> Result<ReflectionState> {
    check_lengths(h.len(), g.len())?;
    let count = match scheme.quantization {
        PhaseQuantization::Levels(c) => c,
        PhaseQuantization::Continuous => {
            return Err(Error::invalid("phase_levels", "RPSA needs a discrete level set"));
        }
    };
    let level_set = levels(count)?;
    let n = h.len();
    let (decision_errors, phase_offsets) = split_errors(n, phase_errors, scheme.error_model)?;
    let decision = estimated_phases(&cascade(h, g), decision_errors)?;
    let phases: Vec<f64> = decision
        .iter()
        .map(|c| rpsa_level(c.arg(), &level_set, scheme))
        .collect();
    Ok(ReflectionState {
        amplitudes: phases.iter().map(|&t| benchmark_amplitude(t, scheme)).collect(),
        phases,
        phase_offsets,
        amplitude_scale: 1.0,
        active_set: Vec::new(),
        dominant_direction: None,
    })
}

fn rpsa_level(z: f64, level_set: &[f64], scheme: &Scheme) -> f64 {
    let mut best = level_set[0];
    let mut best_score = f64::NEG_INFINITY;
    for &level in level_set {
        let score = benchmark_amplitude(level, scheme) * (level + z).cos();
        if score > best_score + TIE_EPS {
            best = level;
            best_score = score;
        }
    }
    best
}

/// `|sum_n coefficient_n h_n g_n|^2`.
pub fn effective_gain(h: &[Complex64], g: &[Complex64], state: &ReflectionState) -> Result<f64> {
    check_lengths(h.len(), g.len())?;
    check_lengths(h.len(), state.len())?;
    let sum: Complex64 = (0..h.len())
        .filter(|&n| state.amplitudes[n] != 0.0)
        .map(|n| state.coefficient(n) * h[n] * g[n])
        .sum();
    Ok(sum.norm_sqr())
}

/// Received SNR `L rho H`.
pub fn snr(gain: f64, budget: &crate::channel::LinkBudget) -> f64 {
    debug_assert!(gain >= 0.0);
    budget.snr_scale() * gain
}
