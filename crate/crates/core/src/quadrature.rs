//! One- and two-dimensional numerical integration.
//!
//! The adaptive rule is a 7/15-point Gauss–Kronrod pair with global
//! bisection; the 2-D routine nests it over a region whose inner limits
//! depend on the outer variable. A composite Simpson rule with a fixed step
//! is kept alongside for step-halving convergence checks.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate and |Kronrod - Gauss| on `[a, b]`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

const MAX_INTERVALS: usize = 4096;

/// Adaptive integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let (value, err) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, value, err)];
    let mut evaluations = 15;
    loop {
        let total_err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if total_err <= tol {
            break;
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Numerical(format!(
                "adaptive quadrature did not reach tolerance {tol:e} (estimate {total_err:e})"
            )));
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    Ok(QuadResult {
        value: intervals.iter().map(|iv| iv.2).sum(),
        error_estimate: intervals.iter().map(|iv| iv.3).sum(),
        evaluations,
    })
}

/// `int_{x0}^{x1} int_{y_lo(x)}^{y_hi(x)} f(x, y) dy dx`, adaptive in both
/// directions with absolute tolerance `tol`.
pub fn adaptive_2d<F, L, H>(f: F, x0: f64, x1: f64, y_lo: L, y_hi: H, tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
    L: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    let width = (x1 - x0).abs().max(1.0);
    let inner_tol = 0.1 * tol / width;
    let failure = std::cell::Cell::new(None);
    let outer = adaptive_1d(
        |x| match adaptive_1d(|y| f(x, y), y_lo(x), y_hi(x), inner_tol) {
            Ok(r) => r.value,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        },
        x0,
        x1,
        0.9 * tol,
    )?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(outer.value)
}

fn simpson_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let m = 2 * panels.max(1);
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Composite Simpson rule on the same kind of region, with `panels` Simpson
/// panels per direction.
pub fn composite_simpson_2d<F, L, H>(f: F, x0: f64, x1: f64, y_lo: L, y_hi: H, panels: usize) -> f64
where
    F: Fn(f64, f64) -> f64,
    L: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    simpson_1d(|x| simpson_1d(|y| f(x, y), y_lo(x), y_hi(x), panels), x0, x1, panels)
}
