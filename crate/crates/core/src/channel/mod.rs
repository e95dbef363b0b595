//! Surface geometry, channel draws and the link budget.

mod correlation;
mod von_mises;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

pub use correlation::{correlation_factor, correlation_matrix, sinc, CorrelationFactor};
pub use von_mises::{sample_phase_errors, sample_von_mises};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const DEFAULT_CARRIER_HZ: f64 = 1.8e9;

pub fn wavelength(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Planar element layout of the surface.
///
/// Elements fill a near-square grid row by row: `rows = floor(sqrt(N))`,
/// `cols = ceil(N / rows)`, so the last row may be partially filled.
#[derive(Debug, Clone, PartialEq)]
pub struct RisGeometry {
    pub n_elements: usize,
    pub d_h: f64,
    pub d_v: f64,
    pub wavelength: f64,
    pub rows: usize,
    pub cols: usize,
    pub positions: Vec<[f64; 3]>,
}

impl RisGeometry {
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.positions[a], self.positions[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
    }
}

pub fn build_geometry(n_elements: usize, d_h: f64, d_v: f64, wavelength: f64) -> Result<RisGeometry> {
    if n_elements == 0 {
        return Err(Error::invalid("n_elements", "must be at least 1"));
    }
    for (name, v) in [("d_h", d_h), ("d_v", d_v), ("wavelength", wavelength)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
        }
    }
    let rows = (n_elements as f64).sqrt().floor() as usize;
    // guard against sqrt rounding for large perfect squares
    let rows = if (rows + 1) * (rows + 1) <= n_elements { rows + 1 } else { rows };
    let cols = n_elements.div_ceil(rows);
    let positions = (0..n_elements)
        .map(|n| [(n % cols) as f64 * d_h, (n / cols) as f64 * d_v, 0.0])
        .collect();
    Ok(RisGeometry {
        n_elements,
        d_h,
        d_v,
        wavelength,
        rows,
        cols,
        positions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CorrelationRegime {
    #[default]
    Iid,
    /// Isotropic sinc model driven by the geometry's element spacing.
    SpatiallyCorrelated,
}

impl CorrelationRegime {
    pub fn label(&self) -> &'static str {
        match self {
            CorrelationRegime::Iid => "iid",
            CorrelationRegime::SpatiallyCorrelated => "correlated",
        }
    }
}

impl std::str::FromStr for CorrelationRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" | "uncorrelated" => Ok(CorrelationRegime::Iid),
            "correlated" => Ok(CorrelationRegime::SpatiallyCorrelated),
            other => Err(Error::invalid("regime", format!("unknown regime `{other}`"))),
        }
    }
}

/// One channel draw: source-to-surface `h`, surface-to-destination `g` and
/// per-element phase errors (zeros when errors are disabled).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: Vec<Complex64>,
    pub g: Vec<Complex64>,
    pub phase_errors: Vec<f64>,
}

impl ChannelRealization {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Per-element cascaded coefficients `h_n g_n`.
    pub fn cascaded(&self) -> Vec<Complex64> {
        self.h.iter().zip(&self.g).map(|(a, b)| a * b).collect()
    }

    pub fn has_phase_errors(&self) -> bool {
        self.phase_errors.iter().any(|&e| e != 0.0)
    }
}

/// One standard circularly-symmetric complex Gaussian, CN(0, 1).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

pub fn complex_normal_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_normal(rng)).collect()
}

/// Draws `h = F w_h`, `g = F w_g` with independent white CN(0, 1) vectors.
///
/// The white vector for `h` is drawn in full before the one for `g`.
pub fn sample_channels<R: Rng + ?Sized>(rng: &mut R, factor: &CorrelationFactor) -> ChannelRealization {
    let n = factor.dim();
    let w_h = complex_normal_vec(rng, n);
    let w_g = complex_normal_vec(rng, n);
    ChannelRealization {
        h: factor.apply(w_h),
        g: factor.apply(w_g),
        phase_errors: vec![0.0; n],
    }
}

/// End-to-end link parameters for one transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub r_source: f64,
    pub r_dest: f64,
    pub wavelength: f64,
    /// End-to-end power gain `L = L_S * L_D` (< 1).
    pub path_gain: f64,
    pub noise_power: f64,
    pub tx_power: f64,
    /// `rho = P / sigma^2`.
    pub transmit_snr: f64,
}

impl LinkBudget {
    /// Budget with an explicit source distance.
    pub fn with_source_distance(
        r_source: f64,
        r_dest: f64,
        wavelength: f64,
        tx_power: f64,
        noise_power: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("r_source", r_source),
            ("r_dest", r_dest),
            ("wavelength", wavelength),
            ("tx_power", tx_power),
            ("noise_power", noise_power),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(LinkBudget {
            r_source,
            r_dest,
            wavelength,
            path_gain: path_gain(wavelength, r_source, r_dest),
            noise_power,
            tx_power,
            transmit_snr: tx_power / noise_power,
        })
    }

    /// Same geometry, different transmit power.
    pub fn at_power(&self, tx_power: f64) -> Self {
        LinkBudget {
            tx_power,
            transmit_snr: tx_power / self.noise_power,
            ..*self
        }
    }

    /// `L * rho`, the factor turning channel gain into SNR.
    pub fn snr_scale(&self) -> f64 {
        self.path_gain * self.transmit_snr
    }
}

/// Far-field source distance `ceil(N * lambda / 2)` in meters.
pub fn far_field_source_distance(n: usize, wavelength: f64) -> f64 {
    (n as f64 * wavelength / 2.0).ceil()
}

/// `lambda^4 / (256 pi^2 r_S^2 r_D^2)`.
pub fn path_gain(wavelength: f64, r_source: f64, r_dest: f64) -> f64 {
    wavelength.powi(4) / (256.0 * PI * PI * r_source.powi(2) * r_dest.powi(2))
}

/// Link budget with the source placed at the far-field distance of an
/// `n`-element surface.
pub fn link_budget(n: usize, wavelength: f64, r_dest: f64, tx_power: f64, noise_power: f64) -> Result<LinkBudget> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if !(wavelength > 0.0) {
        return Err(Error::invalid("wavelength", "must be positive"));
    }
    LinkBudget::with_source_distance(
        far_field_source_distance(n, wavelength),
        r_dest,
        wavelength,
        tx_power,
        noise_power,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lambda() -> f64 {
        wavelength(DEFAULT_CARRIER_HZ)
    }

    #[test]
    fn single_element_at_origin() {
        let g = build_geometry(1, lambda() / 8.0, lambda() / 8.0, lambda()).unwrap();
        assert_eq!(g.positions, vec![[0.0, 0.0, 0.0]]);
    }

    #[test]
    fn two_by_two_grid() {
        let l = lambda();
        let g = build_geometry(4, l / 8.0, l / 8.0, l).unwrap();
        assert_eq!((g.rows, g.cols), (2, 2));
        let mut max_d: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                max_d = max_d.max(g.distance(a, b));
            }
        }
        assert!((max_d - l / 8.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn forty_elements_six_rows() {
        let l = lambda();
        let g = build_geometry(40, l / 8.0, l / 8.0, l).unwrap();
        assert_eq!((g.rows, g.cols), (6, 7));
        assert_eq!(g.positions.len(), 40);
        // last row holds elements 35..40 (5 of 7 columns)
        assert!(g.positions[35..].iter().all(|p| (p[1] - 5.0 * l / 8.0).abs() < 1e-15));
        assert!((g.positions[1][0] - g.positions[0][0] - l / 8.0).abs() < 1e-15);
        for a in 0..40 {
            for b in (a + 1)..40 {
                assert!(g.distance(a, b) > 0.0);
            }
        }
    }

    #[test]
    fn geometry_rejects_bad_dimensions() {
        assert!(build_geometry(0, 1.0, 1.0, 1.0).is_err());
        assert!(build_geometry(4, -1.0, 1.0, 1.0).is_err());
        assert!(build_geometry(4, 1.0, 0.0, 1.0).is_err());
        assert!(build_geometry(4, 1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn perfect_square_grids() {
        for k in 1..40usize {
            let g = build_geometry(k * k, 1.0, 1.0, 1.0).unwrap();
            assert_eq!((g.rows, g.cols), (k, k));
        }
    }

    #[test]
    fn link_budget_examples() {
        let l = lambda();
        let b = link_budget(40, l, 10.0, 1.0, 1e-12).unwrap();
        assert_eq!(b.r_source, 4.0);
        assert!((b.path_gain - 1.9034e-10).abs() / 1.9034e-10 < 1e-3);
        assert!((10.0 * b.path_gain.log10() + 97.2).abs() < 0.01);
        assert_eq!(link_budget(50, l, 10.0, 1.0, 1e-12).unwrap().r_source, 5.0);

        let b = link_budget(40, l, 10.0, dbm_to_watts(20.0), dbm_to_watts(-90.0)).unwrap();
        assert!((b.transmit_snr - 1e11).abs() / 1e11 < 1e-12);
        assert_eq!(b.transmit_snr, b.tx_power / b.noise_power);
        assert!(b.path_gain > 0.0 && b.path_gain < 1.0);
    }

    #[test]
    fn link_budget_is_pure() {
        let a = link_budget(77, 0.2, 12.0, 0.3, 1e-12).unwrap();
        let b = link_budget(77, 0.2, 12.0, 0.3, 1e-12).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn link_budget_rejects_non_positive() {
        assert!(link_budget(40, lambda(), 0.0, 1.0, 1e-12).is_err());
        assert!(link_budget(40, lambda(), 10.0, -1.0, 1e-12).is_err());
        assert!(link_budget(0, lambda(), 10.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn dbm_conversions() {
        assert!((dbm_to_watts(-90.0) - 1e-12).abs() < 1e-24);
        assert!((dbm_to_watts(20.0) - 0.1).abs() < 1e-15);
        assert!((watts_to_dbm(1e-3)).abs() < 1e-12);
    }

    #[test]
    fn iid_channel_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let factor = CorrelationFactor::Identity(100_000);
        let ch = sample_channels(&mut rng, &factor);
        let n = ch.h.len() as f64;
        let mean: Complex64 = ch.h.iter().sum::<Complex64>() / n;
        let var = ch.h.iter().map(|z| z.norm_sqr()).sum::<f64>() / n - mean.norm_sqr();
        assert!(mean.norm() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
        assert_eq!(ch.phase_errors.len(), 100_000);
    }

    #[test]
    fn same_seed_same_channels() {
        let l = lambda();
        let geo = build_geometry(40, l / 8.0, l / 8.0, l).unwrap();
        let f = correlation_factor(&geo, CorrelationRegime::SpatiallyCorrelated).unwrap();
        let a = sample_channels(&mut ChaCha8Rng::seed_from_u64(5), &f);
        let b = sample_channels(&mut ChaCha8Rng::seed_from_u64(5), &f);
        assert_eq!(a, b);
    }

    #[test]
    fn correlated_pair_matches_sinc() {
        let l = lambda();
        let geo = build_geometry(2, l / 8.0, l / 8.0, l).unwrap();
        let f = correlation_factor(&geo, CorrelationRegime::SpatiallyCorrelated).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 100_000;
        let (mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0);
        for _ in 0..draws {
            let ch = sample_channels(&mut rng, &f);
            let (a, b) = (ch.h[0].re, ch.h[1].re);
            s11 += a * a;
            s22 += b * b;
            s12 += a * b;
        }
        let rho = s12 / (s11 * s22).sqrt();
        assert!((rho - 0.9003).abs() < 0.01, "rho {rho}");
    }

    #[test]
    fn iid_empirical_correlation_is_small_and_variance_unit() {
        for regime in [CorrelationRegime::Iid, CorrelationRegime::SpatiallyCorrelated] {
            let l = lambda();
            let geo = build_geometry(6, l / 8.0, l / 8.0, l).unwrap();
            let f = correlation_factor(&geo, regime).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let draws = 100_000;
            let mut cov = [[Complex64::new(0.0, 0.0); 6]; 6];
            for _ in 0..draws {
                let ch = sample_channels(&mut rng, &f);
                for a in 0..6 {
                    for b in 0..6 {
                        cov[a][b] += ch.h[a] * ch.h[b].conj();
                    }
                }
            }
            for a in 0..6 {
                let var = cov[a][a].re / draws as f64;
                assert!((var - 1.0).abs() < 0.02, "{regime:?} var {var}");
                if regime == CorrelationRegime::Iid {
                    for b in 0..6 {
                        if a != b {
                            assert!((cov[a][b] / draws as f64).norm() < 0.02);
                        }
                    }
                }
            }
        }
    }
}
