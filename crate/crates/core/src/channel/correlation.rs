use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::PI;

use super::{CorrelationRegime, RisGeometry};
use crate::error::{Error, Result};

/// Normalised sinc, `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// `R[n][m] = sinc(2 d_nm / lambda)` for the correlated regime, identity
/// otherwise.
pub fn correlation_matrix(geometry: &RisGeometry, regime: CorrelationRegime) -> DMatrix<f64> {
    let n = geometry.n_elements;
    match regime {
        CorrelationRegime::Iid => DMatrix::identity(n, n),
        CorrelationRegime::SpatiallyCorrelated => DMatrix::from_fn(n, n, |a, b| {
            if a == b {
                1.0
            } else {
                sinc(2.0 * geometry.distance(a, b) / geometry.wavelength)
            }
        }),
    }
}

/// Real square-root factor `F` with `F F^T = R`.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationFactor {
    Identity(usize),
    Dense(DMatrix<f64>),
}

impl CorrelationFactor {
    pub fn dim(&self) -> usize {
        match self {
            CorrelationFactor::Identity(n) => *n,
            CorrelationFactor::Dense(m) => m.nrows(),
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        match self {
            CorrelationFactor::Identity(n) => DMatrix::identity(*n, *n),
            CorrelationFactor::Dense(m) => m.clone(),
        }
    }

    /// Colours a white vector: returns `F w`.
    pub fn apply(&self, w: Vec<Complex64>) -> Vec<Complex64> {
        match self {
            CorrelationFactor::Identity(_) => w,
            CorrelationFactor::Dense(f) => {
                let n = f.nrows();
                let mut out = vec![Complex64::new(0.0, 0.0); n];
                // column-major storage: walk columns outermost
                for (j, wj) in w.iter().enumerate() {
                    let col = f.column(j);
                    for (o, fij) in out.iter_mut().zip(col.iter()) {
                        *o += wj * fij;
                    }
                }
                out
            }
        }
    }
}

const FACTOR_TOLERANCE: f64 = 1e-9;

/// Factors the regime's correlation matrix by symmetric eigendecomposition,
/// clipping negative eigenvalues to zero.
pub fn correlation_factor(geometry: &RisGeometry, regime: CorrelationRegime) -> Result<CorrelationFactor> {
    if regime == CorrelationRegime::Iid {
        return Ok(CorrelationFactor::Identity(geometry.n_elements));
    }
    let r = correlation_matrix(geometry, regime);
    let eig = SymmetricEigen::new(r.clone());
    let mut f = eig.eigenvectors;
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        f.column_mut(k).scale_mut(s);
    }
    let err = (&f * f.transpose() - &r).norm();
    if err > FACTOR_TOLERANCE * (geometry.n_elements as f64).max(1.0) {
        return Err(Error::Numerical(format!(
            "correlation factor residual {err:e} exceeds tolerance"
        )));
    }
    Ok(CorrelationFactor::Dense(f))
}
