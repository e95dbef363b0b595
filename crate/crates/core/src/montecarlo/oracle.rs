use num_complex::Complex64;

use crate::beamforming::cascade;
use crate::error::{check_lengths, Error, Result};

/// Largest surface the exhaustive search accepts (2^20 subsets).
pub const ORACLE_MAX_ELEMENTS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `|sum_{n in S} h_n g_n|^2` for the best subset.
    pub best_gain: f64,
    /// Zero-based indices, ascending.
    pub best_subset: Vec<usize>,
}

fn indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).collect()
}

/// Best on/off subset by enumerating all `2^N` of them. Gains equal to
/// within a relative 1e-12 are ties, resolved toward the lexicographically
/// smallest index list.
pub fn exhaustive_oracle(h: &[Complex64], g: &[Complex64]) -> Result<OracleResult> {
    check_lengths(h.len(), g.len())?;
    let n = h.len();
    if n > ORACLE_MAX_ELEMENTS {
        return Err(Error::TooLarge {
            size: n,
            limit: ORACLE_MAX_ELEMENTS,
        });
    }
    let c = cascade(h, g);
    let total = 1usize << n;
    let mut sums = vec![Complex64::new(0.0, 0.0); total];
    let mut best_mask = 0u32;
    let mut best_gain = 0.0f64;
    for mask in 1..total {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + c[low];
        let gain = sums[mask].norm_sqr();
        let tol = 1e-12 * best_gain.max(gain);
        if gain > best_gain + tol {
            best_gain = gain;
            best_mask = mask as u32;
        } else if (gain - best_gain).abs() <= tol && indices(mask as u32) < indices(best_mask) {
            best_gain = best_gain.max(gain);
            best_mask = mask as u32;
        }
    }
    Ok(OracleResult {
        best_gain,
        best_subset: indices(best_mask),
    })
}
