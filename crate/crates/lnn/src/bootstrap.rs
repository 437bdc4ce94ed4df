//! Shared wild-bootstrap machinery: multiplier draws, quantile bands, and the
//! per-point band containers used by all three inference procedures.

use crate::linalg::quantile_sorted;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Wild-bootstrap multiplier law. `Zero` is a degenerate hook used by tests
/// to verify that the machinery collapses exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Multipliers {
    Gaussian,
    Zero,
}

impl Multipliers {
    pub fn draw<R: Rng>(self, rng: &mut R, out: &mut [f64]) {
        match self {
            Multipliers::Gaussian => {
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
            }
            Multipliers::Zero => out.fill(0.0),
        }
    }
}

/// Band at one evaluation point, oriented for the coverage event
/// `ghat - g ∈ [Q_{α/2}, Q_{1-α/2}]` of the centered bootstrap draws:
/// `lo = ghat - Q_{1-α/2}(ĝ* - ĝ)` and `hi = ghat - Q_{α/2}(ĝ* - ĝ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapBand {
    pub ghat: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum BandOutcome {
    Ok(BootstrapBand),
    /// The point lies outside [-a,a]^d.
    Outside,
    /// The point's cube was empty, underdetermined, or otherwise unusable.
    Unusable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointBand {
    pub point: Vec<f64>,
    pub level: f64,
    pub replications: usize,
    pub outcome: BandOutcome,
}

impl PointBand {
    pub fn band(&self) -> Option<&BootstrapBand> {
        match &self.outcome {
            BandOutcome::Ok(b) => Some(b),
            _ => None,
        }
    }
}

/// Build a band from the centered draws `ĝ*_r - ĝ` at one point.
pub fn band_from_deltas(ghat: f64, deltas: &mut Vec<f64>, level: f64) -> BootstrapBand {
    deltas.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let q_lo = quantile_sorted(deltas, tail);
    let q_hi = quantile_sorted(deltas, 1.0 - tail);
    BootstrapBand { ghat, lo: ghat - q_hi, hi: ghat - q_lo }
}
