//! Local-constant (Nadaraya-Watson) kernel regression baseline with a
//! residual wild bootstrap, used for coverage comparisons against the
//! localized network.

use crate::bootstrap::{band_from_deltas, BandOutcome, Multipliers, PointBand};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{substream, tags};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Uniform,
    Epanechnikov,
}

impl KernelKind {
    /// Univariate kernel value at the scaled distance u.
    pub fn weight(self, u: f64) -> f64 {
        if u.abs() > 1.0 {
            return 0.0;
        }
        match self {
            KernelKind::Uniform => 0.5,
            KernelKind::Epanechnikov => 0.75 * (1.0 - u * u),
        }
    }
}

/// Product-kernel weight of one observation relative to `x0`.
fn product_weight(row: &[f64], x0: &[f64], h: f64, kernel: KernelKind) -> f64 {
    row.iter()
        .zip(x0)
        .map(|(x, c)| kernel.weight((x - c) / h))
        .product()
}

/// Nadaraya-Watson estimate `sum w_t y_t / sum w_t` at `x0`.
pub fn nw_estimate(data: &Dataset, x0: &[f64], h: f64, kernel: KernelKind) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("bandwidth h = {h} must be positive")));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (row, &y) in data.rows().zip(data.y()) {
        let w = product_weight(row, x0, h, kernel);
        num += w * y;
        den += w;
    }
    if den == 0.0 {
        return Err(Error::InsufficientData(
            "all kernel weights vanish at the evaluation point".into(),
        ));
    }
    Ok(num / den)
}

/// Residual wild bootstrap around the kernel smoother, mirroring the
/// network procedure: `y*_t = ghat(x_t) + resid_t eta_t`, re-smooth, and
/// band the centered draws per evaluation point.
pub fn kernel_bootstrap(
    data: &Dataset,
    h: f64,
    kernel: KernelKind,
    r: usize,
    seed: u64,
    eval_points: &[Vec<f64>],
    level: f64,
    multipliers: Multipliers,
) -> Result<Vec<PointBand>> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("bootstrap requires R >= 2, got {r}")));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("bandwidth h = {h} must be positive")));
    }
    let t_len = data.len();

    // Smoothed values at the sample points; an observation always carries
    // positive weight on itself, so the window is never empty here.
    let fitted: Vec<f64> = (0..t_len)
        .into_par_iter()
        .map(|t| nw_estimate(data, data.row(t), h, kernel))
        .collect::<Result<_>>()?;
    let resid: Vec<f64> = data.y().iter().zip(&fitted).map(|(y, f)| y - f).collect();

    // Cached weights per evaluation point; the design never changes across
    // replications.
    struct PointState {
        weights: Vec<f64>,
        den: f64,
        ghat: f64,
    }
    let states: Vec<Option<PointState>> = eval_points
        .par_iter()
        .map(|p| {
            let weights: Vec<f64> = data
                .rows()
                .map(|row| product_weight(row, p, h, kernel))
                .collect();
            let den: f64 = weights.iter().sum();
            if den == 0.0 {
                return None;
            }
            let num: f64 = weights.iter().zip(data.y()).map(|(w, y)| w * y).sum();
            Some(PointState { weights, den, ghat: num / den })
        })
        .collect();

    let draws_by_rep: Vec<Vec<f64>> = (0..r)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(seed, &[tags::KERNEL, rep as u64]);
            let mut eta = vec![0.0; t_len];
            multipliers.draw(&mut rng, &mut eta);
            states
                .iter()
                .map(|state| {
                    let Some(state) = state else { return f64::NAN };
                    let mut num = 0.0;
                    for t in 0..t_len {
                        let w = state.weights[t];
                        if w != 0.0 {
                            num += w * (fitted[t] + resid[t] * eta[t]);
                        }
                    }
                    num / state.den - state.ghat
                })
                .collect()
        })
        .collect();

    Ok(eval_points
        .iter()
        .enumerate()
        .map(|(p, point)| {
            let outcome = match &states[p] {
                None => BandOutcome::Unusable,
                Some(state) => {
                    let mut deltas: Vec<f64> = draws_by_rep.iter().map(|rep| rep[p]).collect();
                    BandOutcome::Ok(band_from_deltas(state.ghat, &mut deltas, level))
                }
            };
            PointBand { point: point.clone(), level, replications: r, outcome }
        })
        .collect())
}
