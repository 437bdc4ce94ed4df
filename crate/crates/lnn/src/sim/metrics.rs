//! Replication-level summary metrics: pooled RMSE, bootstrap coverage, and
//! the interquartile-trimmed RMSE used for the likelihood model.

use crate::linalg::quantile_sorted;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse_g: f64,
    pub cr_g: f64,
    pub rmse_g_star: f64,
}

/// Pool estimates and bands over replications x points.
///
/// * `estimates[i][j]`: estimate of replication i at point j, `None` when the
///   point was unusable in that replication.
/// * `truths[j]`: true value at point j.
/// * `bands[i][j]`: the (lo, hi) confidence band, oriented so coverage is the
///   event `truth ∈ [lo, hi]`.
///
/// The trimmed RMSE keeps, per point, the replications whose estimate lies
/// inside the closed interquartile range of that point's estimates
/// (type-7 quantiles).
pub fn compute_metrics(
    estimates: &[Vec<Option<f64>>],
    truths: &[f64],
    bands: &[Vec<Option<(f64, f64)>>],
) -> Metrics {
    let n_points = truths.len();

    let mut sq_sum = 0.0;
    let mut sq_count = 0usize;
    let mut covered = 0usize;
    let mut band_count = 0usize;
    for (rep_est, rep_bands) in estimates.iter().zip(bands) {
        for j in 0..n_points {
            if let Some(est) = rep_est[j] {
                let diff = est - truths[j];
                sq_sum += diff * diff;
                sq_count += 1;
            }
            if let Some((lo, hi)) = rep_bands[j] {
                band_count += 1;
                if truths[j] >= lo && truths[j] <= hi {
                    covered += 1;
                }
            }
        }
    }
    let rmse_g = if sq_count > 0 { (sq_sum / sq_count as f64).sqrt() } else { f64::NAN };
    let cr_g = if band_count > 0 { covered as f64 / band_count as f64 } else { f64::NAN };

    let mut trimmed_sum = 0.0;
    let mut trimmed_count = 0usize;
    for j in 0..n_points {
        let mut values: Vec<f64> = estimates.iter().filter_map(|rep| rep[j]).collect();
        if values.is_empty() {
            continue;
        }
        values.sort_by(f64::total_cmp);
        let q1 = quantile_sorted(&values, 0.25);
        let q3 = quantile_sorted(&values, 0.75);
        for &v in &values {
            if v >= q1 && v <= q3 {
                let diff = v - truths[j];
                trimmed_sum += diff * diff;
                trimmed_count += 1;
            }
        }
    }
    let rmse_g_star =
        if trimmed_count > 0 { (trimmed_sum / trimmed_count as f64).sqrt() } else { f64::NAN };

    Metrics { rmse_g, cr_g, rmse_g_star }
}
