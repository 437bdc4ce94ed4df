//! Data-generating processes and evaluation-point layouts for the
//! simulation studies: AR(1) errors, uniform regressors, a sine truth, the
//! full Cartesian test grid, and the diagonal point set used for larger d.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, substream, tags};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Reg,
    Bin,
}

/// Simulation truth `g(x) = 1 + sin(mean(x))`.
pub fn truth_g(x: &[f64]) -> f64 {
    1.0 + (x.iter().sum::<f64>() / x.len() as f64).sin()
}

/// Stationary AR(1) series: the first element is drawn from the stationary
/// law N(0, innov_var / (1 - phi^2)), then the recursion runs forward.
pub fn gen_ar1(t: usize, phi: f64, innov_var: f64, seed: u64) -> Result<Vec<f64>> {
    if !(phi.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("AR(1) requires |phi| < 1, got {phi}")));
    }
    if !(innov_var > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "innovation variance must be positive, got {innov_var}"
        )));
    }
    let mut rng = substream(seed, &[tags::ERRORS]);
    let mut out = Vec::with_capacity(t);
    if t == 0 {
        return Ok(out);
    }
    let stationary_sd = (innov_var / (1.0 - phi * phi)).sqrt();
    let innov_sd = innov_var.sqrt();
    out.push(stationary_sd * rng.sample::<f64, _>(StandardNormal));
    for i in 1..t {
        let innov: f64 = rng.sample(StandardNormal);
        out.push(phi * out[i - 1] + innov_sd * innov);
    }
    Ok(out)
}

/// One simulated sample: regressors iid U(-a,a), errors AR(1) with
/// coefficient 0.5 and innovation variance 0.75 (unit stationary variance),
/// response per the chosen model.
pub fn gen_dataset(model: ModelKind, t: usize, d: usize, a: f64, seed: u64) -> Result<Dataset> {
    if t == 0 || d == 0 {
        return Err(Error::InvalidArgument("need t >= 1 and d >= 1".into()));
    }
    let mut x_rng = substream(seed, &[tags::REGRESSORS]);
    let mut xs = Vec::with_capacity(t * d);
    for _ in 0..t * d {
        xs.push(x_rng.random_range(-a..a));
    }
    let eps = gen_ar1(t, 0.5, 0.75, derive_seed(seed, &[tags::ERRORS]))?;
    let ys: Vec<f64> = xs
        .chunks_exact(d)
        .zip(&eps)
        .map(|(row, &e)| match model {
            ModelKind::Reg => truth_g(row) + e,
            ModelKind::Bin => {
                if truth_g(row) - e >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        })
        .collect();
    Dataset::new(ys, xs, d)
}

/// Full Cartesian grid of L^d points with coordinates
/// `-a + 2a (j-1)/(L-1)`, j = 1..L, corners included.
pub fn test_grid(a: f64, l: usize, d: usize) -> Result<Vec<Vec<f64>>> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!("grid needs L >= 2, got {l}")));
    }
    let coords: Vec<f64> = (0..l).map(|j| -a + 2.0 * a * j as f64 / (l - 1) as f64).collect();
    let total = l.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut point = vec![0.0; d];
        let mut rem = flat;
        for k in (0..d).rev() {
            point[k] = coords[rem % l];
            rem /= l;
        }
        out.push(point);
    }
    Ok(out)
}

/// Diagonal evaluation points `(lo + (i-1) step) 1_d`, i = 1..count, used
/// when a full grid is computationally out of reach.
pub fn diagonal_points(lo: f64, step: f64, count: usize, d: usize) -> Vec<Vec<f64>> {
    (0..count).map(|i| vec![lo + step * i as f64; d]).collect()
}
