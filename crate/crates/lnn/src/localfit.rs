//! Per-point local estimation: the network is rebuilt around an arbitrary
//! evaluation point and fitted on the window of half-width h centred there.
//! Unlike the global partition this places no domain restriction on the
//! point; only data sparsity gates feasibility.

use crate::architecture::{Architecture, Bandwidth, LnnConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::LeastSquares;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct LocalFit {
    pub ghat: f64,
    pub theta: DVector<f64>,
    /// In-window observation count.
    pub count: usize,
    /// True when fewer than d_q observations forced a minimum-norm solution.
    pub deficient: bool,
}

/// Observations with every coordinate within h of the window center.
fn window_obs(data: &Dataset, x0: &[f64], h: f64) -> Vec<usize> {
    data.rows()
        .enumerate()
        .filter(|(_, row)| row.iter().zip(x0).all(|(x, c)| (x - c).abs() <= h))
        .map(|(t, _)| t)
        .collect()
}

/// Least squares on the window `C_{x0,h}` with the network centred at `x0`;
/// returns the prediction at `x0` and the local coefficients.
pub fn fit_local(data: &Dataset, x0: &[f64], h: f64, config: &LnnConfig) -> Result<LocalFit> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("window half-width h = {h} must be positive")));
    }
    if x0.len() != data.dim() || data.dim() != config.d {
        return Err(Error::Data("point, data, and config dimensions disagree".into()));
    }
    // The feature map only depends on h (through the direction vectors), not
    // on the global domain, so a single-cube architecture carries it.
    let local_cfg = LnnConfig { a: h, bandwidth: Bandwidth::Explicit(h), ..config.clone() };
    let arch = Architecture::build(&local_cfg, None)?;
    debug_assert_eq!(arch.m(), 1);
    debug_assert_eq!(arch.h(), h);

    let obs = window_obs(data, x0, h);
    if obs.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no observation within the window of half-width {h} around the point"
        )));
    }
    let dq = arch.dq();
    let mut x = DMatrix::zeros(obs.len(), dq);
    for (i, &t) in obs.iter().enumerate() {
        let feat = arch.feature_vector(data.row(t), x0);
        x.row_mut(i).copy_from(&feat.transpose());
    }
    let y = DVector::from_iterator(obs.len(), obs.iter().map(|&t| data.y()[t]));
    let ls = LeastSquares::factorize(&x)?;
    let theta = ls.solve(&y)?;
    let deficient = ls.deficient || obs.len() < dq;
    let ghat = theta.dot(&arch.feature_vector(x0, x0));
    Ok(LocalFit { ghat, theta, count: obs.len(), deficient })
}
