//! Small dense least-squares solvers shared by the global, local, and
//! bootstrap fitting paths. A solved system keeps its factorization so that
//! repeated solves against new right-hand sides (bootstrap refits) cost a
//! matrix-vector product instead of a refactorization.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Relative diagonal tolerance below which the QR path defers to the SVD.
const QR_RANK_TOL: f64 = 1e-12;
/// Singular values below `max_sv * SVD_EPS` are treated as zero.
const SVD_EPS: f64 = 1e-12;

/// A factorized design matrix mapping responses to coefficients.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    kind: Kind,
    /// True when the system was rank-deficient or underdetermined and the
    /// minimum-norm solution was taken.
    pub deficient: bool,
    pub rank: usize,
    n_rows: usize,
}

#[derive(Debug, Clone)]
enum Kind {
    Qr { q_t: DMatrix<f64>, r: DMatrix<f64> },
    Pinv(DMatrix<f64>),
}

impl LeastSquares {
    /// Factorize an n x p design matrix. Full-column-rank systems go through
    /// a thin QR; everything else falls back to the SVD pseudo-inverse.
    pub fn factorize(x: &DMatrix<f64>) -> Result<Self> {
        let (n, p) = x.shape();
        if n == 0 {
            return Err(Error::InsufficientData("empty design matrix".into()));
        }
        if n >= p {
            let qr = x.clone().qr();
            let r = qr.r();
            let mut dmin = f64::INFINITY;
            let mut dmax: f64 = 0.0;
            for j in 0..p {
                let v = r[(j, j)].abs();
                dmin = dmin.min(v);
                dmax = dmax.max(v);
            }
            if dmax > 0.0 && dmin > QR_RANK_TOL * dmax {
                return Ok(Self {
                    kind: Kind::Qr { q_t: qr.q().transpose(), r },
                    deficient: false,
                    rank: p,
                    n_rows: n,
                });
            }
        }
        let svd = x.clone().svd(true, true);
        let max_sv = svd.singular_values.max();
        let eps = if max_sv > 0.0 { max_sv * SVD_EPS } else { SVD_EPS };
        let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
        let pinv = svd
            .pseudo_inverse(eps)
            .map_err(|e| Error::Numerical(format!("pseudo-inverse failed: {e}")))?;
        Ok(Self {
            kind: Kind::Pinv(pinv),
            deficient: true,
            rank,
            n_rows: n,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Coefficients for the given response vector.
    pub fn solve(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.kind {
            Kind::Qr { q_t, r } => {
                let qty = q_t * y;
                r.solve_upper_triangular(&qty)
                    .ok_or_else(|| Error::Numerical("upper-triangular solve failed".into()))
            }
            Kind::Pinv(p) => Ok(p * y),
        }
    }
}

/// Type-7 (linear interpolation) quantile of pre-sorted ascending values.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Type-7 quantile of unsorted values.
pub fn quantile(values: &mut Vec<f64>, p: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    quantile_sorted(values, p)
}
