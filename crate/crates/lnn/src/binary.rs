//! Maximum-likelihood estimation of the binary-outcome model: per-cube
//! log-likelihood, analytic score and Hessian, damped Newton iterations with
//! a least-squares warm start, probability prediction, and the closed-form
//! score wild bootstrap.

use crate::architecture::Architecture;
use crate::bootstrap::{Multipliers, PointBand};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regress::{
    assemble_bands, cube_design, fit_regression, group_by_cube, prepare_eval_points,
    Prediction,
};
use crate::rng::{substream, tags};
use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Probabilities are clamped into [CLAMP, 1-CLAMP] before logs and ratios;
/// finite samples can push the index far into the tails even though the
/// model keeps the true probability interior.
const CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkKind {
    Probit,
    Logistic,
}

impl LinkKind {
    pub fn cdf(self, v: f64) -> f64 {
        match self {
            LinkKind::Probit => 0.5 * statrs::function::erf::erfc(-v / std::f64::consts::SQRT_2),
            LinkKind::Logistic => 1.0 / (1.0 + (-v).exp()),
        }
    }

    pub fn pdf(self, v: f64) -> f64 {
        match self {
            LinkKind::Probit => (-0.5 * v * v).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            LinkKind::Logistic => {
                let p = self.cdf(v);
                p * (1.0 - p)
            }
        }
    }

    /// First derivative of the density.
    pub fn pdf_derivative(self, v: f64) -> f64 {
        match self {
            LinkKind::Probit => -v * self.pdf(v),
            LinkKind::Logistic => {
                let p = self.cdf(v);
                p * (1.0 - p) * (1.0 - 2.0 * p)
            }
        }
    }
}

/// A link whose density has been checked against a finite difference of the
/// CDF on a probe grid at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub kind: LinkKind,
}

impl LinkSpec {
    pub fn new(kind: LinkKind) -> Result<Self> {
        let step = 1e-5;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=24 {
            let v = -3.0 + 0.25 * i as f64;
            let cdf = kind.cdf(v);
            if cdf <= prev || !(0.0..1.0).contains(&cdf) {
                return Err(Error::Numerical("link CDF is not strictly increasing onto (0,1)".into()));
            }
            prev = cdf;
            let fd = (kind.cdf(v + step) - kind.cdf(v - step)) / (2.0 * step);
            if (fd - kind.pdf(v)).abs() > 1e-6 {
                return Err(Error::Numerical(format!(
                    "link density disagrees with the CDF derivative at {v}"
                )));
            }
        }
        Ok(Self { kind })
    }
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(CLAMP, 1.0 - CLAMP)
}

/// Newton-iteration controls.
#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Convergence threshold on the per-observation score norm.
    pub grad_tol: f64,
    pub step_tol: f64,
    /// Coefficient-norm cap applied to separated cubes.
    pub theta_cap: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            max_halvings: 30,
            grad_tol: 1e-8,
            step_tol: 1e-12,
            theta_cap: 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NewtonStatus {
    Converged,
    MaxIter,
    /// The likelihood has no interior maximum in the cube and the stored
    /// coefficients are capped. Covers exact separation (all labels equal)
    /// and quasi-separation, detected when the optimum saturates the
    /// probability clamp at some observation: an interior maximum keeps
    /// every fitted probability strictly inside the clamp bounds.
    Separated,
    Empty,
}

/// Per-cube convergence record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeConvergence {
    pub status: NewtonStatus,
    pub iterations: usize,
    /// Final per-observation score norm.
    pub grad_norm: f64,
    /// Log-likelihood after each accepted step, starting at the warm start.
    pub ll_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedBinary {
    arch: Architecture,
    link: LinkSpec,
    thetas: Vec<Option<DVector<f64>>>,
    records: Vec<CubeConvergence>,
    counts: Vec<usize>,
}

impl FittedBinary {
    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn link(&self) -> LinkSpec {
        self.link
    }

    pub fn theta(&self, cube: usize) -> Option<&DVector<f64>> {
        self.thetas[cube].as_ref()
    }

    pub fn thetas(&self) -> &[Option<DVector<f64>>] {
        &self.thetas
    }

    pub fn record(&self, cube: usize) -> &CubeConvergence {
        &self.records[cube]
    }

    pub fn records(&self) -> &[CubeConvergence] {
        &self.records
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub(crate) fn from_parts(
        arch: Architecture,
        link: LinkSpec,
        thetas: Vec<Option<DVector<f64>>>,
        records: Vec<CubeConvergence>,
        counts: Vec<usize>,
    ) -> Self {
        Self { arch, link, thetas, records, counts }
    }
}

fn check_labels(data: &Dataset) -> Result<()> {
    for &y in data.y() {
        if y != 0.0 && y != 1.0 {
            return Err(Error::Data(format!("binary response must be 0 or 1, found {y}")));
        }
    }
    Ok(())
}

/// Cube-local log-likelihood at the given coefficients.
fn cube_ll(x: &DMatrix<f64>, y: &[f64], theta: &DVector<f64>, link: LinkKind) -> f64 {
    let s = x * theta;
    let mut ll = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let p = clamp_prob(link.cdf(s[i]));
        ll += if yi == 1.0 { p.ln() } else { (1.0 - p).ln() };
    }
    ll
}

/// Per-observation score weight `(y - Phi) phi / (Phi (1 - Phi))`.
fn score_weight(y: f64, s: f64, link: LinkKind) -> f64 {
    let p = clamp_prob(link.cdf(s));
    (y - p) * link.pdf(s) / (p * (1.0 - p))
}

fn cube_score(x: &DMatrix<f64>, y: &[f64], theta: &DVector<f64>, link: LinkKind) -> DVector<f64> {
    let s = x * theta;
    let mut g = DVector::zeros(x.ncols());
    for (i, &yi) in y.iter().enumerate() {
        let w = score_weight(yi, s[i], link);
        g.axpy(w, &x.row(i).transpose(), 1.0);
    }
    g
}

/// Three-term analytic Hessian of the cube-local log-likelihood.
fn cube_hessian(x: &DMatrix<f64>, y: &[f64], theta: &DVector<f64>, link: LinkKind) -> DMatrix<f64> {
    let s = x * theta;
    let dq = x.ncols();
    let mut h = DMatrix::zeros(dq, dq);
    for (i, &yi) in y.iter().enumerate() {
        let si = s[i];
        let p = clamp_prob(link.cdf(si));
        let pdf = link.pdf(si);
        let pq = p * (1.0 - p);
        let resid = yi - p;
        let c = -pdf * pdf / pq + resid * link.pdf_derivative(si) / pq
            - resid * pdf * pdf * (1.0 - 2.0 * p) / (pq * pq);
        let row = x.row(i);
        h.syger(c, &row.transpose(), &row.transpose(), 1.0);
    }
    // Mirror the lower triangle filled by the symmetric rank-one updates.
    h.fill_upper_triangle_with_lower_triangle();
    h
}

/// Log-likelihood of a full coefficient set over all in-domain observations;
/// cubes without coefficients contribute nothing.
pub fn log_likelihood(
    thetas: &[Option<DVector<f64>>],
    data: &Dataset,
    arch: &Architecture,
    link: LinkKind,
) -> Result<f64> {
    check_labels(data)?;
    let mut ll = 0.0;
    for (t, row) in data.rows().enumerate() {
        let Some(cube) = arch.partition().locate(row) else { continue };
        let Some(theta) = thetas.get(cube).and_then(Option::as_ref) else { continue };
        let center = arch.partition().center(cube);
        let s = arch.feature_vector(row, &center).dot(theta);
        let p = clamp_prob(link.cdf(s));
        ll += if data.y()[t] == 1.0 { p.ln() } else { (1.0 - p).ln() };
    }
    Ok(ll)
}

/// Score of the cube-local likelihood at `theta_i`, restricted to the cube's
/// observations.
pub fn score(
    theta_i: &DVector<f64>,
    data: &Dataset,
    cube: usize,
    arch: &Architecture,
    link: LinkKind,
) -> DVector<f64> {
    let (groups, _) = group_by_cube(data, arch);
    let obs = &groups[cube];
    let x = cube_design(data, arch, cube, obs);
    let y: Vec<f64> = obs.iter().map(|&t| data.y()[t]).collect();
    cube_score(&x, &y, theta_i, link)
}

/// Hessian of the cube-local likelihood at `theta_i`.
pub fn hessian(
    theta_i: &DVector<f64>,
    data: &Dataset,
    cube: usize,
    arch: &Architecture,
    link: LinkKind,
) -> DMatrix<f64> {
    let (groups, _) = group_by_cube(data, arch);
    let obs = &groups[cube];
    let x = cube_design(data, arch, cube, obs);
    let y: Vec<f64> = obs.iter().map(|&t| data.y()[t]).collect();
    cube_hessian(&x, &y, theta_i, link)
}

fn cap_norm(mut theta: DVector<f64>, cap: f64) -> DVector<f64> {
    let norm = theta.norm();
    if norm > cap {
        theta *= cap / norm;
    }
    theta
}

struct NewtonOutcome {
    theta: DVector<f64>,
    record: CubeConvergence,
}

fn newton_maximize(
    x: &DMatrix<f64>,
    y: &[f64],
    start: DVector<f64>,
    link: LinkKind,
    opts: &NewtonOptions,
) -> Result<NewtonOutcome> {
    let n = y.len() as f64;
    let scale = n.max(1.0);
    let dq = x.ncols();
    let mut theta = start;
    let mut ll = cube_ll(x, y, &theta, link);
    let mut trace = vec![ll];
    let mut status = NewtonStatus::MaxIter;
    let mut iterations = 0usize;

    for _ in 0..opts.max_iterations {
        iterations += 1;
        if theta.norm() > opts.theta_cap {
            status = NewtonStatus::Separated;
            break;
        }
        let g = cube_score(x, y, &theta, link);
        if g.norm() / scale < opts.grad_tol {
            status = NewtonStatus::Converged;
            iterations -= 1;
            break;
        }
        let neg_h = -cube_hessian(x, y, &theta, link);
        // Levenberg shift until the normal matrix is positive definite.
        let trace_scale = (neg_h.trace().abs() / dq as f64).max(1e-12);
        let mut mu = 0.0;
        let chol = loop {
            let shifted = if mu == 0.0 {
                neg_h.clone()
            } else {
                &neg_h + DMatrix::identity(dq, dq) * mu
            };
            match Cholesky::new(shifted) {
                Some(c) => break c,
                None => {
                    mu = if mu == 0.0 { 1e-6 * trace_scale } else { mu * 10.0 };
                    if mu > 1e12 * trace_scale {
                        return Err(Error::Numerical(
                            "Newton normal matrix could not be stabilized".into(),
                        ));
                    }
                }
            }
        };
        let dir = chol.solve(&g);

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let candidate = &theta + &dir * lambda;
            let ll_new = cube_ll(x, y, &candidate, link);
            if ll_new.is_finite() && ll_new >= ll {
                theta = candidate;
                ll = ll_new;
                accepted = true;
                break;
            }
            lambda /= 2.0;
        }
        trace.push(ll);
        if !accepted {
            break;
        }
        if (dir.norm() * lambda) < opts.step_tol {
            break;
        }
    }

    let grad_norm = cube_score(x, y, &theta, link).norm() / scale;
    if grad_norm < opts.grad_tol {
        status = NewtonStatus::Converged;
    }
    // A vanishing gradient at clamped probabilities is an artifact of the
    // clamp, not an interior optimum: the cube is quasi-separated.
    let fitted = x * &theta;
    let saturated = fitted
        .iter()
        .any(|&s| !(CLAMP..=1.0 - CLAMP).contains(&link.cdf(s)));
    if saturated || theta.norm() > opts.theta_cap {
        status = NewtonStatus::Separated;
        theta = cap_norm(theta, opts.theta_cap);
    }
    Ok(NewtonOutcome {
        theta,
        record: CubeConvergence { status, iterations, grad_norm, ll_trace: trace },
    })
}

/// Per-cube likelihood maximization, warm-started from the least-squares fit
/// of the raw labels. Cubes are independent by the disjointness of the
/// indicator weights and run in parallel.
pub fn fit_binary(
    data: &Dataset,
    arch: &Architecture,
    link: LinkSpec,
    opts: &NewtonOptions,
) -> Result<FittedBinary> {
    check_labels(data)?;
    let warm = fit_regression(data, arch)?;
    let (groups, _) = group_by_cube(data, arch);
    let mut mixed = false;
    for obs in &groups {
        let mut saw = [false, false];
        for &t in obs {
            saw[data.y()[t] as usize] = true;
        }
        if saw[0] && saw[1] {
            mixed = true;
            break;
        }
    }
    if !mixed {
        return Err(Error::Data("no cube contains both labels".into()));
    }

    let dq = arch.dq();
    let outcomes: Vec<(Option<DVector<f64>>, CubeConvergence)> = groups
        .par_iter()
        .enumerate()
        .map(|(cube, obs)| {
            if obs.is_empty() {
                return Ok((
                    None,
                    CubeConvergence {
                        status: NewtonStatus::Empty,
                        iterations: 0,
                        grad_norm: f64::NAN,
                        ll_trace: Vec::new(),
                    },
                ));
            }
            let y: Vec<f64> = obs.iter().map(|&t| data.y()[t]).collect();
            let start = warm
                .theta(cube)
                .cloned()
                .unwrap_or_else(|| DVector::zeros(dq));
            let single_label = y.iter().all(|&v| v == y[0]);
            if single_label {
                let theta = cap_norm(start, opts.theta_cap);
                return Ok((
                    Some(theta),
                    CubeConvergence {
                        status: NewtonStatus::Separated,
                        iterations: 0,
                        grad_norm: f64::NAN,
                        ll_trace: Vec::new(),
                    },
                ));
            }
            let x = cube_design(data, arch, cube, obs);
            let out = newton_maximize(&x, &y, start, link.kind, opts)?;
            Ok((Some(out.theta), out.record))
        })
        .collect::<Result<_>>()?;

    let counts: Vec<usize> = groups.iter().map(Vec::len).collect();
    let mut thetas = Vec::with_capacity(outcomes.len());
    let mut records = Vec::with_capacity(outcomes.len());
    for (theta, record) in outcomes {
        thetas.push(theta);
        records.push(record);
    }
    Ok(FittedBinary::from_parts(arch.clone(), link, thetas, records, counts))
}

/// Index prediction `ghat(x)` on the latent scale.
pub fn predict_g(model: &FittedBinary, x: &[f64]) -> Prediction {
    let Some(cube) = model.arch.partition().locate(x) else {
        return Prediction::Outside;
    };
    if model.records[cube].status != NewtonStatus::Converged {
        return Prediction::Unusable;
    }
    let center = model.arch.partition().center(cube);
    let feat = model.arch.feature_vector(x, &center);
    Prediction::Value(model.thetas[cube].as_ref().expect("converged cube").dot(&feat))
}

/// Probability prediction `Phi(ghat(x))`.
pub fn predict_prob(model: &FittedBinary, x: &[f64]) -> Prediction {
    match predict_g(model, x) {
        Prediction::Value(g) => Prediction::Value(model.link.kind.cdf(g)),
        other => other,
    }
}

/// Score wild bootstrap with the closed-form update
/// `theta* = theta + Hessian^{-1} (sum_t score_t eta_t)`; no re-optimization.
/// Cubes whose Hessian is singular are excluded and their evaluation points
/// marked unusable.
pub fn score_bootstrap(
    model: &FittedBinary,
    data: &Dataset,
    r: usize,
    seed: u64,
    eval_points: &[Vec<f64>],
    level: f64,
    multipliers: Multipliers,
) -> Result<Vec<PointBand>> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("bootstrap requires R >= 2, got {r}")));
    }
    check_labels(data)?;
    let arch = &model.arch;
    let (groups, _) = group_by_cube(data, arch);
    if groups.iter().map(Vec::len).collect::<Vec<_>>() != model.counts {
        return Err(Error::Data(
            "bootstrap data does not match the sample the model was fitted on".into(),
        ));
    }

    struct CubeEngine {
        lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
        obs: Vec<usize>,
        /// Per-observation score vectors as columns, d_q x n_i.
        scores: DMatrix<f64>,
    }

    let engines: Vec<Option<CubeEngine>> = (0..groups.len())
        .into_par_iter()
        .map(|cube| {
            if model.records[cube].status != NewtonStatus::Converged {
                return None;
            }
            let obs = &groups[cube];
            let theta = model.thetas[cube].as_ref().unwrap();
            let x = cube_design(data, arch, cube, obs);
            let s = &x * theta;
            let dq = x.ncols();
            let mut scores = DMatrix::zeros(dq, obs.len());
            for (i, &t) in obs.iter().enumerate() {
                let w = score_weight(data.y()[t], s[i], model.link.kind);
                scores.column_mut(i).copy_from(&(x.row(i).transpose() * w));
            }
            let y: Vec<f64> = obs.iter().map(|&t| data.y()[t]).collect();
            let hess = cube_hessian(&x, &y, theta, model.link.kind);
            let lu = hess.lu();
            if lu.is_invertible() {
                Some(CubeEngine { lu, obs: obs.clone(), scores })
            } else {
                None
            }
        })
        .collect();

    let usable = |cube: usize| engines[cube].is_some();
    let prepared = prepare_eval_points(
        arch,
        usable,
        |cube, feat| model.thetas[cube].as_ref().unwrap().dot(feat),
        eval_points,
    );

    let t_len = data.len();
    let deltas_by_rep: Vec<Vec<f64>> = (0..r)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(seed, &[tags::SCORE, rep as u64]);
            let mut eta = vec![0.0; t_len];
            multipliers.draw(&mut rng, &mut eta);
            let mut shifts: Vec<Option<DVector<f64>>> = vec![None; engines.len()];
            for (cube, engine) in engines.iter().enumerate() {
                let Some(engine) = engine else { continue };
                let eta_sub =
                    DVector::from_iterator(engine.obs.len(), engine.obs.iter().map(|&t| eta[t]));
                let z = &engine.scores * eta_sub;
                shifts[cube] = engine.lu.solve(&z);
            }
            let deltas: Vec<f64> = prepared
                .iter()
                .map(|ep| match (&ep.cube, &ep.feat) {
                    (Some(cube), Some(feat)) => {
                        shifts[*cube].as_ref().map_or(f64::NAN, |s| s.dot(feat))
                    }
                    _ => f64::NAN,
                })
                .collect();
            Ok(deltas)
        })
        .collect::<Result<_>>()?;

    Ok(assemble_bands(eval_points, &prepared, &deltas_by_rep, level, r))
}
