//! Least-squares estimation of the regression model: per-cube closed-form
//! fits, prediction, residuals, the plug-in asymptotic variance, and the
//! residual wild bootstrap.

use crate::architecture::Architecture;
use crate::basis::moment_matrix;
use crate::bootstrap::{band_from_deltas, BandOutcome, Multipliers, PointBand};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::LeastSquares;
use crate::rng::{substream, tags};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Outcome of evaluating a fitted model at a point. Markers are values, not
/// errors: the estimator is simply undefined outside the domain and in cubes
/// whose coefficients could not be determined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prediction {
    Value(f64),
    Outside,
    Unusable,
}

impl Prediction {
    pub fn value(self) -> Option<f64> {
        match self {
            Prediction::Value(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CubeStatus {
    Ok,
    /// Fewer observations than coefficients, or a rank-deficient design;
    /// the stored coefficients are the minimum-norm solution.
    Underdetermined,
    Empty,
}

/// Per-cube least-squares coefficients with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedRegression {
    arch: Architecture,
    thetas: Vec<Option<DVector<f64>>>,
    statuses: Vec<CubeStatus>,
    counts: Vec<usize>,
    sigma_eps2: f64,
}

impl FittedRegression {
    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn theta(&self, cube: usize) -> Option<&DVector<f64>> {
        self.thetas[cube].as_ref()
    }

    pub fn thetas(&self) -> &[Option<DVector<f64>>] {
        &self.thetas
    }

    pub fn status(&self, cube: usize) -> CubeStatus {
        self.statuses[cube]
    }

    pub fn statuses(&self) -> &[CubeStatus] {
        &self.statuses
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn sigma_eps2(&self) -> f64 {
        self.sigma_eps2
    }

    pub(crate) fn from_parts(
        arch: Architecture,
        thetas: Vec<Option<DVector<f64>>>,
        statuses: Vec<CubeStatus>,
        counts: Vec<usize>,
        sigma_eps2: f64,
    ) -> Self {
        Self { arch, thetas, statuses, counts, sigma_eps2 }
    }
}

/// Observation indices per cube, ascending in t, plus the number of
/// in-domain observations.
pub(crate) fn group_by_cube(data: &Dataset, arch: &Architecture) -> (Vec<Vec<usize>>, usize) {
    let mut groups = vec![Vec::new(); arch.partition().n_cubes()];
    let mut usable = 0usize;
    for (t, row) in data.rows().enumerate() {
        if let Some(cube) = arch.partition().locate(row) {
            groups[cube].push(t);
            usable += 1;
        }
    }
    (groups, usable)
}

/// Feature rows for the given observations of one cube, ascending in t.
pub(crate) fn cube_design(
    data: &Dataset,
    arch: &Architecture,
    cube: usize,
    obs: &[usize],
) -> DMatrix<f64> {
    let center = arch.partition().center(cube);
    let dq = arch.dq();
    let mut x = DMatrix::zeros(obs.len(), dq);
    for (i, &t) in obs.iter().enumerate() {
        let feat = arch.feature_vector(data.row(t), &center);
        x.row_mut(i).copy_from(&feat.transpose());
    }
    x
}

struct CubeFit {
    theta: Option<DVector<f64>>,
    status: CubeStatus,
    rss: f64,
}

fn fit_cube(x: &DMatrix<f64>, y: &DVector<f64>, dq: usize) -> Result<CubeFit> {
    if x.nrows() == 0 {
        return Ok(CubeFit { theta: None, status: CubeStatus::Empty, rss: 0.0 });
    }
    let ls = LeastSquares::factorize(x)?;
    let theta = ls.solve(y)?;
    let status = if ls.deficient || x.nrows() < dq {
        CubeStatus::Underdetermined
    } else {
        CubeStatus::Ok
    };
    let rss = if status == CubeStatus::Ok {
        let resid = y - x * &theta;
        resid.norm_squared()
    } else {
        0.0
    };
    Ok(CubeFit { theta: Some(theta), status, rss })
}

/// Closed-form per-cube least squares over the whole sample. Cubes run in
/// parallel; results are independent of scheduling.
pub fn fit_regression(data: &Dataset, arch: &Architecture) -> Result<FittedRegression> {
    if data.dim() != arch.config().d {
        return Err(Error::Data(format!(
            "data dimension {} does not match the architecture dimension {}",
            data.dim(),
            arch.config().d
        )));
    }
    let (groups, usable) = group_by_cube(data, arch);
    if usable == 0 {
        return Err(Error::InsufficientData(
            "no observation falls inside [-a,a]^d".into(),
        ));
    }
    let dq = arch.dq();
    let fits: Vec<CubeFit> = groups
        .par_iter()
        .enumerate()
        .map(|(cube, obs)| {
            let x = cube_design(data, arch, cube, obs);
            let y = DVector::from_iterator(obs.len(), obs.iter().map(|&t| data.y()[t]));
            fit_cube(&x, &y, dq)
        })
        .collect::<Result<_>>()?;

    let counts: Vec<usize> = groups.iter().map(Vec::len).collect();
    let rss: f64 = fits.iter().map(|f| f.rss).sum();
    let fitted_cubes = fits.iter().filter(|f| f.status == CubeStatus::Ok).count();
    // Residual variance over the total sample size net of the parameters
    // actually used, with the divisor floored at one.
    let divisor = (data.len() as f64 - (fitted_cubes * dq) as f64).max(1.0);
    let sigma_eps2 = rss / divisor;

    let mut thetas = Vec::with_capacity(fits.len());
    let mut statuses = Vec::with_capacity(fits.len());
    for f in fits {
        thetas.push(f.theta);
        statuses.push(f.status);
    }
    Ok(FittedRegression::from_parts(arch.clone(), thetas, statuses, counts, sigma_eps2))
}

/// Evaluate the fitted network at a point.
pub fn predict(model: &FittedRegression, x: &[f64]) -> Prediction {
    let Some(cube) = model.arch.partition().locate(x) else {
        return Prediction::Outside;
    };
    if model.statuses[cube] != CubeStatus::Ok {
        return Prediction::Unusable;
    }
    let center = model.arch.partition().center(cube);
    let feat = model.arch.feature_vector(x, &center);
    Prediction::Value(model.thetas[cube].as_ref().expect("ok cube has coefficients").dot(&feat))
}

/// Elementwise `y_t - ghat(x_t)`; observations outside the domain or in
/// flagged cubes carry NaN markers.
pub fn residuals(model: &FittedRegression, data: &Dataset) -> Vec<f64> {
    data.rows()
        .zip(data.y())
        .map(|(row, &y)| match predict(model, row) {
            Prediction::Value(v) => y - v,
            _ => f64::NAN,
        })
        .collect()
}

/// Plug-in variance core: `sigma_eps2 [Moment^{-1}]_{11} / density`, the
/// asymptotic variance of `sqrt(T h^d) (ghat - g)` at a cube center.
pub fn plugin_sigma2(
    idx: &crate::basis::MultiIndexSet,
    sigma_eps2: f64,
    density: f64,
) -> Result<f64> {
    if !(density > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "density must be positive, got {density}"
        )));
    }
    let moment = moment_matrix(idx);
    let chol = nalgebra::Cholesky::new(moment)
        .ok_or_else(|| Error::Numerical("moment matrix is not positive definite".into()))?;
    let mut e1 = DVector::zeros(idx.len());
    e1[0] = 1.0;
    let v = chol.solve(&e1);
    Ok(sigma_eps2 * v[0] / density)
}

/// Plug-in asymptotic variance at `x0` given the design density there. The
/// studentized quantity is `sqrt(T h^d) (ghat - g) / sigma_x0`.
pub fn plugin_variance(model: &FittedRegression, _x0: &[f64], density_at_x0: f64) -> Result<f64> {
    plugin_sigma2(model.arch.indices(), model.sigma_eps2, density_at_x0)
}

/// Evaluation-point state shared by the bootstrap procedures.
pub(crate) struct EvalPoint {
    pub cube: Option<usize>,
    pub feat: Option<DVector<f64>>,
    pub ghat: Option<f64>,
}

pub(crate) fn prepare_eval_points(
    arch: &Architecture,
    usable_cube: impl Fn(usize) -> bool,
    ghat_of: impl Fn(usize, &DVector<f64>) -> f64,
    eval_points: &[Vec<f64>],
) -> Vec<EvalPoint> {
    eval_points
        .iter()
        .map(|p| match arch.partition().locate(p) {
            None => EvalPoint { cube: None, feat: None, ghat: None },
            Some(cube) => {
                if usable_cube(cube) {
                    let center = arch.partition().center(cube);
                    let feat = arch.feature_vector(p, &center);
                    let ghat = ghat_of(cube, &feat);
                    EvalPoint { cube: Some(cube), feat: Some(feat), ghat: Some(ghat) }
                } else {
                    EvalPoint { cube: Some(cube), feat: None, ghat: None }
                }
            }
        })
        .collect()
}

pub(crate) fn assemble_bands(
    eval_points: &[Vec<f64>],
    prepared: &[EvalPoint],
    deltas_by_rep: &[Vec<f64>],
    level: f64,
    replications: usize,
) -> Vec<PointBand> {
    prepared
        .iter()
        .enumerate()
        .map(|(p, ep)| {
            let outcome = match (ep.cube, ep.ghat) {
                (None, _) => BandOutcome::Outside,
                (Some(_), None) => BandOutcome::Unusable,
                (Some(_), Some(ghat)) => {
                    let mut deltas: Vec<f64> =
                        deltas_by_rep.iter().map(|rep| rep[p]).collect();
                    BandOutcome::Ok(band_from_deltas(ghat, &mut deltas, level))
                }
            };
            PointBand { point: eval_points[p].clone(), level, replications, outcome }
        })
        .collect()
}

/// Residual wild bootstrap: `y*_t = ghat(x_t) + resid_t eta_t` with iid
/// standard-normal multipliers, refit per replication, and a quantile band
/// of the centered draws at each evaluation point.
///
/// The refit reuses the cached per-cube factorization: with an unchanged
/// design, the refitted coefficients are exactly
/// `theta + solve(resid .* eta)`, so each replication costs one
/// matrix-vector product per cube.
pub fn wild_bootstrap_reg(
    model: &FittedRegression,
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
    if data.dim() != model.arch.config().d {
        return Err(Error::Data("data dimension does not match the model".into()));
    }
    let arch = &model.arch;
    let (groups, _) = group_by_cube(data, arch);
    if groups.iter().map(Vec::len).collect::<Vec<_>>() != model.counts {
        return Err(Error::Data(
            "bootstrap data does not match the sample the model was fitted on".into(),
        ));
    }

    // Per-cube solvers and residual subvectors for the usable cubes.
    let n_cubes = groups.len();
    let resid = residuals(model, data);
    let solvers: Vec<Option<(LeastSquares, Vec<usize>, Vec<f64>)>> = (0..n_cubes)
        .into_par_iter()
        .map(|cube| {
            if model.statuses[cube] != CubeStatus::Ok {
                return Ok(None);
            }
            let obs = &groups[cube];
            let x = cube_design(data, arch, cube, obs);
            let ls = LeastSquares::factorize(&x)?;
            let cube_resid: Vec<f64> = obs.iter().map(|&t| resid[t]).collect();
            Ok(Some((ls, obs.clone(), cube_resid)))
        })
        .collect::<Result<_>>()?;

    let prepared = prepare_eval_points(
        arch,
        |cube| model.statuses[cube] == CubeStatus::Ok,
        |cube, feat| model.thetas[cube].as_ref().unwrap().dot(feat),
        eval_points,
    );

    let t_len = data.len();
    let deltas_by_rep: Vec<Vec<f64>> = (0..r)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(seed, &[tags::WILD, rep as u64]);
            let mut eta = vec![0.0; t_len];
            multipliers.draw(&mut rng, &mut eta);
            let mut cube_shift: Vec<Option<DVector<f64>>> = vec![None; n_cubes];
            for (cube, solver) in solvers.iter().enumerate() {
                if let Some((ls, obs, cube_resid)) = solver {
                    let v = DVector::from_iterator(
                        obs.len(),
                        obs.iter().zip(cube_resid).map(|(&t, &e)| e * eta[t]),
                    );
                    cube_shift[cube] = Some(ls.solve(&v)?);
                }
            }
            let deltas: Vec<f64> = prepared
                .iter()
                .map(|ep| match (&ep.cube, &ep.feat) {
                    (Some(cube), Some(feat)) => {
                        cube_shift[*cube].as_ref().map_or(f64::NAN, |s| s.dot(feat))
                    }
                    _ => f64::NAN,
                })
                .collect();
            Ok(deltas)
        })
        .collect::<Result<_>>()?;

    Ok(assemble_bands(eval_points, &prepared, &deltas_by_rep, level, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::architecture::{Bandwidth, LnnConfig};
    use crate::rng;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn arch(d: usize, q: u32, a: f64, h: f64) -> Architecture {
        let cfg = LnnConfig {
            a,
            d,
            q,
            u_sigma: -0.5,
            bandwidth: Bandwidth::Explicit(h),
            ..LnnConfig::default()
        };
        Architecture::build(&cfg, None).unwrap()
    }

    fn uniform_dataset(t: usize, d: usize, a: f64, seed: u64, y: impl Fn(&[f64]) -> f64) -> Dataset {
        let mut rng = rng::substream(seed, &[rng::tags::REGRESSORS]);
        let mut xs = Vec::with_capacity(t * d);
        for _ in 0..t * d {
            xs.push(rng.random_range(-a..a));
        }
        let ys: Vec<f64> = xs.chunks_exact(d).map(|row| y(row)).collect();
        Dataset::new(ys, xs, d).unwrap()
    }

    #[test]
    fn zero_response_gives_zero_fit() {
        let arch = arch(1, 2, 1.0, 0.5);
        let data = uniform_dataset(200, 1, 1.0, 3, |_| 0.0);
        let model = fit_regression(&data, &arch).unwrap();
        assert_eq!(model.sigma_eps2(), 0.0);
        for theta in model.thetas().iter().flatten() {
            assert!(theta.iter().all(|&v| v == 0.0));
        }
        assert_eq!(predict(&model, &[0.3]), Prediction::Value(0.0));
    }

    #[test]
    fn interpolation_when_count_equals_dq() {
        // Exactly d_q = 3 points in the single cube: residuals vanish.
        let arch = arch(1, 2, 1.0, 1.0);
        assert_eq!(arch.m(), 1);
        let data = Dataset::new(vec![1.0, -2.0, 0.5], vec![-0.5, 0.1, 0.8], 1).unwrap();
        let model = fit_regression(&data, &arch).unwrap();
        assert_eq!(model.status(0), CubeStatus::Ok);
        let resid = residuals(&model, &data);
        for r in resid {
            assert_abs_diff_eq!(r, 0.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(model.sigma_eps2(), 0.0, epsilon = 1e-18);
    }

    #[test]
    fn matches_normal_equation_oracle() {
        let arch = arch(1, 2, 1.0, 0.5);
        let data = uniform_dataset(60, 1, 1.0, 11, |x| 0.3 + x[0] - 0.5 * x[0] * x[0]);
        let model = fit_regression(&data, &arch).unwrap();
        let (groups, _) = group_by_cube(&data, &arch);
        for (cube, obs) in groups.iter().enumerate() {
            if model.status(cube) != CubeStatus::Ok {
                continue;
            }
            let x = cube_design(&data, &arch, cube, obs);
            let y = DVector::from_iterator(obs.len(), obs.iter().map(|&t| data.y()[t]));
            let gram = x.transpose() * &x;
            let rhs = x.transpose() * &y;
            let oracle = gram.clone().lu().solve(&rhs).unwrap();
            let theta = model.theta(cube).unwrap();
            for j in 0..theta.len() {
                assert!(
                    (theta[j] - oracle[j]).abs() <= 1e-8 * oracle[j].abs().max(1.0),
                    "cube {cube}: {} vs oracle {}",
                    theta[j],
                    oracle[j]
                );
            }
            // Normal-equation residual.
            let residual = (&gram * theta - &rhs).norm() / rhs.norm().max(1.0);
            assert!(residual < 1e-8, "normal equation residual {residual}");
        }
    }

    #[test]
    fn empty_and_underdetermined_cubes_are_flagged() {
        let arch = arch(1, 2, 1.0, 0.5); // two cubes, d_q = 3
        // All mass in the right cube; left cube empty.
        let data = Dataset::new(
            vec![1.0, 2.0, 0.5, 0.7],
            vec![0.2, 0.4, 0.6, 0.8],
            1,
        )
        .unwrap();
        let model = fit_regression(&data, &arch).unwrap();
        assert_eq!(model.status(0), CubeStatus::Empty);
        assert_eq!(model.status(1), CubeStatus::Ok);
        assert_eq!(predict(&model, &[-0.5]), Prediction::Unusable);
        assert_eq!(predict(&model, &[2.0]), Prediction::Outside);

        // Two observations cannot determine three coefficients.
        let sparse = Dataset::new(vec![1.0, 2.0], vec![0.2, 0.6], 1).unwrap();
        let model = fit_regression(&sparse, &arch).unwrap();
        assert_eq!(model.status(1), CubeStatus::Underdetermined);
        assert!(model.theta(1).is_some());
        assert_eq!(predict(&model, &[0.5]), Prediction::Unusable);
    }

    #[test]
    fn out_of_domain_data_is_rejected() {
        let arch = arch(1, 1, 1.0, 0.5);
        let data = Dataset::new(vec![1.0, 2.0], vec![5.0, -7.0], 1).unwrap();
        match fit_regression(&data, &arch) {
            Err(Error::InsufficientData(_)) => {}
            other => panic!("expected insufficient-data error, got {other:?}"),
        }
    }

    #[test]
    fn residual_mean_is_small_on_iid_noise() {
        let arch = arch(1, 3, 3.0, 1.0);
        let mut rng = rng::substream(5, &[rng::tags::ERRORS]);
        let t = 4000;
        let mut data = uniform_dataset(t, 1, 3.0, 5, |x| (x[0] / 3.0).sin());
        let noisy: Vec<f64> = data
            .y()
            .iter()
            .map(|&v| v + rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        data = data.with_response(noisy).unwrap();
        let model = fit_regression(&data, &arch).unwrap();
        let resid = residuals(&model, &data);
        let finite: Vec<f64> = resid.into_iter().filter(|v| v.is_finite()).collect();
        let mean = finite.iter().sum::<f64>() / finite.len() as f64;
        let sd = model.sigma_eps2().sqrt();
        assert!(mean.abs() < 3.0 * sd / (finite.len() as f64).sqrt() + 1e-3);
    }

    #[test]
    fn per_cube_independence_under_reordering() {
        let arch = arch(1, 2, 1.0, 0.5);
        let data = uniform_dataset(40, 1, 1.0, 17, |x| x[0] * x[0]);
        let model = fit_regression(&data, &arch).unwrap();

        // Interleave the two cubes differently, preserving within-cube order.
        let (groups, _) = group_by_cube(&data, &arch);
        let order: Vec<usize> = groups[1].iter().chain(groups[0].iter()).copied().collect();
        let y: Vec<f64> = order.iter().map(|&t| data.y()[t]).collect();
        let x: Vec<f64> = order.iter().map(|&t| data.row(t)[0]).collect();
        let permuted = Dataset::new(y, x, 1).unwrap();
        let model2 = fit_regression(&permuted, &arch).unwrap();
        for cube in 0..groups.len() {
            assert_eq!(model.theta(cube), model2.theta(cube), "cube {cube} changed");
        }
    }

    #[test]
    fn plugin_variance_values() {
        let arch = arch(1, 1, 1.0, 1.0);
        let data = uniform_dataset(50, 1, 1.0, 23, |x| x[0]);
        let mut model = fit_regression(&data, &arch).unwrap();
        model.sigma_eps2 = 1.0;
        // [Moment^{-1}]_{11} = 1/2 for d=1, q=1.
        let v = plugin_variance(&model, &[0.0], 0.5).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        let v2 = plugin_variance(&model, &[0.0], 1.0).unwrap();
        assert_abs_diff_eq!(v2, 0.5, epsilon = 1e-12);
        model.sigma_eps2 = 0.0;
        assert_eq!(plugin_variance(&model, &[0.0], 0.5).unwrap(), 0.0);
        assert!(plugin_variance(&model, &[0.0], 0.0).is_err());
    }

    #[test]
    fn zero_multipliers_collapse_bands_exactly() {
        let arch = arch(1, 2, 1.0, 0.5);
        let mut rng = rng::substream(9, &[rng::tags::ERRORS]);
        let mut data = uniform_dataset(80, 1, 1.0, 9, |x| 1.0 + x[0]);
        let noisy: Vec<f64> = data
            .y()
            .iter()
            .map(|&v| v + 0.3 * rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        data = data.with_response(noisy).unwrap();
        let model = fit_regression(&data, &arch).unwrap();
        let points: Vec<Vec<f64>> = vec![vec![-0.7], vec![0.0], vec![0.4]];
        let bands =
            wild_bootstrap_reg(&model, &data, 16, 1, &points, 0.95, Multipliers::Zero).unwrap();
        for pb in &bands {
            let band = pb.band().expect("in-domain point");
            assert_eq!(band.lo, band.ghat);
            assert_eq!(band.hi, band.ghat);
            let expected = predict(&model, &pb.point).value().unwrap();
            assert_eq!(band.ghat, expected);
        }
    }

    #[test]
    fn bootstrap_requires_two_replications() {
        let arch = arch(1, 1, 1.0, 1.0);
        let data = uniform_dataset(30, 1, 1.0, 2, |x| x[0]);
        let model = fit_regression(&data, &arch).unwrap();
        assert!(matches!(
            wild_bootstrap_reg(&model, &data, 1, 0, &[vec![0.0]], 0.95, Multipliers::Gaussian),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn bootstrap_is_seed_deterministic() {
        let arch = arch(1, 2, 1.0, 0.5);
        let mut rng = rng::substream(31, &[rng::tags::ERRORS]);
        let mut data = uniform_dataset(120, 1, 1.0, 31, |x| x[0].sin());
        let noisy: Vec<f64> = data
            .y()
            .iter()
            .map(|&v| v + 0.2 * rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        data = data.with_response(noisy).unwrap();
        let model = fit_regression(&data, &arch).unwrap();
        let points: Vec<Vec<f64>> = (0..9).map(|i| vec![-0.9 + 0.2 * i as f64]).collect();

        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                wild_bootstrap_reg(&model, &data, 50, 7, &points, 0.95, Multipliers::Gaussian)
                    .unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);

        let c = run(1);
        assert_eq!(a, c);
    }

    #[test]
    fn noiseless_fit_tracks_truth_at_rule_bandwidth() {
        // With no noise the only error is the approximation bias. At the
        // rule bandwidth (h = 1 here) the sigmoid reconstruction of the
        // cubic carries a constant of roughly 0.6 t^4 per feature, so the
        // honest sup bound at this h sits near 0.15, well inside 0.2.
        let g = |x: &[f64]| 1.0 + x[0].sin();
        let t = 5000;
        let cfg = LnnConfig {
            a: 3.0,
            d: 1,
            q: 3,
            u_sigma: -0.5,
            bandwidth: crate::architecture::Bandwidth::Rule,
            ..LnnConfig::default()
        };
        let arch = Architecture::build(&cfg, Some(t)).unwrap();
        let data = uniform_dataset(t, 1, 3.0, 101, g);
        let model = fit_regression(&data, &arch).unwrap();
        let mut worst = 0.0f64;
        for i in 0..=120 {
            let x = [-3.0 + 0.05 * i as f64];
            let v = predict(&model, &x).value().unwrap();
            worst = worst.max((v - g(&x)).abs());
        }
        assert!(worst < 0.2, "max grid error {worst}");
    }

    #[test]
    fn noiseless_error_decreases_with_sample_size() {
        // q = 1 keeps the rule bandwidth inside the asymptotic regime at
        // desk-scale T, so quadrupling the sample must shrink the bias.
        let g = |x: &[f64]| 1.0 + x[0].sin();
        let rmse_at = |t: usize| -> f64 {
            let cfg = LnnConfig {
                a: 3.0,
                d: 1,
                q: 1,
                u_sigma: -0.5,
                bandwidth: crate::architecture::Bandwidth::Rule,
                ..LnnConfig::default()
            };
            let arch = Architecture::build(&cfg, Some(t)).unwrap();
            let data = uniform_dataset(t, 1, 3.0, 55, g);
            let model = fit_regression(&data, &arch).unwrap();
            let mut sq = 0.0;
            let mut n = 0usize;
            for i in 0..=60 {
                let x = [-3.0 + 0.1 * i as f64];
                if let Some(v) = predict(&model, &x).value() {
                    sq += (v - g(&x)) * (v - g(&x));
                    n += 1;
                }
            }
            (sq / n as f64).sqrt()
        };
        let coarse = rmse_at(1000);
        let fine = rmse_at(4000);
        assert!(fine < coarse, "noiseless RMSE did not improve: {coarse} -> {fine}");
    }

    #[test]
    fn bands_cover_truth_on_easy_problem() {
        // Smoke check that bands are sensible: truth inside most bands.
        let arch = arch(1, 3, 3.0, 1.0);
        let g = |x: &[f64]| 1.0 + x[0].sin();
        let mut rng = rng::substream(77, &[rng::tags::ERRORS]);
        let mut data = uniform_dataset(1500, 1, 3.0, 77, g);
        let noisy: Vec<f64> = data
            .y()
            .iter()
            .map(|&v| v + 0.5 * rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        data = data.with_response(noisy).unwrap();
        let model = fit_regression(&data, &arch).unwrap();
        let points: Vec<Vec<f64>> = (0..13).map(|i| vec![-2.7 + 0.45 * i as f64]).collect();
        let bands =
            wild_bootstrap_reg(&model, &data, 200, 3, &points, 0.95, Multipliers::Gaussian)
                .unwrap();
        let covered = bands
            .iter()
            .filter(|pb| {
                let b = pb.band().unwrap();
                let truth = g(&pb.point);
                b.lo <= truth && truth <= b.hi
            })
            .count();
        assert!(covered >= 10, "only {covered}/13 points covered");
    }
}
