//! Table-style experiment runs: n replications of (generate, fit, bootstrap,
//! evaluate) per sample size, with seeded determinism independent of the
//! parallel schedule.

use crate::architecture::{Architecture, Bandwidth, LnnConfig, WeightMatrix};
use crate::activation::ActivationKind;
use crate::binary::{fit_binary, predict_g, score_bootstrap, LinkKind, LinkSpec, NewtonOptions};
use crate::bootstrap::{BandOutcome, Multipliers, PointBand};
use crate::error::{Error, Result};
use crate::kernel::{kernel_bootstrap, KernelKind};
use crate::regress::{fit_regression, predict, wild_bootstrap_reg};
use crate::rng::{derive_seed, tags};
use crate::sim::dgp::{diagonal_points, gen_dataset, test_grid, truth_g, ModelKind};
use crate::sim::metrics::{compute_metrics, Metrics};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "layout")]
pub enum EvalPoints {
    /// Full Cartesian grid with L points per axis, corners included.
    Grid { l: usize },
    /// Diagonal points `(lo + i*step) 1_d`.
    Diagonal { lo: f64, step: f64, count: usize },
}

impl EvalPoints {
    pub fn materialize(&self, a: f64, d: usize) -> Result<Vec<Vec<f64>>> {
        match *self {
            EvalPoints::Grid { l } => test_grid(a, l, d),
            EvalPoints::Diagonal { lo, step, count } => Ok(diagonal_points(lo, step, count, d)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: ModelKind,
    pub t_values: Vec<usize>,
    pub d: usize,
    pub q: u32,
    pub s: f64,
    pub u_sigma: f64,
    pub a: f64,
    pub activation: ActivationKind,
    pub link: LinkKind,
    pub n_reps: usize,
    pub r_boot: usize,
    pub level: f64,
    pub points: EvalPoints,
}

impl ExperimentSpec {
    fn lnn_config(&self) -> LnnConfig {
        LnnConfig {
            a: self.a,
            d: self.d,
            q: self.q,
            s: self.s,
            u_sigma: self.u_sigma,
            activation: self.activation,
            bandwidth: Bandwidth::Rule,
            weights: WeightMatrix::Default,
            link: self.link,
        }
    }
}

/// One row of a simulation report. Wall time is informational and is left
/// out of serialized outputs so repeated runs stay byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub model: ModelKind,
    pub t: usize,
    pub d: usize,
    pub q: u32,
    pub u_sigma: f64,
    pub n_reps: usize,
    pub n_failed: usize,
    pub r_boot: usize,
    pub rmse_g: f64,
    pub rmse_g_star: Option<f64>,
    pub cr_g: f64,
    #[serde(skip)]
    pub wall_secs: f64,
}

/// Per-point plot layers: the mean estimate and the means of the 2.5% and
/// 97.5% bootstrap draws across replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointLayers {
    pub t: usize,
    pub point: Vec<f64>,
    pub truth: f64,
    pub mean_estimate: f64,
    pub mean_lo_draw: f64,
    pub mean_hi_draw: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SimReport {
    pub rows: Vec<SimRow>,
    pub point_layers: Vec<PointLayers>,
}

impl SimReport {
    /// CSV form of the summary rows. Wall time is excluded by design.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,T,d,q,u_sigma,n,failed,R,rmse_g,rmse_g_star,cr_g\n");
        for r in &self.rows {
            let model = match r.model {
                ModelKind::Reg => "reg",
                ModelKind::Bin => "bin",
            };
            let star = r.rmse_g_star.map_or(String::new(), |v| format!("{v}"));
            out.push_str(&format!(
                "{model},{},{},{},{},{},{},{},{},{star},{}\n",
                r.t, r.d, r.q, r.u_sigma, r.n_reps, r.n_failed, r.r_boot, r.rmse_g, r.cr_g
            ));
        }
        out
    }

    /// Plot-ready CSV of the per-point layers.
    pub fn layers_to_csv(&self) -> String {
        let d = self.point_layers.first().map_or(0, |p| p.point.len());
        let mut out = String::from("T,");
        for k in 1..=d {
            out.push_str(&format!("x{k},"));
        }
        out.push_str("truth,mean_estimate,mean_lo_draw,mean_hi_draw\n");
        for p in &self.point_layers {
            out.push_str(&format!("{},", p.t));
            for c in &p.point {
                out.push_str(&format!("{c},"));
            }
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.truth, p.mean_estimate, p.mean_lo_draw, p.mean_hi_draw
            ));
        }
        out
    }
}

struct RepOutcome {
    estimates: Vec<Option<f64>>,
    bands: Vec<Option<(f64, f64)>>,
}

fn band_tuples(bands: &[PointBand]) -> Vec<Option<(f64, f64)>> {
    bands
        .iter()
        .map(|pb| match &pb.outcome {
            BandOutcome::Ok(b) => Some((b.lo, b.hi)),
            _ => None,
        })
        .collect()
}

fn model_tag(model: ModelKind) -> u64 {
    match model {
        ModelKind::Reg => 1,
        ModelKind::Bin => 2,
    }
}

fn run_replication(
    spec: &ExperimentSpec,
    t: usize,
    rep: usize,
    seed: u64,
    points: &[Vec<f64>],
) -> Result<RepOutcome> {
    let base = &[model_tag(spec.model), t as u64, rep as u64];
    let data_seed = derive_seed(seed, &[base[0], base[1], base[2], tags::REPLICATION]);
    let boot_seed = derive_seed(seed, &[base[0], base[1], base[2], tags::WILD]);
    let data = gen_dataset(spec.model, t, spec.d, spec.a, data_seed)?;
    let arch = Architecture::build(&spec.lnn_config(), Some(t))?;
    match spec.model {
        ModelKind::Reg => {
            let model = fit_regression(&data, &arch)?;
            let bands = wild_bootstrap_reg(
                &model,
                &data,
                spec.r_boot,
                boot_seed,
                points,
                spec.level,
                Multipliers::Gaussian,
            )?;
            let estimates = points.iter().map(|p| predict(&model, p).value()).collect();
            Ok(RepOutcome { estimates, bands: band_tuples(&bands) })
        }
        ModelKind::Bin => {
            let link = LinkSpec::new(spec.link)?;
            let model = fit_binary(&data, &arch, link, &NewtonOptions::default())?;
            let bands = score_bootstrap(
                &model,
                &data,
                spec.r_boot,
                boot_seed,
                points,
                spec.level,
                Multipliers::Gaussian,
            )?;
            let estimates = points.iter().map(|p| predict_g(&model, p).value()).collect();
            Ok(RepOutcome { estimates, bands: band_tuples(&bands) })
        }
    }
}

/// Run the full experiment matrix. Replications are parallel work items;
/// every random stream is derived from (seed, model, T, replication), so the
/// report is identical for any thread count.
pub fn run_experiment(spec: &ExperimentSpec, seed: u64) -> Result<SimReport> {
    if spec.n_reps == 0 {
        return Err(Error::InvalidArgument("n_reps must be positive".into()));
    }
    let points = spec.points.materialize(spec.a, spec.d)?;
    let truths: Vec<f64> = points.iter().map(|p| truth_g(p)).collect();
    let mut report = SimReport::default();

    for &t in &spec.t_values {
        let start = Instant::now();
        let outcomes: Vec<Result<RepOutcome>> = (0..spec.n_reps)
            .into_par_iter()
            .map(|rep| run_replication(spec, t, rep, seed, &points))
            .collect();

        let mut estimates = Vec::new();
        let mut bands = Vec::new();
        let mut n_failed = 0usize;
        for outcome in outcomes {
            match outcome {
                Ok(o) => {
                    estimates.push(o.estimates);
                    bands.push(o.bands);
                }
                Err(_) => n_failed += 1,
            }
        }
        if estimates.is_empty() {
            return Err(Error::Numerical(format!(
                "all {} replications failed at T = {t}",
                spec.n_reps
            )));
        }
        let Metrics { rmse_g, cr_g, rmse_g_star } = compute_metrics(&estimates, &truths, &bands);

        for (j, point) in points.iter().enumerate() {
            let mut mean_est = 0.0;
            let mut mean_lo = 0.0;
            let mut mean_hi = 0.0;
            let mut count = 0usize;
            for (rep_est, rep_bands) in estimates.iter().zip(&bands) {
                if let (Some(est), Some((lo, hi))) = (rep_est[j], rep_bands[j]) {
                    mean_est += est;
                    // Per-replication quantile draws of ghat*: the band
                    // stores ghat - Q_{1-a/2} and ghat - Q_{a/2}, so the
                    // draws themselves sit mirrored about ghat.
                    mean_lo += 2.0 * est - hi;
                    mean_hi += 2.0 * est - lo;
                    count += 1;
                }
            }
            if count > 0 {
                report.point_layers.push(PointLayers {
                    t,
                    point: point.clone(),
                    truth: truths[j],
                    mean_estimate: mean_est / count as f64,
                    mean_lo_draw: mean_lo / count as f64,
                    mean_hi_draw: mean_hi / count as f64,
                });
            }
        }

        report.rows.push(SimRow {
            model: spec.model,
            t,
            d: spec.d,
            q: spec.q,
            u_sigma: spec.u_sigma,
            n_reps: spec.n_reps,
            n_failed,
            r_boot: spec.r_boot,
            rmse_g,
            rmse_g_star: match spec.model {
                ModelKind::Bin => Some(rmse_g_star),
                ModelKind::Reg => None,
            },
            cr_g,
            wall_secs: start.elapsed().as_secs_f64(),
        });
    }
    Ok(report)
}

/// One method's row in a baseline comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub t: usize,
    pub rmse_g: f64,
    pub cr_g: f64,
    pub n_reps: usize,
    pub n_failed: usize,
}

/// Coverage comparison between the network bootstrap and kernel-regression
/// baselines on the same simulated samples. The kernel reuses the network's
/// rule bandwidth.
pub fn kernel_comparison(
    spec: &ExperimentSpec,
    kernels: &[KernelKind],
    seed: u64,
) -> Result<Vec<ComparisonRow>> {
    if spec.model != ModelKind::Reg {
        return Err(Error::InvalidArgument(
            "the kernel baseline applies to the regression model".into(),
        ));
    }
    let points = spec.points.materialize(spec.a, spec.d)?;
    let truths: Vec<f64> = points.iter().map(|p| truth_g(p)).collect();
    let mut rows = Vec::new();

    for &t in &spec.t_values {
        let arch = Architecture::build(&spec.lnn_config(), Some(t))?;
        let h = arch.h();

        struct MethodAcc {
            estimates: Vec<Vec<Option<f64>>>,
            bands: Vec<Vec<Option<(f64, f64)>>>,
            failed: usize,
        }
        let n_methods = 1 + kernels.len();
        let per_rep: Vec<Vec<Result<RepOutcome>>> = (0..spec.n_reps)
            .into_par_iter()
            .map(|rep| {
                let mut outs = Vec::with_capacity(n_methods);
                outs.push(run_replication(spec, t, rep, seed, &points));
                // Same sample for the kernel baselines.
                let base = &[model_tag(spec.model), t as u64, rep as u64];
                let data_seed =
                    derive_seed(seed, &[base[0], base[1], base[2], tags::REPLICATION]);
                let kb_seed = derive_seed(seed, &[base[0], base[1], base[2], tags::KERNEL]);
                match gen_dataset(spec.model, t, spec.d, spec.a, data_seed) {
                    Ok(data) => {
                        for &kernel in kernels {
                            let out = kernel_bootstrap(
                                &data,
                                h,
                                kernel,
                                spec.r_boot,
                                kb_seed,
                                &points,
                                spec.level,
                                Multipliers::Gaussian,
                            )
                            .map(|bands| RepOutcome {
                                estimates: bands
                                    .iter()
                                    .map(|pb| pb.band().map(|b| b.ghat))
                                    .collect(),
                                bands: band_tuples(&bands),
                            });
                            outs.push(out);
                        }
                    }
                    Err(e) => {
                        outs.push(Err(e));
                    }
                }
                outs
            })
            .collect();

        let mut accs: Vec<MethodAcc> = (0..n_methods)
            .map(|_| MethodAcc { estimates: Vec::new(), bands: Vec::new(), failed: 0 })
            .collect();
        for rep_outs in per_rep {
            for (m, out) in rep_outs.into_iter().enumerate() {
                match out {
                    Ok(o) => {
                        accs[m].estimates.push(o.estimates);
                        accs[m].bands.push(o.bands);
                    }
                    Err(_) => accs[m].failed += 1,
                }
            }
        }

        let names: Vec<String> = std::iter::once("lnn".to_string())
            .chain(kernels.iter().map(|k| match k {
                KernelKind::Uniform => "kernel-uniform".to_string(),
                KernelKind::Epanechnikov => "kernel-epanechnikov".to_string(),
            }))
            .collect();
        for (acc, name) in accs.into_iter().zip(names) {
            if acc.estimates.is_empty() {
                return Err(Error::Numerical(format!(
                    "all replications failed for {name} at T = {t}"
                )));
            }
            let m = compute_metrics(&acc.estimates, &truths, &acc.bands);
            rows.push(ComparisonRow {
                method: name,
                t,
                rmse_g: m.rmse_g,
                cr_g: m.cr_g,
                n_reps: spec.n_reps,
                n_failed: acc.failed,
            });
        }
    }
    Ok(rows)
}

/// CSV form of a comparison table.
pub fn comparison_to_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("method,T,rmse_g,cr_g,n,failed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method, r.t, r.rmse_g, r.cr_g, r.n_reps, r.n_failed
        ));
    }
    out
}
