//! Command-line surface: fitting, prediction, bootstrap bands, local fits,
//! simulation runs, kernel benchmarks, and architecture inspection.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
//! File outputs are deterministic for a fixed `--seed` regardless of
//! `--threads`; timing information goes to the console only.

use crate::activation::ActivationKind;
use crate::architecture::{Architecture, Bandwidth, LnnConfig, WeightMatrix};
use crate::binary::{fit_binary, predict_g, score_bootstrap, LinkKind, LinkSpec, NewtonOptions};
use crate::bootstrap::{BandOutcome, Multipliers, PointBand};
use crate::data::{self, load_csv_with, load_points_csv, Dataset};
use crate::error::{Error, Result};
use crate::kernel::KernelKind;
use crate::localfit::fit_local;
use crate::persist::{
    binary_doc, load_doc, regression_doc, restore, save_doc, ColumnsDoc, LoadedModel,
};
use crate::regress::{fit_regression, predict, wild_bootstrap_reg, Prediction};
use crate::sim::{
    kernel_comparison, run_experiment, EvalPoints, ExperimentSpec, ModelKind, SimReport,
};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "lnn", version, about = "Localized neural network estimation and inference")]
struct Cli {
    /// JSON configuration file (hyperparameters, bootstrap settings, sim matrix).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; all randomness derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// Training CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Response column name.
    #[arg(long)]
    y_col: String,
    /// Comma-separated regressor column names.
    #[arg(long, value_delimiter = ',', required = true)]
    x_cols: Vec<String>,
    /// Z-score the selected columns and record the transform.
    #[arg(long)]
    normalize: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the regression model and save it as JSON.
    FitReg(DataArgs),
    /// Fit the binary-outcome model and save it as JSON.
    FitBin(DataArgs),
    /// Evaluate a saved model on the rows of a CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Bootstrap confidence bands at evaluation points (training data required).
    Bootstrap {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// CSV of evaluation points; defaults to the L^d grid over the domain.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Per-point local fit centred at an arbitrary point.
    FitLocal {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated coordinates of the evaluation point.
        #[arg(long)]
        point: String,
        /// Window half-width; defaults to the bandwidth rule at the sample size.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Run the Monte-Carlo experiment matrix from the config file.
    Simulate {
        /// Also dump plot-ready per-point layers to this CSV.
        #[arg(long)]
        dump_points: Option<PathBuf>,
    },
    /// Coverage comparison against kernel-regression baselines.
    BenchKernel {
        /// Kernels to benchmark.
        #[arg(long, value_delimiter = ',', default_values_t = [String::from("epanechnikov")])]
        kernels: Vec<String>,
    },
    /// Print the predetermined architecture for a configuration.
    InspectArch {
        /// Regressor dimension.
        #[arg(long)]
        d: usize,
        /// Sample size for the bandwidth rule (unused with an explicit bandwidth).
        #[arg(long)]
        t: Option<usize>,
    },
}

fn default_a() -> f64 {
    3.0
}
fn default_q() -> u32 {
    3
}
fn default_s() -> f64 {
    1.0
}
fn default_u_sigma() -> f64 {
    -0.5
}
fn default_activation() -> String {
    "squasher".into()
}
fn default_bandwidth() -> Bandwidth {
    Bandwidth::Rule
}
fn default_link() -> String {
    "probit".into()
}
fn default_r() -> usize {
    200
}
fn default_level() -> f64 {
    0.95
}
fn default_l() -> usize {
    20
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default = "default_a")]
    a: f64,
    #[serde(default = "default_q")]
    q: u32,
    #[serde(default = "default_s")]
    s: f64,
    #[serde(default = "default_u_sigma")]
    u_sigma: f64,
    #[serde(default = "default_activation")]
    activation: String,
    #[serde(default = "default_bandwidth")]
    bandwidth: Bandwidth,
    #[serde(default = "default_link")]
    link: String,
    #[serde(default = "default_r", rename = "R")]
    r: usize,
    #[serde(default = "default_level")]
    level: f64,
    #[serde(default = "default_l", rename = "L")]
    l: usize,
    #[serde(default)]
    sim: Option<SimSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    model: String,
    #[serde(rename = "T")]
    t: Vec<usize>,
    d: usize,
    n: usize,
    #[serde(default)]
    points: Option<EvalPoints>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            a: default_a(),
            q: default_q(),
            s: default_s(),
            u_sigma: default_u_sigma(),
            activation: default_activation(),
            bandwidth: default_bandwidth(),
            link: default_link(),
            r: default_r(),
            level: default_level(),
            l: default_l(),
            sim: None,
        }
    }
}

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidArgument(format!("config {}: {e}", p.display())))
            }
        }
    }

    fn activation_kind(&self) -> Result<ActivationKind> {
        match self.activation.as_str() {
            "squasher" | "sigmoidal-squasher" => Ok(ActivationKind::SigmoidalSquasher),
            "erf" | "error-function" => Ok(ActivationKind::ErrorFunction),
            other => Err(Error::InvalidArgument(format!("unknown activation {other:?}"))),
        }
    }

    fn link_kind(&self) -> Result<LinkKind> {
        match self.link.as_str() {
            "probit" => Ok(LinkKind::Probit),
            "logistic" => Ok(LinkKind::Logistic),
            other => Err(Error::InvalidArgument(format!("unknown link {other:?}"))),
        }
    }

    fn lnn_config(&self, d: usize) -> Result<LnnConfig> {
        Ok(LnnConfig {
            a: self.a,
            d,
            q: self.q,
            s: self.s,
            u_sigma: self.u_sigma,
            activation: self.activation_kind()?,
            bandwidth: self.bandwidth,
            weights: WeightMatrix::Default,
            link: self.link_kind()?,
        })
    }

    fn experiment_spec(&self) -> Result<ExperimentSpec> {
        let sim = self.sim.as_ref().ok_or_else(|| {
            Error::InvalidArgument("config has no `sim` section for this command".into())
        })?;
        let model = match sim.model.as_str() {
            "reg" => ModelKind::Reg,
            "bin" => ModelKind::Bin,
            other => return Err(Error::InvalidArgument(format!("unknown sim model {other:?}"))),
        };
        Ok(ExperimentSpec {
            model,
            t_values: sim.t.clone(),
            d: sim.d,
            q: self.q,
            s: self.s,
            u_sigma: self.u_sigma,
            a: self.a,
            activation: self.activation_kind()?,
            link: self.link_kind()?,
            n_reps: sim.n,
            r_boot: self.r,
            level: self.level,
            points: sim.points.unwrap_or(EvalPoints::Grid { l: self.l }),
        })
    }
}

/// Run the CLI against the given argument vector, returning the process
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                0
            } else {
                eprint!("{e}");
                1
            };
        }
    };
    let threads = cli.threads;
    let result = match threads {
        None => execute(cli),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli)),
            Err(e) => Err(Error::InvalidArgument(format!("thread pool: {e}"))),
        },
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn out_path(out: &Option<PathBuf>, default: &str) -> PathBuf {
    out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn format_field(v: f64) -> String {
    format!("{v}")
}

fn load_training(args: &DataArgs, normalize_y: bool) -> Result<Dataset> {
    load_csv_with(
        &args.data,
        &args.y_col,
        &args.x_cols,
        normalize_y && args.normalize,
        args.normalize,
    )
}

fn columns_doc(args: &DataArgs, dataset: &Dataset) -> ColumnsDoc {
    ColumnsDoc {
        y: args.y_col.clone(),
        x: args.x_cols.clone(),
        normalization: dataset.normalization.clone(),
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = ConfigFile::load(cli.config.as_deref())?;
    match &cli.command {
        Command::FitReg(args) => {
            let dataset = load_training(args, true)?;
            if dataset.rejected_rows > 0 {
                eprintln!("note: {} rows rejected for missing cells", dataset.rejected_rows);
            }
            let lnn = config.lnn_config(dataset.dim())?;
            let arch = Architecture::build(&lnn, Some(dataset.len()))?;
            let model = fit_regression(&dataset, &arch)?;
            let doc = regression_doc(&model, columns_doc(args, &dataset));
            let path = out_path(&cli.out, "model.json");
            save_doc(&doc, &path)?;
            println!(
                "fitted regression model: T={}, M={}, d_q={}, sigma_eps2={:.6}; saved to {}",
                dataset.len(),
                arch.m(),
                arch.dq(),
                model.sigma_eps2(),
                path.display()
            );
            Ok(())
        }
        Command::FitBin(args) => {
            let dataset = load_training(args, false)?;
            if dataset.rejected_rows > 0 {
                eprintln!("note: {} rows rejected for missing cells", dataset.rejected_rows);
            }
            let lnn = config.lnn_config(dataset.dim())?;
            let arch = Architecture::build(&lnn, Some(dataset.len()))?;
            let link = LinkSpec::new(lnn.link)?;
            let model = fit_binary(&dataset, &arch, link, &NewtonOptions::default())?;
            let converged = model
                .records()
                .iter()
                .filter(|r| r.status == crate::binary::NewtonStatus::Converged)
                .count();
            let doc = binary_doc(&model, columns_doc(args, &dataset));
            let path = out_path(&cli.out, "model.json");
            save_doc(&doc, &path)?;
            println!(
                "fitted binary model: T={}, M={}, cubes converged {}/{}; saved to {}",
                dataset.len(),
                arch.m(),
                converged,
                arch.partition().n_cubes(),
                path.display()
            );
            Ok(())
        }
        Command::Predict { model, data } => {
            let doc = load_doc(model)?;
            let (loaded, columns) = restore(&doc)?;
            let raw_points = load_points_csv(data, &columns.x)?;
            let path = out_path(&cli.out, "predictions.csv");
            let csv = predictions_csv(&loaded, &columns, &raw_points, None)?;
            std::fs::write(&path, csv)?;
            println!("wrote {} prediction rows to {}", raw_points.len(), path.display());
            Ok(())
        }
        Command::Bootstrap { model, data, points } => {
            let doc = load_doc(model)?;
            let (loaded, columns) = restore(&doc)?;
            let raw_points = match points {
                Some(p) => load_points_csv(p, &columns.x)?,
                None => {
                    let cfg = loaded.arch().config();
                    let total = (self::checked_pow(config.l, cfg.d)).ok_or_else(|| {
                        Error::InvalidArgument("default grid is too large; pass --points".into())
                    })?;
                    if total > 200_000 {
                        return Err(Error::InvalidArgument(
                            "default grid is too large; pass --points".into(),
                        ));
                    }
                    crate::sim::test_grid(cfg.a, config.l, cfg.d)?
                }
            };
            let training = load_csv_for_model(data, &columns)?;
            let eval_points = transform_points(&raw_points, &columns);
            let bands = match &loaded {
                LoadedModel::Regression(m) => wild_bootstrap_reg(
                    m,
                    &training,
                    config.r,
                    cli.seed,
                    &eval_points,
                    config.level,
                    Multipliers::Gaussian,
                )?,
                LoadedModel::Binary(m) => score_bootstrap(
                    m,
                    &training,
                    config.r,
                    cli.seed,
                    &eval_points,
                    config.level,
                    Multipliers::Gaussian,
                )?,
            };
            let path = out_path(&cli.out, "bands.csv");
            let csv = predictions_csv(&loaded, &columns, &raw_points, Some(&bands))?;
            std::fs::write(&path, csv)?;
            println!("wrote {} band rows to {}", bands.len(), path.display());
            Ok(())
        }
        Command::FitLocal { data: args, point, h } => {
            let dataset = load_training(args, true)?;
            let lnn = config.lnn_config(dataset.dim())?;
            let x0: Vec<f64> = point
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidArgument(format!("bad coordinate {s:?} in --point"))
                    })
                })
                .collect::<Result<_>>()?;
            let h = match h {
                Some(h) => *h,
                None => {
                    crate::architecture::bandwidth_rule(
                        dataset.len(),
                        dataset.dim(),
                        lnn.p(),
                        lnn.a,
                    )?
                    .0
                }
            };
            let fit = fit_local(&dataset, &x0, h, &lnn)?;
            let path = out_path(&cli.out, "local.csv");
            let mut csv = String::new();
            for k in 1..=x0.len() {
                csv.push_str(&format!("x{k},"));
            }
            csv.push_str("ghat,count,flag\n");
            for c in &x0 {
                csv.push_str(&format!("{c},"));
            }
            let flag = if fit.deficient { "underdetermined" } else { "ok" };
            csv.push_str(&format!("{},{},{flag}\n", format_field(fit.ghat), fit.count));
            std::fs::write(&path, &csv)?;
            println!(
                "local fit at {point}: ghat = {}, {} in-window observations ({flag}); wrote {}",
                fit.ghat,
                fit.count,
                path.display()
            );
            Ok(())
        }
        Command::Simulate { dump_points } => {
            let spec = config.experiment_spec()?;
            let report = run_experiment(&spec, cli.seed)?;
            print_sim_table(&report);
            let path = out_path(&cli.out, "simreport.csv");
            write_report(&report, &path)?;
            println!("wrote report to {}", path.display());
            if let Some(p) = dump_points {
                std::fs::write(p, report.layers_to_csv())?;
                println!("wrote point layers to {}", p.display());
            }
            Ok(())
        }
        Command::BenchKernel { kernels } => {
            let spec = config.experiment_spec()?;
            let kinds: Vec<KernelKind> = kernels
                .iter()
                .map(|k| match k.as_str() {
                    "uniform" => Ok(KernelKind::Uniform),
                    "epanechnikov" => Ok(KernelKind::Epanechnikov),
                    other => Err(Error::InvalidArgument(format!("unknown kernel {other:?}"))),
                })
                .collect::<Result<_>>()?;
            let rows = kernel_comparison(&spec, &kinds, cli.seed)?;
            println!("method,T,rmse_g,cr_g,n,failed");
            for r in &rows {
                println!(
                    "{},{},{:.4},{:.4},{},{}",
                    r.method, r.t, r.rmse_g, r.cr_g, r.n_reps, r.n_failed
                );
            }
            let path = out_path(&cli.out, "benchmark.csv");
            std::fs::write(&path, crate::sim::comparison_to_csv(&rows))?;
            println!("wrote benchmark to {}", path.display());
            Ok(())
        }
        Command::InspectArch { d, t } => {
            let lnn = config.lnn_config(*d)?;
            let arch = Architecture::build(&lnn, *t)?;
            println!("architecture for d={d}, q={}:", lnn.q);
            println!("  domain            [-{a},{a}]^{d} (a = {a})", a = lnn.a);
            println!("  cubes per axis    M = {}", arch.m());
            println!("  bandwidth         h = {}", arch.h());
            println!("  basis dimension   d_q = {}", arch.dq());
            println!("  neurons           {}", arch.neuron_count());
            println!("  activated/query   {}", arch.dq() * (lnn.q as usize + 1));
            println!("  rotation cond(B)  {:.4e}", arch.rotation().cond);
            println!("  gamma             {:?}", arch.gamma());
            println!("  beta              {:?}", arch.beta());
            if let Some(out) = &cli.out {
                let json = serde_json::to_string_pretty(&arch.to_doc())?;
                std::fs::write(out, json)?;
                println!("wrote architecture document to {}", out.display());
            }
            Ok(())
        }
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Load the training CSV addressed by a model's column record, reapplying
/// the recorded normalization so residuals match the fitted scale.
fn load_csv_for_model(path: &Path, columns: &ColumnsDoc) -> Result<Dataset> {
    let norm = columns.normalization.as_ref();
    let mut dataset = load_csv_with(
        path,
        &columns.y,
        &columns.x,
        norm.is_some_and(|n| n.y.is_some()),
        norm.is_some_and(|n| !n.x.is_empty()),
    )?;
    // Guard against silent drift between the stored and recomputed stats.
    if let (Some(stored), Some(reloaded)) = (norm, dataset.normalization.as_mut()) {
        *reloaded = stored.clone();
    }
    Ok(dataset)
}

/// Map raw evaluation points onto the model's fitted scale.
fn transform_points(points: &[Vec<f64>], columns: &ColumnsDoc) -> Vec<Vec<f64>> {
    match &columns.normalization {
        None => points.to_vec(),
        Some(norm) => points.iter().map(|p| data::normalize_point(p, norm)).collect(),
    }
}

/// Prediction CSV: `x1,...,xd,ghat[,prob],lo,hi,flag`. Band columns are
/// empty without a bootstrap run; `ghat` is mapped back to raw response
/// units when a normalization was recorded.
fn predictions_csv(
    model: &LoadedModel,
    columns: &ColumnsDoc,
    raw_points: &[Vec<f64>],
    bands: Option<&[PointBand]>,
) -> Result<String> {
    let is_binary = matches!(model, LoadedModel::Binary(_));
    let norm = columns.normalization.as_ref();
    let denorm = |v: f64| norm.map_or(v, |n| data::denormalize_response(v, n));

    let mut out = String::new();
    for name in &columns.x {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("ghat,");
    if is_binary {
        out.push_str("prob,");
    }
    out.push_str("lo,hi,flag\n");

    for (i, raw) in raw_points.iter().enumerate() {
        let point = match norm {
            Some(n) => data::normalize_point(raw, n),
            None => raw.clone(),
        };
        for c in raw {
            out.push_str(&format_field(*c));
            out.push(',');
        }
        let prediction = match model {
            LoadedModel::Regression(m) => predict(m, &point),
            LoadedModel::Binary(m) => predict_g(m, &point),
        };
        let (ghat_s, prob_s, flag) = match prediction {
            Prediction::Value(g) => {
                let prob = match model {
                    LoadedModel::Binary(m) => {
                        Some(format_field(m.link().kind.cdf(g)))
                    }
                    LoadedModel::Regression(_) => None,
                };
                (format_field(denorm(g)), prob, "ok")
            }
            Prediction::Outside => (String::new(), None, "outside"),
            Prediction::Unusable => (String::new(), None, "unusable"),
        };
        out.push_str(&ghat_s);
        out.push(',');
        if is_binary {
            out.push_str(prob_s.as_deref().unwrap_or(""));
            out.push(',');
        }
        match bands.and_then(|b| b.get(i)) {
            Some(pb) => match &pb.outcome {
                BandOutcome::Ok(b) => {
                    out.push_str(&format_field(denorm(b.lo)));
                    out.push(',');
                    out.push_str(&format_field(denorm(b.hi)));
                }
                _ => out.push(','),
            },
            None => out.push(','),
        }
        out.push(',');
        out.push_str(flag);
        out.push('\n');
    }
    Ok(out)
}

fn print_sim_table(report: &SimReport) {
    println!("model,T,d,q,u_sigma,n,failed,R,rmse_g,rmse_g_star,cr_g,wall_secs");
    for r in &report.rows {
        let model = match r.model {
            ModelKind::Reg => "reg",
            ModelKind::Bin => "bin",
        };
        let star = r.rmse_g_star.map_or(String::from("-"), |v| format!("{v:.4}"));
        println!(
            "{model},{},{},{},{},{},{},{},{:.4},{star},{:.4},{:.2}",
            r.t, r.d, r.q, r.u_sigma, r.n_reps, r.n_failed, r.r_boot, r.rmse_g, r.cr_g, r.wall_secs
        );
    }
}

fn write_report(report: &SimReport, path: &Path) -> Result<()> {
    let is_json = path.extension().is_some_and(|e| e == "json");
    if is_json {
        std::fs::write(path, serde_json::to_string_pretty(report)?)?;
    } else {
        std::fs::write(path, report.to_csv())?;
    }
    Ok(())
}
