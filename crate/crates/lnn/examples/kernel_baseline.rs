//! Nadaraya-Watson baseline next to the network estimator: point estimates
//! on one sample, then a small coverage comparison across replications.
//!
//! ```text
//! cargo run --release --example kernel_baseline
//! ```

use lnn::activation::ActivationKind;
use lnn::architecture::{Architecture, LnnConfig};
use lnn::binary::LinkKind;
use lnn::kernel::{nw_estimate, KernelKind};
use lnn::regress::{fit_regression, predict};
use lnn::sim::{
    gen_dataset, kernel_comparison, truth_g, EvalPoints, ExperimentSpec, ModelKind,
};

fn main() -> Result<(), lnn::Error> {
    let t = 2400;
    let d = 2;
    let config = LnnConfig { a: 3.0, d, q: 3, u_sigma: -0.5, ..LnnConfig::default() };
    let data = gen_dataset(ModelKind::Reg, t, d, 3.0, 17)?;
    let arch = Architecture::build(&config, Some(t))?;
    let h = arch.h();
    let model = fit_regression(&data, &arch)?;

    println!("point estimates with the kernel at the network's bandwidth h = {h}:");
    println!("{:>12}  {:>8}  {:>8}  {:>8}  {:>8}", "x", "truth", "lnn", "epan", "unif");
    for i in 0..5 {
        let c = -2.0 + i as f64;
        let x = vec![c, c];
        println!(
            "{:>12}  {:>8.4}  {:>8.4}  {:>8.4}  {:>8.4}",
            format!("({c:+.0},{c:+.0})"),
            truth_g(&x),
            predict(&model, &x).value().unwrap_or(f64::NAN),
            nw_estimate(&data, &x, h, KernelKind::Epanechnikov)?,
            nw_estimate(&data, &x, h, KernelKind::Uniform)?,
        );
    }

    println!();
    println!("coverage comparison over 10 replications (this takes a moment):");
    let spec = ExperimentSpec {
        model: ModelKind::Reg,
        t_values: vec![1200],
        d,
        q: 3,
        s: 1.0,
        u_sigma: -0.5,
        a: 3.0,
        activation: ActivationKind::SigmoidalSquasher,
        link: LinkKind::Probit,
        n_reps: 10,
        r_boot: 200,
        level: 0.95,
        points: EvalPoints::Diagonal { lo: -2.5, step: 0.5, count: 11 },
    };
    let rows = kernel_comparison(&spec, &[KernelKind::Epanechnikov, KernelKind::Uniform], 7)?;
    println!("{:>22}  {:>8}  {:>8}", "method", "rmse_g", "cr_g");
    for r in &rows {
        println!("{:>22}  {:>8.4}  {:>8.4}", r.method, r.rmse_g, r.cr_g);
    }
    Ok(())
}
