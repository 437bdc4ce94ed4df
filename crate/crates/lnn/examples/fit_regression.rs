//! Fit the regression model on a simulated dependent-data sample, evaluate
//! it on a grid, and round-trip the fitted model through JSON.
//!
//! ```text
//! cargo run --example fit_regression
//! ```

use lnn::architecture::{Architecture, LnnConfig};
use lnn::persist::{regression_doc, restore, ColumnsDoc, LoadedModel};
use lnn::regress::{fit_regression, predict, residuals};
use lnn::sim::{gen_dataset, test_grid, truth_g, ModelKind};

fn main() -> Result<(), lnn::Error> {
    let t = 1600;
    let d = 2;
    let config = LnnConfig { a: 3.0, d, q: 3, u_sigma: -0.5, ..LnnConfig::default() };

    // AR(1) errors, uniform regressors, sine truth.
    let data = gen_dataset(ModelKind::Reg, t, d, 3.0, 42)?;
    let arch = Architecture::build(&config, Some(t))?;
    println!(
        "fitting T = {t} observations on {} cubes (h = {}, {} coefficients per cube)",
        arch.partition().n_cubes(),
        arch.h(),
        arch.dq()
    );

    let model = fit_regression(&data, &arch)?;
    println!("residual variance estimate: {:.4}", model.sigma_eps2());
    let resid = residuals(&model, &data);
    let used = resid.iter().filter(|r| r.is_finite()).count();
    println!("{used}/{t} observations contribute residuals");

    let grid = test_grid(3.0, 10, d)?;
    let mut sq = 0.0;
    let mut n = 0;
    for p in &grid {
        if let Some(v) = predict(&model, p).value() {
            let diff = v - truth_g(p);
            sq += diff * diff;
            n += 1;
        }
    }
    println!("grid RMSE against the truth: {:.4} over {n} points", (sq / n as f64).sqrt());

    // Persistence: predictions survive the JSON round trip bit-for-bit.
    let columns = ColumnsDoc {
        y: "y".into(),
        x: (1..=d).map(|k| format!("x{k}")).collect(),
        normalization: None,
    };
    let json = serde_json::to_string(&regression_doc(&model, columns)).expect("serializable");
    let (loaded, _) = restore(&serde_json::from_str(&json).expect("parse"))?;
    let LoadedModel::Regression(loaded) = loaded else { unreachable!() };
    let probe = [0.4, -1.2];
    assert_eq!(predict(&model, &probe).value(), predict(&loaded, &probe).value());
    println!("JSON round trip: prediction at {probe:?} identical");
    Ok(())
}
