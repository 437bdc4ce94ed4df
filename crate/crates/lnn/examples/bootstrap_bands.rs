//! Residual wild-bootstrap confidence bands for the regression model,
//! printed as a table and checked against the truth.
//!
//! ```text
//! cargo run --example bootstrap_bands
//! ```

use lnn::architecture::{Architecture, LnnConfig};
use lnn::bootstrap::Multipliers;
use lnn::regress::{fit_regression, wild_bootstrap_reg};
use lnn::sim::{gen_dataset, truth_g, ModelKind};

fn main() -> Result<(), lnn::Error> {
    let t = 2400;
    let config = LnnConfig { a: 3.0, d: 1, q: 3, u_sigma: -0.5, ..LnnConfig::default() };
    let data = gen_dataset(ModelKind::Reg, t, 1, 3.0, 11)?;
    let arch = Architecture::build(&config, Some(t))?;
    let model = fit_regression(&data, &arch)?;

    let points: Vec<Vec<f64>> = (0..13).map(|i| vec![-2.7 + 0.45 * i as f64]).collect();
    let bands = wild_bootstrap_reg(&model, &data, 200, 7, &points, 0.95, Multipliers::Gaussian)?;

    println!("95% residual wild-bootstrap bands, R = 200:");
    println!("{:>6}  {:>8}  {:>8}  {:>8}  {:>8}  covered", "x", "truth", "ghat", "lo", "hi");
    let mut covered = 0;
    for pb in &bands {
        let band = pb.band().expect("in-domain points");
        let g = truth_g(&pb.point);
        let inside = band.lo <= g && g <= band.hi;
        covered += inside as usize;
        println!(
            "{:>6.2}  {:>8.4}  {:>8.4}  {:>8.4}  {:>8.4}  {}",
            pb.point[0],
            g,
            band.ghat,
            band.lo,
            band.hi,
            if inside { "yes" } else { "NO" }
        );
    }
    println!("{covered}/{} points covered", bands.len());
    Ok(())
}
