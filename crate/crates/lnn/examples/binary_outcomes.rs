//! Binary-outcome estimation: per-cube Newton likelihood maximization with a
//! least-squares warm start, probability prediction, and the closed-form
//! score wild bootstrap.
//!
//! ```text
//! cargo run --example binary_outcomes
//! ```

use lnn::architecture::{Architecture, LnnConfig};
use lnn::binary::{
    fit_binary, predict_prob, score_bootstrap, LinkKind, LinkSpec, NewtonOptions,
};
use lnn::bootstrap::Multipliers;
use lnn::sim::{gen_dataset, truth_g, ModelKind};

fn main() -> Result<(), lnn::Error> {
    let t = 2400;
    let config = LnnConfig { a: 3.0, d: 2, q: 3, u_sigma: -0.5, ..LnnConfig::default() };
    // y_t = 1{g(x_t) >= eps_t} with AR(1) latent errors.
    let data = gen_dataset(ModelKind::Bin, t, 2, 3.0, 23)?;
    let ones = data.y().iter().filter(|&&y| y == 1.0).count();
    println!("sample: T = {t}, {ones} positive labels");

    let arch = Architecture::build(&config, Some(t))?;
    let link = LinkSpec::new(LinkKind::Probit)?;
    let model = fit_binary(&data, &arch, link, &NewtonOptions::default())?;
    for cube in 0..arch.partition().n_cubes() {
        let rec = model.record(cube);
        println!(
            "cube {cube}: {:?} after {} Newton steps (per-observation score norm {:.2e})",
            rec.status, rec.iterations, rec.grad_norm
        );
    }

    println!();
    println!("probability surface along the diagonal:");
    for i in 0..7 {
        let c = -2.7 + 0.9 * i as f64;
        let x = vec![c, c];
        let truth = truth_g(&x);
        match predict_prob(&model, &x).value() {
            Some(p) => println!(
                "  x = ({c:+.1},{c:+.1}): P(y=1) = {p:.3} (true index {truth:+.3})"
            ),
            None => println!("  x = ({c:+.1},{c:+.1}): unusable cube"),
        }
    }

    println!();
    let points: Vec<Vec<f64>> = (0..5).map(|i| vec![-2.0 + i as f64, 0.0]).collect();
    let bands = score_bootstrap(&model, &data, 200, 5, &points, 0.95, Multipliers::Gaussian)?;
    println!("score-bootstrap bands on the index scale (no re-optimization):");
    for pb in &bands {
        match pb.band() {
            Some(b) => println!(
                "  x = {:?}: ghat {:+.3} in [{:+.3}, {:+.3}], truth {:+.3}",
                pb.point,
                b.ghat,
                b.lo,
                b.hi,
                truth_g(&pb.point)
            ),
            None => println!("  x = {:?}: no band (flagged cube)", pb.point),
        }
    }
    Ok(())
}
