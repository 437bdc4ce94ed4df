//! The per-point local estimator: the network is rebuilt around each
//! evaluation point, so points outside the global domain work as long as
//! data fall inside the window.
//!
//! ```text
//! cargo run --example local_estimator
//! ```

use lnn::architecture::LnnConfig;
use lnn::localfit::fit_local;
use lnn::sim::{gen_dataset, truth_g, ModelKind};

fn main() -> Result<(), lnn::Error> {
    let t = 3000;
    let config = LnnConfig { a: 3.0, d: 1, q: 2, u_sigma: 0.5, ..LnnConfig::default() };
    let data = gen_dataset(ModelKind::Reg, t, 1, 3.0, 31)?;

    println!("local fits with window half-width h = 0.8:");
    println!("{:>6}  {:>8}  {:>8}  {:>6}  flag", "x0", "truth", "ghat", "count");
    for i in 0..9 {
        let x0 = vec![-2.8 + 0.7 * i as f64];
        match fit_local(&data, &x0, 0.8, &config) {
            Ok(fit) => println!(
                "{:>6.2}  {:>8.4}  {:>8.4}  {:>6}  {}",
                x0[0],
                truth_g(&x0),
                fit.ghat,
                fit.count,
                if fit.deficient { "underdetermined" } else { "ok" }
            ),
            Err(e) => println!("{:>6.2}  {e}", x0[0]),
        }
    }

    // A window too far out has no data and reports that honestly.
    println!();
    match fit_local(&data, &[9.0], 0.8, &config) {
        Err(e) => println!("x0 = 9.0: {e}"),
        Ok(_) => unreachable!("no data lives out there"),
    }
    Ok(())
}
