//! Walk through the predetermined network for a small configuration: the
//! univariate neuron coefficients, the weight matrix and direction vectors,
//! the cube partition, and the rotation linking features to monomials.
//!
//! ```text
//! cargo run --example architecture_tour
//! ```

use lnn::architecture::{Architecture, Bandwidth, LnnConfig};
use lnn::basis::eval_monomials;

fn main() -> Result<(), lnn::Error> {
    let config = LnnConfig {
        a: 1.0,
        d: 2,
        q: 2,
        u_sigma: 0.5,
        bandwidth: Bandwidth::Explicit(0.5),
        ..LnnConfig::default()
    };
    let arch = Architecture::build(&config, None)?;

    println!("configuration: d = {}, q = {}, a = {}", config.d, config.q, config.a);
    println!();
    println!("partition");
    println!("  M = {} cubes per axis, h = {}", arch.m(), arch.h());
    println!("  {} cubes tiling [-a,a]^d:", arch.partition().n_cubes());
    for (i, c) in arch.partition().centers().iter().enumerate() {
        println!("    cube {i}: center {c:?}");
    }
    println!();

    println!("univariate neuron coefficients (q+1 neurons per basis direction)");
    println!("  gamma = {:?}", arch.gamma());
    println!("  beta  = {:?}", arch.beta());
    println!();

    println!("basis bookkeeping");
    println!("  d_q = {} monomials: {:?}", arch.dq(), arch.indices().iter().collect::<Vec<_>>());
    println!("  scaling diag H = {:?}", arch.scaling());
    println!("  rotation condition estimate: {:.3e}", arch.rotation().cond);
    println!();

    println!(
        "neurons: {} total, {} activated per query point",
        arch.neuron_count(),
        arch.dq() * (config.q as usize + 1)
    );
    println!();

    // The feature map approximates the rotated monomial basis B m(x|x0).
    let center = arch.partition().center(0);
    let x = [center[0] + 0.2, center[1] - 0.3];
    let feat = arch.feature_vector(&x, &center);
    let target = &arch.rotation().b * eval_monomials(&x, &center, arch.indices());
    println!("feature map against its target at x = {x:?} (cube 0):");
    for j in 0..arch.dq() {
        println!(
            "  component {j}: network {:+.6}, target B m {:+.6}, gap {:+.1e}",
            feat[j],
            target[j],
            feat[j] - target[j]
        );
    }
    Ok(())
}
