//! Heavy-tailed noise: rerun the comparison with student-t innovations at
//! 4.1 degrees of freedom (barely four finite moments), rescaled so the
//! per-coordinate variance still equals sigma^2. Both the quasi-Newton fit
//! and SGD-RER should survive with the same qualitative ordering as the
//! gaussian case.
//!
//! Run with: cargo run --release --example heavy_tails

use nlds::bench::{run_experiment, summarize, ExperimentConfig};

fn main() -> nlds::Result<()> {
    for noise in ["gaussian", "student_t"] {
        let dof_line = if noise == "student_t" { "system.dof = 4.1\n" } else { "" };
        let cfg = ExperimentConfig::parse(&format!(
            "
            system.kind = rand_bimod
            system.d = 5
            system.rho = 0.95
            system.seed = 1
            system.link = leaky_relu:0.5
            system.noise = {noise}
            {dof_line}
            horizon = 30000
            seeds = 0..5
            algos = quasi-newton, sgd-rer
            algo.quasi-newton.gamma = 0.2
            algo.quasi-newton.iters = 40
            algo.sgd-rer.buffer = 240
            algo.sgd-rer.gap = 10
            record_stride = 10000
        "
        ))?;
        println!("--- {noise} noise ---");
        for line in summarize(&run_experiment(&cfg, 4)?)? {
            println!("{line}");
        }
        println!();
    }
    Ok(())
}
