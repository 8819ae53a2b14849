//! GLMtron's step size has a hard ceiling: without the Gram preconditioner,
//! gradient steps amplify along the data's top eigendirection, and the
//! iteration flips from converging to diverging at roughly 1.5x the largest
//! well-behaved step. The quasi-Newton solver normalizes that direction
//! away, which is exactly why its step size needs no tuning.
//!
//! Run with: cargo run --release --example step_size_sweep

use nlds::bench::{summarize, sweep, RawConfig};

fn main() -> nlds::Result<()> {
    let base = RawConfig::parse(
        "
        system.kind = rand_bimod
        system.d = 5
        system.rho = 0.95
        system.seed = 1
        system.link = leaky_relu:0.5
        horizon = 30000
        seeds = 0..5
        algos = glmtron
        algo.glmtron.gamma = 0.1
        algo.glmtron.iters = 500
        record_stride = 10000
    ",
    )?;
    // Conservative, near-optimal, onset (~1.5x the good step), far past it.
    let values: Vec<String> =
        ["0.017", "0.1", "0.15", "0.3"].iter().map(|v| v.to_string()).collect();
    let rows = sweep(&base, "algo.glmtron.gamma", &values, 4)?;
    for line in summarize(&rows)? {
        println!("{line}");
    }
    println!("\n(an infinite median means the run diverged — recorded as data, not an error)");
    Ok(())
}
