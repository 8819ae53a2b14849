//! Sweep the replay buffer size — small buffers mix poorly, huge buffers
//! leave too few of them to average over.
//!
//! Run with: cargo run --release --example buffer_sweep

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
        algos = sgd-rer
        algo.sgd-rer.buffer = 240
        algo.sgd-rer.gap = 10
        record_stride = 10000
    ",
    )?;
    let values: Vec<String> =
        ["100", "240", "500", "2000", "10000"].iter().map(|v| v.to_string()).collect();
    let rows = sweep(&base, "algo.sgd-rer.buffer", &values, 4)?;
    for line in summarize(&rows)? {
        println!("{line}");
    }
    Ok(())
}
