//! The headline comparison at desk scale: quasi-Newton, GLMtron, SGD-RER,
//! shuffled replay, and forward SGD on the same trajectories, via the same
//! benchmark harness the CLI uses.
//!
//! Expected picture: the offline quasi-Newton fit is best, SGD-RER tracks it
//! closely in one pass, and forward SGD / shuffled replay trail behind.
//!
//! Run with: cargo run --release --example compare_estimators

use nlds::bench::{run_experiment, summarize, ExperimentConfig};

fn main() -> nlds::Result<()> {
    let config = "
        system.kind = rand_bimod
        system.d = 5
        system.rho = 0.95
        system.seed = 1
        system.link = leaky_relu:0.5
        system.sigma_sq = 1
        horizon = 30000
        seeds = 0..5
        algos = quasi-newton, glmtron, sgd-rer, sgd-er, sgd
        algo.quasi-newton.gamma = 0.2
        algo.quasi-newton.iters = 40
        algo.glmtron.gamma = 0.017
        algo.glmtron.iters = 40
        algo.sgd-rer.buffer = 240
        algo.sgd-rer.gap = 10
        algo.sgd-rer.tail-start = 0
        algo.sgd-er.buffer = 240
        algo.sgd-er.gap = 10
        algo.sgd-er.tail-start = 0
        record_stride = 10000
    ";
    let cfg = ExperimentConfig::parse(config)?;
    let rows = run_experiment(&cfg, 4)?;
    println!("{} trace rows from {} cells\n", rows.len(), cfg.algorithms.len() * cfg.seeds.len());
    for line in summarize(&rows)? {
        println!("{line}");
    }
    Ok(())
}
