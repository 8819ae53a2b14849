//! One-pass streaming identification with reverse experience replay.
//!
//! The stream is cut into buffers of B consecutive pairs separated by a gap
//! of u stale samples; each buffer is replayed newest-first, and the estimate
//! is the tail average of buffer-end iterates. Reversal is what breaks the
//! correlation between an iterate and the sample it is about to consume.
//!
//! Run with: cargo run --release --example streaming_rer

use nalgebra::DVector;
use nlds::loss::frob_sq_error;
use nlds::sim::{rand_bimod, simulate, NoiseModel};
use nlds::stream::{default_step_size, sgd_rer, BufferLayout, StreamConfig};
use nlds::{LinkFunction, SystemSpec};

fn main() -> nlds::Result<()> {
    let d = 5;
    let horizon = 100_000;
    let a_star = rand_bimod(d, 0.95, 3)?;
    let spec =
        SystemSpec::new(a_star.clone(), LinkFunction::leaky_relu(0.5)?, NoiseModel::gaussian(1.0)?)?;
    let traj = simulate(&spec, horizon, 1, &DVector::zeros(d), 0)?;

    let layout = BufferLayout::new(240, 10, horizon)?;
    println!(
        "layout: B = {}, u = {}, {} buffers over T = {horizon}",
        layout.buffer_size(),
        layout.gap(),
        layout.n_buffers()
    );

    let gamma = default_step_size(horizon);
    println!("step size 5 ln(T)/T = {gamma:.3e}");

    // Half-tail averaging (the default) versus full averaging.
    for (name, tail_start) in [("half-tail", None), ("full average", Some(0))] {
        let mut cfg = StreamConfig::new(gamma);
        cfg.tail_start = tail_start;
        let fit = sgd_rer(&traj, &layout, &cfg)?;
        println!(
            "{name:>12}: squared error {:.6e} ({})",
            frob_sq_error(&fit.a_hat, &a_star),
            fit.status
        );
    }
    Ok(())
}
