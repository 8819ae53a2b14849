//! The data order IS the algorithm: this prints the exact pair-processing
//! sequences of reverse replay, shuffled replay, forward SGD, and
//! data-dropping SGD on a toy stream, straight from the engines that the
//! fits themselves run on.
//!
//! Run with: cargo run --example replay_orders

use nalgebra::DVector;
use nlds::sim::{rand_bimod, simulate, NoiseModel};
use nlds::stream::{sgd_dd_order, sgd_er_order, sgd_rer_order, BufferLayout};
use nlds::{LinkFunction, SystemSpec};

fn main() -> nlds::Result<()> {
    let horizon = 12;
    let spec =
        SystemSpec::new(rand_bimod(2, 0.5, 0)?, LinkFunction::identity(), NoiseModel::gaussian(1.0)?)?;
    let traj = simulate(&spec, horizon, 0, &DVector::zeros(2), 0)?;

    // T = 12 split as (B = 2 fresh pairs, u = 1 stale sample) per block.
    let layout = BufferLayout::new(2, 1, horizon)?;

    let show = |name: &str, pairs: &[(usize, usize)]| {
        let s: Vec<String> = pairs.iter().map(|(x, y)| format!("({x},{y})")).collect();
        println!("{name:>14}: {}", s.join(" "));
    };

    // Within each buffer the newest pair comes first; the stale gap pairs
    // (3,4), (6,7), (9,10) never appear.
    show("reverse", &sgd_rer_order(&traj, &layout)?);
    // Shuffling replaces the reversal with a fresh permutation per buffer.
    show("shuffled #0", &sgd_er_order(&traj, &layout, 0)?);
    show("shuffled #1", &sgd_er_order(&traj, &layout, 1)?);
    // Data dropping keeps only every u-th pair, in forward order.
    show("drop (u=3)", &sgd_dd_order(horizon, 3));
    // Forward SGD is data dropping with u = 1: every pair, in order.
    show("forward", &sgd_dd_order(horizon, 1));
    Ok(())
}
