//! Simulate a stable nonlinear autoregression and inspect the basic health
//! of the trajectory: state-norm concentration, the empirical Gram floor,
//! and the mixing-time proxy that motivates the burn-in and gap defaults.
//!
//! Run with: cargo run --example simulate_and_inspect

use nalgebra::DVector;
use nlds::diag::{check_gram_floor, check_norm_concentration, mixing_proxy};
use nlds::sim::{default_burn_in, rand_bimod, simulate, NoiseModel};
use nlds::{LinkFunction, SystemSpec};

fn main() -> nlds::Result<()> {
    let d = 5;
    let rho = 0.9;
    let horizon = 20_000;

    let a_star = rand_bimod(d, rho, 42)?;
    let spec = SystemSpec::new(a_star, LinkFunction::leaky_relu(0.5)?, NoiseModel::gaussian(1.0)?)?;
    println!("system: d = {d}, ||A*|| = {:.4}, link = {}", spec.rho(), spec.link());

    let burn = default_burn_in(spec.rho(), horizon)?;
    println!("mixing proxy: {:.1} steps; burn-in default: {burn}", mixing_proxy(spec.rho(), 1.0)?);

    let traj = simulate(&spec, horizon, 0, &DVector::zeros(d), burn)?;

    let mean_sq: f64 =
        traj.states().iter().map(|x| x.norm_squared()).sum::<f64>() / (horizon + 1) as f64;
    println!("mean ||X_t||^2 = {mean_sq:.3}");

    // The stationary second moment stays under the concentration bound...
    let conc = check_norm_concentration(&traj)?;
    println!(
        "norm concentration: observed {:.3} <= bound {:.3} -> {}",
        conc.observed[0],
        conc.bound.unwrap(),
        if conc.pass { "pass" } else { "FAIL" }
    );

    // ...while the empirical Gram matrix stays above the noise floor, which
    // is what makes the quasi-Newton preconditioner safe to invert.
    let gram = check_gram_floor(&traj, 1.0);
    println!(
        "gram floor: lambda_min {:.3} >= {:.3} -> {}",
        gram.observed[0],
        gram.bound.unwrap(),
        if gram.pass { "pass" } else { "FAIL" }
    );
    Ok(())
}
