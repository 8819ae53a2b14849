//! Empirical diagnostics for the probabilistic claims the estimators rest
//! on, plus the ReLU hardness demonstration.
//!
//! Each check produces a [`DiagReport`] pairing the observed statistic with
//! its theoretical comparator. The coupling check is deterministic (the
//! underlying bound is almost-sure, not statistical); the others are Monte
//! Carlo and documented as such.

use crate::error::{Error, Result};
use crate::link::LinkFunction;
use crate::loss::empirical_gram;
use crate::sim::{
    coupled_trajectory, relu_lb_matrix, simulate, NoiseModel, SystemSpec, Trajectory,
};
use crate::stream::BufferLayout;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Outcome of one diagnostic check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagReport {
    /// Check identifier.
    pub name: String,
    /// Observed statistic(s).
    pub observed: Vec<f64>,
    /// Theoretical comparator, when the check has a single bound.
    pub bound: Option<f64>,
    /// Whether the observation satisfies the stated relation.
    pub pass: bool,
    /// Number of samples the statistic was computed from.
    pub n_samples: usize,
}

/// Checks the Gram-matrix eigenvalue floor `lambda_min(G) >= sigma^2 / 2`
/// expected of long stationary runs with gaussian noise.
pub fn check_gram_floor(traj: &Trajectory, sigma_sq: f64) -> DiagReport {
    let gram = empirical_gram(traj);
    let observed = gram.lambda_min();
    let bound = sigma_sq / 2.0;
    DiagReport {
        name: "gram_floor".into(),
        observed: vec![observed],
        bound: Some(bound),
        pass: observed >= bound,
        n_samples: gram.t_used(),
    }
}

/// Checks the coupling bound
/// `||X^t_i - Xc^t_i|| <= rho^i ||X^t_0 - Xc^t_0||` for every buffer `t` and
/// in-block index `i`, where `Xc` is the coupled trajectory regenerated from
/// `seed`. The bound is deterministic for stable systems (not statistical),
/// so `pass` tolerates only a 1e-9 relative slack for roundoff.
pub fn check_coupling(traj: &Trajectory, layout: &BufferLayout, seed: u64) -> Result<DiagReport> {
    let spec = traj
        .spec()
        .ok_or_else(|| Error::InvalidSystem("check_coupling needs the generating system".into()))?;
    let rho = spec.rho();
    let coupled = coupled_trajectory(traj, layout, seed)?;

    let s = layout.block();
    let mut worst_ratio = 0.0f64;
    let mut checked = 0usize;
    for t in 0..layout.n_buffers() {
        let d0 = (traj.state(t * s) - coupled.state(t * s)).norm();
        for i in 1..s {
            let lhs = (traj.state(t * s + i) - coupled.state(t * s + i)).norm();
            let rhs = rho.powi(i as i32) * d0;
            let ratio = if lhs == 0.0 { 1.0 } else { lhs / rhs };
            worst_ratio = worst_ratio.max(ratio);
            checked += 1;
        }
    }

    Ok(DiagReport {
        name: "coupling".into(),
        observed: vec![worst_ratio],
        bound: Some(1.0),
        pass: worst_ratio <= 1.0 + 1e-9,
        n_samples: checked,
    })
}

/// Simulates the hardness construction `A(epsilon)` (ReLU link, standard
/// gaussian noise, zero start) and reports the fraction of times the last
/// row's preactivation is strictly positive over `t in [2, horizon]`.
///
/// With `epsilon = 0` the last row is identically zero and the fraction is
/// exactly 0; `pass` asserts the fraction is a valid probability and honors
/// that exact-zero case. No bound is attached — the decay across `d` is the
/// interesting output.
pub fn relu_sign_fraction(d: usize, epsilon: f64, horizon: usize, seed: u64) -> Result<DiagReport> {
    if horizon < 2 {
        return Err(Error::InvalidParam(
            "relu_sign_fraction needs a horizon of at least 2".into(),
        ));
    }
    let a = relu_lb_matrix(d, epsilon)?;
    let last_row = a.row(d - 1).transpose();
    let spec = SystemSpec::new(a, LinkFunction::relu(), NoiseModel::gaussian(1.0)?)?;
    let traj = simulate(&spec, horizon, seed, &DVector::zeros(d), 0)?;

    let mut positive = 0usize;
    for t in 2..=horizon {
        if last_row.dot(traj.state(t)) > 0.0 {
            positive += 1;
        }
    }
    let n = horizon - 1;
    let fraction = positive as f64 / n as f64;
    let pass = (0.0..=1.0).contains(&fraction) && (epsilon > 0.0 || fraction == 0.0);
    Ok(DiagReport {
        name: "relu_sign_fraction".into(),
        observed: vec![fraction],
        bound: None,
        pass,
        n_samples: n,
    })
}

/// Checks the stationary norm bound
/// `mean ||X_t||^2 <= 8 d C_eta sigma^2 / (1 - rho)` over the trajectory's
/// post-initial states. Requires a stable gaussian-noise system.
pub fn check_norm_concentration(traj: &Trajectory) -> Result<DiagReport> {
    let spec = traj.spec().ok_or_else(|| {
        Error::InvalidSystem("check_norm_concentration needs the generating system".into())
    })?;
    let c_eta = spec
        .noise()
        .c_eta()
        .ok_or_else(|| Error::InvalidNoise("check_norm_concentration needs gaussian noise".into()))?;
    if !spec.is_stable() {
        return Err(Error::InvalidSystem(format!(
            "check_norm_concentration needs rho < 1, got {}",
            spec.rho()
        )));
    }

    let t = traj.horizon();
    let mean: f64 =
        traj.states()[1..].iter().map(|x| x.norm_squared()).sum::<f64>() / t as f64;
    let bound =
        8.0 * traj.d() as f64 * c_eta * spec.noise().sigma_sq() / (1.0 - spec.rho());
    Ok(DiagReport {
        name: "norm_concentration".into(),
        observed: vec![mean],
        bound: Some(bound),
        pass: mean <= bound,
        n_samples: t,
    })
}

/// Mixing-time proxy `(1 + ln c_rho) / ln(1/rho)` of a `(c_rho, rho)`
/// geometrically ergodic chain.
pub fn mixing_proxy(rho: f64, c_rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::NoMixingGap { rho });
    }
    if !(c_rho >= 1.0 && c_rho.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "mixing_proxy needs c_rho >= 1, got {c_rho}"
        )));
    }
    Ok((1.0 + c_rho.ln()) / (1.0 / rho).ln())
}
