//! Parameter recovery for non-linear dynamical systems observed through a
//! single trajectory.
//!
//! The model is `X_{t+1} = phi(A* X_t) + eta_t` where `phi` is a known
//! increasing 1-Lipschitz link applied coordinate-wise, `A*` is the unknown
//! `d x d` parameter matrix, and `eta_t` is i.i.d. mean-zero isotropic noise.
//! The crate provides:
//!
//! - [`link`]: link functions with the analytic metadata (expansivity,
//!   antiderivative) every solver needs;
//! - [`sim`]: seeded trajectory simulation, test-matrix generators, coupled
//!   trajectories, and a Bernoulli autoregressive sampler;
//! - [`loss`]: the convex proxy loss, its gradient, Gram matrices, and error
//!   metrics;
//! - [`offline`]: full-trajectory estimators (quasi-Newton, GLMtron,
//!   median-of-means boosting);
//! - [`stream`]: one-pass estimators (SGD with reverse experience replay and
//!   its ordering baselines, projected SGD for binary GLM streams);
//! - [`diag`]: empirical checks of the probabilistic claims behind the
//!   estimators, plus the ReLU hardness demonstration;
//! - [`bench`]: a config-driven experiment harness emitting CSV traces.
//!
//! Every randomized routine takes an explicit 64-bit seed and is bit-for-bit
//! reproducible. See the `examples/` directory for one runnable program per
//! capability; the `nlds` binary exposes the same functionality as a small
//! CLI (`simulate`, `fit`, `lb-demo`, `bench`, `sweep`).

pub mod bench;
pub mod diag;
pub mod error;
pub mod link;
pub mod loss;
pub mod offline;
pub mod sim;
pub mod stream;

pub use error::{Error, Result};
pub use link::LinkFunction;
pub use sim::{NoiseModel, SystemSpec, Trajectory};
