//! Trajectory simulation, test-matrix generators, coupled trajectories, and
//! the Bernoulli autoregressive sampler.
//!
//! All randomness flows through a ChaCha stream cipher seeded from an
//! explicit 64-bit seed, with a fixed draw order (time-major, then
//! coordinate), so every artifact here is bit-for-bit reproducible and a
//! trajectory and its coupled version share noise exactly.

use crate::error::{Error, Result};
use crate::link::LinkFunction;
use crate::stream::BufferLayout;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StudentT};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Noise distribution driving the state recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    /// i.i.d. `N(0, sigma^2)` coordinates.
    Gaussian { sigma_sq: f64 },
    /// Student-t coordinates with `dof` degrees of freedom, rescaled by
    /// `sigma * sqrt((dof - 2) / dof)` so the covariance is `sigma^2 I`
    /// for any admissible dof.
    StudentT { dof: f64, sigma_sq: f64 },
    /// Deterministic recursion (zero noise).
    None,
}

/// Mean-zero isotropic noise model: `E eta = 0`, `E eta eta^T = sigma^2 I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    kind: NoiseKind,
}

impl NoiseModel {
    /// Gaussian noise with per-coordinate variance `sigma_sq`.
    pub fn gaussian(sigma_sq: f64) -> Result<Self> {
        if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
            return Err(Error::InvalidNoise(format!(
                "gaussian variance must be finite and >= 0, got {sigma_sq}"
            )));
        }
        Ok(Self { kind: NoiseKind::Gaussian { sigma_sq } })
    }

    /// Heavy-tailed Student-t noise rescaled to variance `sigma_sq`.
    ///
    /// Requires `dof > 4` so the fourth moment is finite (the regime the
    /// streaming guarantees assume).
    pub fn student_t(dof: f64, sigma_sq: f64) -> Result<Self> {
        if !(dof.is_finite() && dof > 4.0) {
            return Err(Error::InvalidNoise(format!(
                "student_t dof must be > 4 so the fourth moment is finite, got {dof}"
            )));
        }
        if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
            return Err(Error::InvalidNoise(format!(
                "student_t variance must be finite and >= 0, got {sigma_sq}"
            )));
        }
        Ok(Self { kind: NoiseKind::StudentT { dof, sigma_sq } })
    }

    /// Zero noise.
    pub fn none() -> Self {
        Self { kind: NoiseKind::None }
    }

    /// Which family this model belongs to.
    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    /// Per-coordinate variance `sigma^2` (0 for the zero-noise model).
    pub fn sigma_sq(&self) -> f64 {
        match self.kind {
            NoiseKind::Gaussian { sigma_sq } | NoiseKind::StudentT { sigma_sq, .. } => sigma_sq,
            NoiseKind::None => 0.0,
        }
    }

    /// Sub-Gaussian variance proxy `C_eta`; defined only for gaussian noise,
    /// where standard-normal coordinates give `C_eta = 1`.
    pub fn c_eta(&self) -> Option<f64> {
        match self.kind {
            NoiseKind::Gaussian { .. } => Some(1.0),
            _ => None,
        }
    }

    /// Fourth moment `E ||eta||^4` in dimension `d`, when finite.
    pub fn fourth_moment(&self, d: usize) -> Option<f64> {
        let d = d as f64;
        match self.kind {
            // ||eta||^2 ~ sigma^2 chi^2_d, so E||eta||^4 = sigma^4 d (d + 2)
            NoiseKind::Gaussian { sigma_sq } => Some(sigma_sq * sigma_sq * d * (d + 2.0)),
            // per-coordinate: E eta_i^4 = 3 sigma^4 (dof-2)/(dof-4); cross terms sigma^4
            NoiseKind::StudentT { dof, sigma_sq } => {
                let s4 = sigma_sq * sigma_sq;
                Some(d * 3.0 * s4 * (dof - 2.0) / (dof - 4.0) + d * (d - 1.0) * s4)
            }
            NoiseKind::None => Some(0.0),
        }
    }

    /// Draw one noise vector, coordinates in index order.
    fn draw(&self, d: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
        match self.kind {
            NoiseKind::Gaussian { sigma_sq } => {
                let normal = Normal::new(0.0, sigma_sq.sqrt()).expect("validated at construction");
                DVector::from_fn(d, |_, _| normal.sample(rng))
            }
            NoiseKind::StudentT { dof, sigma_sq } => {
                let t = StudentT::new(dof).expect("validated at construction");
                let scale = (sigma_sq * (dof - 2.0) / dof).sqrt();
                DVector::from_fn(d, |_, _| scale * t.sample(rng))
            }
            NoiseKind::None => DVector::zeros(d),
        }
    }
}

/// A fully specified system `X_{t+1} = phi(A* X_t) + eta_t`.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    d: usize,
    a_star: DMatrix<f64>,
    link: LinkFunction,
    noise: NoiseModel,
    rho: f64,
}

impl SystemSpec {
    /// Build a system spec; the operator norm `rho = ||A*||` is recomputed
    /// from the matrix, never trusted from the caller.
    pub fn new(a_star: DMatrix<f64>, link: LinkFunction, noise: NoiseModel) -> Result<Self> {
        if a_star.nrows() != a_star.ncols() || a_star.nrows() == 0 {
            return Err(Error::InvalidSystem(format!(
                "A* must be square and non-empty, got {}x{}",
                a_star.nrows(),
                a_star.ncols()
            )));
        }
        if a_star.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSystem("A* has non-finite entries".into()));
        }
        let rho = operator_norm(&a_star);
        Ok(Self { d: a_star.nrows(), a_star, link, noise, rho })
    }

    /// State dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// The parameter matrix `A*`.
    pub fn a_star(&self) -> &DMatrix<f64> {
        &self.a_star
    }

    /// The link function `phi`.
    pub fn link(&self) -> &LinkFunction {
        &self.link
    }

    /// The noise model.
    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// Operator norm `||A*||` (largest singular value, recomputed).
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Whether `||A*|| < 1`, the stability assumption behind mixing-based
    /// guarantees.
    pub fn is_stable(&self) -> bool {
        self.rho < 1.0
    }
}

/// Largest singular value.
fn operator_norm(a: &DMatrix<f64>) -> f64 {
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Provenance carried by every trajectory, including ones loaded from disk
/// (which lack the full [`SystemSpec`]).
#[derive(Debug, Clone)]
pub struct TrajectoryMeta {
    /// State dimension.
    pub d: usize,
    /// Seed the states were generated from.
    pub seed: u64,
    /// Warm-up transitions simulated and discarded before `states[0]`.
    pub burn_in: usize,
    /// Link function of the generating system.
    pub link: LinkFunction,
    /// Operator norm of the generating matrix (NaN when unknown).
    pub rho: f64,
    /// Noise variance of the generating system (NaN when unknown).
    pub sigma_sq: f64,
}

/// An immutable simulated (or loaded) state sequence `X_0, ..., X_T`.
///
/// In-process simulation always records the driving noise sequence
/// (`noise[t]` produced `states[t+1]`), which the coupling diagnostics and
/// the contraction certificate require. Trajectories read back from disk
/// carry neither noise nor the generating `A*`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    states: Vec<DVector<f64>>,
    noise: Option<Vec<DVector<f64>>>,
    meta: TrajectoryMeta,
    spec: Option<SystemSpec>,
}

impl Trajectory {
    /// Wrap a raw state sequence (for tests and hand-built streams).
    ///
    /// The result has no spec, no noise, and NaN `rho`/`sigma_sq` metadata.
    pub fn from_states(states: Vec<DVector<f64>>, link: LinkFunction) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InvalidParam(
                "a trajectory needs at least two states (one transition)".into(),
            ));
        }
        let d = states[0].len();
        if d == 0 || states.iter().any(|s| s.len() != d) {
            return Err(Error::InvalidParam("all states must share a positive dimension".into()));
        }
        Ok(Self {
            states,
            noise: None,
            meta: TrajectoryMeta { d, seed: 0, burn_in: 0, link, rho: f64::NAN, sigma_sq: f64::NAN },
            spec: None,
        })
    }

    /// Number of transitions `T` (the trajectory holds `T + 1` states).
    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    /// State dimension.
    pub fn d(&self) -> usize {
        self.meta.d
    }

    /// All states `X_0, ..., X_T`.
    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    /// The state `X_t`.
    pub fn state(&self, t: usize) -> &DVector<f64> {
        &self.states[t]
    }

    /// Stored noise sequence, if the trajectory was simulated in-process.
    pub fn noise(&self) -> Option<&[DVector<f64>]> {
        self.noise.as_deref()
    }

    /// Generating system, if known.
    pub fn spec(&self) -> Option<&SystemSpec> {
        self.spec.as_ref()
    }

    /// Generating matrix `A*`, if known.
    pub fn a_star(&self) -> Option<&DMatrix<f64>> {
        self.spec.as_ref().map(SystemSpec::a_star)
    }

    /// Link function the trajectory was generated with.
    pub fn link(&self) -> &LinkFunction {
        &self.meta.link
    }

    /// Provenance metadata.
    pub fn meta(&self) -> &TrajectoryMeta {
        &self.meta
    }

    /// Forward (input, target) pairs `(X_t, X_{t+1})` for `t = 0..T`.
    pub fn pairs(&self) -> impl Iterator<Item = (&DVector<f64>, &DVector<f64>)> {
        self.states.windows(2).map(|w| (&w[0], &w[1]))
    }
}

/// Check a freshly produced state for divergence.
fn guard_finite(x: &DVector<f64>, step: usize) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::SimDiverged { step })
    }
}

/// Simulate `horizon` transitions of `X_{t+1} = phi(A* X_t) + eta_t`.
///
/// `burn_in` transitions are simulated first and discarded; `states[0]` is
/// the post-burn-in state (`x0` itself when `burn_in = 0`). Deterministic in
/// `seed`. The driving noise is recorded on the returned trajectory.
pub fn simulate(
    spec: &SystemSpec,
    horizon: usize,
    seed: u64,
    x0: &DVector<f64>,
    burn_in: usize,
) -> Result<Trajectory> {
    if horizon < 1 {
        return Err(Error::InvalidParam("horizon must be >= 1".into()));
    }
    if x0.len() != spec.d() {
        return Err(Error::InvalidParam(format!(
            "x0 has dimension {}, system has dimension {}",
            x0.len(),
            spec.d()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParam("x0 has non-finite entries".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = spec.d();
    let mut x = x0.clone();
    let mut z = DVector::zeros(d);
    let step_one = |x: &DVector<f64>, rng: &mut ChaCha8Rng, z: &mut DVector<f64>| {
        z.gemv(1.0, &spec.a_star, x, 0.0);
        spec.link.apply_mut(z);
        *z += spec.noise.draw(d, rng);
    };

    for step in 0..burn_in {
        step_one(&x, &mut rng, &mut z);
        guard_finite(&z, step)?;
        x.copy_from(&z);
    }

    let mut states = Vec::with_capacity(horizon + 1);
    let mut noise = Vec::with_capacity(horizon);
    states.push(x.clone());
    for t in 0..horizon {
        z.gemv(1.0, &spec.a_star, &x, 0.0);
        spec.link.apply_mut(&mut z);
        let eta = spec.noise.draw(d, &mut rng);
        z += &eta;
        guard_finite(&z, burn_in + t)?;
        noise.push(eta);
        x.copy_from(&z);
        states.push(x.clone());
    }

    Ok(Trajectory {
        states,
        noise: Some(noise),
        meta: TrajectoryMeta {
            d,
            seed,
            burn_in,
            link: *spec.link(),
            rho: spec.rho(),
            sigma_sq: spec.noise().sigma_sq(),
        },
        spec: Some(spec.clone()),
    })
}

/// Default warm-up length `max(1, ceil(10 log T / log(1/rho)))`, roughly ten
/// mixing times of the stable chain.
pub fn default_burn_in(rho: f64, horizon: usize) -> Result<usize> {
    if !(rho >= 0.0 && rho < 1.0) {
        return Err(Error::InvalidSystem(format!(
            "default burn-in needs 0 <= rho < 1, got {rho}"
        )));
    }
    let t = (horizon.max(2)) as f64;
    let steps = (10.0 * t.ln() / (1.0 / rho).ln()).ceil();
    Ok((steps as usize).max(1))
}

/// Draw a symmetric test matrix `U diag(rho, ..., rho, rho/3, ...) U^T` with
/// Haar-random orthogonal `U`: `ceil(d/2)` eigenvalues equal `rho`, the rest
/// `rho/3`, and `||A|| = rho`.
pub fn rand_bimod(d: usize, rho: f64, seed: u64) -> Result<DMatrix<f64>> {
    if d < 1 {
        return Err(Error::InvalidSystem("rand_bimod needs d >= 1".into()));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidSystem(format!("rand_bimod needs 0 < rho < 1, got {rho}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let g = DMatrix::from_fn(d, d, |_, _| normal.sample(&mut rng));

    // Orthonormalize; sign-correcting with the R diagonal gives Haar measure.
    let qr = g.qr();
    let r = qr.r();
    let mut u = qr.q();
    for i in 0..d {
        if r[(i, i)] < 0.0 {
            u.column_mut(i).neg_mut();
        }
    }

    let big = d.div_ceil(2);
    let lambda = DVector::from_fn(d, |i, _| if i < big { rho } else { rho / 3.0 });
    let a = &u * DMatrix::from_diagonal(&lambda) * u.transpose();
    // exact symmetry for downstream eigensolvers
    Ok(0.5 * (&a + a.transpose()))
}

/// The ReLU lower-bound matrix `A(eps)`: `1/4` on the first `d-1` diagonal
/// entries, last row `-eps/sqrt(d-1)` off the diagonal, zero elsewhere.
/// Its operator norm is `sqrt(1/16 + eps^2)`.
pub fn relu_lb_matrix(d: usize, epsilon: f64) -> Result<DMatrix<f64>> {
    if d < 2 {
        return Err(Error::InvalidSystem("relu_lb_matrix needs d >= 2".into()));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidSystem(format!(
            "relu_lb_matrix needs epsilon >= 0, got {epsilon}"
        )));
    }
    let off = -epsilon / ((d - 1) as f64).sqrt();
    Ok(DMatrix::from_fn(d, d, |i, j| {
        if i == j && i < d - 1 {
            0.25
        } else if i == d - 1 && j < d - 1 {
            off
        } else {
            0.0
        }
    }))
}

/// Rebuild `traj` as its coupled process: each buffer restarts from a fresh,
/// approximately stationary, independently drawn state, then re-runs the
/// recursion with the *same* stored noise as the original trajectory.
///
/// Buffers of the result are mutually independent by construction while
/// staying geometrically close to `traj` (`||X^t_i - Xc^t_i|| <=
/// rho^i ||X^t_0 - Xc^t_0||` pointwise for stable systems). Fresh starts use
/// a burn-in chain of [`default_burn_in`] steps from the zero state, driven
/// by `seed`; exact stationary sampling is impossible, so the start is an
/// approximation. Indices past the last full block continue the final
/// buffer's recursion.
pub fn coupled_trajectory(traj: &Trajectory, layout: &BufferLayout, seed: u64) -> Result<Trajectory> {
    let spec = traj.spec().ok_or_else(|| {
        Error::InvalidSystem("coupled_trajectory needs a trajectory with an attached system spec".into())
    })?;
    if !spec.is_stable() {
        return Err(Error::InvalidSystem(format!(
            "coupled_trajectory needs a stable system, got rho = {}",
            spec.rho()
        )));
    }
    let noise = traj.noise().ok_or(Error::MissingNoise("coupled_trajectory"))?;
    let t_len = traj.horizon();
    let s = layout.block();
    let n = layout.n_buffers();
    if n != t_len / s {
        return Err(Error::LayoutMismatch(format!(
            "layout has {n} buffers of block {s}, but horizon {t_len} admits {}",
            t_len / s
        )));
    }

    let d = spec.d();
    let burn = default_burn_in(spec.rho(), t_len)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![DVector::zeros(d); t_len + 1];
    let mut z = DVector::zeros(d);

    for t in 0..n {
        // independent approximately-stationary start for buffer t
        let mut x = DVector::zeros(d);
        for step in 0..burn {
            z.gemv(1.0, &spec.a_star, &x, 0.0);
            spec.link.apply_mut(&mut z);
            z += spec.noise.draw(d, &mut rng);
            guard_finite(&z, step)?;
            x.copy_from(&z);
        }
        states[t * s] = x;
        for i in 1..s {
            let idx = t * s + i;
            z.gemv(1.0, &spec.a_star, &states[idx - 1], 0.0);
            spec.link.apply_mut(&mut z);
            z += &noise[idx - 1];
            guard_finite(&z, idx - 1)?;
            states[idx].copy_from(&z);
        }
    }
    for idx in n * s..=t_len {
        if idx == 0 {
            continue;
        }
        z.gemv(1.0, &spec.a_star, &states[idx - 1], 0.0);
        spec.link.apply_mut(&mut z);
        z += &noise[idx - 1];
        guard_finite(&z, idx - 1)?;
        states[idx].copy_from(&z);
    }

    Ok(Trajectory {
        states,
        noise: Some(noise.to_vec()),
        meta: TrajectoryMeta { burn_in: burn, seed, ..traj.meta.clone() },
        spec: Some(spec.clone()),
    })
}

/// Simulate the Bernoulli autoregressive model: from `X_0 = 0`, each
/// coordinate of `X_{t+1}` is an independent draw
/// `Ber(sigma(nu_i + <a_i*, X_t>))` given `X_t`.
///
/// The returned trajectory lives in `{0, 1}^d`. Its link is the logistic
/// function restricted to the largest argument the process can produce
/// (`max|nu_i| + max_i ||a_i*||_1`), its stored "noise" holds the
/// conditional-mean residuals `X_{t+1} - sigma(nu + A* X_t)`, and
/// `sigma_sq` metadata is 0 (the randomness is in the draws, not an
/// additive model).
pub fn bernoulli_ar_simulate(
    nu: &DVector<f64>,
    a_star: &DMatrix<f64>,
    horizon: usize,
    seed: u64,
) -> Result<Trajectory> {
    if horizon < 1 {
        return Err(Error::InvalidParam("horizon must be >= 1".into()));
    }
    let d = a_star.nrows();
    if a_star.ncols() != d || d == 0 {
        return Err(Error::InvalidSystem("A* must be square and non-empty".into()));
    }
    if nu.len() != d {
        return Err(Error::InvalidParam(format!(
            "nu has dimension {}, system has dimension {d}",
            nu.len()
        )));
    }
    if nu.iter().chain(a_star.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParam("nu and A* must be finite".into()));
    }

    let nu_max = nu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let l1_max = (0..d)
        .map(|i| a_star.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let link = LinkFunction::logistic(nu_max + l1_max)?;
    let spec = SystemSpec::new(a_star.clone(), link, NoiseModel::none())?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(horizon + 1);
    let mut noise = Vec::with_capacity(horizon);
    let mut x = DVector::zeros(d);
    states.push(x.clone());
    for _ in 0..horizon {
        let mut p = a_star * &x + nu;
        link.apply_mut(&mut p);
        let next = DVector::from_fn(d, |i, _| if rng.random::<f64>() < p[i] { 1.0 } else { 0.0 });
        noise.push(&next - &p);
        x = next;
        states.push(x.clone());
    }

    Ok(Trajectory {
        states,
        noise: Some(noise),
        meta: TrajectoryMeta { d, seed, burn_in: 0, link, rho: spec.rho(), sigma_sq: 0.0 },
        spec: Some(spec),
    })
}

/// Write a trajectory file: a header line `d,T,seed,link,rho,sigma_sq`
/// followed by `T + 1` comma-separated state rows at full round-trip
/// precision.
pub fn write_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let m = traj.meta();
    writeln!(w, "{},{},{},{},{},{}", m.d, traj.horizon(), m.seed, m.link, m.rho, m.sigma_sq)?;
    for state in traj.states() {
        let mut first = true;
        for v in state.iter() {
            if !first {
                write!(w, ",")?;
            }
            write!(w, "{v}")?;
            first = false;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a trajectory file written by [`write_trajectory`].
///
/// The result carries metadata but neither the generating `A*` nor stored
/// noise; diagnostics that need those reject it with a typed error.
pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let bad = |msg: String| Error::FileFormat { path: path.display().to_string(), msg };
    let mut lines = BufReader::new(std::fs::File::open(path)?).lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))??;
    let fields: Vec<&str> = header.trim().split(',').collect();
    if fields.len() != 6 {
        return Err(bad(format!("header must have 6 fields, got {}", fields.len())));
    }
    let d: usize = fields[0].parse().map_err(|_| bad(format!("bad d `{}`", fields[0])))?;
    let t: usize = fields[1].parse().map_err(|_| bad(format!("bad T `{}`", fields[1])))?;
    let seed: u64 = fields[2].parse().map_err(|_| bad(format!("bad seed `{}`", fields[2])))?;
    let link = LinkFunction::parse(fields[3])?;
    let rho: f64 = fields[4].parse().map_err(|_| bad(format!("bad rho `{}`", fields[4])))?;
    let sigma_sq: f64 = fields[5].parse().map_err(|_| bad(format!("bad sigma_sq `{}`", fields[5])))?;
    if d == 0 || t == 0 {
        return Err(bad("d and T must be positive".into()));
    }

    let mut states = Vec::with_capacity(t + 1);
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .trim()
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(format!("unparseable state row at line {}", lineno + 2)))?;
        if row.len() != d {
            return Err(bad(format!(
                "state row at line {} has {} entries, expected {d}",
                lineno + 2,
                row.len()
            )));
        }
        states.push(DVector::from_vec(row));
    }
    if states.len() != t + 1 {
        return Err(bad(format!("expected {} state rows, got {}", t + 1, states.len())));
    }

    Ok(Trajectory {
        states,
        noise: None,
        meta: TrajectoryMeta { d, seed, burn_in: 0, link, rho, sigma_sq },
        spec: None,
    })
}
