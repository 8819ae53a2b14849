//! Offline estimators over a fully stored trajectory: the Gram-normalized
//! quasi-Newton solver, plain full-gradient GLMtron, and a median-of-means
//! wrapper that boosts confidence by fitting disjoint segments.
//!
//! Both iterative solvers minimize the convex proxy loss from [`crate::loss`]
//! and share its stationary points; quasi-Newton right-multiplies each
//! gradient step by the inverse empirical Gram matrix, which makes its
//! contraction rate condition-number free.

use crate::diag::DiagReport;
use crate::error::{Error, Result};
use crate::loss::{empirical_gram_over, frob_sq_error, proxy_grad_over};
use crate::sim::Trajectory;
use nalgebra::{DMatrix, DVector};
use std::time::Instant;

/// How a fit ended. Non-`Ok` outcomes are data (the zero-matrix returns of
/// the algorithms), not errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    /// Fit completed normally.
    Ok,
    /// The empirical Gram matrix was near-singular; the solver returned the
    /// zero matrix as specified.
    GramSingularReturnedZero,
    /// A streaming block exceeded the truncation radius; the solver returned
    /// the zero matrix.
    TruncatedReturnedZero,
    /// An iterate became non-finite.
    Diverged,
}

impl FitStatus {
    /// Convenience predicate for `status == Ok`.
    pub fn is_ok(&self) -> bool {
        matches!(self, FitStatus::Ok)
    }
}

impl std::fmt::Display for FitStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitStatus::Ok => "ok",
            FitStatus::GramSingularReturnedZero => "gram_singular_returned_zero",
            FitStatus::TruncatedReturnedZero => "truncated_returned_zero",
            FitStatus::Diverged => "diverged",
        })
    }
}

/// What a solver should record along the way.
#[derive(Debug, Clone, Default)]
pub struct TraceConfig {
    /// When the true matrix is known, squared Frobenius errors are traced
    /// against it; otherwise the error trace stays empty.
    pub truth: Option<DMatrix<f64>>,
    /// Minimum update-count distance between consecutive trace samples
    /// (0 and 1 both mean "every opportunity"). The final estimate is always
    /// recorded.
    pub stride: u64,
}

/// Result of a single fit: the estimate, optional error/wall-clock traces,
/// and the outcome status. Any status other than [`FitStatus::Ok`] comes
/// with `a_hat = 0`.
#[derive(Debug, Clone)]
pub struct FitReport {
    /// The estimate of the parameter matrix.
    pub a_hat: DMatrix<f64>,
    /// `(update_count, squared Frobenius error)` samples; empty unless the
    /// truth was supplied in [`TraceConfig`].
    pub error_trace: Vec<(u64, f64)>,
    /// `(update_count, elapsed nanoseconds)` samples over the update loop.
    pub wall_trace: Vec<(u64, u64)>,
    /// How the fit ended.
    pub status: FitStatus,
}

/// Shared trace recorder: samples both traces at the same checkpoints,
/// throttled by `stride`, and always captures the final state.
pub(crate) struct Tracer {
    start: Instant,
    stride: u64,
    truth: Option<DMatrix<f64>>,
    error_trace: Vec<(u64, f64)>,
    wall_trace: Vec<(u64, u64)>,
    last: Option<u64>,
}

impl Tracer {
    pub(crate) fn new(cfg: &TraceConfig) -> Self {
        Self {
            start: Instant::now(),
            stride: cfg.stride.max(1),
            truth: cfg.truth.clone(),
            error_trace: Vec::new(),
            wall_trace: Vec::new(),
            last: None,
        }
    }

    fn push(&mut self, updates: u64, a: &DMatrix<f64>) {
        if self.last == Some(updates) {
            return;
        }
        if let Some(truth) = &self.truth {
            self.error_trace.push((updates, frob_sq_error(a, truth)));
        }
        self.wall_trace.push((updates, self.start.elapsed().as_nanos() as u64));
        self.last = Some(updates);
    }

    /// Whether a checkpoint at `updates` would cross a stride boundary.
    pub(crate) fn is_due(&self, updates: u64) -> bool {
        let prev = self.last.unwrap_or(0);
        updates / self.stride > prev / self.stride
    }

    /// Record if this checkpoint crosses a stride boundary.
    pub(crate) fn record(&mut self, updates: u64, a: &DMatrix<f64>) {
        if self.is_due(updates) {
            self.push(updates, a);
        }
    }

    /// Record unconditionally (the final estimate).
    pub(crate) fn force(&mut self, updates: u64, a: &DMatrix<f64>) {
        self.push(updates, a);
    }

    pub(crate) fn finish(mut self, a_hat: DMatrix<f64>, updates: u64, status: FitStatus) -> FitReport {
        self.force(updates, &a_hat);
        FitReport { a_hat, error_trace: self.error_trace, wall_trace: self.wall_trace, status }
    }
}

/// Settings for [`quasi_newton`].
#[derive(Debug, Clone)]
pub struct QuasiNewtonConfig {
    /// Step size, in `(0, 1/2]`. The analysis-backed default is `1/4`.
    pub gamma: f64,
    /// Number of updates (each uses the full gradient once).
    pub iters: usize,
    /// Starting point; `None` means the zero matrix.
    pub a0: Option<DMatrix<f64>>,
    /// Trace settings.
    pub trace: TraceConfig,
}

impl Default for QuasiNewtonConfig {
    fn default() -> Self {
        Self { gamma: 0.25, iters: 50, a0: None, trace: TraceConfig::default() }
    }
}

/// Settings for [`glmtron`].
#[derive(Debug, Clone)]
pub struct GlmtronConfig {
    /// Step size; any positive value is accepted, oversized values diverge.
    pub gamma: f64,
    /// Number of full-gradient updates.
    pub iters: usize,
    /// Starting point; `None` means the zero matrix.
    pub a0: Option<DMatrix<f64>>,
    /// Trace settings.
    pub trace: TraceConfig,
}

impl GlmtronConfig {
    /// Config with the given step size and iteration count, zero start.
    pub fn new(gamma: f64, iters: usize) -> Self {
        Self { gamma, iters, a0: None, trace: TraceConfig::default() }
    }
}

pub(crate) fn validate_start(a0: &Option<DMatrix<f64>>, d: usize) -> Result<DMatrix<f64>> {
    match a0 {
        None => Ok(DMatrix::zeros(d, d)),
        Some(a) if a.nrows() == d && a.ncols() == d && a.iter().all(|v| v.is_finite()) => {
            Ok(a.clone())
        }
        Some(a) => Err(Error::InvalidParam(format!(
            "a0 must be a finite {d}x{d} matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        ))),
    }
}

/// Quasi-Newton fit on the full trajectory: from `A_0 = a0`, iterate
/// `A <- A - 2*gamma * grad(A) * G^{-1}` for `iters` steps, with `G` the
/// empirical Gram matrix factored once.
///
/// Near-singular `G` short-circuits to the zero matrix with
/// [`FitStatus::GramSingularReturnedZero`]; a non-finite iterate yields
/// [`FitStatus::Diverged`]. Requires an expansive link (`zeta > 0`).
pub fn quasi_newton(traj: &Trajectory, cfg: &QuasiNewtonConfig) -> Result<FitReport> {
    quasi_newton_over(traj, 0, traj.horizon(), cfg)
}

/// [`quasi_newton`] restricted to the transition pairs
/// `(X_t, X_{t+1})` for `t in [t_start, t_end)` (used by the
/// median-of-means segments).
pub fn quasi_newton_over(
    traj: &Trajectory,
    t_start: usize,
    t_end: usize,
    cfg: &QuasiNewtonConfig,
) -> Result<FitReport> {
    let link = *traj.link();
    link.require_expansive("quasi_newton")?;
    if !(cfg.gamma > 0.0 && cfg.gamma <= 0.5) {
        return Err(Error::InvalidParam(format!(
            "quasi_newton step size must lie in (0, 1/2], got {}",
            cfg.gamma
        )));
    }
    if cfg.iters < 1 {
        return Err(Error::InvalidParam("quasi_newton needs at least one iteration".into()));
    }
    if t_start >= t_end || t_end > traj.horizon() {
        return Err(Error::InvalidParam(format!(
            "pair range [{t_start}, {t_end}) must be nonempty and lie within horizon {}",
            traj.horizon()
        )));
    }
    let d = traj.d();
    let mut a = validate_start(&cfg.a0, d)?;

    let gram = empirical_gram_over(traj, t_start, t_end)?;
    let mut tracer = Tracer::new(&cfg.trace);
    let Some(g_inv) = gram.inverse() else {
        return Ok(tracer.finish(DMatrix::zeros(d, d), 0, FitStatus::GramSingularReturnedZero));
    };

    for i in 0..cfg.iters {
        let grad = proxy_grad_over(&link, &a, traj, t_start, t_end);
        a -= 2.0 * cfg.gamma * grad * &g_inv;
        if a.iter().any(|v| !v.is_finite()) {
            return Ok(tracer.finish(DMatrix::zeros(d, d), i as u64 + 1, FitStatus::Diverged));
        }
        tracer.record(i as u64 + 1, &a);
    }
    let updates = cfg.iters as u64;
    Ok(tracer.finish(a, updates, FitStatus::Ok))
}

/// GLMtron fit: plain full-gradient descent `A <- A - gamma * grad(A)` on
/// the proxy loss, no Gram normalization. Shares its stationary points with
/// [`quasi_newton`]; oversized steps diverge (reported, never a panic).
pub fn glmtron(traj: &Trajectory, cfg: &GlmtronConfig) -> Result<FitReport> {
    let link = *traj.link();
    link.require_expansive("glmtron")?;
    if !(cfg.gamma > 0.0 && cfg.gamma.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "glmtron step size must be positive, got {}",
            cfg.gamma
        )));
    }
    if cfg.iters < 1 {
        return Err(Error::InvalidParam("glmtron needs at least one iteration".into()));
    }
    let d = traj.d();
    let mut a = validate_start(&cfg.a0, d)?;
    let mut tracer = Tracer::new(&cfg.trace);

    for i in 0..cfg.iters {
        let grad = proxy_grad_over(&link, &a, traj, 0, traj.horizon());
        a -= cfg.gamma * grad;
        if a.iter().any(|v| !v.is_finite()) {
            return Ok(tracer.finish(DMatrix::zeros(d, d), i as u64 + 1, FitStatus::Diverged));
        }
        tracer.record(i as u64 + 1, &a);
    }
    Ok(tracer.finish(a, cfg.iters as u64, FitStatus::Ok))
}

/// Index of the estimate minimizing the median Frobenius distance to the
/// other estimates (lower median; ties broken toward the lower index).
fn metric_median_index(estimates: &[DMatrix<f64>]) -> usize {
    let mut best = (0usize, f64::INFINITY);
    for (i, a) in estimates.iter().enumerate() {
        let mut dists: Vec<f64> = estimates
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, b)| frob_sq_error(a, b).sqrt())
            .collect();
        dists.sort_by(f64::total_cmp);
        let med = if dists.is_empty() { 0.0 } else { dists[(dists.len() - 1) / 2] };
        if med < best.1 {
            best = (i, med);
        }
    }
    best.0
}

/// Median-of-means boosting: split the horizon into `k` contiguous segments
/// separated by `gap` unused transitions, quasi-Newton-fit each segment, and
/// return the estimate closest in median Frobenius distance to the rest.
///
/// Segments whose fit ends with a non-[`FitStatus::Ok`] status are excluded;
/// if every segment is excluded this returns [`Error::AllSegmentsFailed`].
pub fn median_of_means_fit(
    traj: &Trajectory,
    k: usize,
    gap: usize,
    inner: &QuasiNewtonConfig,
) -> Result<DMatrix<f64>> {
    if k < 1 {
        return Err(Error::InvalidParam("median_of_means_fit needs k >= 1".into()));
    }
    let t = traj.horizon();
    let used_by_gaps = (k - 1) * gap;
    if used_by_gaps >= t || (t - used_by_gaps) / k < 1 {
        return Err(Error::InvalidParam(format!(
            "horizon {t} cannot hold {k} segments with gap {gap}"
        )));
    }
    let seg = (t - used_by_gaps) / k;

    let mut quiet = inner.clone();
    quiet.trace = TraceConfig::default();
    let mut estimates = Vec::with_capacity(k);
    for s in 0..k {
        let start = s * (seg + gap);
        let report = quasi_newton_over(traj, start, start + seg, &quiet)?;
        if report.status.is_ok() {
            estimates.push(report.a_hat);
        }
    }
    if estimates.is_empty() {
        return Err(Error::AllSegmentsFailed(k));
    }
    let idx = metric_median_index(&estimates);
    Ok(estimates.swap_remove(idx))
}

/// Row noise projections `N_i = (1/T) sum_t eta_t[i] * X_t`, one per row,
/// computed from the trajectory's stored noise.
fn noise_projections(traj: &Trajectory) -> Result<Vec<DVector<f64>>> {
    let noise = traj.noise().ok_or(Error::MissingNoise("contraction_certificate"))?;
    let d = traj.d();
    let t = traj.horizon() as f64;
    let mut rows = vec![DVector::zeros(d); d];
    for (step, eta) in noise.iter().enumerate() {
        let x = traj.state(step);
        for i in 0..d {
            rows[i].axpy(eta[i] / t, x, 1.0);
        }
    }
    Ok(rows)
}

/// Re-run a quasi-Newton fit and certify, row by row and iteration by
/// iteration, the geometric contraction
///
/// ```text
/// ||G^{1/2} (a_i(l+1) - a*_i)||
///   <= (1 - 2*gamma*zeta) ||G^{1/2} (a_i(l) - a*_i)|| + 2*gamma ||G^{-1/2} N_i||
/// ```
///
/// where `N_i` is the noise/state cross term of row `i`. The report's
/// `observed` is the worst slack `lhs - rhs` over all rows and iterations
/// (negative when the bound holds strictly); `bound` is 0.
///
/// Needs a trajectory simulated in-process (stored noise and known truth)
/// and a non-singular Gram matrix.
pub fn contraction_certificate(traj: &Trajectory, cfg: &QuasiNewtonConfig) -> Result<DiagReport> {
    let link = *traj.link();
    link.require_expansive("contraction_certificate")?;
    if !(cfg.gamma > 0.0 && cfg.gamma <= 0.5) {
        return Err(Error::InvalidParam(format!(
            "contraction certificate needs gamma in (0, 1/2], got {}",
            cfg.gamma
        )));
    }
    let a_star = traj
        .a_star()
        .ok_or_else(|| Error::InvalidSystem("contraction_certificate needs the true matrix".into()))?
        .clone();
    let n_rows = noise_projections(traj)?;

    let t = traj.horizon();
    let gram = empirical_gram_over(traj, 0, t)?;
    let (Some(g_inv), Some(g_inv_sqrt)) = (gram.inverse(), gram.inv_sqrt()) else {
        return Err(Error::InvalidSystem(
            "contraction_certificate needs a non-singular Gram matrix".into(),
        ));
    };
    let g_sqrt = gram.sqrt_matrix();

    let d = traj.d();
    let zeta = link.zeta();
    let noise_terms: Vec<f64> = n_rows.iter().map(|n| (&g_inv_sqrt * n).norm()).collect();

    let mut a = validate_start(&cfg.a0, d)?;
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0usize;
    let row_dist = |a: &DMatrix<f64>, i: usize| {
        let diff = (a.row(i) - a_star.row(i)).transpose();
        (&g_sqrt * diff).norm()
    };

    for _ in 0..cfg.iters {
        let prev: Vec<f64> = (0..d).map(|i| row_dist(&a, i)).collect();
        let grad = proxy_grad_over(&link, &a, traj, 0, t);
        a -= 2.0 * cfg.gamma * grad * &g_inv;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSystem("certificate iterate diverged".into()));
        }
        for i in 0..d {
            let lhs = row_dist(&a, i);
            let rhs = (1.0 - 2.0 * cfg.gamma * zeta) * prev[i] + 2.0 * cfg.gamma * noise_terms[i];
            worst = worst.max(lhs - rhs);
            checked += 1;
        }
    }

    Ok(DiagReport {
        name: "contraction_certificate".into(),
        observed: vec![worst],
        bound: Some(0.0),
        pass: worst <= 1e-8,
        n_samples: checked,
    })
}

/// Iteration-count rule of thumb
/// `ceil((10/zeta) * ln(dist_sq * T * r_star / (sigma_sq * d^2)))`, clamped
/// to at least 1, for starting distance `dist_sq = ||a0 - A*||_F^2` and
/// state-norm bound `r_star`.
pub fn default_qn_iters(
    zeta: f64,
    dist_sq: f64,
    horizon: usize,
    r_star: f64,
    sigma_sq: f64,
    d: usize,
) -> usize {
    let arg = dist_sq * horizon as f64 * r_star / (sigma_sq * (d * d) as f64);
    if !(zeta > 0.0) || !(arg > 1.0) {
        return 1;
    }
    ((10.0 / zeta) * arg.ln()).ceil().max(1.0) as usize
}

/// High-probability bound on `max_t ||X_t||^2` for a stable gaussian system:
/// `d * sigma_sq * ln(4 T d / delta) / (1 - rho)^2`.
pub fn default_state_radius(d: usize, sigma_sq: f64, rho: f64, horizon: usize, delta: f64) -> f64 {
    let t = horizon as f64;
    d as f64 * sigma_sq * (4.0 * t * d as f64 / delta).ln() / ((1.0 - rho) * (1.0 - rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::LinkFunction;
    use crate::loss::{empirical_gram, proxy_grad};
    use crate::sim::{rand_bimod, simulate, NoiseModel, SystemSpec};
    use approx::assert_relative_eq;

    fn leaky_traj(d: usize, t: usize, seed: u64) -> Trajectory {
        let a = rand_bimod(d, 0.9, seed).unwrap();
        let spec = SystemSpec::new(
            a,
            LinkFunction::leaky_relu(0.5).unwrap(),
            NoiseModel::gaussian(1.0).unwrap(),
        )
        .unwrap();
        simulate(&spec, t, seed, &nalgebra::DVector::zeros(d), 0).unwrap()
    }

    fn identity_traj(d: usize, t: usize, seed: u64) -> Trajectory {
        let a = rand_bimod(d, 0.8, seed).unwrap();
        let spec =
            SystemSpec::new(a, LinkFunction::identity(), NoiseModel::gaussian(1.0).unwrap())
                .unwrap();
        simulate(&spec, t, seed, &nalgebra::DVector::zeros(d), 0).unwrap()
    }

    /// Ordinary least squares `C * G^{-1}` computed independently.
    fn ols(traj: &Trajectory) -> DMatrix<f64> {
        let t = traj.horizon() as f64;
        let d = traj.d();
        let mut c = DMatrix::zeros(d, d);
        for (x, y) in traj.pairs() {
            c.ger(1.0 / t, y, x, 1.0);
        }
        &c * empirical_gram(traj).inverse().unwrap()
    }

    #[test]
    fn one_step_half_gamma_is_ols_for_any_start() {
        for seed in 0..3 {
            let traj = identity_traj(3, 40, seed);
            let target = ols(&traj);
            for a0 in [None, Some(DMatrix::from_element(3, 3, 7.5))] {
                let cfg = QuasiNewtonConfig { gamma: 0.5, iters: 1, a0, ..Default::default() };
                let report = quasi_newton(&traj, &cfg).unwrap();
                assert!(report.status.is_ok());
                assert!(
                    (&report.a_hat - &target).amax() < 1e-12,
                    "seed {seed}: one gamma=1/2 step must be exactly OLS"
                );
            }
        }
    }

    #[test]
    fn default_gamma_drives_gradient_to_stationarity() {
        let traj = leaky_traj(2, 50, 5);
        let cfg = QuasiNewtonConfig { iters: 100, ..Default::default() };
        let report = quasi_newton(&traj, &cfg).unwrap();
        assert!(report.status.is_ok());
        let grad = proxy_grad(traj.link(), &report.a_hat, &traj);
        assert!(grad.norm() <= 1e-8, "gradient norm {} after 100 iterations", grad.norm());
    }

    #[test]
    fn glmtron_reaches_the_same_fixed_point() {
        let traj = identity_traj(2, 60, 8);
        let qn = quasi_newton(&traj, &QuasiNewtonConfig { iters: 80, ..Default::default() })
            .unwrap();
        let gt = glmtron(&traj, &GlmtronConfig::new(0.05, 20_000)).unwrap();
        assert!(gt.status.is_ok());
        assert!(
            frob_sq_error(&qn.a_hat, &gt.a_hat).sqrt() < 1e-6,
            "distance {}",
            frob_sq_error(&qn.a_hat, &gt.a_hat).sqrt()
        );
    }

    #[test]
    fn glmtron_oversized_step_reports_divergence() {
        let states =
            (0..12).map(|t| nalgebra::DVector::from_element(1, if t % 2 == 0 { 100.0 } else { -100.0 }));
        let traj = Trajectory::from_states(states.collect(), LinkFunction::identity()).unwrap();
        let report = glmtron(&traj, &GlmtronConfig::new(1.0, 500)).unwrap();
        assert_eq!(report.status, FitStatus::Diverged);
        assert!(report.a_hat.iter().all(|&v| v == 0.0));
        assert_eq!(report.status.to_string(), "diverged");
    }

    #[test]
    fn singular_gram_returns_zero_with_flag() {
        let e1 = nalgebra::DVector::from_vec(vec![1.0, 0.0]);
        let traj = Trajectory::from_states(
            vec![e1.clone(), e1.clone(), e1.clone(), e1],
            LinkFunction::identity(),
        )
        .unwrap();
        let report = quasi_newton(&traj, &QuasiNewtonConfig::default()).unwrap();
        assert_eq!(report.status, FitStatus::GramSingularReturnedZero);
        assert!(report.a_hat.iter().all(|&v| v == 0.0));
        assert_eq!(report.status.to_string(), "gram_singular_returned_zero");
    }

    #[test]
    fn relu_is_rejected_by_expansive_solvers() {
        let spec = SystemSpec::new(
            rand_bimod(2, 0.5, 0).unwrap(),
            LinkFunction::relu(),
            NoiseModel::gaussian(1.0).unwrap(),
        )
        .unwrap();
        let traj = simulate(&spec, 20, 0, &nalgebra::DVector::zeros(2), 0).unwrap();
        assert!(matches!(
            quasi_newton(&traj, &QuasiNewtonConfig::default()).unwrap_err(),
            Error::NonExpansiveLink { .. }
        ));
        assert!(matches!(
            glmtron(&traj, &GlmtronConfig::new(0.01, 10)).unwrap_err(),
            Error::NonExpansiveLink { .. }
        ));
    }

    #[test]
    fn parameter_validation() {
        let traj = identity_traj(2, 20, 0);
        for gamma in [0.0, -0.1, 0.6] {
            let cfg = QuasiNewtonConfig { gamma, ..Default::default() };
            assert!(quasi_newton(&traj, &cfg).is_err(), "gamma {gamma} must be rejected");
        }
        let cfg = QuasiNewtonConfig { iters: 0, ..Default::default() };
        assert!(quasi_newton(&traj, &cfg).is_err());
        let cfg = QuasiNewtonConfig { a0: Some(DMatrix::zeros(3, 3)), ..Default::default() };
        assert!(quasi_newton(&traj, &cfg).is_err(), "wrong-shape a0");
        assert!(glmtron(&traj, &GlmtronConfig::new(0.0, 5)).is_err());
    }

    #[test]
    fn traces_record_strided_checkpoints_and_the_final_state() {
        let traj = identity_traj(2, 30, 3);
        let truth = traj.a_star().unwrap().clone();
        let cfg = QuasiNewtonConfig {
            iters: 5,
            trace: TraceConfig { truth: Some(truth.clone()), stride: 2 },
            ..Default::default()
        };
        let report = quasi_newton(&traj, &cfg).unwrap();
        let counts: Vec<u64> = report.error_trace.iter().map(|(u, _)| *u).collect();
        assert_eq!(counts, vec![2, 4, 5]);
        assert_eq!(
            report.wall_trace.iter().map(|(u, _)| *u).collect::<Vec<_>>(),
            counts,
            "both traces share checkpoints"
        );
        for w in report.wall_trace.windows(2) {
            assert!(w[0].1 <= w[1].1, "wall clock must be nondecreasing");
        }
        for e in report.error_trace.windows(2) {
            assert!(e[0].0 < e[1].0, "update counts must increase");
        }
        assert_relative_eq!(
            report.error_trace.last().unwrap().1,
            frob_sq_error(&report.a_hat, &truth),
            max_relative = 1e-15
        );

        // no truth -> no error trace, wall trace still present
        let report =
            quasi_newton(&traj, &QuasiNewtonConfig { iters: 5, ..Default::default() }).unwrap();
        assert!(report.error_trace.is_empty());
        assert!(!report.wall_trace.is_empty());
    }

    #[test]
    fn metric_median_discards_a_corrupted_estimate() {
        let base = rand_bimod(3, 0.9, 1).unwrap();
        let jitter = |eps: f64| {
            let mut m = base.clone();
            m[(0, 0)] += eps;
            m
        };
        let corrupted = &base + DMatrix::identity(3, 3) * 100.0;
        let ests = vec![jitter(0.01), corrupted, jitter(-0.02)];
        let idx = metric_median_index(&ests);
        assert!(idx == 0 || idx == 2, "aggregation must pick an uncorrupted estimate");
    }

    #[test]
    fn mom_with_one_segment_is_plain_quasi_newton() {
        let traj = leaky_traj(2, 100, 4);
        let inner = QuasiNewtonConfig { iters: 30, ..Default::default() };
        let full = quasi_newton(&traj, &inner).unwrap();
        let mom = median_of_means_fit(&traj, 1, 0, &inner).unwrap();
        assert_eq!(mom, full.a_hat);
    }

    #[test]
    fn mom_five_segments_stays_within_twice_the_single_fit_error() {
        let traj = leaky_traj(3, 5000, 11);
        let truth = traj.a_star().unwrap();
        let inner = QuasiNewtonConfig { iters: 40, ..Default::default() };
        let single = frob_sq_error(&quasi_newton(&traj, &inner).unwrap().a_hat, truth);
        let mom = frob_sq_error(&median_of_means_fit(&traj, 5, 10, &inner).unwrap(), truth);
        assert!(
            mom <= 4.0 * single,
            "5-segment squared error {mom} vs single {single} (allowing 2x in norm)"
        );
    }

    #[test]
    fn mom_rejects_impossible_layouts() {
        let traj = identity_traj(2, 20, 0);
        let inner = QuasiNewtonConfig::default();
        assert!(median_of_means_fit(&traj, 0, 0, &inner).is_err());
        assert!(median_of_means_fit(&traj, 30, 0, &inner).is_err());
        assert!(median_of_means_fit(&traj, 2, 25, &inner).is_err());
    }

    #[test]
    fn certificate_holds_on_simulated_data() {
        for seed in [0, 1] {
            let traj = leaky_traj(3, 400, seed);
            let cfg = QuasiNewtonConfig { iters: 25, ..Default::default() };
            let report = contraction_certificate(&traj, &cfg).unwrap();
            assert!(report.pass, "worst slack {}", report.observed[0]);
            assert!(report.observed[0] <= 1e-8);
            assert_eq!(report.n_samples, 3 * 25);
        }
        // gamma = 1/2, identity link also satisfies the inequality
        let traj = identity_traj(2, 200, 9);
        let cfg = QuasiNewtonConfig { gamma: 0.5, iters: 10, ..Default::default() };
        assert!(contraction_certificate(&traj, &cfg).unwrap().pass);
    }

    #[test]
    fn certificate_requires_stored_noise() {
        let traj = identity_traj(2, 50, 2);
        let stripped =
            Trajectory::from_states(traj.states().to_vec(), *traj.link()).unwrap();
        assert!(matches!(
            contraction_certificate(&stripped, &QuasiNewtonConfig::default()).unwrap_err(),
            Error::InvalidSystem(_) | Error::MissingNoise(_)
        ));
    }

    #[test]
    fn default_sizes_frozen_arithmetic() {
        // (10 / 0.5) * ln(25 * 1e5 * 1e3 / 25) = 20 * ln(1e8) = 368.41...
        assert_eq!(default_qn_iters(0.5, 25.0, 100_000, 1e3, 1.0, 5), 369);
        assert_eq!(default_qn_iters(0.5, 0.0, 100_000, 1e3, 1.0, 5), 1);
        // 5 * 1 * ln(4e5*5/0.01) / 0.02^2
        assert_relative_eq!(
            default_state_radius(5, 1.0, 0.98, 100_000, 0.01),
            238_922.849_056_403_9,
            max_relative = 1e-12
        );
    }
}
