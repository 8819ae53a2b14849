//! Benchmark harness: run a grid of (algorithm, seed) cells on one system,
//! sweep a hyperparameter axis, and summarize final errors.
//!
//! Cells are independent and run concurrently up to a worker count; rows come
//! back in a deterministic order (algorithm-major, then seed, then trace
//! order) regardless of scheduling. Per-cell failures such as divergence or
//! truncation are recorded as data in the error column — they never abort the
//! run.

mod config;
mod csv;

pub use config::{parse_seeds, AlgoSpec, ExperimentConfig, RawConfig, SystemGen};
pub use csv::{read_matrix, read_rows, write_matrix, write_rows, ResultRow};

use crate::error::{Error, Result};
use crate::loss::frob_sq_error;
use crate::offline::{
    glmtron, median_of_means_fit, quasi_newton, FitReport, FitStatus, GlmtronConfig,
    QuasiNewtonConfig, TraceConfig,
};
use crate::sim::{simulate, SystemSpec};
use crate::stream::{forward_sgd, sgd_dd, sgd_er, sgd_rer, BufferLayout, StreamConfig};
use nalgebra::DVector;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

/// Run every (algorithm, seed) cell of a validated experiment with up to
/// `workers` threads. Each cell simulates its own copy of the seed's
/// trajectory, fits, and reports one [`ResultRow`] per trace checkpoint;
/// wall-clock covers only the update loops.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<ResultRow>> {
    if workers < 1 {
        return Err(Error::InvalidParam("worker count must be >= 1".into()));
    }
    let spec = cfg.system_spec()?;
    let cells: Vec<(usize, usize)> = (0..cfg.algorithms.len())
        .flat_map(|a| (0..cfg.seeds.len()).map(move |s| (a, s)))
        .collect();
    let slots: Vec<Mutex<Option<Result<Vec<ResultRow>>>>> =
        cells.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..workers.min(cells.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let (ai, si) = cells[i];
                let out = run_cell(
                    &spec,
                    &cfg.algorithms[ai],
                    cfg.seeds[si],
                    cfg.horizon,
                    cfg.record_stride,
                );
                *slots[i].lock().unwrap() = Some(out);
            });
        }
    });

    let mut rows = Vec::new();
    for slot in slots {
        let cell = slot.into_inner().unwrap().expect("every claimed cell reports a result");
        rows.extend(cell?);
    }
    Ok(rows)
}

/// One (algorithm, seed) cell: simulate, fit, convert the traces to rows.
fn run_cell(
    spec: &SystemSpec,
    algo: &AlgoSpec,
    seed: u64,
    horizon: usize,
    stride: u64,
) -> Result<Vec<ResultRow>> {
    let truth = spec.a_star().clone();
    let row = |t: u64, updates: u64, wall_ns: u64, frob_sq_err: f64| ResultRow {
        algo: algo.name().to_string(),
        seed,
        t,
        updates,
        wall_ns,
        frob_sq_err,
        axis: None,
    };

    let x0 = DVector::zeros(spec.d());
    let traj = match simulate(spec, horizon, seed, &x0, 0) {
        Ok(traj) => traj,
        // An exploding trajectory is data about the system, not a harness
        // failure: record it and move on.
        Err(Error::SimDiverged { .. }) => return Ok(vec![row(0, 0, 0, f64::INFINITY)]),
        Err(e) => return Err(e),
    };

    let trace = TraceConfig { truth: Some(truth.clone()), stride };
    // How a checkpoint's update count maps back to a trajectory position.
    let (report, t_of): (FitReport, Box<dyn Fn(u64) -> u64>) = match algo {
        AlgoSpec::QuasiNewton { gamma, iters } => {
            let cfg = QuasiNewtonConfig { gamma: *gamma, iters: *iters, a0: None, trace };
            (quasi_newton(&traj, &cfg)?, Box::new(|u| u))
        }
        AlgoSpec::Glmtron { gamma, iters } => {
            let mut cfg = GlmtronConfig::new(*gamma, *iters);
            cfg.trace = trace;
            (glmtron(&traj, &cfg)?, Box::new(|u| u))
        }
        AlgoSpec::MedianOfMeans { segments, gap, gamma, iters } => {
            let inner = QuasiNewtonConfig {
                gamma: *gamma,
                iters: *iters,
                a0: None,
                trace: TraceConfig::default(),
            };
            let clock = Instant::now();
            let updates = (segments * iters) as u64;
            return match median_of_means_fit(&traj, *segments, *gap, &inner) {
                Ok(est) => {
                    let wall = clock.elapsed().as_nanos() as u64;
                    Ok(vec![row(horizon as u64, updates, wall, frob_sq_error(&est, &truth))])
                }
                Err(Error::AllSegmentsFailed(_)) => {
                    let wall = clock.elapsed().as_nanos() as u64;
                    Ok(vec![row(horizon as u64, updates, wall, f64::INFINITY)])
                }
                Err(e) => Err(e),
            };
        }
        AlgoSpec::SgdRer { buffer, gap, gamma, trunc, tail_start } => {
            let layout = BufferLayout::new(*buffer, *gap, horizon)?;
            let mut cfg = StreamConfig::new(*gamma);
            cfg.r_trunc = *trunc;
            cfg.tail_start = *tail_start;
            cfg.trace = trace;
            let block = layout.block() as u64;
            let b = *buffer as u64;
            (sgd_rer(&traj, &layout, &cfg)?, Box::new(move |u| u / b * block))
        }
        AlgoSpec::SgdEr { buffer, gap, gamma, trunc, tail_start } => {
            let layout = BufferLayout::new(*buffer, *gap, horizon)?;
            let mut cfg = StreamConfig::new(*gamma);
            cfg.r_trunc = *trunc;
            cfg.tail_start = *tail_start;
            cfg.trace = trace;
            let block = layout.block() as u64;
            let b = *buffer as u64;
            (sgd_er(&traj, &layout, &cfg, seed)?, Box::new(move |u| u / b * block))
        }
        AlgoSpec::ForwardSgd { gamma } => {
            let mut cfg = StreamConfig::new(*gamma);
            cfg.trace = trace;
            (forward_sgd(&traj, &cfg)?, Box::new(|u| u))
        }
        AlgoSpec::SgdDd { gap, gamma, radius } => {
            let mut cfg = StreamConfig::new(*gamma);
            cfg.trace = trace;
            let gap = *gap as u64;
            (sgd_dd(&traj, gap as usize, *radius, &cfg)?, Box::new(move |u| u * gap))
        }
    };

    let mut rows: Vec<ResultRow> = report
        .error_trace
        .iter()
        .zip(&report.wall_trace)
        .map(|(&(updates, err), &(u2, wall_ns))| {
            debug_assert_eq!(updates, u2);
            row(t_of(updates), updates, wall_ns, err)
        })
        .collect();
    // A diverged fit has no meaningful estimate; the zero placeholder's error
    // would understate what happened.
    if report.status == FitStatus::Diverged {
        if let Some(last) = rows.last_mut() {
            last.frob_sq_err = f64::INFINITY;
        }
    }
    Ok(rows)
}

/// Re-run the experiment once per axis value, patching `axis = value` into
/// the raw config (which is re-validated each time, so the axis must name a
/// real hyperparameter), and tag every row with the axis pair.
pub fn sweep(
    raw: &RawConfig,
    axis: &str,
    values: &[String],
    workers: usize,
) -> Result<Vec<ResultRow>> {
    if values.is_empty() {
        return Err(Error::InvalidParam("sweep needs at least one axis value".into()));
    }
    let mut all = Vec::new();
    for value in values {
        let mut patched = raw.clone();
        patched.set(axis, value);
        let cfg = ExperimentConfig::from_raw(&patched)?;
        let mut rows = run_experiment(&cfg, workers)?;
        for r in &mut rows {
            r.axis = Some((axis.to_string(), value.clone()));
        }
        all.extend(rows);
    }
    Ok(all)
}

/// Aggregate statistics of one (algorithm, axis) group in a result set.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algo: String,
    pub axis: Option<(String, String)>,
    /// Number of seeds the group covers.
    pub seeds: usize,
    /// Median of final squared Frobenius errors across seeds (mean of the
    /// two middle values when the count is even).
    pub median: f64,
    /// 25th percentile (linear interpolation between order statistics).
    pub q25: f64,
    /// 75th percentile.
    pub q75: f64,
    /// Total updates across seeds' final checkpoints.
    pub total_updates: u64,
    /// Total wall-clock nanoseconds across seeds' final checkpoints.
    pub total_wall_ns: u64,
}

impl std::fmt::Display for SummaryRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some((axis, value)) = &self.axis {
            write!(f, "{} [{axis}={value}]", self.algo)?;
        } else {
            write!(f, "{}", self.algo)?;
        }
        write!(
            f,
            ": median={:.6e} q25={:.6e} q75={:.6e} seeds={} updates={} wall={:.3}s",
            self.median,
            self.q25,
            self.q75,
            self.seeds,
            self.total_updates,
            self.total_wall_ns as f64 / 1e9
        )
    }
}

/// Per-(algorithm, axis) summary of final errors: for each seed the row with
/// the highest update count is the final state; groups appear in first-seen
/// order. Errors on an empty input.
pub fn summarize(rows: &[ResultRow]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::InvalidParam("cannot summarize an empty result set".into()));
    }
    type Key = (String, Option<(String, String)>);
    let mut order: Vec<Key> = Vec::new();
    let mut groups: std::collections::HashMap<Key, std::collections::HashMap<u64, &ResultRow>> =
        std::collections::HashMap::new();
    for r in rows {
        let key = (r.algo.clone(), r.axis.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups
            .entry(key)
            .or_default()
            .entry(r.seed)
            .and_modify(|cur| {
                if r.updates >= cur.updates {
                    *cur = r;
                }
            })
            .or_insert(r);
    }

    let mut out = Vec::with_capacity(order.len());
    for key in order {
        let per_seed = &groups[&key];
        let mut finals: Vec<f64> = per_seed.values().map(|r| r.frob_sq_err).collect();
        finals.sort_by(f64::total_cmp);
        let total_updates = per_seed.values().map(|r| r.updates).sum();
        let total_wall_ns = per_seed.values().map(|r| r.wall_ns).sum();
        out.push(SummaryRow {
            algo: key.0,
            axis: key.1,
            seeds: finals.len(),
            median: median_sorted(&finals),
            q25: quantile_sorted(&finals, 0.25),
            q75: quantile_sorted(&finals, 0.75),
            total_updates,
            total_wall_ns,
        });
    }
    Ok(out)
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    }
}
