//! Thin command-line front end over the `nlds` library. The library's
//! `examples/` directory is the primary interface for exploring the
//! estimators; this binary covers scriptable workflows: writing trajectory
//! files, fitting them, the ReLU hardness demo, and the benchmark harness.

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use nlds::bench::{
    self, parse_seeds, read_matrix, write_matrix, write_rows, ExperimentConfig, RawConfig,
    ResultRow,
};
use nlds::offline::{
    glmtron, median_of_means_fit, quasi_newton, FitReport, GlmtronConfig, QuasiNewtonConfig,
    TraceConfig,
};
use nlds::sim::{
    default_burn_in, rand_bimod, read_trajectory, simulate, write_trajectory, Trajectory,
};
use nlds::stream::{
    forward_sgd, sgd_dd, sgd_er, sgd_rer, BufferLayout, GlmSgdConfig, StreamConfig,
};
use nlds::{Error, LinkFunction, NoiseModel, Result, SystemSpec};
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "nlds",
    version,
    about = "Simulate nonlinear autoregressive systems and identify their parameter matrices"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a trajectory and write it as a trajectory CSV file
    Simulate(SimulateArgs),
    /// Fit a parameter matrix to a trajectory (from a file or generated inline)
    Fit(Box<FitArgs>),
    /// ReLU hardness demo: sign-activation fractions across dimensions
    LbDemo(LbDemoArgs),
    /// Run every (algorithm, seed) cell of a benchmark config
    Bench(BenchArgs),
    /// Re-run a benchmark config across a swept hyperparameter axis
    Sweep(SweepArgs),
}

/// System generation flags, shared by `simulate` and inline-generating `fit`.
#[derive(Args)]
struct GenArgs {
    /// State dimension of a generated random system
    #[arg(long)]
    d: Option<usize>,
    /// Spectral radius of the generated system (0 < rho < 1)
    #[arg(long)]
    rho: Option<f64>,
    /// Seed for the random orthogonal basis of the generated system
    #[arg(long, default_value_t = 0)]
    matrix_seed: u64,
    /// Load the true matrix from a CSV file instead of generating one
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Link function: identity | leaky_relu:<slope> | relu | logistic:<radius>
    #[arg(long, default_value = "leaky_relu:0.5")]
    link: String,
    /// Noise family: gaussian | student_t | none
    #[arg(long, default_value = "gaussian")]
    noise: String,
    /// Noise variance per coordinate
    #[arg(long, default_value_t = 1.0)]
    sigma_sq: f64,
    /// Degrees of freedom for student_t noise (must exceed 4)
    #[arg(long)]
    dof: Option<f64>,
}

impl GenArgs {
    fn spec(&self) -> Result<SystemSpec> {
        let a_star = match (&self.matrix, self.d, self.rho) {
            (Some(path), None, None) => read_matrix(path)?,
            (None, Some(d), Some(rho)) => rand_bimod(d, rho, self.matrix_seed)?,
            _ => {
                return Err(Error::InvalidParam(
                    "give either --matrix or both --d and --rho".into(),
                ))
            }
        };
        let link = LinkFunction::parse(&self.link)?;
        let noise = match self.noise.as_str() {
            "gaussian" => NoiseModel::gaussian(self.sigma_sq)?,
            "student_t" => {
                let dof = self.dof.ok_or_else(|| {
                    Error::InvalidParam("student_t noise needs --dof".into())
                })?;
                NoiseModel::student_t(dof, self.sigma_sq)?
            }
            "none" => NoiseModel::none(),
            other => {
                return Err(Error::InvalidParam(format!(
                    "unknown noise `{other}` (expected gaussian | student_t | none)"
                )))
            }
        };
        SystemSpec::new(a_star, link, noise)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    gen: GenArgs,
    /// Number of transitions T (the file holds T+1 states)
    #[arg(long)]
    horizon: usize,
    /// Seed for the noise stream
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Burn-in steps before recording starts: a count, or `auto` for the
    /// mixing-based default
    #[arg(long, default_value = "0")]
    burn_in: String,
    /// Output trajectory file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// One of: quasi-newton | glmtron | mom | sgd-rer | sgd | sgd-er | sgd-dd | glm-proj
    #[arg(long)]
    algo: String,
    /// Trajectory file to fit; omit to generate one inline from the
    /// system flags plus --horizon/--seed
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
    /// Horizon for inline generation
    #[arg(long)]
    horizon: Option<usize>,
    /// Trajectory seed for inline generation (also the shuffle seed of sgd-er)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Step size; `auto` means 5 ln(T)/T (streaming algorithms only)
    #[arg(long)]
    gamma: Option<String>,
    /// Iteration count for the offline solvers
    #[arg(long)]
    iters: Option<usize>,
    /// Buffer size B (sgd-rer, sgd-er)
    #[arg(long)]
    buffer: Option<usize>,
    /// Gap u: stale samples skipped per buffer (sgd-rer, sgd-er) or
    /// subsampling stride (sgd-dd)
    #[arg(long)]
    gap: Option<usize>,
    /// Truncation threshold R on squared sample norms (sgd-rer, sgd-er)
    #[arg(long)]
    trunc: Option<f64>,
    /// First buffer included in the tail average; 0 averages everything
    #[arg(long)]
    tail_start: Option<usize>,
    /// Row projection radius (sgd-dd)
    #[arg(long)]
    proj_radius: Option<f64>,
    /// Segment count for median-of-means
    #[arg(long)]
    segments: Option<usize>,
    /// Gap of discarded samples between median-of-means segments
    #[arg(long)]
    seg_gap: Option<usize>,
    /// GLM intercept, broadcast to every coordinate (glm-proj)
    #[arg(long)]
    nu: Option<f64>,
    /// File holding a d-entry GLM intercept vector (glm-proj)
    #[arg(long)]
    nu_path: Option<PathBuf>,
    /// l1 projection radius for the GLM rows (glm-proj)
    #[arg(long)]
    radius: Option<f64>,
    /// True matrix file; enables error columns in the trace
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Where to write the estimate (defaults to stdout)
    #[arg(long)]
    est: Option<PathBuf>,
    /// Where to write the fit trace as result CSV
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Minimum update distance between trace checkpoints
    #[arg(long, default_value_t = 1)]
    stride: u64,
}

#[derive(Args)]
struct LbDemoArgs {
    /// Dimensions to sweep
    #[arg(long, value_delimiter = ',', default_values_t = vec![4usize, 8, 16, 32])]
    dims: Vec<usize>,
    /// Off-diagonal scale of the hard construction
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Trajectory length per run
    #[arg(long, default_value_t = 100_000)]
    horizon: usize,
    /// Seeds: a comma list or a range like 0..10
    #[arg(long, default_value = "0..10")]
    seeds: String,
    /// Output CSV (defaults to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment config file
    #[arg(long)]
    config: PathBuf,
    /// Concurrent cells
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment config file (the sweep base)
    #[arg(long)]
    config: PathBuf,
    /// Config key to vary, e.g. algo.sgd-rer.buffer
    #[arg(long)]
    axis: String,
    /// Comma-separated axis values
    #[arg(long)]
    values: String,
    /// Concurrent cells
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    /// Output CSV, overriding the config's `output` key
    #[arg(long)]
    out: Option<PathBuf>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8)
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Fit(args) => cmd_fit(*args),
        Cmd::LbDemo(args) => cmd_lb_demo(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Sweep(args) => cmd_sweep(args),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let spec = args.gen.spec()?;
    let burn_in = match args.burn_in.as_str() {
        "auto" => default_burn_in(spec.rho(), args.horizon)?,
        n => n
            .parse::<usize>()
            .map_err(|_| Error::InvalidParam(format!("bad --burn-in `{n}`")))?,
    };
    let x0 = DVector::zeros(spec.d());
    let traj = simulate(&spec, args.horizon, args.seed, &x0, burn_in)?;
    write_trajectory(&traj, &args.out)?;
    eprintln!(
        "wrote {} states (d = {}, burn-in {burn_in}) to {}",
        args.horizon + 1,
        spec.d(),
        args.out.display()
    );
    Ok(())
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let traj = match &args.input {
        Some(path) => read_trajectory(path)?,
        None => {
            let spec = args.gen.spec()?;
            let horizon = args.horizon.ok_or_else(|| {
                Error::InvalidParam("inline generation needs --horizon".into())
            })?;
            let x0 = DVector::zeros(spec.d());
            simulate(&spec, horizon, args.seed, &x0, 0)?
        }
    };
    let truth = args.truth.as_ref().map(|p| read_matrix(p)).transpose()?;
    if let Some(t) = &truth {
        if t.nrows() != traj.d() || t.ncols() != traj.d() {
            return Err(Error::InvalidParam(format!(
                "--truth must be {0}x{0} to match the trajectory",
                traj.d()
            )));
        }
    }
    let trace_cfg = TraceConfig { truth: truth.clone(), stride: args.stride };
    let horizon = traj.horizon();
    let auto = nlds::stream::default_step_size(horizon);
    // Streaming algorithms accept `--gamma auto`; offline solvers need a number.
    let gamma_num = |default: Option<f64>| -> Result<f64> {
        match args.gamma.as_deref() {
            None => default
                .ok_or_else(|| Error::InvalidParam(format!("{} needs --gamma", args.algo))),
            Some("auto") => Err(Error::InvalidParam(format!(
                "{} has no `auto` step size; pass a number",
                args.algo
            ))),
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| Error::InvalidParam(format!("bad --gamma `{s}`"))),
        }
    };
    let gamma_stream = || -> Result<f64> {
        match args.gamma.as_deref() {
            None | Some("auto") => Ok(auto),
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| Error::InvalidParam(format!("bad --gamma `{s}`"))),
        }
    };
    let stream_cfg = |gamma: f64| {
        let mut cfg = StreamConfig::new(gamma);
        cfg.r_trunc = args.trunc.unwrap_or(f64::INFINITY);
        cfg.tail_start = args.tail_start;
        cfg.trace = trace_cfg.clone();
        cfg
    };

    // (report, stream position per update) per algorithm.
    let (report, t_of): (FitReport, Box<dyn Fn(u64) -> u64>) = match args.algo.as_str() {
        "quasi-newton" => {
            let cfg = QuasiNewtonConfig {
                gamma: gamma_num(Some(0.25))?,
                iters: args.iters.unwrap_or(50),
                a0: None,
                trace: trace_cfg,
            };
            (quasi_newton(&traj, &cfg)?, Box::new(|u| u))
        }
        "glmtron" => {
            let mut cfg = GlmtronConfig::new(gamma_num(None)?, args.iters.unwrap_or(50));
            cfg.trace = trace_cfg;
            (glmtron(&traj, &cfg)?, Box::new(|u| u))
        }
        "mom" => {
            let inner = QuasiNewtonConfig {
                gamma: gamma_num(Some(0.25))?,
                iters: args.iters.unwrap_or(50),
                a0: None,
                trace: TraceConfig::default(),
            };
            let segments = args.segments.unwrap_or(5);
            let clock = Instant::now();
            let est = median_of_means_fit(&traj, segments, args.seg_gap.unwrap_or(0), &inner)?;
            let wall = clock.elapsed().as_nanos() as u64;
            let updates = (segments * inner.iters) as u64;
            let err = truth.as_ref().map(|t| nlds::loss::frob_sq_error(&est, t));
            return finish_fit(
                &args,
                &traj,
                FitReport {
                    a_hat: est,
                    error_trace: err.map(|e| vec![(updates, e)]).unwrap_or_default(),
                    wall_trace: vec![(updates, wall)],
                    status: nlds::offline::FitStatus::Ok,
                },
                Box::new(move |_| horizon as u64),
            );
        }
        "sgd-rer" | "sgd-er" => {
            let buffer = args.buffer.ok_or_else(|| {
                Error::InvalidParam(format!("{} needs --buffer", args.algo))
            })?;
            let layout = BufferLayout::new(buffer, args.gap.unwrap_or(0), horizon)?;
            let cfg = stream_cfg(gamma_stream()?);
            let block = layout.block() as u64;
            let b = buffer as u64;
            let report = if args.algo == "sgd-rer" {
                sgd_rer(&traj, &layout, &cfg)?
            } else {
                sgd_er(&traj, &layout, &cfg, args.seed)?
            };
            (report, Box::new(move |u| u / b * block))
        }
        "sgd" => (forward_sgd(&traj, &stream_cfg(gamma_stream()?))?, Box::new(|u| u)),
        "sgd-dd" => {
            let gap = args.gap.unwrap_or(1) as u64;
            let radius = args.proj_radius.unwrap_or(f64::INFINITY);
            let report = sgd_dd(&traj, gap as usize, radius, &stream_cfg(gamma_stream()?))?;
            (report, Box::new(move |u| u * gap))
        }
        "glm-proj" => {
            let radius = args
                .radius
                .ok_or_else(|| Error::InvalidParam("glm-proj needs --radius".into()))?;
            let nu = match (&args.nu_path, args.nu) {
                (Some(path), None) => {
                    let m = read_matrix(path)?;
                    if m.len() != traj.d() {
                        return Err(Error::InvalidParam(format!(
                            "--nu-path must hold {} entries",
                            traj.d()
                        )));
                    }
                    DVector::from_iterator(m.len(), m.iter().copied())
                }
                (None, nu) => DVector::from_element(traj.d(), nu.unwrap_or(0.0)),
                _ => {
                    return Err(Error::InvalidParam(
                        "give at most one of --nu and --nu-path".into(),
                    ))
                }
            };
            let nu_max = nu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut cfg = GlmSgdConfig::for_bernoulli(nu_max, radius);
            cfg.trace = trace_cfg;
            (nlds::stream::projected_sgd_glm(&traj, &nu, &cfg)?, Box::new(|u| 2 * u))
        }
        other => {
            return Err(Error::InvalidParam(format!(
                "unknown algorithm `{other}` (expected quasi-newton | glmtron | mom | \
                 sgd-rer | sgd | sgd-er | sgd-dd | glm-proj)"
            )))
        }
    };
    finish_fit(&args, &traj, report, t_of)
}

/// Shared tail of `fit`: report the status, write the estimate and trace.
fn finish_fit(
    args: &FitArgs,
    traj: &Trajectory,
    report: FitReport,
    t_of: Box<dyn Fn(u64) -> u64>,
) -> Result<()> {
    eprintln!("status: {}", report.status);
    if let Some((_, err)) = report.error_trace.last() {
        eprintln!("final squared error: {err}");
    }

    if let Some(path) = &args.trace {
        let errors: std::collections::HashMap<u64, f64> =
            report.error_trace.iter().copied().collect();
        let rows: Vec<ResultRow> = report
            .wall_trace
            .iter()
            .map(|&(updates, wall_ns)| ResultRow {
                algo: args.algo.clone(),
                seed: traj.meta().seed,
                t: t_of(updates),
                updates,
                wall_ns,
                frob_sq_err: errors.get(&updates).copied().unwrap_or(f64::NAN),
                axis: None,
            })
            .collect();
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_rows(&rows, &mut out)?;
    }

    match &args.est {
        Some(path) => write_matrix(&report.a_hat, path)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            for i in 0..report.a_hat.nrows() {
                let row: Vec<String> =
                    (0..report.a_hat.ncols()).map(|j| format!("{}", report.a_hat[(i, j)])).collect();
                writeln!(stdout, "{}", row.join(","))?;
            }
        }
    }
    Ok(())
}

fn cmd_lb_demo(args: LbDemoArgs) -> Result<()> {
    let seeds = parse_seeds(&args.seeds)?;
    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "d,epsilon,fraction,seed")?;
    for &d in &args.dims {
        for &seed in &seeds {
            let rep = nlds::diag::relu_sign_fraction(d, args.epsilon, args.horizon, seed)?;
            writeln!(out, "{},{},{},{}", d, args.epsilon, rep.observed[0], seed)?;
        }
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = ExperimentConfig::parse(&text)?;
    let rows = bench::run_experiment(&cfg, args.workers)?;
    emit_results(&rows, cfg.output_path.as_deref())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let raw = RawConfig::parse(&text)?;
    let values: Vec<String> =
        args.values.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    let rows = bench::sweep(&raw, &args.axis, &values, args.workers)?;
    let base_out = ExperimentConfig::from_raw(&raw).ok().and_then(|c| c.output_path);
    emit_results(&rows, args.out.as_deref().or(base_out.as_deref()))
}

/// Rows to the output file (or stdout), summary lines to stderr.
fn emit_results(rows: &[ResultRow], out: Option<&std::path::Path>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
            write_rows(rows, &mut w)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            write_rows(rows, &mut stdout)?;
        }
    }
    for line in bench::summarize(rows)? {
        eprintln!("{line}");
    }
    Ok(())
}
