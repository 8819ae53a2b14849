//! Experiment configuration: a flat `key = value` text format with dotted
//! keys, parsed into a fully validated [`ExperimentConfig`] before any
//! simulation starts.
//!
//! ```text
//! # system
//! system.kind = rand_bimod
//! system.d = 5
//! system.rho = 0.98
//! system.link = leaky_relu:0.5
//! system.noise = gaussian
//! system.sigma_sq = 1
//! horizon = 100000
//! seeds = 0..5
//! algos = quasi-newton, sgd-rer
//! algo.quasi-newton.gamma = 0.2
//! algo.sgd-rer.buffer = 240
//! algo.sgd-rer.gap = 10
//! algo.sgd-rer.gamma = auto
//! ```
//!
//! Unknown keys, duplicate keys, and hyperparameters violating a target
//! algorithm's preconditions are all rejected at parse time.

use crate::error::{Error, Result};
use crate::link::LinkFunction;
use crate::sim::{rand_bimod, relu_lb_matrix, NoiseModel, SystemSpec};
use crate::stream::{default_step_size, BufferLayout};
use nalgebra::DMatrix;
use std::collections::HashSet;
use std::path::PathBuf;

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// An ordered list of `key = value` entries, before interpretation.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: Vec<(String, String)>,
}

impl RawConfig {
    /// Parse the flat text format: one `key = value` per line, `#` lines are
    /// comments, blank lines are skipped, duplicate keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(cfg_err(format!("line {}: expected `key = value`", lineno + 1)));
            };
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            if key.is_empty() || value.is_empty() {
                return Err(cfg_err(format!("line {}: empty key or value", lineno + 1)));
            }
            if entries.iter().any(|(k, _)| *k == key) {
                return Err(cfg_err(format!("duplicate key `{key}`")));
            }
            entries.push((key, value));
        }
        Ok(Self { entries })
    }

    /// Look up a key.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Replace a key's value, or append the pair (used by sweeps).
    pub fn set(&mut self, key: &str, value: &str) {
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some((_, v)) => *v = value.to_string(),
            None => self.entries.push((key.to_string(), value.to_string())),
        }
    }
}

/// How the true system matrix is produced.
#[derive(Debug, Clone)]
pub enum SystemGen {
    /// Symmetric spectrum-controlled random matrix (see
    /// [`rand_bimod`]); `seed` drives the orthogonal basis.
    RandBiMod { d: usize, rho: f64, seed: u64 },
    /// The ReLU hardness construction `A(epsilon)`; forces the relu link and
    /// unit gaussian noise.
    ReluLb { d: usize, epsilon: f64 },
    /// A matrix loaded verbatim from a file.
    Explicit { a_star: DMatrix<f64> },
}

impl SystemGen {
    /// Materialize the matrix.
    pub fn matrix(&self) -> Result<DMatrix<f64>> {
        match self {
            SystemGen::RandBiMod { d, rho, seed } => rand_bimod(*d, *rho, *seed),
            SystemGen::ReluLb { d, epsilon } => relu_lb_matrix(*d, *epsilon),
            SystemGen::Explicit { a_star } => Ok(a_star.clone()),
        }
    }
}

/// One algorithm cell of an experiment, fully resolved (every step size is
/// a number by now — `auto` was expanded against the horizon at parse time).
#[derive(Debug, Clone)]
pub enum AlgoSpec {
    QuasiNewton { gamma: f64, iters: usize },
    Glmtron { gamma: f64, iters: usize },
    MedianOfMeans { segments: usize, gap: usize, gamma: f64, iters: usize },
    SgdRer { buffer: usize, gap: usize, gamma: f64, trunc: f64, tail_start: Option<usize> },
    ForwardSgd { gamma: f64 },
    SgdEr { buffer: usize, gap: usize, gamma: f64, trunc: f64, tail_start: Option<usize> },
    SgdDd { gap: usize, gamma: f64, radius: f64 },
}

impl AlgoSpec {
    /// The CSV / config name of this algorithm.
    pub fn name(&self) -> &'static str {
        match self {
            AlgoSpec::QuasiNewton { .. } => "quasi-newton",
            AlgoSpec::Glmtron { .. } => "glmtron",
            AlgoSpec::MedianOfMeans { .. } => "mom",
            AlgoSpec::SgdRer { .. } => "sgd-rer",
            AlgoSpec::ForwardSgd { .. } => "sgd",
            AlgoSpec::SgdEr { .. } => "sgd-er",
            AlgoSpec::SgdDd { .. } => "sgd-dd",
        }
    }

    /// Whether this solver needs an expansive link (`zeta > 0`).
    pub fn needs_expansive_link(&self) -> bool {
        !matches!(self, AlgoSpec::ForwardSgd { .. } | AlgoSpec::SgdDd { .. })
    }
}

/// A validated experiment: system, horizon, algorithm cells, seeds, output.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub system: SystemGen,
    pub link: LinkFunction,
    pub noise: NoiseModel,
    pub horizon: usize,
    pub algorithms: Vec<AlgoSpec>,
    pub seeds: Vec<u64>,
    pub output_path: Option<PathBuf>,
    pub record_stride: u64,
}

impl ExperimentConfig {
    /// Parse and validate config text.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    /// Interpret a raw key-value listing, validating every hyperparameter
    /// against its target algorithm's preconditions. Unknown keys are
    /// rejected so typos cannot silently fall back to defaults.
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let mut used: HashSet<String> = HashSet::new();
        let mut take = |key: &str| {
            used.insert(key.to_string());
            raw.get(key)
        };

        let horizon = parse_num::<usize>("horizon", take("horizon"))?
            .ok_or_else(|| cfg_err("missing required key `horizon`"))?;
        if horizon < 1 {
            return Err(cfg_err("horizon must be >= 1"));
        }

        // --- system ---------------------------------------------------
        let kind = take("system.kind").ok_or_else(|| cfg_err("missing `system.kind`"))?;
        let (system, link, noise) = match kind {
            "rand_bimod" => {
                let d = parse_num::<usize>("system.d", take("system.d"))?
                    .ok_or_else(|| cfg_err("rand_bimod needs `system.d`"))?;
                let rho = parse_num::<f64>("system.rho", take("system.rho"))?
                    .ok_or_else(|| cfg_err("rand_bimod needs `system.rho`"))?;
                let seed = parse_num::<u64>("system.seed", take("system.seed"))?.unwrap_or(0);
                let (link, noise) = parse_link_noise(&mut take)?;
                rand_bimod(d, rho, seed)?; // validate d/rho now, fail fast
                (SystemGen::RandBiMod { d, rho, seed }, link, noise)
            }
            "relu_lb" => {
                let d = parse_num::<usize>("system.d", take("system.d"))?
                    .ok_or_else(|| cfg_err("relu_lb needs `system.d`"))?;
                let epsilon = parse_num::<f64>("system.epsilon", take("system.epsilon"))?
                    .ok_or_else(|| cfg_err("relu_lb needs `system.epsilon`"))?;
                relu_lb_matrix(d, epsilon)?;
                for fixed in ["system.link", "system.noise", "system.sigma_sq", "system.dof"] {
                    if raw.get(fixed).is_some() {
                        return Err(cfg_err(format!(
                            "`{fixed}` is fixed by the relu_lb construction (relu link, unit gaussian noise)"
                        )));
                    }
                }
                (
                    SystemGen::ReluLb { d, epsilon },
                    LinkFunction::relu(),
                    NoiseModel::gaussian(1.0)?,
                )
            }
            "explicit" => {
                let path = take("system.matrix_path")
                    .ok_or_else(|| cfg_err("explicit system needs `system.matrix_path`"))?;
                let a_star = super::read_matrix(std::path::Path::new(path))?;
                if a_star.nrows() != a_star.ncols() {
                    return Err(cfg_err(format!(
                        "explicit matrix must be square, got {}x{}",
                        a_star.nrows(),
                        a_star.ncols()
                    )));
                }
                let (link, noise) = parse_link_noise(&mut take)?;
                (SystemGen::Explicit { a_star }, link, noise)
            }
            other => {
                return Err(cfg_err(format!(
                    "unknown system.kind `{other}` (expected rand_bimod | relu_lb | explicit)"
                )))
            }
        };

        // --- seeds ------------------------------------------------------
        let seeds_txt = take("seeds").ok_or_else(|| cfg_err("missing required key `seeds`"))?;
        let seeds = parse_seeds(seeds_txt)?;

        // --- algorithms ---------------------------------------------------
        let algos_txt = take("algos").ok_or_else(|| cfg_err("missing required key `algos`"))?;
        let auto_gamma = default_step_size(horizon);
        let gamma_of = |key: &str, value: Option<&str>| -> Result<f64> {
            let gamma = match value {
                None | Some("auto") => auto_gamma,
                Some(v) => parse_num::<f64>(key, Some(v))?.unwrap(),
            };
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(cfg_err(format!("key `{key}`: step size must be positive, got {gamma}")));
            }
            Ok(gamma)
        };
        let mut algorithms = Vec::new();
        for name in algos_txt.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let k = |suffix: &str| format!("algo.{name}.{suffix}");
            let spec = match name {
                "quasi-newton" => {
                    let gamma =
                        parse_num::<f64>(&k("gamma"), take(&k("gamma")))?.unwrap_or(0.25);
                    if !(gamma > 0.0 && gamma <= 0.5) {
                        return Err(cfg_err(format!(
                            "quasi-newton gamma must lie in (0, 1/2], got {gamma}"
                        )));
                    }
                    let iters = parse_num::<usize>(&k("iters"), take(&k("iters")))?.unwrap_or(60);
                    if iters < 1 {
                        return Err(cfg_err("quasi-newton iters must be >= 1"));
                    }
                    AlgoSpec::QuasiNewton { gamma, iters }
                }
                "glmtron" => {
                    let gamma = parse_num::<f64>(&k("gamma"), take(&k("gamma")))?
                        .ok_or_else(|| cfg_err("glmtron has no safe default step size; set `algo.glmtron.gamma`"))?;
                    if !(gamma > 0.0 && gamma.is_finite()) {
                        return Err(cfg_err(format!("glmtron gamma must be positive, got {gamma}")));
                    }
                    let iters = parse_num::<usize>(&k("iters"), take(&k("iters")))?.unwrap_or(60);
                    if iters < 1 {
                        return Err(cfg_err("glmtron iters must be >= 1"));
                    }
                    AlgoSpec::Glmtron { gamma, iters }
                }
                "mom" => {
                    let segments =
                        parse_num::<usize>(&k("segments"), take(&k("segments")))?.unwrap_or(5);
                    let gap = parse_num::<usize>(&k("gap"), take(&k("gap")))?.unwrap_or(0);
                    let gamma =
                        parse_num::<f64>(&k("gamma"), take(&k("gamma")))?.unwrap_or(0.25);
                    let iters = parse_num::<usize>(&k("iters"), take(&k("iters")))?.unwrap_or(60);
                    if segments < 1 || iters < 1 {
                        return Err(cfg_err("mom needs segments >= 1 and iters >= 1"));
                    }
                    if !(gamma > 0.0 && gamma <= 0.5) {
                        return Err(cfg_err(format!("mom gamma must lie in (0, 1/2], got {gamma}")));
                    }
                    let gap_total = (segments - 1) * gap;
                    if gap_total >= horizon || (horizon - gap_total) / segments < 1 {
                        return Err(cfg_err(format!(
                            "horizon {horizon} cannot hold {segments} segments with gap {gap}"
                        )));
                    }
                    AlgoSpec::MedianOfMeans { segments, gap, gamma, iters }
                }
                "sgd-rer" | "sgd-er" => {
                    let buffer = parse_num::<usize>(&k("buffer"), take(&k("buffer")))?
                        .ok_or_else(|| cfg_err(format!("{name} needs `algo.{name}.buffer`")))?;
                    let gap = parse_num::<usize>(&k("gap"), take(&k("gap")))?.unwrap_or(0);
                    let layout = BufferLayout::new(buffer, gap, horizon)?;
                    let gamma = gamma_of(&k("gamma"), take(&k("gamma")))?;
                    let trunc = parse_num::<f64>(&k("trunc"), take(&k("trunc")))?
                        .unwrap_or(f64::INFINITY);
                    let tail_start =
                        parse_num::<usize>(&k("tail-start"), take(&k("tail-start")))?;
                    if let Some(t0) = tail_start {
                        if t0 >= layout.n_buffers() {
                            return Err(cfg_err(format!(
                                "{name} tail-start {t0} must be below the buffer count {}",
                                layout.n_buffers()
                            )));
                        }
                    }
                    if !(gamma > 0.0) || trunc.is_nan() || trunc <= 0.0 {
                        return Err(cfg_err(format!("{name} needs gamma > 0 and trunc > 0")));
                    }
                    if name == "sgd-rer" {
                        AlgoSpec::SgdRer { buffer, gap, gamma, trunc, tail_start }
                    } else {
                        AlgoSpec::SgdEr { buffer, gap, gamma, trunc, tail_start }
                    }
                }
                "sgd" => AlgoSpec::ForwardSgd { gamma: gamma_of(&k("gamma"), take(&k("gamma")))? },
                "sgd-dd" => {
                    let gap = parse_num::<usize>(&k("gap"), take(&k("gap")))?.unwrap_or(1);
                    if gap < 1 || horizon / gap < 1 {
                        return Err(cfg_err(format!(
                            "sgd-dd gap must be >= 1 and leave at least one pair in horizon {horizon}"
                        )));
                    }
                    let radius =
                        parse_num::<f64>(&k("radius"), take(&k("radius")))?.unwrap_or(f64::INFINITY);
                    if radius.is_nan() || radius <= 0.0 {
                        return Err(cfg_err("sgd-dd radius must be positive".to_string()));
                    }
                    AlgoSpec::SgdDd { gap, gamma: gamma_of(&k("gamma"), take(&k("gamma")))?, radius }
                }
                "glm-proj" => {
                    return Err(cfg_err(
                        "glm-proj runs on Bernoulli data via the `fit` command, not the benchmark harness",
                    ))
                }
                other => return Err(cfg_err(format!("unknown algorithm `{other}`"))),
            };
            if spec.needs_expansive_link() && !link.is_expansive() {
                return Err(cfg_err(format!(
                    "{name} requires an expansive link, but the system uses {link}"
                )));
            }
            algorithms.push(spec);
        }
        if algorithms.is_empty() {
            return Err(cfg_err("`algos` must list at least one algorithm"));
        }

        // --- output ------------------------------------------------------
        let output_path = take("output").map(PathBuf::from);
        let record_stride =
            parse_num::<u64>("record_stride", take("record_stride"))?.unwrap_or(1);
        if record_stride < 1 {
            return Err(cfg_err("record_stride must be >= 1"));
        }

        // --- reject unknown keys ------------------------------------------
        for (key, _) in &raw.entries {
            if !used.contains(key) {
                return Err(cfg_err(format!("unknown key `{key}`")));
            }
        }

        Ok(Self { system, link, noise, horizon, algorithms, seeds, output_path, record_stride })
    }

    /// Build the full system spec (matrix, link, noise).
    pub fn system_spec(&self) -> Result<SystemSpec> {
        SystemSpec::new(self.system.matrix()?, self.link, self.noise)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: Option<&str>) -> Result<Option<T>> {
    match value {
        None => Ok(None),
        Some(s) => s
            .parse::<T>()
            .map(Some)
            .map_err(|_| cfg_err(format!("key `{key}`: cannot parse `{s}`"))),
    }
}

/// Seed listings accept a comma list (`0, 3, 7`) or a half-open range
/// (`0..20`); used by the `seeds` config key and the CLI.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let seeds: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| cfg_err(format!("bad seed range `{text}`")))?;
        let b: u64 = b.trim().parse().map_err(|_| cfg_err(format!("bad seed range `{text}`")))?;
        if a >= b {
            return Err(cfg_err(format!("empty seed range `{text}`")));
        }
        (a..b).collect()
    } else {
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<u64>().map_err(|_| cfg_err(format!("bad seed `{s}`"))))
            .collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        return Err(cfg_err("`seeds` must list at least one seed"));
    }
    Ok(seeds)
}

fn parse_link_noise<'a>(
    take: &mut dyn FnMut(&str) -> Option<&'a str>,
) -> Result<(LinkFunction, NoiseModel)> {
    let link = match take("system.link") {
        Some(s) => LinkFunction::parse(s)?,
        None => return Err(cfg_err("missing `system.link`")),
    };
    let sigma_sq = parse_num::<f64>("system.sigma_sq", take("system.sigma_sq"))?;
    let noise = match take("system.noise").unwrap_or("gaussian") {
        "gaussian" => NoiseModel::gaussian(sigma_sq.unwrap_or(1.0))?,
        "student_t" => {
            let dof = parse_num::<f64>("system.dof", take("system.dof"))?
                .ok_or_else(|| cfg_err("student_t noise needs `system.dof`"))?;
            NoiseModel::student_t(dof, sigma_sq.unwrap_or(1.0))?
        }
        "none" => {
            if sigma_sq.is_some() {
                return Err(cfg_err("`system.sigma_sq` is meaningless with noiseless dynamics"));
            }
            NoiseModel::none()
        }
        other => {
            return Err(cfg_err(format!(
                "unknown noise `{other}` (expected gaussian | student_t | none)"
            )))
        }
    };
    Ok((link, noise))
}
