//! Experiment runner: validates a configuration, dispatches the named
//! experiment over a worker pool, and emits a deterministic JSON or CSV
//! report (identical bytes for identical configs, modulo the wall-time
//! field).

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use subdiff_core::cvx_ulln::experiments::Atom;
use subdiff_core::{
    dyadic, eps_ulln_experiment, gap_experiment, gap_experiment_2d, split_seed, ulln_experiment,
    CoreError, PiecewiseLinearConvex, ScenarioDistribution, GENERATOR_ID,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    GapLip,
    GapCvx,
    Ulln1d,
    EpsUlln,
    GadgetStats,
    Shatter,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::GapLip => "gap-lip",
            Experiment::GapCvx => "gap-cvx",
            Experiment::Ulln1d => "ulln-1d",
            Experiment::EpsUlln => "eps-ulln",
            Experiment::GadgetStats => "gadget-stats",
            Experiment::Shatter => "shatter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Full experiment configuration (echoed into every report).
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_list: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Shatter dimension.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Atoms "center:prob,center:prob" for eps-ulln hinge scenarios.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<String>,
}

/// Failure classes with distinct process exit codes.
#[derive(Debug)]
pub enum RunError {
    /// Invalid configuration (exit code 2); all violations listed.
    Config(Vec<String>),
    /// A capacity bound was exceeded (exit code 3).
    Capacity(String),
    /// I/O failure writing the report (exit code 1).
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Capacity(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(v) => write!(f, "configuration errors: {}", v.join("; ")),
            RunError::Capacity(m) => write!(f, "capacity exceeded: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

fn lift(e: CoreError) -> RunError {
    match e {
        CoreError::Capacity(m) => RunError::Capacity(m),
        other => RunError::Config(vec![other.to_string()]),
    }
}

/// Validate a config; returns every violation, not just the first.
pub fn validate(config: &ExperimentConfig) -> Result<(), RunError> {
    let mut errors = Vec::new();
    let needs_nu = matches!(
        config.experiment,
        Experiment::GapLip | Experiment::GapCvx | Experiment::GadgetStats
    );
    let needs_nu_list = matches!(config.experiment, Experiment::Ulln1d | Experiment::EpsUlln);
    if needs_nu {
        match config.nu {
            None | Some(0) => errors.push("nu must be a positive integer".into()),
            Some(nu) if nu > dyadic::NU_CAP => {
                return Err(RunError::Capacity(format!(
                    "nu = {nu} exceeds the K_bound capacity cap {}",
                    dyadic::NU_CAP
                )));
            }
            _ => {}
        }
    }
    if needs_nu_list {
        match &config.nu_list {
            None => errors.push("nu-list is required".into()),
            Some(l) if l.is_empty() || l.contains(&0) => {
                errors.push("nu-list entries must be positive".into())
            }
            _ => {}
        }
    }
    if config.experiment != Experiment::Shatter {
        match config.trials {
            None | Some(0) => errors.push("trials must be a positive integer".into()),
            _ => {}
        }
    }
    if config.experiment == Experiment::EpsUlln {
        match config.epsilon {
            Some(e) if e > 0.0 => {}
            _ => errors.push(
                "epsilon must be positive; epsilon = 0 is the counterexample regime".into(),
            ),
        }
        if let Some(spec) = &config.atoms {
            if let Err(e) = parse_atoms(spec) {
                errors.push(e);
            }
        }
    }
    if config.experiment == Experiment::Shatter {
        match config.n {
            None | Some(0) => errors.push("n must be a positive integer".into()),
            Some(n) if n > dyadic::SHATTER_CAP => {
                return Err(RunError::Capacity(format!(
                    "n = {n} exceeds the shatter cap {}",
                    dyadic::SHATTER_CAP
                )));
            }
            _ => {}
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(RunError::Config(errors))
    }
}

fn parse_atoms(spec: &str) -> Result<Vec<Atom>, String> {
    let mut atoms = Vec::new();
    for part in spec.split(',') {
        let (c, p) = part
            .split_once(':')
            .ok_or_else(|| format!("atom '{part}' is not center:prob"))?;
        let center: f64 = c.trim().parse().map_err(|_| format!("bad atom center '{c}'"))?;
        let prob: f64 = p.trim().parse().map_err(|_| format!("bad atom probability '{p}'"))?;
        let f = PiecewiseLinearConvex::hinge(center)
            .map_err(|e| format!("bad atom function: {e}"))?;
        atoms.push(Atom { prob, f });
    }
    Ok(atoms)
}

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub trial: u64,
    pub trial_seed: u64,
    pub nu: u32,
    pub k_bound: u64,
    pub found: bool,
    pub k_event: Option<u64>,
    pub delta_nu: f64,
    pub gap_num: Option<u64>,
    pub gap_den: Option<u64>,
    pub gap: Option<f64>,
    pub bound_140_delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapSummary {
    pub trials: u64,
    pub success_rate: f64,
    pub min_gap: Option<f64>,
    pub median_gap: Option<f64>,
    /// Paper bound on the failure probability, `1/(nu+1)^2`.
    pub failure_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_140_delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub generator: String,
    pub rows: Vec<GapRow>,
    pub summary: GapSummary,
    pub wall_time_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct GadgetRow {
    pub trial: u64,
    pub trial_seed: u64,
    pub nu: u32,
    pub k_bound: u64,
    pub found: bool,
    pub k_event: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GadgetSummary {
    pub trials: u64,
    pub failure_fraction: f64,
    /// `1/(nu+1)^2`.
    pub failure_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GadgetReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub generator: String,
    pub rows: Vec<GadgetRow>,
    pub summary: GadgetSummary,
    pub wall_time_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReportRow {
    pub nu: u64,
    pub seed_index: u64,
    pub trial_seed: u64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceSummary {
    pub per_nu_median: Vec<NuMedian>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_error_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NuMedian {
    pub nu: u64,
    pub median_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub generator: String,
    pub rows: Vec<ConvergenceReportRow>,
    pub summary: ConvergenceSummary,
    pub wall_time_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShatterRow {
    /// 1-based pattern index; the pattern is the binary expansion of
    /// `pattern_index - 1` over n digits, most significant first.
    pub pattern_index: u64,
    pub pattern: String,
    /// The realized bits `bit_k(xi_1) ... bit_k(xi_n)` at `k = pattern_index`.
    pub realized: String,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShatterReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub generator: String,
    pub witnesses: Vec<String>,
    pub rows: Vec<ShatterRow>,
    pub all_patterns_realized: bool,
    pub wall_time_ms: u128,
}

/// Any report, for format-generic serialization.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Report {
    Gap(GapReport),
    Gadget(GadgetReport),
    Convergence(ConvergenceReport),
    Shatter(ShatterReport),
}

fn median_opt(values: &mut Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

pub fn run(config: &ExperimentConfig) -> Result<Report, RunError> {
    validate(config)?;
    match config.experiment {
        Experiment::GapLip | Experiment::GapCvx => run_gap(config).map(Report::Gap),
        Experiment::GadgetStats => run_gadget(config).map(Report::Gadget),
        Experiment::Ulln1d => run_ulln(config).map(Report::Convergence),
        Experiment::EpsUlln => run_eps_ulln(config).map(Report::Convergence),
        Experiment::Shatter => run_shatter(config).map(Report::Shatter),
    }
}

fn run_gap(config: &ExperimentConfig) -> Result<GapReport, RunError> {
    let start = Instant::now();
    let nu = config.nu.unwrap();
    let trials = config.trials.unwrap();
    let convex = config.experiment == Experiment::GapCvx;
    // Worker pool over trials; the collect is an ordered reduction by
    // trial index, so the report is deterministic.
    let rows: Vec<GapRow> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = split_seed(config.seed, trial);
            if convex {
                let o = gap_experiment_2d(nu, trial_seed).map_err(lift)?;
                Ok(GapRow {
                    trial,
                    trial_seed,
                    nu,
                    k_bound: o.k_bound,
                    found: o.k_event.is_some(),
                    k_event: o.k_event,
                    delta_nu: o.delta_nu,
                    gap_num: o.gap.map(|g| g.0),
                    gap_den: o.gap.map(|g| g.1),
                    gap: o.gap_f64(),
                    bound_140_delta: Some(o.perturbed_lower_bound),
                })
            } else {
                let o = gap_experiment(nu, trial_seed).map_err(lift)?;
                Ok(GapRow {
                    trial,
                    trial_seed,
                    nu,
                    k_bound: o.k_bound,
                    found: o.k_event.is_some(),
                    k_event: o.k_event,
                    delta_nu: o.delta_nu,
                    gap_num: o.gap.map(|g| g.0),
                    gap_den: o.gap.map(|g| g.1),
                    gap: o.gap_f64(),
                    bound_140_delta: None,
                })
            }
        })
        .collect::<Result<_, RunError>>()?;
    let found = rows.iter().filter(|r| r.found).count() as u64;
    let mut gaps: Vec<f64> = rows.iter().filter_map(|r| r.gap).collect();
    let min_gap = gaps.iter().cloned().reduce(f64::min);
    let summary = GapSummary {
        trials,
        success_rate: found as f64 / trials as f64,
        min_gap,
        median_gap: median_opt(&mut gaps),
        failure_bound: 1.0 / ((nu as f64 + 1.0) * (nu as f64 + 1.0)),
        bound_140_delta: rows.first().and_then(|r| r.bound_140_delta),
    };
    Ok(GapReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        generator: GENERATOR_ID.to_string(),
        rows,
        summary,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

fn run_gadget(config: &ExperimentConfig) -> Result<GadgetReport, RunError> {
    let start = Instant::now();
    let nu = config.nu.unwrap();
    let trials = config.trials.unwrap();
    let k_bound = dyadic::k_bound(nu).map_err(lift)?;
    let rows: Vec<GadgetRow> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = split_seed(config.seed, trial);
            let k_event = dyadic::joint_bit_trial(nu, trial_seed).map_err(lift)?;
            Ok(GadgetRow {
                trial,
                trial_seed,
                nu,
                k_bound,
                found: k_event.is_some(),
                k_event,
            })
        })
        .collect::<Result<_, RunError>>()?;
    let failures = rows.iter().filter(|r| !r.found).count() as u64;
    Ok(GadgetReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        generator: GENERATOR_ID.to_string(),
        rows,
        summary: GadgetSummary {
            trials,
            failure_fraction: failures as f64 / trials as f64,
            failure_bound: 1.0 / ((nu as f64 + 1.0) * (nu as f64 + 1.0)),
        },
        wall_time_ms: start.elapsed().as_millis(),
    })
}

fn convergence_report(
    config: &ExperimentConfig,
    out: subdiff_core::ConvergenceOutcome,
    start: Instant,
) -> ConvergenceReport {
    ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        generator: GENERATOR_ID.to_string(),
        rows: out
            .rows
            .iter()
            .map(|r| ConvergenceReportRow {
                nu: r.nu,
                seed_index: r.seed_index,
                trial_seed: r.trial_seed,
                gap: r.gap,
            })
            .collect(),
        summary: ConvergenceSummary {
            per_nu_median: out
                .medians
                .iter()
                .map(|&(nu, m)| NuMedian { nu, median_gap: m })
                .collect(),
            grid_error_bound: out.grid_error_bound,
        },
        wall_time_ms: start.elapsed().as_millis(),
    }
}

fn run_ulln(config: &ExperimentConfig) -> Result<ConvergenceReport, RunError> {
    let start = Instant::now();
    let dist = ScenarioDistribution::MedianExample;
    let out = ulln_experiment(
        &dist,
        config.nu_list.as_ref().unwrap(),
        config.trials.unwrap(),
        config.seed,
        dist.default_window(),
    )
    .map_err(lift)?;
    Ok(convergence_report(config, out, start))
}

fn run_eps_ulln(config: &ExperimentConfig) -> Result<ConvergenceReport, RunError> {
    let start = Instant::now();
    let atoms = match &config.atoms {
        Some(spec) => parse_atoms(spec).map_err(|e| RunError::Config(vec![e]))?,
        None => vec![
            Atom { prob: 0.5, f: PiecewiseLinearConvex::hinge(0.25).map_err(lift)? },
            Atom { prob: 0.5, f: PiecewiseLinearConvex::hinge(0.75).map_err(lift)? },
        ],
    };
    let dist = ScenarioDistribution::discrete(atoms).map_err(lift)?;
    let window = dist.default_window();
    let out = eps_ulln_experiment(
        &dist,
        config.epsilon.unwrap(),
        config.nu_list.as_ref().unwrap(),
        config.trials.unwrap(),
        config.seed,
        window,
        256,
    )
    .map_err(lift)?;
    Ok(convergence_report(config, out, start))
}

fn run_shatter(config: &ExperimentConfig) -> Result<ShatterReport, RunError> {
    let start = Instant::now();
    let n = config.n.unwrap();
    let witnesses = dyadic::shatter_witness(n).map_err(lift)?;
    let total = 1u64 << n;
    let mut rows = Vec::with_capacity(total as usize);
    let mut all = true;
    for k in 1..=total {
        let pattern: String = (0..n as u64)
            .map(|i| {
                let b = ((k - 1) >> (n as u64 - 1 - i)) & 1;
                if b == 1 { '1' } else { '0' }
            })
            .collect();
        let realized: String = witnesses
            .iter()
            .map(|w| if w.bit(k).unwrap_or(0) == 1 { '1' } else { '0' })
            .collect();
        let matches = pattern == realized;
        all &= matches;
        rows.push(ShatterRow { pattern_index: k, pattern, realized, matches });
    }
    Ok(ShatterReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        generator: GENERATOR_ID.to_string(),
        witnesses: witnesses.iter().map(|w| w.to_string()).collect(),
        rows,
        all_patterns_realized: all,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// One UTF-8 JSON document per run.
pub fn to_json(report: &Report) -> Result<String, RunError> {
    serde_json::to_string_pretty(report).map_err(|e| RunError::Io(e.to_string()))
}

/// CSV with a header row; encodes exactly the per-trial row data of the
/// JSON report.
pub fn to_csv(report: &Report) -> Result<String, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| RunError::Io(e.to_string());
    match report {
        Report::Gap(r) => {
            for row in &r.rows {
                w.serialize(row).map_err(ser)?;
            }
        }
        Report::Gadget(r) => {
            for row in &r.rows {
                w.serialize(row).map_err(ser)?;
            }
        }
        Report::Convergence(r) => {
            for row in &r.rows {
                w.serialize(row).map_err(ser)?;
            }
        }
        Report::Shatter(r) => {
            for row in &r.rows {
                w.serialize(row).map_err(ser)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| RunError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| RunError::Io(e.to_string()))
}

pub fn render(report: &Report, format: Format) -> Result<String, RunError> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report),
    }
}
