//! Command-line front end: JSON-configured experiments over the engine and
//! the Monte Carlo oracle, with the figure presets shipped as named config
//! files so that experiment grids live in exactly one place.
//!
//! Every output embeds the config hash, the seed, and the library version
//! in its metadata, making reruns comparable byte for byte.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drawdown::DrawdownSpec;
use crate::gs::{self, QuadratureConfig};
use crate::inversion::{self, InversionConfig};
use crate::mc::{self, SimConfig};
use crate::model::LevyModel;
use crate::scale::ScaleSet;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    CramerLundberg { c: f64, lambda0: f64, mu_claim: f64 },
    Brownian { mu: f64, sigma: f64 },
    JumpDiffusion { c: f64, sigma: f64, lambda0: f64, alpha: f64 },
}

impl ModelConfig {
    pub fn build(&self) -> Result<LevyModel> {
        match *self {
            ModelConfig::CramerLundberg { c, lambda0, mu_claim } => {
                LevyModel::cramer_lundberg(c, lambda0, mu_claim)
            }
            ModelConfig::Brownian { mu, sigma } => LevyModel::brownian(mu, sigma),
            ModelConfig::JumpDiffusion { c, sigma, lambda0, alpha } => {
                LevyModel::jump_diffusion(c, sigma, lambda0, alpha)
            }
        }
    }
}

/// Inclusive numeric grid, by step or by point count.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.stop >= self.start) {
            return Err(Error::InvalidParameter(format!(
                "grid stop {} below start {}",
                self.stop, self.start
            )));
        }
        match (self.step, self.count) {
            (Some(step), None) => {
                if !(step > 0.0) {
                    return Err(Error::InvalidParameter("grid step must be > 0".into()));
                }
                let mut v = Vec::new();
                let n = ((self.stop - self.start) / step + 1e-9).floor() as usize;
                for k in 0..=n {
                    v.push(self.start + step * k as f64);
                }
                Ok(v)
            }
            (None, Some(count)) => {
                if count < 2 {
                    return Err(Error::InvalidParameter("grid count must be >= 2".into()));
                }
                let h = (self.stop - self.start) / (count - 1) as f64;
                Ok((0..count).map(|k| self.start + h * k as f64).collect())
            }
            _ => Err(Error::InvalidParameter(
                "grid needs exactly one of step or count".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Initial surplus.
    X,
    /// Premium rate (compound Poisson and jump diffusion).
    C,
    /// Drift (Brownian motion).
    Mu,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedCase {
    pub name: String,
    pub drawdown: DrawdownSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbExperiment {
    pub x: f64,
    pub sweep: SweepSpec,
    pub cases: Vec<NamedCase>,
    #[serde(default)]
    pub q: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDensityExperiment {
    pub x: f64,
    pub t1: GridSpec,
    pub t2: GridSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitExperiment {
    pub x: f64,
    #[serde(default)]
    pub q: f64,
    pub s: GridSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxExperiment {
    pub x: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default)]
    pub lambda: f64,
    pub s: GridSpec,
    /// Pre-ruin and deficit levels at which the continuous density is
    /// sampled.
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DividendExperiment {
    pub x: f64,
    pub b: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default)]
    pub lambda: f64,
    pub s: GridSpec,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateExperiment {
    pub x: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default)]
    pub lambda: f64,
    /// Dump one row per path instead of the summary row.
    #[serde(default)]
    pub dump_records: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentConfig {
    Prob(ProbExperiment),
    JointDensity(JointDensityExperiment),
    Exit(ExitExperiment),
    Tax(TaxExperiment),
    Dividend(DividendExperiment),
    Simulate(SimulateExperiment),
}

impl ExperimentConfig {
    fn command_name(&self) -> &'static str {
        match self {
            ExperimentConfig::Prob(_) => "prob",
            ExperimentConfig::JointDensity(_) => "joint-density",
            ExperimentConfig::Exit(_) => "exit",
            ExperimentConfig::Tax(_) => "tax",
            ExperimentConfig::Dividend(_) => "dividend",
            ExperimentConfig::Simulate(_) => "simulate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output file; stdout when absent.
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    /// Drawdown boundary for commands that take a single one; the `prob`
    /// command carries its cases inside the experiment instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drawdown: Option<DrawdownSpec>,
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub inversion: InversionConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config parse error: {e}")))?;
        cfg.model.build()?;
        if let Some(dd) = &cfg.drawdown {
            dd.clone().validate()?;
        }
        cfg.quadrature.validate()?;
        cfg.inversion.validate()?;
        cfg.sim.validate()?;
        Ok(cfg)
    }

    fn drawdown_or_ruin(&self) -> Result<DrawdownSpec> {
        Ok(self.drawdown.clone().unwrap_or_else(DrawdownSpec::ruin))
    }
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

pub const PRESETS: &[(&str, &str)] = &[
    ("fig1a", include_str!("../presets/fig1a.json")),
    ("fig1b", include_str!("../presets/fig1b.json")),
    ("fig2a", include_str!("../presets/fig2a.json")),
    ("fig2b", include_str!("../presets/fig2b.json")),
    ("fig3a", include_str!("../presets/fig3a.json")),
    ("fig3b", include_str!("../presets/fig3b.json")),
    ("fig4a", include_str!("../presets/fig4a.json")),
    ("fig4b", include_str!("../presets/fig4b.json")),
    ("fig5a", include_str!("../presets/fig5a.json")),
    ("fig5b", include_str!("../presets/fig5b.json")),
    ("fig5c", include_str!("../presets/fig5c.json")),
    ("fig5d", include_str!("../presets/fig5d.json")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn load_preset(name: &str) -> Result<RunConfig> {
    let Some((_, text)) = PRESETS.iter().find(|(n, _)| *n == name) else {
        return Err(Error::InvalidParameter(format!(
            "unknown preset '{name}'; available: {}",
            preset_names().join(", ")
        )));
    };
    RunConfig::from_json(text)
}

// ---------------------------------------------------------------------------
// Tabular output
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TableOutput {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub fn render_csv(out: &TableOutput) -> String {
    let mut s = String::new();
    for (k, v) in &out.meta {
        let _ = writeln!(s, "# {k}={v}");
    }
    let _ = writeln!(s, "{}", out.columns.join(","));
    for row in &out.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

pub fn render_json(out: &TableOutput) -> String {
    let meta: serde_json::Map<String, serde_json::Value> = out
        .meta
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
        .collect();
    let value = serde_json::json!({
        "meta": meta,
        "columns": out.columns,
        "rows": out.rows,
    });
    serde_json::to_string_pretty(&value).expect("static structure serializes")
}

// ---------------------------------------------------------------------------
// Command execution
// ---------------------------------------------------------------------------

fn apply_sweep(model: &LevyModel, variable: SweepVariable, value: f64) -> Result<LevyModel> {
    match (variable, *model) {
        (SweepVariable::X, m) => Ok(m),
        (SweepVariable::C, LevyModel::CramerLundbergExp { lambda0, mu_claim, .. }) => {
            LevyModel::cramer_lundberg(value, lambda0, mu_claim)
        }
        (SweepVariable::C, LevyModel::JumpDiffusionErlang2 { sigma, lambda0, alpha, .. }) => {
            LevyModel::jump_diffusion(value, sigma, lambda0, alpha)
        }
        (SweepVariable::Mu, LevyModel::BrownianDrift { sigma, .. }) => {
            LevyModel::brownian(value, sigma)
        }
        (v, m) => Err(Error::InvalidParameter(format!(
            "sweep variable {v:?} does not apply to {m:?}"
        ))),
    }
}

fn cmd_prob(cfg: &RunConfig, exp: &ProbExperiment, with_mc: bool) -> Result<TableOutput> {
    let base = cfg.model.build()?;
    if exp.cases.is_empty() {
        return Err(Error::InvalidParameter("prob experiment needs at least one case".into()));
    }
    let grid = GridSpec {
        start: exp.sweep.start,
        stop: exp.sweep.stop,
        step: Some(exp.sweep.step),
        count: None,
    }
    .values()?;

    let mut columns = vec![match exp.sweep.variable {
        SweepVariable::X => "x".to_string(),
        SweepVariable::C => "c".to_string(),
        SweepVariable::Mu => "mu".to_string(),
    }];
    for case in &exp.cases {
        columns.push(case.name.clone());
    }
    if with_mc {
        for case in &exp.cases {
            columns.push(format!("mc_{}", case.name));
            columns.push(format!("mc_stderr_{}", case.name));
        }
    }

    // Sweep points are independent; the collected order is the grid order,
    // so parallel execution leaves the output bytes unchanged.
    let rows = grid
        .par_iter()
        .map(|&v| {
            let model = apply_sweep(&base, exp.sweep.variable, v)?;
            let x = if exp.sweep.variable == SweepVariable::X { v } else { exp.x };
            let mut row = vec![v];
            for case in &exp.cases {
                let p = if exp.q == 0.0 {
                    gs::drawdown_probability(&model, &case.drawdown, x, &cfg.quadrature)?
                } else {
                    gs::joint_laplace(&model, &case.drawdown, exp.q, exp.q, x, &cfg.quadrature)?
                };
                row.push(p);
            }
            if with_mc {
                for case in &exp.cases {
                    let est = mc::estimate(&model, &case.drawdown, x, &cfg.sim, |r| {
                        if exp.q == 0.0 {
                            r.hit as u8 as f64
                        } else if r.hit {
                            (-exp.q * r.tau).exp()
                        } else {
                            0.0
                        }
                    })?;
                    row.push(est.mean);
                    row.push(est.stderr);
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TableOutput { meta: Vec::new(), columns, rows })
}

fn cmd_joint_density(cfg: &RunConfig, exp: &JointDensityExperiment) -> Result<TableOutput> {
    let model = cfg.model.build()?;
    let dd = cfg.drawdown_or_ruin()?;
    let t1 = exp.t1.values()?;
    let t2 = exp.t2.values()?;
    let grid = inversion::joint_density_grid(
        &model,
        &dd,
        exp.x,
        &t1,
        &t2,
        &cfg.inversion,
        &cfg.quadrature,
    )?;
    let mut rows = Vec::with_capacity(t1.len() * t2.len());
    for (i, &a) in t1.iter().enumerate() {
        for (j, &b) in t2.iter().enumerate() {
            rows.push(vec![a, b, grid.values[i][j]]);
        }
    }
    Ok(TableOutput {
        meta: vec![("noise_floor".into(), format!("{}", grid.noise_floor))],
        columns: vec!["t1".into(), "t2".into(), "density".into()],
        rows,
    })
}

fn cmd_exit(cfg: &RunConfig, exp: &ExitExperiment) -> Result<TableOutput> {
    let model = cfg.model.build()?;
    let dd = cfg.drawdown_or_ruin()?;
    let is_ruin = dd == DrawdownSpec::ruin();
    let wq = ScaleSet::new(model, exp.q)?;
    let mut columns = vec!["s".into(), "exit_prob".into()];
    if is_ruin {
        columns.push("scale_ratio".into());
    }
    let mut rows = Vec::new();
    for s in exp.s.values()? {
        if s <= exp.x {
            continue;
        }
        let p = gs::exit_prob_drawdown(&model, &dd, exp.q, exp.x, s)?;
        let mut row = vec![s, p];
        if is_ruin {
            row.push(wq.w(exp.x) / wq.w(s));
        }
        rows.push(row);
    }
    Ok(TableOutput { meta: Vec::new(), columns, rows })
}

fn cmd_tax(cfg: &RunConfig, exp: &TaxExperiment) -> Result<TableOutput> {
    let model = cfg.model.build()?;
    let Some(dd) = cfg.drawdown.clone() else {
        return Err(Error::InvalidParameter("tax command needs a tax drawdown block".into()));
    };
    let mut rows = Vec::new();
    for s in exp.s.values()? {
        if s < exp.x {
            continue;
        }
        let cont = gs::gs_tax_density(&model, &dd, exp.q, exp.lambda, exp.x, s, exp.y, exp.z)?;
        let atom = gs::gs_tax_atom(&model, &dd, exp.q, exp.lambda, exp.x, s, exp.z)?;
        let creep = gs::gs_tax_creeping(&model, &dd, exp.q, exp.lambda, exp.x, s)?;
        rows.push(vec![s, cont, atom, creep]);
    }
    let integrated = gs::tax_ruin_functional_integrated(
        &model,
        &dd,
        exp.q,
        exp.lambda,
        exp.x,
        &cfg.quadrature,
    )?;
    Ok(TableOutput {
        meta: vec![("integrated_functional".into(), format!("{integrated}"))],
        columns: vec!["s".into(), "continuous".into(), "atom".into(), "creeping".into()],
        rows,
    })
}

fn cmd_dividend(cfg: &RunConfig, exp: &DividendExperiment) -> Result<TableOutput> {
    let model = cfg.model.build()?;
    let mut rows = Vec::new();
    for s in exp.s.values()? {
        if !(s >= exp.x && s < exp.b) {
            continue;
        }
        let cont =
            gs::gs_dividend_continuous_below(&model, exp.b, exp.q, exp.lambda, exp.x, s, exp.y, exp.z)?;
        let atom = gs::gs_dividend_atom_below(&model, exp.b, exp.q, exp.lambda, exp.x, s, exp.z)?;
        let creep = gs::gs_dividend_creeping_below(&model, exp.b, exp.q, exp.lambda, exp.x, s)?;
        rows.push(vec![s, cont, atom, creep]);
    }
    let at_barrier_cont = gs::gs_dividend_continuous_at_barrier(
        &model, exp.b, exp.q, exp.lambda, exp.x, exp.y, exp.z,
    )?;
    let at_barrier_atom =
        gs::gs_dividend_atom_at_barrier(&model, exp.b, exp.q, exp.lambda, exp.x, exp.z)?;
    let creep_mass =
        gs::gs_dividend_creeping_barrier_mass(&model, exp.b, exp.q, exp.lambda, exp.x)?;
    let integrated = gs::dividend_ruin_functional_integrated(
        &model,
        exp.b,
        exp.q,
        exp.lambda,
        exp.x,
        &cfg.quadrature,
    )?;
    Ok(TableOutput {
        meta: vec![
            ("at_barrier_continuous".into(), format!("{at_barrier_cont}")),
            ("at_barrier_atom".into(), format!("{at_barrier_atom}")),
            ("creeping_barrier_mass".into(), format!("{creep_mass}")),
            ("integrated_functional".into(), format!("{integrated}")),
        ],
        columns: vec!["s".into(), "continuous".into(), "atom".into(), "creeping".into()],
        rows,
    })
}

fn cmd_simulate(cfg: &RunConfig, exp: &SimulateExperiment) -> Result<TableOutput> {
    let model = cfg.model.build()?;
    let dd = cfg.drawdown_or_ruin()?;
    let records = mc::simulate_drawdown(&model, &dd, exp.x, &cfg.sim)?;
    let hit = mc::estimate_records(&records, |r| r.hit as u8 as f64);
    let discounted = mc::estimate_records(&records, |r| {
        if r.hit {
            (-exp.q * r.ell - exp.lambda * (r.tau - r.ell)).exp()
        } else {
            0.0
        }
    });
    let meta = vec![
        ("n_paths".into(), format!("{}", records.len())),
        ("hit_rate".into(), format!("{}", hit.mean)),
        ("hit_rate_stderr".into(), format!("{}", hit.stderr)),
        ("discounted_mean".into(), format!("{}", discounted.mean)),
        ("discounted_stderr".into(), format!("{}", discounted.stderr)),
    ];
    if exp.dump_records {
        let rows = records
            .iter()
            .map(|r| {
                vec![
                    r.hit as u8 as f64,
                    r.tau,
                    r.ell,
                    r.y_before,
                    r.w_at,
                    r.s_max,
                    r.constraint_ok as u8 as f64,
                    r.creeping as u8 as f64,
                ]
            })
            .collect();
        Ok(TableOutput {
            meta,
            columns: vec![
                "hit".into(),
                "tau".into(),
                "ell".into(),
                "y_before".into(),
                "w_at".into(),
                "s_max".into(),
                "constraint_ok".into(),
                "creeping".into(),
            ],
            rows,
        })
    } else {
        Ok(TableOutput {
            meta,
            columns: vec![
                "n_paths".into(),
                "hit_rate".into(),
                "hit_rate_stderr".into(),
                "discounted_mean".into(),
                "discounted_stderr".into(),
            ],
            rows: vec![vec![
                records.len() as f64,
                hit.mean,
                hit.stderr,
                discounted.mean,
                discounted.stderr,
            ]],
        })
    }
}

/// Runs the experiment in `config`, returning the output table with the
/// reproducibility metadata attached.
pub fn execute(config: &RunConfig, with_mc: bool) -> Result<TableOutput> {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let hash = fnv1a64(canonical.as_bytes());
    let mut out = match &config.experiment {
        ExperimentConfig::Prob(exp) => cmd_prob(config, exp, with_mc)?,
        ExperimentConfig::JointDensity(exp) => cmd_joint_density(config, exp)?,
        ExperimentConfig::Exit(exp) => cmd_exit(config, exp)?,
        ExperimentConfig::Tax(exp) => cmd_tax(config, exp)?,
        ExperimentConfig::Dividend(exp) => cmd_dividend(config, exp)?,
        ExperimentConfig::Simulate(exp) => cmd_simulate(config, exp)?,
    };
    let mut meta = vec![
        ("command".to_string(), config.experiment.command_name().to_string()),
        ("config_hash".to_string(), format!("{hash:016x}")),
        ("seed".to_string(), format!("{}", config.sim.seed)),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
    ];
    meta.append(&mut out.meta);
    out.meta = meta;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Argument parsing and the binary entry point
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "drawdown-gs",
    version,
    about = "Drawdown functionals of spectrally negative Levy risk processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drawdown probabilities over a parameter sweep, per boundary case.
    Prob(CommonArgs),
    /// Joint density of (drawdown time, last-maximum time) on a grid.
    JointDensity(CommonArgs),
    /// Survival factor for reaching an upper level before drawdown.
    Exit(CommonArgs),
    /// Ruin triple-law densities of the taxed process.
    Tax(CommonArgs),
    /// Ruin triple-law densities of the barrier-reflected process.
    Dividend(CommonArgs),
    /// Monte Carlo simulation of drawdown outcomes.
    Simulate(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config file.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Named built-in preset (fig1a .. fig5d).
    #[arg(long)]
    pub preset: Option<String>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Add Monte Carlo estimate columns where supported.
    #[arg(long)]
    pub with_mc: bool,
    /// Simulation seed override.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Prob(_) => "prob",
            Command::JointDensity(_) => "joint-density",
            Command::Exit(_) => "exit",
            Command::Tax(_) => "tax",
            Command::Dividend(_) => "dividend",
            Command::Simulate(_) => "simulate",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Prob(a)
            | Command::JointDensity(a)
            | Command::Exit(a)
            | Command::Tax(a)
            | Command::Dividend(a)
            | Command::Simulate(a) => a,
        }
    }
}

fn load_config(args: &CommonArgs) -> Result<RunConfig> {
    match (&args.config, &args.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidParameter(format!("cannot read {}: {e}", path.display()))
            })?;
            RunConfig::from_json(&text)
        }
        (None, Some(name)) => load_preset(name),
        _ => Err(Error::InvalidParameter(
            "provide exactly one of --config or --preset".into(),
        )),
    }
}

/// Executes one parsed invocation and returns the rendered output plus the
/// destination path, without touching the process environment.
pub fn run_command(command: &Command) -> Result<(String, Option<PathBuf>)> {
    let args = command.args();
    let mut config = load_config(args)?;
    if config.experiment.command_name() != command.name() {
        return Err(Error::InvalidParameter(format!(
            "config describes a '{}' experiment but the '{}' command was invoked",
            config.experiment.command_name(),
            command.name()
        )));
    }
    if let Some(seed) = args.seed {
        config.sim.seed = seed;
    }
    if let Some(format) = args.format {
        config.output.format = format;
    }
    if let Some(out) = &args.out {
        config.output.path = Some(out.clone());
    }
    if let Some(threads) = args.threads {
        // The global pool can only be installed once per process; later
        // invocations in the same process keep the first setting.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let table = execute(&config, args.with_mc)?;
    let rendered = match config.output.format {
        OutputFormat::Csv => render_csv(&table),
        OutputFormat::Json => render_json(&table),
    };
    Ok((rendered, config.output.path))
}

/// Binary entry point.
pub fn run() {
    let cli = Cli::parse();
    match run_command(&cli.command) {
        Ok((rendered, path)) => match path {
            Some(path) => {
                if let Err(e) = std::fs::write(&path, rendered) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    std::process::exit(1);
                }
            }
            None => print!("{rendered}"),
        },
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
