//! Argument parsing and dispatch.
//!
//! Exit status: 0 when the run passes or converges, 2 when a certificate
//! hypothesis fails or the iteration does not converge, 1 for usage and
//! configuration errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use monodr_core::demiclosedness::{
    classical_certificate, firm_principle_certificate, multi_firm_certificate, multi_nonexp_certificate,
    nonexp_principle_certificate, theorem22_certificate, CertificateReport, GraphSequence, Verdict,
};
use monodr_core::experiments::{
    feasibility_demo_run, remark14_run, svaiter_shadow_run, zarantonello_run, ExperimentResult, RunSettings,
};
use monodr_core::operators::GraphPoint;
use monodr_core::sampling::Sampler;
use monodr_core::splitting::{asymptotic_regularity_check, consensus_lift, dr_iterate, DrProblem, IterationTrace};
use monodr_core::{AffineSubspace, ConvexSet, MonotoneOperator, Vector};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{
    load_config, parse_hex_seed, CertificateKind, CommandKind, ConfigError, DemoKind, RunConfig, Seed,
};
use crate::output::{to_json, write_artifacts, Table};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] monodr_core::Error),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "monodr", version, about = "Douglas-Rachford runs and demiclosedness certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the JSON report and CSV traces
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Sequence length for the unit-vector demos
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// Probe coordinates, e.g. 0,1,2
    #[arg(long, global = true, value_delimiter = ',')]
    pub probes: Option<Vec<usize>>,
    /// Seed in hex, e.g. 0x5EED
    #[arg(long, global = true, value_parser = parse_hex_seed)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canned experiments
    Demo {
        #[arg(value_enum)]
        which: DemoKind,
    },
    /// Douglas-Rachford for two operators from --config
    Solve,
    /// Consensus lift for two or more operators from --config
    Consensus,
    /// Certificate over recorded sequences from --config
    Check,
}

impl Command {
    fn kind(&self) -> CommandKind {
        match self {
            Command::Demo { .. } => CommandKind::Demo,
            Command::Solve => CommandKind::Solve,
            Command::Consensus => CommandKind::Consensus,
            Command::Check => CommandKind::Check,
        }
    }
}

/// What a dispatched command produced.
#[derive(Debug)]
pub struct Outcome {
    pub name: String,
    pub passed: bool,
    pub report: Value,
    pub table: Option<Table>,
}

/// Parses `args`, runs the command, prints the JSON report to stdout and
/// returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            print!("{}", to_json(&outcome.report));
            if outcome.passed {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Resolves the config, dispatches, and writes artifacts.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = resolve_config(cli)?;
    let mut outcome = dispatch(&cfg)?;
    let status = if outcome.passed { "pass" } else { "fail" };
    if let Value::Object(map) = &mut outcome.report {
        map.insert("status".to_string(), json!(status));
    }
    if let Some(dir) = &cfg.out {
        let want_json = cli.format != Format::Csv;
        let want_csv = cli.format != Format::Json;
        let mut paths: Vec<String> = Vec::new();
        if want_json {
            paths.push(dir.join(format!("{}.json", outcome.name)).display().to_string());
        }
        let table = outcome.table.as_ref().filter(|_| want_csv);
        if table.is_some() {
            paths.push(dir.join(format!("{}_trace.csv", outcome.name)).display().to_string());
        }
        if let Value::Object(map) = &mut outcome.report {
            map.insert("artifacts".to_string(), json!(paths));
        }
        let json = to_json(&outcome.report);
        let written = write_artifacts(dir, &outcome.name, want_json.then_some(json.as_str()), table)?;
        info!("wrote {} file(s) under {}", written.len(), dir.display());
    }
    Ok(outcome)
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let kind = cli.command.kind();
    let mut cfg = match &cli.config {
        Some(path) => {
            let cfg = load_config(path)?;
            if cfg.command != kind {
                return Err(CliError::Usage(format!(
                    "config is for `{:?}` but the command is `{:?}`",
                    cfg.command, kind
                )));
            }
            cfg
        }
        None if kind == CommandKind::Demo => RunConfig::new(kind),
        None => return Err(CliError::Usage(format!("`{kind:?}` needs --config").to_lowercase())),
    };
    if let Command::Demo { which } = cli.command {
        cfg.demo = Some(which);
    }
    if let Some(v) = cli.n {
        cfg.n = Some(v);
    }
    if let Some(v) = cli.tol {
        cfg.tol = v;
    }
    if let Some(v) = cli.max_iter {
        cfg.max_iter = v;
    }
    if let Some(v) = &cli.probes {
        cfg.probes = Some(v.clone());
    }
    if let Some(v) = cli.seed {
        cfg.seed = Seed(v);
    }
    if let Some(v) = &cli.out {
        cfg.out = Some(v.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn dispatch(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        CommandKind::Demo => demo(cfg),
        CommandKind::Solve => solve(cfg),
        CommandKind::Consensus => consensus(cfg),
        CommandKind::Check => check(cfg),
    }
}

fn settings(cfg: &RunConfig) -> RunSettings {
    let mut s = RunSettings {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        ..RunSettings::default()
    };
    s.certificate.probes = cfg.probes.clone();
    s
}

fn operators(cfg: &RunConfig) -> Result<Vec<MonotoneOperator>, CliError> {
    cfg.operators
        .iter()
        .enumerate()
        .map(|(i, op)| {
            op.build().map_err(|e| e.under(&format!("operators[{i}]")).into())
        })
        .collect()
}

/// The configured `z0`, or a seeded draw in `[-1, 1]^d`.
fn initial_point(cfg: &RunConfig, ops: &[MonotoneOperator]) -> Result<Vector, CliError> {
    if let Some(z0) = &cfg.z0 {
        return Vector::new(z0.clone()).map_err(|e| {
            ConfigError::Schema {
                field: "z0".into(),
                reason: e.to_string(),
            }
            .into()
        });
    }
    let dim = ops.iter().find_map(MonotoneOperator::dim).ok_or_else(|| ConfigError::Schema {
        field: "z0".into(),
        reason: "required when no operator fixes the dimension".into(),
    })?;
    let z0 = Sampler::new(cfg.seed.0).vector(dim, 1.0);
    info!("drew z0 = {:?} from seed {:#x}", z0.coords(), cfg.seed.0);
    Ok(z0)
}

fn experiment_outcome(r: ExperimentResult, probes: &[usize]) -> Outcome {
    let table = match &r.trace {
        Some(trace) => Some(Table::from_trace(trace, probes)),
        None => {
            let cols: Vec<(&str, &[f64])> = r.sequences.iter().map(|(k, v)| (k.as_str(), v.as_slice())).collect();
            Some(Table::from_columns(&cols))
        }
    };
    Outcome {
        name: r.name.clone(),
        passed: r.passed,
        report: json!({ "command": "demo", "experiment": r }),
        table,
    }
}

fn trace_probes(cfg: &RunConfig, trace: Option<&IterationTrace>) -> Result<Vec<usize>, CliError> {
    let dim = trace.and_then(|t| t.records.first()).map_or(0, |r| r.shadow.dim());
    let probes = cfg.probes.clone().unwrap_or_else(|| (0..dim).collect());
    if let Some(&k) = probes.iter().find(|&&k| k >= dim && dim > 0) {
        return Err(monodr_core::Error::IndexOutOfRange { index: k, dim }.into());
    }
    Ok(probes)
}

fn demo(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let which = cfg.demo.ok_or_else(|| CliError::Usage("demo needs a name".into()))?;
    let n = cfg.n.unwrap_or(1000);
    let r = match which {
        DemoKind::Zarantonello => zarantonello_run(n, cfg.probes.clone())?,
        DemoKind::Counterexample => remark14_run(n, cfg.probes.clone())?,
        DemoKind::Svaiter => {
            let (a, b) = match cfg.operators.len() {
                0 => (
                    MonotoneOperator::normal_cone(ConvexSet::ball(Vector::zeros(2), 1.0)?)?,
                    MonotoneOperator::normal_cone(ConvexSet::affine(AffineSubspace::new(
                        Vector::from([0.5, 0.0]),
                        vec![Vector::from([0.0, 1.0])],
                    )?))?,
                ),
                2 => {
                    let ops = operators(cfg)?;
                    (ops[0].clone(), ops[1].clone())
                }
                _ => return Err(CliError::Usage("svaiter demo takes exactly two operators".into())),
            };
            let z0 = if cfg.operators.is_empty() && cfg.z0.is_none() {
                Vector::from([3.0, -2.0])
            } else {
                initial_point(cfg, &[a.clone(), b.clone()])?
            };
            svaiter_shadow_run(a, b, z0, &settings(cfg))?
        }
        DemoKind::Feasibility => {
            let (sets, z0) = if cfg.sets.is_empty() {
                let boxes = [(0.0, 2.0), (1.0, 3.0), (1.5, 2.5)]
                    .iter()
                    .map(|&(lo, hi)| ConvexSet::boxed(Vector::from([lo]), Vector::from([hi])))
                    .collect::<Result<Vec<_>, _>>()?;
                (boxes, cfg.z0.clone().map(Vector::from).unwrap_or_else(|| Vector::from([-4.0])))
            } else {
                let sets = cfg
                    .sets
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s.build().map_err(|e| CliError::from(e.under(&format!("sets[{i}]")))))
                    .collect::<Result<Vec<_>, _>>()?;
                let cones = sets
                    .iter()
                    .cloned()
                    .map(MonotoneOperator::normal_cone)
                    .collect::<Result<Vec<_>, _>>()?;
                let z0 = initial_point(cfg, &cones)?;
                (sets, z0)
            };
            feasibility_demo_run(sets, z0, &settings(cfg))?
        }
    };
    let probes = trace_probes(cfg, r.trace.as_ref())?;
    Ok(experiment_outcome(r, &probes))
}

fn problem(cfg: &RunConfig, a: MonotoneOperator, b: MonotoneOperator, z0: Vector) -> Result<DrProblem, CliError> {
    let mut p = DrProblem::new(a, b, z0)?.with_tol(cfg.tol).with_max_iter(cfg.max_iter);
    if let Some(probes) = &cfg.probes {
        p = p.with_probes(probes.clone());
    }
    Ok(p)
}

fn solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ops = operators(cfg)?;
    let z0 = initial_point(cfg, &ops)?;
    let p = problem(cfg, ops[0].clone(), ops[1].clone(), z0.clone())?;
    let (trace, report) = dr_iterate(&p)?;
    let regularity = asymptotic_regularity_check(&trace, cfg.tol).ok();
    if !report.converged {
        warn!("no convergence after {} iterations", report.iterations);
    }
    Ok(Outcome {
        name: "solve".into(),
        passed: report.converged,
        report: json!({
            "command": "solve",
            "z0": z0,
            "solution": report,
            "regularity": regularity,
        }),
        table: Some(Table::from_trace(&trace, &p.probes)),
    })
}

fn consensus(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ops = operators(cfg)?;
    let z0 = initial_point(cfg, &ops)?;
    let mut lifted = consensus_lift(ops, &z0)?;
    lifted.problem = lifted.problem.with_tol(cfg.tol).with_max_iter(cfg.max_iter);
    if let Some(probes) = &cfg.probes {
        lifted.problem = lifted.problem.with_probes(probes.clone());
    }
    let (trace, report, sol) = lifted.solve()?;
    Ok(Outcome {
        name: "consensus".into(),
        passed: report.converged,
        report: json!({
            "command": "consensus",
            "blocks": lifted.blocks,
            "block_dim": lifted.block_dim,
            "z0": z0,
            "solution": report,
            "consensus": sol,
        }),
        table: Some(Table::from_trace(&trace, &lifted.problem.probes)),
    })
}

fn check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.check.as_ref().ok_or_else(|| CliError::Usage("missing `check` section".into()))?;
    let tol = spec.tolerances(cfg.probes.clone());
    let seqs = spec.load_sequences()?;
    let maps = spec.maps()?;
    let need = |k: usize, what: &str| -> Result<(), CliError> {
        if seqs.len() < k {
            return Err(CliError::Usage(format!("{what} needs {k} sequence(s)")));
        }
        Ok(())
    };
    let first_map = || {
        maps.first()
            .cloned()
            .ok_or_else(|| CliError::Usage("certificate needs `maps[0]`".into()))
    };
    let result: Result<CertificateReport, monodr_core::Error> = match spec.certificate {
        CertificateKind::Theorem22 => {
            need(2, "theorem22")?;
            if seqs[0].len() != seqs[1].len() {
                return Err(CliError::Usage("x_n and u_n must have the same length".into()));
            }
            let pairs = seqs[0]
                .iter()
                .zip(&seqs[1])
                .map(|(x, u)| GraphPoint {
                    point: x.clone(),
                    value: u.clone(),
                })
                .collect();
            let g = GraphSequence::new(pairs, spec.operator()?)?;
            theorem22_certificate(&g, &spec.subspace("c")?, &spec.subspace("d")?, &tol)
        }
        CertificateKind::FirmPrinciple => {
            need(1, "firm_principle")?;
            firm_principle_certificate(&first_map()?, &seqs[0], &spec.subspace("c")?, &spec.subspace("d")?, &tol)
        }
        CertificateKind::NonexpPrinciple => {
            need(1, "nonexp_principle")?;
            nonexp_principle_certificate(&first_map()?, &seqs[0], &spec.subspace("c")?, &spec.subspace("d")?, &tol)
        }
        CertificateKind::Classical => {
            need(1, "classical")?;
            let x = spec
                .x
                .clone()
                .ok_or_else(|| CliError::Usage("classical needs `x`".into()))?;
            classical_certificate(&first_map()?, &seqs[0], &Vector::from(x), &tol)
        }
        CertificateKind::MultiFirm => multi_firm_certificate(&maps, &seqs, &tol),
        CertificateKind::MultiNonexp => multi_nonexp_certificate(&maps, &seqs, &tol),
    };
    let name = format!("{:?}", spec.certificate).to_lowercase();
    match result {
        Ok(rep) => {
            if rep.verdict == Verdict::ConclusionFailed {
                warn!("conclusion fails although every hypothesis holds");
            }
            let table = Table::from_columns(&[("inner_product", rep.inner_product_trace.as_slice())]);
            Ok(Outcome {
                name: format!("check_{name}"),
                passed: rep.passed(),
                report: json!({ "command": "check", "certificate": rep }),
                table: Some(table),
            })
        }
        Err(monodr_core::Error::PreconditionFailed { name: pre, value }) => Ok(Outcome {
            name: format!("check_{name}"),
            passed: false,
            report: json!({
                "command": "check",
                "certificate": { "verdict": { "status": "precondition_failed", "hypothesis": pre }, "tail": value },
            }),
            table: None,
        }),
        Err(e) => Err(e.into()),
    }
}
