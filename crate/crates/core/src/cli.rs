//! Command-line surface: `plan`, `score`, `compare`, `sweep` and `serve`.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 invalid input or
//! config, 3 goal unreachable (best-effort files are still written by
//! `plan`), 4 an invariant check failed.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{
    digest, planner_from_json, resolve_chain, MetricsReport, TrajectoryDocument, TrajectoryHeader, METRICS_FORMAT,
    VERSION,
};
use crate::kinematics::ChainSpec;
use crate::planner::{functional_baseline, plan_expressive, plan_scripted, sweep, PlanOutcome, PlannerConfig};
use crate::primitives::{ParamValue, PrimitiveKind};
use crate::scenarios::{build_pair, load_scenario, Mode, Variant, SCENARIOS};
use crate::utility::{total_utility, UtilityReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNREACHABLE: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Unreachable { .. } => EXIT_UNREACHABLE,
        Error::InvariantViolation(_) => EXIT_INVARIANT,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

/// Stable machine-readable name of an error kind.
pub fn error_code(e: &Error) -> &'static str {
    match e.root() {
        Error::InvalidInput(_) => "invalid_input",
        Error::Unreachable { .. } => "unreachable",
        Error::TargetMissing(_) => "target_missing",
        Error::Infeasible(_) => "infeasible",
        Error::PlanStep { .. } => "plan_step",
        Error::UnknownScenario(_) => "unknown_scenario",
        Error::InvalidConfig(_) => "invalid_config",
        Error::InvariantViolation(_) => "invariant_violation",
        Error::UnsupportedVersion { .. } => "unsupported_version",
        Error::Json(_) => "malformed_document",
        Error::Io(_) => "io",
    }
}

/// One planning request, shared by `plan` and the serve endpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRequest {
    pub scenario: String,
    pub variant: Variant,
    pub gamma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    /// Parameter overrides per primitive kind. Scripted plans get the values
    /// merged into every instance of that kind; searched plans use them as
    /// single-value grids.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<PrimitiveKind, BTreeMap<String, ParamValue>>,
}

/// Serialized outputs of one plan.
#[derive(Clone, Debug)]
pub struct PlanArtifacts {
    pub trajectory_json: String,
    pub metrics: MetricsReport,
    pub outcome: PlanOutcome,
}

/// Plans a built-in scenario variant and serializes the result.
pub fn plan_artifacts(chain: &ChainSpec, planner: &PlannerConfig, req: &PlanRequest) -> Result<PlanArtifacts> {
    let clock = Instant::now();
    let config = PlannerConfig {
        gamma: req.gamma,
        seed: req.seed,
        ..planner.clone()
    };
    config.validate()?;
    let task_e = load_scenario(&req.scenario, Variant::E)?;
    let spec = task_e.expression.clone().unwrap_or_default();
    let outcome = match (req.variant, req.mode) {
        (Variant::F, _) => plan_scripted(chain, &task_e.function_variant(), &config, &spec, &[])?,
        (Variant::E, Mode::Scripted) => {
            let mut plan = task_e.scripted_plan.clone().unwrap_or_default();
            for p in &mut plan {
                if let Some(over) = req.overrides.get(&p.kind) {
                    p.params.extend(over.clone());
                }
            }
            plan_scripted(chain, &task_e, &config, &spec, &plan)?
        }
        (Variant::E, Mode::Searched) => {
            let mut config = config.clone();
            for (kind, over) in &req.overrides {
                let mut grid = config.grid(*kind);
                for (k, v) in over {
                    grid.params.insert(k.clone(), vec![v.clone()]);
                }
                config.grids.insert(*kind, grid);
            }
            config.validate()?;
            plan_expressive(chain, &task_e, &config, &spec)?
        }
    };
    let header = TrajectoryHeader {
        chain_id: chain.id.clone(),
        dt: outcome.trajectory.dt,
        scenario: req.scenario.clone(),
        variant: req.variant,
        mode: req.mode,
        gamma: req.gamma,
        seed: req.seed,
    };
    let trajectory_json = TrajectoryDocument::new(&outcome.trajectory, header).to_json()?;
    let metrics = MetricsReport {
        format: METRICS_FORMAT.into(),
        version: VERSION.into(),
        scenario: req.scenario.clone(),
        variant: req.variant,
        mode: req.mode,
        gamma: req.gamma,
        seed: req.seed,
        utility: outcome.report.clone(),
        plan: outcome.plan.iter().map(|p| p.label()).collect(),
        unreachable_residual: outcome.unreachable,
        candidates_evaluated: outcome.evaluated,
        duration_s: outcome.trajectory.duration(),
        trajectory_digest: digest(trajectory_json.as_bytes()),
        timing_ms: clock.elapsed().as_secs_f64() * 1e3,
    };
    Ok(PlanArtifacts {
        trajectory_json,
        metrics,
        outcome,
    })
}

#[derive(Debug, Parser)]
#[command(name = "lampctl", about = "Plan function- and expression-driven lamp robot motion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Chain config document (defaults to $LAMP_MOTION_CONFIG_DIR/chain_default.json, then built-in).
    #[arg(long)]
    pub chain: Option<PathBuf>,
    /// Planner config document.
    #[arg(long)]
    pub planner: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan one scenario variant and write trajectory and metrics documents.
    Plan {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value = "E")]
        variant: String,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, default_value = "scripted")]
        mode: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Score a trajectory document against a scenario's goal and expression spec.
    Score {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        gamma: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Plan both variants and check terminal equality, equal F and E dominance.
    Compare {
        /// Scenario name, or `all`.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, default_value = "scripted")]
        mode: String,
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive search at each gamma; checks that E never decreases.
    Sweep {
        #[arg(long)]
        scenario: String,
        /// Comma-separated gamma values.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        gammas: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Serve planning over HTTP on loopback.
    Serve {
        #[arg(long, default_value_t = 8787)]
        port: u16,
        /// Listen on all interfaces instead of loopback.
        #[arg(long)]
        open: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn load_planner(path: Option<&Path>, fallback: PlannerConfig) -> Result<PlannerConfig> {
    match path {
        Some(p) => planner_from_json(&std::fs::read_to_string(p)?),
        None => Ok(fallback),
    }
}

/// Parses arguments and runs a command, returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Plan {
            scenario,
            variant,
            gamma,
            mode,
            out: dir,
            common,
        } => {
            let chain = resolve_chain(common.chain.as_deref())?;
            let planner = load_planner(common.planner.as_deref(), PlannerConfig::default())?;
            let req = PlanRequest {
                scenario,
                variant: variant.parse()?,
                gamma,
                seed: common.seed,
                mode: mode.parse()?,
                overrides: BTreeMap::new(),
            };
            cmd_plan(&chain, &planner, &req, &dir, out, err)
        }
        Command::Score {
            trajectory,
            scenario,
            gamma,
            common,
        } => {
            let chain = resolve_chain(common.chain.as_deref())?;
            let planner = load_planner(common.planner.as_deref(), PlannerConfig::default())?;
            let report = cmd_score(&chain, &planner, &trajectory, &scenario, gamma)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            Ok(EXIT_OK)
        }
        Command::Compare {
            scenario,
            gamma,
            mode,
            common,
        } => {
            let chain = resolve_chain(common.chain.as_deref())?;
            let planner = load_planner(common.planner.as_deref(), PlannerConfig::default())?;
            let config = PlannerConfig {
                gamma,
                seed: common.seed,
                ..planner
            };
            cmd_compare(&chain, &config, &scenario, mode.parse()?, out)
        }
        Command::Sweep {
            scenario,
            gammas,
            common,
        } => {
            let chain = resolve_chain(common.chain.as_deref())?;
            let planner = load_planner(common.planner.as_deref(), PlannerConfig::exhaustive())?;
            let config = PlannerConfig {
                seed: common.seed,
                ..planner
            };
            cmd_sweep(&chain, &config, &scenario, &gammas, out)
        }
        Command::Serve { port, open, common } => {
            let chain = resolve_chain(common.chain.as_deref())?;
            let planner = load_planner(common.planner.as_deref(), PlannerConfig::default())?;
            let host = if open { [0, 0, 0, 0] } else { [127, 0, 0, 1] };
            let addr = std::net::SocketAddr::from((host, port));
            let _ = writeln!(err, "serving on http://{addr}");
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(crate::serve::serve(addr, crate::serve::ServeState::new(chain, planner)))?;
            Ok(EXIT_OK)
        }
    }
}

/// Writes `<scenario>_<variant>.trajectory.json` and `.metrics.json` into
/// `dir`. Unreachable goals still write the best-effort result.
pub fn cmd_plan(
    chain: &ChainSpec,
    planner: &PlannerConfig,
    req: &PlanRequest,
    dir: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let art = plan_artifacts(chain, planner, req)?;
    std::fs::create_dir_all(dir)?;
    let stem = format!("{}_{}", req.scenario, req.variant);
    let traj_path = dir.join(format!("{stem}.trajectory.json"));
    let metrics_path = dir.join(format!("{stem}.metrics.json"));
    std::fs::write(&traj_path, &art.trajectory_json)?;
    std::fs::write(&metrics_path, art.metrics.to_json()?)?;
    let u = &art.metrics.utility;
    writeln!(
        out,
        "{stem}: F={} E={:.6} total={:.6} digest={}",
        u.f, u.e, u.total, art.metrics.trajectory_digest
    )?;
    if let Some(residual) = art.outcome.unreachable {
        writeln!(err, "error: goal unreachable (residual {residual:.4} m); best-effort trajectory written")?;
        return Ok(EXIT_UNREACHABLE);
    }
    Ok(EXIT_OK)
}

/// Scores a saved trajectory. The goal comes from the scenario; the world
/// recorded in the document is used for targets.
pub fn cmd_score(chain: &ChainSpec, planner: &PlannerConfig, path: &Path, scenario: &str, gamma: f64) -> Result<UtilityReport> {
    let doc = TrajectoryDocument::from_json(&std::fs::read_to_string(path)?)?;
    let traj = doc.trajectory()?;
    let task = load_scenario(scenario, Variant::E)?;
    let spec = task.expression.clone().unwrap_or_default();
    let base = functional_baseline(chain, &task, planner)?;
    total_utility(chain, &traj, base.goal.as_ref(), task.epsilon, gamma, &spec)
}

#[derive(Debug, Serialize)]
struct VariantSummary {
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "E")]
    e: f64,
    total: f64,
    duration_s: f64,
    plan: Vec<String>,
    digest: String,
}

impl VariantSummary {
    fn new(chain: &ChainSpec, o: &PlanOutcome, name: &str, variant: Variant, mode: Mode, config: &PlannerConfig) -> Result<Self> {
        let header = TrajectoryHeader {
            chain_id: chain.id.clone(),
            dt: o.trajectory.dt,
            scenario: name.to_string(),
            variant,
            mode,
            gamma: config.gamma,
            seed: config.seed,
        };
        let json = TrajectoryDocument::new(&o.trajectory, header).to_json()?;
        Ok(VariantSummary {
            f: o.report.f,
            e: o.report.e,
            total: o.report.total,
            duration_s: o.trajectory.duration(),
            plan: o.plan.iter().map(|p| p.label()).collect(),
            digest: digest(json.as_bytes()),
        })
    }
}

/// Prints one JSON comparison line per scenario; exit 4 if any check fails.
pub fn cmd_compare(chain: &ChainSpec, config: &PlannerConfig, scenario: &str, mode: Mode, out: &mut dyn Write) -> Result<i32> {
    config.validate()?;
    let names: Vec<&str> = if scenario == "all" {
        SCENARIOS.to_vec()
    } else {
        vec![scenario]
    };
    let mut code = EXIT_OK;
    for name in names {
        let pair = build_pair(chain, name, config, mode)?;
        let ok = pair.checks.all_hold(config.gamma);
        if !ok {
            code = EXIT_INVARIANT;
        }
        let line = serde_json::json!({
            "scenario": name,
            "gamma": config.gamma,
            "mode": mode,
            "F": VariantSummary::new(chain, &pair.function, name, Variant::F, mode, config)?,
            "E": VariantSummary::new(chain, &pair.expression, name, Variant::E, mode, config)?,
            "checks": pair.checks,
            "ok": ok,
        });
        writeln!(out, "{line}")?;
    }
    Ok(code)
}

/// Prints a `gamma F E total` table; exit 4 if E decreases along the sweep.
pub fn cmd_sweep(chain: &ChainSpec, config: &PlannerConfig, scenario: &str, gammas: &[f64], out: &mut dyn Write) -> Result<i32> {
    if gammas.is_empty() {
        return Err(Error::InvalidInput("gamma list is empty".into()));
    }
    let task = load_scenario(scenario, Variant::E)?;
    let spec = task.expression.clone().unwrap_or_default();
    let rows = sweep(chain, &task, config, &spec, gammas)?;
    writeln!(out, "gamma\tF\tE\ttotal\tplan")?;
    for (g, o) in &rows {
        let labels: Vec<String> = o.plan.iter().map(|p| p.label()).collect();
        writeln!(
            out,
            "{g}\t{}\t{:.6}\t{:.6}\t{}",
            o.report.f,
            o.report.e,
            o.report.total,
            labels.join(" + ")
        )?;
    }
    let mut by_gamma: Vec<(f64, f64)> = rows.iter().map(|(g, o)| (*g, o.report.e)).collect();
    by_gamma.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = by_gamma.windows(2).all(|w| w[1].1 >= w[0].1);
    let code = if monotone { EXIT_OK } else { EXIT_INVARIANT };
    Ok(code)
}
