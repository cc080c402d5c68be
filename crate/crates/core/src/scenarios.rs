//! Task specifications and the six built-in scenarios.
//!
//! Each built-in is stored as the expressive (E) variant's task document;
//! the function-only (F) variant is the same task with the expression spec
//! and scripted plan removed.

use serde::{Deserialize, Serialize};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::io::check_version;
use crate::kinematics::{forward_kinematics, inverse_kinematics, ChainSpec, JointVector, PoseGoal};
use crate::planner::{plan_expressive, plan_scripted, PlanOutcome, PlannerConfig};
use crate::primitives::PrimitiveInstance;
use crate::trajectory::{ToolState, WorldState};
use crate::utility::ExpressionSpec;

pub const TASK_FORMAT: &str = "lamp-motion/task";
pub const TASK_VERSION: &str = "1.0";

pub const SCENARIOS: [&str; 6] = [
    "photograph_light",
    "project_assistance",
    "failure_indication",
    "remind_water",
    "social_conversation",
    "play_music",
];

const BUILTIN: [(&str, &str); 6] = [
    ("photograph_light", include_str!("../scenarios/photograph_light.json")),
    ("project_assistance", include_str!("../scenarios/project_assistance.json")),
    ("failure_indication", include_str!("../scenarios/failure_indication.json")),
    ("remind_water", include_str!("../scenarios/remind_water.json")),
    ("social_conversation", include_str!("../scenarios/social_conversation.json")),
    ("play_music", include_str!("../scenarios/play_music.json")),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    F,
    E,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F" | "f" => Ok(Variant::F),
            "E" | "e" => Ok(Variant::E),
            other => Err(Error::InvalidInput(format!("variant must be F or E, got `{other}`"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::F => "F",
            Variant::E => "E",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    FunctionOriented,
    SocialOriented,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agency {
    Proactive,
    Reactive,
}

/// What to do when the goal cannot be reached.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnreachablePolicy {
    /// Return the error.
    #[default]
    Fail,
    /// Move to the closest configuration found and report the failure.
    BestEffort,
}

/// Goal configuration, given in joint space or as a head pose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Goal {
    Joints {
        q: JointVector,
    },
    Pose {
        /// Head position (m).
        position: [f64; 3],
        /// World target the head should face at the goal.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        look_at: Option<String>,
    },
}

/// One scenario variant: goal state, horizon, world and expression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub format: String,
    pub version: String,
    pub id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub comment: String,
    pub variant: Variant,
    pub orientation: Orientation,
    pub agency: Agency,
    pub start: JointVector,
    #[serde(default)]
    pub start_tool: ToolState,
    pub goal: Goal,
    pub goal_tool: ToolState,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Longest acceptable trajectory (s).
    pub horizon: f64,
    pub world: WorldState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<ExpressionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scripted_plan: Option<Vec<PrimitiveInstance>>,
    #[serde(default)]
    pub on_unreachable: UnreachablePolicy,
}

fn default_epsilon() -> f64 {
    1e-3
}

impl TaskSpec {
    pub fn validate(&self) -> Result<()> {
        check_version(TASK_FORMAT, &self.format, &self.version)?;
        self.world.validate()?;
        self.start_tool.validate()?;
        self.goal_tool.validate()?;
        if !self.start.is_finite() {
            return Err(Error::InvalidInput("start configuration must be finite".into()));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidInput("epsilon must be positive".into()));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidInput("horizon must be positive".into()));
        }
        match (&self.goal, self.variant) {
            (Goal::Pose { position, look_at }, _) => {
                if !position.iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidInput("goal position must be finite".into()));
                }
                if let Some(name) = look_at {
                    self.world.resolve(name)?;
                }
            }
            (Goal::Joints { q }, _) if !q.is_finite() => {
                return Err(Error::InvalidInput("goal configuration must be finite".into()));
            }
            _ => {}
        }
        let expressive = self.expression.is_some() || self.scripted_plan.is_some();
        match self.variant {
            Variant::F if expressive => Err(Error::InvalidInput(format!(
                "{}: F variant must not carry an expression or scripted plan",
                self.id
            ))),
            Variant::E if !expressive => Err(Error::InvalidInput(format!(
                "{}: E variant needs an expression or scripted plan",
                self.id
            ))),
            _ => {
                if let Some(spec) = &self.expression {
                    spec.validate()?;
                    for name in spec.attention_target.iter().chain(spec.intention_target.iter()) {
                        self.world.resolve(name)?;
                    }
                }
                for p in self.scripted_plan.iter().flatten() {
                    p.validate(&self.world)?;
                }
                Ok(())
            }
        }
    }

    /// The same task with expression removed.
    pub fn function_variant(&self) -> TaskSpec {
        TaskSpec {
            variant: Variant::F,
            expression: None,
            scripted_plan: None,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<TaskSpec> {
        crate::io::probe_version(TASK_FORMAT, text)?;
        let task: TaskSpec = serde_json::from_str(text)?;
        task.validate()?;
        Ok(task)
    }
}

/// Resolves the goal to a joint configuration.
///
/// Pose goals are solved from the start configuration first and then from
/// the chain's canonical seeds. `Error::Unreachable` carries the closest
/// configuration found over all seeds.
pub fn resolve_goal(chain: &ChainSpec, task: &TaskSpec) -> Result<JointVector> {
    match &task.goal {
        Goal::Joints { q } => {
            if !chain.within_limits(q) {
                return Err(Error::InvalidInput(format!("{}: goal configuration outside joint limits", task.id)));
            }
            Ok(*q)
        }
        Goal::Pose { position, look_at } => {
            let p = Vector3::from(*position);
            let goal = match look_at {
                Some(name) => PoseGoal::with_facing(p, task.world.resolve(name)? - p),
                None => PoseGoal::position(p),
            };
            let start = crate::kinematics::clamp_to_limits(chain, &task.start);
            let mut best: Option<(f64, JointVector)> = None;
            for seed in std::iter::once(start).chain(chain.canonical_seeds()) {
                match inverse_kinematics(chain, &goal, &seed, chain.ik.tolerance) {
                    Ok(q) => return Ok(q),
                    Err(Error::Unreachable { residual, best_effort }) => {
                        if best.is_none_or(|(r, _)| residual < r) {
                            best = Some((residual, best_effort));
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
            let (residual, best_effort) = best.expect("at least one seed");
            Err(Error::Unreachable { residual, best_effort })
        }
    }
}

/// Spatial point of the goal, used for intention scoring defaults.
pub fn goal_point(chain: &ChainSpec, task: &TaskSpec) -> Vector3<f64> {
    match &task.goal {
        Goal::Joints { q } => forward_kinematics(chain, q).position,
        Goal::Pose { position, .. } => Vector3::from(*position),
    }
}

/// Loads a built-in scenario.
pub fn load_scenario(name: &str, variant: Variant) -> Result<TaskSpec> {
    let text = BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))?;
    let task = TaskSpec::from_json(text)?;
    Ok(match variant {
        Variant::E => task,
        Variant::F => task.function_variant(),
    })
}

/// Summary of a built-in scenario for listings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub id: String,
    pub orientation: Orientation,
    pub agency: Agency,
    pub comment: String,
}

pub fn scenario_infos() -> Vec<ScenarioInfo> {
    SCENARIOS
        .iter()
        .map(|name| {
            let t = load_scenario(name, Variant::E).expect("built-in scenarios are valid");
            ScenarioInfo {
                id: t.id,
                orientation: t.orientation,
                agency: t.agency,
                comment: t.comment,
            }
        })
        .collect()
}

/// How the E variant is produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// The authored plan from the task document.
    #[default]
    Scripted,
    /// Planner search over the primitive catalog.
    Searched,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scripted" => Ok(Mode::Scripted),
            "searched" => Ok(Mode::Searched),
            other => Err(Error::InvalidInput(format!("mode must be scripted or searched, got `{other}`"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Scripted => "scripted",
            Mode::Searched => "searched",
        })
    }
}

/// Outcome of a checked comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairChecks {
    pub terminal_equal: bool,
    pub functional_equal: bool,
    /// `E(tau_E) > E(tau_F)`; only required when gamma > 0.
    pub expressive_dominates: bool,
    pub limits_respected: bool,
}

impl PairChecks {
    pub fn all_hold(&self, gamma: f64) -> bool {
        self.terminal_equal && self.functional_equal && self.limits_respected && (gamma == 0.0 || self.expressive_dominates)
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioPair {
    pub name: String,
    pub function: PlanOutcome,
    pub expression: PlanOutcome,
    pub checks: PairChecks,
}

/// Plans both variants of a scenario with the same chain and config and
/// checks the pair invariants. Both variants are scored with the E task's
/// expression spec.
pub fn build_pair(chain: &ChainSpec, name: &str, config: &PlannerConfig, mode: Mode) -> Result<ScenarioPair> {
    let task_e = load_scenario(name, Variant::E)?;
    build_pair_for(chain, &task_e, config, mode)
}

pub fn build_pair_for(chain: &ChainSpec, task_e: &TaskSpec, config: &PlannerConfig, mode: Mode) -> Result<ScenarioPair> {
    let spec = task_e.expression.clone().unwrap_or_default();
    let task_f = task_e.function_variant();
    let function = plan_scripted(chain, &task_f, config, &spec, &[])?;
    let expression = match mode {
        Mode::Scripted => {
            let plan = task_e.scripted_plan.clone().unwrap_or_default();
            plan_scripted(chain, task_e, config, &spec, &plan)?
        }
        Mode::Searched => plan_expressive(chain, task_e, config, &spec)?,
    };
    let checks = PairChecks {
        terminal_equal: function.trajectory.terminal() == expression.trajectory.terminal(),
        functional_equal: function.report.f == expression.report.f,
        expressive_dominates: expression.report.e > function.report.e,
        limits_respected: function.trajectory.check(chain).is_ok() && expression.trajectory.check(chain).is_ok(),
    };
    Ok(ScenarioPair {
        name: task_e.id.clone(),
        function,
        expression,
        checks,
    })
}
