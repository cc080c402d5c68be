//! Function-driven baselines, expression-driven search over primitive
//! plans, and an exact grid MDP oracle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{clamp_to_limits, ChainSpec, JointVector};
use crate::primitives::{compose, Anchor, ParamValue, PrimitiveInstance, PrimitiveKind};
use crate::scenarios::{resolve_goal, TaskSpec, UnreachablePolicy};
use crate::trajectory::{interpolate, Sample, Trajectory, DEFAULT_DT};
use crate::utility::{expressive_utility, functional_utility, ExpressionSpec, UtilityReport};

pub mod grid;
mod search;

pub use grid::{brute_force, path_utility, plan_on_grid, value_iteration, GridAction, GridMDP};
pub use search::{Candidate, CandidateTable};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Beam search over plans up to `max_plan_len`.
    #[default]
    Beam,
    /// Every plan up to `max_plan_len`; fails if there are more than
    /// `max_candidates`.
    Exhaustive,
}

/// Anchors and parameter values to try for one primitive kind.
///
/// Target parameters left out of `params` are filled with the user and the
/// spec's attention and intention targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub anchors: Vec<Anchor>,
    #[serde(default)]
    pub params: BTreeMap<String, Vec<ParamValue>>,
}

impl ParamGrid {
    pub fn at(anchors: &[Anchor]) -> Self {
        ParamGrid {
            anchors: anchors.to_vec(),
            params: BTreeMap::new(),
        }
    }

    pub fn values(mut self, key: &str, values: &[f64]) -> Self {
        self.params
            .insert(key.to_string(), values.iter().map(|v| ParamValue::Number(*v)).collect());
        self
    }

    pub fn default_for(kind: PrimitiveKind) -> Self {
        use PrimitiveKind::*;
        match kind {
            SpeedScale => ParamGrid::at(&[Anchor::Pre]).values("factor", &[0.6]),
            PauseInsert => ParamGrid::at(&[Anchor::Pre, Anchor::Post]).values("duration", &[0.5]),
            OrientToward => ParamGrid::at(&[Anchor::Pre, Anchor::Post]),
            _ => ParamGrid::at(&[Anchor::Post]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    pub gamma: f64,
    pub catalog: Vec<PrimitiveKind>,
    /// Per-kind grids; kinds in the catalog without an entry use defaults.
    #[serde(default)]
    pub grids: BTreeMap<PrimitiveKind, ParamGrid>,
    #[serde(default)]
    pub search: SearchMode,
    pub beam_width: usize,
    pub max_plan_len: usize,
    pub seed: u64,
    pub max_candidates: usize,
    pub dt: f64,
    /// Fraction of the joint speed caps used by the baseline move.
    pub speed_scale: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            gamma: 1.0,
            catalog: PrimitiveKind::ALL.to_vec(),
            grids: BTreeMap::new(),
            search: SearchMode::Beam,
            beam_width: 4,
            max_plan_len: 4,
            seed: 0,
            max_candidates: 20_000,
            dt: DEFAULT_DT,
            speed_scale: 0.6,
        }
    }
}

impl PlannerConfig {
    /// Exhaustive search over plans of at most two primitives.
    pub fn exhaustive() -> Self {
        PlannerConfig {
            search: SearchMode::Exhaustive,
            max_plan_len: 2,
            ..Default::default()
        }
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        PlannerConfig {
            gamma,
            ..self.clone()
        }
    }

    pub fn grid(&self, kind: PrimitiveKind) -> ParamGrid {
        self.grids
            .get(&kind)
            .cloned()
            .unwrap_or_else(|| ParamGrid::default_for(kind))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidInput(format!("gamma must be finite and non-negative, got {}", self.gamma)));
        }
        if self.beam_width == 0 {
            return bad("beam_width must be at least 1".into());
        }
        if self.max_candidates == 0 {
            return bad("max_candidates must be at least 1".into());
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt must be positive".into());
        }
        if !(self.speed_scale > 0.0 && self.speed_scale <= 1.0) {
            return bad("speed_scale must lie in (0, 1]".into());
        }
        for kind in &self.catalog {
            let grid = self.grid(*kind);
            if grid.anchors.is_empty() {
                return bad(format!("{kind}: grid has no anchors"));
            }
            for (key, values) in &grid.params {
                if values.is_empty() {
                    return bad(format!("{kind}: grid for `{key}` is empty"));
                }
                if !kind.allowed_params().contains(&key.as_str()) {
                    return bad(format!("{kind}: unknown parameter `{key}`"));
                }
            }
            // A faster-than-baseline warp would beat the baseline on duration
            // ties at gamma = 0.
            if *kind == PrimitiveKind::SpeedScale {
                if let Some(values) = grid.params.get("factor") {
                    if values.iter().any(|v| !matches!(v, ParamValue::Number(f) if *f > 0.0 && *f <= 1.0)) {
                        return bad("SpeedScale factors in a search grid must lie in (0, 1]".into());
                    }
                }
            }
        }
        Ok(())
    }

    /// Every single-primitive instance the grids describe, in catalog order.
    pub fn atoms(&self, targets: &[String]) -> Vec<PrimitiveInstance> {
        let mut out = Vec::new();
        for kind in &self.catalog {
            let grid = self.grid(*kind);
            let mut axes: Vec<(String, Vec<ParamValue>)> = grid.params.clone().into_iter().collect();
            let text = |names: &[String]| names.iter().map(|n| ParamValue::Text(n.clone())).collect::<Vec<_>>();
            for key in ["target", "to"] {
                if kind.allowed_params().contains(&key) && !grid.params.contains_key(key) {
                    axes.push((key.to_string(), text(targets)));
                }
            }
            axes.sort_by(|a, b| a.0.cmp(&b.0));
            for anchor in &grid.anchors {
                let mut combos = vec![PrimitiveInstance::new(*kind, *anchor)];
                for (key, values) in &axes {
                    combos = combos
                        .into_iter()
                        .flat_map(|p| {
                            values.iter().map(move |v| {
                                let mut p = p.clone();
                                p.params.insert(key.clone(), v.clone());
                                p
                            })
                        })
                        .collect();
                }
                combos.retain(|p| match (p.params.get("target"), p.params.get("to")) {
                    (Some(a), Some(b)) => a != b,
                    _ => true,
                });
                out.extend(combos);
            }
        }
        out
    }
}

/// A planned trajectory with its score.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanOutcome {
    pub trajectory: Trajectory,
    pub report: UtilityReport,
    pub plan: Vec<PrimitiveInstance>,
    /// Goal state used for `F`; `None` when the goal is unreachable.
    pub goal: Option<Sample>,
    /// IK residual (m) when the goal could not be reached.
    pub unreachable: Option<f64>,
    /// Candidate plans scored during search (1 for the baseline alone).
    pub evaluated: usize,
}

/// Functional baseline plus the goal state it was planned toward.
#[derive(Clone, Debug, PartialEq)]
pub struct Baseline {
    pub trajectory: Trajectory,
    pub goal: Option<Sample>,
    pub unreachable: Option<(f64, JointVector)>,
}

fn straight_move(chain: &ChainSpec, task: &TaskSpec, config: &PlannerConfig, q_goal: &JointVector) -> Result<Trajectory> {
    if !chain.within_limits(&task.start) {
        return Err(Error::InvalidInput(format!("{}: start configuration outside joint limits", task.id)));
    }
    let mut traj = interpolate(chain, &task.start, q_goal, config.dt, config.speed_scale)?;
    for s in &mut traj.samples {
        s.tool = task.start_tool.clone();
    }
    if task.goal_tool != task.start_tool {
        traj.samples.push(Sample {
            q: *q_goal,
            tool: task.goal_tool.clone(),
        });
    }
    traj.world = task.world.clone();
    Ok(traj)
}

/// Shortest feasible move from the start to the goal with the goal's tool
/// events appended.
pub fn plan_functional(chain: &ChainSpec, task: &TaskSpec, config: &PlannerConfig) -> Result<Trajectory> {
    task.validate()?;
    config.validate()?;
    let q_goal = resolve_goal(chain, task)?;
    straight_move(chain, task, config, &q_goal)
}

/// Like [`plan_functional`], but honours the task's unreachable policy by
/// moving to the best-effort configuration instead of failing.
pub fn functional_baseline(chain: &ChainSpec, task: &TaskSpec, config: &PlannerConfig) -> Result<Baseline> {
    task.validate()?;
    config.validate()?;
    match resolve_goal(chain, task) {
        Ok(q) => Ok(Baseline {
            trajectory: straight_move(chain, task, config, &q)?,
            goal: Some(Sample {
                q,
                tool: task.goal_tool.clone(),
            }),
            unreachable: None,
        }),
        Err(Error::Unreachable { residual, best_effort })
            if task.on_unreachable == UnreachablePolicy::BestEffort =>
        {
            let q = clamp_to_limits(chain, &best_effort);
            Ok(Baseline {
                trajectory: straight_move(chain, task, config, &q)?,
                goal: None,
                unreachable: Some((residual, q)),
            })
        }
        Err(e) => Err(e),
    }
}

pub(crate) fn score(
    chain: &ChainSpec,
    traj: &Trajectory,
    task: &TaskSpec,
    goal: Option<&Sample>,
    gamma: f64,
    spec: &ExpressionSpec,
) -> Result<UtilityReport> {
    let f = functional_utility(traj, goal, task.epsilon);
    let e = expressive_utility(chain, traj, &task.world, spec)?;
    Ok(UtilityReport::new(f, e, gamma))
}

/// Applies a fixed plan to the functional baseline and scores the result.
/// An empty plan yields the baseline itself.
pub fn plan_scripted(
    chain: &ChainSpec,
    task: &TaskSpec,
    config: &PlannerConfig,
    spec: &ExpressionSpec,
    plan: &[PrimitiveInstance],
) -> Result<PlanOutcome> {
    let base = functional_baseline(chain, task, config)?;
    let trajectory = compose(chain, &base.trajectory, plan, &task.world)?;
    let report = score(chain, &trajectory, task, base.goal.as_ref(), config.gamma, spec)?;
    Ok(PlanOutcome {
        trajectory,
        report,
        plan: plan.to_vec(),
        goal: base.goal,
        unreachable: base.unreachable.map(|u| u.0),
        evaluated: 1,
    })
}

/// Targets offered to target-taking primitives during search.
pub fn search_targets(spec: &ExpressionSpec) -> Vec<String> {
    let mut names = vec!["user".to_string()];
    for name in spec.attention_target.iter().chain(spec.intention_target.iter()) {
        if !names.contains(name) {
            names.push(name.clone());
        }
    }
    names
}

/// Searches primitive plans layered on the functional baseline for the
/// highest `F + gamma * E`. The baseline is always a candidate, so the result
/// never scores below it; candidates that change `F` or exceed the task
/// horizon are discarded.
pub fn plan_expressive(
    chain: &ChainSpec,
    task: &TaskSpec,
    config: &PlannerConfig,
    spec: &ExpressionSpec,
) -> Result<PlanOutcome> {
    spec.validate()?;
    let base = functional_baseline(chain, task, config)?;
    let ctx = search::Context::new(chain, task, spec, &base);
    let (best, evaluated) = match config.search {
        SearchMode::Exhaustive => {
            let table = CandidateTable::exhaustive(&ctx, config)?;
            let evaluated = table.len();
            (table.select(config.gamma).clone(), evaluated)
        }
        SearchMode::Beam => search::beam(&ctx, config)?,
    };
    let report = UtilityReport::new(best.f, best.expressive.clone(), config.gamma);
    Ok(PlanOutcome {
        trajectory: best.trajectory,
        report,
        plan: best.plan,
        goal: base.goal,
        unreachable: base.unreachable.map(|u| u.0),
        evaluated,
    })
}

/// Exhaustive search once, then the selected plan's report at each gamma.
pub fn sweep(
    chain: &ChainSpec,
    task: &TaskSpec,
    config: &PlannerConfig,
    spec: &ExpressionSpec,
    gammas: &[f64],
) -> Result<Vec<(f64, PlanOutcome)>> {
    if gammas.is_empty() {
        return Err(Error::InvalidInput("gamma list is empty".into()));
    }
    for g in gammas {
        config.with_gamma(*g).validate()?;
    }
    spec.validate()?;
    let base = functional_baseline(chain, task, config)?;
    let ctx = search::Context::new(chain, task, spec, &base);
    let table = CandidateTable::exhaustive(&ctx, config)?;
    Ok(gammas
        .iter()
        .map(|&g| {
            let best = table.select(g);
            (
                g,
                PlanOutcome {
                    trajectory: best.trajectory.clone(),
                    report: UtilityReport::new(best.f, best.expressive.clone(), g),
                    plan: best.plan.clone(),
                    goal: base.goal.clone(),
                    unreachable: base.unreachable.map(|u| u.0),
                    evaluated: table.len(),
                },
            )
        })
        .collect())
}
