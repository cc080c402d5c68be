use std::cmp::Ordering;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Baseline, PlannerConfig};
use crate::error::{Error, Result};
use crate::kinematics::ChainSpec;
use crate::primitives::{compose, PrimitiveInstance};
use crate::scenarios::TaskSpec;
use crate::trajectory::{Sample, Trajectory};
use crate::utility::{expressive_utility, functional_utility, ExpressionSpec, Expressive};

pub(super) struct Context<'a> {
    chain: &'a ChainSpec,
    task: &'a TaskSpec,
    spec: &'a ExpressionSpec,
    base: &'a Trajectory,
    goal: Option<&'a Sample>,
    base_f: f64,
    targets: Vec<String>,
}

impl<'a> Context<'a> {
    pub(super) fn new(chain: &'a ChainSpec, task: &'a TaskSpec, spec: &'a ExpressionSpec, base: &'a Baseline) -> Self {
        let goal = base.goal.as_ref();
        Context {
            chain,
            task,
            spec,
            base: &base.trajectory,
            goal,
            base_f: functional_utility(&base.trajectory, goal, task.epsilon),
            targets: super::search_targets(spec),
        }
    }

    /// Scores one plan; `None` if it fails to apply or is inadmissible.
    fn evaluate(&self, plan: Vec<PrimitiveInstance>) -> Option<Candidate> {
        let trajectory = compose(self.chain, self.base, &plan, &self.task.world).ok()?;
        let f = functional_utility(&trajectory, self.goal, self.task.epsilon);
        if !plan.is_empty()
            && (f != self.base_f
                || trajectory.terminal() != self.base.terminal()
                || trajectory.duration() > self.task.horizon + 1e-9)
        {
            return None;
        }
        let expressive = expressive_utility(self.chain, &trajectory, &self.task.world, self.spec).ok()?;
        let labels = plan.iter().map(|p| p.label()).collect();
        Some(Candidate {
            duration: trajectory.duration(),
            plan,
            labels,
            trajectory,
            f,
            expressive,
        })
    }
}

/// One scored plan.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub plan: Vec<PrimitiveInstance>,
    pub labels: Vec<String>,
    pub trajectory: Trajectory,
    pub f: f64,
    pub expressive: Expressive,
    pub duration: f64,
}

impl Candidate {
    pub fn total(&self, gamma: f64) -> f64 {
        self.f + gamma * self.expressive.e
    }

    /// Higher total first, then shorter duration, then plan order.
    pub fn rank(&self, other: &Candidate, gamma: f64) -> Ordering {
        other
            .total(gamma)
            .total_cmp(&self.total(gamma))
            .then(self.duration.total_cmp(&other.duration))
            .then_with(|| self.labels.cmp(&other.labels))
    }
}

/// All admissible plans up to the configured length, scored once so that
/// selection at any gamma is a lookup.
#[derive(Clone, Debug)]
pub struct CandidateTable {
    candidates: Vec<Candidate>,
}

impl CandidateTable {
    pub(super) fn exhaustive(ctx: &Context<'_>, config: &PlannerConfig) -> Result<CandidateTable> {
        let atoms = config.atoms(&ctx.targets);
        let mut count = 0usize;
        let mut level = 1usize;
        for _ in 0..=config.max_plan_len {
            count = count.saturating_add(level);
            level = level.saturating_mul(atoms.len());
        }
        if count > config.max_candidates {
            return Err(Error::InvalidConfig(format!(
                "exhaustive search needs {count} candidates, above max_candidates {}",
                config.max_candidates
            )));
        }
        let mut plans: Vec<Vec<PrimitiveInstance>> = vec![Vec::new()];
        let mut frontier: Vec<Vec<PrimitiveInstance>> = vec![Vec::new()];
        for _ in 0..config.max_plan_len {
            frontier = frontier
                .iter()
                .flat_map(|p| {
                    atoms.iter().map(move |a| {
                        let mut p = p.clone();
                        p.push(a.clone());
                        p
                    })
                })
                .collect();
            plans.extend(frontier.iter().cloned());
        }
        let candidates: Vec<Candidate> = plans.into_par_iter().filter_map(|p| ctx.evaluate(p)).collect();
        Ok(CandidateTable { candidates })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn select(&self, gamma: f64) -> &Candidate {
        self.candidates
            .iter()
            .min_by(|a, b| a.rank(b, gamma))
            .expect("the baseline is always a candidate")
    }
}

pub(super) fn beam(ctx: &Context<'_>, config: &PlannerConfig) -> Result<(Candidate, usize)> {
    let gamma = config.gamma;
    let atoms = config.atoms(&ctx.targets);
    let baseline = ctx
        .evaluate(Vec::new())
        .ok_or_else(|| Error::InvariantViolation("baseline could not be scored".into()))?;
    let mut best = baseline.clone();
    let mut beam = vec![baseline];
    let mut evaluated = 1usize;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.max_plan_len {
        let budget = config.max_candidates.saturating_sub(evaluated);
        if budget == 0 || atoms.is_empty() {
            break;
        }
        let mut expansions: Vec<Vec<PrimitiveInstance>> = beam
            .iter()
            .flat_map(|c| {
                atoms.iter().map(move |a| {
                    let mut p = c.plan.clone();
                    p.push(a.clone());
                    p
                })
            })
            .collect();
        if expansions.len() > budget {
            let mut keep = sample(&mut rng, expansions.len(), budget).into_vec();
            keep.sort_unstable();
            expansions = keep.into_iter().map(|i| expansions[i].clone()).collect();
        }
        evaluated += expansions.len();
        let mut scored: Vec<Candidate> = expansions.into_par_iter().filter_map(|p| ctx.evaluate(p)).collect();
        if scored.is_empty() {
            break;
        }
        scored.sort_by(|a, b| a.rank(b, gamma));
        if scored[0].rank(&best, gamma) == Ordering::Less {
            best = scored[0].clone();
        }
        scored.truncate(config.beam_width);
        beam = scored;
    }
    Ok((best, evaluated))
}
