//! Functional and expressive utility of a trajectory, and their scalarized
//! total `F + gamma * E`.
//!
//! `F` counts samples inside an epsilon ball around the goal state. `E` is
//! the weighted sum of four category terms: attention integrated over time,
//! plus trajectory-level intention, attitude and emotion scores.

use std::collections::BTreeMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{ChainSpec, JointVector, Pose};
use crate::trajectory::{kinematic_features_with, FeatureParams, FeatureSeries, Sample, Trajectory, WorldState};

pub const CATEGORIES: [&str; 4] = ["intention", "attention", "attitude", "emotion"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryWeights {
    #[serde(default)]
    pub intention: f64,
    #[serde(default)]
    pub attention: f64,
    #[serde(default)]
    pub attitude: f64,
    #[serde(default)]
    pub emotion: f64,
}

impl CategoryWeights {
    pub fn get(&self, category: &str) -> f64 {
        match category {
            "intention" => self.intention,
            "attention" => self.attention,
            "attitude" => self.attitude,
            "emotion" => self.emotion,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttitudeProfile {
    pub pause_fraction: f64,
    pub jerk_level: f64,
    pub speed_level: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmotionProfile {
    pub amplitude: f64,
    pub tempo: f64,
}

/// Scales that map raw features onto [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureNorms {
    /// Head jerk (m/s^3) that counts as fully jerky.
    pub jerk: f64,
    /// Mean moving head speed (m/s) that counts as fully fast.
    pub speed: f64,
    /// Path length beyond the chord (m) that counts as fully expansive.
    pub amplitude: f64,
    /// Joint direction reversals per second that count as fully bouncy.
    pub tempo: f64,
}

impl Default for FeatureNorms {
    fn default() -> Self {
        FeatureNorms {
            jerk: 20.0,
            speed: 0.5,
            amplitude: 0.5,
            tempo: 4.0,
        }
    }
}

/// Parameterization of the expressive utility.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpressionSpec {
    pub weights: CategoryWeights,
    /// Attention target; the user when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attention_target: Option<String>,
    /// Target the robot should glance at before it starts moving.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intention_target: Option<String>,
    /// Pre-motion window (s) over which the glance is scored.
    #[serde(default = "default_window")]
    pub intention_window: f64,
    #[serde(default)]
    pub attitude_profile: AttitudeProfile,
    #[serde(default)]
    pub emotion_profile: EmotionProfile,
    #[serde(default)]
    pub norms: FeatureNorms,
    #[serde(default)]
    pub features: FeatureParams,
}

fn default_window() -> f64 {
    0.5
}

impl Default for ExpressionSpec {
    fn default() -> Self {
        ExpressionSpec {
            weights: CategoryWeights::default(),
            attention_target: None,
            intention_target: None,
            intention_window: default_window(),
            attitude_profile: AttitudeProfile::default(),
            emotion_profile: EmotionProfile::default(),
            norms: FeatureNorms::default(),
            features: FeatureParams::default(),
        }
    }
}

impl ExpressionSpec {
    pub fn attention_only(target: &str) -> Self {
        ExpressionSpec {
            weights: CategoryWeights {
                attention: 1.0,
                ..Default::default()
            },
            attention_target: Some(target.to_string()),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for c in CATEGORIES {
            let w = self.weights.get(c);
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidInput(format!("weight `{c}` must be finite and non-negative")));
            }
        }
        let a = &self.attitude_profile;
        let e = &self.emotion_profile;
        for v in [a.pause_fraction, a.jerk_level, a.speed_level, e.amplitude, e.tempo] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput("profile entries must lie in [0, 1]".into()));
            }
        }
        let n = &self.norms;
        if [n.jerk, n.speed, n.amplitude, n.tempo].iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput("feature norms must be positive".into()));
        }
        if !(self.intention_window > 0.0) || !self.intention_window.is_finite() {
            return Err(Error::InvalidInput("intention_window must be positive".into()));
        }
        Ok(())
    }
}

/// Decomposed utility of one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityReport {
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "E")]
    pub e: f64,
    /// Weighted contribution of each category; these sum to `E`.
    pub per_category: BTreeMap<String, f64>,
    /// Unweighted category scores in [0, 1] (attention as a time average).
    pub category_scores: BTreeMap<String, f64>,
    pub gamma: f64,
    pub total: f64,
}

impl UtilityReport {
    pub fn new(f: f64, expressive: Expressive, gamma: f64) -> Self {
        let e = CATEGORIES.iter().map(|c| expressive.per_category[*c]).sum::<f64>();
        UtilityReport {
            f,
            e,
            per_category: expressive.per_category,
            category_scores: expressive.category_scores,
            gamma,
            total: f + gamma * e,
        }
    }
}

/// Expressive utility broken down by category.
#[derive(Clone, Debug, PartialEq)]
pub struct Expressive {
    pub e: f64,
    pub per_category: BTreeMap<String, f64>,
    pub category_scores: BTreeMap<String, f64>,
}

/// Distance between a sample and the goal: largest joint error, or
/// infinity when the tool state differs.
pub fn goal_distance(sample: &Sample, goal: &Sample) -> f64 {
    if sample.tool != goal.tool {
        f64::INFINITY
    } else {
        sample.q.max_abs_diff(&goal.q)
    }
}

/// Number of samples within `epsilon` of the goal state.
pub fn functional_utility(traj: &Trajectory, goal: Option<&Sample>, epsilon: f64) -> f64 {
    let Some(goal) = goal else { return 0.0 };
    traj.samples
        .iter()
        .filter(|s| goal_distance(s, goal) <= epsilon)
        .count() as f64
}

fn attention_of(pose: &Pose, target: &Vector3<f64>) -> f64 {
    let to = target - pose.position;
    let n = to.norm();
    if n < 1e-12 {
        return 1.0;
    }
    let c = (pose.facing.dot(&to) / n).clamp(-1.0, 1.0);
    0.5 * (1.0 + c)
}

/// `(1 + cos theta) / 2` for the angle between the head's facing and the
/// direction from the head to `target`.
pub fn attention_score(chain: &ChainSpec, q: &JointVector, target: &Vector3<f64>) -> f64 {
    attention_of(&crate::kinematics::forward_kinematics(chain, q), target)
}

/// Index of the first sample whose step from its predecessor moves the head
/// faster than the pause threshold, ignoring samples inside annotated
/// primitive spans.
fn motion_onset(traj: &Trajectory, features: &FeatureSeries, pause_speed: f64) -> Option<usize> {
    (1..traj.len()).find(|&i| features.speed[i] > pause_speed && !traj.annotations.iter().any(|a| a.contains(i)))
}

/// Mean attention toward `target` over the window preceding motion onset.
/// Zero when the trajectory moves at once or never moves.
pub fn intention_score(
    traj: &Trajectory,
    features: &FeatureSeries,
    target: &Vector3<f64>,
    window: f64,
    pause_speed: f64,
) -> f64 {
    let Some(onset) = motion_onset(traj, features, pause_speed) else {
        return 0.0;
    };
    let last = onset - 1;
    let n = ((window / traj.dt).round() as usize).max(1);
    let first = last.saturating_sub(n);
    if first == last {
        return 0.0;
    }
    let sum: f64 = features.poses[first..last].iter().map(|p| attention_of(p, target)).sum();
    sum / (last - first) as f64
}

/// Observed attitude features `(pause_fraction, jerk_level, speed_level)`.
pub fn attitude_features(features: &FeatureSeries, norms: &FeatureNorms, pause_speed: f64) -> [f64; 3] {
    let duration = features.duration();
    let pause = if duration > 0.0 {
        features.paused_time() / duration
    } else {
        1.0
    };
    let jerk = if features.jerk.len() > 3 {
        features.jerk[3..].iter().map(|j| j.abs()).sum::<f64>() / (features.jerk.len() - 3) as f64
    } else {
        0.0
    };
    let moving: Vec<f64> = features.speed.iter().copied().filter(|s| *s > pause_speed).collect();
    let speed = if moving.is_empty() {
        0.0
    } else {
        moving.iter().sum::<f64>() / moving.len() as f64
    };
    [
        pause.clamp(0.0, 1.0),
        (jerk / norms.jerk).clamp(0.0, 1.0),
        (speed / norms.speed).clamp(0.0, 1.0),
    ]
}

/// Observed emotion features `(amplitude, tempo)`.
pub fn emotion_features(features: &FeatureSeries, norms: &FeatureNorms) -> [f64; 2] {
    [
        ((features.path_length - features.chord) / norms.amplitude).clamp(0.0, 1.0),
        (features.reversal_rate / norms.tempo).clamp(0.0, 1.0),
    ]
}

fn closeness(observed: &[f64], target: &[f64]) -> f64 {
    let dev: f64 = observed.iter().zip(target).map(|(o, t)| (o - t).abs()).sum::<f64>() / observed.len() as f64;
    (1.0 - dev).clamp(0.0, 1.0)
}

/// Attitude and emotion scores: one minus the mean absolute deviation of the
/// observed normalized features from the expression spec's target profiles.
pub fn attitude_emotion_score(features: &FeatureSeries, spec: &ExpressionSpec) -> (f64, f64) {
    let a = attitude_features(features, &spec.norms, spec.features.pause_speed);
    let e = emotion_features(features, &spec.norms);
    let ap = &spec.attitude_profile;
    let ep = &spec.emotion_profile;
    (
        closeness(&a, &[ap.pause_fraction, ap.jerk_level, ap.speed_level]),
        closeness(&e, &[ep.amplitude, ep.tempo]),
    )
}

/// Expressive utility and its per-category breakdown.
pub fn expressive_utility(
    chain: &ChainSpec,
    traj: &Trajectory,
    world: &WorldState,
    spec: &ExpressionSpec,
) -> Result<Expressive> {
    spec.validate()?;
    let w = &spec.weights;
    let attention_target = world.resolve(spec.attention_target.as_deref().unwrap_or("user"))?;
    let intention_target = match &spec.intention_target {
        Some(name) => Some(world.resolve(name)?),
        None => None,
    };
    let mut scores = BTreeMap::new();
    let mut terms = BTreeMap::new();
    if CATEGORIES.iter().all(|c| w.get(c) == 0.0) {
        for c in CATEGORIES {
            scores.insert(c.to_string(), 0.0);
            terms.insert(c.to_string(), 0.0);
        }
        return Ok(Expressive {
            e: 0.0,
            per_category: terms,
            category_scores: scores,
        });
    }
    let features = kinematic_features_with(chain, traj, &spec.features)?;

    let att: Vec<f64> = features.poses.iter().map(|p| attention_of(p, &attention_target)).collect();
    let integral: f64 = att.windows(2).map(|p| 0.5 * (p[0] + p[1]) * traj.dt).sum();
    let mean_att = if att.len() > 1 {
        integral / traj.duration()
    } else {
        att[0]
    };
    let intention = intention_target
        .map(|t| intention_score(traj, &features, &t, spec.intention_window, spec.features.pause_speed))
        .unwrap_or(0.0);
    let (attitude, emotion) = attitude_emotion_score(&features, spec);

    for (c, score, raw) in [
        ("intention", intention, intention),
        ("attention", mean_att, integral),
        ("attitude", attitude, attitude),
        ("emotion", emotion, emotion),
    ] {
        scores.insert(c.to_string(), score);
        terms.insert(c.to_string(), w.get(c) * raw);
    }
    let e = CATEGORIES.iter().map(|c| terms[*c]).sum();
    Ok(Expressive {
        e,
        per_category: terms,
        category_scores: scores,
    })
}

/// `F + gamma * E` for `traj` against a resolved goal state (`None` when the
/// goal cannot be reached, so no sample scores).
pub fn total_utility(
    chain: &ChainSpec,
    traj: &Trajectory,
    goal: Option<&Sample>,
    epsilon: f64,
    gamma: f64,
    spec: &ExpressionSpec,
) -> Result<UtilityReport> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidInput(format!("gamma must be finite and non-negative, got {gamma}")));
    }
    let f = functional_utility(traj, goal, epsilon);
    let e = expressive_utility(chain, traj, &traj.world, spec)?;
    Ok(UtilityReport::new(f, e, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::forward_kinematics;
    use crate::trajectory::ToolState;

    fn still(q: JointVector, n: usize) -> Trajectory {
        let mut world = WorldState::default();
        let head = forward_kinematics(&ChainSpec::default(), &q);
        let p = head.position + head.facing;
        world.user_position = [p.x, p.y, p.z];
        Trajectory::stationary(
            0.02,
            Sample {
                q,
                tool: ToolState::default(),
            },
            n,
            world,
        )
        .unwrap()
    }

    #[test]
    fn attention_extremes() {
        let chain = ChainSpec::default();
        let q = JointVector::ZERO;
        let pose = forward_kinematics(&chain, &q);
        let ahead = pose.position + pose.facing;
        let behind = pose.position - pose.facing;
        let side = pose.position + Vector3::new(0.0, 1.0, 0.0);
        assert_eq!(attention_score(&chain, &q, &ahead), 1.0);
        assert_eq!(attention_score(&chain, &q, &behind), 0.0);
        assert!((attention_score(&chain, &q, &side) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn functional_counts_dwell() {
        let t = still(JointVector::ZERO, 3);
        let goal = t.terminal().clone();
        assert_eq!(functional_utility(&t, Some(&goal), 1e-3), 3.0);
        let mut off = goal.clone();
        off.tool.light_on = true;
        assert_eq!(functional_utility(&t, Some(&off), 1e-3), 0.0);
        assert_eq!(functional_utility(&t, None, 1e-3), 0.0);
    }

    #[test]
    fn stationary_attention_integrates_duration() {
        let chain = ChainSpec::default();
        let t = still(JointVector::ZERO, 51);
        let spec = ExpressionSpec::attention_only("user");
        let e = expressive_utility(&chain, &t, &t.world, &spec).unwrap();
        assert!((e.e - 1.0).abs() < 1e-12);
        let zero = ExpressionSpec::default();
        assert_eq!(expressive_utility(&chain, &t, &t.world, &zero).unwrap().e, 0.0);
    }

    #[test]
    fn gamma_zero_total_is_f() {
        let chain = ChainSpec::default();
        let t = still(JointVector::ZERO, 4);
        let goal = t.terminal().clone();
        let spec = ExpressionSpec::attention_only("user");
        let r = total_utility(&chain, &t, Some(&goal), 1e-3, 0.0, &spec).unwrap();
        assert_eq!(r.total, r.f);
        assert!(total_utility(&chain, &t, Some(&goal), 1e-3, -1.0, &spec).is_err());
    }

    #[test]
    fn spec_rejects_bad_weights() {
        let mut s = ExpressionSpec::default();
        s.weights.emotion = -1.0;
        assert!(s.validate().is_err());
        let mut s = ExpressionSpec::default();
        s.attitude_profile.jerk_level = 1.5;
        assert!(s.validate().is_err());
    }
}
