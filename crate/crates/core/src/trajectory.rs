//! Time-sampled trajectories of joint and tool states, plus the kinematic
//! features (head speed, acceleration, jerk, pauses) that the expressive
//! scorer reads.

use std::collections::BTreeMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{forward_kinematics, vec3, ChainSpec, JointVector, Pose, DOF};

/// Default sample interval (50 Hz).
pub const DEFAULT_DT: f64 = 0.02;

/// Non-kinematic actuators of the lamp head.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolState {
    pub light_on: bool,
    pub light_intensity: f64,
    pub projector_on: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projected_content: Option<String>,
}

impl ToolState {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.light_intensity) {
            return Err(Error::InvalidInput(format!(
                "light_intensity {} outside [0, 1]",
                self.light_intensity
            )));
        }
        if self.projected_content.is_some() && !self.projector_on {
            return Err(Error::InvalidInput("projected_content requires projector_on".into()));
        }
        Ok(())
    }
}

/// Perceived surroundings: the user, named objects and optional music beats.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldState {
    pub user_position: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_attention_point: Option<[f64; 3]>,
    #[serde(default)]
    pub objects: BTreeMap<String, [f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beat_times: Option<Vec<f64>>,
}

impl WorldState {
    /// Looks up a named point: `user`, `user_attention`, or an object name.
    pub fn resolve(&self, name: &str) -> Result<Vector3<f64>> {
        match name {
            "user" => Ok(vec3(&self.user_position)),
            "user_attention" => self
                .user_attention_point
                .map(|p| vec3(&p))
                .ok_or_else(|| Error::TargetMissing(name.to_string())),
            _ => self
                .objects
                .get(name)
                .map(vec3)
                .ok_or_else(|| Error::TargetMissing(name.to_string())),
        }
    }

    pub fn has(&self, name: &str) -> bool {
        self.resolve(name).is_ok()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |p: &[f64; 3]| p.iter().all(|v| v.is_finite());
        if !finite(&self.user_position)
            || !self.user_attention_point.as_ref().is_none_or(finite)
            || !self.objects.values().all(finite)
        {
            return Err(Error::InvalidInput("world positions must be finite".into()));
        }
        if let Some(beats) = &self.beat_times {
            if beats.iter().any(|b| !b.is_finite()) || beats.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput("beat_times must be finite and strictly ascending".into()));
            }
        }
        Ok(())
    }
}

/// Joint and tool state at one sample time.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Sample {
    pub q: JointVector,
    pub tool: ToolState,
}

/// Full MDP state: robot joints, tool and the world context.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub q: JointVector,
    pub tool: ToolState,
    pub world: WorldState,
}

impl State {
    /// Deterministic kinematic transition.
    pub fn apply(&self, action: &Action) -> State {
        State {
            q: self.q + action.dq,
            tool: action.tool_event.clone().unwrap_or_else(|| self.tool.clone()),
            world: self.world.clone(),
        }
    }
}

/// Change in joint angles plus an optional tool event.
#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub dq: JointVector,
    pub tool_event: Option<ToolState>,
}

impl Action {
    pub fn between(from: &Sample, to: &Sample) -> Action {
        Action {
            dq: to.q - from.q,
            tool_event: (from.tool != to.tool).then(|| to.tool.clone()),
        }
    }
}

/// Provenance of one applied primitive: the sample range it shaped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    /// First sample index of the span.
    pub start: usize,
    /// Last sample index of the span (inclusive).
    pub end: usize,
    pub primitive: String,
}

impl Annotation {
    pub fn contains(&self, i: usize) -> bool {
        i >= self.start && i <= self.end
    }
}

/// Uniformly sampled sequence of states.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
    pub annotations: Vec<Annotation>,
    pub world: WorldState,
}

impl Trajectory {
    pub fn new(dt: f64, samples: Vec<Sample>, world: WorldState) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        if samples.is_empty() {
            return Err(Error::InvalidInput("trajectory needs at least one sample".into()));
        }
        Ok(Trajectory {
            dt,
            samples,
            annotations: Vec::new(),
            world,
        })
    }

    /// A trajectory that stays at one state.
    pub fn stationary(dt: f64, sample: Sample, n: usize, world: WorldState) -> Result<Self> {
        Trajectory::new(dt, vec![sample; n.max(1)], world)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn duration(&self) -> f64 {
        self.time(self.samples.len() - 1)
    }

    pub fn terminal(&self) -> &Sample {
        self.samples.last().expect("trajectory is never empty")
    }

    pub fn state(&self, i: usize) -> State {
        let s = &self.samples[i];
        State {
            q: s.q,
            tool: s.tool.clone(),
            world: self.world.clone(),
        }
    }

    pub fn actions(&self) -> impl Iterator<Item = Action> + '_ {
        self.samples.windows(2).map(|w| Action::between(&w[0], &w[1]))
    }

    /// Sample index whose time is closest to `t`, clamped to the trajectory.
    pub fn index_at(&self, t: f64) -> usize {
        let i = (t / self.dt).round();
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.samples.len() - 1)
        }
    }

    /// Same dt and samples (annotations and world ignored).
    pub fn same_motion(&self, other: &Trajectory) -> bool {
        self.dt == other.dt && self.samples == other.samples
    }

    /// Checks sample count, limits, tool invariants and per-joint speed caps.
    pub fn check(&self, chain: &ChainSpec) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::InvariantViolation("empty trajectory".into()));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if !s.q.is_finite() || !chain.within_limits(&s.q) {
                return Err(Error::InvariantViolation(format!("sample {i} outside joint limits")));
            }
            s.tool.validate()?;
        }
        if let Some((i, j)) = self.first_speed_violation(chain) {
            return Err(Error::InvariantViolation(format!(
                "joint {j} exceeds its speed cap between samples {i} and {}",
                i + 1
            )));
        }
        for a in &self.annotations {
            if a.start > a.end || a.end >= self.samples.len() {
                return Err(Error::InvariantViolation(format!("annotation `{}` out of range", a.primitive)));
            }
        }
        Ok(())
    }

    fn first_speed_violation(&self, chain: &ChainSpec) -> Option<(usize, usize)> {
        let caps = chain.max_speeds();
        for (i, w) in self.samples.windows(2).enumerate() {
            for j in 0..DOF {
                let step = (w[1].q[j] - w[0].q[j]).abs();
                if step > caps[j] * self.dt * (1.0 + 1e-9) + 1e-12 {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Inserts `n` copies of sample `after` directly after it. Annotation
    /// indices past `after` shift; spans covering `after` stretch.
    pub fn insert_holds(&mut self, after: usize, n: usize) {
        if n == 0 {
            return;
        }
        let copy = self.samples[after].clone();
        self.samples.splice(after + 1..after + 1, std::iter::repeat_n(copy, n));
        for a in &mut self.annotations {
            if a.start > after {
                a.start += n;
            }
            if a.end > after {
                a.end += n;
            }
        }
    }

    /// Appends `n` copies of the terminal sample.
    pub fn extend_hold(&mut self, n: usize) {
        let last = self.samples.len() - 1;
        self.insert_holds(last, n);
    }

    /// Subdivides any step that exceeds a joint speed cap, inserting linearly
    /// interpolated samples (local time dilation). Poses visited and the
    /// terminal sample are unchanged.
    pub fn enforce_speed_caps(&mut self, chain: &ChainSpec) {
        let caps = chain.max_speeds();
        let mut out = Vec::with_capacity(self.samples.len());
        let mut index_map = Vec::with_capacity(self.samples.len());
        for i in 0..self.samples.len() {
            if i > 0 {
                let (a, b) = (&self.samples[i - 1], &self.samples[i]);
                let ratio = (0..DOF)
                    .map(|j| (b.q[j] - a.q[j]).abs() / (caps[j] * self.dt))
                    .fold(0.0, f64::max);
                if ratio > 1.0 + 1e-9 {
                    let n = ratio.ceil() as usize;
                    for k in 1..n {
                        out.push(Sample {
                            q: a.q.lerp(&b.q, k as f64 / n as f64),
                            tool: a.tool.clone(),
                        });
                    }
                }
            }
            index_map.push(out.len());
            out.push(self.samples[i].clone());
        }
        if out.len() != self.samples.len() {
            for a in &mut self.annotations {
                a.start = index_map[a.start];
                a.end = index_map[a.end];
            }
            self.samples = out;
        }
    }
}

/// Ramp-cruise-ramp progress along a straight segment.
#[derive(Clone, Copy, Debug)]
struct Trapezoid {
    /// Peak path speed (1/s).
    peak: f64,
    accel: f64,
    ramp: f64,
    total: f64,
}

impl Trapezoid {
    fn new(peak: f64, ramp_time: f64) -> Self {
        let accel = peak / ramp_time;
        if peak * ramp_time <= 1.0 {
            Trapezoid {
                peak,
                accel,
                ramp: ramp_time,
                total: 1.0 / peak + ramp_time,
            }
        } else {
            let ramp = (1.0 / accel).sqrt();
            Trapezoid {
                peak: accel * ramp,
                accel,
                ramp,
                total: 2.0 * ramp,
            }
        }
    }

    fn progress(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.total);
        if t < self.ramp {
            0.5 * self.accel * t * t
        } else if t <= self.total - self.ramp {
            0.5 * self.accel * self.ramp * self.ramp + self.peak * (t - self.ramp)
        } else {
            let r = self.total - t;
            1.0 - 0.5 * self.accel * r * r
        }
    }
}

/// Straight joint-space move from `q_start` to `q_goal` with a trapezoidal
/// speed profile at `speed_scale` of the joint speed caps.
///
/// The slowest joint sets the pace; all joints start and stop together.
/// Samples carry default tool and world state.
pub fn interpolate(
    chain: &ChainSpec,
    q_start: &JointVector,
    q_goal: &JointVector,
    dt: f64,
    speed_scale: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if !(speed_scale > 0.0 && speed_scale <= 1.0) {
        return Err(Error::InvalidInput(format!("speed_scale must be in (0, 1], got {speed_scale}")));
    }
    if !q_start.is_finite() || !q_goal.is_finite() || !chain.within_limits(q_start) || !chain.within_limits(q_goal)
    {
        return Err(Error::InvalidInput("interpolation endpoints must lie within joint limits".into()));
    }
    let sample = |q: JointVector| Sample {
        q,
        tool: ToolState::default(),
    };
    let caps = chain.max_speeds();
    let peak = (0..DOF)
        .filter(|&j| q_goal[j] != q_start[j])
        .map(|j| speed_scale * caps[j] / (q_goal[j] - q_start[j]).abs())
        .fold(f64::INFINITY, f64::min);
    if !peak.is_finite() {
        return Trajectory::new(dt, vec![sample(*q_goal)], WorldState::default());
    }
    let profile = Trapezoid::new(peak, chain.ramp_time);
    let steps = ((profile.total / dt) - 1e-9).ceil().max(1.0) as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    for k in 0..steps {
        let s = profile.progress(k as f64 * dt);
        samples.push(sample(q_start.lerp(q_goal, s)));
    }
    samples.push(sample(*q_goal));
    let traj = Trajectory::new(dt, samples, WorldState::default())?;
    debug_assert!(traj.check(chain).is_ok());
    Ok(traj)
}

/// Resamples at `new_dt` by linear interpolation of joint angles. Tool state
/// snaps to the nearest original sample; both endpoints are kept exactly.
pub fn resample(traj: &Trajectory, new_dt: f64) -> Result<Trajectory> {
    if !(new_dt > 0.0) || !new_dt.is_finite() {
        return Err(Error::InvalidInput(format!("dt must be positive, got {new_dt}")));
    }
    if new_dt == traj.dt {
        return Ok(traj.clone());
    }
    let duration = traj.duration();
    let steps = ((duration / new_dt) - 1e-9).ceil().max(0.0) as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        if k == steps {
            samples.push(traj.terminal().clone());
            break;
        }
        let t = k as f64 * new_dt;
        let x = t / traj.dt;
        let i = (x.floor() as usize).min(traj.len() - 1);
        let q = if i + 1 < traj.len() {
            traj.samples[i].q.lerp(&traj.samples[i + 1].q, x - i as f64)
        } else {
            traj.samples[i].q
        };
        let tool = traj.samples[traj.index_at(t)].tool.clone();
        samples.push(Sample { q, tool });
    }
    let mut out = Trajectory::new(new_dt, samples, traj.world.clone())?;
    let last = out.len() - 1;
    let remap = |i: usize| (((i as f64 * traj.dt) / new_dt).round() as usize).min(last);
    out.annotations = traj
        .annotations
        .iter()
        .map(|a| Annotation {
            start: remap(a.start),
            end: remap(a.end),
            primitive: a.primitive.clone(),
        })
        .collect();
    Ok(out)
}

/// Thresholds for pause detection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureParams {
    /// Head speed below which the robot counts as paused (m/s).
    pub pause_speed: f64,
    /// Minimum pause length (s).
    pub min_pause: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        FeatureParams {
            pause_speed: 0.01,
            min_pause: 0.2,
        }
    }
}

/// A detected pause: start time and duration (s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pause {
    pub start: f64,
    pub duration: f64,
}

/// Per-sample head kinematics.
///
/// `speed[i]` is the backward-difference head speed into sample `i`
/// (zero at `i = 0`); `accel` and `jerk` are backward differences of the
/// speed signal, zero where undefined.
#[derive(Clone, Debug)]
pub struct FeatureSeries {
    pub dt: f64,
    pub poses: Vec<Pose>,
    pub speed: Vec<f64>,
    pub accel: Vec<f64>,
    pub jerk: Vec<f64>,
    pub pauses: Vec<Pause>,
    /// Total head path length (m).
    pub path_length: f64,
    /// Straight-line distance between first and last head positions (m).
    pub chord: f64,
    /// Highest per-joint rate of velocity sign reversals (1/s).
    pub reversal_rate: f64,
}

impl FeatureSeries {
    pub fn duration(&self) -> f64 {
        self.dt * (self.poses.len().saturating_sub(1)) as f64
    }

    pub fn paused_time(&self) -> f64 {
        self.pauses.iter().map(|p| p.duration).sum()
    }
}

pub fn kinematic_features(chain: &ChainSpec, traj: &Trajectory) -> Result<FeatureSeries> {
    kinematic_features_with(chain, traj, &FeatureParams::default())
}

pub fn kinematic_features_with(chain: &ChainSpec, traj: &Trajectory, params: &FeatureParams) -> Result<FeatureSeries> {
    let n = traj.len();
    if n == 0 {
        return Err(Error::InvalidInput("features need at least one sample".into()));
    }
    let dt = traj.dt;
    let poses: Vec<Pose> = traj.samples.iter().map(|s| forward_kinematics(chain, &s.q)).collect();
    let mut speed = vec![0.0; n];
    for i in 1..n {
        speed[i] = (poses[i].position - poses[i - 1].position).norm() / dt;
    }
    let mut accel = vec![0.0; n];
    for i in 2..n {
        accel[i] = (speed[i] - speed[i - 1]) / dt;
    }
    let mut jerk = vec![0.0; n];
    for i in 3..n {
        jerk[i] = (accel[i] - accel[i - 1]) / dt;
    }

    // A pause is a run of slow steps; step i is the move into sample i.
    let mut pauses = Vec::new();
    if n == 1 {
        pauses.push(Pause {
            start: 0.0,
            duration: 0.0,
        });
    } else {
        let mut run_start: Option<usize> = None;
        let flush = |from: usize, to: usize, pauses: &mut Vec<Pause>| {
            let duration = (to - from) as f64 * dt;
            let whole = from == 0 && to == n - 1;
            if whole || duration >= params.min_pause - 1e-9 {
                pauses.push(Pause {
                    start: from as f64 * dt,
                    duration,
                });
            }
        };
        for i in 1..n {
            let slow = speed[i] < params.pause_speed;
            match (slow, run_start) {
                (true, None) => run_start = Some(i - 1),
                (false, Some(s)) => {
                    flush(s, i - 1, &mut pauses);
                    run_start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = run_start {
            flush(s, n - 1, &mut pauses);
        }
    }

    let path_length = speed.iter().sum::<f64>() * dt;
    let chord = (poses[n - 1].position - poses[0].position).norm();

    let mut reversals = [0usize; DOF];
    for j in 0..DOF {
        let mut last_sign = 0i8;
        for w in traj.samples.windows(2) {
            let v = w[1].q[j] - w[0].q[j];
            let sign = if v > 1e-9 {
                1
            } else if v < -1e-9 {
                -1
            } else {
                0
            };
            if sign != 0 {
                if last_sign != 0 && sign != last_sign {
                    reversals[j] += 1;
                }
                last_sign = sign;
            }
        }
    }
    let duration = dt * (n - 1) as f64;
    let reversal_rate = if duration > 0.0 {
        *reversals.iter().max().unwrap() as f64 / duration
    } else {
        0.0
    };

    Ok(FeatureSeries {
        dt,
        poses,
        speed,
        accel,
        jerk,
        pauses,
        path_length,
        chord,
        reversal_rate,
    })
}
