//! Kinesic and proxemic motion primitives as goal-preserving trajectory
//! transformations.
//!
//! Every primitive leaves the terminal sample untouched: gestures are
//! enveloped to zero before the final sample, excursions (gaze, approach,
//! lean) are inserted as holds at their anchor and released back onto the
//! base motion, and temporal primitives only re-time samples. Limits are
//! re-enforced by clamping and speed caps by local time dilation.
//!
//! When the terminal sample carries a tool event (the light switching on,
//! a projection starting), the `post` anchor sits on the sample just before
//! it, so expression happens before the functional act completes.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{
    clamp_to_limits, forward_kinematics, inverse_kinematics, look_at, look_away, ChainSpec, JointGain, JointVector,
    PoseGoal, DOF,
};
use crate::trajectory::{Annotation, Sample, Trajectory, WorldState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PrimitiveKind {
    Nod,
    Shake,
    LowerHead,
    Lean,
    Wag,
    Stretch,
    SpeedScale,
    PauseInsert,
    JerkPulse,
    OrientToward,
    PointAwayFrom,
    Approach,
    Avoid,
    AttentionShift,
    LightEmphasis,
}

impl PrimitiveKind {
    pub const ALL: [PrimitiveKind; 15] = [
        PrimitiveKind::Nod,
        PrimitiveKind::Shake,
        PrimitiveKind::LowerHead,
        PrimitiveKind::Lean,
        PrimitiveKind::Wag,
        PrimitiveKind::Stretch,
        PrimitiveKind::SpeedScale,
        PrimitiveKind::PauseInsert,
        PrimitiveKind::JerkPulse,
        PrimitiveKind::OrientToward,
        PrimitiveKind::PointAwayFrom,
        PrimitiveKind::Approach,
        PrimitiveKind::Avoid,
        PrimitiveKind::AttentionShift,
        PrimitiveKind::LightEmphasis,
    ];

    /// Parameter names this kind accepts.
    pub fn allowed_params(self) -> &'static [&'static str] {
        use PrimitiveKind::*;
        match self {
            Nod | Shake | Wag => &["amplitude", "cycles", "duration", "phase", "sync_beats"],
            LowerHead | Lean => &["amplitude", "duration"],
            Stretch | JerkPulse => &["amplitude", "cycles", "duration"],
            SpeedScale => &["factor", "duration"],
            PauseInsert => &["duration"],
            OrientToward | PointAwayFrom => &["target", "duration"],
            Approach => &["target", "standoff", "duration"],
            Avoid => &["target", "amplitude", "duration"],
            AttentionShift => &["target", "to", "duration"],
            LightEmphasis => &["duration", "intensity"],
        }
    }

    fn default_number(self, key: &str) -> Option<f64> {
        use PrimitiveKind::*;
        let v = match (self, key) {
            (Nod, "amplitude") => 0.15,
            (Nod, "cycles") => 2.0,
            (Nod, "duration") => 1.0,
            (Shake, "amplitude") => 0.25,
            (Shake, "cycles") => 2.0,
            (Shake, "duration") => 1.2,
            (Wag, "amplitude") => 0.2,
            (Wag, "cycles") => 3.0,
            (Wag, "duration") => 1.5,
            (Nod | Shake | Wag, "phase") => 0.0,
            (Nod | Shake | Wag, "sync_beats") => 0.0,
            (LowerHead, "amplitude") => 0.35,
            (LowerHead, "duration") => 1.2,
            (Lean, "amplitude") => 0.2,
            (Lean, "duration") => 1.0,
            (Stretch, "amplitude") => 0.08,
            (Stretch, "cycles") => 3.0,
            (Stretch, "duration") => 1.2,
            (JerkPulse, "amplitude") => 0.05,
            (JerkPulse, "cycles") => 3.0,
            (JerkPulse, "duration") => 0.6,
            (SpeedScale, "factor") => 0.6,
            (PauseInsert, "duration") => 0.5,
            (OrientToward | PointAwayFrom, "duration") => 0.8,
            (Approach, "standoff") => 0.07,
            (Approach, "duration") => 0.6,
            (Avoid, "amplitude") => 0.08,
            (Avoid, "duration") => 0.6,
            (AttentionShift, "duration") => 1.2,
            (LightEmphasis, "duration") => 1.0,
            (LightEmphasis, "intensity") => 1.0,
            _ => return None,
        };
        Some(v)
    }

    fn gesture_map(self, chain: &ChainSpec) -> &[JointGain] {
        let g = &chain.gestures;
        match self {
            PrimitiveKind::Nod => &g.nod,
            PrimitiveKind::Shake => &g.shake,
            PrimitiveKind::Wag => &g.wag,
            PrimitiveKind::Lean => &g.lean,
            PrimitiveKind::LowerHead => &g.lower_head,
            PrimitiveKind::Stretch => &g.stretch,
            PrimitiveKind::JerkPulse => &g.jerk,
            _ => &[],
        }
    }
}

impl fmt::Display for PrimitiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(v) => write!(f, "{v}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

/// Where a primitive attaches to the base trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// Trajectory start.
    Pre,
    /// Midpoint of the current duration.
    Mid,
    /// End of motion, before any terminal tool event.
    Post,
    /// Absolute time (s).
    At(f64),
    /// Seconds before the end.
    BeforeTerminal(f64),
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anchor::Pre => f.write_str("pre"),
            Anchor::Mid => f.write_str("mid"),
            Anchor::Post => f.write_str("post"),
            Anchor::At(t) => write!(f, "t={t}"),
            Anchor::BeforeTerminal(t) => write!(f, "terminal-{t}"),
        }
    }
}

/// One parameterized primitive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimitiveInstance {
    pub kind: PrimitiveKind,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
    pub anchor: Anchor,
}

impl PrimitiveInstance {
    pub fn new(kind: PrimitiveKind, anchor: Anchor) -> Self {
        PrimitiveInstance {
            kind,
            params: BTreeMap::new(),
            anchor,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), ParamValue::Number(value));
        self
    }

    pub fn with_text(mut self, key: &str, value: &str) -> Self {
        self.params.insert(key.to_string(), ParamValue::Text(value.to_string()));
        self
    }

    pub fn target(self, name: &str) -> Self {
        self.with_text("target", name)
    }

    /// Stable identifier used in annotations and plan ordering.
    pub fn label(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})@{}", self.kind, params.join(","), self.anchor)
    }

    pub fn number(&self, key: &str) -> Result<f64> {
        match self.params.get(key) {
            Some(ParamValue::Number(v)) => Ok(*v),
            Some(ParamValue::Text(_)) => Err(Error::InvalidInput(format!("{}: `{key}` must be a number", self.kind))),
            None => self
                .kind
                .default_number(key)
                .ok_or_else(|| Error::InvalidInput(format!("{}: missing `{key}`", self.kind))),
        }
    }

    pub fn text(&self, key: &str) -> Result<&str> {
        match self.params.get(key) {
            Some(ParamValue::Text(s)) => Ok(s),
            Some(ParamValue::Number(_)) => Err(Error::InvalidInput(format!("{}: `{key}` must be a name", self.kind))),
            None => Err(Error::InvalidInput(format!("{}: missing `{key}`", self.kind))),
        }
    }

    /// Referenced world targets.
    pub fn targets(&self) -> Vec<&str> {
        ["target", "to"]
            .iter()
            .filter_map(|k| match self.params.get(*k) {
                Some(ParamValue::Text(s)) => Some(s.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn validate(&self, world: &WorldState) -> Result<()> {
        let allowed = self.kind.allowed_params();
        for key in self.params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::InvalidInput(format!("{}: unknown parameter `{key}`", self.kind)));
            }
        }
        let bad = |m: &str| Err(Error::InvalidInput(format!("{}: {m}", self.kind)));
        for key in allowed {
            let optional = !matches!(*key, "target" | "to") && self.kind.default_number(key).is_none();
            if optional && !self.params.contains_key(*key) {
                continue;
            }
            match *key {
                "amplitude" | "standoff" | "phase" if self.number(key)? < 0.0 || !self.number(key)?.is_finite() => {
                    return bad(&format!("`{key}` must be finite and non-negative"));
                }
                "duration" if !(self.number(key)? > 0.0) || !self.number(key)?.is_finite() => {
                    return bad("`duration` must be positive");
                }
                "cycles" => {
                    let c = self.number(key)?;
                    if c < 1.0 || c.fract() != 0.0 {
                        return bad("`cycles` must be an integer >= 1");
                    }
                }
                "factor" if !(self.number(key)? > 0.0) || !self.number(key)?.is_finite() => {
                    return bad("`factor` must be positive");
                }
                "intensity" if !(0.0..=1.0).contains(&self.number(key)?) => {
                    return bad("`intensity` must be in [0, 1]");
                }
                "target" | "to" => {
                    let name = self.text(key)?;
                    if !world.has(name) {
                        return Err(Error::TargetMissing(name.to_string()));
                    }
                }
                _ => {}
            }
        }
        match self.anchor {
            Anchor::At(t) | Anchor::BeforeTerminal(t) if !(t >= 0.0) || !t.is_finite() => {
                bad("anchor time must be finite and non-negative")
            }
            _ => Ok(()),
        }
    }
}

/// Index where post-motion expression attaches: the last sample, or the one
/// before a terminal tool event.
pub fn post_index(traj: &Trajectory) -> usize {
    let n = traj.len();
    if n >= 2 && traj.samples[n - 1].tool != traj.samples[n - 2].tool {
        n - 2
    } else {
        n - 1
    }
}

fn anchor_index(traj: &Trajectory, anchor: Anchor) -> usize {
    let post = post_index(traj);
    match anchor {
        Anchor::Pre => 0,
        Anchor::Mid => ((traj.len() - 1) / 2).min(post),
        Anchor::Post => post,
        Anchor::At(t) => traj.index_at(t).min(post),
        Anchor::BeforeTerminal(x) => traj.index_at(traj.duration() - x).min(post),
    }
}

/// Makes sure a window of `w` samples starting at `k` ends before the
/// terminal sample, inserting holds of sample `k` if it does not.
fn ensure_room(traj: &mut Trajectory, k: usize, w: usize) -> usize {
    let n = traj.len();
    let last_ok = n as isize - 2;
    let end = (k + w) as isize - 1;
    if end > last_ok {
        let deficit = (end - last_ok) as usize;
        traj.insert_holds(k, deficit);
        deficit
    } else {
        0
    }
}

/// Raised-cosine weight rising over `ramp` from 0 at `t = 0`, flat at 1,
/// and falling to 0 at `t = len`.
fn envelope(t: f64, len: f64, ramp: f64) -> f64 {
    if t <= 0.0 || t >= len {
        0.0
    } else if t < ramp {
        0.5 * (1.0 - (PI * t / ramp).cos())
    } else if t > len - ramp {
        0.5 * (1.0 - (PI * (len - t) / ramp).cos())
    } else {
        1.0
    }
}

fn smoothstep(i: usize, n: usize) -> f64 {
    if i >= n {
        1.0
    } else {
        0.5 * (1.0 - (PI * i as f64 / n as f64).cos())
    }
}

fn map_offset(map: &[JointGain], value: f64) -> JointVector {
    let mut off = JointVector::ZERO;
    for g in map {
        off[g.joint] += g.gain * value;
    }
    off
}

/// Adds `offsets[i]` to sample `k + i`, clamping to limits. Zero offsets
/// leave samples bit-identical. Returns the largest realized change on the
/// joint with the largest requested change, and that requested change.
fn superpose(chain: &ChainSpec, traj: &mut Trajectory, k: usize, offsets: &[JointVector]) -> (f64, f64) {
    let mut requested = [0.0f64; DOF];
    for o in offsets {
        for j in 0..DOF {
            requested[j] = requested[j].max(o[j].abs());
        }
    }
    let main = (0..DOF).fold(0, |m, j| if requested[j] > requested[m] { j } else { m });
    let mut realized = 0.0f64;
    for (i, o) in offsets.iter().enumerate() {
        if o.iter().all(|v| *v == 0.0) {
            continue;
        }
        let s = &mut traj.samples[k + i];
        let moved = clamp_to_limits(chain, &(s.q + *o));
        realized = realized.max((moved[main] - s.q[main]).abs());
        s.q = moved;
    }
    (realized, requested[main])
}

fn check_feasible(kind: PrimitiveKind, realized: f64, requested: f64) -> Result<()> {
    if requested > 1e-12 && realized < 0.25 * requested {
        return Err(Error::Infeasible(format!(
            "{kind}: joint limits absorb the gesture ({realized:.4} of {requested:.4} rad)"
        )));
    }
    Ok(())
}

fn samples_for(duration: f64, dt: f64) -> usize {
    (duration / dt).round().max(1.0) as usize
}

/// Minimum raised-cosine transition length.
const MIN_RAMP: f64 = 0.3;

/// Samples needed for a raised-cosine move of `delta` within speed caps.
fn ramp_samples(chain: &ChainSpec, delta: &JointVector, dt: f64) -> usize {
    let caps = chain.max_speeds();
    let needed = (0..DOF)
        .map(|j| PI / 2.0 * delta[j].abs() / caps[j])
        .fold(MIN_RAMP, f64::max);
    (needed * 1.05 / dt).ceil() as usize
}

/// Pose excursion through `keys` (offset, hold seconds) and back.
///
/// The approach to the first key and all holds are inserted at `k`; the
/// final release blends into the samples that follow. Returns the annotated
/// span.
fn excursion(
    chain: &ChainSpec,
    traj: &mut Trajectory,
    k: usize,
    keys: &[(JointVector, f64)],
) -> (usize, usize) {
    let dt = traj.dt;
    let mut offsets = vec![JointVector::ZERO];
    let mut prev = JointVector::ZERO;
    for (delta, hold) in keys {
        let r = ramp_samples(chain, &(*delta - prev), dt);
        for i in 1..=r {
            offsets.push(prev.lerp(delta, smoothstep(i, r)));
        }
        for _ in 0..samples_for(*hold, dt) {
            offsets.push(*delta);
        }
        prev = *delta;
    }
    let inserted = offsets.len() - 1;
    let r = ramp_samples(chain, &prev, dt);
    for i in 1..r {
        offsets.push(prev * (1.0 - smoothstep(i, r)));
    }
    offsets.push(JointVector::ZERO);

    traj.insert_holds(k, inserted);
    let extra = ensure_room(traj, k, offsets.len());
    superpose(chain, traj, k, &offsets);
    let end = if extra > 0 { k + offsets.len() - 1 } else { k + inserted };
    (k, end)
}

/// Applies one primitive. The returned trajectory ends in the same sample as
/// `traj` and records the primitive in its annotations.
pub fn apply_primitive(
    chain: &ChainSpec,
    traj: &Trajectory,
    p: &PrimitiveInstance,
    world: &WorldState,
) -> Result<Trajectory> {
    p.validate(world)?;
    let mut out = traj.clone();
    let dt = out.dt;
    let k = anchor_index(&out, p.anchor);
    let q_a = out.samples[k].q;
    let gaze = &chain.gestures.gaze;

    use PrimitiveKind::*;
    let span = match p.kind {
        Nod | Shake | Wag if p.number("sync_beats")? != 0.0 => {
            let beats = world.beat_times.clone().unwrap_or_default();
            let out = beat_oscillation(chain, traj, &beats, p.number("amplitude")?, p.kind.gesture_map(chain), &p.label())?;
            return Ok(out);
        }
        Nod | Shake | Wag | Stretch | JerkPulse => {
            let amp = p.number("amplitude")?;
            if amp == 0.0 {
                let end = k;
                (k, end)
            } else {
                let len = p.number("duration")?;
                let cycles = p.number("cycles")?;
                let phase = if matches!(p.kind, Nod | Shake | Wag) { p.number("phase")? } else { 0.0 };
                let w = samples_for(len, dt) + 1;
                let ramp = (0.25 * len).min(0.3);
                let map = p.kind.gesture_map(chain);
                let offsets: Vec<JointVector> = (0..w)
                    .map(|i| {
                        let t = i as f64 * dt;
                        let x = 2.0 * PI * cycles * (t + phase) / len;
                        let wave = match p.kind {
                            Stretch => 0.5 * (1.0 - x.cos()),
                            JerkPulse => x.sin().signum(),
                            _ => x.sin(),
                        };
                        map_offset(map, amp * envelope(t, len, ramp) * wave)
                    })
                    .collect();
                ensure_room(&mut out, k, w);
                let (realized, requested) = superpose(chain, &mut out, k, &offsets);
                check_feasible(p.kind, realized, requested)?;
                (k, k + w - 1)
            }
        }
        LowerHead | Lean => {
            let amp = p.number("amplitude")?;
            if amp == 0.0 {
                (k, k)
            } else {
                let want = map_offset(p.kind.gesture_map(chain), amp);
                let delta = clamp_to_limits(chain, &(q_a + want)) - q_a;
                let requested = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let realized = delta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                check_feasible(p.kind, realized, requested)?;
                excursion(chain, &mut out, k, &[(delta, p.number("duration")?)])
            }
        }
        OrientToward | PointAwayFrom => {
            let target = world.resolve(p.text("target")?)?;
            let q_g = if p.kind == OrientToward {
                look_at(chain, &q_a, &target, gaze)
            } else {
                look_away(chain, &q_a, &target, gaze)
            };
            excursion(chain, &mut out, k, &[(q_g - q_a, p.number("duration")?)])
        }
        AttentionShift => {
            let first = world.resolve(p.text("target")?)?;
            let second = world.resolve(p.text("to")?)?;
            let q1 = look_at(chain, &q_a, &first, gaze);
            let q2 = look_at(chain, &q1, &second, gaze);
            let half = 0.5 * p.number("duration")?;
            excursion(chain, &mut out, k, &[(q1 - q_a, half), (q2 - q_a, half)])
        }
        Approach | Avoid => {
            let target = world.resolve(p.text("target")?)?;
            let head = forward_kinematics(chain, &q_a);
            let away = head.position - target;
            let away = if away.norm() > 1e-9 { away.normalize() } else { -head.facing };
            let goal = if p.kind == Approach {
                let point = target + away * p.number("standoff")?;
                PoseGoal::with_facing(point, target - point)
            } else {
                PoseGoal::with_facing(head.position + away * p.number("amplitude")?, head.facing)
            };
            let q_g = match inverse_kinematics(chain, &goal, &q_a, 1e-3) {
                Ok(q) => q,
                Err(Error::Unreachable { best_effort, .. }) => best_effort,
                Err(e) => return Err(e),
            };
            if p.kind == Avoid && p.number("amplitude")? == 0.0 {
                (k, k)
            } else {
                excursion(chain, &mut out, k, &[(q_g - q_a, p.number("duration")?)])
            }
        }
        PauseInsert => {
            // no max(1): a vanishing pause inserts nothing
            let n = (p.number("duration")? / dt).round() as usize;
            out.insert_holds(k, n);
            (k, k + n)
        }
        SpeedScale => {
            let factor = p.number("factor")?;
            let end = match p.params.get("duration") {
                Some(_) => (k + samples_for(p.number("duration")?, dt)).min(post_index(&out)),
                None => post_index(&out),
            };
            if factor == 1.0 || end <= k {
                (k, end.max(k))
            } else {
                retime(&mut out, k, end, factor)
            }
        }
        LightEmphasis => {
            let w = samples_for(p.number("duration")?, dt) + 1;
            if w < 3 {
                (k, k)
            } else {
                ensure_room(&mut out, k, w);
                let peak = p.number("intensity")?;
                for i in 1..w - 1 {
                    let s = &mut out.samples[k + i];
                    let baseline = if s.tool.light_on { s.tool.light_intensity } else { 0.0 };
                    let frac = i as f64 / (w - 1) as f64;
                    s.tool.light_intensity = if frac <= 0.5 {
                        0.3 + (peak - 0.3) * frac / 0.5
                    } else {
                        peak + (baseline - peak) * (frac - 0.5) / 0.5
                    }
                    .clamp(0.0, 1.0);
                    s.tool.light_on = true;
                }
                (k, k + w - 1)
            }
        }
    };

    finish(chain, traj, out, span, p.label())
}

/// Records the annotation, re-enforces speed caps (which remaps annotations)
/// and checks the terminal sample.
fn finish(
    chain: &ChainSpec,
    input: &Trajectory,
    mut out: Trajectory,
    span: (usize, usize),
    label: String,
) -> Result<Trajectory> {
    out.annotations.push(Annotation {
        start: span.0,
        end: span.1.max(span.0),
        primitive: label.clone(),
    });
    out.enforce_speed_caps(chain);
    if out.terminal() != input.terminal() {
        return Err(Error::InvariantViolation(format!("{label} altered the terminal state")));
    }
    debug_assert!(out.check(chain).is_ok(), "{:?}", out.check(chain));
    Ok(out)
}

/// Replaces samples `k..=end` with a re-timed copy lasting `1/factor` as long.
fn retime(traj: &mut Trajectory, k: usize, end: usize, factor: f64) -> (usize, usize) {
    let old = end - k;
    let m = ((old as f64 / factor).round() as usize).max(1);
    let mut seg = Vec::with_capacity(m + 1);
    for i in 0..=m {
        if i == m {
            seg.push(traj.samples[end].clone());
            break;
        }
        let x = k as f64 + i as f64 * old as f64 / m as f64;
        let lo = x.floor() as usize;
        let hi = (lo + 1).min(end);
        let q = traj.samples[lo].q.lerp(&traj.samples[hi].q, x - lo as f64);
        let tool = traj.samples[(x.round() as usize).min(end)].tool.clone();
        seg.push(Sample { q, tool });
    }
    traj.samples.splice(k..=end, seg);
    let map = |i: usize| -> usize {
        if i <= k {
            i
        } else if i >= end {
            i + m - old
        } else {
            k + (((i - k) as f64) * m as f64 / old as f64).round() as usize
        }
    };
    for a in &mut traj.annotations {
        a.start = map(a.start);
        a.end = map(a.end);
    }
    (k, k + m)
}

/// Applies `plan` left to right.
pub fn compose(
    chain: &ChainSpec,
    traj: &Trajectory,
    plan: &[PrimitiveInstance],
    world: &WorldState,
) -> Result<Trajectory> {
    let mut cur = traj.clone();
    for (index, p) in plan.iter().enumerate() {
        cur = apply_primitive(chain, &cur, p, world).map_err(|e| Error::PlanStep {
            index,
            source: Box::new(e),
        })?;
    }
    Ok(cur)
}

/// Superimposes a side-to-side (wag) oscillation whose extrema fall on
/// `beat_times` (seconds from trajectory start). Extends the trajectory with
/// holds when the beats run past its end. An empty beat list is the identity.
pub fn align_to_beats(chain: &ChainSpec, traj: &Trajectory, beat_times: &[f64], amplitude: f64) -> Result<Trajectory> {
    let label = format!("Wag(amplitude={amplitude},sync_beats=1)@beats");
    beat_oscillation(chain, traj, beat_times, amplitude, &chain.gestures.wag, &label)
}

fn beat_oscillation(
    chain: &ChainSpec,
    traj: &Trajectory,
    beats: &[f64],
    amplitude: f64,
    map: &[JointGain],
    label: &str,
) -> Result<Trajectory> {
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(Error::InvalidInput("beat amplitude must be finite and non-negative".into()));
    }
    if beats.iter().any(|b| !b.is_finite()) || beats.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("beat times must be finite and strictly ascending".into()));
    }
    if beats.is_empty() || amplitude == 0.0 {
        return Ok(traj.clone());
    }
    let dt = traj.dt;
    if beats[0] < dt {
        return Err(Error::InvalidInput("first beat must fall after the trajectory start".into()));
    }
    let n = beats.len();
    let first_gap = if n > 1 { beats[1] - beats[0] } else { 0.5 };
    let last_gap = if n > 1 { beats[n - 1] - beats[n - 2] } else { 0.5 };
    let ramp_in = (0.5 * first_gap).min(0.25).min(beats[0]);
    let ramp_out = (0.5 * last_gap).min(0.25);
    let t_end = beats[n - 1] + ramp_out;

    let mut out = traj.clone();
    let end_idx = (t_end / dt).ceil() as usize;
    if end_idx + 1 > out.len() - 1 {
        let p = post_index(&out);
        let missing = end_idx + 2 - out.len();
        out.insert_holds(p, missing);
    }

    // Phase advances by pi between consecutive beats: cos(phase) peaks on beats.
    let phase = |t: f64| -> f64 {
        if t <= beats[0] {
            return PI * (t - beats[0]) / first_gap;
        }
        if t >= beats[n - 1] {
            return PI * (n - 1) as f64 + PI * (t - beats[n - 1]) / last_gap;
        }
        let i = beats.partition_point(|&b| b <= t) - 1;
        PI * (i as f64 + (t - beats[i]) / (beats[i + 1] - beats[i]))
    };
    let env = |t: f64| -> f64 {
        if t <= beats[0] - ramp_in || t >= t_end {
            0.0
        } else if t < beats[0] {
            0.5 * (1.0 - (PI * (t - beats[0] + ramp_in) / ramp_in).cos())
        } else if t > beats[n - 1] {
            0.5 * (1.0 + (PI * (t - beats[n - 1]) / ramp_out).cos())
        } else {
            1.0
        }
    };
    let start_idx = ((beats[0] - ramp_in) / dt).floor().max(0.0) as usize;
    let offsets: Vec<JointVector> = (start_idx..=end_idx)
        .map(|i| {
            let t = i as f64 * dt;
            map_offset(map, amplitude * env(t) * phase(t).cos())
        })
        .collect();
    let (realized, requested) = superpose(chain, &mut out, start_idx, &offsets);
    check_feasible(PrimitiveKind::Wag, realized, requested)?;
    if let Err(e) = out.check(chain) {
        return Err(Error::Infeasible(format!("beat-aligned oscillation breaks speed caps: {e}")));
    }
    finish(chain, traj, out, (start_idx, end_idx), label.to_string())
}

/// Direction from the head to a world point, for convenience in tests and examples.
pub fn head_to(chain: &ChainSpec, q: &JointVector, target: &Vector3<f64>) -> Vector3<f64> {
    target - forward_kinematics(chain, q).position
}
