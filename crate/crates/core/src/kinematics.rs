//! Serial-chain model of the lamp: forward kinematics to the head, damped
//! least-squares inverse kinematics, joint limits and reachability.
//!
//! Every joint is revolute. Joint `i` sits at the end of the offsets of the
//! joints before it; it first rotates about its own axis, then translates by
//! its fixed offset to the next joint. The head reference point is reached
//! through `head_offset` after the last joint.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, DVector, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of joints in the lamp arm.
pub const DOF: usize = 6;

/// One configuration of the six joints, in radians.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointVector(pub [f64; DOF]);

impl JointVector {
    pub const ZERO: JointVector = JointVector([0.0; DOF]);

    pub fn new(q: [f64; DOF]) -> Self {
        JointVector(q)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Largest absolute per-joint difference.
    pub fn max_abs_diff(&self, other: &JointVector) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }

    /// Linear blend `self + s (other - self)`; returns `other` exactly at `s == 1`.
    pub fn lerp(&self, other: &JointVector, s: f64) -> JointVector {
        if s == 1.0 {
            return *other;
        }
        let mut out = *self;
        for i in 0..DOF {
            out.0[i] = self.0[i] + s * (other.0[i] - self.0[i]);
        }
        out
    }
}

impl Index<usize> for JointVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for JointVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for JointVector {
    type Output = JointVector;
    fn add(mut self, rhs: JointVector) -> JointVector {
        for i in 0..DOF {
            self.0[i] += rhs.0[i];
        }
        self
    }
}

impl Sub for JointVector {
    type Output = JointVector;
    fn sub(mut self, rhs: JointVector) -> JointVector {
        for i in 0..DOF {
            self.0[i] -= rhs.0[i];
        }
        self
    }
}

impl Mul<f64> for JointVector {
    type Output = JointVector;
    fn mul(mut self, rhs: f64) -> JointVector {
        for v in self.0.iter_mut() {
            *v *= rhs;
        }
        self
    }
}

/// A revolute joint and the rigid link that follows it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSpec {
    pub name: String,
    /// Rotation axis in the joint frame (unit length).
    pub axis: [f64; 3],
    /// Translation to the next joint, expressed in this joint's rotated frame (m).
    pub offset: [f64; 3],
    pub lower: f64,
    pub upper: f64,
    /// Maximum angular speed (rad/s).
    pub max_speed: f64,
}

/// Weighted contribution of one joint to a named gesture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointGain {
    pub joint: usize,
    pub gain: f64,
}

impl JointGain {
    pub const fn new(joint: usize, gain: f64) -> Self {
        JointGain { joint, gain }
    }
}

/// Maps gesture primitives onto the joints of a particular embodiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureMap {
    pub nod: Vec<JointGain>,
    pub shake: Vec<JointGain>,
    pub wag: Vec<JointGain>,
    pub lean: Vec<JointGain>,
    pub lower_head: Vec<JointGain>,
    pub stretch: Vec<JointGain>,
    pub jerk: Vec<JointGain>,
    /// Joints used to redirect the head's facing (gaze).
    pub gaze: Vec<usize>,
}

impl Default for GestureMap {
    fn default() -> Self {
        GestureMap {
            nod: vec![JointGain::new(4, 1.0)],
            shake: vec![JointGain::new(0, 1.0)],
            wag: vec![JointGain::new(3, 1.0)],
            lean: vec![JointGain::new(1, 1.0), JointGain::new(4, -0.5)],
            lower_head: vec![JointGain::new(2, 0.4), JointGain::new(4, 1.0)],
            stretch: vec![JointGain::new(1, 1.0), JointGain::new(2, -1.0)],
            jerk: vec![JointGain::new(4, 1.0), JointGain::new(0, 0.5)],
            gaze: vec![0, 2, 4],
        }
    }
}

/// Damped least-squares settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IkParams {
    pub damping: f64,
    pub max_iterations: usize,
    /// Largest per-joint change in one iteration (rad).
    pub step_clamp: f64,
    /// Default position tolerance (m).
    pub tolerance: f64,
    /// Facing tolerance (rad).
    pub facing_tolerance: f64,
}

impl Default for IkParams {
    fn default() -> Self {
        IkParams {
            damping: 0.05,
            max_iterations: 300,
            step_clamp: 0.2,
            tolerance: 1e-4,
            facing_tolerance: 5e-3,
        }
    }
}

/// Kinematic definition of the robot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub id: String,
    pub joints: Vec<JointSpec>,
    pub head_offset: [f64; 3],
    /// Facing direction of the head in the last joint's frame.
    pub forward_axis: [f64; 3],
    /// Acceleration ramp of trapezoidal profiles (s).
    pub ramp_time: f64,
    pub ik: IkParams,
    pub gestures: GestureMap,
}

impl Default for ChainSpec {
    /// Desk-scale arm: base yaw, shoulder pitch, elbow pitch, forearm roll,
    /// wrist pitch, wrist roll.
    fn default() -> Self {
        let j = |name: &str, axis: [f64; 3], offset: [f64; 3], lim: (f64, f64), speed: f64| JointSpec {
            name: name.to_string(),
            axis,
            offset,
            lower: lim.0,
            upper: lim.1,
            max_speed: speed,
        };
        let z = [0.0, 0.0, 1.0];
        let y = [0.0, 1.0, 0.0];
        let x = [1.0, 0.0, 0.0];
        ChainSpec {
            id: "desk-lamp-6dof".to_string(),
            joints: vec![
                j("base_yaw", z, [0.0, 0.0, 0.11], (-2.6, 2.6), 1.5),
                j("shoulder_pitch", y, [0.0, 0.0, 0.25], (-1.6, 1.6), 1.2),
                j("elbow_pitch", y, [0.25, 0.0, 0.0], (-1.7, 1.7), 1.5),
                j("forearm_roll", x, [0.065, 0.0, 0.0], (-2.6, 2.6), 2.5),
                j("wrist_pitch", y, [0.065, 0.0, 0.0], (-1.8, 1.8), 2.5),
                j("wrist_roll", x, [0.04, 0.0, 0.0], (-2.6, 2.6), 3.0),
            ],
            head_offset: [0.0, 0.0, 0.0],
            forward_axis: x,
            ramp_time: 0.2,
            ik: IkParams::default(),
            gestures: GestureMap::default(),
        }
    }
}

impl ChainSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.joints.len() != DOF {
            return bad(format!("expected {DOF} joints, found {}", self.joints.len()));
        }
        for j in &self.joints {
            let n = norm3(&j.axis);
            if (n - 1.0).abs() > 1e-9 {
                return bad(format!("joint `{}` axis norm {n}", j.name));
            }
            if !(j.lower < j.upper) {
                return bad(format!("joint `{}` limits not ordered", j.name));
            }
            if !(j.max_speed > 0.0) {
                return bad(format!("joint `{}` max_speed must be positive", j.name));
            }
            if !j.offset.iter().all(|v| v.is_finite()) {
                return bad(format!("joint `{}` offset not finite", j.name));
            }
        }
        if (norm3(&self.forward_axis) - 1.0).abs() > 1e-9 {
            return bad("forward_axis must be a unit vector".into());
        }
        if !self.head_offset.iter().all(|v| v.is_finite()) {
            return bad("head_offset not finite".into());
        }
        if !(self.ramp_time > 0.0) {
            return bad("ramp_time must be positive".into());
        }
        let ik = &self.ik;
        if !(ik.damping >= 0.0 && ik.step_clamp > 0.0 && ik.tolerance > 0.0 && ik.facing_tolerance > 0.0)
            || ik.max_iterations == 0
        {
            return bad("ik parameters out of range".into());
        }
        let g = &self.gestures;
        let all = [&g.nod, &g.shake, &g.wag, &g.lean, &g.lower_head, &g.stretch, &g.jerk];
        if all.iter().flat_map(|m| m.iter()).any(|jg| jg.joint >= DOF) || g.gaze.iter().any(|&i| i >= DOF) {
            return bad("gesture map references a joint out of range".into());
        }
        Ok(())
    }

    /// Radius about the base origin that bounds every head position.
    pub fn reach(&self) -> f64 {
        self.joints.iter().map(|j| norm3(&j.offset)).sum::<f64>() + norm3(&self.head_offset)
    }

    pub fn lower_limits(&self) -> JointVector {
        let mut q = JointVector::ZERO;
        for (i, j) in self.joints.iter().enumerate() {
            q[i] = j.lower;
        }
        q
    }

    pub fn upper_limits(&self) -> JointVector {
        let mut q = JointVector::ZERO;
        for (i, j) in self.joints.iter().enumerate() {
            q[i] = j.upper;
        }
        q
    }

    pub fn max_speeds(&self) -> [f64; DOF] {
        let mut v = [0.0; DOF];
        for (i, j) in self.joints.iter().enumerate() {
            v[i] = j.max_speed;
        }
        v
    }

    pub fn within_limits(&self, q: &JointVector) -> bool {
        self.joints
            .iter()
            .zip(q.iter())
            .all(|(j, &v)| v >= j.lower && v <= j.upper)
    }

    /// Fixed set of IK seeds spread over the limit box.
    pub fn canonical_seeds(&self) -> Vec<JointVector> {
        let mid = (self.lower_limits() + self.upper_limits()) * 0.5;
        let mut seeds = Vec::new();
        for yaw in [0.0, std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2, 2.5] {
            for (sh, el, wr) in [(-0.2, 0.9, 0.4), (0.6, -0.6, 0.3), (-1.2, -0.8, 0.0)] {
                let mut q = mid;
                q[0] = yaw;
                q[1] = sh;
                q[2] = el;
                q[4] = wr;
                seeds.push(clamp_to_limits(self, &q));
            }
        }
        seeds
    }
}

/// Head position and facing direction in the world frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub facing: Vector3<f64>,
}

/// Target for inverse kinematics. Facing is optional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseGoal {
    pub position: Vector3<f64>,
    pub facing: Option<Vector3<f64>>,
}

impl PoseGoal {
    pub fn position(p: Vector3<f64>) -> Self {
        PoseGoal { position: p, facing: None }
    }

    pub fn with_facing(p: Vector3<f64>, facing: Vector3<f64>) -> Self {
        PoseGoal {
            position: p,
            facing: Some(facing.normalize()),
        }
    }
}

pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub(crate) fn vec3(v: &[f64; 3]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

struct Frames {
    /// World position of each joint origin.
    origins: [Vector3<f64>; DOF],
    /// World rotation axis of each joint.
    axes: [Vector3<f64>; DOF],
    pose: Pose,
}

fn frames(chain: &ChainSpec, q: &JointVector) -> Frames {
    let mut rot = Rotation3::identity();
    let mut pos = Vector3::zeros();
    let mut origins = [Vector3::zeros(); DOF];
    let mut axes = [Vector3::zeros(); DOF];
    for (i, j) in chain.joints.iter().enumerate() {
        let axis = Unit::new_normalize(vec3(&j.axis));
        origins[i] = pos;
        axes[i] = rot * axis.into_inner();
        rot *= Rotation3::from_axis_angle(&axis, q[i]);
        pos += rot * vec3(&j.offset);
    }
    pos += rot * vec3(&chain.head_offset);
    let facing = (rot * vec3(&chain.forward_axis)).normalize();
    Frames {
        origins,
        axes,
        pose: Pose { position: pos, facing },
    }
}

/// Head pose for configuration `q`. Limits are not enforced.
pub fn forward_kinematics(chain: &ChainSpec, q: &JointVector) -> Pose {
    frames(chain, q).pose
}

/// Clamps every angle into its joint's `[lower, upper]` range.
pub fn clamp_to_limits(chain: &ChainSpec, q: &JointVector) -> JointVector {
    let mut out = *q;
    for (i, j) in chain.joints.iter().enumerate() {
        out[i] = out[i].clamp(j.lower, j.upper);
    }
    out
}

/// Angle between two directions, via clamped arccos of their dot product.
pub fn facing_error(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let d = a.normalize().dot(&b.normalize());
    d.clamp(-1.0, 1.0).acos()
}

// Facing rows are scaled so that radians weigh like decimetres.
const FACING_WEIGHT: f64 = 0.2;

fn dls_step(jac: &DMatrix<f64>, err: &DVector<f64>, damping: f64, step_clamp: f64) -> Option<DVector<f64>> {
    let rows = jac.nrows();
    let jjt = jac * jac.transpose() + DMatrix::identity(rows, rows) * (damping * damping);
    let y = jjt.cholesky()?.solve(err);
    let mut dq = jac.transpose() * y;
    let biggest = dq.amax();
    if biggest > step_clamp {
        dq *= step_clamp / biggest;
    }
    Some(dq)
}

/// Damped least-squares IK with per-iteration limit clamping.
///
/// On success the returned configuration is within limits and its head
/// position lies within `tol` of the goal (and within the chain's facing
/// tolerance when a facing is requested). Otherwise `Error::Unreachable`
/// carries the best configuration found.
pub fn inverse_kinematics(chain: &ChainSpec, goal: &PoseGoal, seed: &JointVector, tol: f64) -> Result<JointVector> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!("IK tolerance must be positive, got {tol}")));
    }
    if !seed.is_finite() || !goal.position.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("IK inputs must be finite".into()));
    }
    let params = &chain.ik;
    let rows = if goal.facing.is_some() { 6 } else { 3 };
    let mut q = clamp_to_limits(chain, seed);
    let mut best = (f64::INFINITY, q);

    for _ in 0..=params.max_iterations {
        let fr = frames(chain, &q);
        let pos_err = goal.position - fr.pose.position;
        let residual = pos_err.norm();
        let facing_ok = match goal.facing {
            Some(f) => facing_error(&fr.pose.facing, &f) <= params.facing_tolerance,
            None => true,
        };
        let score = residual + goal.facing.map_or(0.0, |f| FACING_WEIGHT * facing_error(&fr.pose.facing, &f));
        if score < best.0 {
            best = (score, q);
        }
        if residual <= tol && facing_ok {
            return Ok(q);
        }

        let mut jac = DMatrix::zeros(rows, DOF);
        let mut err = DVector::zeros(rows);
        for i in 0..DOF {
            let col = fr.axes[i].cross(&(fr.pose.position - fr.origins[i]));
            jac.fixed_view_mut::<3, 1>(0, i).copy_from(&col);
            if rows == 6 {
                let fcol = fr.axes[i].cross(&fr.pose.facing) * FACING_WEIGHT;
                jac.fixed_view_mut::<3, 1>(3, i).copy_from(&fcol);
            }
        }
        err.fixed_rows_mut::<3>(0).copy_from(&pos_err);
        if let Some(f) = goal.facing {
            err.fixed_rows_mut::<3>(3).copy_from(&((f - fr.pose.facing) * FACING_WEIGHT));
        }
        let Some(dq) = dls_step(&jac, &err, params.damping, params.step_clamp) else {
            break;
        };
        for i in 0..DOF {
            q[i] += dq[i];
        }
        q = clamp_to_limits(chain, &q);
    }

    let best_q = best.1;
    let residual = (goal.position - forward_kinematics(chain, &best_q).position).norm();
    Err(Error::Unreachable {
        residual,
        best_effort: best_q,
    })
}

/// Whether IK at the chain's default tolerance reaches `point` from any of
/// the canonical seeds.
pub fn reachable(chain: &ChainSpec, point: &Vector3<f64>) -> bool {
    if !point.iter().all(|v| v.is_finite()) {
        return false;
    }
    let tol = chain.ik.tolerance;
    if point.norm() > chain.reach() + tol {
        return false;
    }
    let goal = PoseGoal::position(*point);
    chain
        .canonical_seeds()
        .iter()
        .any(|seed| inverse_kinematics(chain, &goal, seed, tol).is_ok())
}

/// Turns the head toward `target` using only `joints`, starting from `q`.
///
/// Returns the configuration with the smallest facing error found; the head
/// may translate as a side effect of the joints it uses.
pub fn look_at(chain: &ChainSpec, q: &JointVector, target: &Vector3<f64>, joints: &[usize]) -> JointVector {
    look_along(chain, q, joints, |pose| target - pose.position)
}

/// Like [`look_at`], but turns the head to face away from `target`.
pub fn look_away(chain: &ChainSpec, q: &JointVector, target: &Vector3<f64>, joints: &[usize]) -> JointVector {
    look_along(chain, q, joints, |pose| pose.position - target)
}

fn look_along(
    chain: &ChainSpec,
    q: &JointVector,
    joints: &[usize],
    desired: impl Fn(&Pose) -> Vector3<f64>,
) -> JointVector {
    let mut cur = clamp_to_limits(chain, q);
    let mut best = (f64::INFINITY, cur);
    if joints.is_empty() {
        return cur;
    }
    for _ in 0..100 {
        let fr = frames(chain, &cur);
        let want = desired(&fr.pose);
        if want.norm() < 1e-12 {
            return cur;
        }
        let dist = want.norm();
        let want = want / dist;
        let ang = facing_error(&fr.pose.facing, &want);
        if ang < best.0 {
            best = (ang, cur);
        }
        if ang < 1e-4 {
            break;
        }
        let mut jac = DMatrix::zeros(3, joints.len());
        for (c, &i) in joints.iter().enumerate() {
            // d(facing - want): the desired direction turns as the head moves
            let dp = fr.axes[i].cross(&(fr.pose.position - fr.origins[i]));
            let probe = desired(&Pose {
                position: fr.pose.position + dp,
                facing: fr.pose.facing,
            }) - desired(&fr.pose);
            let dw = (probe - want * want.dot(&probe)) / dist;
            let col = fr.axes[i].cross(&fr.pose.facing) - dw;
            jac.fixed_view_mut::<3, 1>(0, c).copy_from(&col);
        }
        let err = DVector::from_column_slice((want - fr.pose.facing).as_slice());
        let Some(dq) = dls_step(&jac, &err, chain.ik.damping, chain.ik.step_clamp) else {
            break;
        };
        for (c, &i) in joints.iter().enumerate() {
            cur[i] += dq[c];
        }
        cur = clamp_to_limits(chain, &cur);
    }
    best.1
}
