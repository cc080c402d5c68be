#![allow(dead_code, clippy::needless_range_loop)]

use lamp_motion::kinematics::{ChainSpec, JointVector, DOF};
use lamp_motion::planner::GridMDP;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type M4 = [[f64; 4]; 4];

fn mul(a: &M4, b: &M4) -> M4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

// Rodrigues: I + sin(t) K + (1 - cos(t)) K^2
fn rot(axis: [f64; 3], t: f64) -> M4 {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
    let k = [[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]];
    let mut m = [[0.0; 4]; 4];
    m[3][3] = 1.0;
    for i in 0..3 {
        for j in 0..3 {
            let k2: f64 = (0..3).map(|l| k[i][l] * k[l][j]).sum();
            m[i][j] = if i == j { 1.0 } else { 0.0 } + t.sin() * k[i][j] + (1.0 - t.cos()) * k2;
        }
    }
    m
}

fn trans(v: [f64; 3]) -> M4 {
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        m[i][i] = 1.0;
    }
    m[0][3] = v[0];
    m[1][3] = v[1];
    m[2][3] = v[2];
    m
}

/// Head position and facing by composing homogeneous transforms.
pub fn oracle_fk(chain: &ChainSpec, q: &JointVector) -> ([f64; 3], [f64; 3]) {
    let mut t = trans([0.0; 3]);
    for (i, j) in chain.joints.iter().enumerate() {
        t = mul(&t, &rot(j.axis, q[i]));
        t = mul(&t, &trans(j.offset));
    }
    t = mul(&t, &trans(chain.head_offset));
    let f = chain.forward_axis;
    let facing = [0, 1, 2].map(|r| (0..3).map(|c| t[r][c] * f[c]).sum::<f64>());
    ([t[0][3], t[1][3], t[2][3]], facing)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn home() -> JointVector {
    JointVector::new([0.0, -0.15, 0.85, 0.0, 0.5, 0.0])
}

pub fn random_q(chain: &ChainSpec, rng: &mut impl Rng) -> JointVector {
    let mut q = [0.0; DOF];
    for (i, j) in chain.joints.iter().enumerate() {
        q[i] = rng.random_range(j.lower..=j.upper);
    }
    JointVector::new(q)
}

/// Scores are multiples of 1/64 so sums compare exactly.
pub fn random_grid(rng: &mut impl Rng, dims: Vec<usize>, horizon: usize) -> GridMDP {
    let cells: usize = dims.iter().product();
    let pick = |rng: &mut dyn rand::RngCore, d: &[usize]| d.iter().map(|n| rng.random_range(0..*n)).collect::<Vec<_>>();
    let start = pick(rng, &dims);
    let goal = pick(rng, &dims);
    let scores = (0..cells).map(|_| rng.random_range(0..=64) as f64 / 64.0).collect();
    GridMDP {
        dims,
        horizon,
        start,
        goal,
        scores,
    }
}

/// Times (s) of local extrema of `joint`'s offset from its first value,
/// ignoring wiggles below half the peak offset.
pub fn extrema(traj: &lamp_motion::trajectory::Trajectory, joint: usize) -> Vec<f64> {
    let x: Vec<f64> = traj.samples.iter().map(|s| s.q[joint] - traj.samples[0].q[joint]).collect();
    let amp = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if amp == 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < x.len() {
        // walk over flat runs so a plateau counts once, at its middle
        let mut j = i;
        while j + 1 < x.len() && x[j + 1] == x[i] {
            j += 1;
        }
        if j + 1 < x.len() && x[i].abs() > 0.5 * amp {
            let before = x[i] - x[i - 1];
            let after = x[j + 1] - x[j];
            if before * after < 0.0 {
                out.push(traj.time((i + j) / 2));
            }
        }
        i = j + 1;
    }
    out
}

/// Fraction of `times` within `tol` of some beat.
pub fn fraction_near(times: &[f64], beats: &[f64], tol: f64) -> f64 {
    if times.is_empty() {
        return 0.0;
    }
    let hits = times
        .iter()
        .filter(|t| beats.iter().any(|b| (*t - b).abs() <= tol + 1e-9))
        .count();
    hits as f64 / times.len() as f64
}
