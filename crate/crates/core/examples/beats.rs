//! Wagging in time with music, at a steady 120 bpm and with a loose groove.

use lamp_motion::kinematics::{ChainSpec, JointVector};
use lamp_motion::primitives::align_to_beats;
use lamp_motion::trajectory::{Sample, Trajectory, WorldState, DEFAULT_DT};

fn extrema(traj: &Trajectory, joint: usize) -> Vec<f64> {
    let x: Vec<f64> = traj.samples.iter().map(|s| s.q[joint] - traj.samples[0].q[joint]).collect();
    let amp = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (1..x.len() - 1)
        .filter(|&i| x[i].abs() > 0.5 * amp)
        .filter(|&i| (x[i] - x[i - 1]) * (x[i + 1] - x[i]) < 0.0 || (x[i] == x[i + 1]) != (x[i] == x[i - 1]))
        .map(|i| traj.time(i))
        .collect()
}

fn main() -> lamp_motion::Result<()> {
    let chain = ChainSpec::default();
    let rest = Sample {
        q: JointVector::new([0.0, -0.15, 0.85, 0.0, 0.5, 0.0]),
        ..Default::default()
    };
    let still = Trajectory::stationary(DEFAULT_DT, rest, 50, WorldState::default())?;
    let wag = chain.gestures.wag[0].joint;

    let steady: Vec<f64> = (1..=8).map(|k| 0.5 * k as f64).collect();
    let out = align_to_beats(&chain, &still, &steady, 0.3)?;
    println!("120 bpm beats:   {steady:?}");
    println!("wag extrema at:  {:?}", extrema(&out, wag));

    let loose = [0.45, 0.98, 1.42, 2.05, 2.5, 3.1, 3.52];
    let out = align_to_beats(&chain, &still, &loose, 0.2)?;
    println!("irregular beats: {loose:?}");
    println!("wag extrema at:  {:?}", extrema(&out, wag));
    Ok(())
}
