//! Interpolating a move, resampling it and reading off head features.

use lamp_motion::kinematics::{ChainSpec, JointVector};
use lamp_motion::trajectory::{interpolate, kinematic_features, resample, DEFAULT_DT};

fn main() -> lamp_motion::Result<()> {
    let chain = ChainSpec::default();
    let a = JointVector::new([0.0, -0.15, 0.85, 0.0, 0.5, 0.0]);
    let b = JointVector::new([0.6, 0.2, 0.6, 0.0, 0.9, 0.0]);

    let traj = interpolate(&chain, &a, &b, DEFAULT_DT, 0.6)?;
    traj.check(&chain)?;
    println!("{} samples, {:.2} s", traj.len(), traj.duration());

    let fine = resample(&traj, 0.005)?;
    println!("resampled at 5 ms: {} samples", fine.len());

    let f = kinematic_features(&chain, &traj)?;
    let peak = f.speed.iter().cloned().fold(0.0, f64::max);
    println!("path {:.3} m, chord {:.3} m, peak head speed {peak:.3} m/s", f.path_length, f.chord);
    println!("pauses: {:?}", f.pauses);
    Ok(())
}
