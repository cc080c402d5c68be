//! Forward and inverse kinematics on the default desk-lamp chain.
//!
//! Run with `cargo run --example kinematics`.

use lamp_motion::kinematics::{
    forward_kinematics, inverse_kinematics, reachable, ChainSpec, JointVector, PoseGoal,
};
use nalgebra::Vector3;

fn main() -> lamp_motion::Result<()> {
    let chain = ChainSpec::default();
    let home = JointVector::new([0.0, -0.15, 0.85, 0.0, 0.5, 0.0]);
    let pose = forward_kinematics(&chain, &home);
    println!("home head at {:.3?}, facing {:.3?}", pose.position.as_slice(), pose.facing.as_slice());

    // position only
    let target = Vector3::new(0.3, 0.2, 0.32);
    let q = inverse_kinematics(&chain, &PoseGoal::position(target), &home, 1e-4)?;
    let err = (forward_kinematics(&chain, &q).position - target).norm();
    println!("ik -> {:.3?} (residual {err:.2e} m)", q.0);

    // position and facing
    let subject = Vector3::new(0.45, 0.35, 0.0);
    let goal = PoseGoal::with_facing(target, subject - target);
    let q = inverse_kinematics(&chain, &goal, &home, 1e-4)?;
    println!("ik facing subject -> {:.3?}", q.0);

    // reach along a ray from the base
    let dir = Vector3::new(1.0, 0.5, 0.2).normalize();
    for r in [0.3, 0.6, 0.75, 0.9] {
        println!("r = {r:.2} m: reachable = {}", reachable(&chain, &(dir * r)));
    }

    match inverse_kinematics(&chain, &PoseGoal::position(dir * 2.0), &home, 1e-4) {
        Err(e) if e.is_unreachable() => println!("2 m away: {e}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
