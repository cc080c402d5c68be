mod common;

use common::{home, oracle_fk, random_q, rng};
use lamp_motion::kinematics::{
    clamp_to_limits, facing_error, forward_kinematics, inverse_kinematics, look_at, reachable, ChainSpec, JointVector,
    PoseGoal,
};
use lamp_motion::Error;
use nalgebra::Vector3;
use proptest::prelude::*;

#[test]
fn fk_matches_transform_composition() {
    let chain = ChainSpec::default();
    let mut r = rng(1);
    for _ in 0..100 {
        let q = random_q(&chain, &mut r);
        let pose = forward_kinematics(&chain, &q);
        let (p, f) = oracle_fk(&chain, &q);
        for k in 0..3 {
            assert!((pose.position[k] - p[k]).abs() < 1e-9, "{q:?}");
            assert!((pose.facing[k] - f[k]).abs() < 1e-9, "{q:?}");
        }
    }
}

#[test]
fn fk_at_zero_is_stacked_offsets() {
    let chain = ChainSpec::default();
    let pose = forward_kinematics(&chain, &JointVector::ZERO);
    let sum: Vector3<f64> = chain.joints.iter().map(|j| Vector3::from(j.offset)).sum();
    assert!((pose.position - sum).norm() < 1e-12);
    assert!((pose.facing - Vector3::x()).norm() < 1e-12);
}

fn round_trip(chain: &ChainSpec, target: &Vector3<f64>) -> Option<f64> {
    let goal = PoseGoal::position(*target);
    std::iter::once(home())
        .chain(chain.canonical_seeds())
        .find_map(|seed| inverse_kinematics(chain, &goal, &seed, 1e-4).ok())
        .map(|q| (forward_kinematics(chain, &q).position - target).norm())
}

#[test]
fn ik_round_trip_on_reachable_goals() {
    let chain = ChainSpec::default();
    let mut r = rng(2);
    let mut ok = 0;
    for _ in 0..200 {
        let target = forward_kinematics(&chain, &random_q(&chain, &mut r)).position;
        if round_trip(&chain, &target).is_some_and(|e| e < 1e-3) {
            ok += 1;
        }
    }
    println!("{ok}/200 within 1e-3 m");
    assert!(ok >= 198, "{ok}/200 within 1e-3 m");
}

#[test]
fn ik_with_facing() {
    let chain = ChainSpec::default();
    let target = Vector3::new(0.3, 0.2, 0.32);
    let facing = Vector3::new(0.15, 0.15, -0.32);
    let q = inverse_kinematics(&chain, &PoseGoal::with_facing(target, facing), &home(), 1e-4).unwrap();
    let pose = forward_kinematics(&chain, &q);
    assert!((pose.position - target).norm() <= 1e-4);
    assert!(facing_error(&pose.facing, &facing) <= chain.ik.facing_tolerance);
    assert!(chain.within_limits(&q));
}

#[test]
fn unreachable_carries_best_effort() {
    let chain = ChainSpec::default();
    let far = Vector3::new(1.5, 0.0, 0.3);
    match inverse_kinematics(&chain, &PoseGoal::position(far), &home(), 1e-4) {
        Err(Error::Unreachable { residual, best_effort }) => {
            assert!(chain.within_limits(&best_effort));
            // the arm beyond the base column can reach a sphere around the shoulder
            let shoulder = Vector3::from(chain.joints[0].offset);
            let radius = chain.reach() - shoulder.norm();
            let gap = (far - shoulder).norm() - radius;
            assert!(residual >= gap - 1e-9, "{residual} vs {gap}");
            assert!(residual < gap + 0.01, "{residual} vs {gap}");
        }
        other => panic!("expected Unreachable, got {other:?}"),
    }
}

#[test]
fn ik_rejects_bad_inputs() {
    let chain = ChainSpec::default();
    let goal = PoseGoal::position(Vector3::new(0.3, 0.0, 0.3));
    assert!(matches!(inverse_kinematics(&chain, &goal, &home(), 0.0), Err(Error::InvalidInput(_))));
    let nan = PoseGoal::position(Vector3::new(f64::NAN, 0.0, 0.3));
    assert!(matches!(inverse_kinematics(&chain, &nan, &home(), 1e-4), Err(Error::InvalidInput(_))));
}

#[test]
fn reachable_fuzz_and_ray_sweep() {
    let chain = ChainSpec::default();
    let mut r = rng(3);
    let mut hits = 0;
    for _ in 0..500 {
        let p = forward_kinematics(&chain, &random_q(&chain, &mut r)).position;
        hits += reachable(&chain, &p) as usize;
        assert!(p.norm() <= chain.reach() + 1e-9);
    }
    assert!(hits >= 495, "{hits}/500 FK images reported reachable");

    // once a ray leaves the reach sphere it never comes back
    let dir = Vector3::new(0.7, -0.3, 0.4).normalize();
    let mut inside = true;
    for k in 1..=40 {
        let p = dir * (k as f64 * 0.025);
        let now = reachable(&chain, &p);
        if p.norm() > chain.reach() {
            assert!(!now);
        }
        if !inside {
            assert!(!now || p.norm() <= chain.reach(), "reachable again at {}", p.norm());
        }
        inside &= now;
    }
    assert!(!reachable(&chain, &Vector3::new(f64::INFINITY, 0.0, 0.0)));
}

#[test]
fn look_at_faces_target() {
    let chain = ChainSpec::default();
    let target = Vector3::new(0.65, -0.35, 0.4);
    let gaze = chain.gestures.gaze.clone();
    let q = look_at(&chain, &home(), &target, &gaze);
    let pose = forward_kinematics(&chain, &q);
    assert!(facing_error(&pose.facing, &(target - pose.position)) < 0.05);
    for j in 0..6 {
        if !gaze.contains(&j) {
            assert_eq!(q[j], home()[j]);
        }
    }
}

proptest! {
    #[test]
    fn clamp_is_idempotent_and_inside(q in proptest::array::uniform6(-5.0f64..5.0)) {
        let chain = ChainSpec::default();
        let c = clamp_to_limits(&chain, &JointVector::new(q));
        prop_assert!(chain.within_limits(&c));
        prop_assert_eq!(clamp_to_limits(&chain, &c), c);
    }

    #[test]
    fn head_stays_inside_reach_sphere(seed in any::<u64>()) {
        let chain = ChainSpec::default();
        let q = random_q(&chain, &mut rng(seed));
        prop_assert!(forward_kinematics(&chain, &q).position.norm() <= chain.reach() + 1e-12);
        let f = forward_kinematics(&chain, &q).facing;
        prop_assert!((f.norm() - 1.0).abs() < 1e-12);
    }
}
