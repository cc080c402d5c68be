mod common;

use common::{home, random_q, rng};
use lamp_motion::kinematics::{ChainSpec, JointVector, DOF};
use lamp_motion::primitives::{apply_primitive, Anchor, PrimitiveInstance, PrimitiveKind};
use lamp_motion::trajectory::{interpolate, kinematic_features, resample, Trajectory, WorldState, DEFAULT_DT};
use proptest::prelude::*;

/// Closed-form duration of the trapezoid for a move of `d` (unit path) at
/// peak path speed `v` and ramp time `ramp`.
fn trapezoid_duration(v: f64, ramp: f64) -> f64 {
    if v * ramp <= 1.0 {
        1.0 / v + ramp
    } else {
        // triangle: 1 = a * tr^2 with a = v / ramp
        2.0 * (ramp / v).sqrt()
    }
}

#[test]
fn interpolate_matches_trapezoid_oracle() {
    let chain = ChainSpec::default();
    let mut r = rng(10);
    for _ in 0..50 {
        let a = random_q(&chain, &mut r);
        let b = random_q(&chain, &mut r);
        let t = interpolate(&chain, &a, &b, DEFAULT_DT, 0.6).unwrap();
        let caps = chain.max_speeds();
        let v = (0..DOF)
            .map(|j| 0.6 * caps[j] / (b[j] - a[j]).abs())
            .fold(f64::INFINITY, f64::min);
        let expect = trapezoid_duration(v, chain.ramp_time);
        assert!(t.duration() >= expect - 1e-9 && t.duration() < expect + DEFAULT_DT + 1e-9);
        assert_eq!(t.samples[0].q, a);
        assert_eq!(t.terminal().q, b);
        t.check(&chain).unwrap();
        // per-joint monotone
        for j in 0..DOF {
            let dir = (b[j] - a[j]).signum();
            assert!(t.samples.windows(2).all(|w| (w[1].q[j] - w[0].q[j]) * dir >= -1e-15));
        }
        assert!(t.annotations.is_empty());
    }
}

#[test]
fn interpolate_to_itself_is_one_sample() {
    let chain = ChainSpec::default();
    let t = interpolate(&chain, &home(), &home(), DEFAULT_DT, 0.6).unwrap();
    assert_eq!(t.len(), 1);
    assert!(interpolate(&chain, &home(), &home(), 0.0, 0.6).is_err());
    assert!(interpolate(&chain, &home(), &home(), DEFAULT_DT, 1.5).is_err());
    let outside = JointVector::new([9.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert!(interpolate(&chain, &home(), &outside, DEFAULT_DT, 0.6).is_err());
}

#[test]
fn pause_insert_is_detected() {
    let chain = ChainSpec::default();
    let b = JointVector::new([0.5, 0.1, 0.6, 0.0, 0.7, 0.0]);
    let base = interpolate(&chain, &home(), &b, DEFAULT_DT, 0.6).unwrap();
    let p = PrimitiveInstance::new(PrimitiveKind::PauseInsert, Anchor::Mid).with("duration", 0.5);
    let out = apply_primitive(&chain, &base, &p, &WorldState::default()).unwrap();
    let f = kinematic_features(&chain, &out).unwrap();
    let long: Vec<_> = f.pauses.iter().filter(|p| p.duration >= 0.4).collect();
    assert_eq!(long.len(), 1, "{:?}", f.pauses);
    assert!((long[0].duration - 0.5).abs() <= DEFAULT_DT + 1e-9, "{:?}", long[0]);
}

#[test]
fn features_of_a_still_trajectory() {
    let chain = ChainSpec::default();
    let t = Trajectory::stationary(DEFAULT_DT, Default::default(), 26, WorldState::default()).unwrap();
    let f = kinematic_features(&chain, &t).unwrap();
    assert_eq!(f.path_length, 0.0);
    assert_eq!(f.pauses.len(), 1);
    assert!((f.pauses[0].duration - 0.5).abs() < 1e-12);
}

fn max_joint_error(a: &Trajectory, b: &Trajectory) -> f64 {
    // compare b against a linearly interpolated at b's sample times
    b.samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let x = b.time(k) / a.dt;
            let i = (x.floor() as usize).min(a.len() - 1);
            let q = if i + 1 < a.len() {
                a.samples[i].q.lerp(&a.samples[i + 1].q, x - i as f64)
            } else {
                a.samples[i].q
            };
            q.max_abs_diff(&s.q)
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resample_is_bounded_and_keeps_endpoints(seed in any::<u64>(), new_dt in 0.005f64..0.05) {
        let chain = ChainSpec::default();
        let mut r = rng(seed);
        let t = interpolate(&chain, &random_q(&chain, &mut r), &random_q(&chain, &mut r), DEFAULT_DT, 0.8).unwrap();
        let u = resample(&t, new_dt).unwrap();
        prop_assert_eq!(&u.samples[0], &t.samples[0]);
        prop_assert_eq!(u.terminal(), t.terminal());
        prop_assert!(u.duration() >= t.duration() - 1e-9);
        prop_assert!(u.duration() < t.duration() + new_dt);
        // linear interpolation of a polyline reproduces it, except the final
        // snapped sample, which can sit at most one original step away
        let caps = chain.max_speeds();
        let step = caps.iter().cloned().fold(0.0, f64::max) * t.dt;
        prop_assert!(max_joint_error(&t, &u) <= step + 1e-9);
        // every resampled q stays between the bounds of the original
        for j in 0..DOF {
            let lo = t.samples.iter().map(|s| s.q[j]).fold(f64::INFINITY, f64::min);
            let hi = t.samples.iter().map(|s| s.q[j]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(u.samples.iter().all(|s| s.q[j] >= lo - 1e-12 && s.q[j] <= hi + 1e-12));
        }
    }
}
