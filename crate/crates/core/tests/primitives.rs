mod common;

use common::{extrema, fraction_near, home, rng};
use lamp_motion::kinematics::{forward_kinematics, ChainSpec, JointVector};
use lamp_motion::planner::{functional_baseline, PlannerConfig};
use lamp_motion::primitives::{align_to_beats, apply_primitive, compose, Anchor, PrimitiveInstance, PrimitiveKind};
use lamp_motion::scenarios::{load_scenario, Variant, SCENARIOS};
use lamp_motion::trajectory::{interpolate, Sample, Trajectory, WorldState, DEFAULT_DT};
use lamp_motion::utility::attention_score;
use lamp_motion::Error;
use proptest::prelude::*;
use rand::Rng;

fn still(n: usize) -> Trajectory {
    let s = Sample {
        q: home(),
        ..Default::default()
    };
    Trajectory::stationary(DEFAULT_DT, s, n, WorldState::default()).unwrap()
}

fn desk() -> WorldState {
    load_scenario("remind_water", Variant::E).unwrap().world
}

fn moving() -> Trajectory {
    let chain = ChainSpec::default();
    let b = JointVector::new([0.5, 0.1, 0.6, 0.0, 0.7, 0.0]);
    let mut t = interpolate(&chain, &home(), &b, DEFAULT_DT, 0.6).unwrap();
    t.world = desk();
    t
}

#[test]
fn pauses_compose_additively() {
    let chain = ChainSpec::default();
    let base = moving();
    let plan = [
        PrimitiveInstance::new(PrimitiveKind::PauseInsert, Anchor::Mid).with("duration", 0.3),
        PrimitiveInstance::new(PrimitiveKind::PauseInsert, Anchor::Pre).with("duration", 0.2),
    ];
    let out = compose(&chain, &base, &plan, &base.world).unwrap();
    assert!((out.duration() - base.duration() - 0.5).abs() < 1e-9);
    assert_eq!(out.terminal(), base.terminal());
    assert_eq!(out.annotations.len(), 2);
}

#[test]
fn orient_toward_cup_reaches_attention() {
    let chain = ChainSpec::default();
    let base = moving();
    let cup = base.world.resolve("cup").unwrap();
    let p = PrimitiveInstance::new(PrimitiveKind::OrientToward, Anchor::Pre).target("cup");
    let out = apply_primitive(&chain, &base, &p, &base.world).unwrap();
    let peak = out
        .samples
        .iter()
        .map(|s| attention_score(&chain, &s.q, &cup))
        .fold(0.0, f64::max);
    assert!(peak > 0.9, "peak attention {peak}");
    let before = attention_score(&chain, &base.samples[0].q, &cup);
    assert!(peak > before);
}

#[test]
fn zero_amplitude_and_zero_duration_are_identities() {
    let chain = ChainSpec::default();
    let base = moving();
    for kind in [
        PrimitiveKind::Nod,
        PrimitiveKind::Shake,
        PrimitiveKind::Wag,
        PrimitiveKind::Lean,
        PrimitiveKind::LowerHead,
        PrimitiveKind::Stretch,
        PrimitiveKind::JerkPulse,
    ] {
        let p = PrimitiveInstance::new(kind, Anchor::Mid).with("amplitude", 0.0);
        let out = apply_primitive(&chain, &base, &p, &base.world).unwrap();
        assert!(out.same_motion(&base), "{kind}");
    }
    // the duration -> 0 limit
    let p = PrimitiveInstance::new(PrimitiveKind::PauseInsert, Anchor::Mid).with("duration", 1e-4);
    assert!(apply_primitive(&chain, &base, &p, &base.world).unwrap().same_motion(&base));
}

#[test]
fn errors_are_typed() {
    let chain = ChainSpec::default();
    let base = moving();
    let p = PrimitiveInstance::new(PrimitiveKind::OrientToward, Anchor::Pre).target("piano");
    assert!(matches!(apply_primitive(&chain, &base, &p, &base.world), Err(Error::TargetMissing(_))));
    let p = PrimitiveInstance::new(PrimitiveKind::Nod, Anchor::Pre).with("cycles", -1.0);
    assert!(matches!(apply_primitive(&chain, &base, &p, &base.world), Err(Error::InvalidInput(_))));
    let plan = [
        PrimitiveInstance::new(PrimitiveKind::Nod, Anchor::Pre),
        PrimitiveInstance::new(PrimitiveKind::Avoid, Anchor::Post).target("piano"),
    ];
    match compose(&chain, &base, &plan, &base.world) {
        Err(Error::PlanStep { index: 1, source }) => assert!(matches!(*source, Error::TargetMissing(_))),
        other => panic!("{other:?}"),
    }
}

#[test]
fn beats_at_120_bpm() {
    let chain = ChainSpec::default();
    let beats: Vec<f64> = (1..=8).map(|k| 0.5 * k as f64).collect();
    let out = align_to_beats(&chain, &still(10), &beats, 0.2).unwrap();
    out.check(&chain).unwrap();
    let ext = extrema(&out, chain.gestures.wag[0].joint);
    assert_eq!(ext.len(), beats.len(), "{ext:?}");
    for w in ext.windows(2) {
        assert!((w[1] - w[0] - 0.5).abs() <= DEFAULT_DT + 1e-9, "{ext:?}");
    }
    assert_eq!(fraction_near(&ext, &beats, 0.06), 1.0);
}

#[test]
fn irregular_beats() {
    let chain = ChainSpec::default();
    let beats = [0.45, 0.98, 1.42, 2.05, 2.5, 3.1, 3.52, 4.1];
    let out = align_to_beats(&chain, &still(10), &beats, 0.2).unwrap();
    let ext = extrema(&out, chain.gestures.wag[0].joint);
    assert!(fraction_near(&ext, &beats, 0.06) >= 0.9, "{ext:?}");
}

#[test]
fn empty_beats_are_identity() {
    let chain = ChainSpec::default();
    assert_eq!(align_to_beats(&chain, &still(5), &[], 0.2).unwrap(), still(5));
    assert!(align_to_beats(&chain, &still(5), &[1.0, 0.5], 0.2).is_err());
}

fn random_instance(r: &mut impl Rng, world: &WorldState) -> PrimitiveInstance {
    let kind = PrimitiveKind::ALL[r.random_range(0..PrimitiveKind::ALL.len())];
    let anchor = match r.random_range(0..5) {
        0 => Anchor::Pre,
        1 => Anchor::Mid,
        2 => Anchor::Post,
        3 => Anchor::At(r.random_range(0.0..2.0)),
        _ => Anchor::BeforeTerminal(r.random_range(0.0..1.0)),
    };
    let names: Vec<&String> = world.objects.keys().collect();
    let mut p = PrimitiveInstance::new(kind, anchor);
    for key in kind.allowed_params() {
        if r.random_bool(0.5) {
            continue;
        }
        p = match *key {
            "target" | "to" => p.with_text(key, if r.random_bool(0.3) { "user" } else { names[r.random_range(0..names.len())] }),
            "amplitude" => p.with(key, r.random_range(0.0..0.3)),
            "cycles" => p.with(key, r.random_range(1..4) as f64),
            "duration" => p.with(key, r.random_range(0.1..1.5)),
            "factor" => p.with(key, r.random_range(0.3..1.5)),
            "intensity" => p.with(key, r.random_range(0.0..1.0)),
            "standoff" => p.with(key, r.random_range(0.03..0.2)),
            _ => p,
        };
    }
    if matches!(kind, PrimitiveKind::OrientToward | PrimitiveKind::PointAwayFrom | PrimitiveKind::Approach | PrimitiveKind::Avoid | PrimitiveKind::AttentionShift)
        && p.text("target").is_err()
    {
        p = p.target("user");
    }
    if kind == PrimitiveKind::AttentionShift && p.text("to").is_err() {
        p = p.with_text("to", "cup");
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// Every successful application keeps the terminal sample, stays inside
    /// the limits and records exactly one new annotation.
    #[test]
    fn terminal_is_preserved(seed in any::<u64>(), which in 0usize..6) {
        let chain = ChainSpec::default();
        let task = load_scenario(SCENARIOS[which], Variant::E).unwrap();
        let base = functional_baseline(&chain, &task, &PlannerConfig::default()).unwrap().trajectory;
        let mut r = rng(seed);
        let p = random_instance(&mut r, &task.world);
        match apply_primitive(&chain, &base, &p, &task.world) {
            Ok(out) => {
                prop_assert_eq!(out.terminal(), base.terminal(), "{}", p.label());
                prop_assert!(out.check(&chain).is_ok(), "{}", p.label());
                prop_assert_eq!(out.annotations.len(), base.annotations.len() + 1);
                let a = out.annotations.last().unwrap();
                prop_assert!(a.end < out.len());
                prop_assert_eq!(&a.primitive, &p.label());
            }
            Err(e) => prop_assert!(matches!(e, Error::Infeasible(_) | Error::InvalidInput(_)), "{}: {e}", p.label()),
        }
    }
}

#[test]
fn head_moves_when_nodding() {
    let chain = ChainSpec::default();
    let base = still(5);
    let p = PrimitiveInstance::new(PrimitiveKind::Nod, Anchor::Post);
    let out = apply_primitive(&chain, &base, &p, &desk()).unwrap();
    let start = forward_kinematics(&chain, &base.samples[0].q).position;
    let far = out
        .samples
        .iter()
        .map(|s| (forward_kinematics(&chain, &s.q).position - start).norm())
        .fold(0.0, f64::max);
    assert!(far > 0.005);
}
