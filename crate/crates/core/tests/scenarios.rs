mod common;

use common::{extrema, fraction_near};
use lamp_motion::kinematics::{forward_kinematics, ChainSpec};
use lamp_motion::planner::PlannerConfig;
use lamp_motion::scenarios::{build_pair, load_scenario, scenario_infos, Agency, Goal, Mode, Orientation, Variant, SCENARIOS};
use lamp_motion::utility::attention_score;

#[test]
fn labels() {
    let infos = scenario_infos();
    assert_eq!(infos.len(), 6);
    let get = |id: &str| infos.iter().find(|i| i.id == id).unwrap();
    assert_eq!(get("photograph_light").agency, Agency::Reactive);
    assert_eq!(get("photograph_light").orientation, Orientation::FunctionOriented);
    assert_eq!(get("remind_water").agency, Agency::Proactive);
    assert_eq!(get("remind_water").orientation, Orientation::SocialOriented);
    assert_eq!(get("play_music").orientation, Orientation::SocialOriented);
    assert_eq!(get("social_conversation").orientation, Orientation::SocialOriented);
}

#[test]
fn remind_water_points_at_the_cup_with_light() {
    let chain = ChainSpec::default();
    let task = load_scenario("remind_water", Variant::F).unwrap();
    assert!(task.goal_tool.light_on);
    let pair = build_pair(&chain, "remind_water", &PlannerConfig::default(), Mode::Scripted).unwrap();
    let end = pair.function.trajectory.terminal();
    let cup = task.world.resolve("cup").unwrap();
    assert!(attention_score(&chain, &end.q, &cup) > 0.99);
    assert!(end.tool.light_on);
}

#[test]
fn play_music_function_variant_does_not_move() {
    let chain = ChainSpec::default();
    let task = load_scenario("play_music", Variant::F).unwrap();
    assert!(task.scripted_plan.is_none());
    assert!(matches!(&task.goal, Goal::Joints { q } if *q == task.start));
    let pair = build_pair(&chain, "play_music", &PlannerConfig::default(), Mode::Scripted).unwrap();
    let f = &pair.function.trajectory;
    assert!(f.samples.iter().all(|s| s.q == task.start));
    let beats = task.world.beat_times.clone().unwrap();
    let e = &pair.expression.trajectory;
    let wag = chain.gestures.wag[0].joint;
    assert!(fraction_near(&extrema(e, wag), &beats, 0.06) >= 0.9);
}

#[test]
fn photograph_light_looks_back_at_the_user() {
    let chain = ChainSpec::default();
    let pair = build_pair(&chain, "photograph_light", &PlannerConfig::default(), Mode::Scripted).unwrap();
    let has = |t: &lamp_motion::trajectory::Trajectory| t.annotations.iter().any(|a| a.primitive.starts_with("OrientToward(target=user)"));
    assert!(has(&pair.expression.trajectory));
    assert!(!has(&pair.function.trajectory));
    // the head actually turns toward the user at some point
    let user = load_scenario("photograph_light", Variant::E).unwrap().world.resolve("user").unwrap();
    let peak = pair
        .expression
        .trajectory
        .samples
        .iter()
        .map(|s| attention_score(&chain, &s.q, &user))
        .fold(0.0, f64::max);
    assert!(peak > 0.9);
}

#[test]
fn failure_indication_reaches_the_limit() {
    let chain = ChainSpec::default();
    let pair = build_pair(&chain, "failure_indication", &PlannerConfig::default(), Mode::Scripted).unwrap();
    assert!(pair.function.unreachable.is_some());
    assert_eq!(pair.function.report.f, 0.0);
    let end = forward_kinematics(&chain, &pair.function.trajectory.terminal().q).position;
    assert!(end.norm() > 0.6, "best effort should stretch out, got {}", end.norm());
}

#[test]
fn pairs_hold_in_scripted_mode() {
    let chain = ChainSpec::default();
    for gamma in [0.0, 1.0] {
        let config = PlannerConfig::default().with_gamma(gamma);
        for name in SCENARIOS {
            let p = build_pair(&chain, name, &config, Mode::Scripted).unwrap();
            assert!(p.checks.all_hold(gamma), "{name}: {:?}", p.checks);
            assert!(p.checks.expressive_dominates, "{name}");
        }
    }
}
