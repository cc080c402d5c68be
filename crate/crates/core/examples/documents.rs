//! Writing a plan to disk as versioned JSON and reading it back.

use lamp_motion::cli::{plan_artifacts, PlanRequest};
use lamp_motion::io::{MetricsReport, TrajectoryDocument};
use lamp_motion::kinematics::ChainSpec;
use lamp_motion::planner::PlannerConfig;
use lamp_motion::scenarios::{Mode, Variant};

fn main() -> lamp_motion::Result<()> {
    let chain = ChainSpec::default();
    let req = PlanRequest {
        scenario: "social_conversation".into(),
        variant: Variant::E,
        gamma: 0.5,
        seed: 7,
        mode: Mode::Scripted,
        overrides: Default::default(),
    };
    let art = plan_artifacts(&chain, &PlannerConfig::default(), &req)?;
    let dir = std::env::temp_dir().join("lamp-motion-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("social_conversation_E.trajectory.json");
    std::fs::write(&path, &art.trajectory_json)?;
    std::fs::write(dir.join("social_conversation_E.metrics.json"), art.metrics.to_json()?)?;

    let doc = TrajectoryDocument::from_json(&std::fs::read_to_string(&path)?)?;
    let traj = doc.trajectory()?;
    traj.check(&chain)?;
    println!("{} samples at dt {} from {}", traj.len(), traj.dt, path.display());
    println!("re-serialized identically: {}", doc.to_json()? == art.trajectory_json);

    let m = MetricsReport::from_json(&art.metrics.to_json()?)?;
    println!("digest {}", m.trajectory_digest);
    Ok(())
}
