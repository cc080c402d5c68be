//! Exhaustive search over short primitive plans, swept over gamma.
//!
//! `cargo run --release --example planner_sweep -- social_conversation`

use lamp_motion::kinematics::ChainSpec;
use lamp_motion::planner::{sweep, PlannerConfig};
use lamp_motion::scenarios::{load_scenario, Variant};

fn main() -> lamp_motion::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "remind_water".into());
    let chain = ChainSpec::default();
    let task = load_scenario(&name, Variant::E)?;
    let spec = task.expression.clone().unwrap_or_default();
    let rows = sweep(&chain, &task, &PlannerConfig::exhaustive(), &spec, &[0.0, 0.25, 0.5, 1.0, 2.0])?;
    println!("{name}: {} candidates", rows[0].1.evaluated);
    for (g, o) in rows {
        let labels: Vec<String> = o.plan.iter().map(|p| p.label()).collect();
        println!("gamma {g:<4} F={} E={:.3} {:?}", o.report.f, o.report.e, labels);
    }
    Ok(())
}
