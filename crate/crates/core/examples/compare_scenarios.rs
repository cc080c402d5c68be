//! Function versus expression for all six built-in tasks.
//!
//! `cargo run --release --example compare_scenarios -- searched`

use lamp_motion::kinematics::ChainSpec;
use lamp_motion::planner::PlannerConfig;
use lamp_motion::scenarios::{build_pair, Mode, SCENARIOS};

fn main() -> lamp_motion::Result<()> {
    let mode: Mode = std::env::args().nth(1).as_deref().unwrap_or("scripted").parse()?;
    let chain = ChainSpec::default();
    let config = PlannerConfig::default().with_gamma(0.5);
    println!("{:<20} {:>4} {:>7} {:>7} {:>6} {:>6}  ok", "scenario", "F", "E(F)", "E(E)", "T(F)", "T(E)");
    for name in SCENARIOS {
        let p = build_pair(&chain, name, &config, mode)?;
        println!(
            "{:<20} {:>4} {:>7.3} {:>7.3} {:>6.2} {:>6.2}  {}",
            name,
            p.function.report.f,
            p.function.report.e,
            p.expression.report.e,
            p.function.trajectory.duration(),
            p.expression.trajectory.duration(),
            p.checks.all_hold(config.gamma)
        );
        let labels: Vec<String> = p.expression.plan.iter().map(|x| x.label()).collect();
        println!("    {}", labels.join(" + "));
    }
    Ok(())
}
