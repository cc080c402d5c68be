//! Scoring a functional and a scripted expressive trajectory for the same task.

use lamp_motion::kinematics::ChainSpec;
use lamp_motion::planner::{plan_scripted, PlannerConfig};
use lamp_motion::scenarios::{load_scenario, Variant};
use lamp_motion::utility::UtilityReport;

fn show(name: &str, r: &UtilityReport) {
    println!("{name}: F={} E={:.4} total={:.4}", r.f, r.e, r.total);
    for (c, s) in &r.category_scores {
        println!("    {c:<10} score {s:.3}  weighted {:.4}", r.per_category[c]);
    }
}

fn main() -> lamp_motion::Result<()> {
    let chain = ChainSpec::default();
    let config = PlannerConfig::default().with_gamma(0.5);
    let task = load_scenario("photograph_light", Variant::E)?;
    let spec = task.expression.clone().unwrap_or_default();

    let f = plan_scripted(&chain, &task.function_variant(), &config, &spec, &[])?;
    let plan = task.scripted_plan.clone().unwrap_or_default();
    let e = plan_scripted(&chain, &task, &config, &spec, &plan)?;

    show("function", &f.report);
    show("expression", &e.report);
    Ok(())
}
