//! Every primitive applied to one functional move, plus a composed plan.
//! The terminal sample never changes.

use lamp_motion::kinematics::ChainSpec;
use lamp_motion::planner::{functional_baseline, PlannerConfig};
use lamp_motion::primitives::{apply_primitive, compose, Anchor, PrimitiveInstance, PrimitiveKind};
use lamp_motion::scenarios::{load_scenario, Variant};

fn main() -> lamp_motion::Result<()> {
    let chain = ChainSpec::default();
    let task = load_scenario("remind_water", Variant::E)?;
    let base = functional_baseline(&chain, &task, &PlannerConfig::default())?.trajectory;
    println!("baseline: {:.2} s", base.duration());

    for kind in PrimitiveKind::ALL {
        let mut p = PrimitiveInstance::new(kind, Anchor::Post);
        if kind == PrimitiveKind::AttentionShift {
            p = p.target("user").with_text("to", "cup");
        } else if kind.allowed_params().contains(&"target") {
            p = p.target("cup");
        }
        match apply_primitive(&chain, &base, &p, &task.world) {
            Ok(t) => println!(
                "{:<40} {:>5.2} s  terminal kept: {}",
                p.label(),
                t.duration(),
                t.terminal() == base.terminal()
            ),
            Err(e) => println!("{:<40} {e}", p.label()),
        }
    }

    let plan = [
        PrimitiveInstance::new(PrimitiveKind::OrientToward, Anchor::Pre).target("cup"),
        PrimitiveInstance::new(PrimitiveKind::PauseInsert, Anchor::Pre).with("duration", 0.4),
        PrimitiveInstance::new(PrimitiveKind::Nod, Anchor::Post).with("amplitude", 0.2),
    ];
    let out = compose(&chain, &base, &plan, &task.world)?;
    println!("\ncomposed: {:.2} s", out.duration());
    for a in &out.annotations {
        println!("  [{:>4}..{:>4}] {}", a.start, a.end, a.primitive);
    }
    Ok(())
}
