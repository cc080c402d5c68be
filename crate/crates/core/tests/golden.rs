//! Digests of the scripted trajectory documents for every scenario.
//!
//! Bit-exact output depends on the platform's float math, so these are
//! pinned for x86_64 Linux. Regenerate with `LAMP_MOTION_BLESS=1`.

use std::collections::BTreeMap;
use std::path::Path;

use lamp_motion::cli::{plan_artifacts, PlanRequest};
use lamp_motion::kinematics::ChainSpec;
use lamp_motion::planner::PlannerConfig;
use lamp_motion::scenarios::{Mode, Variant, SCENARIOS};

fn current() -> BTreeMap<String, String> {
    let chain = ChainSpec::default();
    let planner = PlannerConfig::default();
    let mut out = BTreeMap::new();
    for name in SCENARIOS {
        for variant in [Variant::F, Variant::E] {
            let req = PlanRequest {
                scenario: name.to_string(),
                variant,
                gamma: 1.0,
                seed: 0,
                mode: Mode::Scripted,
                overrides: BTreeMap::new(),
            };
            let art = plan_artifacts(&chain, &planner, &req).unwrap();
            out.insert(format!("{name}_{variant:?}"), art.metrics.trajectory_digest);
        }
    }
    out
}

#[test]
fn scripted_documents_match_golden_digests() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/digests.json");
    let now = current();
    if std::env::var_os("LAMP_MOTION_BLESS").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(&now).unwrap() + "\n").unwrap();
        return;
    }
    if !cfg!(all(target_arch = "x86_64", target_os = "linux")) {
        eprintln!("golden digests are pinned for x86_64 linux; skipping");
        return;
    }
    let text = std::fs::read_to_string(&path).expect("run once with LAMP_MOTION_BLESS=1");
    let golden: BTreeMap<String, String> = serde_json::from_str(&text).unwrap();
    assert_eq!(golden, now);
}
