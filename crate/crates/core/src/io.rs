//! Versioned JSON documents: chain configs, planner configs, trajectories
//! and metrics reports.
//!
//! Every document carries `format` and `version` fields. Loaders reject
//! other formats and any major version other than 1. Floats are written
//! with shortest round-trip formatting, so save/load/save is byte-exact.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kinematics::{ChainSpec, JointVector, DOF};
use crate::planner::PlannerConfig;
use crate::scenarios::{Mode, Variant};
use crate::trajectory::{Annotation, Sample, ToolState, Trajectory, WorldState};
use crate::utility::UtilityReport;

pub const CHAIN_FORMAT: &str = "lamp-motion/chain";
pub const PLANNER_FORMAT: &str = "lamp-motion/planner";
pub const TRAJECTORY_FORMAT: &str = "lamp-motion/trajectory";
pub const METRICS_FORMAT: &str = "lamp-motion/metrics";
pub const VERSION: &str = "1.0";
const MAJOR: &str = "1";

/// Environment variable naming the default config directory.
pub const CONFIG_DIR_ENV: &str = "LAMP_MOTION_CONFIG_DIR";

pub(crate) fn format_name(expected: &str) -> &'static str {
    match expected {
        CHAIN_FORMAT => CHAIN_FORMAT,
        PLANNER_FORMAT => PLANNER_FORMAT,
        TRAJECTORY_FORMAT => TRAJECTORY_FORMAT,
        METRICS_FORMAT => METRICS_FORMAT,
        _ => crate::scenarios::TASK_FORMAT,
    }
}

pub fn check_version(expected: &str, format: &str, version: &str) -> Result<()> {
    if format != expected {
        return Err(Error::InvalidInput(format!("expected a `{expected}` document, found `{format}`")));
    }
    if version.split('.').next() != Some(MAJOR) {
        return Err(Error::UnsupportedVersion {
            format: format_name(expected),
            found: version.to_string(),
        });
    }
    Ok(())
}

#[derive(Deserialize)]
struct Probe {
    format: String,
    version: String,
}

/// Checks format and version before full parsing, so a newer document is
/// reported as such rather than as a schema mismatch.
pub fn probe_version(expected: &str, text: &str) -> Result<()> {
    let probe: Probe = serde_json::from_str(text)?;
    check_version(expected, &probe.format, &probe.version)
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// `sha256:` followed by the lowercase hex digest of `bytes`.
pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let mut out = String::with_capacity(7 + 64);
    out.push_str("sha256:");
    for b in hash.iter() {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDocument {
    pub format: String,
    pub version: String,
    pub chain: ChainSpec,
}

pub fn chain_to_json(chain: &ChainSpec) -> Result<String> {
    pretty(&ChainDocument {
        format: CHAIN_FORMAT.into(),
        version: VERSION.into(),
        chain: chain.clone(),
    })
}

pub fn chain_from_json(text: &str) -> Result<ChainSpec> {
    probe_version(CHAIN_FORMAT, text)?;
    let doc: ChainDocument = serde_json::from_str(text)?;
    doc.chain.validate()?;
    Ok(doc.chain)
}

pub fn load_chain(path: &Path) -> Result<ChainSpec> {
    chain_from_json(&std::fs::read_to_string(path)?)
}

/// Chain from `path`, else `chain_default.json` in the config directory
/// named by the environment, else the built-in default.
pub fn resolve_chain(path: Option<&Path>) -> Result<ChainSpec> {
    if let Some(p) = path {
        return load_chain(p);
    }
    if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
        let p = Path::new(&dir).join("chain_default.json");
        if p.exists() {
            return load_chain(&p);
        }
    }
    Ok(ChainSpec::default())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerDocument {
    pub format: String,
    pub version: String,
    pub config: PlannerConfig,
}

pub fn planner_to_json(config: &PlannerConfig) -> Result<String> {
    pretty(&PlannerDocument {
        format: PLANNER_FORMAT.into(),
        version: VERSION.into(),
        config: config.clone(),
    })
}

pub fn planner_from_json(text: &str) -> Result<PlannerConfig> {
    probe_version(PLANNER_FORMAT, text)?;
    let doc: PlannerDocument = serde_json::from_str(text)?;
    doc.config.validate()?;
    Ok(doc.config)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryHeader {
    pub chain_id: String,
    pub dt: f64,
    pub scenario: String,
    pub variant: Variant,
    pub mode: Mode,
    pub gamma: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub t: f64,
    pub q: [f64; DOF],
    pub light_on: bool,
    pub light_intensity: f64,
    pub projector_on: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projected_content: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryDocument {
    pub format: String,
    pub version: String,
    pub header: TrajectoryHeader,
    pub world: WorldState,
    pub samples: Vec<SampleRecord>,
    pub annotations: Vec<Annotation>,
}

impl TrajectoryDocument {
    pub fn new(traj: &Trajectory, header: TrajectoryHeader) -> Self {
        let samples = traj
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| SampleRecord {
                t: traj.time(i),
                q: s.q.0,
                light_on: s.tool.light_on,
                light_intensity: s.tool.light_intensity,
                projector_on: s.tool.projector_on,
                projected_content: s.tool.projected_content.clone(),
            })
            .collect();
        TrajectoryDocument {
            format: TRAJECTORY_FORMAT.into(),
            version: VERSION.into(),
            header: TrajectoryHeader {
                dt: traj.dt,
                ..header
            },
            world: traj.world.clone(),
            samples,
            annotations: traj.annotations.clone(),
        }
    }

    pub fn trajectory(&self) -> Result<Trajectory> {
        let samples = self
            .samples
            .iter()
            .map(|r| Sample {
                q: JointVector(r.q),
                tool: ToolState {
                    light_on: r.light_on,
                    light_intensity: r.light_intensity,
                    projector_on: r.projector_on,
                    projected_content: r.projected_content.clone(),
                },
            })
            .collect();
        let mut traj = Trajectory::new(self.header.dt, samples, self.world.clone())?;
        for a in &self.annotations {
            if a.start > a.end || a.end >= traj.len() {
                return Err(Error::InvalidInput(format!("annotation `{}` outside the trajectory", a.primitive)));
            }
        }
        traj.annotations = self.annotations.clone();
        Ok(traj)
    }

    pub fn to_json(&self) -> Result<String> {
        pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        parse(TRAJECTORY_FORMAT, text)
    }
}

fn parse<T: DeserializeOwned>(format: &str, text: &str) -> Result<T> {
    probe_version(format, text)?;
    Ok(serde_json::from_str(text)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsReport {
    pub format: String,
    pub version: String,
    pub scenario: String,
    pub variant: Variant,
    pub mode: Mode,
    pub gamma: f64,
    pub seed: u64,
    pub utility: UtilityReport,
    /// Labels of the primitives applied, in order.
    pub plan: Vec<String>,
    /// IK residual (m) when the goal was out of reach.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unreachable_residual: Option<f64>,
    pub candidates_evaluated: usize,
    pub duration_s: f64,
    /// Digest of the emitted trajectory document.
    pub trajectory_digest: String,
    pub timing_ms: f64,
}

impl MetricsReport {
    pub fn to_json(&self) -> Result<String> {
        pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        parse(METRICS_FORMAT, text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            digest(b""),
            "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn chain_roundtrip_and_versions() {
        let text = chain_to_json(&ChainSpec::default()).unwrap();
        let back = chain_from_json(&text).unwrap();
        assert_eq!(back, ChainSpec::default());
        assert_eq!(chain_to_json(&back).unwrap(), text);
        let newer = text.replace("\"version\": \"1.0\"", "\"version\": \"2.0\"");
        assert!(matches!(chain_from_json(&newer), Err(Error::UnsupportedVersion { .. })));
        let minor = text.replace("\"version\": \"1.0\"", "\"version\": \"1.3\"");
        assert!(chain_from_json(&minor).is_ok());
    }

    #[test]
    fn shipped_default_chain_matches_builtin() {
        let text = include_str!("../config/chain_default.json");
        assert_eq!(text, chain_to_json(&ChainSpec::default()).unwrap());
    }

    #[test]
    fn planner_roundtrip() {
        let text = planner_to_json(&PlannerConfig::default()).unwrap();
        assert_eq!(planner_from_json(&text).unwrap(), PlannerConfig::default());
    }
}
