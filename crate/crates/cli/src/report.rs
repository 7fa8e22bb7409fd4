//! The JSON report every subcommand writes.

use serde::Serialize;
use serde_json::Value;

use corral::io::PlanFile;
use corral::schedule::Segment;
use corral::{CompiledProtocol, GateEvent, Lattice};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Report {
    pub protocol: Option<ProtocolBlock>,
    pub timings: Option<Timings>,
    pub fidelity: Value,
    pub seeds: Seeds,
    pub versions: Versions,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ProtocolBlock {
    pub command: String,
    pub plan: PlanFile,
    pub lattice: Lattice,
    pub events: Vec<GateEvent>,
}

#[derive(Debug, Serialize)]
pub struct Timings {
    pub segments: Vec<Segment>,
    pub t_m: usize,
    pub t_m_estimate: usize,
    pub x: i64,
    pub reference_fidelity: Option<f64>,
}

#[derive(Debug, Default, Serialize)]
pub struct Seeds {
    pub master_seed: Option<u64>,
    pub realizations: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub corral: &'static str,
    pub schema: u32,
}

impl Report {
    pub fn new(command: &str, plan: Option<&PlanFile>, protocol: Option<&CompiledProtocol>) -> Self {
        Report {
            protocol: match (plan, protocol) {
                (Some(plan), Some(p)) => Some(ProtocolBlock {
                    command: command.to_string(),
                    plan: plan.clone(),
                    lattice: *p.lattice(),
                    events: p.schedule.events().to_vec(),
                }),
                _ => None,
            },
            timings: protocol.map(|p| Timings {
                segments: p.segments.clone(),
                t_m: p.t_m,
                t_m_estimate: p.t_m_estimate,
                x: p.x,
                reference_fidelity: p.reference_fidelity,
            }),
            fidelity: Value::Null,
            seeds: Seeds::default(),
            versions: Versions {
                corral: env!("CARGO_PKG_VERSION"),
                schema: SCHEMA_VERSION,
            },
            error: None,
        }
    }
}
