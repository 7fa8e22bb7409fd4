//! JSON plan documents.
//!
//! ```json
//! {
//!   "initial": { "s": 10.0, "center": 0, "grid": { "step_divisor": 20 } },
//!   "stations": [ { "left": -101, "right": 101 } ],
//!   "output": { "heatmap_stride": 1 }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::disorder::{DisorderKind, DisorderSpec, DisorderVariant};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::schedule::{CorralPlan, InitialSpin, Station, TimingPolicy};
use crate::spinor::{BlochSpin, GaussianSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Lattice>,
    pub initial: InitialSection,
    pub stations: Vec<Station>,
    #[serde(default)]
    pub timing: TimingPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub s: f64,
    pub center: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub step_divisor: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSection {
    pub kind: DisorderKind,
    pub p: f64,
    /// Defaults to 10% of the measurement time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[serde(default)]
    pub variant: DisorderVariant,
    #[serde(default)]
    pub seed: u64,
}

impl DisorderSection {
    pub fn to_spec(&self, t_m: usize) -> Result<DisorderSpec> {
        let tau = self.tau.unwrap_or(((t_m as f64 * 0.1).round() as usize).max(1));
        DisorderSpec::new(self.kind, self.p, tau, self.variant, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Write a `t,j,P` heatmap sampled every this many steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heatmap_stride: Option<usize>,
    #[serde(default)]
    pub frames: bool,
    #[serde(default = "default_report")]
    pub report: String,
}

fn default_report() -> String {
    "report.json".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            heatmap_stride: None,
            frames: false,
            report: default_report(),
        }
    }
}

impl PlanFile {
    pub fn from_plan(plan: &CorralPlan) -> Self {
        let (alpha, beta, grid) = match plan.spin {
            InitialSpin::Single(s) => (Some(s.alpha), Some(s.beta), None),
            InitialSpin::Grid { step_divisor } => (None, None, Some(GridSection { step_divisor })),
        };
        PlanFile {
            lattice: plan.lattice,
            initial: InitialSection {
                s: plan.gaussian.s,
                center: plan.gaussian.center,
                alpha,
                beta,
                grid,
            },
            stations: plan.stations.clone(),
            timing: plan.timing,
            disorder: None,
            output: OutputSection::default(),
        }
    }

    /// Builds and validates the plan.
    pub fn to_plan(&self) -> Result<CorralPlan> {
        let i = &self.initial;
        let gaussian = GaussianSpec::new(i.s, i.center).map_err(|e| field_error("initial.s", e))?;
        let spin = match (i.alpha, i.beta, i.grid) {
            (Some(a), Some(b), None) => {
                InitialSpin::Single(BlochSpin::new(a, b).map_err(|e| field_error("initial", e))?)
            }
            (None, None, Some(g)) => {
                crate::analysis::BlochGrid::new(g.step_divisor).map_err(|e| field_error("initial.grid", e))?;
                InitialSpin::Grid {
                    step_divisor: g.step_divisor,
                }
            }
            _ => {
                return Err(Error::Plan(
                    "initial: give either both alpha and beta, or a grid".into(),
                ))
            }
        };
        if let Some(d) = &self.disorder {
            DisorderSpec::new(d.kind, d.p, d.tau.unwrap_or(1), d.variant, d.seed)
                .map_err(|e| field_error("disorder", e))?;
        }
        if self.output.heatmap_stride == Some(0) {
            return Err(Error::Plan("output.heatmap_stride must be at least 1".into()));
        }
        let plan = CorralPlan {
            gaussian,
            spin,
            stations: self.stations.clone(),
            timing: self.timing,
            lattice: self.lattice,
        };
        plan.validate().map_err(|e| field_error("stations", e))?;
        Ok(plan)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan files always serialize")
    }
}

fn field_error(field: &str, e: Error) -> Error {
    let msg = match e {
        Error::Plan(m) | Error::Parameter(m) => m,
        other => other.to_string(),
    };
    Error::Plan(format!("{field}: {msg}"))
}

/// Parses and validates a plan document. `origin` names it in error messages.
pub fn parse_plan_str(text: &str, origin: &str) -> Result<(PlanFile, CorralPlan)> {
    let file: PlanFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    let plan = file.to_plan().map_err(|e| Error::Parse {
        path: origin.to_string(),
        message: match e {
            Error::Plan(m) => m,
            other => other.to_string(),
        },
    })?;
    Ok((file, plan))
}

pub fn parse_plan(path: &Path) -> Result<(PlanFile, CorralPlan)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_plan_str(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CORRAL: &str = r#"{
        "initial": { "s": 10.0, "center": 0, "grid": { "step_divisor": 20 } },
        "stations": [ { "left": -101, "right": 101 } ]
    }"#;

    #[test]
    fn minimal_corral_plan() {
        let (file, plan) = parse_plan_str(CORRAL, "corral.json").unwrap();
        assert_eq!(plan.stations, vec![Station::new(-101, 101)]);
        assert_eq!(plan.spin, InitialSpin::Grid { step_divisor: 20 });
        assert_eq!(file.output.report, "report.json");
        assert_eq!(plan.timing, TimingPolicy::NumericRefine);
    }

    #[test]
    fn empty_stations_rejected() {
        let text = r#"{ "initial": { "s": 10.0, "center": 0, "alpha": 0.0, "beta": 0.0 }, "stations": [] }"#;
        let e = parse_plan_str(text, "x.json").unwrap_err();
        assert!(matches!(e, Error::Parse { .. }), "{e}");
    }

    #[test]
    fn narrow_walls_rejected() {
        let text = r#"{ "initial": { "s": 10.0, "center": 0, "alpha": 0.0, "beta": 0.0 },
                        "stations": [ { "left": -25, "right": 25 } ] }"#;
        let e = parse_plan_str(text, "x.json").unwrap_err().to_string();
        assert!(e.contains("stations") && e.contains("3s"), "{e}");
    }

    #[test]
    fn unknown_keys_rejected_with_position() {
        let text = r#"{ "initial": { "s": 10.0, "center": 0, "alpha": 0.0, "beta": 0.0 },
                        "stations": [ { "left": -50, "right": 50, "wall": 3 } ] }"#;
        let e = parse_plan_str(text, "x.json").unwrap_err().to_string();
        assert!(e.contains("wall") && e.contains("line 2"), "{e}");
    }

    #[test]
    fn spin_and_grid_are_exclusive() {
        let text = r#"{ "initial": { "s": 10.0, "center": 0, "alpha": 0.0, "beta": 0.0,
                                     "grid": { "step_divisor": 20 } },
                        "stations": [ { "left": -50, "right": 50 } ] }"#;
        assert!(parse_plan_str(text, "x.json").is_err());
    }

    #[test]
    fn full_document_round_trips() {
        let text = r#"{
            "lattice": { "j_min": -600, "j_max": 900 },
            "initial": { "s": 10.0, "center": 0, "alpha": 0.785, "beta": 1.57 },
            "stations": [ { "left": -50, "right": 50, "hold": 1 }, { "left": 50, "right": 150 } ],
            "timing": "analytic-estimate",
            "disorder": { "kind": "fluctuating", "p": 0.001, "variant": "q-only", "seed": 9 },
            "output": { "heatmap_stride": 4, "frames": true, "report": "out.json" }
        }"#;
        let (file, _) = parse_plan_str(text, "x.json").unwrap();
        let (again, _) = parse_plan_str(&file.to_json(), "y.json").unwrap();
        assert_eq!(file, again);
    }

    fn arb_plan() -> impl Strategy<Value = PlanFile> {
        (
            1.0f64..12.0,
            -100i64..100,
            prop::option::of((0.0f64..1.5, 0.0f64..6.2)),
            1usize..5,
            0usize..3,
            prop::option::of((0.0f64..0.01, 1usize..300, 0u64..1000)),
            prop::option::of(1usize..10),
            any::<bool>(),
        )
            .prop_map(|(s, center, spin, n, hold, dis, stride, frames)| {
                let half = (3.0 * s).ceil() as i64 + 5;
                let stations = (0..n as i64)
                    .map(|k| Station::new(center - half + 2 * half * k, center + half + 2 * half * k).with_hold(hold))
                    .collect();
                PlanFile {
                    lattice: None,
                    initial: InitialSection {
                        s,
                        center,
                        alpha: spin.map(|x| x.0),
                        beta: spin.map(|x| x.1),
                        grid: if spin.is_none() { Some(GridSection { step_divisor: 4 }) } else { None },
                    },
                    stations,
                    timing: TimingPolicy::NumericRefine,
                    disorder: dis.map(|(p, tau, seed)| DisorderSection {
                        kind: DisorderKind::Dynamic,
                        p,
                        tau: Some(tau),
                        variant: DisorderVariant::PhaseOnly,
                        seed,
                    }),
                    output: OutputSection {
                        heatmap_stride: stride,
                        frames,
                        report: "r.json".into(),
                    },
                }
            })
    }

    proptest! {
        #[test]
        fn parse_serialize_parse_is_identity(file in arb_plan()) {
            let text = file.to_json();
            let (parsed, plan) = parse_plan_str(&text, "a.json").unwrap();
            prop_assert_eq!(&parsed, &file);
            let (again, plan2) = parse_plan_str(&parsed.to_json(), "b.json").unwrap();
            prop_assert_eq!(again, parsed);
            prop_assert_eq!(plan, plan2);
        }
    }
}
