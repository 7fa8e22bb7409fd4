//! Plan documents and data exporters.

pub mod export;
pub mod planfile;

pub use export::{write_frame, write_frames_header, write_heatmap, FRAMES_HEADER, HEATMAP_HEADER};
pub use planfile::{parse_plan, parse_plan_str, DisorderSection, InitialSection, OutputSection, PlanFile};
