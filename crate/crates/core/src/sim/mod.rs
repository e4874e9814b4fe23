//! Deterministic closed-loop simulation of a differential-drive robot
//! following a lane.

mod engine;
mod log;
mod scenario;
mod sensor;
mod track;

pub use engine::{advance_target, run, target_at, SimState, Simulator, LAP_RADIUS};
pub use log::{
    fmt_sig, ErrorSample, SimLog, StepMode, StepRecord, TargetSample, Termination, CSV_HEADER, FLAG_CLAMP,
    FLAG_EXTRAPOLATED, FLAG_FALLBACK, FLAG_RHO_HOLD, FLAG_SINGULAR, FLAG_SLEW,
};
pub use scenario::{Scenario, Shape, SimMode, TrackSpec};
pub use sensor::{sense_lanes, SensorConfig};
pub use track::{BoundaryStyle, PathGeometry, Side, StyleZone, Track, DEFAULT_SAMPLE_SPACING};
