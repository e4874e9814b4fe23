//! Lane geometry: ground projection, polyline resampling, cubic fitting and
//! centreline synthesis.

mod camera;
mod centerline;
mod pipeline;
mod poly;
mod polyline;
pub mod qr;

pub use camera::{pixel_to_vehicle, CameraModel, Mat3};
pub use centerline::{
    centerline, lookahead_points, CenterlineMode, CenterlineResult, Lookahead, CENTER_SAMPLES, DEFAULT_LANE_WIDTH,
    DEFAULT_LEAD, DEFAULT_SPACING,
};
pub use pipeline::{estimate_lanes, fit_lane, LaneEstimate, PipelineConfig};
pub use poly::{boundary_cubic, eval_poly, fit_cubic, fit_cubic_points, CubicFit, CubicPoly};
pub use polyline::{cumulative_arclength, resample, roi_filter, Polyline, Roi};
