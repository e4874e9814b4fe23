//! Scenario description: everything a run depends on, serialisable as JSON.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::sensor::SensorConfig;
use super::track::{StyleZone, Track};
use crate::controllers::{ControllerGains, ControllerKind, CouplingScope, SaturationLimits};
use crate::error::{Error, Result};
use crate::lanefit::{Polyline, PipelineConfig, DEFAULT_LANE_WIDTH, DEFAULT_LEAD, DEFAULT_SPACING};
use crate::metrics::MetricsConfig;
use crate::model::{Pose, Stepper};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Straight { length: f64 },
    Circle { radius: f64 },
    Oval { radius: f64, straight: f64 },
    FigureCourse,
    Polyline { points: Polyline },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackSpec {
    pub shape: Shape,
    pub lane_width: f64,
    /// Replaces the shape's built-in style zones when present.
    pub zones: Option<Vec<StyleZone>>,
}

impl Default for TrackSpec {
    fn default() -> Self {
        Self { shape: Shape::Oval { radius: 10.0, straight: 30.0 }, lane_width: DEFAULT_LANE_WIDTH, zones: None }
    }
}

impl TrackSpec {
    pub fn build(&self) -> Result<Track> {
        let mut track = match &self.shape {
            Shape::Straight { length } => {
                positive("track length", *length)?;
                Track::straight(*length)
            }
            Shape::Circle { radius } => {
                positive("track radius", *radius)?;
                Track::circle(*radius)
            }
            Shape::Oval { radius, straight } => {
                positive("track radius", *radius)?;
                positive("straight length", *straight)?;
                Track::oval(*radius, *straight)
            }
            Shape::FigureCourse => Track::figure_course(),
            Shape::Polyline { points } => {
                Track { reference_path: points.clone(), lane_width: DEFAULT_LANE_WIDTH, zones: Vec::new() }
            }
        };
        track.lane_width = self.lane_width;
        if let Some(z) = &self.zones {
            track.zones = z.clone();
        }
        track.validate()?;
        Ok(track)
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidScenario(format!("{name} must be positive, got {x}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// The target is sampled directly from the reference path.
    #[default]
    PresetPath,
    /// The target comes from lanes fitted to synthetic detections.
    Vision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub track: TrackSpec,
    pub mode: SimMode,
    pub v_t: f64,
    pub gains: ControllerGains,
    pub controller: ControllerKind,
    pub coupling: CouplingScope,
    pub saturation_enabled: bool,
    /// Explicit bounds; `None` derives them from `v_t`.
    pub limits: Option<SaturationLimits>,
    pub dt: f64,
    pub duration_max: f64,
    pub initial_pose: Pose,
    /// Speed of the command assumed applied before the first step; `None`
    /// starts at the target speed, clamped to the bounds.
    pub initial_speed: Option<f64>,
    /// Preset mode: arc length between the robot's foot point and the
    /// initial target.
    pub target_lead: f64,
    /// Spacing of the three path samples used for the target heading rate.
    pub heading_rate_spacing: f64,
    /// Vision mode: distance ahead of the robot of the first look-ahead point.
    pub lookahead_lead: f64,
    pub lookahead_spacing: f64,
    pub sensor: SensorConfig,
    pub lane_fit: PipelineConfig,
    pub stepper: Stepper,
    pub rng_seed: u64,
    pub metrics: MetricsConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: String::new(),
            track: TrackSpec::default(),
            mode: SimMode::PresetPath,
            v_t: 1.5,
            gains: ControllerGains::default(),
            controller: ControllerKind::Proposed,
            coupling: CouplingScope::TargetSpeedTerm,
            saturation_enabled: true,
            limits: None,
            dt: 0.01,
            duration_max: 300.0,
            initial_pose: Pose::default(),
            initial_speed: None,
            target_lead: DEFAULT_LEAD,
            heading_rate_spacing: DEFAULT_SPACING,
            lookahead_lead: DEFAULT_LEAD,
            lookahead_spacing: DEFAULT_SPACING,
            sensor: SensorConfig::default(),
            lane_fit: PipelineConfig::default(),
            stepper: Stepper::Euler,
            rng_seed: 0,
            metrics: MetricsConfig::default(),
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let sc: Self = serde_json::from_str(text).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn limits(&self) -> SaturationLimits {
        self.limits.unwrap_or_else(|| SaturationLimits::for_target_speed(self.v_t))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.duration_max > 0.0 && self.duration_max.is_finite()) {
            return bad(format!("duration_max must be positive, got {}", self.duration_max));
        }
        if !(self.v_t > 0.0 && self.v_t.is_finite()) {
            return bad(format!("v_t must be positive, got {}", self.v_t));
        }
        if ![self.initial_pose.x, self.initial_pose.y, self.initial_pose.phi].iter().all(|c| c.is_finite()) {
            return bad("initial pose must be finite".into());
        }
        if !(self.heading_rate_spacing > 0.0 && self.lookahead_lead > 0.0 && self.lookahead_spacing > 0.0) {
            return bad("look-ahead lead and spacings must be positive".into());
        }
        if !self.target_lead.is_finite() {
            return bad(format!("target_lead must be finite, got {}", self.target_lead));
        }
        let wrap = |e: Error| Error::InvalidScenario(e.to_string());
        self.gains.validate().map_err(wrap)?;
        self.limits().validate().map_err(wrap)?;
        self.sensor.validate().map_err(wrap)?;
        self.lane_fit.roi.validate().map_err(wrap)?;
        if !(self.lane_fit.delta_s > 0.0) {
            return bad(format!("lane_fit.delta_s must be positive, got {}", self.lane_fit.delta_s));
        }
        if self.mode == SimMode::Vision && self.sensor.frame_period < self.dt {
            return bad(format!("frame period {} is shorter than dt {}", self.sensor.frame_period, self.dt));
        }
        if let Some(v) = self.initial_speed {
            if !v.is_finite() {
                return bad("initial_speed must be finite".into());
            }
        }
        self.track.build().map_err(|e| match e {
            Error::InvalidScenario(_) => e,
            other => wrap(other),
        })?;
        Ok(())
    }

    /// Applies `key=value` overrides addressed by dotted paths into the
    /// scenario's JSON form. Values are parsed as JSON, falling back to a bare
    /// string.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut doc = serde_json::to_value(self)?;
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) =
                item.split_once('=').ok_or_else(|| Error::Malformed(format!("override `{item}` is not key=value")))?;
            let slot = key
                .split('.')
                .try_fold(&mut doc, |node, part| match node {
                    Value::Object(map) => map.get_mut(part),
                    Value::Array(items) => part.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
                    _ => None,
                })
                .ok_or_else(|| Error::UnknownOverride(key.to_string()))?;
            *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        }
        let sc: Self = serde_json::from_value(doc).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }
}
