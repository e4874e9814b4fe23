//! Synthetic lane detector: boundary paint points seen from the vehicle.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::track::{BoundaryStyle, PathGeometry, Track};
use crate::error::{Error, Result};
use crate::lanefit::{Polyline, Roi};
use crate::model::{Point2, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    /// Standard deviation of the isotropic noise added to every point.
    pub point_noise_sigma: f64,
    /// Spacing of detected points along a painted boundary.
    pub point_spacing: f64,
    /// Probability that an otherwise visible point is missed.
    pub dropout_prob: f64,
    /// Spurious points per frame while a zebra zone is in view.
    pub clutter_rate: f64,
    pub frame_period: f64,
    pub roi: Roi,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            point_noise_sigma: 0.0,
            point_spacing: 0.1,
            dropout_prob: 0.0,
            clutter_rate: 0.0,
            frame_period: 0.1,
            roi: Roi::default(),
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.point_noise_sigma >= 0.0 && self.point_noise_sigma.is_finite()) {
            return bad(format!("noise sigma must be non-negative, got {}", self.point_noise_sigma));
        }
        if !(self.point_spacing > 0.0) {
            return bad(format!("point spacing must be positive, got {}", self.point_spacing));
        }
        if !(0.0..=1.0).contains(&self.dropout_prob) {
            return bad(format!("dropout probability must lie in [0, 1], got {}", self.dropout_prob));
        }
        if !(self.clutter_rate >= 0.0 && self.clutter_rate.is_finite()) {
            return bad(format!("clutter rate must be non-negative, got {}", self.clutter_rate));
        }
        if !(self.frame_period > 0.0) {
            return bad(format!("frame period must be positive, got {}", self.frame_period));
        }
        self.roi.validate()
    }
}

/// Margin behind the vehicle's foot point searched for visible paint.
const BEHIND_MARGIN: f64 = 2.0;

/// Left and right boundary points in the vehicle frame.
///
/// `s_foot` is the centreline arc length nearest the vehicle; only paint in a
/// window around it is considered. Randomness is drawn from `rng` in a fixed
/// order, so equal seeds and inputs give equal output.
pub fn sense_lanes(
    track: &Track,
    geom: &PathGeometry,
    pose: &Pose,
    s_foot: f64,
    cfg: &SensorConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Polyline, Polyline)> {
    let reach = cfg.roi.x_max.abs().max(cfg.roi.x_min.abs()) + cfg.roi.y_max.abs().max(cfg.roi.y_min.abs());
    let (lo, hi) = (s_foot - BEHIND_MARGIN - reach, s_foot + reach);
    let lo = if geom.is_closed() { lo } else { lo.max(0.0) };
    let hi = if geom.is_closed() { hi.min(lo + geom.length()) } else { hi.min(geom.length()) };
    let noise = if cfg.point_noise_sigma > 0.0 {
        Some(Normal::new(0.0, cfg.point_noise_sigma).map_err(|e| Error::InvalidParams(e.to_string()))?)
    } else {
        None
    };
    let half = 0.5 * track.lane_width;
    let mut left = Vec::new();
    let mut right = Vec::new();
    let emit = |p: Point2, to_left: bool, rng: &mut ChaCha8Rng, left: &mut Vec<Point2>, right: &mut Vec<Point2>| {
        if cfg.dropout_prob > 0.0 && rng.random::<f64>() < cfg.dropout_prob {
            return;
        }
        let mut q = pose.to_local(p);
        if let Some(n) = &noise {
            q[0] += n.sample(rng);
            q[1] += n.sample(rng);
        }
        if cfg.roi.contains(&q) {
            if to_left {
                left.push(q);
            } else {
                right.push(q);
            }
        }
    };

    let n = ((hi - lo) / cfg.point_spacing).floor() as usize;
    for i in 0..=n {
        let s_raw = lo + i as f64 * cfg.point_spacing;
        let s = geom.normalize(s_raw);
        for (is_left, lateral) in [(true, half), (false, -half)] {
            if !track.painted(s, is_left) {
                continue;
            }
            let p = geom.offset_point(s, lateral);
            // Cheap pre-filter before the random draws so off-screen paint
            // does not consume the stream.
            if !cfg.roi.contains(&pose.to_local(p)) {
                continue;
            }
            emit(p, is_left, rng, &mut left, &mut right);
        }
    }

    if cfg.clutter_rate > 0.0 {
        for z in track.zones.iter().filter(|z| z.style == BoundaryStyle::ZebraClutter) {
            for (a, b) in overlap(z.s_start, z.s_end, lo, hi, geom) {
                let count = (cfg.clutter_rate * (b - a) / (z.s_end - z.s_start)).round() as usize;
                for _ in 0..count {
                    let s = rng.random_range(a..b);
                    let lateral = rng.random_range(-half..half);
                    let p = geom.offset_point(s, lateral);
                    let to_left = pose.to_local(p)[1] > 0.0;
                    emit(p, to_left, rng, &mut left, &mut right);
                }
            }
        }
    }
    Ok((left.into(), right.into()))
}

/// Intersections of a zone with the search window, in zone coordinates.
fn overlap(z0: f64, z1: f64, lo: f64, hi: f64, geom: &PathGeometry) -> Vec<(f64, f64)> {
    let shifts: &[f64] = if geom.is_closed() { &[-1.0, 0.0, 1.0] } else { &[0.0] };
    shifts
        .iter()
        .filter_map(|k| {
            let off = k * geom.length();
            let a = z0.max(lo - off);
            let b = z1.min(hi - off);
            (a < b).then_some((a, b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::track::{Side, StyleZone};
    use rand::SeedableRng;

    fn sense(track: &Track, pose: Pose, cfg: &SensorConfig, seed: u64) -> (Polyline, Polyline) {
        let g = PathGeometry::new(track).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sense_lanes(track, &g, &pose, pose.x, cfg, &mut rng).unwrap()
    }

    #[test]
    fn noiseless_solid_points_lie_on_boundaries() {
        let (l, r) = sense(&Track::straight(50.0), Pose::new(5.0, 0.0, 0.0), &SensorConfig::default(), 1);
        assert!(l.len() > 90 && r.len() > 90);
        assert!(l.points.iter().all(|p| (p[1] - 1.75).abs() < 1e-12 && (0.0..=10.0).contains(&p[0])));
        assert!(r.points.iter().all(|p| (p[1] + 1.75).abs() < 1e-12));
    }

    #[test]
    fn unpainted_view_gives_nothing() {
        let mut t = Track::straight(50.0);
        t.zones.push(StyleZone { s_start: 0.0, s_end: 50.0, side: Side::Both, style: BoundaryStyle::Unpainted });
        let (l, r) = sense(&t, Pose::new(5.0, 0.0, 0.0), &SensorConfig::default(), 1);
        assert!(l.is_empty() && r.is_empty());
    }

    #[test]
    fn same_seed_same_points() {
        let cfg = SensorConfig { point_noise_sigma: 0.05, dropout_prob: 0.2, clutter_rate: 30.0, ..Default::default() };
        let t = Track::figure_course();
        let pose = Pose::new(47.0, 7.0, 1.2);
        let a = sense(&t, pose, &cfg, 42);
        let b = sense(&t, pose, &cfg, 42);
        assert_eq!(a, b);
        let c = sense(&t, pose, &cfg, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn zebra_adds_clutter_inside_the_lane() {
        let mut t = Track::straight(50.0);
        t.zones.push(StyleZone { s_start: 8.0, s_end: 12.0, side: Side::Both, style: BoundaryStyle::ZebraClutter });
        let cfg = SensorConfig { clutter_rate: 40.0, ..Default::default() };
        let (l, r) = sense(&t, Pose::new(5.0, 0.0, 0.0), &cfg, 7);
        let (l0, r0) = sense(&t, Pose::new(5.0, 0.0, 0.0), &SensorConfig::default(), 7);
        assert_eq!(l.len() + r.len(), l0.len() + r0.len() + 40);
        assert!(l.points.iter().all(|p| p[1] > 0.0) && r.points.iter().all(|p| p[1] < 0.0));
    }
}
