//! Polylines, region-of-interest filtering and arc-length resampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Point2;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polyline {
    pub points: Vec<Point2>,
}

impl Polyline {
    pub fn new(points: Vec<Point2>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| dist(&w[0], &w[1])).sum()
    }
}

impl From<Vec<Point2>> for Polyline {
    fn from(points: Vec<Point2>) -> Self {
        Self { points }
    }
}

/// Axis-aligned box in the vehicle frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Roi {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for Roi {
    fn default() -> Self {
        Self { x_min: 0.0, x_max: 10.0, y_min: -5.0, y_max: 5.0 }
    }
}

impl Roi {
    pub fn validate(&self) -> Result<()> {
        if self.x_min < self.x_max && self.y_min < self.y_max {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("empty region of interest {self:?}")))
        }
    }

    pub fn contains(&self, p: &Point2) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }
}

fn dist<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (q - p) * (q - p)).sum::<f64>().sqrt()
}

/// Keeps the points inside the closed box, in their original order.
pub fn roi_filter(pts: &Polyline, roi: &Roi) -> Polyline {
    pts.points.iter().copied().filter(|p| roi.contains(p)).collect::<Vec<_>>().into()
}

/// Running arc length `S_0 = 0, S_i = S_{i-1} + |P_i - P_{i-1}|`.
pub fn cumulative_arclength<const N: usize>(pts: &[[f64; N]]) -> Result<Vec<f64>> {
    if pts.is_empty() {
        return Err(Error::EmptyPolyline);
    }
    let mut s = Vec::with_capacity(pts.len());
    s.push(0.0);
    for w in pts.windows(2) {
        let last = *s.last().unwrap();
        s.push(last + dist(&w[0], &w[1]));
    }
    Ok(s)
}

/// Resamples at arc lengths `k * delta_s` for `k = 0..=floor(S / delta_s)`,
/// interpolating linearly inside the containing segment.
pub fn resample<const N: usize>(pts: &[[f64; N]], delta_s: f64) -> Result<Vec<[f64; N]>> {
    if !(delta_s > 0.0 && delta_s.is_finite()) {
        return Err(Error::NonPositiveSpacing(delta_s));
    }
    if pts.len() < 2 {
        return Err(Error::DegeneratePolyline);
    }
    let s = cumulative_arclength(pts)?;
    let total = *s.last().unwrap();
    if !(total > 0.0) {
        return Err(Error::DegeneratePolyline);
    }
    let count = (total / delta_s).floor() as usize + 1;
    let mut out = Vec::with_capacity(count);
    let mut j = 0;
    for k in 0..count {
        let target = k as f64 * delta_s;
        // Advance to the segment [S_j, S_{j+1}] containing the target,
        // skipping zero-length segments.
        while j + 2 < s.len() && (s[j + 1] < target || s[j + 1] == s[j]) {
            j += 1;
        }
        let span = s[j + 1] - s[j];
        let t = if span > 0.0 { ((target - s[j]) / span).clamp(0.0, 1.0) } else { 0.0 };
        let mut q = [0.0; N];
        for (d, qd) in q.iter_mut().enumerate() {
            *qd = (1.0 - t) * pts[j][d] + t * pts[j + 1][d];
        }
        out.push(q);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roi_examples() {
        let roi = Roi::default();
        let out = roi_filter(&vec![[1.0, 0.0], [20.0, 0.0]].into(), &roi);
        assert_eq!(out.points, vec![[1.0, 0.0]]);
        let inside: Polyline = vec![[0.0, -5.0], [3.0, 2.0], [10.0, 5.0]].into();
        assert_eq!(roi_filter(&inside, &roi), inside);
        assert!(roi_filter(&vec![[-1.0, 0.0], [3.0, 9.0]].into(), &roi).is_empty());
    }

    #[test]
    fn arclength_examples() {
        assert_eq!(cumulative_arclength(&[[0.0, 0.0], [3.0, 4.0]]).unwrap(), vec![0.0, 5.0]);
        assert_eq!(cumulative_arclength(&[[2.0, 1.0]]).unwrap(), vec![0.0]);
        assert_eq!(cumulative_arclength(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]).unwrap(), vec![0.0, 1.0, 2.0]);
        assert!(matches!(cumulative_arclength::<2>(&[]), Err(Error::EmptyPolyline)));
        let s = cumulative_arclength(&[[0.0, 0.0, 0.0], [1.0, 2.0, 2.0]]).unwrap();
        assert_eq!(s, vec![0.0, 3.0]);
    }

    #[test]
    fn resample_examples() {
        let line = [[0.0, 0.0], [10.0, 0.0]];
        let out = resample(&line, 1.0).unwrap();
        assert_eq!(out.len(), 11);
        for (k, q) in out.iter().enumerate() {
            assert!((q[0] - k as f64).abs() < 1e-12 && q[1] == 0.0);
        }
        let out = resample(&line, 3.0).unwrap();
        let xs: Vec<f64> = out.iter().map(|q| q[0]).collect();
        assert_eq!(xs, vec![0.0, 3.0, 6.0, 9.0]);

        let ell = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0]];
        let out = resample(&ell, 1.5).unwrap();
        assert_eq!(out.len(), 3);
        assert!((out[1][0] - 1.5).abs() < 1e-12 && out[1][1].abs() < 1e-12);
        assert!((out[2][0] - 2.0).abs() < 1e-12 && (out[2][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resample_skips_repeated_points() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let out = resample(&pts, 0.5).unwrap();
        let xs: Vec<f64> = out.iter().map(|q| q[0]).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn resample_rejects_degenerate_input() {
        assert!(matches!(resample(&[[1.0, 1.0]], 0.5), Err(Error::DegeneratePolyline)));
        assert!(matches!(resample(&[[1.0, 1.0], [1.0, 1.0]], 0.5), Err(Error::DegeneratePolyline)));
        assert!(matches!(resample(&[[0.0, 0.0], [1.0, 0.0]], 0.0), Err(Error::NonPositiveSpacing(_))));
    }
}
