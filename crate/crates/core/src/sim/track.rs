//! Reference tracks: a dense centreline, a lane width and paint styles along
//! the way.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanefit::{cumulative_arclength, Polyline};
use crate::model::Point2;

pub const DEFAULT_SAMPLE_SPACING: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryStyle {
    #[default]
    Solid,
    /// Paint present for `dash_len`, then absent for `gap_len`, repeating.
    Dotted { dash_len: f64, gap_len: f64 },
    /// Painted boundaries crossed by stripes that the detector mistakes for
    /// lane points.
    ZebraClutter,
    /// No paint at all.
    Unpainted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    #[default]
    Both,
    Left,
    Right,
}

impl Side {
    fn covers(self, left: bool) -> bool {
        match self {
            Side::Both => true,
            Side::Left => left,
            Side::Right => !left,
        }
    }
}

/// A boundary style applied between two centreline arc lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StyleZone {
    pub s_start: f64,
    pub s_end: f64,
    #[serde(default)]
    pub side: Side,
    pub style: BoundaryStyle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    /// Centreline. A closed track repeats its first point at the end.
    pub reference_path: Polyline,
    pub lane_width: f64,
    /// Later zones take precedence; uncovered stretches are solid.
    #[serde(default)]
    pub zones: Vec<StyleZone>,
}

impl Track {
    pub fn validate(&self) -> Result<()> {
        let pts = &self.reference_path.points;
        if pts.len() < 2 || !(self.reference_path.length() > 0.0) {
            return Err(Error::DegeneratePath);
        }
        if !(self.lane_width > 0.0) {
            return Err(Error::InvalidParams(format!("lane width must be positive, got {}", self.lane_width)));
        }
        for z in &self.zones {
            if !(z.s_start < z.s_end) {
                return Err(Error::InvalidParams(format!("style zone [{}, {}] is empty", z.s_start, z.s_end)));
            }
            if let BoundaryStyle::Dotted { dash_len, gap_len } = z.style {
                if !(dash_len > 0.0 && gap_len >= 0.0) {
                    return Err(Error::InvalidParams(format!("dotted style needs dash > 0, gap >= 0 ({dash_len}, {gap_len})")));
                }
            }
        }
        Ok(())
    }

    pub fn is_closed(&self) -> bool {
        self.reference_path.points.len() > 2 && self.reference_path.points.first() == self.reference_path.points.last()
    }

    /// Style of the left or right boundary at centreline arc length `s`, and
    /// the zone it comes from.
    pub fn style_at(&self, s: f64, left: bool) -> (BoundaryStyle, Option<&StyleZone>) {
        self.zones
            .iter()
            .rev()
            .find(|z| z.side.covers(left) && s >= z.s_start && s < z.s_end)
            .map_or((BoundaryStyle::Solid, None), |z| (z.style, Some(z)))
    }

    /// Whether paint exists on the given boundary at `s`.
    pub fn painted(&self, s: f64, left: bool) -> bool {
        match self.style_at(s, left) {
            (BoundaryStyle::Solid | BoundaryStyle::ZebraClutter, _) => true,
            (BoundaryStyle::Unpainted, _) => false,
            (BoundaryStyle::Dotted { dash_len, gap_len }, zone) => {
                let start = zone.map_or(0.0, |z| z.s_start);
                (s - start).rem_euclid(dash_len + gap_len) < dash_len
            }
        }
    }

    pub fn straight(length: f64) -> Self {
        Self::from_pieces(&[Piece::Line(length)], false, DEFAULT_SAMPLE_SPACING)
    }

    /// Counter-clockwise circle starting at the origin heading along +x.
    pub fn circle(radius: f64) -> Self {
        Self::from_pieces(&[Piece::Arc(radius, 2.0 * PI)], true, DEFAULT_SAMPLE_SPACING)
    }

    /// Two straights joined by semicircles, counter-clockwise from the origin.
    pub fn oval(radius: f64, straight: f64) -> Self {
        let pieces = [Piece::Line(straight), Piece::Arc(radius, PI), Piece::Line(straight), Piece::Arc(radius, PI)];
        Self::from_pieces(&pieces, true, DEFAULT_SAMPLE_SPACING)
    }

    /// Four left-hand corners of differing radii with dotted, zebra and
    /// one-sided dotted zones.
    pub fn figure_course() -> Self {
        let pieces = FIGURE_PIECES;
        let mut track = Self::from_pieces(&pieces, true, DEFAULT_SAMPLE_SPACING);
        let ends: Vec<f64> = pieces
            .iter()
            .scan(0.0, |s, p| {
                *s += p.length();
                Some(*s)
            })
            .collect();
        let dotted = BoundaryStyle::Dotted { dash_len: 1.0, gap_len: 2.0 };
        track.zones = vec![
            StyleZone { s_start: ends[0], s_end: ends[3], side: Side::Both, style: dotted },
            StyleZone { s_start: ends[3] + 12.0, s_end: ends[3] + 16.0, side: Side::Both, style: BoundaryStyle::ZebraClutter },
            StyleZone { s_start: ends[5], s_end: ends[7], side: Side::Left, style: dotted },
        ];
        track
    }

    fn from_pieces(pieces: &[Piece], closed: bool, ds: f64) -> Self {
        let mut pts = vec![[0.0, 0.0]];
        let (mut pos, mut heading) = ([0.0, 0.0], 0.0f64);
        for p in pieces {
            let n = (p.length() / ds).ceil().max(1.0) as usize;
            for i in 1..=n {
                let f = i as f64 / n as f64;
                pts.push(p.point(pos, heading, f));
            }
            pos = p.point(pos, heading, 1.0);
            heading += p.turn();
        }
        if closed {
            *pts.last_mut().unwrap() = pts[0];
        }
        Self { reference_path: pts.into(), lane_width: crate::lanefit::DEFAULT_LANE_WIDTH, zones: Vec::new() }
    }
}

const FIGURE_PIECES: [Piece; 8] = [
    Piece::Line(40.0),
    Piece::Arc(10.0, FRAC_PI_2),
    Piece::Line(20.0),
    Piece::Arc(14.0, FRAC_PI_2),
    Piece::Line(38.0),
    Piece::Arc(10.0, FRAC_PI_2),
    Piece::Line(22.0),
    Piece::Arc(12.0, FRAC_PI_2),
];

#[derive(Debug, Clone, Copy)]
enum Piece {
    Line(f64),
    /// Left turn of the given radius and sweep.
    Arc(f64, f64),
}

impl Piece {
    fn length(&self) -> f64 {
        match *self {
            Piece::Line(l) => l,
            Piece::Arc(r, sweep) => r * sweep,
        }
    }

    fn turn(&self) -> f64 {
        match *self {
            Piece::Line(_) => 0.0,
            Piece::Arc(_, sweep) => sweep,
        }
    }

    fn point(&self, start: Point2, heading: f64, f: f64) -> Point2 {
        let (s, c) = heading.sin_cos();
        match *self {
            Piece::Line(l) => [start[0] + f * l * c, start[1] + f * l * s],
            Piece::Arc(r, sweep) => {
                let center = [start[0] - r * s, start[1] + r * c];
                let a = heading - FRAC_PI_2 + f * sweep;
                [center[0] + r * a.cos(), center[1] + r * a.sin()]
            }
        }
    }
}

/// Arc-length lookup on a track centreline.
#[derive(Debug, Clone)]
pub struct PathGeometry {
    pts: Vec<Point2>,
    s: Vec<f64>,
    closed: bool,
}

impl PathGeometry {
    pub fn new(track: &Track) -> Result<Self> {
        track.validate()?;
        let pts = track.reference_path.points.clone();
        let s = cumulative_arclength(&pts)?;
        Ok(Self { pts, s, closed: track.is_closed() })
    }

    pub fn length(&self) -> f64 {
        *self.s.last().unwrap()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Wraps `s` into `[0, length)` on closed tracks and clamps it otherwise.
    pub fn normalize(&self, s: f64) -> f64 {
        let len = self.length();
        if self.closed {
            s.rem_euclid(len)
        } else {
            s.clamp(0.0, len)
        }
    }

    fn segment(&self, s: f64) -> usize {
        // First segment whose end lies beyond s; zero-length segments are skipped.
        let i = self.s.partition_point(|&x| x <= s);
        i.clamp(1, self.s.len() - 1) - 1
    }

    /// Position and tangent heading at arc length `s`.
    pub fn sample(&self, s: f64) -> (Point2, f64) {
        let s = self.normalize(s);
        let mut i = self.segment(s);
        while self.s[i + 1] == self.s[i] && i > 0 {
            i -= 1;
        }
        let (a, b) = (self.pts[i], self.pts[i + 1]);
        let seg = self.s[i + 1] - self.s[i];
        let f = if seg > 0.0 { ((s - self.s[i]) / seg).clamp(0.0, 1.0) } else { 0.0 };
        let p = [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])];
        (p, (b[1] - a[1]).atan2(b[0] - a[0]))
    }

    /// Point offset sideways from the centreline at `s`, positive to the left.
    pub fn offset_point(&self, s: f64, lateral: f64) -> Point2 {
        let (p, h) = self.sample(s);
        let (sn, cs) = h.sin_cos();
        [p[0] - lateral * sn, p[1] + lateral * cs]
    }

    /// Three centreline points `spacing` apart starting at `s`, shifted back
    /// on open tracks so they stay on the path.
    pub fn three_points(&self, s: f64, spacing: f64) -> [Point2; 3] {
        let start = if self.closed { s } else { s.min(self.length() - 2.0 * spacing).max(0.0) };
        [0.0, 1.0, 2.0].map(|k| self.sample(start + k * spacing).0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_close_and_have_expected_length() {
        let circle = Track::circle(15.0);
        assert!(circle.is_closed());
        assert!((circle.reference_path.length() - 2.0 * PI * 15.0).abs() < 0.01);
        let oval = Track::oval(10.0, 30.0);
        assert!((oval.reference_path.length() - (60.0 + 20.0 * PI)).abs() < 0.01);
        let fig = Track::figure_course();
        assert!(fig.is_closed());
        let want = 120.0 + FRAC_PI_2 * 46.0;
        assert!((fig.reference_path.length() - want).abs() < 0.02);
        // The analytic end meets the start, so the forced closure moves nothing.
        let pts = &fig.reference_path.points;
        let before = pts[pts.len() - 2];
        assert!((before[0] - pts[0][0]).hypot(before[1] - pts[0][1]) < 0.06);
        assert!(!Track::straight(50.0).is_closed());
    }

    #[test]
    fn sampling_follows_the_circle() {
        let g = PathGeometry::new(&Track::circle(15.0)).unwrap();
        let (p, h) = g.sample(15.0 * FRAC_PI_2);
        assert!((p[0] - 15.0).abs() < 1e-3 && (p[1] - 15.0).abs() < 1e-3);
        assert!((h - FRAC_PI_2).abs() < 0.01);
        let (q, _) = g.sample(g.length() + 1.0);
        let (r, _) = g.sample(1.0);
        assert_eq!(q, r);
    }

    #[test]
    fn dotted_paint_alternates() {
        let mut t = Track::straight(50.0);
        t.zones.push(StyleZone {
            s_start: 10.0,
            s_end: 20.0,
            side: Side::Left,
            style: BoundaryStyle::Dotted { dash_len: 1.0, gap_len: 2.0 },
        });
        assert!(t.painted(10.5, true));
        assert!(!t.painted(11.5, true));
        assert!(t.painted(13.2, true));
        assert!(t.painted(11.5, false));
        assert!(t.painted(25.0, true));
    }

    #[test]
    fn offset_is_to_the_left() {
        let g = PathGeometry::new(&Track::straight(10.0)).unwrap();
        let p = g.offset_point(3.0, 1.75);
        assert!((p[0] - 3.0).abs() < 1e-12 && (p[1] - 1.75).abs() < 1e-12);
    }
}
