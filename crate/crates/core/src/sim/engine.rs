//! The closed loop: target selection, control, saturation, integration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::log::*;
use super::scenario::{Scenario, SimMode};
use super::sensor::sense_lanes;
use super::track::{PathGeometry, Track};
use crate::controllers::{
    comparative_angular_guarded, lyapunov_values, proposed_angular_guarded, proposed_linear, saturate, ControllerKind,
    SaturationLimits,
};
use crate::error::{Error, Result};
use crate::lanefit::{estimate_lanes, lookahead_points, CenterlineMode, CubicPoly};
use crate::metrics::PathProjector;
use crate::model::{integrate_with, polar_error, target_heading_rate, Pose, TargetState, Twist, EPS_RHO};

/// Distance from the start below which a full lap of progress counts as done.
pub const LAP_RADIUS: f64 = 1.0;

/// Target on the reference path at arc length `s`.
pub fn target_at(geom: &PathGeometry, s: f64, v_t: f64, spacing: f64) -> Result<TargetState> {
    let (p, phi) = geom.sample(s);
    let [a, b, c] = geom.three_points(s, spacing);
    let phi_dot = target_heading_rate(a, b, c, spacing / v_t)?;
    Ok(TargetState { x: p[0], y: p[1], phi, v: v_t, phi_dot })
}

/// Moves the target `v_t dt` along the path and samples it there.
///
/// Closed tracks wrap; open tracks report `PathExhausted` past the end.
pub fn advance_target(geom: &PathGeometry, s: f64, v_t: f64, dt: f64, spacing: f64) -> Result<(TargetState, f64)> {
    let next = s + v_t * dt;
    let next = if geom.is_closed() {
        next.rem_euclid(geom.length())
    } else if next > geom.length() {
        return Err(Error::PathExhausted);
    } else {
        next
    };
    Ok((target_at(geom, next, v_t, spacing)?, next))
}

/// Latest perception result, held between camera frames.
#[derive(Debug, Clone, Copy)]
struct Frame {
    mode: CenterlineMode,
    center: Option<CubicPoly>,
}

/// Mutable loop state.
#[derive(Debug, Clone)]
pub struct SimState {
    pub k: u64,
    pub pose: Pose,
    /// Command applied on the previous step.
    pub prev_applied: Twist,
    /// Preset mode: target arc length.
    pub target_s: f64,
    /// Arc-length progress of the robot's foot point since the start.
    pub progress: f64,
    foot_s: f64,
    start: [f64; 2],
    frame: Option<Frame>,
    rng: ChaCha8Rng,
}

/// A scenario bound to its track, stepping one control period at a time.
pub struct Simulator<'a> {
    sc: &'a Scenario,
    track: &'a Track,
    geom: PathGeometry,
    projector: PathProjector<'a>,
    limits: SaturationLimits,
    frame_steps: u64,
    pub state: SimState,
}

impl<'a> Simulator<'a> {
    pub fn new(sc: &'a Scenario, track: &'a Track) -> Result<Self> {
        sc.validate()?;
        let geom = PathGeometry::new(track)?;
        let mut projector = PathProjector::new(&track.reference_path)?;
        let limits = sc.limits();
        let pose = sc.initial_pose;
        let foot = projector.project(pose.position());
        let v0 = sc.initial_speed.unwrap_or(sc.v_t);
        let prev_applied =
            if sc.saturation_enabled { Twist::new(v0.clamp(limits.v_min, limits.v_max), 0.0) } else { Twist::new(v0, 0.0) };
        let target_s = geom.normalize(foot.s + sc.target_lead);
        let frame_steps = ((sc.sensor.frame_period / sc.dt).round() as u64).max(1);
        Ok(Self {
            sc,
            track,
            geom,
            projector,
            limits,
            frame_steps,
            state: SimState {
                k: 0,
                pose,
                prev_applied,
                target_s,
                progress: 0.0,
                foot_s: foot.s,
                start: foot.foot,
                frame: None,
                rng: ChaCha8Rng::seed_from_u64(sc.rng_seed),
            },
        })
    }

    pub fn geometry(&self) -> &PathGeometry {
        &self.geom
    }

    /// Vision-mode target: look-ahead points on the held centreline, read as
    /// if it were current and placed in the world with the current pose.
    fn vision_target(&self, center: &CubicPoly) -> Result<(TargetState, bool)> {
        let sc = self.sc;
        let pose = self.state.pose;
        let la = lookahead_points(center, sc.lookahead_lead, sc.lookahead_spacing)?;
        let [a, b, c] = la.points.map(|p| pose.to_global(p));
        let phi = (b[1] - a[1]).atan2(b[0] - a[0]);
        let phi_dot = target_heading_rate(a, b, c, sc.sensor.frame_period)?;
        Ok((TargetState { x: a[0], y: a[1], phi, v: sc.v_t, phi_dot }, la.extrapolated))
    }

    fn perceive(&mut self) -> Result<()> {
        let st = &mut self.state;
        let (left, right) = sense_lanes(self.track, &self.geom, &st.pose, st.foot_s, &self.sc.sensor, &mut st.rng)?;
        let est = estimate_lanes(&left, &right, &self.sc.lane_fit)?;
        st.frame = Some(Frame { mode: est.center.mode, center: est.center.centerline });
        Ok(())
    }

    /// Runs one control period and returns its record. The state afterwards
    /// holds the next pose.
    pub fn step(&mut self) -> Result<StepRecord> {
        let sc = self.sc;
        let t = self.state.k as f64 * sc.dt;
        let mut flags = 0;

        let (target, mode) = match sc.mode {
            SimMode::PresetPath => {
                (Some(target_at(&self.geom, self.state.target_s, sc.v_t, sc.heading_rate_spacing)?), StepMode::Preset)
            }
            SimMode::Vision => {
                if self.state.k.is_multiple_of(self.frame_steps) {
                    self.perceive()?;
                }
                let frame = self.state.frame.expect("perceived on the first step");
                match &frame.center {
                    Some(center) => {
                        let (tg, extrapolated) = self.vision_target(center)?;
                        if extrapolated {
                            flags |= FLAG_EXTRAPOLATED;
                        }
                        (Some(tg), StepMode::Lanes(frame.mode))
                    }
                    None => (None, StepMode::Lanes(frame.mode)),
                }
            }
        };

        let pose = self.state.pose;
        let prev = self.state.prev_applied;
        let (commanded, applied, target_sample, error_sample) = match target {
            None => {
                // Nothing to follow: creep straight ahead at the minimum speed.
                flags |= FLAG_FALLBACK;
                let cmd = Twist::new(self.limits.v_min, 0.0);
                (cmd, cmd, None, None)
            }
            Some(tg) => {
                let e = polar_error(&pose, &tg);
                let v = proposed_linear(&e, &tg, &sc.gains);
                let omega = if e.rho <= EPS_RHO {
                    flags |= FLAG_RHO_HOLD;
                    prev.omega
                } else {
                    let g = match sc.controller {
                        ControllerKind::Proposed => proposed_angular_guarded(&e, &tg, &sc.gains, sc.coupling)?,
                        ControllerKind::Comparative => comparative_angular_guarded(&e, &tg, &sc.gains)?,
                    };
                    if g.singular {
                        flags |= FLAG_SINGULAR;
                    }
                    g.value
                };
                let cmd = Twist::new(v, omega);
                let applied = if sc.saturation_enabled {
                    let l = &self.limits;
                    let clamped = Twist::new(v.clamp(l.v_min, l.v_max), omega.clamp(-l.omega_abs_max, l.omega_abs_max));
                    let out = saturate(cmd, prev, l, sc.dt)?;
                    if clamped != cmd {
                        flags |= FLAG_CLAMP;
                    }
                    if out != clamped {
                        flags |= FLAG_SLEW;
                    }
                    out
                } else {
                    cmd
                };
                let (v1, v2) = lyapunov_values(&e, &sc.gains, sc.controller);
                (
                    cmd,
                    applied,
                    Some(TargetSample { x: tg.x, y: tg.y, phi: tg.phi, phi_dot: tg.phi_dot }),
                    Some(ErrorSample { rho: e.rho, alpha: e.alpha, beta: e.beta, v1, v2 }),
                )
            }
        };

        let record = StepRecord {
            t,
            pose,
            commanded,
            applied,
            target: target_sample,
            error: error_sample,
            flags,
            mode,
        };

        let st = &mut self.state;
        st.pose = integrate_with(pose, applied, sc.dt, sc.stepper)?;
        st.prev_applied = applied;
        st.k += 1;
        Ok(record)
    }

    /// Updates lap progress for the pose just logged and reports whether the
    /// run is over.
    fn finished_after(&mut self, rec: &StepRecord) -> Option<Termination> {
        let sc = self.sc;
        let len = self.geom.length();
        let foot = self.projector.project(rec.pose.position());
        let mut ds = foot.s - self.state.foot_s;
        if self.geom.is_closed() {
            ds -= len * (ds / len).round();
        }
        self.state.progress += ds;
        self.state.foot_s = foot.s;

        if self.geom.is_closed() {
            let d = (rec.pose.x - self.state.start[0]).hypot(rec.pose.y - self.state.start[1]);
            if self.state.progress >= len && d <= LAP_RADIUS {
                return Some(Termination::LapComplete);
            }
        } else if sc.mode == SimMode::Vision && foot.s + sc.lookahead_lead + 2.0 * sc.lookahead_spacing >= len {
            return Some(Termination::Finished);
        }
        if sc.mode == SimMode::PresetPath {
            match advance_target(&self.geom, self.state.target_s, sc.v_t, sc.dt, sc.heading_rate_spacing) {
                Ok((_, s)) => self.state.target_s = s,
                Err(Error::PathExhausted) => return Some(Termination::Finished),
                Err(_) => return Some(Termination::Finished),
            }
        }
        if self.state.k as f64 * sc.dt >= sc.duration_max {
            return Some(Termination::Timeout);
        }
        None
    }

    pub fn run_to_end(mut self) -> Result<SimLog> {
        let mut records = Vec::new();
        loop {
            let rec = self.step()?;
            let done = self.finished_after(&rec);
            records.push(rec);
            if let Some(termination) = done {
                return Ok(SimLog { dt: self.sc.dt, termination, records });
            }
        }
    }
}

/// Builds the scenario's track and runs it to termination.
pub fn run(sc: &Scenario) -> Result<SimLog> {
    let track = sc.track.build()?;
    Simulator::new(sc, &track)?.run_to_end()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scenario::{Shape, TrackSpec};

    fn straight_scenario() -> Scenario {
        Scenario {
            track: TrackSpec { shape: Shape::Straight { length: 50.0 }, ..Default::default() },
            duration_max: 20.0,
            ..Default::default()
        }
    }

    #[test]
    fn advance_target_examples() {
        let g = PathGeometry::new(&Track::straight(50.0)).unwrap();
        let (tg, s) = advance_target(&g, 0.0, 1.5, 1.0, 0.5).unwrap();
        assert!((tg.x - 1.5).abs() < 1e-12 && tg.y == 0.0 && tg.phi == 0.0 && tg.phi_dot == 0.0);
        assert_eq!(s, 1.5);
        assert!(matches!(advance_target(&g, 49.5, 1.5, 1.0, 0.5), Err(Error::PathExhausted)));

        let g = PathGeometry::new(&Track::circle(15.0)).unwrap();
        let (tg, _) = advance_target(&g, 10.0, 1.5, 0.01, 0.5).unwrap();
        assert!((tg.phi_dot - 0.1).abs() < 1e-3, "{}", tg.phi_dot);
        let (_, s) = advance_target(&g, g.length() - 0.005, 1.5, 0.01, 0.5).unwrap();
        assert!((s - 0.01).abs() < 1e-9);
    }

    #[test]
    fn equilibrium_on_straight_path() {
        let sc = Scenario { target_lead: 0.0, ..straight_scenario() };
        let track = sc.track.build().unwrap();
        let mut sim = Simulator::new(&sc, &track).unwrap();
        sim.step().unwrap();
        assert!(sim.state.pose.y.abs() < 1e-6);
    }

    #[test]
    fn one_step_timeout() {
        let sc = Scenario { duration_max: 0.01, ..straight_scenario() };
        let log = run(&sc).unwrap();
        assert_eq!(log.records.len(), 1);
        assert_eq!(log.termination, Termination::Timeout);
    }

    #[test]
    fn timestamps_are_integer_multiples() {
        let sc = Scenario { dt: 0.1, duration_max: 5.0, ..straight_scenario() };
        let log = run(&sc).unwrap();
        for (k, r) in log.records.iter().enumerate() {
            assert_eq!(r.t, k as f64 * 0.1);
        }
    }

    #[test]
    fn open_track_finishes() {
        let sc = Scenario { duration_max: 100.0, ..straight_scenario() };
        let log = run(&sc).unwrap();
        assert_eq!(log.termination, Termination::Finished);
    }

    #[test]
    fn vision_with_no_paint_creeps_at_minimum_speed() {
        let mut sc = straight_scenario();
        sc.mode = SimMode::Vision;
        sc.track.zones = Some(vec![crate::sim::StyleZone {
            s_start: 0.0,
            s_end: 50.0,
            side: crate::sim::Side::Both,
            style: crate::sim::BoundaryStyle::Unpainted,
        }]);
        sc.duration_max = 2.0;
        let log = run(&sc).unwrap();
        for r in &log.records {
            assert_eq!(r.applied, Twist::new(0.6, 0.0));
            assert_eq!(r.mode, StepMode::Lanes(CenterlineMode::None));
        }
    }
}
