//! Differential-drive kinematics and the polar tracking-error geometry.
//!
//! Angles produced here are always wrapped to `(-pi, pi]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distances to the target at or below this are treated as coincident.
pub const EPS_RHO: f64 = 1e-3;

/// Angular velocities below this have no defined motion radius.
pub const EPS_OMEGA: f64 = 1e-9;

pub type Point2 = [f64; 2];

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Self { x, y, phi: wrap_angle(phi) }
    }

    pub fn position(&self) -> Point2 {
        [self.x, self.y]
    }

    /// Maps a point expressed in this pose's body frame into the global frame.
    pub fn to_global(&self, p: Point2) -> Point2 {
        let (s, c) = self.phi.sin_cos();
        [self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1]]
    }

    /// Maps a global point into this pose's body frame (x forward, y left).
    pub fn to_local(&self, p: Point2) -> Point2 {
        let (s, c) = self.phi.sin_cos();
        let dx = p[0] - self.x;
        let dy = p[1] - self.y;
        [c * dx + s * dy, -s * dx + c * dy]
    }
}

/// Body-frame command: forward speed and yaw rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist {
    pub v: f64,
    pub omega: f64,
}

impl Twist {
    pub fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotParams {
    pub wheel_radius: f64,
    /// Half the distance between the driving wheels.
    pub half_track: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self { wheel_radius: 0.1, half_track: 0.5 }
    }
}

impl RobotParams {
    pub fn new(wheel_radius: f64, half_track: f64) -> Result<Self> {
        if !(wheel_radius > 0.0 && wheel_radius.is_finite()) {
            return Err(Error::InvalidParams(format!("wheel radius must be positive, got {wheel_radius}")));
        }
        if !(half_track > 0.0 && half_track.is_finite()) {
            return Err(Error::InvalidParams(format!("half track must be positive, got {half_track}")));
        }
        Ok(Self { wheel_radius, half_track })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelSpeeds {
    pub v_right: f64,
    pub v_left: f64,
    pub omega_right: f64,
    pub omega_left: f64,
}

impl WheelSpeeds {
    pub fn from_linear(v_right: f64, v_left: f64, params: &RobotParams) -> Self {
        Self {
            v_right,
            v_left,
            omega_right: v_right / params.wheel_radius,
            omega_left: v_left / params.wheel_radius,
        }
    }
}

/// The moving point being tracked, with its speed and heading rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TargetState {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub v: f64,
    pub phi_dot: f64,
}

/// Distance and bearing errors between the robot and its target.
///
/// `alpha` is the line of sight relative to the robot heading, `beta` the line
/// of sight relative to the target heading.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PolarError {
    pub rho: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRates {
    pub rho_dot: f64,
    pub alpha_dot: f64,
    pub beta_dot: f64,
}

pub fn drive_to_body(v_right: f64, v_left: f64, params: &RobotParams) -> Twist {
    Twist {
        v: 0.5 * (v_right + v_left),
        omega: (v_right - v_left) / (2.0 * params.half_track),
    }
}

pub fn body_to_drive(cmd: Twist, params: &RobotParams) -> WheelSpeeds {
    let d = params.half_track;
    WheelSpeeds::from_linear(cmd.v + cmd.omega * d, cmd.v - cmd.omega * d, params)
}

/// Radius of the circle traced under a constant command.
pub fn motion_radius(cmd: Twist) -> Result<f64> {
    if cmd.omega.abs() < EPS_OMEGA {
        return Err(Error::ZeroAngularVelocity(cmd.omega));
    }
    Ok(cmd.v / cmd.omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    #[default]
    Euler,
    /// Closed-form unicycle motion under a held command.
    ExactArc,
}

/// Advances a pose by one explicit-Euler step.
pub fn integrate(pose: Pose, cmd: Twist, dt: f64) -> Result<Pose> {
    integrate_with(pose, cmd, dt, Stepper::Euler)
}

pub fn integrate_with(pose: Pose, cmd: Twist, dt: f64, stepper: Stepper) -> Result<Pose> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let (s, c) = pose.phi.sin_cos();
    let next = match stepper {
        Stepper::Euler => Pose {
            x: pose.x + cmd.v * c * dt,
            y: pose.y + cmd.v * s * dt,
            phi: wrap_angle(pose.phi + cmd.omega * dt),
        },
        Stepper::ExactArc => {
            let dphi = cmd.omega * dt;
            if dphi.abs() < 1e-12 {
                Pose {
                    x: pose.x + cmd.v * c * dt,
                    y: pose.y + cmd.v * s * dt,
                    phi: wrap_angle(pose.phi + dphi),
                }
            } else {
                let radius = cmd.v / cmd.omega;
                let (s1, c1) = (pose.phi + dphi).sin_cos();
                Pose {
                    x: pose.x + radius * (s1 - s),
                    y: pose.y - radius * (c1 - c),
                    phi: wrap_angle(pose.phi + dphi),
                }
            }
        }
    };
    Ok(next)
}

pub fn polar_error(pose: &Pose, target: &TargetState) -> PolarError {
    let dx = target.x - pose.x;
    let dy = target.y - pose.y;
    let rho = dx.hypot(dy);
    // Bearing is undefined at coincidence; fall back to the robot heading.
    let theta = if rho > 0.0 { dy.atan2(dx) } else { wrap_angle(pose.phi) };
    PolarError {
        rho,
        theta,
        alpha: wrap_angle(theta - pose.phi),
        beta: wrap_angle(theta - target.phi),
    }
}

pub fn polar_rates(e: &PolarError, cmd: Twist, target: &TargetState) -> Result<PolarRates> {
    if !(e.rho > EPS_RHO) {
        return Err(Error::DegenerateRho(e.rho));
    }
    let (sa, ca) = e.alpha.sin_cos();
    let (sb, cb) = e.beta.sin_cos();
    let lateral = (cmd.v * sa - target.v * sb) / e.rho;
    Ok(PolarRates {
        rho_dot: target.v * cb - cmd.v * ca,
        alpha_dot: lateral - cmd.omega,
        beta_dot: lateral - target.phi_dot,
    })
}

/// Target yaw rate estimated from three successive look-ahead points.
///
/// The heading change is wrapped before dividing by `dt`.
pub fn target_heading_rate(a: Point2, b: Point2, c: Point2, dt: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let ab = [b[0] - a[0], b[1] - a[1]];
    let bc = [c[0] - b[0], c[1] - b[1]];
    if ab[0] == 0.0 && ab[1] == 0.0 || bc[0] == 0.0 && bc[1] == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let phi_ab = ab[1].atan2(ab[0]);
    let phi_bc = bc[1].atan2(bc[0]);
    Ok(wrap_angle(phi_bc - phi_ab) / dt)
}
