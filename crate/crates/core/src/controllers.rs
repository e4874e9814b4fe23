//! Lyapunov moving-target tracking laws and command saturation.
//!
//! Two controllers share the same linear-speed law
//! `v = (v_t cos(beta) + lambda_v rho) cos(alpha)`:
//!
//! * the proposed controller, whose angular law makes
//!   `V2 = (1 - cos(alpha))/k1 + (1 - cos(beta))/k2` decay at
//!   `-lambda_a sin^2(alpha) / k1`;
//! * the comparative controller built on `V2 = (alpha^2 + beta^2) / 2`.
//!
//! Both angular laws divide by a function of `alpha`. The `*_guarded`
//! variants clamp those denominators and report that they did so, which is
//! what the closed loop uses; the plain variants refuse instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{polar_rates, PolarError, TargetState, Twist, EPS_RHO};

/// Magnitude floor for `sin(alpha)` and `alpha` in the angular laws.
pub const EPS_DENOM: f64 = 1e-6;

/// The naive linear law refuses `|cos(alpha)|` at or below this.
pub const EPS_COS: f64 = 1e-3;

/// Below this `|alpha|`, `sin(2 alpha) / (2 alpha)` is evaluated by series.
const SERIES_ALPHA: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerGains {
    pub lambda_v: f64,
    pub lambda_a: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self { lambda_v: 0.075, lambda_a: 0.15, k1: 0.8, k2: 50.0 }
    }
}

impl ControllerGains {
    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("lambda_v", self.lambda_v), ("lambda_a", self.lambda_a), ("k1", self.k1), ("k2", self.k2)] {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidParams(format!("gain {name} must be positive, got {g}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationLimits {
    pub v_min: f64,
    pub v_max: f64,
    pub omega_abs_max: f64,
    pub accel_max: f64,
    pub alpha_accel_max: f64,
}

impl SaturationLimits {
    pub const V_MIN: f64 = 0.6;
    pub const V_HEADROOM: f64 = 0.25;
    pub const OMEGA_ABS_MAX: f64 = 0.4;

    /// Field-test bounds generalised to any target speed: `0.6 <= v <= v_t + 0.25`,
    /// `|omega| <= 0.4`, with 1 m/s^2 and 1 rad/s^2 slew limits.
    pub fn for_target_speed(v_t: f64) -> Self {
        Self {
            v_min: Self::V_MIN,
            v_max: v_t + Self::V_HEADROOM,
            omega_abs_max: Self::OMEGA_ABS_MAX,
            accel_max: 1.0,
            alpha_accel_max: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.v_min <= self.v_max
            && self.omega_abs_max > 0.0
            && self.accel_max > 0.0
            && self.alpha_accel_max > 0.0
            && [self.v_min, self.v_max, self.omega_abs_max, self.accel_max, self.alpha_accel_max]
                .iter()
                .all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("inconsistent saturation limits {self:?}")))
        }
    }

    /// True when `cmd` lies inside the magnitude bounds.
    pub fn contains(&self, cmd: Twist) -> bool {
        cmd.v >= self.v_min && cmd.v <= self.v_max && cmd.omega.abs() <= self.omega_abs_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    #[default]
    Proposed,
    Comparative,
}

/// How far the `(sin(alpha)/(k1 rho) + sin(beta)/(k2 rho))` coupling factor
/// reaches inside the proposed angular law.
///
/// `TargetSpeedTerm` scales only the `v_t` term and is the form for which the
/// `V2` decay identity holds exactly. `WholeBracket` scales every bracketed
/// term, as the law is sometimes typeset; it is kept as a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingScope {
    #[default]
    TargetSpeedTerm,
    WholeBracket,
}

/// A control value plus whether a denominator guard was engaged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guarded {
    pub value: f64,
    pub singular: bool,
}

fn clamp_magnitude(x: f64, floor: f64) -> (f64, bool) {
    if x.abs() >= floor {
        (x, false)
    } else if x < 0.0 {
        (-floor, true)
    } else {
        (floor, true)
    }
}

/// `sin(2a) / (2a)`, continuous through zero.
pub fn sinc2(a: f64) -> f64 {
    if a.abs() < SERIES_ALPHA {
        1.0 - 2.0 * a * a / 3.0
    } else {
        (2.0 * a).sin() / (2.0 * a)
    }
}

/// Linear law shared by both controllers: `(v_t cos(beta) + lambda_v rho) cos(alpha)`.
pub fn proposed_linear(e: &PolarError, target: &TargetState, g: &ControllerGains) -> f64 {
    (target.v * e.beta.cos() + g.lambda_v * e.rho) * e.alpha.cos()
}

pub fn comparative_linear(e: &PolarError, target: &TargetState, g: &ControllerGains) -> f64 {
    proposed_linear(e, target, g)
}

/// The unmodified law `v_t cos(beta)/cos(alpha) + lambda_v rho cos(alpha)`.
///
/// It blows up as `alpha` approaches `+-pi/2` and is never used in closed loop.
pub fn naive_linear(e: &PolarError, target: &TargetState, g: &ControllerGains) -> Result<f64> {
    let ca = e.alpha.cos();
    if ca.abs() <= EPS_COS {
        return Err(Error::NearSingularAlpha(e.alpha));
    }
    Ok(target.v * e.beta.cos() / ca + g.lambda_v * e.rho * ca)
}

pub fn proposed_angular_guarded(
    e: &PolarError,
    target: &TargetState,
    g: &ControllerGains,
    scope: CouplingScope,
) -> Result<Guarded> {
    if !(e.rho > EPS_RHO) {
        return Err(Error::DegenerateRho(e.rho));
    }
    let (sa, ca) = e.alpha.sin_cos();
    let (sb, cb) = e.beta.sin_cos();
    let (sa_den, clamped) = clamp_magnitude(sa, EPS_DENOM);
    let coupling = sa / (g.k1 * e.rho) + sb / (g.k2 * e.rho);
    // k1 sin(2a) / (2 sin(a)) reduces to k1 cos(a).
    let speed_term = (g.k1 * ca * cb - g.k1 * sb / sa_den) * target.v;
    let turn_term = -target.phi_dot * g.k1 * sb / (g.k2 * sa_den);
    let gain_term = g.k1 * ca * g.lambda_v * (sa / g.k1 + sb / g.k2);
    let omega = match scope {
        CouplingScope::TargetSpeedTerm => g.lambda_a * sa + coupling * speed_term + turn_term + gain_term,
        CouplingScope::WholeBracket => g.lambda_a * sa + coupling * (speed_term + turn_term + gain_term),
    };
    Ok(Guarded { value: omega, singular: clamped && sb != 0.0 })
}

pub fn proposed_angular(e: &PolarError, target: &TargetState, g: &ControllerGains) -> Result<f64> {
    let out = proposed_angular_guarded(e, target, g, CouplingScope::TargetSpeedTerm)?;
    if out.singular {
        return Err(Error::NearSingularAlpha(e.alpha));
    }
    Ok(out.value)
}

pub fn comparative_angular_guarded(e: &PolarError, target: &TargetState, g: &ControllerGains) -> Result<Guarded> {
    if !(e.rho > EPS_RHO) {
        return Err(Error::DegenerateRho(e.rho));
    }
    let (a, b) = (e.alpha, e.beta);
    let (a_den, clamped) = clamp_magnitude(a, EPS_DENOM);
    let s2 = sinc2(a);
    let omega = g.lambda_a * a + (a + b) / e.rho * (s2 * b.cos() - b.sin() / a_den) * target.v
        - b / a_den * target.phi_dot
        + s2 * g.lambda_v * (a + b);
    Ok(Guarded { value: omega, singular: clamped && b != 0.0 })
}

/// Full comparative command. Near-zero `alpha` is clamped rather than refused.
pub fn comparative_cmd(e: &PolarError, target: &TargetState, g: &ControllerGains) -> Result<Twist> {
    let omega = comparative_angular_guarded(e, target, g)?.value;
    Ok(Twist::new(comparative_linear(e, target, g), omega))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub v: f64,
    pub v1: f64,
    pub v2: f64,
    pub v1_dot: f64,
    pub v2_dot: f64,
    pub variant: ControllerKind,
}

/// `(V1, V2)` for the given variant; defined everywhere.
pub fn lyapunov_values(e: &PolarError, g: &ControllerGains, variant: ControllerKind) -> (f64, f64) {
    let v1 = 0.5 * e.rho * e.rho;
    let v2 = match variant {
        ControllerKind::Proposed => (1.0 - e.alpha.cos()) / g.k1 + (1.0 - e.beta.cos()) / g.k2,
        ControllerKind::Comparative => 0.5 * (e.alpha * e.alpha + e.beta * e.beta),
    };
    (v1, v2)
}

/// Lyapunov values and their time derivatives along the error dynamics
/// driven by `cmd`.
///
/// Under the closed-loop laws the rates reduce to
/// [`v1_rate_closed_form`] and [`v2_rate_closed_form`].
pub fn lyapunov_report(
    e: &PolarError,
    cmd: Twist,
    target: &TargetState,
    g: &ControllerGains,
    variant: ControllerKind,
) -> Result<LyapunovReport> {
    let (v1, v2) = lyapunov_values(e, g, variant);
    let rates = polar_rates(e, cmd, target)?;
    let v1_dot = e.rho * rates.rho_dot;
    let v2_dot = match variant {
        ControllerKind::Proposed => e.alpha.sin() * rates.alpha_dot / g.k1 + e.beta.sin() * rates.beta_dot / g.k2,
        ControllerKind::Comparative => e.alpha * rates.alpha_dot + e.beta * rates.beta_dot,
    };
    Ok(LyapunovReport { v: v1 + v2, v1, v2, v1_dot, v2_dot, variant })
}

/// `dV1/dt = -lambda_v rho^2 cos^2(alpha) + v_t rho sin^2(alpha) cos(beta)` under the linear law.
pub fn v1_rate_closed_form(e: &PolarError, target: &TargetState, g: &ControllerGains) -> f64 {
    let (sa, ca) = e.alpha.sin_cos();
    -g.lambda_v * e.rho * e.rho * ca * ca + target.v * e.rho * sa * sa * e.beta.cos()
}

/// `dV2/dt = -lambda_a sin^2(alpha) / k1` under the proposed laws.
pub fn v2_rate_closed_form(e: &PolarError, g: &ControllerGains) -> f64 {
    let sa = e.alpha.sin();
    -g.lambda_a * sa * sa / g.k1
}

/// Clamps a raw command to the magnitude bounds, then slew-limits it against
/// the previously applied command.
pub fn saturate(raw: Twist, prev: Twist, limits: &SaturationLimits, dt: f64) -> Result<Twist> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let v = raw.v.clamp(limits.v_min, limits.v_max);
    let v = v.clamp(prev.v - limits.accel_max * dt, prev.v + limits.accel_max * dt);
    let w = raw.omega.clamp(-limits.omega_abs_max, limits.omega_abs_max);
    let w = w.clamp(prev.omega - limits.alpha_accel_max * dt, prev.omega + limits.alpha_accel_max * dt);
    Ok(Twist::new(v, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn err(rho: f64, alpha: f64, beta: f64) -> PolarError {
        PolarError { rho, theta: 0.0, alpha, beta }
    }

    fn tgt(v: f64, phi_dot: f64) -> TargetState {
        TargetState { v, phi_dot, ..Default::default() }
    }

    #[test]
    fn linear_law_examples() {
        let g = ControllerGains::default();
        assert!((proposed_linear(&err(2.0, 0.0, 0.0), &tgt(1.5, 0.0), &g) - 1.65).abs() < 1e-15);
        assert!(proposed_linear(&err(3.0, FRAC_PI_2, 0.4), &tgt(1.5, 0.0), &g).abs() < 1e-15);
        assert_eq!(proposed_linear(&err(0.0, 0.0, PI), &tgt(1.0, 0.0), &g), -1.0);
    }

    #[test]
    fn naive_law_examples() {
        let g = ControllerGains::default();
        assert!((naive_linear(&err(2.0, 0.0, 0.0), &tgt(1.5, 0.0), &g).unwrap() - 1.65).abs() < 1e-15);
        assert!(matches!(
            naive_linear(&err(1.0, FRAC_PI_2 - 1e-9, 0.0), &tgt(1.0, 0.0), &g),
            Err(Error::NearSingularAlpha(_))
        ));
        let v = naive_linear(&err(1.0, FRAC_PI_3, 0.0), &tgt(1.0, 0.0), &g).unwrap();
        assert!((v - 2.0375).abs() < 1e-12);
    }

    #[test]
    fn proposed_angular_examples() {
        let g = ControllerGains::default();
        let w = proposed_angular(&err(1.0, FRAC_PI_2, 0.0), &tgt(0.0, 0.0), &g).unwrap();
        assert!((w - 0.15).abs() < 1e-12);
        let w = proposed_angular(&err(1.0, 1e-12, 0.0), &tgt(0.0, 0.0), &g).unwrap();
        assert!(w.abs() < 1e-12);
        assert!(matches!(
            proposed_angular(&err(1.0, 0.0, 0.3), &tgt(1.0, 0.0), &g),
            Err(Error::NearSingularAlpha(_))
        ));
        assert!(matches!(
            proposed_angular(&err(1e-4, 0.1, 0.0), &tgt(1.0, 0.0), &g),
            Err(Error::DegenerateRho(_))
        ));
    }

    #[test]
    fn equilibrium_fixpoint() {
        let g = ControllerGains::default();
        let e = err(EPS_RHO * 1.0001, 0.0, 0.0);
        let t = tgt(1.5, 0.0);
        assert!((proposed_linear(&e, &t, &g) - 1.5).abs() < 1e-3);
        assert_eq!(proposed_angular(&e, &t, &g).unwrap(), 0.0);
    }

    #[test]
    fn comparative_examples() {
        let g = ControllerGains::default();
        let cmd = comparative_cmd(&err(1.0, 1e-9, 0.0), &tgt(1.0, 0.0), &g).unwrap();
        assert!(cmd.omega.abs() < 1e-8);
        let cmd = comparative_cmd(&err(1.0, FRAC_PI_4, 0.0), &tgt(0.0, 0.0), &g).unwrap();
        let expect = 0.15 * FRAC_PI_4 + (1.0 / FRAC_PI_2) * 0.075 * FRAC_PI_4;
        assert!((cmd.omega - expect).abs() < 1e-12);
        assert!((cmd.omega - 0.1553).abs() < 1e-4);
        // Near-zero alpha with beta != 0 is clamped, not refused.
        let out = comparative_angular_guarded(&err(1.0, 0.0, 0.1), &tgt(1.0, 0.0), &g).unwrap();
        assert!(out.singular && out.value.is_finite());
    }

    #[test]
    fn sinc2_is_continuous_at_series_switch() {
        let below = sinc2(SERIES_ALPHA * (1.0 - 1e-12));
        let above = sinc2(SERIES_ALPHA * (1.0 + 1e-12));
        assert!((below - above).abs() < 1e-14);
        assert_eq!(sinc2(0.0), 1.0);
    }

    #[test]
    fn lyapunov_examples() {
        let g = ControllerGains::default();
        let (v1, v2) = lyapunov_values(&err(2.0, 0.0, 0.0), &g, ControllerKind::Proposed);
        assert_eq!((v1, v2), (2.0, 0.0));
        let (_, v2) = lyapunov_values(&err(1.0, PI, 0.0), &g, ControllerKind::Proposed);
        assert!((v2 - 2.5).abs() < 1e-15);
        assert!((v2_rate_closed_form(&err(1.0, FRAC_PI_2, 0.0), &g) + 0.1875).abs() < 1e-15);
        let (_, v2) = lyapunov_values(&err(1.0, 0.3, -0.4), &g, ControllerKind::Comparative);
        assert!((v2 - 0.125).abs() < 1e-15);
        assert!(matches!(
            lyapunov_report(&err(0.0, 0.0, 0.0), Twist::default(), &tgt(1.0, 0.0), &g, ControllerKind::Proposed),
            Err(Error::DegenerateRho(_))
        ));
    }

    #[test]
    fn closed_loop_rates_reduce_to_closed_forms() {
        let g = ControllerGains::default();
        let t = tgt(1.5, 0.02);
        for &(rho, a, b) in &[(2.0, 0.1, 0.05), (0.7, -1.2, 0.4), (5.0, 2.5, -2.9), (1.3, 0.01, -0.6)] {
            let e = err(rho, a, b);
            let cmd = Twist::new(
                proposed_linear(&e, &t, &g),
                proposed_angular_guarded(&e, &t, &g, CouplingScope::TargetSpeedTerm).unwrap().value,
            );
            let r = lyapunov_report(&e, cmd, &t, &g, ControllerKind::Proposed).unwrap();
            assert!((r.v1_dot - v1_rate_closed_form(&e, &t, &g)).abs() < 1e-12 * (1.0 + r.v1_dot.abs()));
            assert!((r.v2_dot - v2_rate_closed_form(&e, &g)).abs() < 1e-9 * (1.0 + r.v2_dot.abs()));

            let cmd = comparative_cmd(&e, &t, &g).unwrap();
            let r = lyapunov_report(&e, cmd, &t, &g, ControllerKind::Comparative).unwrap();
            let expect = -g.lambda_a * a * a;
            assert!((r.v2_dot - expect).abs() < 1e-9 * (1.0 + expect.abs()), "{} vs {}", r.v2_dot, expect);
        }
    }

    #[test]
    fn whole_bracket_form_breaks_the_decay_identity() {
        let g = ControllerGains::default();
        let t = tgt(1.5, 0.02);
        let e = err(2.0, 0.1, 0.05);
        let cmd = Twist::new(
            proposed_linear(&e, &t, &g),
            proposed_angular_guarded(&e, &t, &g, CouplingScope::WholeBracket).unwrap().value,
        );
        let r = lyapunov_report(&e, cmd, &t, &g, ControllerKind::Proposed).unwrap();
        let target_rate = v2_rate_closed_form(&e, &g);
        assert!((r.v2_dot - target_rate).abs() > 1e-3 * target_rate.abs());
    }

    #[test]
    fn saturation_examples() {
        let lim = SaturationLimits::for_target_speed(1.5);
        let prev = Twist::new(1.75, 0.4);
        let out = saturate(Twist::new(2.5, 0.6), prev, &lim, 0.01).unwrap();
        assert_eq!(out, Twist::new(1.75, 0.4));
        let out = saturate(Twist::new(0.3, 0.0), Twist::new(0.6, 0.0), &lim, 0.01).unwrap();
        assert_eq!(out.v, 0.6);
        assert_eq!(SaturationLimits::for_target_speed(2.0).v_max, 2.25);
        // Slew: from 1.0 the next step can rise by at most accel_max * dt.
        let out = saturate(Twist::new(1.7, 0.0), Twist::new(1.0, 0.0), &lim, 0.01).unwrap();
        assert!((out.v - 1.01).abs() < 1e-15);
        assert!(saturate(Twist::default(), prev, &lim, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn saturate_stays_in_bounds(
            v in -5.0f64..5.0, w in -3.0f64..3.0,
            pv in 0.6f64..1.75, pw in -0.4f64..0.4, dt in 1e-3f64..0.5,
        ) {
            let lim = SaturationLimits::for_target_speed(1.5);
            let prev = Twist::new(pv, pw);
            let out = saturate(Twist::new(v, w), prev, &lim, dt).unwrap();
            prop_assert!(lim.contains(out));
            prop_assert!((out.v - pv).abs() <= lim.accel_max * dt + 1e-12);
            prop_assert!((out.omega - pw).abs() <= lim.alpha_accel_max * dt + 1e-12);
        }

        #[test]
        fn saturate_idempotent_without_slew(v in -5.0f64..5.0, w in -3.0f64..3.0) {
            let lim = SaturationLimits { accel_max: 1e9, alpha_accel_max: 1e9, ..SaturationLimits::for_target_speed(2.0) };
            let prev = Twist::new(1.0, 0.0);
            let once = saturate(Twist::new(v, w), prev, &lim, 0.01).unwrap();
            let twice = saturate(once, prev, &lim, 0.01).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn linear_laws_agree(rho in 0.0f64..10.0, a in -3.1f64..3.1, b in -3.1f64..3.1, vt in 0.0f64..3.0) {
            let g = ControllerGains::default();
            let e = err(rho, a, b);
            let t = tgt(vt, 0.0);
            prop_assert_eq!(proposed_linear(&e, &t, &g), comparative_linear(&e, &t, &g));
        }
    }
}
