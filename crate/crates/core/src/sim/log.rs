//! Per-step simulation records and their CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanefit::CenterlineMode;
use crate::model::{Pose, Twist};

/// Raw command fell outside the magnitude bounds.
pub const FLAG_CLAMP: u32 = 1;
/// Slew limiting changed the command.
pub const FLAG_SLEW: u32 = 2;
/// An angular-law denominator guard engaged.
pub const FLAG_SINGULAR: u32 = 4;
/// Target too close for the angular law; previous yaw rate held.
pub const FLAG_RHO_HOLD: u32 = 8;
/// No centreline; minimum-speed straight-ahead command applied.
pub const FLAG_FALLBACK: u32 = 16;
/// Look-ahead points left the fitted centreline's range.
pub const FLAG_EXTRAPOLATED: u32 = 32;

pub const CSV_HEADER: [&str; 19] = [
    "t", "x", "y", "phi", "v_cmd", "omega_cmd", "v_app", "omega_app", "x_t", "y_t", "phi_t", "phi_t_dot", "rho",
    "alpha", "beta", "V1", "V2", "sat_flag", "mode",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    Preset,
    Lanes(CenterlineMode),
}

impl StepMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepMode::Preset => "preset",
            StepMode::Lanes(m) => m.as_str(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "preset" => StepMode::Preset,
            "both_lanes" => StepMode::Lanes(CenterlineMode::BothLanes),
            "left_only" => StepMode::Lanes(CenterlineMode::LeftOnly),
            "right_only" => StepMode::Lanes(CenterlineMode::RightOnly),
            "none" => StepMode::Lanes(CenterlineMode::None),
            other => return Err(Error::Malformed(format!("unknown mode `{other}`"))),
        })
    }
}

/// Tracked point as logged; speed is the scenario's target speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSample {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub phi_dot: f64,
}

/// Polar error and Lyapunov values of a step that had a target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub v1: f64,
    pub v2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub pose: Pose,
    pub commanded: Twist,
    pub applied: Twist,
    pub target: Option<TargetSample>,
    pub error: Option<ErrorSample>,
    pub flags: u32,
    pub mode: StepMode,
}

impl StepRecord {
    /// A record with only time, pose and applied command filled in.
    pub fn synthetic(t: f64, pose: Pose, applied: Twist) -> Self {
        Self { t, pose, commanded: applied, applied, target: None, error: None, flags: 0, mode: StepMode::Preset }
    }

    fn to_row(self) -> Vec<String> {
        let nan = f64::NAN;
        let tg = self.target.map_or([nan; 4], |t| [t.x, t.y, t.phi, t.phi_dot]);
        let er = self.error.map_or([nan; 5], |e| [e.rho, e.alpha, e.beta, e.v1, e.v2]);
        let mut row: Vec<String> = [
            self.t,
            self.pose.x,
            self.pose.y,
            self.pose.phi,
            self.commanded.v,
            self.commanded.omega,
            self.applied.v,
            self.applied.omega,
        ]
        .into_iter()
        .chain(tg)
        .chain(er)
        .map(fmt_sig)
        .collect();
        row.push(self.flags.to_string());
        row.push(self.mode.as_str().to_string());
        row
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Closed track: a full lap of progress ending near the start.
    LapComplete,
    /// Open track: the target or look-ahead reached the end of the path.
    Finished,
    Timeout,
    /// The log was read back from a file that does not record the reason.
    Unrecorded,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::LapComplete => "lap_complete",
            Termination::Finished => "finished",
            Termination::Timeout => "timeout",
            Termination::Unrecorded => "unrecorded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimLog {
    pub dt: f64,
    pub termination: Termination,
    pub records: Vec<StepRecord>,
}

impl SimLog {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        for r in &self.records {
            out.write_record(r.to_row())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Reads a log written by [`SimLog::write_csv`]. Columns are located by
    /// name; every header column is required.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        let mut idx = [0usize; 19];
        for (slot, name) in idx.iter_mut().zip(CSV_HEADER) {
            *slot = headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Malformed(format!("missing column `{name}`")))?;
        }
        let mut records = Vec::new();
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let field = |i: usize| row.get(idx[i]).unwrap_or("").trim();
            let num = |i: usize| -> Result<f64> {
                field(i).parse::<f64>().map_err(|_| {
                    Error::Malformed(format!("row {}: column `{}` is not a number: `{}`", line + 1, CSV_HEADER[i], field(i)))
                })
            };
            let mut v = [0.0; 17];
            for (i, slot) in v.iter_mut().enumerate() {
                *slot = num(i)?;
            }
            let flags = field(17)
                .parse::<u32>()
                .map_err(|_| Error::Malformed(format!("row {}: bad sat_flag `{}`", line + 1, field(17))))?;
            let target = (!v[8..12].iter().all(|x| x.is_nan()))
                .then(|| TargetSample { x: v[8], y: v[9], phi: v[10], phi_dot: v[11] });
            let error = (!v[12..17].iter().all(|x| x.is_nan()))
                .then(|| ErrorSample { rho: v[12], alpha: v[13], beta: v[14], v1: v[15], v2: v[16] });
            records.push(StepRecord {
                t: v[0],
                pose: Pose::new(v[1], v[2], v[3]),
                commanded: Twist::new(v[4], v[5]),
                applied: Twist::new(v[6], v[7]),
                target,
                error,
                flags,
                mode: StepMode::parse(field(18))?,
            });
        }
        let dt = if records.len() > 1 { records[1].t - records[0].t } else { 0.0 };
        Ok(Self { dt, termination: Termination::Unrecorded, records })
    }
}

/// `x` to nine significant digits, `%g` style: fixed notation for moderate
/// exponents, scientific otherwise, trailing zeros removed.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.5), "1.5");
        assert_eq!(fmt_sig(-2.0), "-2");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig(123456789.4), "123456789");
        assert_eq!(fmt_sig(1234567894.0), "1.23456789e9");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-7");
        assert_eq!(fmt_sig(0.00012345), "0.00012345");
        assert_eq!(fmt_sig(f64::NAN), "NaN");
        assert_eq!(fmt_sig(9.9999999999), "10");
    }

    fn sample_log() -> SimLog {
        let mut a = StepRecord::synthetic(0.0, Pose::new(0.1, -0.2, 0.3), Twist::new(1.5, 0.01));
        a.target = Some(TargetSample { x: 2.0, y: 0.0, phi: 0.0, phi_dot: 0.1 });
        a.error = Some(ErrorSample { rho: 2.0, alpha: -0.1, beta: 0.05, v1: 2.0, v2: 0.01 });
        a.flags = FLAG_CLAMP | FLAG_SLEW;
        let mut b = StepRecord::synthetic(0.01, Pose::new(0.115, -0.2, 0.3001), Twist::new(0.6, 0.0));
        b.flags = FLAG_FALLBACK;
        b.mode = StepMode::Lanes(CenterlineMode::None);
        SimLog { dt: 0.01, termination: Termination::Unrecorded, records: vec![a, b] }
    }

    #[test]
    fn csv_round_trip() {
        let log = sample_log();
        let text = log.to_csv_string();
        assert!(text.starts_with("t,x,y,phi,v_cmd,omega_cmd,v_app,omega_app,x_t,y_t,phi_t,phi_t_dot,rho,alpha,beta,V1,V2,sat_flag,mode\n"));
        let back = SimLog::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, log);
        assert_eq!(back.to_csv_string(), text);
    }

    #[test]
    fn missing_column_is_reported() {
        let err = SimLog::read_csv("t,x,y\n0,0,0\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("phi"));
    }

    proptest! {
        #[test]
        fn sig_text_is_a_fixed_point(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let once = fmt_sig(x);
            let parsed: f64 = once.parse().unwrap();
            prop_assert_eq!(fmt_sig(parsed), once.clone());
            prop_assert!(((parsed - x) / x.abs().max(f64::MIN_POSITIVE)).abs() <= 5e-9 || x == 0.0);
        }
    }
}
