//! Cubic lane models: least-squares fitting, evaluation and the
//! boundary-conditioned temporal cubic.
//!
//! Polynomial order is capped at three everywhere. Higher orders on
//! equispaced samples oscillate near the interval ends.

use serde::{Deserialize, Serialize};

use super::polyline::Polyline;
use super::qr::PivotedQr;
use crate::error::{Error, Result};

/// `y = a0 + a1 x + a2 x^2 + a3 x^3`, considered valid on `x_range`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicPoly {
    pub coeffs: [f64; 4],
    pub x_range: [f64; 2],
}

impl CubicPoly {
    pub fn new(coeffs: [f64; 4], x_range: [f64; 2]) -> Result<Self> {
        if !(x_range[0] < x_range[1]) {
            return Err(Error::InvalidParams(format!("empty validity range {x_range:?}")));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams("non-finite polynomial coefficient".into()));
        }
        Ok(Self { coeffs, x_range })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let [a0, a1, a2, a3] = self.coeffs;
        ((a3 * x + a2) * x + a1) * x + a0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let [_, a1, a2, a3] = self.coeffs;
        (3.0 * a3 * x + 2.0 * a2) * x + a1
    }

    pub fn in_range(&self, x: f64) -> bool {
        x >= self.x_range[0] && x <= self.x_range[1]
    }

    /// `n` evenly spaced samples across the validity range.
    pub fn sample(&self, n: usize) -> Polyline {
        let [lo, hi] = self.x_range;
        let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64).collect();
        eval_poly(self, &xs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicFit {
    pub poly: CubicPoly,
    /// Degree actually fitted; lower than three when the samples cannot
    /// support a cubic. Unused coefficients are zero.
    pub degree: usize,
    pub residual_norm: f64,
}

/// Least-squares cubic through `(x_i, y_i)` via pivoted QR on the Vandermonde
/// system, dropping to lower degree when the columns are numerically dependent.
pub fn fit_cubic(xs: &[f64], ys: &[f64]) -> Result<CubicFit> {
    assert_eq!(xs.len(), ys.len(), "fit_cubic: x and y lengths differ");
    let n = xs.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo < hi) {
        return Err(Error::TooFewPoints(1));
    }
    for degree in (0..=3usize).rev() {
        let cols = degree + 1;
        if cols > n {
            continue;
        }
        let vander: Vec<f64> = xs.iter().flat_map(|&x| (0..cols).map(move |p| x.powi(p as i32))).collect();
        let qr = PivotedQr::new(vander, n, cols, ys.to_vec());
        if !qr.is_full_rank() {
            continue;
        }
        let sol = qr.solve();
        let mut coeffs = [0.0; 4];
        coeffs[..cols].copy_from_slice(&sol);
        return Ok(CubicFit { poly: CubicPoly::new(coeffs, [lo, hi])?, degree, residual_norm: qr.residual_norm() });
    }
    unreachable!("a constant column of ones always has rank one")
}

pub fn fit_cubic_points(pts: &[[f64; 2]]) -> Result<CubicFit> {
    let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
    fit_cubic(&xs, &ys)
}

/// Horner evaluation at each `x`.
pub fn eval_poly(p: &CubicPoly, xs: &[f64]) -> Polyline {
    xs.iter().map(|&x| [x, p.eval(x)]).collect::<Vec<_>>().into()
}

/// Coefficients of the cubic `theta(t)` meeting `theta(0)`, `theta(t0)` and
/// the end rates.
pub fn boundary_cubic(theta0: f64, theta_t: f64, rate0: f64, rate_t: f64, t0: f64) -> Result<[f64; 4]> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::NonPositiveDuration(t0));
    }
    let delta = theta_t - theta0;
    Ok([
        theta0,
        rate0,
        3.0 / (t0 * t0) * delta - 2.0 / t0 * rate0 - rate_t / t0,
        -2.0 / (t0 * t0 * t0) * delta + (rate0 + rate_t) / (t0 * t0),
    ])
}
