//! Independent reference computations used by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

pub fn wrap(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = (a + std::f64::consts::PI).rem_euclid(t) - std::f64::consts::PI;
    if r <= -std::f64::consts::PI { r + t } else { r }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Exact least-squares cubic via rational normal equations. Returns the
/// coefficients (rounded to f64) and the residual norm.
pub fn rational_lstsq_cubic(xs: &[f64], ys: &[f64]) -> ([f64; 4], f64) {
    let n = 4;
    let zero = BigRational::zero();
    let mut m = vec![vec![zero.clone(); n + 1]; n];
    let rows: Vec<(Vec<BigRational>, BigRational)> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let x = exact(x);
            let mut p = vec![BigRational::from_integer(BigInt::from(1))];
            for k in 1..n {
                let next = &p[k - 1] * &x;
                p.push(next);
            }
            (p, exact(y))
        })
        .collect();
    for (p, y) in &rows {
        for i in 0..n {
            for j in 0..n {
                m[i][j] += &p[i] * &p[j];
            }
            m[i][n] += &p[i] * y;
        }
    }
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero()).expect("full rank");
        m.swap(col, piv);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                let pivot = m[col].clone();
                for (cell, p) in m[r].iter_mut().zip(&pivot).skip(col) {
                    *cell -= &f * p;
                }
            }
        }
    }
    let coeffs: Vec<BigRational> = (0..n).map(|i| &m[i][n] / &m[i][i]).collect();
    let mut ss = zero;
    for (p, y) in &rows {
        let mut r = y.clone();
        for i in 0..n {
            r -= &p[i] * &coeffs[i];
        }
        ss += &r * &r;
    }
    let c: Vec<f64> = coeffs.iter().map(|c| c.to_f64().unwrap()).collect();
    ([c[0], c[1], c[2], c[3]], ss.to_f64().unwrap().sqrt())
}

/// Robot and target motion over time `t` from a common initial state, using
/// closed-form arcs.
pub struct Kinematic {
    pub robot: [f64; 3],
    pub v: f64,
    pub omega: f64,
    pub target: [f64; 3],
    pub v_t: f64,
    pub omega_t: f64,
}

fn arc(p: [f64; 3], v: f64, w: f64, t: f64) -> [f64; 3] {
    if w == 0.0 {
        return [p[0] + v * t * p[2].cos(), p[1] + v * t * p[2].sin(), p[2]];
    }
    let phi = p[2] + w * t;
    [p[0] + v / w * (phi.sin() - p[2].sin()), p[1] - v / w * (phi.cos() - p[2].cos()), phi]
}

impl Kinematic {
    /// `(rho, alpha, beta)` from their geometric definitions at time `t`.
    pub fn polar_at(&self, t: f64) -> [f64; 3] {
        let r = arc(self.robot, self.v, self.omega, t);
        let g = arc(self.target, self.v_t, self.omega_t, t);
        let (dx, dy) = (g[0] - r[0], g[1] - r[1]);
        let theta = dy.atan2(dx);
        [dx.hypot(dy), wrap(theta - r[2]), wrap(theta - g[2])]
    }

    /// Central differences of the polar coordinates at `t = 0`.
    pub fn polar_rates_fd(&self, h: f64) -> [f64; 3] {
        let (p, m) = (self.polar_at(h), self.polar_at(-h));
        [(p[0] - m[0]) / (2.0 * h), wrap(p[1] - m[1]) / (2.0 * h), wrap(p[2] - m[2]) / (2.0 * h)]
    }
}

/// Arc-length table of a polyline, accumulated independently.
pub fn arc_table(pts: &[[f64; 2]]) -> Vec<f64> {
    let mut s = vec![0.0];
    for i in 1..pts.len() {
        let d = ((pts[i][0] - pts[i - 1][0]).powi(2) + (pts[i][1] - pts[i - 1][1]).powi(2)).sqrt();
        s.push(s[i - 1] + d);
    }
    s
}

/// Arc-length coordinate of `q` if it lies on the segment containing arc
/// length `target`; `None` when `q` is off that segment by more than `tol`.
pub fn arc_coordinate(pts: &[[f64; 2]], table: &[f64], target: f64, q: [f64; 2], tol: f64) -> Option<f64> {
    let j = (0..pts.len() - 1)
        .find(|&j| table[j + 1] >= target && table[j + 1] > table[j])
        .unwrap_or(pts.len() - 2);
    let (a, b) = (pts[j], pts[j + 1]);
    let (ux, uy) = (b[0] - a[0], b[1] - a[1]);
    let len = ux.hypot(uy);
    let cross = (ux * (q[1] - a[1]) - uy * (q[0] - a[0])) / len;
    if cross.abs() > tol {
        return None;
    }
    Some(table[j] + (q[0] - a[0]).hypot(q[1] - a[1]))
}

/// Cubic `c0 + c1 t + c2 t^2 + c3 t^3` and its derivative.
pub fn cubic_and_rate(c: &[f64; 4], t: f64) -> (f64, f64) {
    (c[0] + t * (c[1] + t * (c[2] + t * c[3])), c[1] + t * (2.0 * c[2] + 3.0 * t * c[3]))
}

pub fn scenario_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}
