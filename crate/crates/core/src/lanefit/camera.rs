//! Pinhole back-projection of image pixels onto the flat ground plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Point2;

pub type Mat3 = [[f64; 3]; 3];

fn mat_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Intrinsics plus the rigid camera-to-vehicle transform.
///
/// The camera frame is the usual optical one (x right, y down, z along the
/// optical axis); the vehicle frame has x forward, y left, z up, with the
/// ground at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    /// Rotation taking camera-frame vectors into the vehicle frame.
    pub rotation: Mat3,
    /// Camera centre in the vehicle frame.
    pub translation: [f64; 3],
}

impl CameraModel {
    /// Builds a camera `height` metres above the ground at `forward` metres
    /// along the vehicle x-axis, pitched down by `pitch` and yawed left by `yaw`.
    #[allow(clippy::too_many_arguments)]
    pub fn mounted(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        (width, height): (u32, u32),
        mount_height: f64,
        forward: f64,
        pitch: f64,
        yaw: f64,
    ) -> Result<Self> {
        // Optical axes expressed in the vehicle frame.
        let optical: Mat3 = [[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]];
        let (sp, cp) = pitch.sin_cos();
        let rot_pitch: Mat3 = [[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]];
        let (sy, cy_) = yaw.sin_cos();
        let rot_yaw: Mat3 = [[cy_, -sy, 0.0], [sy, cy_, 0.0], [0.0, 0.0, 1.0]];
        let rotation = mat_mul(&rot_yaw, &mat_mul(&rot_pitch, &optical));
        let cam = Self { fx, fy, cx, cy, width, height, rotation, translation: [forward, 0.0, mount_height] };
        cam.validate()?;
        Ok(cam)
    }

    pub fn camera_height(&self) -> f64 {
        self.translation[2]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidParams("focal lengths must be positive".into()));
        }
        if !(self.camera_height() > 0.0) {
            return Err(Error::InvalidParams("camera must sit above the ground".into()));
        }
        let r = &self.rotation;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).abs() > 1e-9 {
                    return Err(Error::InvalidParams("camera rotation is not orthonormal".into()));
                }
            }
        }
        Ok(())
    }

    /// Direction of the viewing ray through pixel `(u, v)`, in the vehicle frame.
    pub fn pixel_ray(&self, u: f64, v: f64) -> [f64; 3] {
        mat_vec(&self.rotation, [(u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0])
    }
}

/// Ground point seen at pixel `(u, v)`, in vehicle-frame metres.
pub fn pixel_to_vehicle(u: f64, v: f64, cam: &CameraModel) -> Result<Point2> {
    if !(u >= 0.0 && v >= 0.0 && u <= cam.width as f64 && v <= cam.height as f64) {
        return Err(Error::PixelOutOfBounds { u, v });
    }
    let ray = cam.pixel_ray(u, v);
    let origin = cam.translation;
    // Depth scale at which the ray meets z = 0.
    if ray[2] >= 0.0 {
        return Err(Error::AboveHorizon);
    }
    let lambda = -origin[2] / ray[2];
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::AboveHorizon);
    }
    Ok([origin[0] + lambda * ray[0], origin[1] + lambda * ray[1]])
}
