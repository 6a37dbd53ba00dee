//! Real-scale pinhole geometry.
//!
//! Camera frame is x right, y down, z forward. A valid pixel `(u, v)` with
//! depth `z` back-projects to `(z (u - c_u) / f_u, z (v - c_v) / f_v, z)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{self, BasisMatrix, ElevatedCoord, LatticeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid intrinsics: focal lengths must be positive and all values finite")]
    InvalidIntrinsics,
    #[error("depth map has no valid pixels")]
    NoValidPixels,
    #[error("raster size mismatch: expected {expected} samples, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("scale factor must be finite and positive, got {0}")]
    InvalidScale(f64),
    #[error("lattice sigma must be finite and positive, got {0}")]
    InvalidSigma(f64),
    #[error("3D points elevate with d = 2 or zero-padded d = 3, got d = {0}")]
    UnsupportedElevation(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub f_u: f64,
    pub f_v: f64,
    pub c_u: f64,
    pub c_v: f64,
}

impl CameraIntrinsics {
    pub fn new(f_u: f64, f_v: f64, c_u: f64, c_v: f64) -> Result<Self> {
        let k = Self { f_u, f_v, c_u, c_v };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.f_u, self.f_v, self.c_u, self.c_v].iter().all(|v| v.is_finite());
        if finite && self.f_u > 0.0 && self.f_v > 0.0 {
            Ok(())
        } else {
            Err(GeometryError::InvalidIntrinsics)
        }
    }

    /// Forward pinhole model. `None` when the point is not in front of the camera.
    pub fn project(&self, p: [f64; 3]) -> Option<[f64; 2]> {
        if !(p[2] > 0.0) {
            return None;
        }
        Some([self.f_u * p[0] / p[2] + self.c_u, self.f_v * p[1] / p[2] + self.c_v])
    }

    /// Back-projects a (possibly fractional) pixel position at depth `z`.
    pub fn backproject_pixel(&self, u: f64, v: f64, z: f64) -> [f64; 3] {
        [z * (u - self.c_u) / self.f_u, z * (v - self.c_v) / self.f_v, z]
    }
}

/// Depth raster in meters. A pixel is valid only when it is unmasked,
/// finite and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    depth: Vec<f64>,
    valid: Vec<bool>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, depth: Vec<f64>) -> Result<Self> {
        let mask = vec![true; depth.len()];
        Self::with_mask(width, height, depth, mask)
    }

    pub fn with_mask(width: usize, height: usize, depth: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        let expected = width * height;
        for len in [depth.len(), mask.len()] {
            if len != expected {
                return Err(GeometryError::DimensionMismatch {
                    expected,
                    actual: len,
                });
            }
        }
        let valid = depth
            .iter()
            .zip(&mask)
            .map(|(&z, &m)| m && z.is_finite() && z > 0.0)
            .collect();
        Ok(Self {
            width,
            height,
            depth,
            valid,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn at(&self, u: usize, v: usize) -> Option<f64> {
        let i = v * self.width + u;
        self.valid[i].then_some(self.depth[i])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Same raster with every depth multiplied by `factor`; validity kept.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            depth: self.depth.iter().map(|z| z * factor).collect(),
            valid: self.valid.clone(),
        }
    }
}

/// Points in meters, camera frame. `source_pixel` is set for clouds produced
/// by back-projection and records the `(u, v)` each point came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud3D {
    pub points: Vec<[f64; 3]>,
    pub source_pixel: Option<Vec<[usize; 2]>>,
}

impl PointCloud3D {
    pub fn from_points(points: Vec<[f64; 3]>) -> Self {
        Self {
            points,
            source_pixel: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn backproject(dm: &DepthMap, k: &CameraIntrinsics) -> Result<PointCloud3D> {
    k.validate()?;
    let count = dm.valid_count();
    if count == 0 {
        return Err(GeometryError::NoValidPixels);
    }
    let mut points = Vec::with_capacity(count);
    let mut pixels = Vec::with_capacity(count);
    for v in 0..dm.height {
        for u in 0..dm.width {
            if let Some(z) = dm.at(u, v) {
                points.push(k.backproject_pixel(u as f64, v as f64, z));
                pixels.push([u, v]);
            }
        }
    }
    Ok(PointCloud3D {
        points,
        source_pixel: Some(pixels),
    })
}

/// Divides each point by `sigma` per axis and elevates it onto the lattice.
///
/// With a `d = 2` basis the scaled `(x, y, z)` is elevated directly; with a
/// `d = 3` basis it is zero-padded to `(x, y, z, 0)` first.
pub fn to_lattice_positions(
    pc: &PointCloud3D,
    sigma: [f64; 3],
    basis: &BasisMatrix,
) -> Result<Vec<ElevatedCoord>> {
    if let Some(&s) = sigma.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(GeometryError::InvalidSigma(s));
    }
    let pad = match basis.dim() {
        2 => 0,
        3 => 1,
        d => return Err(GeometryError::UnsupportedElevation(d)),
    };
    let mut buf = vec![0.0; 3 + pad];
    pc.points
        .iter()
        .map(|p| {
            for axis in 0..3 {
                buf[axis] = p[axis] / sigma[axis];
            }
            Ok(lattice::elevate(&buf, basis)?)
        })
        .collect()
}

fn check_scale(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(GeometryError::InvalidScale(lambda))
    }
}

/// The fully primed scene: depth and all four intrinsics multiplied by
/// `lambda`. Sampling it at `(lambda u, lambda v)` yields `lambda` times the
/// original point.
pub fn scale_scene(dm: &DepthMap, k: &CameraIntrinsics, lambda: f64) -> Result<(DepthMap, CameraIntrinsics)> {
    check_scale(lambda)?;
    k.validate()?;
    let scaled_k = CameraIntrinsics {
        f_u: k.f_u * lambda,
        f_v: k.f_v * lambda,
        c_u: k.c_u * lambda,
        c_v: k.c_v * lambda,
    };
    Ok((dm.scaled(lambda), scaled_k))
}

/// Depth-only scaling: intrinsics and pixel grid untouched.
pub fn scale_depth(dm: &DepthMap, lambda: f64) -> Result<DepthMap> {
    check_scale(lambda)?;
    Ok(dm.scaled(lambda))
}

/// Four full-resolution depth levels holding 1, 1/2, 1/4 and 1/8 of the
/// real depth.
#[derive(Debug, Clone, PartialEq)]
pub struct PyramidDepth {
    pub width: usize,
    pub height: usize,
    /// `levels[0]` is level 1, then 2, 4, 8.
    pub levels: [Vec<f64>; 4],
    pub valid: Vec<bool>,
}

/// Level scale factors, in the order of [`PyramidDepth::levels`].
pub const PYRAMID_SCALES: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

impl PyramidDepth {
    pub fn new(width: usize, height: usize, levels: [Vec<f64>; 4]) -> Result<Self> {
        let valid = vec![true; width * height];
        Self::with_mask(width, height, levels, valid)
    }

    pub fn with_mask(width: usize, height: usize, levels: [Vec<f64>; 4], mask: Vec<bool>) -> Result<Self> {
        let expected = width * height;
        for len in levels.iter().map(Vec::len).chain([mask.len()]) {
            if len != expected {
                return Err(GeometryError::DimensionMismatch {
                    expected,
                    actual: len,
                });
            }
        }
        let valid = (0..expected)
            .map(|i| mask[i] && levels.iter().all(|l| l[i].is_finite() && l[i] >= 0.0))
            .collect();
        Ok(Self {
            width,
            height,
            levels,
            valid,
        })
    }

    /// The consistent pyramid of a depth map: level `n` holds `depth / n`.
    pub fn from_depth(dm: &DepthMap) -> Self {
        let levels = PYRAMID_SCALES.map(|s| dm.depth.iter().map(|z| z / s).collect());
        Self {
            width: dm.width,
            height: dm.height,
            levels,
            valid: dm.valid.clone(),
        }
    }

    /// Level `index` (0..4) as a depth map carrying the pyramid mask.
    pub fn level(&self, index: usize) -> Result<DepthMap> {
        DepthMap::with_mask(self.width, self.height, self.levels[index].clone(), self.valid.clone())
    }
}

/// `(d_1 + 2 d_2 + 4 d_4 + 8 d_8) / 4` per pixel.
pub fn compose_pyramid_depth(p: &PyramidDepth) -> Result<DepthMap> {
    let expected = p.width * p.height;
    for len in p.levels.iter().map(Vec::len).chain([p.valid.len()]) {
        if len != expected {
            return Err(GeometryError::DimensionMismatch {
                expected,
                actual: len,
            });
        }
    }
    let [l1, l2, l4, l8] = &p.levels;
    let depth = (0..expected)
        .map(|i| 0.25 * (l1[i] + 2.0 * l2[i] + 4.0 * l4[i] + 8.0 * l8[i]))
        .collect();
    DepthMap::with_mask(p.width, p.height, depth, p.valid.clone())
}
