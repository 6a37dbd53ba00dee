//! Depth losses, scene-flow losses and scene-flow evaluation metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{CameraIntrinsics, DepthMap, PointCloud3D, PyramidDepth, PYRAMID_SCALES};
use crate::kdtree::KdTree;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no jointly valid pixels")]
    NoValidPixels,
    #[error("depth must be positive, got {value} at sample {index}")]
    Domain { index: usize, value: f64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("raster size mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("invalid silog parameters: alpha = {alpha}, lambda = {lambda}")]
    InvalidSilog { alpha: f64, lambda: f64 },
    #[error("invalid evaluation thresholds: {0}")]
    InvalidStandard(String),
    #[error("point {0} (or its displaced position) is not in front of the camera")]
    BehindCamera(usize),
    #[error("non-finite entry at point {0}")]
    NonFinite(usize),
    #[error("level {level}: {source}")]
    Level {
        level: u32,
        #[source]
        source: Box<MetricsError>,
    },
}

pub type Result<T> = std::result::Result<T, MetricsError>;

/// Per-point 3D displacement in meters, index-aligned with a point cloud.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlowField {
    pub vectors: Vec<[f64; 3]>,
}

impl FlowField {
    pub fn new(vectors: Vec<[f64; 3]>) -> Result<Self> {
        if let Some(i) = vectors.iter().position(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(MetricsError::NonFinite(i));
        }
        Ok(Self { vectors })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            vectors: vec![[0.0; 3]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SilogParams {
    pub alpha: f64,
    pub lambda: f64,
}

impl Default for SilogParams {
    fn default() -> Self {
        Self {
            alpha: 10.0,
            lambda: 0.85,
        }
    }
}

impl SilogParams {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        let p = Self { alpha, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha > 0.0 && self.alpha.is_finite() && self.lambda > 0.0 && self.lambda <= 1.0 {
            Ok(())
        } else {
            Err(MetricsError::InvalidSilog {
                alpha: self.alpha,
                lambda: self.lambda,
            })
        }
    }
}

/// Scale-invariant log loss over paired depth samples.
pub fn silog_samples(est: &[f64], gt: &[f64], p: &SilogParams) -> Result<f64> {
    p.validate()?;
    if est.len() != gt.len() {
        return Err(MetricsError::LengthMismatch {
            left: est.len(),
            right: gt.len(),
        });
    }
    if est.is_empty() {
        return Err(MetricsError::NoValidPixels);
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (index, (&e, &g)) in est.iter().zip(gt).enumerate() {
        for value in [e, g] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(MetricsError::Domain { index, value });
            }
        }
        let diff = e.ln() - g.ln();
        sum += diff;
        sum_sq += diff * diff;
    }
    let t = est.len() as f64;
    let var = sum_sq / t - p.lambda * (sum / t) * (sum / t);
    Ok(p.alpha * var.max(0.0).sqrt())
}

/// [`silog_samples`] over the pixels valid in both maps.
pub fn silog_loss(est: &DepthMap, gt: &DepthMap, p: &SilogParams) -> Result<f64> {
    if est.width() != gt.width() || est.height() != gt.height() {
        return Err(MetricsError::ShapeMismatch(est.width(), est.height(), gt.width(), gt.height()));
    }
    let (e, g): (Vec<f64>, Vec<f64>) = est
        .depth()
        .iter()
        .zip(gt.depth())
        .zip(est.valid().iter().zip(gt.valid()))
        .filter(|(_, (&ve, &vg))| ve && vg)
        .map(|((&e, &g), _)| (e, g))
        .unzip();
    silog_samples(&e, &g, p)
}

/// Weighted per-level silog: `(8 L_1 + 4 L_2 + 2 L_4 + L_8) / 15`, where
/// level `n` is compared against `gt / n`.
pub fn pyramid_depth_loss(est: &PyramidDepth, gt: &DepthMap, p: &SilogParams) -> Result<f64> {
    const WEIGHTS: [f64; 4] = [8.0, 4.0, 2.0, 1.0];
    let mut total = 0.0;
    for (i, (&scale, &weight)) in PYRAMID_SCALES.iter().zip(&WEIGHTS).enumerate() {
        let level = scale as u32;
        let annotate = |source: MetricsError| MetricsError::Level {
            level,
            source: Box::new(source),
        };
        let est_level = est.level(i).map_err(|_| {
            annotate(MetricsError::ShapeMismatch(est.width, est.height, gt.width(), gt.height()))
        })?;
        let gt_level = gt.scaled(1.0 / scale);
        total += weight * silog_loss(&est_level, &gt_level, p).map_err(annotate)?;
    }
    Ok(total / 15.0)
}

fn check_aligned(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(MetricsError::LengthMismatch { left, right });
    }
    Ok(())
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Per-point end-point error and its mean.
pub fn epe3d(est: &FlowField, gt: &FlowField) -> Result<(Vec<f64>, f64)> {
    check_aligned(est.len(), gt.len())?;
    if est.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    let per_point: Vec<f64> = est.vectors.iter().zip(&gt.vectors).map(|(&e, &g)| norm(sub(e, g))).collect();
    let mean = per_point.iter().sum::<f64>() / per_point.len() as f64;
    Ok((per_point, mean))
}

fn nearest_sum(from: &[[f64; 3]], to: &KdTree) -> f64 {
    #[cfg(feature = "parallel")]
    let dists: Vec<f64> = from.par_iter().map(|p| to.nearest(p).map_or(0.0, |(_, d)| d)).collect();
    #[cfg(not(feature = "parallel"))]
    let dists: Vec<f64> = from.iter().map(|p| to.nearest(p).map_or(0.0, |(_, d)| d)).collect();
    dists.iter().sum()
}

/// Symmetric Chamfer distance with squared Euclidean nearest-neighbour terms.
pub fn chamfer(p: &PointCloud3D, q: &PointCloud3D) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    let tree_p = KdTree::build(&p.points);
    let tree_q = KdTree::build(&q.points);
    Ok(nearest_sum(&p.points, &tree_q) + nearest_sum(&q.points, &tree_p))
}

/// `chamfer(P1 + sf_f, P2) + chamfer(P2 + sf_b, P1)`.
pub fn chamfer_fb(p1: &PointCloud3D, p2: &PointCloud3D, sf_f: &FlowField, sf_b: &FlowField) -> Result<f64> {
    check_aligned(p1.len(), sf_f.len())?;
    check_aligned(p2.len(), sf_b.len())?;
    let warp = |pc: &PointCloud3D, sf: &FlowField| {
        PointCloud3D::from_points(pc.points.iter().zip(&sf.vectors).map(|(&p, &f)| add(p, f)).collect())
    };
    Ok(chamfer(&warp(p1, sf_f), p2)? + chamfer(&warp(p2, sf_b), p1)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StandardName {
    ImageBased,
    LidarBased,
    Custom,
}

/// Thresholds for the accuracy and outlier rates. A point counts toward an
/// accuracy when its error is strictly below the absolute threshold or its
/// relative error strictly below the relative one; it is an outlier when
/// either is strictly above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalStandard {
    pub name: StandardName,
    pub acc3ds_abs: f64,
    pub acc3ds_rel: f64,
    pub acc3dr_abs: f64,
    pub acc3dr_rel: f64,
    pub outlier_abs: f64,
    pub outlier_rel: f64,
    pub acc2d_abs: f64,
    pub acc2d_rel: f64,
}

impl EvalStandard {
    /// The relaxed thresholds used for monocular, image-based evaluation.
    pub fn image_based() -> Self {
        Self {
            name: StandardName::ImageBased,
            acc3ds_abs: 0.3,
            acc3ds_rel: 0.1,
            acc3dr_abs: 0.4,
            acc3dr_rel: 0.2,
            outlier_abs: 0.5,
            outlier_rel: 0.3,
            acc2d_abs: 20.0,
            acc2d_rel: 0.2,
        }
    }

    /// Thresholds conventional in LiDAR scene-flow work
    /// (0.05 m / 5 %, 0.1 m / 10 %, outliers 0.3 m / 10 %, 2D 3 px / 5 %).
    pub fn lidar_based() -> Self {
        Self {
            name: StandardName::LidarBased,
            acc3ds_abs: 0.05,
            acc3ds_rel: 0.05,
            acc3dr_abs: 0.1,
            acc3dr_rel: 0.1,
            outlier_abs: 0.3,
            outlier_rel: 0.1,
            acc2d_abs: 3.0,
            acc2d_rel: 0.05,
        }
    }

    /// Thresholds in order: acc3ds (abs, rel), acc3dr, outlier, acc2d.
    pub fn custom(t: [f64; 8]) -> Result<Self> {
        let s = Self {
            name: StandardName::Custom,
            acc3ds_abs: t[0],
            acc3ds_rel: t[1],
            acc3dr_abs: t[2],
            acc3dr_rel: t[3],
            outlier_abs: t[4],
            outlier_rel: t[5],
            acc2d_abs: t[6],
            acc2d_rel: t[7],
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "image" | "image-based" => Some(Self::image_based()),
            "lidar" | "lidar-based" => Some(Self::lidar_based()),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.name {
            StandardName::ImageBased => "image-based",
            StandardName::LidarBased => "lidar-based",
            StandardName::Custom => "custom",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.acc3ds_abs,
            self.acc3ds_rel,
            self.acc3dr_abs,
            self.acc3dr_rel,
            self.outlier_abs,
            self.outlier_rel,
            self.acc2d_abs,
            self.acc2d_rel,
        ];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(MetricsError::InvalidStandard("thresholds must be finite and positive".into()));
        }
        if self.acc3ds_abs > self.acc3dr_abs || self.acc3ds_rel > self.acc3dr_rel {
            return Err(MetricsError::InvalidStandard(
                "strict accuracy thresholds must not exceed relaxed ones".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(serialize_with = "compact_number")]
    pub epe3d_mean: f64,
    #[serde(serialize_with = "compact_number")]
    pub acc3ds: f64,
    #[serde(serialize_with = "compact_number")]
    pub acc3dr: f64,
    #[serde(serialize_with = "compact_number")]
    pub outlier3d: f64,
    #[serde(serialize_with = "compact_number")]
    pub epe2d_mean: f64,
    #[serde(serialize_with = "compact_number")]
    pub acc2d: f64,
}

// Whole numbers are written without a fractional part ("1", not "1.0").
fn compact_number<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        s.serialize_i64(*v as i64)
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    #[serde(flatten)]
    report: &'a MetricsReport,
    standard: &'a str,
}

impl MetricsReport {
    /// Compact JSON object with the six fields followed by `"standard"`.
    pub fn to_json(&self, standard: &EvalStandard) -> String {
        serde_json::to_string(&ReportDocument {
            report: self,
            standard: standard.label(),
        })
        .expect("report fields are plain numbers")
    }
}

/// Errors of one point under the metric suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointErrors {
    pub epe3d: f64,
    /// `None` when the ground-truth flow has zero length.
    pub rel3d: Option<f64>,
    pub epe2d: f64,
    pub rel2d: Option<f64>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// 3D and image-plane errors for one point. The image-plane flow is
/// `proj(p + sf) - proj(p)`.
pub fn point_errors(p: [f64; 3], est: [f64; 3], gt: [f64; 3], k: &CameraIntrinsics) -> Option<PointErrors> {
    let epe3d = norm(sub(est, gt));
    let base = k.project(p)?;
    let pe = k.project(add(p, est))?;
    let pg = k.project(add(p, gt))?;
    let fe = [pe[0] - base[0], pe[1] - base[1]];
    let fg = [pg[0] - base[0], pg[1] - base[1]];
    let (du, dv) = (fe[0] - fg[0], fe[1] - fg[1]);
    let epe2d = (du * du + dv * dv).sqrt();
    Some(PointErrors {
        epe3d,
        rel3d: ratio(epe3d, norm(gt)),
        epe2d,
        rel2d: ratio(epe2d, (fg[0] * fg[0] + fg[1] * fg[1]).sqrt()),
    })
}

fn below(err: f64, rel: Option<f64>, abs_t: f64, rel_t: f64) -> bool {
    err < abs_t || rel.is_some_and(|r| r < rel_t)
}

fn above(err: f64, rel: Option<f64>, abs_t: f64, rel_t: f64) -> bool {
    err > abs_t || rel.is_some_and(|r| r > rel_t)
}

/// The full metric suite. Relative criteria are skipped for points whose
/// ground-truth flow (3D or projected) has zero length.
pub fn evaluate_flow(
    points: &PointCloud3D,
    est: &FlowField,
    gt: &FlowField,
    k: &CameraIntrinsics,
    std: &EvalStandard,
) -> Result<MetricsReport> {
    check_aligned(points.len(), est.len())?;
    check_aligned(points.len(), gt.len())?;
    if points.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    std.validate()?;
    k.validate().map_err(|_| MetricsError::InvalidStandard("invalid camera intrinsics".into()))?;

    let mut epe3d_sum = 0.0;
    let mut epe2d_sum = 0.0;
    let (mut acc3ds, mut acc3dr, mut outliers, mut acc2d) = (0usize, 0usize, 0usize, 0usize);
    for (i, ((&p, &e), &g)) in points.points.iter().zip(&est.vectors).zip(&gt.vectors).enumerate() {
        let errs = point_errors(p, e, g, k).ok_or(MetricsError::BehindCamera(i))?;
        epe3d_sum += errs.epe3d;
        epe2d_sum += errs.epe2d;
        acc3ds += below(errs.epe3d, errs.rel3d, std.acc3ds_abs, std.acc3ds_rel) as usize;
        acc3dr += below(errs.epe3d, errs.rel3d, std.acc3dr_abs, std.acc3dr_rel) as usize;
        outliers += above(errs.epe3d, errs.rel3d, std.outlier_abs, std.outlier_rel) as usize;
        acc2d += below(errs.epe2d, errs.rel2d, std.acc2d_abs, std.acc2d_rel) as usize;
    }
    let n = points.len() as f64;
    Ok(MetricsReport {
        epe3d_mean: epe3d_sum / n,
        acc3ds: acc3ds as f64 / n,
        acc3dr: acc3dr as f64 / n,
        outlier3d: outliers as f64 / n,
        epe2d_mean: epe2d_sum / n,
        acc2d: acc2d as f64 / n,
    })
}
