//! Permutohedral-lattice Gaussian filtering, real-scale pinhole geometry,
//! and scene-flow losses and metrics.
//!
//! - [`lattice`]: elevation, simplex lookup, splat / blur / convolve / slice.
//! - [`hdfilter`]: exact and lattice Gaussian filtering, image presets.
//! - [`geometry`]: back-projection, scale laws, pyramid depth composition.
//! - [`flowmetrics`]: silog losses, EPE, Chamfer, evaluation metrics.

pub mod flowmetrics;
pub mod geometry;
pub mod hdfilter;
pub mod kdtree;
pub mod lattice;

pub use flowmetrics::{EvalStandard, FlowField, MetricsReport, SilogParams};
pub use geometry::{CameraIntrinsics, DepthMap, PointCloud3D, PyramidDepth};
pub use hdfilter::{FilterParams, Preset, Raster, SignalSet};
pub use lattice::{BasisMatrix, ElevatedCoord, LatticeGrid, LatticeKey, SimplexEnclosure};
