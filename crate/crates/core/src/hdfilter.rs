//! High-dimensional Gaussian filtering.
//!
//! Every point `i` receives `sum_j exp(-|p_i - p_j|^2 / 2) * v_j`. Positions
//! are expected to be divided by their bandwidths already (the image presets
//! do this), so the kernel is a unit Gaussian. Filtering is unnormalized: the
//! presets append a constant 1 channel to every value vector and
//! [`normalize_homogeneous`] divides it back out.

use thiserror::Error;

use crate::lattice::{self, BasisMatrix, ElevatedCoord, LatticeError};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error("signal set is empty")]
    Empty,
    #[error("positions have length {actual}, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite entry at flat index {0}")]
    NonFinite(usize),
    #[error("sigma must be finite and positive, got {0}")]
    InvalidSigma(f64),
    #[error("preset {0:?} requires sigma_c")]
    MissingSigmaC(Preset),
    #[error("preset {0:?} cannot build a signal set from an image")]
    UnsupportedPreset(Preset),
    #[error("image must have 1 or 3 channels, got {0}")]
    UnsupportedChannels(usize),
    #[error("homogeneous weight at point {index} is {weight}, expected > 0")]
    DegenerateNormalization { index: usize, weight: f64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

pub type Result<T> = std::result::Result<T, FilterError>;

/// Paired positions and values, both row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet {
    pos_dim: usize,
    v_dim: usize,
    positions: Vec<f64>,
    values: Vec<f64>,
}

impl SignalSet {
    pub fn new(pos_dim: usize, v_dim: usize, positions: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if pos_dim == 0 || v_dim == 0 {
            return Err(FilterError::DimensionMismatch {
                expected: 1,
                actual: 0,
            });
        }
        if !positions.len().is_multiple_of(pos_dim) {
            return Err(FilterError::DimensionMismatch {
                expected: pos_dim,
                actual: positions.len() % pos_dim,
            });
        }
        let n = positions.len() / pos_dim;
        if values.len() != n * v_dim {
            return Err(FilterError::DimensionMismatch {
                expected: n * v_dim,
                actual: values.len(),
            });
        }
        if let Some(i) = positions.iter().position(|v| !v.is_finite()) {
            return Err(FilterError::NonFinite(i));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FilterError::NonFinite(i));
        }
        Ok(Self {
            pos_dim,
            v_dim,
            positions,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.pos_dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn pos_dim(&self) -> usize {
        self.pos_dim
    }

    pub fn v_dim(&self) -> usize {
        self.v_dim
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.pos_dim..(i + 1) * self.pos_dim]
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.v_dim..(i + 1) * self.v_dim]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    GaussianBlur,
    BilateralGray,
    BilateralColor,
    Generic,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::GaussianBlur => "gaussian",
            Preset::BilateralGray => "bilateral-gray",
            Preset::BilateralColor => "bilateral-color",
            Preset::Generic => "generic",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Preset::GaussianBlur,
            Preset::BilateralGray,
            Preset::BilateralColor,
            Preset::Generic,
        ]
        .into_iter()
        .find(|p| p.name() == name)
    }

    pub fn needs_sigma_c(self) -> bool {
        matches!(self, Preset::BilateralGray | Preset::BilateralColor)
    }
}

/// Spatial bandwidth in pixels, range bandwidth in intensity units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub sigma_s: f64,
    pub sigma_c: Option<f64>,
    pub preset: Preset,
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        check_sigma(self.sigma_s)?;
        match self.sigma_c {
            Some(c) => check_sigma(c),
            None if self.preset.needs_sigma_c() => Err(FilterError::MissingSigmaC(self.preset)),
            None => Ok(()),
        }
    }
}

fn check_sigma(s: f64) -> Result<()> {
    if s.is_finite() && s > 0.0 {
        Ok(())
    } else {
        Err(FilterError::InvalidSigma(s))
    }
}

/// Row-major image with 1 (gray) or 3 (RGB) interleaved channels.
/// Pixel `(x, y)` is column `x`, row `y`, centred on integer coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(FilterError::UnsupportedChannels(channels));
        }
        if data.len() != width * height * channels {
            return Err(FilterError::DimensionMismatch {
                expected: width * height * channels,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let start = (y * self.width + x) * self.channels;
        &self.data[start..start + self.channels]
    }

    fn intensity(&self, px: &[f64]) -> f64 {
        match self.channels {
            1 => px[0],
            // Rec. 601 luma
            _ => 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2],
        }
    }

    fn rgb(&self, px: &[f64]) -> [f64; 3] {
        match self.channels {
            1 => [px[0]; 3],
            _ => [px[0], px[1], px[2]],
        }
    }
}

/// Builds the signal set for an image preset: positions divided by their
/// sigmas, values are the pixel channels followed by a homogeneous 1.
pub fn make_preset(image: &Raster, params: &FilterParams) -> Result<SignalSet> {
    params.validate()?;
    if image.width == 0 || image.height == 0 {
        return Err(FilterError::Empty);
    }
    let pos_dim = match params.preset {
        Preset::GaussianBlur => 2,
        Preset::BilateralGray => 3,
        Preset::BilateralColor => 5,
        Preset::Generic => return Err(FilterError::UnsupportedPreset(params.preset)),
    };
    let n = image.width * image.height;
    let v_dim = image.channels + 1;
    let mut positions = Vec::with_capacity(n * pos_dim);
    let mut values = Vec::with_capacity(n * v_dim);
    let ss = params.sigma_s;
    for y in 0..image.height {
        for x in 0..image.width {
            let px = image.pixel(x, y);
            positions.push(x as f64 / ss);
            positions.push(y as f64 / ss);
            match params.preset {
                Preset::BilateralGray => {
                    positions.push(image.intensity(px) / params.sigma_c.unwrap_or(1.0));
                }
                Preset::BilateralColor => {
                    let sc = params.sigma_c.unwrap_or(1.0);
                    positions.extend(image.rgb(px).iter().map(|c| c / sc));
                }
                _ => {}
            }
            values.extend_from_slice(px);
            values.push(1.0);
        }
    }
    SignalSet::new(pos_dim, v_dim, positions, values)
}

/// Exact `O(n^2)` evaluation of the Gaussian filter. Output is row-major,
/// `n * v_dim`.
pub fn brute_force_filter(s: &SignalSet) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Err(FilterError::Empty);
    }
    let n = s.len();
    let v_dim = s.v_dim;
    let mut out = vec![0.0; n * v_dim];
    let row = |(i, acc): (usize, &mut [f64])| {
        let pi = s.position(i);
        for j in 0..n {
            let dist2: f64 = pi.iter().zip(s.position(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            let w = (-0.5 * dist2).exp();
            for (a, v) in acc.iter_mut().zip(s.value(j)) {
                *a += w * v;
            }
        }
    };
    #[cfg(feature = "parallel")]
    out.par_chunks_exact_mut(v_dim).enumerate().for_each(row);
    #[cfg(not(feature = "parallel"))]
    out.chunks_exact_mut(v_dim).enumerate().for_each(row);
    Ok(out)
}

/// Maps a bandwidth-normalized position in `R^d` to the `(d+1)`-vector whose
/// lattice elevation places it so that one blur pass per axis approximates
/// the unit Gaussian.
///
/// The target elevation is the orthogonal embedding with per-axis scale
/// `sqrt(2/3) (d+1) / sqrt((i+1)(i+2))`; it already lies on the zero-sum
/// hyperplane, where `B_d` acts as multiplication by `d+1`.
pub fn lattice_cartesian(position: &[f64]) -> Vec<f64> {
    let d = position.len();
    let n = (d + 1) as f64;
    let inv_std = (2.0f64 / 3.0).sqrt() * n;
    let mut out = vec![0.0; d + 1];
    let mut running = 0.0;
    for i in (1..=d).rev() {
        let scale = inv_std / ((i * (i + 1)) as f64).sqrt();
        let cf = position[i - 1] * scale;
        out[i] = (running - i as f64 * cf) / n;
        running += cf;
    }
    out[0] = running / n;
    out
}

/// Elevates every position of `s` onto the lattice of dimension `pos_dim`.
pub fn lattice_positions(s: &SignalSet) -> Result<Vec<ElevatedCoord>> {
    let basis = BasisMatrix::new(s.pos_dim)?;
    (0..s.len())
        .map(|i| Ok(lattice::elevate(&lattice_cartesian(s.position(i)), &basis)?))
        .collect()
}

/// Approximate filter through the lattice: elevate, splat, blur, slice.
pub fn lattice_filter(s: &SignalSet) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Err(FilterError::Empty);
    }
    let points = lattice_positions(s)?;
    let enclosures = lattice::enclose_all(&points)?;
    let grid = lattice::splat_enclosures(s.pos_dim, s.v_dim, &enclosures, &s.values)?;
    let blurred = lattice::blur(&grid)?;
    Ok(lattice::slice_enclosures(&blurred, &enclosures))
}

/// Divides the leading channels by the last one and drops it.
pub fn normalize_homogeneous(filtered: &[f64], v_dim: usize) -> Result<Vec<f64>> {
    if v_dim < 2 {
        return Err(FilterError::DimensionMismatch {
            expected: 2,
            actual: v_dim,
        });
    }
    if !filtered.len().is_multiple_of(v_dim) {
        return Err(FilterError::DimensionMismatch {
            expected: v_dim,
            actual: filtered.len() % v_dim,
        });
    }
    let mut out = Vec::with_capacity(filtered.len() / v_dim * (v_dim - 1));
    for (index, row) in filtered.chunks_exact(v_dim).enumerate() {
        let weight = row[v_dim - 1];
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(FilterError::DegenerateNormalization { index, weight });
        }
        out.extend(row[..v_dim - 1].iter().map(|v| v / weight));
    }
    Ok(out)
}

/// Filters an image with a preset and returns the normalized result with the
/// image's own channel layout.
pub fn filter_image(image: &Raster, params: &FilterParams, exact: bool) -> Result<Raster> {
    let signals = make_preset(image, params)?;
    let filtered = if exact {
        brute_force_filter(&signals)?
    } else {
        lattice_filter(&signals)?
    };
    let data = normalize_homogeneous(&filtered, signals.v_dim())?;
    Raster::new(image.width, image.height, image.channels, data)
}
