//! The d-dimensional permutohedral lattice.
//!
//! Positions in `R^(d+1)` are projected onto the zero-sum hyperplane by the
//! basis matrix `B_d` (diagonal `d`, off-diagonal `-1`). Lattice points are
//! integer vectors on that hyperplane whose coordinates all share the same
//! remainder modulo `d+1`; the points with remainder 0 are multiples of `d+1`.
//! Every elevated position lies in exactly one simplex whose `d+1` vertices
//! are lattice points, and values are moved between positions and vertices
//! with the barycentric weights of that simplex.
//!
//! The grid built by [`splat`] is a sparse table keyed by the first `d`
//! integer coordinates of each vertex; the last coordinate is implied by the
//! zero-sum constraint.

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use rustc_hash::FxHashMap;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Largest magnitude accepted for an elevated coordinate. Keeps every vertex
/// coordinate, and every neighbour produced by blurring, inside `i32`.
const MAX_ELEVATED: f64 = (1u64 << 30) as f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("lattice dimension must be at least 1, got {0}")]
    InvalidDimension(usize),
    #[error("value dimension must be at least 1")]
    InvalidValueDimension,
    #[error("length mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("elevated coordinates must sum to zero (sum = {0:e})")]
    NotZeroSum(f64),
    #[error("coordinate magnitude {0:e} exceeds the integer key range")]
    Overflow(f64),
    #[error("convolution kernel has no taps")]
    EmptyKernel,
}

pub type Result<T> = std::result::Result<T, LatticeError>;

/// The `(d+1) x (d+1)` matrix with `d` on the diagonal and `-1` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    d: usize,
    entries: Vec<f64>,
}

impl BasisMatrix {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(LatticeError::InvalidDimension(d));
        }
        let n = d + 1;
        let entries = (0..n * n)
            .map(|idx| if idx / n == idx % n { d as f64 } else { -1.0 })
            .collect();
        Ok(Self { d, entries })
    }

    /// Lattice dimension `d`.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of rows (and columns), `d + 1`.
    pub fn size(&self) -> usize {
        self.d + 1
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size() + col]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.size()).map(<[f64]>::to_vec).collect()
    }
}

pub fn make_basis(d: usize) -> Result<BasisMatrix> {
    BasisMatrix::new(d)
}

/// A position on the zero-sum hyperplane, in lattice units.
#[derive(Debug, Clone, PartialEq)]
pub struct ElevatedCoord {
    coords: Vec<f64>,
}

impl ElevatedCoord {
    /// Validates finiteness and the zero-sum constraint, with tolerance
    /// `1e-9 * (d+1) * max|coord|`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(LatticeError::InvalidDimension(coords.len().saturating_sub(1)));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(LatticeError::NonFinite(i));
        }
        let sum: f64 = coords.iter().sum();
        let scale = coords.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if sum.abs() > 1e-9 * coords.len() as f64 * scale {
            return Err(LatticeError::NotZeroSum(sum));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Lattice dimension `d` (one less than the number of coordinates).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.coords
    }
}

/// Projects a `(d+1)`-vector onto the lattice hyperplane: `B_d * position`.
pub fn elevate(position: &[f64], basis: &BasisMatrix) -> Result<ElevatedCoord> {
    let n = basis.size();
    if position.len() != n {
        return Err(LatticeError::DimensionMismatch {
            expected: n,
            actual: position.len(),
        });
    }
    let mut coords = vec![0.0; n];
    for (row, out) in coords.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (col, p) in position.iter().enumerate() {
            acc += basis.entry(row, col) * p;
        }
        *out = acc;
    }
    if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
        return Err(LatticeError::NonFinite(i));
    }
    Ok(ElevatedCoord { coords })
}

/// A lattice vertex, identified by the first `d` of its `d+1` integer
/// coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeKey(Box<[i32]>);

impl LatticeKey {
    /// Builds a key from full `(d+1)`-coordinates. Returns `None` when they
    /// do not sum to zero.
    pub fn from_full(full: &[i32]) -> Option<Self> {
        let sum: i64 = full.iter().map(|&c| c as i64).sum();
        if full.len() < 2 || sum != 0 {
            return None;
        }
        Some(Self(full[..full.len() - 1].into()))
    }

    /// Builds a key from its stored (first `d`) coordinates.
    pub fn from_stored(stored: &[i32]) -> Self {
        Self(stored.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn stored(&self) -> &[i32] {
        &self.0
    }

    /// All `d+1` coordinates; the last is reconstructed from the zero sum.
    pub fn full(&self) -> Vec<i32> {
        let last: i64 = -self.0.iter().map(|&c| c as i64).sum::<i64>();
        let mut full = self.0.to_vec();
        full.push(last as i32);
        full
    }
}

impl Borrow<[i32]> for LatticeKey {
    fn borrow(&self) -> &[i32] {
        &self.0
    }
}

/// The simplex containing an elevated position, with one barycentric weight
/// per vertex. Vertex `k` is the vertex of remainder `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexEnclosure {
    pub vertices: Vec<LatticeKey>,
    pub weights: Vec<f64>,
}

impl SimplexEnclosure {
    /// `sum_k w_k * vertex_k` in full coordinates.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.vertices.len();
        let mut out = vec![0.0; n];
        for (vertex, &w) in self.vertices.iter().zip(&self.weights) {
            for (o, c) in out.iter_mut().zip(vertex.full()) {
                *o += w * c as f64;
            }
        }
        out
    }
}

/// Finds the enclosing simplex by rounding to the nearest remainder-0 point,
/// ranking the residuals, and walking the canonical simplex from there.
pub fn find_enclosing_simplex(e: &ElevatedCoord) -> Result<SimplexEnclosure> {
    let x = e.coords();
    let n = x.len();
    let d = n - 1;
    let scale = n as f64;

    for (i, &c) in x.iter().enumerate() {
        if !c.is_finite() {
            return Err(LatticeError::NonFinite(i));
        }
        if c.abs() > MAX_ELEVATED {
            return Err(LatticeError::Overflow(c));
        }
    }

    // Nearest remainder-0 point, coordinate by coordinate.
    let mut rem0 = vec![0i64; n];
    let mut sum = 0i64;
    for (r, &c) in rem0.iter_mut().zip(x) {
        let v = c / scale;
        let up = v.ceil() * scale;
        let down = v.floor() * scale;
        *r = if up - c < c - down { up } else { down } as i64;
        sum += *r;
    }
    let sum = sum / n as i64;

    // Rank 0 is the largest residual; ties go to the lower index.
    let residual: Vec<f64> = x.iter().zip(&rem0).map(|(&c, &r)| c - r as f64).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| residual[b].total_cmp(&residual[a]).then(a.cmp(&b)));
    let mut rank = vec![0i64; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r as i64;
    }

    // Walk back onto the hyperplane if rounding left it.
    let ni = n as i64;
    if sum > 0 {
        for i in 0..n {
            if rank[i] >= ni - sum {
                rem0[i] -= ni;
                rank[i] += sum - ni;
            } else {
                rank[i] += sum;
            }
        }
    } else if sum < 0 {
        for i in 0..n {
            if rank[i] < -sum {
                rem0[i] += ni;
                rank[i] += ni + sum;
            } else {
                rank[i] += sum;
            }
        }
    }

    let mut bary = vec![0.0; n + 1];
    for i in 0..n {
        let v = (x[i] - rem0[i] as f64) / scale;
        let r = rank[i] as usize;
        bary[d - r] += v;
        bary[d + 1 - r] -= v;
    }
    bary[0] += 1.0 + bary[d + 1];
    bary.truncate(n);

    let mut vertices = Vec::with_capacity(n);
    let mut full = vec![0i32; n];
    for k in 0..n as i64 {
        for i in 0..n {
            let offset = if rank[i] <= d as i64 - k { k } else { k - ni };
            full[i] = (rem0[i] + offset) as i32;
        }
        vertices.push(LatticeKey::from_stored(&full[..d]));
    }

    let weights = bary.into_iter().map(|w| w.clamp(0.0, 1.0)).collect();
    Ok(SimplexEnclosure { vertices, weights })
}

/// Sparse table from lattice vertices to value vectors.
///
/// Entries keep their insertion order, so every operation that walks the
/// table is deterministic. Entries may hold all-zero vectors (for instance
/// neighbours materialized by a blur of a zero grid); [`LatticeGrid::compact`]
/// drops them on request.
#[derive(Debug, Clone)]
pub struct LatticeGrid {
    d: usize,
    v_dim: usize,
    index: FxHashMap<LatticeKey, usize>,
    keys: Vec<LatticeKey>,
    values: Vec<f64>,
}

impl LatticeGrid {
    pub fn new(d: usize, v_dim: usize) -> Result<Self> {
        Self::with_capacity(d, v_dim, 0)
    }

    pub fn with_capacity(d: usize, v_dim: usize, capacity: usize) -> Result<Self> {
        if d == 0 {
            return Err(LatticeError::InvalidDimension(d));
        }
        if v_dim == 0 {
            return Err(LatticeError::InvalidValueDimension);
        }
        let mut index = FxHashMap::default();
        index.reserve(capacity);
        Ok(Self {
            d,
            v_dim,
            index,
            keys: Vec::with_capacity(capacity),
            values: Vec::with_capacity(capacity * v_dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn v_dim(&self) -> usize {
        self.v_dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn get(&self, key: &LatticeKey) -> Option<&[f64]> {
        self.get_stored(key.stored())
    }

    fn get_stored(&self, stored: &[i32]) -> Option<&[f64]> {
        self.index.get(stored).map(|&slot| self.row(slot))
    }

    fn row(&self, slot: usize) -> &[f64] {
        &self.values[slot * self.v_dim..(slot + 1) * self.v_dim]
    }

    pub fn keys(&self) -> impl Iterator<Item = &LatticeKey> {
        self.keys.iter()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticeKey, &[f64])> {
        self.keys.iter().zip(self.values.chunks_exact(self.v_dim))
    }

    /// Sets the value stored at `key`, inserting it if absent.
    pub fn insert(&mut self, key: LatticeKey, value: &[f64]) -> Result<()> {
        self.check_key(&key)?;
        self.check_value(value)?;
        let slot = self.slot(key.stored());
        self.values[slot * self.v_dim..(slot + 1) * self.v_dim].copy_from_slice(value);
        Ok(())
    }

    /// Adds `weight * value` to the entry at `key`, inserting it if absent.
    pub fn accumulate(&mut self, key: &LatticeKey, weight: f64, value: &[f64]) -> Result<()> {
        self.check_key(key)?;
        self.check_value(value)?;
        self.add_weighted(key.stored(), weight, value);
        Ok(())
    }

    fn check_key(&self, key: &LatticeKey) -> Result<()> {
        if key.dim() != self.d {
            return Err(LatticeError::DimensionMismatch {
                expected: self.d,
                actual: key.dim(),
            });
        }
        Ok(())
    }

    fn check_value(&self, value: &[f64]) -> Result<()> {
        if value.len() != self.v_dim {
            return Err(LatticeError::DimensionMismatch {
                expected: self.v_dim,
                actual: value.len(),
            });
        }
        if let Some(i) = value.iter().position(|v| !v.is_finite()) {
            return Err(LatticeError::NonFinite(i));
        }
        Ok(())
    }

    fn slot(&mut self, stored: &[i32]) -> usize {
        if let Some(&slot) = self.index.get(stored) {
            return slot;
        }
        let slot = self.keys.len();
        let key = LatticeKey::from_stored(stored);
        self.keys.push(key.clone());
        self.index.insert(key, slot);
        self.values.resize(self.values.len() + self.v_dim, 0.0);
        slot
    }

    fn add_weighted(&mut self, stored: &[i32], weight: f64, value: &[f64]) {
        let slot = self.slot(stored);
        let row = &mut self.values[slot * self.v_dim..(slot + 1) * self.v_dim];
        for (r, v) in row.iter_mut().zip(value) {
            *r += weight * v;
        }
    }

    /// Per-channel sum over all entries.
    pub fn total_mass(&self) -> Vec<f64> {
        let mut mass = vec![0.0; self.v_dim];
        for row in self.values.chunks_exact(self.v_dim) {
            for (m, v) in mass.iter_mut().zip(row) {
                *m += v;
            }
        }
        mass
    }

    /// Same keys, every value multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// Drops entries whose value vector is entirely zero.
    pub fn compact(&mut self) {
        let v_dim = self.v_dim;
        let mut keys = Vec::with_capacity(self.keys.len());
        let mut values = Vec::with_capacity(self.values.len());
        for (key, row) in self.keys.drain(..).zip(self.values.chunks_exact(v_dim)) {
            if row.iter().any(|&v| v != 0.0) {
                keys.push(key);
                values.extend_from_slice(row);
            }
        }
        self.index = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        self.keys = keys;
        self.values = values;
    }

    /// One line per entry: `k_0 ... k_{d-1} : v_0 ... v_{vdim-1}`.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        for (key, row) in self.iter() {
            let ks: Vec<String> = key.stored().iter().map(i32::to_string).collect();
            let vs: Vec<String> = row.iter().map(f64::to_string).collect();
            let _ = writeln!(out, "{} : {}", ks.join(" "), vs.join(" "));
        }
        out
    }

    fn check_finite(&self) -> Result<()> {
        match self.values.iter().find(|v| !v.is_finite()) {
            Some(&v) => Err(LatticeError::Overflow(v)),
            None => Ok(()),
        }
    }
}

fn check_points(points: &[ElevatedCoord], d: usize) -> Result<()> {
    for p in points {
        if p.dim() != d {
            return Err(LatticeError::DimensionMismatch {
                expected: d + 1,
                actual: p.coords().len(),
            });
        }
    }
    Ok(())
}

/// Enclosing simplices for a batch of points.
pub fn enclose_all(points: &[ElevatedCoord]) -> Result<Vec<SimplexEnclosure>> {
    #[cfg(feature = "parallel")]
    let iter = points.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = points.iter();
    iter.map(find_enclosing_simplex).collect()
}

/// Distributes each point's value onto its simplex vertices.
///
/// `values` is row-major, `points.len() * v_dim` long.
pub fn splat(d: usize, v_dim: usize, points: &[ElevatedCoord], values: &[f64]) -> Result<LatticeGrid> {
    check_points(points, d)?;
    let enclosures = enclose_all(points)?;
    splat_enclosures(d, v_dim, &enclosures, values)
}

/// [`splat`] with the simplex lookup already done.
pub fn splat_enclosures(
    d: usize,
    v_dim: usize,
    enclosures: &[SimplexEnclosure],
    values: &[f64],
) -> Result<LatticeGrid> {
    if values.len() != enclosures.len() * v_dim {
        return Err(LatticeError::DimensionMismatch {
            expected: enclosures.len() * v_dim,
            actual: values.len(),
        });
    }
    let mut grid = LatticeGrid::with_capacity(d, v_dim, 2 * enclosures.len() * (d + 1))?;
    for (enc, value) in enclosures.iter().zip(values.chunks_exact(v_dim)) {
        if enc.vertices.len() != d + 1 {
            return Err(LatticeError::DimensionMismatch {
                expected: d + 1,
                actual: enc.vertices.len(),
            });
        }
        if let Some(i) = value.iter().position(|v| !v.is_finite()) {
            return Err(LatticeError::NonFinite(i));
        }
        // Zero-weight vertices (boundary points) carry nothing; skip them so
        // they do not appear as empty entries.
        for (vertex, &w) in enc.vertices.iter().zip(&enc.weights) {
            if w != 0.0 {
                grid.add_weighted(vertex.stored(), w, value);
            }
        }
    }
    Ok(grid)
}

/// Moves `stored` one step along lattice axis `axis` in direction `sign`.
///
/// Axis `j` has full-coordinate direction `(1, ..., 1) - (d+1) e_j`.
fn step(stored: &[i32], axis: usize, sign: i32, out: &mut [i32]) -> Result<()> {
    let d = stored.len();
    for (i, (o, &s)) in out.iter_mut().zip(stored).enumerate() {
        let delta = if i == axis { -(d as i32) } else { 1 } * sign;
        *o = s.checked_add(delta).ok_or(LatticeError::Overflow(s as f64))?;
    }
    Ok(())
}

/// Separable `(1, 2, 1) / 4` blur along each of the `d+1` lattice axes.
/// Neighbours missing from the table are created, so mass is conserved.
pub fn blur(grid: &LatticeGrid) -> Result<LatticeGrid> {
    let mut current = blur_axis(grid, 0)?;
    for axis in 1..=grid.d {
        current = blur_axis(&current, axis)?;
    }
    current.check_finite()?;
    Ok(current)
}

fn blur_axis(src: &LatticeGrid, axis: usize) -> Result<LatticeGrid> {
    let mut out = LatticeGrid::with_capacity(src.d, src.v_dim, src.len() * 2)?;
    let mut neighbour = vec![0i32; src.d];
    for (slot, key) in src.keys.iter().enumerate() {
        let value = src.row(slot);
        out.add_weighted(key.stored(), 0.5, value);
        for sign in [1, -1] {
            step(key.stored(), axis, sign, &mut neighbour)?;
            out.add_weighted(&neighbour, 0.25, value);
        }
    }
    Ok(out)
}

/// Convolution weights indexed by per-axis step counts (length `d+1`).
///
/// A tap `c` displaces a vertex by `sum_j c_j * ((1, ..., 1) - (d+1) e_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeKernel {
    d: usize,
    taps: BTreeMap<Vec<i32>, f64>,
}

impl LatticeKernel {
    pub fn new(d: usize, taps: BTreeMap<Vec<i32>, f64>) -> Result<Self> {
        if d == 0 {
            return Err(LatticeError::InvalidDimension(d));
        }
        if taps.is_empty() {
            return Err(LatticeError::EmptyKernel);
        }
        for (offset, w) in &taps {
            if offset.len() != d + 1 {
                return Err(LatticeError::DimensionMismatch {
                    expected: d + 1,
                    actual: offset.len(),
                });
            }
            if !w.is_finite() {
                return Err(LatticeError::NonFinite(0));
            }
        }
        Ok(Self { d, taps })
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(d, BTreeMap::from([(vec![0; d + 1], 1.0)]))
    }

    /// The product of the `(1, 2, 1) / 4` stencils of all `d+1` axes, i.e. the
    /// single-pass equivalent of [`blur`].
    pub fn blur_stencil(d: usize) -> Result<Self> {
        let mut taps = BTreeMap::from([(Vec::new(), 1.0)]);
        for _ in 0..=d {
            let mut next = BTreeMap::new();
            for (offset, w) in &taps {
                for (c, cw) in [(-1, 0.25), (0, 0.5), (1, 0.25)] {
                    let mut o: Vec<i32> = offset.clone();
                    o.push(c);
                    next.insert(o, w * cw);
                }
            }
            taps = next;
        }
        Self::new(d, taps)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn taps(&self) -> &BTreeMap<Vec<i32>, f64> {
        &self.taps
    }

    /// Displacement of a tap in stored (first `d`) coordinates.
    fn displacement(&self, offset: &[i32]) -> Vec<i32> {
        let total: i32 = offset.iter().sum();
        let n = self.d as i32 + 1;
        offset[..self.d].iter().map(|&c| total - n * c).collect()
    }
}

/// Generic neighbourhood convolution: each entry scatters `w * value` to
/// `key + displacement(tap)` for every tap.
pub fn convolve_neighborhood(grid: &LatticeGrid, kernel: &LatticeKernel) -> Result<LatticeGrid> {
    if kernel.d != grid.d {
        return Err(LatticeError::DimensionMismatch {
            expected: grid.d + 1,
            actual: kernel.d + 1,
        });
    }
    let taps: Vec<(Vec<i32>, f64)> = kernel
        .taps
        .iter()
        .map(|(offset, &w)| (kernel.displacement(offset), w))
        .collect();
    let mut out = LatticeGrid::with_capacity(grid.d, grid.v_dim, grid.len() * taps.len().min(8))?;
    let mut target = vec![0i32; grid.d];
    for (slot, key) in grid.keys.iter().enumerate() {
        let value = grid.row(slot);
        for (disp, w) in &taps {
            for ((t, &k), &dk) in target.iter_mut().zip(key.stored()).zip(disp) {
                *t = k.checked_add(dk).ok_or(LatticeError::Overflow(k as f64))?;
            }
            out.add_weighted(&target, *w, value);
        }
    }
    out.check_finite()?;
    Ok(out)
}

/// Gathers grid values back at arbitrary points. Vertices absent from the
/// grid contribute zero. Output is row-major, `points.len() * v_dim`.
pub fn slice(grid: &LatticeGrid, points: &[ElevatedCoord]) -> Result<Vec<f64>> {
    check_points(points, grid.d)?;
    let enclosures = enclose_all(points)?;
    Ok(slice_enclosures(grid, &enclosures))
}

/// [`slice`] with the simplex lookup already done.
pub fn slice_enclosures(grid: &LatticeGrid, enclosures: &[SimplexEnclosure]) -> Vec<f64> {
    let v_dim = grid.v_dim;
    let mut out = vec![0.0; enclosures.len() * v_dim];
    let gather = |(row, enc): (&mut [f64], &SimplexEnclosure)| {
        for (vertex, &w) in enc.vertices.iter().zip(&enc.weights) {
            if let Some(value) = grid.get_stored(vertex.stored()) {
                for (o, v) in row.iter_mut().zip(value) {
                    *o += w * v;
                }
            }
        }
    };
    #[cfg(feature = "parallel")]
    out.par_chunks_exact_mut(v_dim).zip(enclosures.par_iter()).for_each(gather);
    #[cfg(not(feature = "parallel"))]
    out.chunks_exact_mut(v_dim).zip(enclosures.iter()).for_each(gather);
    out
}
