//! Browser bindings for the demo page in `www/`.
//!
//! Each exported function is a thin wrapper over a plain Rust function of the
//! same name in [`demo`], which is what the native tests exercise.

use wasm_bindgen::prelude::*;

pub mod demo;

/// RGBA bytes of the synthetic test image.
#[wasm_bindgen]
pub fn synth_image(width: usize, height: usize, noise: f64, seed: u32) -> Vec<u8> {
    demo::synth_image(width, height, noise, seed.into())
}

/// Filters an RGBA image (alpha ignored) and returns RGBA bytes.
#[wasm_bindgen]
pub fn filter_rgba(
    rgba: &[u8],
    width: usize,
    height: usize,
    preset: &str,
    sigma_s: f64,
    sigma_c: f64,
    exact: bool,
) -> Result<Vec<u8>, JsError> {
    demo::filter_rgba(rgba, width, height, preset, sigma_s, sigma_c, exact).map_err(|e| JsError::new(&e))
}

/// Back-projected points of the synthetic street scene with depths scaled by
/// `lambda`, as flat `x y z` triples.
#[wasm_bindgen]
pub fn scene_points(width: usize, height: usize, lambda: f64) -> Result<Vec<f32>, JsError> {
    demo::scene_points(width, height, lambda)
        .map(|pts| pts.iter().flatten().map(|&c| c as f32).collect())
        .map_err(|e| JsError::new(&e))
}

/// Largest relative deviation between the lattice coordinates of the scaled
/// scene and `lambda` times those of the original.
#[wasm_bindgen]
pub fn scale_check(width: usize, height: usize, lambda: f64, lattice_dim: usize) -> Result<f64, JsError> {
    demo::scale_check(width, height, lambda, lattice_dim).map_err(|e| JsError::new(&e))
}

/// Metric suite against noise level: rows of
/// `noise, epe3d, acc3ds, acc3dr, outlier3d, epe2d, acc2d`.
#[wasm_bindgen]
pub fn metrics_curve(points: usize, max_noise: f64, steps: usize, standard: &str, seed: u32) -> Result<Vec<f64>, JsError> {
    demo::metrics_curve(points, max_noise, steps, standard, seed.into())
        .map(|rows| rows.into_iter().flatten().collect())
        .map_err(|e| JsError::new(&e))
}
