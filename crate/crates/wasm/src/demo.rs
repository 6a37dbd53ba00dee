use plflow_core::flowmetrics::{evaluate_flow, EvalStandard, FlowField};
use plflow_core::geometry::{backproject, scale_depth, to_lattice_positions, CameraIntrinsics, DepthMap, PointCloud3D};
use plflow_core::hdfilter::{filter_image, FilterParams, Preset, Raster};
use plflow_core::lattice::BasisMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LATTICE_SIGMAS: [f64; 3] = [0.5, 0.5, 0.5];

/// Gradient background, a bright disk and a dark bar, plus uniform noise of
/// amplitude `noise` (0-255 scale).
pub fn synth_image(width: usize, height: usize, noise: f64, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width as f64, height as f64);
    let mut out = Vec::with_capacity(width * height * 4);
    for y in 0..height {
        for x in 0..width {
            let (fx, fy) = (x as f64 / w, y as f64 / h);
            let mut rgb = [40.0 + 120.0 * fx, 60.0 + 60.0 * fy, 150.0 - 80.0 * fx];
            if (fx - 0.35).powi(2) + (fy - 0.45).powi(2) < 0.04 {
                rgb = [235.0, 200.0, 70.0];
            }
            if (0.6..0.85).contains(&fx) && (0.2..0.8).contains(&fy) {
                rgb = [30.0, 35.0, 45.0];
            }
            for c in rgb {
                let v = c + if noise > 0.0 { rng.gen_range(-noise..noise) } else { 0.0 };
                out.push(v.round().clamp(0.0, 255.0) as u8);
            }
            out.push(255);
        }
    }
    out
}

pub fn filter_rgba(
    rgba: &[u8],
    width: usize,
    height: usize,
    preset: &str,
    sigma_s: f64,
    sigma_c: f64,
    exact: bool,
) -> Result<Vec<u8>, String> {
    if rgba.len() != width * height * 4 {
        return Err(format!("expected {} RGBA bytes, got {}", width * height * 4, rgba.len()));
    }
    let preset = Preset::from_name(preset).ok_or_else(|| format!("unknown preset {preset:?}"))?;
    let data = rgba
        .chunks_exact(4)
        .flat_map(|px| [px[0], px[1], px[2]].map(f64::from))
        .collect();
    let image = Raster::new(width, height, 3, data).map_err(|e| e.to_string())?;
    let params = FilterParams {
        sigma_s,
        sigma_c: Some(sigma_c),
        preset,
    };
    params.validate().map_err(|e| e.to_string())?;
    let out = filter_image(&image, &params, exact).map_err(|e| e.to_string())?;
    Ok(out
        .data
        .chunks_exact(3)
        .flat_map(|px| {
            let q = |v: f64| v.round().clamp(0.0, 255.0) as u8;
            [q(px[0]), q(px[1]), q(px[2]), 255]
        })
        .collect())
}

fn street_camera(width: usize, height: usize) -> CameraIntrinsics {
    let f = 0.9 * width as f64;
    CameraIntrinsics {
        f_u: f,
        f_v: f,
        c_u: width as f64 / 2.0,
        c_v: height as f64 / 2.0,
    }
}

/// A flat road under a camera 1.5 m high, a box 12 m ahead and sky (invalid)
/// above the horizon.
pub fn street_depth(width: usize, height: usize) -> Result<DepthMap, String> {
    let k = street_camera(width, height);
    let mut depth = vec![f64::NAN; width * height];
    for v in 0..height {
        for u in 0..width {
            let dv = v as f64 - k.c_v;
            let mut z = if dv > 0.0 { (k.f_v * 1.5 / dv).min(80.0) } else { f64::NAN };
            let x_at_box = (u as f64 - k.c_u) * 12.0 / k.f_u;
            let y_at_box = dv * 12.0 / k.f_v;
            if (-1.0..1.5).contains(&x_at_box) && (-0.5..1.5).contains(&y_at_box) && !(z < 12.0) {
                z = 12.0;
            }
            depth[v * width + u] = z;
        }
    }
    DepthMap::new(width, height, depth).map_err(|e| e.to_string())
}

pub fn scene_points(width: usize, height: usize, lambda: f64) -> Result<Vec<[f64; 3]>, String> {
    let dm = scale_depth(&street_depth(width, height)?, lambda).map_err(|e| e.to_string())?;
    let pc = backproject(&dm, &street_camera(width, height)).map_err(|e| e.to_string())?;
    Ok(pc.points)
}

pub fn scale_check(width: usize, height: usize, lambda: f64, lattice_dim: usize) -> Result<f64, String> {
    let basis = BasisMatrix::new(lattice_dim).map_err(|e| e.to_string())?;
    let elevated = |lam: f64| {
        let pc = PointCloud3D::from_points(scene_points(width, height, lam)?);
        to_lattice_positions(&pc, LATTICE_SIGMAS, &basis).map_err(|e| e.to_string())
    };
    let base = elevated(1.0)?;
    let scaled = elevated(lambda)?;
    let mut worst = 0.0f64;
    for (s, b) in scaled.iter().zip(&base) {
        let norm = b.coords().iter().fold(0.0f64, |m, c| m.max(c.abs())) * lambda;
        for (x, y) in s.coords().iter().zip(b.coords()) {
            worst = worst.max((x - lambda * y).abs() / norm.max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn metrics_curve(points: usize, max_noise: f64, steps: usize, standard: &str, seed: u64) -> Result<Vec<[f64; 7]>, String> {
    if points == 0 || steps < 2 {
        return Err("need at least one point and two noise levels".into());
    }
    if !(max_noise.is_finite() && max_noise > 0.0) {
        return Err(format!("noise level must be positive, got {max_noise}"));
    }
    let std = EvalStandard::from_name(standard).ok_or_else(|| format!("unknown standard {standard:?}"))?;
    let k = CameraIntrinsics {
        f_u: 721.5,
        f_v: 721.5,
        c_u: 609.5,
        c_v: 172.8,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[f64; 3]> = (0..points)
        .map(|_| [rng.gen_range(-10.0..10.0), rng.gen_range(-1.5..2.0), rng.gen_range(5.0..40.0)])
        .collect();
    // Ego-motion-like ground truth: forward translation with per-point jitter.
    let gt: Vec<[f64; 3]> = (0..points)
        .map(|_| [0.1 * gaussian(&mut rng), 0.05 * gaussian(&mut rng), -1.0 + 0.2 * gaussian(&mut rng)])
        .collect();
    let unit: Vec<[f64; 3]> = (0..points).map(|_| [gaussian(&mut rng), gaussian(&mut rng), gaussian(&mut rng)]).collect();
    let cloud = PointCloud3D::from_points(pts);
    let gt_field = FlowField::new(gt.clone()).map_err(|e| e.to_string())?;
    (0..steps)
        .map(|i| {
            let sigma = max_noise * i as f64 / (steps - 1) as f64;
            let est = gt
                .iter()
                .zip(&unit)
                .map(|(g, n)| [g[0] + sigma * n[0], g[1] + sigma * n[1], g[2] + sigma * n[2]])
                .collect();
            let r = evaluate_flow(&cloud, &FlowField::new(est).map_err(|e| e.to_string())?, &gt_field, &k, &std)
                .map_err(|e| e.to_string())?;
            Ok([sigma, r.epe3d_mean, r.acc3ds, r.acc3dr, r.outlier3d, r.epe2d_mean, r.acc2d])
        })
        .collect()
}
