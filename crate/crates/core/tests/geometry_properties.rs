use std::collections::HashSet;

use plflow_core::geometry::{
    backproject, compose_pyramid_depth, scale_depth, scale_scene, to_lattice_positions, CameraIntrinsics, DepthMap,
    PyramidDepth,
};
use plflow_core::lattice::BasisMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_scene(rng: &mut ChaCha8Rng) -> (DepthMap, CameraIntrinsics) {
    let w = rng.gen_range(1..12);
    let h = rng.gen_range(1..12);
    let depth = (0..w * h)
        .map(|_| if rng.gen_bool(0.15) { f64::NAN } else { rng.gen_range(0.5..80.0) })
        .collect();
    let k = CameraIntrinsics::new(
        rng.gen_range(100.0..1200.0),
        rng.gen_range(100.0..1200.0),
        rng.gen_range(-5.0..15.0),
        rng.gen_range(-5.0..15.0),
    )
    .unwrap();
    (DepthMap::new(w, h, depth).unwrap(), k)
}

#[test]
fn projection_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let (dm, k) = random_scene(&mut rng);
        let Ok(pc) = backproject(&dm, &k) else { continue };
        for (p, px) in pc.points.iter().zip(pc.source_pixel.as_ref().unwrap()) {
            let [u, v] = k.project(*p).unwrap();
            assert!((u - px[0] as f64).abs() < 1e-9 && (v - px[1] as f64).abs() < 1e-9);
            assert!(p[2] > 0.0);
        }
    }
}

#[test]
fn backprojection_is_injective_and_counts_valid_pixels() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..30 {
        let (dm, k) = random_scene(&mut rng);
        let Ok(pc) = backproject(&dm, &k) else { continue };
        assert_eq!(pc.len(), dm.valid_count());
        let pixels: HashSet<[usize; 2]> = pc.source_pixel.unwrap().into_iter().collect();
        assert_eq!(pixels.len(), pc.points.len());
    }
}

#[test]
fn doubling_depth_doubles_points() {
    let k = CameraIntrinsics::new(720.0, 700.0, 3.2, 1.9).unwrap();
    let dm = DepthMap::new(3, 2, vec![1.0, 2.0, 3.5, 4.0, 7.25, 9.0]).unwrap();
    let a = backproject(&dm, &k).unwrap();
    let b = backproject(&scale_depth(&dm, 2.0).unwrap(), &k).unwrap();
    for (p, q) in a.points.iter().zip(&b.points) {
        for c in 0..3 {
            assert_eq!(q[c], 2.0 * p[c]);
        }
    }
}

fn assert_scaled(scaled: &[f64], base: &[f64], lambda: f64) {
    for (s, b) in scaled.iter().zip(base) {
        let tol = 1e-9 * (lambda * b).abs().max(1e-300);
        assert!((s - lambda * b).abs() <= tol.max(1e-12), "{s} vs {lambda} * {b}");
    }
}

#[test]
fn primed_scene_scales_lattice_positions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sigma = [0.7, 0.9, 1.6];
    for basis in [BasisMatrix::new(2).unwrap(), BasisMatrix::new(3).unwrap()] {
        for _ in 0..40 {
            let (dm, k) = random_scene(&mut rng);
            let Ok(pc) = backproject(&dm, &k) else { continue };
            let base = to_lattice_positions(&pc, sigma, &basis).unwrap();
            for lambda in [0.5, 2.0, 10.0] {
                let (dm2, k2) = scale_scene(&dm, &k, lambda).unwrap();
                let mut primed = pc.clone();
                for (p, px) in primed.points.iter_mut().zip(pc.source_pixel.as_ref().unwrap()) {
                    let z = dm2.at(px[0], px[1]).unwrap();
                    *p = k2.backproject_pixel(lambda * px[0] as f64, lambda * px[1] as f64, z);
                }
                let scaled = to_lattice_positions(&primed, sigma, &basis).unwrap();
                for (s, b) in scaled.iter().zip(&base) {
                    assert_scaled(s.coords(), b.coords(), lambda);
                }

                let depth_only = backproject(&scale_depth(&dm, lambda).unwrap(), &k).unwrap();
                let scaled = to_lattice_positions(&depth_only, sigma, &basis).unwrap();
                for (s, b) in scaled.iter().zip(&base) {
                    assert_scaled(s.coords(), b.coords(), lambda);
                }
            }
        }
    }
}

#[test]
fn pyramid_composition_is_linear_per_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (w, h) = (5, 4);
    let mut level = || (0..w * h).map(|_| rng.gen_range(0.0..20.0)).collect::<Vec<f64>>();
    let levels = [level(), level(), level(), level()];
    let base = compose_pyramid_depth(&PyramidDepth::new(w, h, levels.clone()).unwrap()).unwrap();
    for i in 0..4 {
        let alpha = 1.7 + i as f64;
        let mut scaled = levels.clone();
        scaled[i].iter_mut().for_each(|v| *v *= alpha);
        let out = compose_pyramid_depth(&PyramidDepth::new(w, h, scaled).unwrap()).unwrap();
        let weight = [0.25, 0.5, 1.0, 2.0][i];
        for px in 0..w * h {
            let expected = base.depth()[px] + (alpha - 1.0) * weight * levels[i][px];
            assert!((out.depth()[px] - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
    }
}
