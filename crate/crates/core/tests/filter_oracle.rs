use plflow_core::hdfilter::{
    brute_force_filter, filter_image, lattice_filter, make_preset, normalize_homogeneous, FilterParams, Preset,
    Raster, SignalSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn relative_errors(approx: &[f64], exact: &[f64], width: usize) -> Vec<f64> {
    approx
        .chunks_exact(width)
        .zip(exact.chunks_exact(width))
        .map(|(a, e)| {
            let num: f64 = a.iter().zip(e).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let den: f64 = e.iter().map(|y| y * y).sum::<f64>().sqrt();
            num / den
        })
        .collect()
}

fn noise_image(seed: u64, w: usize, h: usize) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Raster::new(w, h, 1, (0..w * h).map(|_| rng.gen_range(0..=255) as f64).collect()).unwrap()
}

#[test]
fn bilateral_gray_matches_exact_filter() {
    let params = FilterParams {
        sigma_s: 2.0,
        sigma_c: Some(40.0),
        preset: Preset::BilateralGray,
    };
    for seed in 0..3 {
        let img = noise_image(seed, 16, 16);
        let fast = filter_image(&img, &params, false).unwrap();
        let exact = filter_image(&img, &params, true).unwrap();
        let errs = relative_errors(&fast.data, &exact.data, 1);
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        assert!(mean <= 0.05, "seed {seed}: mean relative error {mean}");
    }
}

#[test]
fn constant_values_are_preserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for pos_dim in [2, 3, 5] {
        let n = 200;
        let positions: Vec<f64> = (0..n * pos_dim).map(|_| rng.gen_range(0.0..4.0)).collect();
        let values: Vec<f64> = (0..n).flat_map(|_| [0.7, -2.0, 1.0]).collect();
        let s = SignalSet::new(pos_dim, 3, positions, values).unwrap();
        for out in [brute_force_filter(&s).unwrap(), lattice_filter(&s).unwrap()] {
            let norm = normalize_homogeneous(&out, 3).unwrap();
            for row in norm.chunks_exact(2) {
                assert!((row[0] - 0.7).abs() <= 1e-5 * 0.7);
                assert!((row[1] + 2.0).abs() <= 1e-5 * 2.0);
            }
        }
    }
}

#[test]
fn constant_image_is_unchanged() {
    let img = Raster::new(6, 5, 3, [12.0, 200.0, 99.0].repeat(30)).unwrap();
    for preset in [Preset::GaussianBlur, Preset::BilateralGray, Preset::BilateralColor] {
        let params = FilterParams {
            sigma_s: 1.5,
            sigma_c: Some(10.0),
            preset,
        };
        for exact in [false, true] {
            let out = filter_image(&img, &params, exact).unwrap();
            for (a, b) in out.data.iter().zip(&img.data) {
                assert!((a - b).abs() <= 1e-5 * b);
            }
        }
    }
}

#[test]
fn permuting_points_permutes_outputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 150;
    let pos_dim = 3;
    let positions: Vec<f64> = (0..n * pos_dim).map(|_| rng.gen_range(0.0..3.0)).collect();
    let values: Vec<f64> = (0..n).flat_map(|_| [rng.gen::<f64>(), 1.0]).collect();
    let s = SignalSet::new(pos_dim, 2, positions.clone(), values.clone()).unwrap();

    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let p_pos: Vec<f64> = perm.iter().flat_map(|&i| positions[i * pos_dim..(i + 1) * pos_dim].to_vec()).collect();
    let p_val: Vec<f64> = perm.iter().flat_map(|&i| values[i * 2..i * 2 + 2].to_vec()).collect();
    let ps = SignalSet::new(pos_dim, 2, p_pos, p_val).unwrap();

    for filter in [brute_force_filter, lattice_filter] {
        let out = filter(&s).unwrap();
        let pout = filter(&ps).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            for c in 0..2 {
                let a = out[i * 2 + c];
                let b = pout[k * 2 + c];
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }
}

#[test]
fn huge_spatial_sigma_averages_two_pixels() {
    let img = Raster::new(2, 1, 1, vec![10.0, 30.0]).unwrap();
    let params = FilterParams {
        sigma_s: 1e6,
        sigma_c: None,
        preset: Preset::GaussianBlur,
    };
    for exact in [false, true] {
        let out = filter_image(&img, &params, exact).unwrap();
        for v in &out.data {
            assert!((v - 20.0).abs() <= 1e-3, "exact={exact} got {v}");
        }
    }
}

#[test]
fn gaussian_blur_signal_layout() {
    let img = noise_image(1, 4, 3);
    let s = make_preset(
        &img,
        &FilterParams {
            sigma_s: 0.5,
            sigma_c: None,
            preset: Preset::GaussianBlur,
        },
    )
    .unwrap();
    assert_eq!(s.len(), 12);
    // row-major, x = column, y = row
    assert_eq!(s.position(5), &[2.0, 2.0]);
    assert_eq!(s.value(5), &[img.data[5], 1.0]);
}
