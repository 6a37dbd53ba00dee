use std::collections::{BTreeMap, HashSet, VecDeque};

use plflow_core::lattice::{
    blur, convolve_neighborhood, elevate, find_enclosing_simplex, make_basis, slice, splat, ElevatedCoord,
    LatticeGrid, LatticeKernel, LatticeKey,
};
use proptest::prelude::*;

fn elevated_points(d: usize, raw: &[f64]) -> Vec<ElevatedCoord> {
    let basis = make_basis(d).unwrap();
    raw.chunks_exact(d + 1).map(|p| elevate(p, &basis).unwrap()).collect()
}

fn grids_close(a: &LatticeGrid, b: &LatticeGrid, tol: f64) -> bool {
    let keys: HashSet<&LatticeKey> = a.keys().chain(b.keys()).collect();
    let zero = vec![0.0; a.v_dim()];
    keys.into_iter().all(|k| {
        let x = a.get(k).unwrap_or(&zero);
        let y = b.get(k).unwrap_or(&zero);
        x.iter().zip(y).all(|(p, q)| (p - q).abs() <= tol * (1.0 + p.abs().max(q.abs())))
    })
}

fn dim_and_points(max_points: usize) -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..=5).prop_flat_map(move |d| {
        (Just(d), prop::collection::vec(-20.0f64..20.0, (d + 1)..=(d + 1) * max_points))
            .prop_map(move |(d, mut v)| {
                v.truncate(v.len() / (d + 1) * (d + 1));
                (d, v)
            })
    })
}

proptest! {
    #[test]
    fn elevation_sums_to_zero_and_scales((d, raw) in dim_and_points(1), lambda in -5.0f64..5.0) {
        let basis = make_basis(d).unwrap();
        let e = elevate(&raw, &basis).unwrap();
        let max = e.coords().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        prop_assert!(e.coords().iter().sum::<f64>().abs() <= 1e-9 * (d + 1) as f64 * max.max(1.0));
        let scaled: Vec<f64> = raw.iter().map(|x| lambda * x).collect();
        let es = elevate(&scaled, &basis).unwrap();
        for (a, b) in es.coords().iter().zip(e.coords()) {
            prop_assert!((a - lambda * b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn barycentric_reconstruction((d, raw) in dim_and_points(1)) {
        let e = &elevated_points(d, &raw)[0];
        let enc = find_enclosing_simplex(e).unwrap();
        let total: f64 = enc.weights.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(enc.weights.iter().all(|&w| (0.0..=1.0).contains(&w)));
        let rec = enc.reconstruct();
        let scale = e.coords().iter().fold(1.0f64, |m, c| m.max(c.abs()));
        for (r, x) in rec.iter().zip(e.coords()) {
            prop_assert!((r - x).abs() <= 1e-6 * scale);
        }
        let distinct: HashSet<&LatticeKey> = enc.vertices.iter().collect();
        prop_assert_eq!(distinct.len(), d + 1);
        for v in &enc.vertices {
            prop_assert_eq!(v.full().iter().map(|&c| c as i64).sum::<i64>(), 0);
        }
    }

    #[test]
    fn splat_blur_slice_are_linear((d, raw) in dim_and_points(12), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let points = elevated_points(d, &raw);
        let n = points.len();
        let x: Vec<f64> = (0..2 * n).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..2 * n).map(|i| (i as f64 * 1.3).cos()).collect();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();

        let gx = splat(d, 2, &points, &x).unwrap();
        let gy = splat(d, 2, &points, &y).unwrap();
        let gm = splat(d, 2, &points, &mix).unwrap();
        // splat: compare value by value
        for (k, v) in gm.iter() {
            let vx = gx.get(k).unwrap();
            let vy = gy.get(k).unwrap();
            for c in 0..2 {
                prop_assert!((v[c] - (alpha * vx[c] + beta * vy[c])).abs() < 1e-9);
            }
        }
        // blur and slice
        let bx = blur(&gx).unwrap();
        let by = blur(&gy).unwrap();
        let bm = blur(&gm).unwrap();
        let sx = slice(&bx, &points).unwrap();
        let sy = slice(&by, &points).unwrap();
        let sm = slice(&bm, &points).unwrap();
        for i in 0..sm.len() {
            prop_assert!((sm[i] - (alpha * sx[i] + beta * sy[i])).abs() < 1e-9);
        }
        // convolution
        let kernel = LatticeKernel::new(d, BTreeMap::from([
            (vec![0; d + 1], 0.6),
            ({ let mut o = vec![0; d + 1]; o[0] = 1; o }, 0.3),
            ({ let mut o = vec![0; d + 1]; o[d] = -2; o }, -0.1),
        ])).unwrap();
        let cx = convolve_neighborhood(&gx, &kernel).unwrap();
        let cy = convolve_neighborhood(&gy, &kernel).unwrap();
        let cm = convolve_neighborhood(&gm, &kernel).unwrap();
        for (k, v) in cm.iter() {
            let vx = cx.get(k).unwrap();
            let vy = cy.get(k).unwrap();
            for c in 0..2 {
                prop_assert!((v[c] - (alpha * vx[c] + beta * vy[c])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn splat_slice_adjoint((d, raw) in dim_and_points(20), seed in 0u64..1000) {
        let points = elevated_points(d, &raw);
        let n = points.len();
        let values: Vec<f64> = (0..n).map(|i| ((i as u64 + seed) as f64).sin()).collect();
        // An arbitrary grid on keys near the points.
        let mut grid = blur(&splat(d, 1, &points, &vec![1.0; n]).unwrap()).unwrap();
        let keys: Vec<LatticeKey> = grid.keys().cloned().collect();
        for (i, k) in keys.into_iter().enumerate() {
            grid.insert(k, &[((i as u64 * 7 + seed) as f64).cos()]).unwrap();
        }
        let sliced = slice(&grid, &points).unwrap();
        let lhs: f64 = sliced.iter().zip(&values).map(|(a, b)| a * b).sum();
        let splatted = splat(d, 1, &points, &values).unwrap();
        let rhs: f64 = splatted.iter().map(|(k, v)| v[0] * grid.get(k).map_or(0.0, |g| g[0])).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-6 * lhs.abs().max(rhs.abs()).max(1.0));
    }

    #[test]
    fn blur_conserves_mass_and_matches_stencil((d, raw) in dim_and_points(10)) {
        let points = elevated_points(d, &raw);
        let values: Vec<f64> = (0..points.len() * 3).map(|i| 1.0 + (i as f64).sin()).collect();
        let grid = splat(d, 3, &points, &values).unwrap();
        let mass = grid.total_mass();
        let blurred = blur(&grid).unwrap();
        for (a, b) in blurred.total_mass().iter().zip(&mass) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
        prop_assert!(grid.keys().all(|k| blurred.get(k).is_some()));
        let stencil = convolve_neighborhood(&grid, &LatticeKernel::blur_stencil(d).unwrap()).unwrap();
        prop_assert!(grids_close(&blurred, &stencil, 1e-12));
    }
}

#[test]
fn splat_conserves_mass() {
    for d in [2, 3, 5] {
        let raw: Vec<f64> = (0..500 * (d + 1)).map(|i| 7.0 * ((i * 31 % 97) as f64 / 97.0 - 0.5) + (i as f64).sin()).collect();
        let points = elevated_points(d, &raw);
        let values: Vec<f64> = (0..500 * 4).map(|i| (i as f64 * 0.77).cos() + 0.1).collect();
        let grid = splat(d, 4, &points, &values).unwrap();
        let mut expected = [0.0; 4];
        for row in values.chunks_exact(4) {
            for c in 0..4 {
                expected[c] += row[c];
            }
        }
        for (a, b) in grid.total_mass().iter().zip(expected) {
            assert!((a - b).abs() <= 1e-6 * b.abs());
        }
    }
}

fn neighbour(stored: &[i32], axis: usize, sign: i32) -> Vec<i32> {
    let d = stored.len() as i32;
    stored
        .iter()
        .enumerate()
        .map(|(i, &s)| s + sign * if i == axis { -d } else { 1 })
        .collect()
}

#[test]
fn blur_keeps_constant_interior_fixed() {
    for d in [1, 2, 3] {
        let radius = d + 4;
        let mut depth: BTreeMap<Vec<i32>, usize> = BTreeMap::new();
        let mut queue = VecDeque::from([(vec![0i32; d], 0usize)]);
        depth.insert(vec![0; d], 0);
        while let Some((key, dist)) = queue.pop_front() {
            if dist == radius {
                continue;
            }
            for axis in 0..=d {
                for sign in [1, -1] {
                    let next = neighbour(&key, axis, sign);
                    if !depth.contains_key(&next) {
                        depth.insert(next.clone(), dist + 1);
                        queue.push_back((next, dist + 1));
                    }
                }
            }
        }
        let mut grid = LatticeGrid::new(d, 2).unwrap();
        for key in depth.keys() {
            grid.insert(LatticeKey::from_stored(key), &[3.5, -1.25]).unwrap();
        }
        let out = blur(&grid).unwrap();
        let mut interior = 0;
        for (key, dist) in &depth {
            if dist + d < radius {
                interior += 1;
                let v = out.get(&LatticeKey::from_stored(key)).unwrap();
                assert!((v[0] - 3.5).abs() < 1e-9 && (v[1] + 1.25).abs() < 1e-9, "d={d} key={key:?}");
            }
        }
        assert!(interior > 0);
    }
}

#[test]
fn blur_commutes_with_scaling() {
    let points = elevated_points(3, &[0.3, 1.1, -2.0, 0.4, 5.0, 5.5, 4.0, 3.3]);
    let grid = splat(3, 2, &points, &[1.0, 2.0, -0.5, 0.25]).unwrap();
    let a = blur(&grid.scaled(7.0)).unwrap();
    let b = blur(&grid).unwrap().scaled(7.0);
    assert!(grids_close(&a, &b, 1e-12));
}
