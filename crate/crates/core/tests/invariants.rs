use std::f64::consts::PI;

use billiard_core::analytic::{rectangle_pressures, RectangleState};
use billiard_core::classical::{evolve, Billiard, NATURAL_MASS};
use billiard_core::dynamics::{diagonal_pressure, expand, pressure_at, pressure_timeseries};
use billiard_core::geometry::sample_boundary;
use billiard_core::thermo::{mrd, pressure_matrix, pressure_mean, pressure_p2, PressureReport};
use billiard_core::{Shape, Vec2};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn shapes() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (0.3f64..3.0).prop_map(|r| Shape::circle(r).unwrap()),
        (0.3f64..3.0, 0.3f64..3.0).prop_map(|(a, b)| Shape::rectangle(a, b).unwrap()),
        (0.1f64..2.0, 0.3f64..2.0).prop_map(|(l, r)| Shape::stadium_quarter(l, r).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quadrature_recovers_perimeter_and_twice_the_area(shape in shapes()) {
        let s = sample_boundary(&shape, 400.0).unwrap();
        let len: f64 = s.iter().map(|x| x.weight).sum();
        let rn: f64 = s.iter().map(|x| x.weight * x.r_n).sum();
        prop_assert!((len / shape.perimeter() - 1.0).abs() < 1e-12);
        prop_assert!((rn / (2.0 * shape.area()) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rectangle_p2_is_the_energy(nx in 1u32..40, ny in 1u32..40, lx in 0.3f64..3.0, ly in 0.3f64..3.0) {
        let st = RectangleState::new(nx, ny, lx, ly).unwrap();
        let p = rectangle_pressures(&st);
        prop_assert!((p.p2 * lx * ly / st.energy - 1.0).abs() < 1e-12);
        // the mean pressure interpolates the two wall pressures
        let lo = p.wall_vertical.min(p.wall_horizontal);
        let hi = p.wall_vertical.max(p.wall_horizontal);
        prop_assert!(p.mean >= lo * (1.0 - 1e-12) && p.mean <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn pressures_ignore_sign_and_scale_quadratically(nx in 1u32..8, ny in 1u32..8, a in 0.1f64..5.0) {
        let shape = Shape::rectangle(1.3, 0.9).unwrap();
        let s = sample_boundary(&shape, 300.0).unwrap();
        let f = RectangleState::new(nx, ny, 1.3, 0.9).unwrap().flux_on(&s);
        let g: Vec<f64> = f.iter().map(|x| -a * x).collect();
        prop_assert!((pressure_mean(&s, &g) / pressure_mean(&s, &f) - a * a).abs() < 1e-12 * a * a);
        prop_assert!((pressure_p2(&s, &g, shape.area()) / pressure_p2(&s, &f, shape.area()) - a * a).abs() < 1e-12 * a * a);
    }

    #[test]
    fn pressure_matrix_is_symmetric(states in prop::collection::vec((1u32..6, 1u32..6), 2..6)) {
        let shape = Shape::rectangle(1.0, 1.4).unwrap();
        let s = sample_boundary(&shape, 200.0).unwrap();
        let fl: Vec<Vec<f64>> = states.iter().map(|&(a, b)| RectangleState::new(a, b, 1.0, 1.4).unwrap().flux_on(&s)).collect();
        let refs: Vec<&[f64]> = fl.iter().map(|f| f.as_slice()).collect();
        let m = pressure_matrix(&s, &refs, shape.area());
        prop_assert!((&m.p - m.p.transpose()).amax() < 1e-12);
        for (i, f) in fl.iter().enumerate() {
            prop_assert!((m.p[(i, i)] - pressure_mean(&s, f)).abs() < 1e-12 * m.p[(i, i)].max(1.0));
        }
    }

    #[test]
    fn mrd_is_scale_free(devs in prop::collection::vec(-0.5f64..0.5, 1..30), scale in 0.1f64..100.0) {
        let pts: Vec<PressureReport> = devs.iter().enumerate()
            .map(|(i, d)| PressureReport::new(i.to_string(), scale * (1.0 + i as f64), scale * (1.0 + i as f64) * (1.0 + d), 0.0).unwrap())
            .collect();
        let want = (devs.iter().map(|d| d * d).sum::<f64>() / devs.len() as f64).sqrt();
        prop_assert!((mrd(&pts).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn evolved_pressure_is_real_and_lipschitz(
        re in prop::collection::vec(-1.0f64..1.0, 4),
        im in prop::collection::vec(-1.0f64..1.0, 4),
        t in 0.0f64..50.0,
    ) {
        let c: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let norm: f64 = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 0.1);
        let c: Vec<Complex64> = c.iter().map(|x| x / norm).collect();
        let e = vec![3.0, 5.5, 9.1, 14.2];
        let k = DMatrix::from_fn(4, 4, |i, j| 1.0 / (1.0 + (i as f64 - j as f64).abs()) + (i + j) as f64);
        let ex = expand(&c, &e, 3.0, 0.999, false).unwrap();
        let p = pressure_at(&ex, &k, t);
        prop_assert!(p.im.abs() < 1e-10);
        let dt = 1e-3;
        let s = pressure_timeseries(&ex, &k, &[t, t + dt]);
        let mut bound = 0.0;
        for j in 0..4 {
            for l in 0..4 {
                bound += ex.coeffs[j].norm() * ex.coeffs[l].norm() * (ex.energies[j] - ex.energies[l]).abs() * k[(j, l)].abs();
            }
        }
        prop_assert!((s[1] - s[0]).abs() <= bound * dt + 1e-12);
        // the diagonal value lies within the range of the kernel's diagonal
        let d = diagonal_pressure(&ex, &k);
        prop_assert!(d >= k[(0, 0)] - 1e-12 && d <= k[(3, 3)] + 1e-12);
        prop_assert!((ex.temperature_at(t) / ex.temperature() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classical_speed_and_contact(shape in shapes(), x in 0.05f64..0.95, y in 0.05f64..0.95, theta in 0.0f64..(2.0 * PI)) {
        let b = Billiard::mirror_completed(&shape);
        let (lo, hi) = b.bounding_box();
        let p = Vec2::new(lo.x + x * (hi.x - lo.x), lo.y + y * (hi.y - lo.y));
        prop_assume!(b.contains(p));
        let v = Vec2::new(theta.cos(), theta.sin()) * 3.0;
        let traj = evolve(&b, p, v, NATURAL_MASS, 2000).unwrap();
        prop_assert!((traj.velocity.norm() / 3.0 - 1.0).abs() < 1e-12);
        for c in &traj.collisions {
            let q = b.pieces[c.wall_id].project(c.point);
            prop_assert!((q - c.point).norm() < 1e-9);
            prop_assert!(c.pn <= NATURAL_MASS * 3.0 * (1.0 + 1e-12));
        }
        prop_assert!(traj.collisions.windows(2).all(|w| w[1].t > w[0].t));
    }
}
