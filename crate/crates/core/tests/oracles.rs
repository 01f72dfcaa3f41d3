//! Cross-module checks against independent reference values.

use std::f64::consts::PI;

use billiard_core::analytic::rectangle_lowest;
use billiard_core::dynamics::{coherent_state, evolve_coherent, project, DynamicsSettings};
use billiard_core::helmholtz::{boundary_flux, solve, FluxMethod, SolverSettings};
use billiard_core::specfun::bessel_zeros;
use billiard_core::thermo::{local_temperature, pressure_mean_complex, LocalTempConvention};
use billiard_core::{CoherentStateSpec, Shape, Vec2};
use num_complex::Complex64;

#[test]
fn numeric_rectangle_spectrum() {
    let (lx, ly) = (1.0 + PI / 4.0, 1.0);
    let shape = Shape::rectangle(lx, ly).unwrap();
    let basis = solve(&shape, &SolverSettings::lowest(1.0 / 64.0, 20)).unwrap();
    let exact = rectangle_lowest(lx, ly, 20).unwrap();
    for (num, ex) in basis.states.iter().zip(&exact) {
        assert!(
            (num.energy / ex.energy - 1.0).abs() < 5e-3,
            "{} vs {}",
            num.energy,
            ex.energy
        );
        assert!(num.rellich_dev < 1e-2);
    }
}

#[test]
fn numeric_circle_spectrum_and_local_temperature() {
    let shape = Shape::circle(1.0).unwrap();
    let basis = solve(&shape, &SolverSettings::lowest(1.0 / 64.0, 10)).unwrap();
    let mut exact: Vec<f64> = Vec::new();
    for j in 0..6u32 {
        for z in bessel_zeros(j, 4).unwrap() {
            let e = z.value * z.value;
            exact.push(e);
            if j > 0 {
                exact.push(e);
            }
        }
    }
    exact.sort_by(f64::total_cmp);
    for (s, e) in basis.states.iter().zip(&exact) {
        assert!((s.energy / e - 1.0).abs() < 5e-3);
    }
    for s in basis.states.iter().take(5) {
        let g = local_temperature(&basis.grid, &s.field, LocalTempConvention::Gradient);
        assert!(g.values.iter().all(|&v| v >= 0.0));
        assert!((g.integral() / s.energy - 1.0).abs() < 1e-6);
        let l = local_temperature(&basis.grid, &s.field, LocalTempConvention::Laplacian);
        assert!((l.integral() / s.energy - 1.0).abs() < 1e-6);
    }
}

#[test]
fn stadium_coherent_state_initial_pressure() {
    let shape = Shape::stadium_quarter(1.0, 1.0).unwrap();
    let basis = solve(&shape, &SolverSettings::below(1.0 / 80.0, 800.0)).unwrap();
    let spec = CoherentStateSpec::new(Vec2::new(1.3, 0.5), Vec2::new(6.0, 2.0), 0.11).unwrap();
    let field = coherent_state(&spec, &basis.grid).unwrap();
    let coeffs = project(&basis, &field.values);
    let settings = DynamicsSettings {
        threshold: 0.999,
        horizon_tau: 120.0,
        ..Default::default()
    };
    let run = evolve_coherent(
        &basis,
        &coeffs,
        field.discarded_mass,
        &spec,
        spec.tau(&shape).unwrap(),
        &settings,
    )
    .unwrap();
    assert!(run.kbt_drift < 1e-12);
    // the expansion's t = 0 pressure against the flux of the raw field
    let (re, _) = boundary_flux(
        &basis.grid,
        &field.values.iter().map(|c| c.re).collect::<Vec<_>>(),
        &basis.samples,
        FluxMethod::default(),
    );
    let (im, _) = boundary_flux(
        &basis.grid,
        &field.values.iter().map(|c| c.im).collect::<Vec<_>>(),
        &basis.samples,
        FluxMethod::default(),
    );
    let raw: Vec<Complex64> = re
        .iter()
        .zip(&im)
        .map(|(a, b)| Complex64::new(*a, *b))
        .collect();
    let ps0 = pressure_mean_complex(&basis.samples, &raw) * shape.area();
    // the packet starts away from the walls, so both are small against kBT
    assert!(
        (run.ps[0] - ps0).abs() < 0.01 * run.kbt,
        "{} vs {}",
        run.ps[0],
        ps0
    );
    assert!(((run.p2s_diag / run.kbt) - 1.0).abs() < 0.05);
}
