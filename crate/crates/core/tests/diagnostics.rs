use csvortex_core::diagnostics::*;
use csvortex_core::model::VortexSet;
use csvortex_core::plane::{monotone_iterate_plane, PlaneOptions, SquareDomain};
use csvortex_core::torus::{monotone_iterate, SolverOptions, TorusGrid};
use std::f64::consts::PI;

struct Case {
    geometry: GridGeometry,
    u: Vec<f64>,
    vortices: VortexSet,
    lambda: f64,
    centre: usize,
}

fn torus_case() -> Case {
    let g = TorusGrid::new(2.0 * PI, 2.0 * PI, 128, 128).unwrap();
    let vortices = VortexSet::single(PI, PI, 1).unwrap();
    let opts = SolverOptions {
        k_factor: 0.08,
        max_iter: 20000,
        ..SolverOptions::default()
    };
    let out = monotone_iterate(&g, &vortices, 9.5, &opts).unwrap();
    assert!(out.converged());
    Case {
        geometry: GridGeometry {
            nx: g.nx,
            ny: g.ny,
            x0: 0.0,
            y0: 0.0,
            hx: g.hx(),
            hy: g.hy(),
            periodic: true,
        },
        u: out.u().values,
        vortices,
        lambda: 9.5,
        centre: 64,
    }
}

fn plane_case() -> Case {
    let d = SquareDomain::new(10.0, 127).unwrap();
    let vortices = VortexSet::single(0.0, 0.0, 1).unwrap();
    let out = monotone_iterate_plane(&d, &vortices, 12.0, &PlaneOptions::default()).unwrap();
    assert!(out.converged);
    Case {
        geometry: GridGeometry {
            nx: d.n,
            ny: d.n,
            x0: d.coord(0),
            y0: d.coord(0),
            hx: d.h(),
            hy: d.h(),
            periodic: false,
        },
        u: out.u(),
        vortices,
        lambda: 12.0,
        centre: 63,
    }
}

/// Square loops of half-width `k` cells; below about 8 cells the enclosed flux is
/// comparable to the difference error at the log core.
fn check_stokes(case: &Case, half_widths: &[usize]) {
    let hg = reconstruct_higgs_gauge(case.geometry, &case.u, &case.vortices).unwrap();
    let c = case.centre;
    for &k in half_widths {
        let (i0, i1) = (c - k, c + k);
        let lhs = hg.loop_integral(i0, i1, i0, i1);
        let rhs = enclosed_flux(&case.geometry, &case.u, case.lambda, i0, i1, i0, i1);
        assert!((lhs - rhs).abs() / rhs < 0.02, "k={k}: {lhs} vs {rhs}");
    }
}

#[test]
fn stokes_on_the_torus() {
    check_stokes(&torus_case(), &[16, 32, 48, 60]);
}

#[test]
fn stokes_on_the_plane() {
    check_stokes(&plane_case(), &[16, 32, 48, 60]);
}

#[test]
fn curvature_matches_flux_density() {
    for case in [torus_case(), plane_case()] {
        let gap = curvature_probe(&case.geometry, &case.u, &case.vortices, case.lambda);
        assert!(gap < 0.05, "{gap}");
    }
}

#[test]
fn higgs_field_bounded_and_vanishing_at_vortex() {
    let case = plane_case();
    let hg = reconstruct_higgs_gauge(case.geometry, &case.u, &case.vortices).unwrap();
    assert!(hg.phi_abs.iter().all(|&p| (0.0..=1.0).contains(&p)));
    let c = case.centre * case.geometry.nx + case.centre;
    assert_eq!(hg.phi_abs[c], 0.0);
    assert!(hg.masked.contains(&c));
    assert!(hg.masked.len() <= 9);
    for &p in &hg.masked {
        assert_eq!((hg.a1[p], hg.a2[p]), (0.0, 0.0));
    }
}

#[test]
fn phase_gradient_winds() {
    // ∮∇θ around a circle is 2πN
    let vs = VortexSet::single(0.3, -0.2, 2).unwrap();
    let m = 2000;
    let mut total = 0.0;
    for k in 0..m {
        let s = 2.0 * PI * (k as f64 + 0.5) / m as f64;
        let (x, y) = (0.3 + s.cos(), -0.2 + s.sin());
        let (gx, gy) = phase_gradient(x, y, &vs);
        total += (-gx * s.sin() + gy * s.cos()) * 2.0 * PI / m as f64;
    }
    assert!((total - 4.0 * PI).abs() < 1e-9);
}

#[test]
fn shape_mismatch_rejected() {
    let g = GridGeometry {
        nx: 4,
        ny: 4,
        x0: 0.0,
        y0: 0.0,
        hx: 1.0,
        hy: 1.0,
        periodic: true,
    };
    assert!(matches!(
        reconstruct_higgs_gauge(g, &[0.0; 15], &VortexSet::empty()),
        Err(DiagnosticsError::ShapeMismatch { len: 15, .. })
    ));
}

#[test]
fn energy_and_charge_follow_flux() {
    let (e, q) = energy_and_charge(2.0 * PI, 1.5);
    assert_eq!(e, 2.0 * PI);
    assert_eq!(q, 3.0 * PI);
}

#[test]
fn decay_fit_on_exact_line() {
    let t: Vec<f64> = (0..10).map(|k| 5.0 + k as f64).collect();
    let u: Vec<f64> = t.iter().map(|t| -7.25 * t + 3.0).collect();
    assert!((decay_fit_samples(&t, &u).unwrap() - 7.25).abs() < 1e-12);
    assert!(matches!(
        decay_fit_samples(&t[..3], &u[..3]),
        Err(DiagnosticsError::WindowTooShort { points: 3, needed: 4 })
    ));
}

#[test]
fn grid_flux_matches_plane_quadrature() {
    let case = plane_case();
    let h = case.geometry.hx;
    let f = flux(FluxSource::Grid { u: &case.u, h }, case.lambda);
    assert!(f > 0.0 && f < 2.0 * PI);
    let n = case.geometry.nx;
    let enclosed = enclosed_flux(&case.geometry, &case.u, case.lambda, 0, n - 1, 0, n - 1);
    assert!((f - enclosed).abs() / f < 1e-3);
}
