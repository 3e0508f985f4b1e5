use csvortex_core::model::VortexSet;
use csvortex_core::plane::*;
use std::f64::consts::PI;

fn origin() -> VortexSet {
    VortexSet::single(0.0, 0.0, 1).unwrap()
}

#[test]
fn dirichlet_solve_second_order() {
    // w = sin(x) e^{y/2} with nonzero boundary data, (Δ − K)w = (−1 + 1/4 − K) w
    let k = 0.7;
    let w = |x: f64, y: f64| x.sin() * (0.5 * y).exp();
    let mut errs = Vec::new();
    for n in [15usize, 31, 63] {
        let d = SquareDomain::new(2.0, n).unwrap();
        let rhs: Vec<f64> = d.interior_points().iter().map(|&(x, y)| (-0.75 - k) * w(x, y)).collect();
        let sol = dirichlet_helmholtz_solve(&d, k, &rhs, |i, j| w(d.coord(i), d.coord(j)));
        let err = d
            .interior_points()
            .iter()
            .zip(&sol.values)
            .map(|(&(x, y), v)| (v - w(x, y)).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    for p in errs.windows(2) {
        let ratio = p[0] / p[1];
        assert!(ratio > 3.5 && ratio < 4.5, "{errs:?}");
    }
}

#[test]
fn dirichlet_solve_exact_on_biquadratic() {
    let r: f64 = 3.0;
    let d = SquareDomain::new(r, 47).unwrap();
    let w = |x: f64, y: f64| (r * r - x * x) * (r * r - y * y);
    let rhs: Vec<f64> = d
        .interior_points()
        .iter()
        .map(|&(x, y)| -2.0 * (r * r - y * y) - 2.0 * (r * r - x * x))
        .collect();
    let sol = dirichlet_helmholtz_solve(&d, 0.0, &rhs, |_, _| 0.0);
    let err = d
        .interior_points()
        .iter()
        .zip(&sol.values)
        .map(|(&(x, y), v)| (v - w(x, y)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-9 * r.powi(4), "{err}");
}

#[test]
fn dirichlet_solve_trivial_and_eigenmode() {
    let d = SquareDomain::new(4.0, 31).unwrap();
    let zero = dirichlet_helmholtz_solve(&d, 1.3, &vec![0.0; d.len()], |_, _| 0.0);
    assert!(zero.values.iter().all(|&x| x == 0.0));
    // sin(π(x+R)/2R) sin(π(y+R)/2R) is an eigenvector of Δ_h with eigenvalue 2·(−4/h²) sin²(πh/4R)
    let (r, h, k) = (d.r, d.h(), 0.9);
    let mu = -8.0 / (h * h) * (PI * h / (4.0 * r)).sin().powi(2);
    let mode: Vec<f64> = d
        .interior_points()
        .iter()
        .map(|&(x, y)| (PI * (x + r) / (2.0 * r)).sin() * (PI * (y + r) / (2.0 * r)).sin())
        .collect();
    let rhs: Vec<f64> = mode.iter().map(|m| (mu - k) * m).collect();
    let sol = dirichlet_helmholtz_solve(&d, k, &rhs, |_, _| 0.0);
    let err = sol.values.iter().zip(&mode).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn no_vortices_is_trivial() {
    let d = SquareDomain::new(5.0, 31).unwrap();
    let out = monotone_iterate_plane(&d, &VortexSet::empty(), 1.0, &PlaneOptions::default()).unwrap();
    assert!(out.converged);
    assert!(out.u().iter().all(|&x| x == 0.0));
}

#[test]
fn source_integrates_to_quantized_charge() {
    for r in [5.0, 10.0, 20.0] {
        let d = SquareDomain::new(r, 399).unwrap();
        let h = d.h();
        let total: f64 = source_g_plane(&d.interior_points(), &origin()).iter().sum::<f64>() * h * h;
        let deficit = 4.0 * PI - total;
        // the square contains the disc of radius R, outside of which ∫g = 4π/(1 + R²)
        assert!(deficit > 0.0 && deficit < 4.0 * PI / (1.0 + r * r) + 1e-4, "R={r}: {deficit}");
    }
}

#[test]
fn background_is_negative_with_log_core() {
    let pts = [(0.5, 0.0), (3.0, 4.0), (1e-3, 0.0)];
    let u0 = background_u0_plane(&pts, &origin(), 1e-8);
    assert!(u0.iter().all(|&x| x < 0.0));
    // −ln(1 + r⁻²) = 2 ln r − ln(1 + r²)
    for (&(x, y), u) in pts.iter().zip(&u0) {
        let r2: f64 = x * x + y * y;
        assert!((u - r2.ln() + r2.ln_1p()).abs() < 1e-12);
    }
}

#[test]
fn single_domain_solution() {
    let d = SquareDomain::new(20.0, 255).unwrap();
    let out = monotone_iterate_plane(&d, &origin(), 1.0, &PlaneOptions::default()).unwrap();
    assert!(out.converged);
    assert!(out.max_increment <= 1e-13);
    let u = out.u();
    assert!(u.iter().all(|&x| x < 0.0));
    let n = d.n;
    let band = (0..d.len())
        .filter(|p| p % n == 0 || p / n == 0 || p % n == n - 1 || p / n == n - 1)
        .map(|p| u[p])
        .fold(f64::INFINITY, f64::min);
    assert!(band > -1e-2, "{band}");
    // the super-solution bounds the iterates from above
    for (v, u0) in out.v.values.iter().zip(&out.u0) {
        assert!(*v <= -u0 + 1e-12);
    }
}

#[test]
fn exhausting_domains_decrease() {
    let sol = solve_topological_plane(&origin(), 1.0, &[10.0, 15.0, 20.0], 127, &PlaneOptions::default()).unwrap();
    assert_eq!(sol.stages.len(), 3);
    let h = sol.stages[2].domain.h();
    for s in &sol.stages {
        assert!(s.converged);
        assert!((s.domain.h() - h).abs() < 1e-12);
    }
    for s in &sol.stages[1..] {
        assert!(s.rise_over_previous.unwrap() < 1e-7, "{:?}", s.rise_over_previous);
    }
    for w in sol.stages.windows(2) {
        assert!(w[1].flux > w[0].flux);
        assert!(w[1].flux < 2.0 * PI);
    }
    assert!(sol.cauchy_gap.unwrap() > 0.0);
    for w in sol.stages.windows(2) {
        assert!(w[1].boundary_band < 3.0 * w[0].boundary_band);
    }
}

#[test]
fn matches_radial_profile_on_the_axis() {
    use csvortex_core::radial::{solve_topological, ShootingOptions};
    let lam = 12.0;
    let sol = solve_topological_plane(&origin(), lam, &[20.0], 511, &PlaneOptions::default()).unwrap();
    let radial = solve_topological(1, lam, &ShootingOptions::default()).unwrap();
    let d = sol.outcome.v.domain;
    let u = sol.outcome.u();
    let j = d.n / 2;
    assert!(d.coord(j as isize).abs() < 1e-12);
    let mut checked = 0;
    for i in j..d.n {
        let x = d.coord(i as isize);
        if !(0.5..=5.0).contains(&x) || x.ln() > radial.profile.t_last() {
            continue;
        }
        let plane = u[j * d.n + i].exp();
        let line = radial.profile.eval(x.ln())[0].exp();
        assert!((plane - line).abs() / line < 0.01, "r={x}: {plane} vs {line}");
        checked += 1;
    }
    assert!(checked > 10);
}

#[test]
fn schedule_keeps_spacing_and_parity() {
    let ds = schedule_domains(&[5.0, 10.0, 20.0], 255).unwrap();
    let h = ds[2].h();
    for d in &ds {
        assert!((d.h() - h).abs() < 1e-12);
        assert_eq!(d.n % 2, 1);
        assert!(d.r >= 0.0);
    }
    assert!(matches!(schedule_domains(&[10.0, 5.0], 63), Err(PlaneError::BadSchedule)));
}

#[test]
fn maximal_solution_attracts_lower_starts() {
    let d = SquareDomain::new(10.0, 63).unwrap();
    let opts = PlaneOptions::default();
    let out = monotone_iterate_plane(&d, &origin(), 1.0, &opts).unwrap();
    let gap = maximality_probe(&origin(), 1.0, &out, 1.0, &opts).unwrap();
    assert!(gap < 1e-6, "{gap}");
}

#[test]
fn shallow_subsolution_sandwich() {
    let lam = 1.0;
    let a = 1.0;
    let opts = PlaneOptions::default();
    for n in [63usize, 127] {
        let d = SquareDomain::new(10.0, n).unwrap();
        let s = shallow_subsolution(&d, &origin(), lam, a, &opts).unwrap();
        let h = d.h();
        assert!(s.min_slack >= -10.0 * h * h);
        assert!(s.u_shallow.iter().all(|&x| x < 0.0));
        // e^{u_* − a} − 1 stays below e^{−a} − 1
        assert!(s.u_shallow.iter().all(|&x| (x - a).exp_m1() < (-a).exp_m1()));
        let out = monotone_iterate_plane(&d, &origin(), lam, &opts).unwrap();
        for p in 0..d.len() {
            assert!(s.v[p] <= out.v.values[p] + 1e-6, "below at {p}");
            assert!(out.v.values[p] <= -out.u0[p] + 1e-12);
        }
        // near the boundary v_* ≈ −a
        assert!((s.v[0] + a).abs() < 0.05, "{}", s.v[0]);
    }
}

#[test]
fn rejects_bad_inputs() {
    assert!(SquareDomain::new(-1.0, 31).is_err());
    let d = SquareDomain::new(2.0, 31).unwrap();
    let far = VortexSet::single(5.0, 0.0, 1).unwrap();
    assert!(matches!(PlaneProblem::new(d, &far), Err(PlaneError::VortexOutside(0))));
    let opts = PlaneOptions {
        k_factor: 0.01,
        ..PlaneOptions::default()
    };
    assert!(matches!(
        monotone_iterate_plane(&d, &origin(), 1.0, &opts),
        Err(PlaneError::InvalidOptions(_))
    ));
    assert!(matches!(
        shallow_subsolution(&d, &origin(), 1.0, 0.0, &PlaneOptions::default()),
        Err(PlaneError::BadShift(_))
    ));
}

#[test]
#[ignore = "fails: the u⁵ tail decays like r^(-1/2), leaving about 9% of the flux outside R = 20"]
fn flux_within_one_percent() {
    let sol = solve_topological_plane(&origin(), 12.0, &[10.0, 20.0], 511, &PlaneOptions::default()).unwrap();
    let flux = sol.stages.last().unwrap().flux;
    assert!((flux - 2.0 * PI).abs() / (2.0 * PI) < 0.01, "{flux}");
}
