use csvortex_core::diagnostics::{decay_fit, flux, FluxSource};
use csvortex_core::model::F_MIN;
use csvortex_core::radial::*;
use std::f64::consts::PI;

// Reference values from tools/oracles/radial_oracle.py (SciPy DOP853, rtol 1e-13).
const A0_N1_L1: f64 = -4.1297751691628015;
const A0_N1_L12: f64 = -1.6448685193749224;
const A0_N2_L1: f64 = -9.496743206303925;
const BETA_N1_L1_D1: f64 = 7.543056835900277;
const BETA_N1_L1_D5: f64 = 6.1224464519236985;
const BETA_N1_L1_D30: f64 = 6.000000430941542;
const BETA_N1_L12_D05: f64 = 8.761672634708704;

fn opts() -> ShootingOptions {
    ShootingOptions::default()
}

#[test]
fn topological_parameter_matches_reference() {
    for (n, lam, want) in [(1, 1.0, A0_N1_L1), (1, 12.0, A0_N1_L12), (2, 1.0, A0_N2_L1)] {
        let a0 = find_a0(n, lam, &opts()).unwrap();
        assert!((a0 - want).abs() < 1e-9, "N={n} lambda={lam}: {a0} vs {want}");
    }
}

#[test]
fn topological_parameter_inside_bracket() {
    let a0 = find_a0(1, 1.0, &opts()).unwrap();
    assert!(a0 > negative_threshold(1, 1.0) && a0 < positive_threshold(1.0));
    assert_eq!(positive_threshold(1.0), -F_MIN / 4.0);
    // the bracket without the 2N·T term is too narrow: a₀ lies below −b − 2 − 2N
    assert!(a0 < -(-F_MIN / 4.0) - 4.0);
}

#[test]
fn bracket_straddles_a0() {
    let sol = solve_topological(1, 1.0, &opts()).unwrap();
    assert!(sol.a_upper - sol.a_lower <= 2e-12);
    let up = classify(1, 1.0, sol.a_upper, &opts()).unwrap();
    let lo = classify(1, 1.0, sol.a_lower, &opts()).unwrap();
    assert_eq!(up.tag, ClassTag::Positive);
    assert_eq!(lo.tag, ClassTag::Negative);
}

#[test]
fn topological_flux_is_quantized() {
    for (n, lam) in [(1, 1.0), (1, 12.0), (2, 1.0), (3, 2.0)] {
        let sol = solve_topological(n, lam, &opts()).unwrap();
        let phi = flux(FluxSource::Radial(&sol.profile), lam);
        let want = 2.0 * PI * n as f64;
        assert!((phi - want).abs() / want < 1e-6, "N={n} lambda={lam}: {phi}");
    }
}

#[test]
fn topological_profile_is_negative_and_increasing() {
    let sol = solve_topological(1, 12.0, &opts()).unwrap();
    let p = &sol.profile;
    assert!(p.u.iter().all(|&u| u < 0.0));
    assert!(p.up.iter().all(|&up| up > 0.0));
    assert!(p.u.last().unwrap().abs() < 1e-2);
}

#[test]
fn far_negative_parameter_is_negative() {
    let c = classify(1, 1.0, -1e3, &opts()).unwrap();
    assert_eq!(c.tag, ClassTag::Negative);
}

#[test]
fn picard_start_within_tail_bound() {
    let mut o = opts();
    o.t_start = Some(-12.0);
    o.picard = true;
    let p = ShootingParams::new(1, 1.0, -3.0, o);
    let y = init_condition(&p).unwrap();
    let bound = (-F_MIN) * (-24.0f64).exp() / 4.0;
    assert!((y[0] - (2.0 * -12.0 - 3.0)).abs() <= bound);
}

#[test]
fn beta_matches_reference() {
    let a0 = find_a0(1, 1.0, &opts()).unwrap();
    for (d, want) in [(1.0, BETA_N1_L1_D1), (5.0, BETA_N1_L1_D5), (30.0, BETA_N1_L1_D30)] {
        let (_, b) = beta_of(1, 1.0, a0 - d, &opts()).unwrap();
        assert!((b - want).abs() < 1e-8, "d={d}: {b} vs {want}");
    }
    let a0 = find_a0(1, 12.0, &opts()).unwrap();
    let (_, b) = beta_of(1, 12.0, a0 - 0.5, &opts()).unwrap();
    assert!((b - BETA_N1_L12_D05).abs() < 1e-8);
}

#[test]
fn beta_far_below_a0_approaches_lower_limit() {
    let a0 = find_a0(1, 1.0, &opts()).unwrap();
    let (_, b) = beta_of(1, 1.0, a0 - 30.0, &opts()).unwrap();
    assert!(b > 6.0 && b < 6.0 * 1.03);
}

#[test]
fn identities_hold_and_shrink_with_tolerance() {
    let a0 = find_a0(1, 1.0, &opts()).unwrap();
    let (p, b) = beta_of(1, 1.0, a0 - 5.0, &opts()).unwrap();
    let (r1, r2) = check_identities(&p, b);
    assert!(r1 < 1e-3 && r2 < 1e-3);
    let mut worst = Vec::new();
    for tol in [1e-6, 1e-8, 1e-10] {
        let mut o = opts();
        o.abs_tol = tol;
        o.rel_tol = tol;
        let (p, b) = beta_of(1, 1.0, a0 - 5.0, &o).unwrap();
        let (r1, r2) = check_identities(&p, b);
        worst.push(r1.max(r2));
    }
    assert!(worst[0] > worst[2], "{worst:?}");
    assert!(worst[2] < 1e-6, "{worst:?}");
}

#[test]
fn inverse_beta_problem() {
    let s = find_a_for_beta(1, 1.0, 10.0, &opts()).unwrap();
    assert!(s.a < s.a0);
    assert!((s.beta - 10.0).abs() < 1e-5);
    let (_, b) = beta_of(1, 1.0, s.a, &opts()).unwrap();
    assert!((b - 10.0).abs() < 1e-5);
    assert_eq!(s.sign_changes, 1);
}

#[test]
fn inverse_beta_rejects_range() {
    assert!(matches!(
        find_a_for_beta(1, 1.0, 6.0, &opts()),
        Err(RadialError::OutOfRange { .. })
    ));
    assert!(matches!(
        find_a_for_beta(1, 1.0, 1e6, &opts()),
        Err(RadialError::NoBracket { .. })
    ));
}

#[test]
fn nontopological_flux_and_decay() {
    let a0 = find_a0(1, 12.0, &opts()).unwrap();
    for d in [0.5, 2.0, 10.0] {
        let (p, b) = beta_of(1, 12.0, a0 - d, &opts()).unwrap();
        let phi = flux(FluxSource::Radial(&p), 12.0);
        assert!((phi - PI * (2.0 + b)).abs() / phi < 1e-3);
        let fit = decay_fit(&p).unwrap();
        assert!((fit - b).abs() / b < 1e-3);
        // |Dφ|² decays like r^{−(2+β)}
        let ph = to_physical(&p);
        let i = p.tail_start.unwrap();
        let m = ph.r.len() - 1;
        let k = i + (m - i) / 2;
        let slope = (ph.dphi_sq[m].ln() - ph.dphi_sq[k].ln()) / (p.t[m] - p.t[k]);
        assert!((slope + 2.0 + b).abs() / (2.0 + b) < 0.02);
    }
}

#[test]
fn physical_profile_shapes() {
    let sol = solve_topological(1, 12.0, &opts()).unwrap();
    let ph = to_physical(&sol.profile);
    assert!(ph.phisq.iter().all(|&s| s > 0.0 && s < 1.0));
    assert!(ph.f12.iter().all(|&f| f >= 0.0));
    assert!(ph.energy_density.iter().all(|&e| e >= 0.0 && e.is_finite()));
    assert!(ph.r.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn integration_defect_is_at_tolerance_scale() {
    let a0 = find_a0(1, 1.0, &opts()).unwrap();
    let (p, _) = beta_of(1, 1.0, a0 - 2.0, &opts()).unwrap();
    assert!(p.ode_residual() < 10.0);
}

#[test]
fn scaling_in_coupling() {
    // λ = e^{2s} is a shift of t by s, so a₀(λ) = a₀(1) + N ln λ and β depends on a − a₀ only
    let a1 = find_a0(2, 1.0, &opts()).unwrap();
    let a5 = find_a0(2, 5.0, &opts()).unwrap();
    assert!((a5 - (a1 + 2.0 * 5f64.ln())).abs() < 1e-9);
    let (_, b1) = beta_of(2, 1.0, a1 - 3.0, &opts()).unwrap();
    let (_, b5) = beta_of(2, 5.0, a5 - 3.0, &opts()).unwrap();
    assert!((b1 - b5).abs() < 1e-8);
}

#[test]
fn zero_winding_nontopological() {
    // N = 0: every a < 0 decays, β > 4
    let (_, b) = beta_of(0, 1.0, -2.0, &opts()).unwrap();
    assert!(b > 4.0);
}

#[test]
fn negative_runs_are_concave() {
    let a0 = find_a0(1, 12.0, &opts()).unwrap();
    for d in [0.5, 5.0, 25.0] {
        let (p, _) = beta_of(1, 12.0, a0 - d, &opts()).unwrap();
        assert_eq!(p.classification.tag, ClassTag::Negative);
        assert!(p.u.iter().all(|&u| u < 0.0));
        // u″ = −λe^{2t+u}(1 − e^u)^5 < 0, so u′ decreases between stored nodes
        assert!(p.up.windows(2).all(|w| w[1] < w[0] + 1e-10));
        assert!(p.t.iter().zip(&p.u).all(|(&t, &u)| forcing(12.0, t, u) >= 0.0));
    }
}

#[test]
fn separatrix_run_bounds() {
    // the full lower-bracket run, before the cut to the part both bracket runs agree on
    for lam in [1.0, 12.0] {
        let sol = solve_topological(1, lam, &opts()).unwrap();
        let mut o = opts();
        o.run_to_tail = false;
        let (p, c) = integrate(&ShootingParams::new(1, lam, sol.a_lower, o)).unwrap();
        assert_eq!(c.tag, ClassTag::Negative);
        assert!(p.u.iter().all(|&u| u <= 1e-6));
        assert!(p.up.iter().all(|&up| up >= -1e-6));
        let last = *p.u.last().unwrap();
        assert!(last > -1e-3 && last <= 1e-6, "lambda={lam}: {last}");
    }
}

#[test]
fn trajectories_ordered_in_a() {
    let a0 = find_a0(1, 1.0, &opts()).unwrap();
    let (lo, _) = beta_of(1, 1.0, a0 - 3.0, &opts()).unwrap();
    let (hi, _) = beta_of(1, 1.0, a0 - 1.0, &opts()).unwrap();
    let end = lo.classification.event_time.min(hi.classification.event_time);
    let m = 400;
    for k in 0..=m {
        let t = lo.t_first().max(hi.t_first()) + (end - lo.t_first().max(hi.t_first())) * k as f64 / m as f64;
        assert!(lo.eval(t)[0] < hi.eval(t)[0], "t={t}");
    }
}

#[test]
fn beta_gap_decreases_away_from_a0() {
    // strict monotonicity along a₀ − 5k is a regression property of this solver;
    // only the limit 2N + 4 is proven
    let a0 = find_a0(1, 12.0, &opts()).unwrap();
    let gaps: Vec<f64> = (1..=5)
        .map(|k| beta_of(1, 12.0, a0 - 5.0 * k as f64, &opts()).unwrap().1 - 6.0)
        .collect();
    assert!(gaps.iter().all(|&g| g > 0.0));
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    let (_, near) = beta_of(1, 12.0, a0 - 0.5, &opts()).unwrap();
    assert!(near > gaps[0] + 6.0);
}
