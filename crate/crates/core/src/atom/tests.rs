use super::*;
use crate::composite::fit_sinusoid;
use proptest::prelude::*;

fn linf(a: &[f64], b: impl Iterator<Item = f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn ground_one_photon(p: &AtomFieldParams) -> StateVector {
    p.basis_state(0, 1).unwrap()
}

#[test]
fn linear_hamiltonian_couples_pairs_only() {
    let p = AtomFieldParams::resonant_sigma3(1.0, 0.7, 0.0);
    let h = p.linear_hamiltonian();
    let (up, down) = (p.index(1, 1), p.index(0, 2));
    assert!((h[(up, down)] - C64::new(0.0, 0.35 * 2f64.sqrt())).norm() < 1e-15);
    assert!((h[(down, up)] - h[(up, down)].conj()).norm() < 1e-15);
    assert_eq!(h[(p.index(0, 1), p.index(0, 2))], C64::new(0.0, 0.0));
    assert!((h[(p.index(1, 3), p.index(1, 3))].re - 4.0).abs() < 1e-15);
}

#[test]
fn derived_constants() {
    let p = AtomFieldParams::new(vec![0.0, 1.3], vec![-0.2, 0.5], 1.0, C64::new(0.6, 0.8), 3).unwrap();
    assert!((p.eps0() - 0.7).abs() < 1e-15);
    assert!((p.delta() - 0.3).abs() < 1e-15);
    assert!((p.delta_prime() - (0.3 + 0.25 - 0.04)).abs() < 1e-15);
    assert!((p.inversion_eps() - 0.98).abs() < 1e-15);
    assert!((p.varsigma() - 0.245).abs() < 1e-15);
    assert!((p.rabi(1.5) - 2f64.sqrt()).abs() < 1e-15);
    assert!(AtomFieldParams::new(vec![0.0], vec![0.0], 1.0, C64::new(1.0, 0.0), 3).is_err());
    assert!(AtomFieldParams::new(vec![0.0, 1.0], vec![0.0], 1.0, C64::new(1.0, 0.0), 3).is_err());
    assert!(p.basis_state(2, 0).is_err());
    assert!(p.basis_state(0, 4).is_err());
}

#[test]
fn linear_rabi_oscillation() {
    let p = AtomFieldParams::resonant_sigma3(1.0, 1.0, 0.0);
    for desc in [AtomDescription::Polchinski, AtomDescription::WeinbergFock] {
        let s = inversion_trajectory(desc, &p, &ground_one_photon(&p), 4.0 * std::f64::consts::PI, None).unwrap();
        assert_eq!(s.regime, Regime::Linear);
        let err = linf(&s.w, s.times.iter().map(|t| -t.cos()));
        assert!(err < 1e-7, "{desc:?}: {err:.3e}");
    }
}

#[test]
fn rabi_frequency_grows_with_excitation() {
    let p = AtomFieldParams::resonant_sigma3(1.0, 1.0, 0.0);
    let psi0 = p.basis_state(0, 2).unwrap();
    let s = inversion_trajectory(AtomDescription::Polchinski, &p, &psi0, 20.0, None).unwrap();
    assert!((s.excitation - 1.5).abs() < 1e-12);
    let fit = fit_sinusoid(&s.times, &s.w).unwrap();
    assert!((fit.frequency - p.rabi(1.5)).abs() < 1e-6, "{}", fit.frequency);
}

#[test]
fn small_nonlinearity_frequency_approaches_rabi() {
    let mut last = f64::INFINITY;
    for eps2 in [0.2, 0.1, 0.02] {
        let p = AtomFieldParams::resonant_sigma3(1.0, 1.0, eps2);
        let s = inversion_trajectory(AtomDescription::Polchinski, &p, &ground_one_photon(&p), 40.0, None).unwrap();
        let fit = fit_sinusoid(&s.times, &s.w).unwrap();
        let gap = (fit.frequency - 1.0).abs();
        assert!(gap < last, "eps2 = {eps2}: gap {gap:.3e} did not shrink");
        last = gap;
    }
    assert!(last < 1e-4, "{last:.3e}");
}

#[test]
fn resonant_inversion_matches_elliptic_forms() {
    let cases = [
        (1.0, 14.0, Regime::Oscillating),
        (2f64.sqrt(), 12.0, Regime::Separatrix),
        (2.0, 4.0, Regime::Trapped),
    ];
    for (eps0, t_end, tag) in cases {
        let p = AtomFieldParams::resonant_sigma3(1.0, 1.0, eps0 / 2.0);
        let s = inversion_trajectory(AtomDescription::Polchinski, &p, &ground_one_photon(&p), t_end, None).unwrap();
        assert_eq!(s.regime, tag);
        let omega = p.rabi(s.excitation);
        assert!((omega - 1.0).abs() < 1e-12);
        let err = linf(
            &s.w,
            s.times
                .iter()
                .map(|&t| elliptic_inversion(omega, p.varsigma(), t).unwrap()),
        );
        assert!(err < 1e-4, "{tag:?}: {err:.3e}");
        assert!(s.excitation_drift < 1e-9);
        assert!(s.norm_drift < 1e-9);
        assert!(s.energy_drift < 1e-8);
    }
}

#[test]
fn elliptic_forms_at_known_points() {
    assert!((elliptic_inversion(1.0, 0.0, 1.0).unwrap() + 1f64.cos()).abs() < 1e-15);
    assert!((elliptic_inversion(1.0, 1.0, 2.0).unwrap() + 1.0 / 2f64.cosh()).abs() < 1e-15);
    // cn and dn both reach −1 at the origin and cn(K) = 0
    assert!((elliptic_inversion(1.0, 0.5, 0.0).unwrap() + 1.0).abs() < 1e-14);
    let k = crate::dynamics::complete_elliptic_k(0.5).unwrap();
    assert!(elliptic_inversion(1.0, 0.5, k).unwrap().abs() < 1e-12);
    assert!((elliptic_inversion(1.0, 2.0, 0.0).unwrap() + 1.0).abs() < 1e-14);
    assert!(elliptic_inversion(-1.0, 0.5, 0.0).is_err());
}

#[test]
fn weinberg_fock_stays_linear() {
    for eps2 in [0.1, 0.5, 1.0] {
        let p = AtomFieldParams::resonant_sigma3(1.0, 1.0, eps2);
        let s = inversion_trajectory(
            AtomDescription::WeinbergFock,
            &p,
            &ground_one_photon(&p),
            4.0 * std::f64::consts::PI,
            None,
        )
        .unwrap();
        let err = linf(&s.w, s.times.iter().map(|t| -t.cos()));
        assert!(err < 1e-8, "eps2 = {eps2}: {err:.3e}");
    }
}

#[test]
fn polchinski_departs_from_rabi() {
    // inversion nonlinearity ε = 2ε0² = q/2
    let p = AtomFieldParams::resonant_sigma3(1.0, 1.0, 0.25);
    assert!((p.inversion_eps() - 0.5).abs() < 1e-15);
    let s = inversion_trajectory(
        AtomDescription::Polchinski,
        &p,
        &ground_one_photon(&p),
        8.0 * std::f64::consts::PI,
        None,
    )
    .unwrap();
    let dev = linf(&s.w, s.times.iter().map(|t| -t.cos()));
    assert!(dev > 0.01, "{dev:.3e}");
}

#[test]
fn truncation_leak_is_reported() {
    let mut p = AtomFieldParams::resonant_sigma3(1.0, 1.0, 0.0);
    p.n_max = 2;
    let psi0 = p.basis_state(1, 1).unwrap();
    match inversion_trajectory(AtomDescription::Polchinski, &p, &psi0, 3.0, None) {
        Err(Error::TruncationLeak { n_max, .. }) => assert_eq!(n_max, 2),
        other => panic!("expected a leak, got {other:?}"),
    }
}

#[test]
fn rejects_bad_initial_states() {
    let p = AtomFieldParams::resonant_sigma3(1.0, 1.0, 0.0);
    let short = StateVector::basis(4, 0).unwrap();
    assert!(matches!(
        inversion_trajectory(AtomDescription::Polchinski, &p, &short, 1.0, None),
        Err(Error::DimensionMismatch { .. })
    ));
    let big = ground_one_photon(&p).scaled(C64::new(2.0, 0.0));
    assert!(inversion_trajectory(AtomDescription::Polchinski, &p, &big, 1.0, None).is_err());
}

fn second_order_residuals(p: &AtomFieldParams, dt: f64) -> f64 {
    let s = inversion_trajectory(AtomDescription::Polchinski, p, &ground_one_photon(p), 10.0, Some(dt)).unwrap();
    inversion_ode_check(&s, p, -0.5, s.excitation).unwrap().linf_residual
}

#[test]
fn inversion_equation_holds_resonant_and_detuned() {
    let resonant = AtomFieldParams::resonant_sigma3(1.0, 1.0, 0.5);
    let s = inversion_trajectory(
        AtomDescription::Polchinski,
        &resonant,
        &ground_one_photon(&resonant),
        10.0,
        None,
    )
    .unwrap();
    assert!(inversion_ode_check(&s, &resonant, -0.5, 0.5).unwrap().linf_residual < 1e-3);

    let detuned = AtomFieldParams::new(vec![0.0, 1.3], vec![-0.2, 0.5], 1.0, C64::new(1.0, 0.0), 4).unwrap();
    let coarse = second_order_residuals(&detuned, 0.02);
    let fine = second_order_residuals(&detuned, 0.01);
    assert!(coarse < 1e-3, "{coarse:.3e}");
    // second differences: halving the step quarters the residual
    let ratio = coarse / fine;
    assert!((3.0..5.0).contains(&ratio), "{ratio}");
}

#[test]
fn detuned_inversion_needs_the_squared_detuning() {
    let p = AtomFieldParams::new(vec![0.0, 1.3], vec![-0.2, 0.5], 1.0, C64::new(1.0, 0.0), 4).unwrap();
    let s = inversion_trajectory(
        AtomDescription::Polchinski,
        &p,
        &ground_one_photon(&p),
        10.0,
        Some(0.01),
    )
    .unwrap();
    let dp = p.delta_prime();
    let h = s.times[1] - s.times[0];
    let linear_only = (1..s.w.len() - 1)
        .map(|j| {
            let ddw = (s.w[j + 1] - 2.0 * s.w[j] + s.w[j - 1]) / (h * h);
            let w = s.w[j];
            // same equation with −Δ' in place of −Δ'²
            let alt = inversion_rhs(&p, -0.5, s.excitation, w) + (dp * dp - dp) * w;
            (ddw - alt).abs()
        })
        .fold(0.0, f64::max);
    assert!(linear_only > 1e-2, "{linear_only:.3e}");
}

#[test]
fn ode_check_rejects_coarse_series() {
    let p = AtomFieldParams::resonant_sigma3(1.0, 1.0, 0.5);
    let mut s = inversion_trajectory(
        AtomDescription::Polchinski,
        &p,
        &ground_one_photon(&p),
        10.0,
        Some(0.01),
    )
    .unwrap();
    s.times = s.times.iter().step_by(50).copied().collect();
    s.w = s.w.iter().step_by(50).copied().collect();
    assert!(matches!(
        inversion_ode_check(&s, &p, -0.5, 0.5),
        Err(Error::TooCoarse(_))
    ));
}

fn third_level_params() -> AtomFieldParams {
    AtomFieldParams::new(vec![0.0, 1.0, 2.3], vec![-0.3, 0.3, 0.5], 1.0, C64::new(1.0, 0.0), 4).unwrap()
}

fn spectator_state(p: &AtomFieldParams, lower: bool) -> StateVector {
    let mut v = vec![C64::new(0.0, 0.0); p.dim()];
    let coupled = if lower { p.index(0, 1) } else { p.index(1, 0) };
    v[coupled] = C64::new(0.8, 0.0);
    v[p.index(2, 1)] = C64::new(0.6, 0.0);
    StateVector::new(v, p.dims().to_vec()).unwrap()
}

#[test]
fn third_level_phase_follows_inversion() {
    let p = third_level_params();
    let mut finals = Vec::new();
    for lower in [true, false] {
        let s = inversion_trajectory(AtomDescription::Polchinski, &p, &spectator_state(&p, lower), 8.0, None).unwrap();
        let (modulus, phase) = s.third_level.clone().unwrap();
        assert!(modulus.iter().all(|m| (m - 0.6).abs() < 1e-9));
        // rate ω3 + nω + 2⟨ε̂⟩ε3 − ⟨ε̂⟩², with ⟨ε̂⟩ carrying the R3 dependence
        let mean_eps: Vec<f64> = s
            .trajectory
            .states
            .iter()
            .map(|st| {
                (0..3)
                    .map(|k| p.eps_levels[k] * level_population(&p, st.amplitudes(), k))
                    .sum()
            })
            .collect();
        let rate = |m: f64| p.omega_levels[2] + p.omega + 2.0 * m * p.eps_levels[2] - m * m;
        let mut predicted = 0.0;
        let mut err: f64 = 0.0;
        for j in 1..s.times.len() {
            let h = s.times[j] - s.times[j - 1];
            predicted -= 0.5 * h * (rate(mean_eps[j]) + rate(mean_eps[j - 1]));
            err = err.max((phase[j] - predicted).abs());
        }
        assert!(err < 1e-5, "{err:.3e}");
        finals.push(*phase.last().unwrap());
    }
    assert!((finals[0] - finals[1]).abs() > 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_solves_resonant_equation(omega in 0.3f64..2.0, varsigma in 0.05f64..2.0, t in 0.1f64..6.0) {
        let h = 1e-3;
        let w = |t: f64| elliptic_inversion(omega, varsigma, t).unwrap();
        let ddw = (w(t + h) - 2.0 * w(t) + w(t - h)) / (h * h);
        let s2 = 2.0 * varsigma * varsigma;
        let rhs = (s2 - omega * omega) * w(t) - s2 * w(t).powi(3);
        prop_assert!((ddw - rhs).abs() < 1e-4, "{} vs {}", ddw, rhs);
    }

    #[test]
    fn polchinski_conserves_excitation(eps2 in -0.8f64..0.8, theta in 0.0f64..1.5) {
        let p = AtomFieldParams::resonant_sigma3(1.0, 1.0, eps2);
        let mut v = vec![C64::new(0.0, 0.0); p.dim()];
        v[p.index(0, 1)] = C64::new(theta.cos(), 0.0);
        v[p.index(1, 0)] = C64::new(0.0, theta.sin());
        let psi0 = StateVector::new(v, p.dims().to_vec()).unwrap();
        let s = inversion_trajectory(AtomDescription::Polchinski, &p, &psi0, 3.0, None).unwrap();
        prop_assert!(s.excitation_drift < 1e-9);
        prop_assert!(s.w.iter().all(|w| w.abs() <= 1.0 + 1e-12));
    }
}
