use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hilbert::{random_state, random_unitary, sigma1, sigma3, tensor_state, CMatrix, StateVector, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn state(amps: &[C64]) -> StateVector {
    StateVector::from_amplitudes(amps.to_vec()).unwrap()
}

fn catalog_entries() -> Vec<HomogeneousObservable> {
    let s1 = sigma1().into_matrix();
    vec![
        bilinear("σ3", sigma3().into_matrix()).unwrap(),
        norm(2),
        canonical(0.3, -0.7, 1.3),
        cubic(0.0, 1.0, 0.8),
        two_n_power(0.0, 1.0, 0.4, 2).unwrap(),
        singular_inverse(),
        quadratic_form(&s1, &sigma3().into_matrix(), 0.6).unwrap(),
    ]
}

fn amplitudes_2() -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2)
        .prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect::<Vec<_>>())
        .prop_filter("nonzero", |v| crate::hilbert::norm_sqr(v) > 1e-3)
}

#[test]
fn bilinear_gradient_is_matrix_action() {
    let obs = bilinear("σ3", sigma3().into_matrix()).unwrap();
    let psi = state(&[c(0.3, 0.1), c(-0.2, 0.7)]);
    let g = wirtinger_gradient(&obs, &psi).unwrap();
    assert_eq!(g, vec![c(0.3, 0.1), c(0.2, -0.7)]);
}

#[test]
fn norm_gradient_is_state() {
    let psi = state(&[c(0.3, 0.1), c(-0.2, 0.7)]);
    assert_eq!(wirtinger_gradient(&norm(2), &psi).unwrap(), psi.amplitudes());
}

#[test]
fn canonical_gradient_symbolic_oracle() {
    // ∂/∂ψ̄ of ε s² n: ε(2s − s²)ψ1, ε(−2s − s²)ψ2 at unit norm
    let eps = 0.9;
    let obs = canonical(0.0, 0.0, eps);
    let g = wirtinger_gradient(&obs, &state(&[c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
    assert!((g[0] - c(eps, 0.0)).norm() < 1e-15);
    assert!(g[1].norm() < 1e-15);

    let psi = state(&[c(0.6, 0.0), c(0.0, 0.8)]);
    let s: f64 = 0.36 - 0.64;
    let g = wirtinger_gradient(&obs, &psi).unwrap();
    assert!((g[0] - c(0.6, 0.0) * (eps * (2.0 * s - s * s))).norm() < 1e-14);
    assert!((g[1] - c(0.0, 0.8) * (eps * (-2.0 * s - s * s))).norm() < 1e-14);
}

#[test]
fn analytic_gradients_agree_with_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for obs in catalog_entries() {
        for _ in 0..20 {
            let psi = random_state(&mut rng, &[2]).scaled(c(1.3, 0.4));
            if obs.value(psi.amplitudes()).is_err() {
                continue;
            }
            let exact = obs.gradient(psi.amplitudes()).unwrap();
            let raw = |z: &[C64]| c(obs.raw(z), 0.0);
            let (_, numeric) = numeric_wirtinger(&raw, psi.amplitudes());
            for (a, b) in exact.iter().zip(&numeric) {
                assert!((a - b).norm() < 1e-7 * (1.0 + a.norm()), "{}: {a} vs {b}", obs.label());
            }
        }
    }
}

#[test]
fn canonical_hessian_at_pole() {
    let eps = 0.7;
    let a = nonlinear_operator(&canonical(0.0, 0.0, eps), &state(&[c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
    let m = a.matrix();
    assert!((m[(0, 0)] - c(eps, 0.0)).norm() < 1e-9);
    assert!((m[(1, 1)] - c(-3.0 * eps, 0.0)).norm() < 1e-9);
    assert!(m[(0, 1)].norm() < 1e-9);
}

#[test]
fn canonical_hessian_general_polynomial() {
    // Â11 = E1 + ε(8p³ − 20p² + 16p − 3), Â22 = E2 + ε(−8p³ + 4p² + 1),
    // Â12 = −8ε|ψ1|²|ψ2|²ψ1ψ̄2, all at unit norm with p = |ψ1|²
    let (e1, e2, eps) = (0.4, -0.3, 1.1);
    let obs = canonical(e1, e2, eps);
    for &(p, phase) in &[(0.2f64, 0.3f64), (0.5, 1.7), (0.85, -2.2)] {
        let psi1 = c(p.sqrt(), 0.0);
        let psi2 = C64::from_polar((1.0 - p).sqrt(), phase);
        let m = nonlinear_operator(&obs, &state(&[psi1, psi2])).unwrap().into_matrix();
        let a11 = e1 + eps * (8.0 * p.powi(3) - 20.0 * p * p + 16.0 * p - 3.0);
        let a22 = e2 + eps * (-8.0 * p.powi(3) + 4.0 * p * p + 1.0);
        let a12 = -8.0 * eps * p * (1.0 - p) * psi1 * psi2.conj();
        assert!((m[(0, 0)].re - a11).abs() < 1e-9);
        assert!((m[(1, 1)].re - a22).abs() < 1e-9);
        assert!((m[(0, 1)] - a12).norm() < 1e-9);
    }
}

#[test]
fn evaluator_only_hessian_matches_gradient_route() {
    let exact = canonical(0.2, 0.5, 0.8);
    let inner = exact.clone();
    let bare = HomogeneousObservable::new("bare", move |z: &[C64]| inner.raw(z));
    let psi = state(&[c(0.5, 0.2), c(-0.3, 0.6)]);
    let a = nonlinear_operator(&exact, &psi).unwrap().into_matrix();
    let b = nonlinear_operator(&bare, &psi).unwrap().into_matrix();
    assert!((a - b).norm() < 1e-6);
}

#[test]
fn bilinear_operator_is_state_independent() {
    let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, -0.4), c(0.1, 0.4), c(-1.2, 0.0)]);
    let obs = bilinear("M", m.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let psi = random_state(&mut rng, &[2]);
        let a = nonlinear_operator(&obs, &psi).unwrap().into_matrix();
        assert!((a - &m).camax() < 1e-10);
    }
}

#[test]
fn operator_reproduces_value_and_is_scale_free() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for obs in catalog_entries() {
        for _ in 0..20 {
            let psi = random_state(&mut rng, &[2]);
            let Ok(a) = nonlinear_operator(&obs, &psi) else {
                continue;
            };
            let v = obs.value(psi.amplitudes()).unwrap();
            let quad = crate::hilbert::inner(psi.amplitudes(), &a.apply(psi.amplitudes()));
            let scale = 1.0 + a.matrix().camax();
            assert!((quad.re - v).abs() < 1e-7 * scale, "{}", obs.label());
            let a2 = nonlinear_operator(&obs, &psi.scaled(c(2.0, 0.0))).unwrap();
            assert!((a.matrix() - a2.matrix()).camax() < 1e-8 * scale, "{}", obs.label());
        }
    }
}

#[test]
fn operator_is_almost_constant_along_curves() {
    // ⟨ψ|(dÂ/dt)ψ⟩ = 0 along ψ(t) = (cos t, e^{it} sin 2t)
    let obs = cubic(0.3, -0.2, 1.4);
    let curve = |t: f64| vec![c(t.cos(), 0.2 * t), C64::from_polar((2.0 * t).sin() + 0.1, t)];
    let h = 1e-4;
    for &t in &[0.2, 0.7, 1.3] {
        let ap = obs.operator(&curve(t + h)).unwrap().into_matrix();
        let am = obs.operator(&curve(t - h)).unwrap().into_matrix();
        let da = (ap - am).map(|z| z / (2.0 * h));
        let psi = curve(t);
        let value = crate::hilbert::inner(&psi, &crate::hilbert::mat_vec(&da, &psi));
        assert!(value.norm() < 1e-6, "t = {t}: {value}");
    }
}

#[test]
fn singular_observable_reports_guard() {
    let obs = singular_inverse();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let err = obs.value(&[c(h, 0.0), c(h, 0.0)]).unwrap_err();
    assert!(matches!(err, crate::Error::Singular { .. }));
    assert!((obs.value(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn norm_is_a_unit_for_the_star_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = norm(2);
    for obs in catalog_entries() {
        for _ in 0..10 {
            let psi = random_state(&mut rng, &[2]).scaled(c(0.7, 0.2));
            let Ok(v) = obs.value(psi.amplitudes()) else { continue };
            let left = star_product(&n, &obs, &psi).unwrap();
            let right = star_product(&obs, &n, &psi).unwrap();
            assert!((left - c(v, 0.0)).norm() < 1e-12);
            assert!((right - c(v, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn star_product_of_bilinears_is_matrix_product() {
    let a = bilinear("σ1", sigma1().into_matrix()).unwrap();
    let b = bilinear("σ3", sigma3().into_matrix()).unwrap();
    let psi = state(&[c(0.6, 0.0), c(0.0, 0.8)]);
    let ab = sigma1().into_matrix() * sigma3().into_matrix();
    let direct = crate::hilbert::inner(psi.amplitudes(), &crate::hilbert::mat_vec(&ab, psi.amplitudes()));
    assert!((star_product(&a, &b, &psi).unwrap() - direct).norm() < 1e-15);
}

#[test]
fn star_product_matches_operator_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let entries = catalog_entries();
    for a in &entries {
        for b in &entries {
            let psi = random_state(&mut rng, &[2]);
            let (Ok(oa), Ok(ob)) = (nonlinear_operator(a, &psi), nonlinear_operator(b, &psi)) else {
                continue;
            };
            let prod = oa.matrix() * ob.matrix();
            let direct = crate::hilbert::inner(psi.amplitudes(), &crate::hilbert::mat_vec(&prod, psi.amplitudes()));
            let star = star_product(a, b, &psi).unwrap();
            assert!((star - direct).norm() < 1e-7);
        }
    }
}

#[test]
fn self_star_is_real() {
    let obs = canonical(0.1, 0.9, 0.5);
    let psi = state(&[c(0.8, 0.0), c(0.0, 0.6)]);
    assert!(star_product(&obs, &obs, &psi).unwrap().im.abs() < 1e-12);
}

#[test]
fn nested_star_products_differ_for_transverse_nonlinearity() {
    let a = canonical(0.0, 0.0, 1.0).plus(&bilinear("σ1", sigma1().into_matrix()).unwrap().scaled(0.5));
    let fa: Arc<dyn Functional> = Arc::new(a);
    let aa: Arc<dyn Functional> = Arc::new(star(fa.clone(), fa.clone()));
    let left = star(aa.clone(), fa.clone());
    let right = star(fa.clone(), aa.clone());
    let psi = [c(0.8, 0.0), c(0.0, 0.6)];
    let l = left.value(&psi).unwrap();
    let r = right.value(&psi).unwrap();
    assert!((l - r).norm() > 1e-3, "{l} vs {r}");
    assert!(l.im.abs() > 1e-3);
    // the two nestings are conjugate to each other
    assert!((l - r.conj()).norm() < 1e-7);
}

#[test]
fn nested_star_products_coincide_for_diagonal_gradients() {
    let fa: Arc<dyn Functional> = Arc::new(canonical(0.0, 0.0, 1.0));
    let aa: Arc<dyn Functional> = Arc::new(star(fa.clone(), fa.clone()));
    let psi = [c(0.8, 0.0), c(0.0, 0.6)];
    let l = star(aa.clone(), fa.clone()).value(&psi).unwrap();
    let r = star(fa, aa).value(&psi).unwrap();
    assert!((l - r).norm() < 1e-7);
    assert!(l.im.abs() < 1e-7);
}

#[test]
fn barstar_moments() {
    let eps = 0.8;
    let obs = canonical(0.0, 0.0, eps);
    let up = state(&[c(1.0, 0.0), c(0.0, 0.0)]);
    assert!((barstar_moment(&obs, &up, 1).unwrap() - eps).abs() < 1e-9);

    let s3 = bilinear("σ3", sigma3().into_matrix()).unwrap();
    let psi = state(&[c(0.3, 0.4), c(0.5, -0.1)]);
    assert!((barstar_moment(&s3, &psi, 2).unwrap() - 1.0).abs() < 1e-14);

    // s = 1/2 at unit norm: p = 3/4, Â from the symbolic Hessian
    let p: f64 = 0.75;
    let psi = state(&[c(p.sqrt(), 0.0), c((1.0 - p).sqrt(), 0.0)]);
    let a11 = eps * (8.0 * p.powi(3) - 20.0 * p * p + 16.0 * p - 3.0);
    let a22 = eps * (-8.0 * p.powi(3) + 4.0 * p * p + 1.0);
    let a12 = -8.0 * eps * p * (1.0 - p) * p.sqrt() * (1.0 - p).sqrt();
    let (x, y) = (p.sqrt(), (1.0 - p).sqrt());
    // ⟨ψ|Â²ψ⟩ = ‖Âψ‖²
    let v1 = a11 * x + a12 * y;
    let v2 = a12 * x + a22 * y;
    let expected = v1 * v1 + v2 * v2;
    assert!((barstar_moment(&obs, &psi, 2).unwrap() - expected).abs() < 1e-8);
    assert!(barstar_moment(&obs, &psi, 0).is_err());
}

#[test]
fn weinberg_lift_with_trivial_rest_reproduces_observable() {
    let obs = canonical(0.2, -0.4, 0.9);
    let lifted = weinberg_lift(&obs, &[2, 1], 0, &CMatrix::identity(1, 1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let psi = random_state(&mut rng, &[2]);
        let a = obs.value(psi.amplitudes()).unwrap();
        let b = lifted.value(psi.amplitudes()).unwrap();
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn weinberg_lift_is_basis_dependent_on_correlated_states() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let obs = canonical(0.0, 0.0, 1.0);
    let psi = [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
    let fock = weinberg_lift(&obs, &[2, 2], 0, &CMatrix::identity(2, 2)).unwrap();
    assert!((fock.value(&psi).unwrap() - 1.0).abs() < 1e-14);
    let had = CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]);
    let rotated = weinberg_lift(&obs, &[2, 2], 0, &had).unwrap();
    assert!(rotated.value(&psi).unwrap().abs() < 1e-14);
}

#[test]
fn weinberg_lift_of_product_state_ignores_rest_basis() {
    let obs = canonical(0.3, 0.1, 0.7);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let a = random_state(&mut rng, &[2]);
        let b = random_state(&mut rng, &[3]);
        let psi = tensor_state(&a, &b);
        let u = random_unitary(&mut rng, 3);
        let lifted = weinberg_lift(&obs, &[2, 3], 0, &u).unwrap();
        let v = lifted.value(psi.amplitudes()).unwrap();
        assert!((v - obs.value(a.amplitudes()).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn weinberg_lift_of_bilinear_is_basis_independent() {
    let obs = bilinear("σ1", sigma1().into_matrix()).unwrap();
    let op = crate::hilbert::embed_operator(&sigma1().into_matrix(), &[2, 2], 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let psi = random_state(&mut rng, &[2, 2]);
        let u = random_unitary(&mut rng, 2);
        let lifted = weinberg_lift(&obs, &[2, 2], 1, &u).unwrap();
        let direct = crate::hilbert::inner(psi.amplitudes(), &crate::hilbert::mat_vec(&op, psi.amplitudes()));
        assert!((lifted.value(psi.amplitudes()).unwrap() - direct.re).abs() < 1e-12);
    }
}

#[test]
fn lifted_gradients_agree_with_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u = random_unitary(&mut rng, 3);
    let e = sigma3().into_matrix().map(|z| z * 0.8);
    let lifts = vec![
        weinberg_lift(&canonical(0.1, 0.4, 0.9), &[2, 3], 0, &u).unwrap(),
        weinberg_lift(&cubic(0.1, 0.4, 0.9), &[3, 2], 1, &u).unwrap(),
        polchinski_lift(&DensityFunctional::squared_mean(e.clone()).unwrap(), &[2, 3], 0).unwrap(),
        polchinski_lift(&DensityFunctional::purity_weighted(e.clone()).unwrap(), &[3, 2], 1).unwrap(),
        polchinski_lift(&DensityFunctional::linear(sigma1().into_matrix()).unwrap(), &[2, 3], 0).unwrap(),
    ];
    for obs in &lifts {
        for _ in 0..5 {
            let psi = random_state(&mut rng, &[6]);
            let exact = obs.gradient(psi.amplitudes()).unwrap();
            let raw = |z: &[C64]| c(obs.raw(z), 0.0);
            let (_, numeric) = numeric_wirtinger(&raw, psi.amplitudes());
            for (a, b) in exact.iter().zip(&numeric) {
                assert!((a - b).norm() < 1e-7, "{}: {a} vs {b}", obs.label());
            }
            let (h, a) = euler_residuals(obs, psi.amplitudes()).unwrap();
            assert!(h < 1e-12 && a < 1e-12);
        }
    }
}

#[test]
fn polchinski_lift_is_invariant_under_remote_unitaries() {
    let e = sigma3().into_matrix();
    let f = DensityFunctional::purity_weighted(e).unwrap();
    let lifted = polchinski_lift(&f, &[2, 3], 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..20 {
        let psi = random_state(&mut rng, &[2, 3]);
        let u = random_unitary(&mut rng, 3);
        let moved = crate::hilbert::rotate_subsystem(&psi, &u, 1).unwrap();
        let a = lifted.value(psi.amplitudes()).unwrap();
        let b = lifted.value(moved.amplitudes()).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn catalog_homogeneity_and_euler(amps in amplitudes_2()) {
        for obs in catalog_entries() {
            if obs.value(&amps).is_err() {
                continue;
            }
            prop_assert!(homogeneity_residual(&obs, &amps).unwrap() < 1e-9, "{}", obs.label());
            let (h, a) = euler_residuals(&obs, &amps).unwrap();
            prop_assert!(h < 1e-8 && a < 1e-8, "{}: {h} {a}", obs.label());
        }
    }

    #[test]
    fn numeric_gradient_satisfies_conjugate_euler(amps in amplitudes_2()) {
        let inner = canonical(0.5, -0.5, 1.2);
        let bare = HomogeneousObservable::new("bare", move |z: &[C64]| inner.raw(z));
        let (h, a) = euler_residuals(&bare, &amps).unwrap();
        prop_assert!(h < 1e-7 && a < 1e-7);
    }
}
