//! Jacobi elliptic functions and the complete elliptic integral of the first
//! kind, both from the arithmetic-geometric mean.

use crate::error::{Error, Result};

fn check_modulus(k: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::InvalidParameter {
            name: "k".into(),
            detail: format!("elliptic modulus must lie in [0, 1], got {k}"),
        });
    }
    Ok(())
}

/// `K(k)` for modulus `k`; infinite at `k = 1`.
pub fn complete_elliptic_k(k: f64) -> Result<f64> {
    check_modulus(k)?;
    if k == 1.0 {
        return Ok(f64::INFINITY);
    }
    let (mut a, mut b) = (1.0f64, (1.0 - k * k).sqrt());
    for _ in 0..64 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    Ok(std::f64::consts::PI / (2.0 * a))
}

/// `(sn, cn, dn)(u, k)` by the descending Landen (AGM) transformation.
pub fn jacobi_elliptic(u: f64, k: f64) -> Result<(f64, f64, f64)> {
    check_modulus(k)?;
    if k == 0.0 {
        return Ok((u.sin(), u.cos(), 1.0));
    }
    if k == 1.0 {
        let sech = 1.0 / u.cosh();
        return Ok((u.tanh(), sech, sech));
    }
    const MAX_TERMS: usize = 16;
    let mut a = [0.0f64; MAX_TERMS + 1];
    let mut c = [0.0f64; MAX_TERMS + 1];
    a[0] = 1.0;
    let mut b = (1.0 - k * k).sqrt();
    c[0] = k;
    let mut n = 0;
    while c[n].abs() > 1e-16 && n < MAX_TERMS {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn > 0 for k < 1; the square root stays accurate near the zeros of cn
    let dn = (1.0 - k * k * sn * sn).sqrt();
    Ok((sn, cn, dn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degenerate_moduli() {
        for &u in &[0.0, 0.3, -1.2, 4.0] {
            let (sn, cn, dn) = jacobi_elliptic(u, 0.0).unwrap();
            assert_eq!((sn, cn, dn), (u.sin(), u.cos(), 1.0));
            let (sn, cn, dn) = jacobi_elliptic(u, 1.0).unwrap();
            assert!((sn - u.tanh()).abs() < 1e-15);
            assert!((cn - 1.0 / u.cosh()).abs() < 1e-15);
            assert!((dn - 1.0 / u.cosh()).abs() < 1e-15);
        }
    }

    #[test]
    fn quarter_period_zero_of_cn() {
        let k = 0.5;
        let kk = complete_elliptic_k(k).unwrap();
        let (sn, cn, dn) = jacobi_elliptic(kk, k).unwrap();
        assert!(cn.abs() < 1e-10);
        assert!((sn - 1.0).abs() < 1e-12);
        assert!((dn - (1.0 - k * k).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn complete_integral_reference_values() {
        // K(0) = π/2; K(1/√2) = Γ(1/4)² / (4√π)
        assert!((complete_elliptic_k(0.0).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let gamma_quarter = 3.625_609_908_221_908_f64;
        let expected = gamma_quarter * gamma_quarter / (4.0 * std::f64::consts::PI.sqrt());
        let k = std::f64::consts::FRAC_1_SQRT_2;
        assert!((complete_elliptic_k(k).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn derivative_identities_by_finite_differences() {
        // d sn/du = cn dn, d cn/du = −sn dn, d dn/du = −k² sn cn
        let h = 1e-5;
        for &k in &[0.1, 0.5, 0.9, 0.999] {
            for &u in &[0.2, 1.1, 2.7, -3.3] {
                let (sp, cp, dp) = jacobi_elliptic(u + h, k).unwrap();
                let (sm, cm, dm) = jacobi_elliptic(u - h, k).unwrap();
                let (s, c, d) = jacobi_elliptic(u, k).unwrap();
                assert!(((sp - sm) / (2.0 * h) - c * d).abs() < 1e-9);
                assert!(((cp - cm) / (2.0 * h) + s * d).abs() < 1e-9);
                assert!(((dp - dm) / (2.0 * h) + k * k * s * c).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_bad_modulus() {
        assert!(jacobi_elliptic(0.1, 1.5).is_err());
        assert!(jacobi_elliptic(0.1, -0.1).is_err());
    }

    proptest! {
        #[test]
        fn pythagorean_identities(u in -20.0f64..20.0, k in 0.0f64..1.0) {
            let (sn, cn, dn) = jacobi_elliptic(u, k).unwrap();
            prop_assert!((sn * sn + cn * cn - 1.0).abs() < 1e-12);
            prop_assert!((dn * dn + k * k * sn * sn - 1.0).abs() < 1e-12);
        }

        #[test]
        fn cn_has_period_four_k(u in -5.0f64..5.0, k in 0.0f64..0.95) {
            let kk = complete_elliptic_k(k).unwrap();
            let (_, c0, _) = jacobi_elliptic(u, k).unwrap();
            let (_, c1, _) = jacobi_elliptic(u + 4.0 * kk, k).unwrap();
            prop_assert!((c0 - c1).abs() < 1e-10);
        }
    }
}
