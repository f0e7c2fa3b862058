//! Named observable constructors.

use super::HomogeneousObservable;
use crate::error::{Error, Result};
use crate::hilbert::{hermitian_residual, inner, mat_vec, norm_sqr, CMatrix, C64};
use crate::tolerances;

/// `⟨ψ|Âψ⟩` for a constant Hermitian matrix.
pub fn bilinear(label: impl Into<String>, m: CMatrix) -> Result<HomogeneousObservable> {
    let residual = hermitian_residual(&m);
    if residual > tolerances::HERMITIAN {
        return Err(Error::NotHermitian {
            residual,
            tolerance: tolerances::HERMITIAN,
        });
    }
    let dim = m.nrows();
    let a = m.clone();
    Ok(
        HomogeneousObservable::new(label, move |z: &[C64]| inner(z, &mat_vec(&a, z)).re)
            .with_dim(dim)
            .with_linear(m),
    )
}

/// `n(ψ, ψ̄) = ⟨ψ|ψ⟩`.
pub fn norm(dim: usize) -> HomogeneousObservable {
    HomogeneousObservable::new("n", norm_sqr)
        .with_dim(dim)
        .with_linear(CMatrix::identity(dim, dim))
}

fn positive_norm(z: &[C64]) -> Option<String> {
    if norm_sqr(z) > 0.0 {
        None
    } else {
        Some("zero vector".into())
    }
}

/// `Σ E_k|ψ_k|² + ε T^m / n^{m−1}` with `T = Σ w_k|ψ_k|²`.
///
/// The gradient is diagonal: `∂H/∂ψ̄_k = (E_k + ε s^{m−1}(m w_k − (m−1)s)) ψ_k`
/// with `s = T/n`.
pub fn power_family(energies: &[f64], weights: &[f64], eps: f64, m: u32) -> Result<HomogeneousObservable> {
    if energies.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: energies.len(),
            got: weights.len(),
        });
    }
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m".into(),
            detail: "power must be at least 1".into(),
        });
    }
    let dim = energies.len();
    let (e, w) = (energies.to_vec(), weights.to_vec());
    let (e2, w2) = (e.clone(), w.clone());
    let mi = m as i32;
    let mf = m as f64;
    let eval = move |z: &[C64]| {
        let n = norm_sqr(z);
        let lin: f64 = z.iter().zip(&e).map(|(p, ek)| ek * p.norm_sqr()).sum();
        let t: f64 = z.iter().zip(&w).map(|(p, wk)| wk * p.norm_sqr()).sum();
        lin + eps * t.powi(mi) / n.powi(mi - 1)
    };
    let grad = move |z: &[C64]| {
        let n = norm_sqr(z);
        let t: f64 = z.iter().zip(&w2).map(|(p, wk)| wk * p.norm_sqr()).sum();
        let s = t / n;
        let sp = s.powi(mi - 1);
        z.iter()
            .zip(e2.iter().zip(&w2))
            .map(|(p, (ek, wk))| p * (ek + eps * sp * (mf * wk - (mf - 1.0) * s)))
            .collect()
    };
    let mut obs = HomogeneousObservable::new(format!("power-family(m={m})"), eval)
        .with_gradient(grad)
        .with_guard(positive_norm)
        .with_dim(dim)
        .with_param("eps", eps)
        .with_param("m", mf);
    for (k, ek) in energies.iter().enumerate() {
        obs = obs.with_param(format!("E{}", k + 1), *ek);
    }
    Ok(obs)
}

/// `E1|ψ1|² + E2|ψ2|² + ε⟨σ3⟩²/n`.
pub fn canonical(e1: f64, e2: f64, eps: f64) -> HomogeneousObservable {
    let mut obs = power_family(&[e1, e2], &[1.0, -1.0], eps, 2).expect("valid two-level family");
    obs.label = "canonical".into();
    obs
}

/// `E1|ψ1|² + E2|ψ2|² + ε⟨σ3⟩³/n²`.
pub fn cubic(e1: f64, e2: f64, eps: f64) -> HomogeneousObservable {
    let mut obs = power_family(&[e1, e2], &[1.0, -1.0], eps, 3).expect("valid two-level family");
    obs.label = "cubic".into();
    obs
}

/// `E1|ψ1|² + E2|ψ2|² + ε⟨σ3⟩^{2N}/n^{2N−1}`.
pub fn two_n_power(e1: f64, e2: f64, eps: f64, n: u32) -> Result<HomogeneousObservable> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "N".into(),
            detail: "must be at least 1".into(),
        });
    }
    let mut obs = power_family(&[e1, e2], &[1.0, -1.0], eps, 2 * n)?.with_param("N", n as f64);
    obs.label = format!("2N-power(N={n})");
    Ok(obs)
}

/// `⟨ψ|Ĥ0ψ⟩ + ε⟨ψ|Êψ⟩²/⟨ψ|ψ⟩` for Hermitian `Ĥ0`, `Ê`.
pub fn quadratic_form(h0: &CMatrix, e: &CMatrix, eps: f64) -> Result<HomogeneousObservable> {
    for m in [h0, e] {
        let residual = hermitian_residual(m);
        if residual > tolerances::HERMITIAN {
            return Err(Error::NotHermitian {
                residual,
                tolerance: tolerances::HERMITIAN,
            });
        }
    }
    if h0.nrows() != e.nrows() {
        return Err(Error::DimensionMismatch {
            expected: h0.nrows(),
            got: e.nrows(),
        });
    }
    let dim = h0.nrows();
    let (h_a, e_a) = (h0.clone(), e.clone());
    let (h_b, e_b) = (h0.clone(), e.clone());
    let eval = move |z: &[C64]| {
        let n = norm_sqr(z);
        let t = inner(z, &mat_vec(&e_a, z)).re;
        inner(z, &mat_vec(&h_a, z)).re + eps * t * t / n
    };
    let grad = move |z: &[C64]| {
        let n = norm_sqr(z);
        let ez = mat_vec(&e_b, z);
        let s = inner(z, &ez).re / n;
        let hz = mat_vec(&h_b, z);
        (0..z.len())
            .map(|k| hz[k] + eps * (2.0 * s * ez[k] - s * s * z[k]))
            .collect()
    };
    Ok(HomogeneousObservable::new("quadratic-form", eval)
        .with_gradient(grad)
        .with_guard(positive_norm)
        .with_dim(dim)
        .with_param("eps", eps))
}

/// `n² / ⟨ψ|σ3ψ⟩`, excluded on the disk `|⟨σ3⟩| < 1e−6` around its singular set.
pub fn singular_inverse() -> HomogeneousObservable {
    let t_of = |z: &[C64]| z[0].norm_sqr() - z[1].norm_sqr();
    HomogeneousObservable::new("n²/⟨σ3⟩", move |z: &[C64]| {
        let n = norm_sqr(z);
        n * n / t_of(z)
    })
    .with_gradient(move |z: &[C64]| {
        let r = norm_sqr(z) / t_of(z);
        vec![z[0] * (r * (2.0 - r)), z[1] * (r * (2.0 + r))]
    })
    .with_guard(move |z: &[C64]| {
        let n = norm_sqr(z);
        let s = t_of(z) / n;
        if !(n > 0.0) || s.abs() < tolerances::SINGULAR_GUARD {
            Some(format!(
                "⟨σ3⟩ = {s:.3e} lies within {:.0e} of the singular set ⟨σ3⟩ = 0",
                tolerances::SINGULAR_GUARD
            ))
        } else {
            None
        }
    })
    .with_dim(2)
}
