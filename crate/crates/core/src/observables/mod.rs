//! (1,1)-homogeneous observable functionals and the structures they induce:
//! Wirtinger gradients, state-dependent Hermitian operators, the *-product
//! and the *̄-moments.
//!
//! An observable `A(ψ, ψ̄)` is a real functional with `A(λψ) = |λ|² A(ψ)`.
//! Its gradient `∂A/∂ψ̄_m` equals `(Â ψ)_m` where `Â_mn = ∂²A/∂ψ̄_m ∂ψ_n`.

mod catalog;
mod density;
mod derivative;
mod lift;
mod star;

use std::fmt;
use std::sync::Arc;

pub use catalog::{bilinear, canonical, cubic, norm, power_family, quadratic_form, singular_inverse, two_n_power};
pub use density::DensityFunctional;
pub use derivative::{numeric_hessian, numeric_wirtinger};
pub use lift::{polchinski_lift, weinberg_lift};
pub use star::{star, star_product, Functional, StarFunctional};

use crate::error::{Error, Result};
use crate::hilbert::{inner, mat_vec, CMatrix, HermitianOperator, StateVector, C64};
use crate::tolerances;

pub type Evaluator = Arc<dyn Fn(&[C64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[C64]) -> Vec<C64> + Send + Sync>;
/// Returns `Some(reason)` when the state lies in the excluded region.
pub type DomainGuard = Arc<dyn Fn(&[C64]) -> Option<String> + Send + Sync>;

/// A real (1,1)-homogeneous functional with optional analytic derivatives.
#[derive(Clone)]
pub struct HomogeneousObservable {
    label: String,
    params: Vec<(String, f64)>,
    dim: Option<usize>,
    evaluator: Evaluator,
    gradient: Option<GradientFn>,
    linear: Option<CMatrix>,
    guard: Option<DomainGuard>,
}

impl fmt::Debug for HomogeneousObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogeneousObservable")
            .field("label", &self.label)
            .field("params", &self.params)
            .field("dim", &self.dim)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl HomogeneousObservable {
    /// Observable from an evaluator alone; derivatives are taken numerically.
    pub fn new<F>(label: impl Into<String>, evaluator: F) -> Self
    where
        F: Fn(&[C64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            params: Vec::new(),
            dim: None,
            evaluator: Arc::new(evaluator),
            gradient: None,
            linear: None,
            guard: None,
        }
    }

    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn with_guard<G>(mut self, guard: G) -> Self
    where
        G: Fn(&[C64]) -> Option<String> + Send + Sync + 'static,
    {
        self.guard = Some(Arc::new(guard));
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = Some(dim);
        self
    }

    pub fn with_param(mut self, name: impl Into<String>, value: f64) -> Self {
        self.params.push((name.into(), value));
        self
    }

    pub(crate) fn with_linear(mut self, m: CMatrix) -> Self {
        self.linear = Some(m);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// The constant matrix of a bilinear observable.
    pub fn linear_operator(&self) -> Option<&CMatrix> {
        self.linear.as_ref()
    }

    fn check(&self, psi: &[C64]) -> Result<()> {
        if let Some(d) = self.dim {
            if psi.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: psi.len(),
                });
            }
        }
        if let Some(guard) = &self.guard {
            if let Some(reason) = guard(psi) {
                return Err(Error::Singular {
                    label: self.label.clone(),
                    detail: reason,
                });
            }
        }
        Ok(())
    }

    pub fn value(&self, psi: &[C64]) -> Result<f64> {
        self.check(psi)?;
        let v = (self.evaluator)(psi);
        if !v.is_finite() {
            return Err(Error::Singular {
                label: self.label.clone(),
                detail: format!("non-finite value at ψ = {psi:?}"),
            });
        }
        Ok(v)
    }

    /// Evaluator without the domain check; used by finite differences.
    pub(crate) fn raw(&self, psi: &[C64]) -> f64 {
        (self.evaluator)(psi)
    }

    /// `∂A/∂ψ̄_m`.
    pub fn gradient(&self, psi: &[C64]) -> Result<Vec<C64>> {
        self.check(psi)?;
        let g = match (&self.linear, &self.gradient) {
            (Some(m), _) => mat_vec(m, psi),
            (None, Some(g)) => g(psi),
            (None, None) => numeric_wirtinger(&|z: &[C64]| C64::new(self.raw(z), 0.0), psi).1,
        };
        if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Singular {
                label: self.label.clone(),
                detail: format!("non-finite gradient at ψ = {psi:?}"),
            });
        }
        Ok(g)
    }

    /// `Â(ψ)`, Hermitian after symmetrization; the pre-symmetrization residual
    /// must stay below the numeric gate.
    pub fn operator(&self, psi: &[C64]) -> Result<HermitianOperator> {
        self.check(psi)?;
        if let Some(m) = &self.linear {
            return HermitianOperator::new(m.clone());
        }
        let raw = match &self.gradient {
            Some(g) => derivative::jacobian_of_gradient(g.as_ref(), psi),
            None => numeric_hessian(&|z: &[C64]| self.raw(z), psi),
        };
        if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Singular {
                label: self.label.clone(),
                detail: format!("non-finite Hessian at ψ = {psi:?}"),
            });
        }
        let residual = crate::hilbert::hermitian_residual(&raw);
        if residual > tolerances::HERMITIAN_NUMERIC {
            return Err(Error::NotHermitian {
                residual,
                tolerance: tolerances::HERMITIAN_NUMERIC,
            });
        }
        Ok(HermitianOperator::symmetrized(&raw))
    }

    /// Pointwise sum; analytic gradients are kept when both sides have them.
    pub fn plus(&self, other: &HomogeneousObservable) -> HomogeneousObservable {
        let (a, b) = (self.clone(), other.clone());
        let (ea, eb) = (a.evaluator.clone(), b.evaluator.clone());
        let mut out = HomogeneousObservable::new(format!("{} + {}", a.label, b.label), move |z: &[C64]| ea(z) + eb(z));
        out.dim = a.dim.or(b.dim);
        out.params = a.params.iter().chain(&b.params).cloned().collect();
        let guards: Vec<DomainGuard> = a.guard.iter().chain(b.guard.iter()).cloned().collect();
        if !guards.is_empty() {
            out.guard = Some(Arc::new(move |z: &[C64]| guards.iter().find_map(|g| g(z))));
        }
        if let (Some(ma), Some(mb)) = (&a.linear, &b.linear) {
            out.linear = Some(ma + mb);
        } else if a.has_exact_gradient() && b.has_exact_gradient() {
            out.gradient = Some(Arc::new(move |z: &[C64]| {
                let ga = a.exact_gradient(z);
                let gb = b.exact_gradient(z);
                ga.iter().zip(&gb).map(|(x, y)| x + y).collect()
            }));
        }
        out
    }

    /// `c·A`.
    pub fn scaled(&self, c: f64) -> HomogeneousObservable {
        let a = self.clone();
        let ea = a.evaluator.clone();
        let mut out = HomogeneousObservable::new(format!("{c}·{}", a.label), move |z: &[C64]| c * ea(z));
        out.dim = a.dim;
        out.params = a.params.clone();
        out.guard = a.guard.clone();
        if let Some(m) = &a.linear {
            out.linear = Some(m.map(|x| x * c));
        } else if a.has_exact_gradient() {
            out.gradient = Some(Arc::new(move |z: &[C64]| {
                a.exact_gradient(z).into_iter().map(|g| g * c).collect()
            }));
        }
        out
    }

    fn has_exact_gradient(&self) -> bool {
        self.linear.is_some() || self.gradient.is_some()
    }

    fn exact_gradient(&self, psi: &[C64]) -> Vec<C64> {
        match (&self.linear, &self.gradient) {
            (Some(m), _) => mat_vec(m, psi),
            (None, Some(g)) => g(psi),
            (None, None) => unreachable!("caller checks has_exact_gradient"),
        }
    }
}

/// `∂A/∂ψ̄_m` at `psi`. Analytic gradients are used when present, central
/// differences otherwise.
pub fn wirtinger_gradient(obs: &HomogeneousObservable, psi: &StateVector) -> Result<Vec<C64>> {
    obs.gradient(psi.amplitudes())
}

/// `Â_mn = ∂²A/∂ψ̄_m ∂ψ_n` at `psi`.
pub fn nonlinear_operator(obs: &HomogeneousObservable, psi: &StateVector) -> Result<HermitianOperator> {
    obs.operator(psi.amplitudes())
}

/// `⟨ψ|Â^k ψ⟩ / ⟨ψ|ψ⟩` with `Â = Â(ψ)`.
pub fn barstar_moment(obs: &HomogeneousObservable, psi: &StateVector, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k".into(),
            detail: "moment order must be at least 1".into(),
        });
    }
    let a = nonlinear_operator(obs, psi)?;
    let mut v = psi.amplitudes().to_vec();
    for _ in 0..k {
        v = a.apply(&v);
    }
    let value = inner(psi.amplitudes(), &v) / psi.norm_sqr();
    if value.im.abs() > tolerances::REAL_RESIDUAL {
        return Err(Error::ComplexResidual {
            residual: value.im.abs(),
        });
    }
    Ok(value.re)
}

/// Euler-identity residuals `|Σψ_n ∂A/∂ψ_n − A|` and `|Σψ̄_n ∂A/∂ψ̄_n − A|`.
pub fn euler_residuals(obs: &HomogeneousObservable, psi: &[C64]) -> Result<(f64, f64)> {
    let a = obs.value(psi)?;
    let g = obs.gradient(psi)?;
    let holo: C64 = psi.iter().zip(&g).map(|(p, gm)| p * gm.conj()).sum();
    let anti: C64 = psi.iter().zip(&g).map(|(p, gm)| p.conj() * gm).sum();
    Ok(((holo - a).norm(), (anti - a).norm()))
}

/// Largest relative error of `A(λψ) = |λ|² A(ψ)` over `λ ∈ {2, i, ½+½i}`.
pub fn homogeneity_residual(obs: &HomogeneousObservable, psi: &[C64]) -> Result<f64> {
    let a = obs.value(psi)?;
    let n = crate::hilbert::norm_sqr(psi);
    let mut worst: f64 = 0.0;
    for lambda in [C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(0.5, 0.5)] {
        let scaled: Vec<C64> = psi.iter().map(|z| z * lambda).collect();
        let b = obs.value(&scaled)?;
        let target = lambda.norm_sqr() * a;
        // relative to the natural scale |λ|²⟨ψ|ψ⟩ when A itself is tiny
        let scale = target.abs().max(lambda.norm_sqr() * n);
        worst = worst.max((b - target).abs() / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
