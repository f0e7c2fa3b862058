//! The *-product `A*B = Σ_m (∂A/∂ψ_m)(∂B/∂ψ̄_m) = ⟨ψ|ÂB̂ψ⟩`.
//!
//! Products of nonlinear observables are complex in general and the product is
//! not associative, so nested products are represented as complex functionals.

use std::sync::Arc;

use super::{numeric_wirtinger, HomogeneousObservable};
use crate::error::{Error, Result};
use crate::hilbert::{StateVector, C64};

/// A complex functional with Wirtinger derivatives.
pub trait Functional: Send + Sync {
    fn value(&self, psi: &[C64]) -> Result<C64>;

    /// `(∂F/∂ψ_m, ∂F/∂ψ̄_m)`.
    fn derivatives(&self, psi: &[C64]) -> Result<(Vec<C64>, Vec<C64>)>;
}

impl Functional for HomogeneousObservable {
    fn value(&self, psi: &[C64]) -> Result<C64> {
        HomogeneousObservable::value(self, psi).map(|v| C64::new(v, 0.0))
    }

    fn derivatives(&self, psi: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
        let g = self.gradient(psi)?;
        // A is real, so ∂A/∂ψ = conj(∂A/∂ψ̄)
        Ok((g.iter().map(|z| z.conj()).collect(), g))
    }
}

/// `A*B` as a functional in its own right, so that it can be nested.
#[derive(Clone)]
pub struct StarFunctional {
    a: Arc<dyn Functional>,
    b: Arc<dyn Functional>,
}

impl Functional for StarFunctional {
    fn value(&self, psi: &[C64]) -> Result<C64> {
        let (da, _) = self.a.derivatives(psi)?;
        let (_, db) = self.b.derivatives(psi)?;
        Ok(da.iter().zip(&db).map(|(x, y)| x * y).sum())
    }

    fn derivatives(&self, psi: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
        self.value(psi)?;
        let (d, dbar) = numeric_wirtinger(&|z: &[C64]| self.value(z).unwrap_or(C64::new(f64::NAN, f64::NAN)), psi);
        if d.iter().chain(&dbar).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("non-finite *-product derivative".into()));
        }
        Ok((d, dbar))
    }
}

pub fn star(a: Arc<dyn Functional>, b: Arc<dyn Functional>) -> StarFunctional {
    StarFunctional { a, b }
}

/// `(A*B)(ψ)`.
pub fn star_product(a: &HomogeneousObservable, b: &HomogeneousObservable, psi: &StateVector) -> Result<C64> {
    let ga = a.gradient(psi.amplitudes())?;
    let gb = b.gradient(psi.amplitudes())?;
    Ok(ga.iter().zip(&gb).map(|(x, y)| x.conj() * y).sum())
}
