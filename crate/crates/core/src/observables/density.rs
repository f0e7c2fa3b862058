//! Functionals of a (reduced, unnormalized) density matrix.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hilbert::{hermitian_residual, trace_product, CMatrix, C64};
use crate::tolerances;

type ValueFn = Arc<dyn Fn(&CMatrix) -> f64 + Send + Sync>;
type DerivFn = Arc<dyn Fn(&CMatrix) -> CMatrix + Send + Sync>;

/// A real functional `A(ρ)`, homogeneous of degree one in `ρ`, with its
/// derivative `D(ρ)` defined by `δA = Tr(D δρ)`.
///
/// Lifted to a pure state of a larger system through the reduced density
/// matrix, its Wirtinger gradient is `(D ⊗ 1)ψ`; on a density matrix it
/// generates `i ρ̇ = [D(ρ), ρ]`.
#[derive(Clone)]
pub struct DensityFunctional {
    label: String,
    dim: usize,
    value: ValueFn,
    derivative: DerivFn,
}

impl fmt::Debug for DensityFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityFunctional")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .finish()
    }
}

fn hermitian(m: &CMatrix) -> Result<()> {
    let residual = hermitian_residual(m);
    if residual > tolerances::HERMITIAN {
        return Err(Error::NotHermitian {
            residual,
            tolerance: tolerances::HERMITIAN,
        });
    }
    Ok(())
}

fn trace(m: &CMatrix) -> f64 {
    m.trace().re
}

impl DensityFunctional {
    pub fn new<V, D>(label: impl Into<String>, dim: usize, value: V, derivative: D) -> Self
    where
        V: Fn(&CMatrix) -> f64 + Send + Sync + 'static,
        D: Fn(&CMatrix) -> CMatrix + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            dim,
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    /// `Tr ρX`.
    pub fn linear(x: CMatrix) -> Result<Self> {
        hermitian(&x)?;
        let dim = x.nrows();
        let xv = x.clone();
        Ok(Self::new(
            "Tr ρX",
            dim,
            move |r| trace_product(r, &xv).re,
            move |_| x.clone(),
        ))
    }

    /// `(Tr ρÊ)² / Tr ρ`.
    pub fn squared_mean(e: CMatrix) -> Result<Self> {
        hermitian(&e)?;
        let dim = e.nrows();
        let ev = e.clone();
        Ok(Self::new(
            "(Tr ρÊ)²/Tr ρ",
            dim,
            move |r| {
                let t = trace_product(r, &ev).re;
                t * t / trace(r)
            },
            move |r| {
                let n = trace(r);
                let t = trace_product(r, &e).re;
                let id = CMatrix::identity(dim, dim);
                e.map(|z| z * (2.0 * t / n)) - id.map(|z| z * (t * t / (n * n)))
            },
        ))
    }

    /// `(Tr ρÊ)² Tr ρ² / (Tr ρ)³`: the squared mean weighted by the purity.
    pub fn purity_weighted(e: CMatrix) -> Result<Self> {
        hermitian(&e)?;
        let dim = e.nrows();
        let ev = e.clone();
        Ok(Self::new(
            "(Tr ρÊ)² Tr ρ²/(Tr ρ)³",
            dim,
            move |r| {
                let n = trace(r);
                let t = trace_product(r, &ev).re;
                let p = trace_product(r, r).re;
                t * t * p / (n * n * n)
            },
            move |r| {
                let n = trace(r);
                let t = trace_product(r, &e).re;
                let p = trace_product(r, r).re;
                let n3 = n * n * n;
                let id = CMatrix::identity(dim, dim);
                e.map(|z| z * (2.0 * t * p / n3)) + r.map(|z| z * (2.0 * t * t / n3))
                    - id.map(|z| z * (3.0 * t * t * p / (n3 * n)))
            },
        ))
    }

    pub fn plus(&self, other: &DensityFunctional) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let (a, b) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        Ok(Self::new(
            format!("{} + {}", self.label, other.label),
            self.dim,
            move |r| (a.value)(r) + (b.value)(r),
            move |r| (a2.derivative)(r) + (b2.derivative)(r),
        ))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let (a, a2) = (self.clone(), self.clone());
        Self::new(
            format!("{c}·{}", self.label),
            self.dim,
            move |r| c * (a.value)(r),
            move |r| (a2.derivative)(r).map(|z: C64| z * c),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, rho: &CMatrix) -> f64 {
        (self.value)(rho)
    }

    pub fn derivative(&self, rho: &CMatrix) -> CMatrix {
        (self.derivative)(rho)
    }
}
