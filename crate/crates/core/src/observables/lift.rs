//! Lifting a subsystem observable to a composite space.

use super::{DensityFunctional, HomogeneousObservable};
use crate::error::{Error, Result};
use crate::hilbert::{check_unitary, norm_sqr, CMatrix, FactorLayout, C64, ZERO};
use crate::tolerances::SLICE_NORM_FLOOR;

fn rest_transform(psi: &[C64], u: &CMatrix, layout: &FactorLayout, adjoint: bool) -> Vec<C64> {
    let mut out = vec![ZERO; psi.len()];
    for a in 0..layout.dim {
        for r in 0..layout.rest {
            let mut acc = ZERO;
            for rp in 0..layout.rest {
                let coeff = if adjoint { u[(rp, r)].conj() } else { u[(r, rp)] };
                acc += coeff * psi[layout.index(a, rp)];
            }
            out[layout.index(a, r)] = acc;
        }
    }
    out
}

fn slice(psi: &[C64], layout: &FactorLayout, r: usize) -> Vec<C64> {
    (0..layout.dim).map(|a| psi[layout.index(a, r)]).collect()
}

/// Weinberg's composite form `Σ_r A(Φ^(r))`, where `Φ^(r)` is the slice of
/// `(1 ⊗ U†)ψ` at rest index `r`. `rest_basis` acts on the combined index of
/// all factors other than `sub_slot`. Slices with `‖Φ‖² < 1e−14` contribute
/// nothing.
pub fn weinberg_lift(
    sub: &HomogeneousObservable,
    dims: &[usize],
    sub_slot: usize,
    rest_basis: &CMatrix,
) -> Result<HomogeneousObservable> {
    let layout = FactorLayout::new(dims, sub_slot)?;
    if let Some(d) = sub.dim() {
        if d != layout.dim {
            return Err(Error::DimensionMismatch {
                expected: layout.dim,
                got: d,
            });
        }
    }
    if rest_basis.nrows() != layout.rest {
        return Err(Error::DimensionMismatch {
            expected: layout.rest,
            got: rest_basis.nrows(),
        });
    }
    check_unitary(rest_basis)?;
    let total = layout.dim * layout.rest;
    let (sub_v, u_v) = (sub.clone(), rest_basis.clone());
    let (sub_g, u_g) = (sub.clone(), rest_basis.clone());
    let eval = move |psi: &[C64]| {
        let primed = rest_transform(psi, &u_v, &layout, true);
        (0..layout.rest)
            .map(|r| {
                let phi = slice(&primed, &layout, r);
                if norm_sqr(&phi) < SLICE_NORM_FLOOR {
                    0.0
                } else {
                    sub_v.value(&phi).unwrap_or(f64::NAN)
                }
            })
            .sum()
    };
    let grad = move |psi: &[C64]| {
        let primed = rest_transform(psi, &u_g, &layout, true);
        let mut g = vec![ZERO; primed.len()];
        for r in 0..layout.rest {
            let phi = slice(&primed, &layout, r);
            if norm_sqr(&phi) < SLICE_NORM_FLOOR {
                continue;
            }
            let gs = sub_g
                .gradient(&phi)
                .unwrap_or_else(|_| vec![C64::new(f64::NAN, f64::NAN); layout.dim]);
            for (a, ga) in gs.into_iter().enumerate() {
                g[layout.index(a, r)] = ga;
            }
        }
        rest_transform(&g, &u_g, &layout, false)
    };
    let mut out = HomogeneousObservable::new(format!("weinberg[{}]", sub.label()), eval)
        .with_gradient(grad)
        .with_dim(total);
    out.params = sub.params().to_vec();
    Ok(out)
}

/// Reduced density matrix of factor `slot` from a flat amplitude vector.
pub(crate) fn reduced(psi: &[C64], layout: &FactorLayout) -> CMatrix {
    CMatrix::from_fn(layout.dim, layout.dim, |a, b| {
        (0..layout.rest)
            .map(|r| psi[layout.index(a, r)] * psi[layout.index(b, r)].conj())
            .sum()
    })
}

/// A density-matrix functional of factor `sub_slot`, as an observable on the
/// composite space: `ψ ↦ A(Tr_rest |ψ⟩⟨ψ|)` with gradient `(D ⊗ 1)ψ`.
pub fn polchinski_lift(f: &DensityFunctional, dims: &[usize], sub_slot: usize) -> Result<HomogeneousObservable> {
    let layout = FactorLayout::new(dims, sub_slot)?;
    if f.dim() != layout.dim {
        return Err(Error::DimensionMismatch {
            expected: layout.dim,
            got: f.dim(),
        });
    }
    let total = layout.dim * layout.rest;
    let (fv, fg) = (f.clone(), f.clone());
    let eval = move |psi: &[C64]| fv.value(&reduced(psi, &layout));
    let grad = move |psi: &[C64]| {
        let d = fg.derivative(&reduced(psi, &layout));
        let mut g = vec![ZERO; psi.len()];
        for r in 0..layout.rest {
            for a in 0..layout.dim {
                let mut acc = ZERO;
                for b in 0..layout.dim {
                    acc += d[(a, b)] * psi[layout.index(b, r)];
                }
                g[layout.index(a, r)] = acc;
            }
        }
        g
    };
    Ok(HomogeneousObservable::new(format!("polchinski[{}]", f.label()), eval)
        .with_gradient(grad)
        .with_guard(|z: &[C64]| (norm_sqr(z) <= 0.0).then(|| "zero vector".to_string()))
        .with_dim(total))
}
