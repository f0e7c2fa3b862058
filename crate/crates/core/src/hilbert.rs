//! Finite-dimensional complex linear algebra: states, density matrices,
//! Hermitian operators, tensor products, partial traces and local basis
//! rotations.
//!
//! Tensor factors are ordered row-major: in a state with dims `[d0, d1, ...]`
//! the first factor's index varies slowest, so amplitude `ψ_{a,r}` of a
//! bipartite state sits at position `a * d1 + r`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tolerances;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// A state vector together with its tensor-factor dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    dims: Vec<usize>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidState(format!(
                "factor dimensions must be positive, got {dims:?}"
            )));
        }
        let total: usize = dims.iter().product();
        if total != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Single-factor state.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let n = amplitudes.len();
        Self::new(amplitudes, vec![n])
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidState(format!("basis index {k} >= {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[k] = ONE;
        Self::from_amplitudes(amps)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Fails on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= 0.0 {
            return Err(Error::InvalidState("zero vector cannot be normalized".into()));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|z| z * c).collect(),
            dims: self.dims.clone(),
        }
    }

    /// Same ray, with the largest-modulus component made real and non-negative.
    pub fn gauge_fixed(&self) -> Self {
        let mut best = 0;
        let mut best_abs = -1.0;
        for (k, z) in self.amplitudes.iter().enumerate() {
            // strict comparison keeps the first index on ties
            if z.norm() > best_abs + 1e-15 {
                best = k;
                best_abs = z.norm();
            }
        }
        if best_abs <= 0.0 {
            return self.clone();
        }
        let phase = self.amplitudes[best].conj() / best_abs;
        self.scaled(phase)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Projective fidelity `|⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        let ov = self.inner(other)?;
        Ok(ov.norm_sqr() / (self.norm_sqr() * other.norm_sqr()))
    }

    /// Unnormalized projector `|ψ⟩⟨ψ|` carrying the same factor dims.
    pub fn projector(&self) -> DensityMatrix {
        let n = self.len();
        let m = CMatrix::from_fn(n, n, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        DensityMatrix {
            entries: m,
            dims: self.dims.clone(),
        }
    }

    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        Self::new(self.amplitudes.clone(), dims)
    }
}

/// A density matrix with tensor-factor dimensions. Validated on construction:
/// Hermitian within 1e−12, positive trace, minimum eigenvalue ≥ −1e−10.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let total: usize = dims.iter().product();
        if total != n || dims.contains(&0) {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: n,
            });
        }
        let residual = hermitian_residual(&entries);
        if residual > tolerances::HERMITIAN {
            return Err(Error::NotHermitian {
                residual,
                tolerance: tolerances::HERMITIAN,
            });
        }
        let tr = entries.trace();
        if !(tr.re > 0.0) || tr.im.abs() > tolerances::HERMITIAN * n as f64 {
            return Err(Error::InvalidState(format!(
                "trace must be real and positive, got {tr}"
            )));
        }
        let min = min_eigenvalue(&entries);
        if min < tolerances::POSITIVITY {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { entries, dims })
    }

    /// Single-factor density matrix.
    pub fn single(entries: CMatrix) -> Result<Self> {
        let n = entries.nrows();
        Self::new(entries, vec![n])
    }

    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0));
        Self::single(m)
    }

    pub(crate) fn from_parts_unchecked(entries: CMatrix, dims: Vec<usize>) -> Self {
        Self { entries, dims }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `Tr ρ²`.
    pub fn trace_sqr(&self) -> f64 {
        trace_product(&self.entries, &self.entries).re
    }

    pub fn normalized(&self) -> Self {
        let tr = self.trace();
        Self {
            entries: self.entries.map(|z| z / tr),
            dims: self.dims.clone(),
        }
    }
}

/// A Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
}

impl HermitianOperator {
    /// Exact construction: Hermitian within 1e−12.
    pub fn new(entries: CMatrix) -> Result<Self> {
        Self::with_tolerance(entries, tolerances::HERMITIAN)
    }

    pub fn with_tolerance(entries: CMatrix, tolerance: f64) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidState("operator must be square".into()));
        }
        let residual = hermitian_residual(&entries);
        if !(residual <= tolerance) {
            return Err(Error::NotHermitian { residual, tolerance });
        }
        Ok(Self { entries })
    }

    /// `(M + M†)/2` without a check. Callers gate the residual themselves.
    pub(crate) fn symmetrized(m: &CMatrix) -> Self {
        Self {
            entries: (m + m.adjoint()).map(|z| z * 0.5),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            entries: CMatrix::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO }),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: CMatrix::identity(n, n),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        mat_vec(&self.entries, psi)
    }

    /// Ascending real spectrum.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            entries: self.entries.map(|z| z * s),
        }
    }

    pub fn add(&self, other: &HermitianOperator) -> Self {
        Self {
            entries: &self.entries + &other.entries,
        }
    }
}

pub fn sigma1() -> HermitianOperator {
    HermitianOperator {
        entries: CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
    }
}

pub fn sigma2() -> HermitianOperator {
    HermitianOperator {
        entries: CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
    }
}

pub fn sigma3() -> HermitianOperator {
    HermitianOperator::diagonal(&[1.0, -1.0])
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `Σ conj(a_k) b_k`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn mat_vec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

/// `Tr(AB)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Entrywise `max |M − M†|`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Entrywise `max |U U† − 1|`.
pub fn unitary_residual(u: &CMatrix) -> f64 {
    let p = u * u.adjoint();
    let n = u.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn check_unitary(u: &CMatrix) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::InvalidState("unitary must be square".into()));
    }
    let residual = unitary_residual(u);
    if !(residual <= tolerances::UNITARY) {
        return Err(Error::NotUnitary {
            residual,
            tolerance: tolerances::UNITARY,
        });
    }
    Ok(())
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()).map(|z| z * 0.5);
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Kronecker product with the first factor slowest.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// `|a⟩ ⊗ |b⟩` with concatenated factor dims.
pub fn tensor_state(a: &StateVector, b: &StateVector) -> StateVector {
    let mut amps = Vec::with_capacity(a.len() * b.len());
    for x in a.amplitudes() {
        for y in b.amplitudes() {
            amps.push(x * y);
        }
    }
    let mut dims = a.dims().to_vec();
    dims.extend_from_slice(b.dims());
    StateVector { amplitudes: amps, dims }
}

/// Index bookkeeping for one factor inside a row-major product space.
#[derive(Clone, Copy, Debug)]
pub struct FactorLayout {
    pub dim: usize,
    pub stride: usize,
    pub rest: usize,
}

impl FactorLayout {
    pub fn new(dims: &[usize], slot: usize) -> Result<Self> {
        if slot >= dims.len() {
            return Err(Error::FactorIndex {
                index: slot,
                factors: dims.len(),
            });
        }
        let stride: usize = dims[slot + 1..].iter().product();
        let total: usize = dims.iter().product();
        Ok(Self {
            dim: dims[slot],
            stride,
            rest: total / dims[slot],
        })
    }

    /// Full index of (factor digit `a`, remaining multi-index `r`).
    #[inline]
    pub fn index(&self, a: usize, r: usize) -> usize {
        let high = r / self.stride;
        let low = r % self.stride;
        high * self.dim * self.stride + a * self.stride + low
    }
}

/// Reduced density matrix of factor `keep`, tracing out all other factors.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if dims.len() < 2 {
        return Err(Error::SingleFactor { factors: dims.len() });
    }
    let layout = FactorLayout::new(dims, keep)?;
    let m = rho.matrix();
    let out = CMatrix::from_fn(layout.dim, layout.dim, |a, b| {
        (0..layout.rest)
            .map(|r| m[(layout.index(a, r), layout.index(b, r))])
            .sum()
    });
    Ok(DensityMatrix::from_parts_unchecked(out, vec![layout.dim]))
}

/// Reduced density matrix of factor `keep` directly from a pure state.
pub fn reduced_density(psi: &StateVector, keep: usize) -> Result<DensityMatrix> {
    let dims = psi.dims();
    if dims.len() < 2 {
        return Err(Error::SingleFactor { factors: dims.len() });
    }
    let layout = FactorLayout::new(dims, keep)?;
    let v = psi.amplitudes();
    let out = CMatrix::from_fn(layout.dim, layout.dim, |a, b| {
        (0..layout.rest)
            .map(|r| v[layout.index(a, r)] * v[layout.index(b, r)].conj())
            .sum()
    });
    Ok(DensityMatrix::from_parts_unchecked(out, vec![layout.dim]))
}

/// `op` acting on factor `slot`, identity on the others.
pub fn embed_operator(op: &CMatrix, dims: &[usize], slot: usize) -> Result<CMatrix> {
    let layout = FactorLayout::new(dims, slot)?;
    if op.nrows() != layout.dim || op.ncols() != layout.dim {
        return Err(Error::DimensionMismatch {
            expected: layout.dim,
            got: op.nrows(),
        });
    }
    let total = layout.dim * layout.rest;
    let mut out = CMatrix::zeros(total, total);
    for r in 0..layout.rest {
        for a in 0..layout.dim {
            for b in 0..layout.dim {
                out[(layout.index(a, r), layout.index(b, r))] = op[(a, b)];
            }
        }
    }
    Ok(out)
}

/// Objects a local unitary can act on.
pub trait LocalUnitary: Sized {
    fn dims(&self) -> &[usize];
    fn apply_local(&self, u: &CMatrix, layout: FactorLayout) -> Self;
}

impl LocalUnitary for StateVector {
    fn dims(&self) -> &[usize] {
        StateVector::dims(self)
    }

    fn apply_local(&self, u: &CMatrix, layout: FactorLayout) -> Self {
        let v = self.amplitudes();
        let mut out = vec![ZERO; v.len()];
        for r in 0..layout.rest {
            for a in 0..layout.dim {
                let mut acc = ZERO;
                for b in 0..layout.dim {
                    acc += u[(a, b)] * v[layout.index(b, r)];
                }
                out[layout.index(a, r)] = acc;
            }
        }
        StateVector {
            amplitudes: out,
            dims: self.dims.clone(),
        }
    }
}

impl LocalUnitary for DensityMatrix {
    fn dims(&self) -> &[usize] {
        DensityMatrix::dims(self)
    }

    fn apply_local(&self, u: &CMatrix, layout: FactorLayout) -> Self {
        let total = layout.dim * layout.rest;
        let mut full = CMatrix::zeros(total, total);
        for r in 0..layout.rest {
            for a in 0..layout.dim {
                for b in 0..layout.dim {
                    full[(layout.index(a, r), layout.index(b, r))] = u[(a, b)];
                }
            }
        }
        let m = &full * &self.entries * full.adjoint();
        DensityMatrix::from_parts_unchecked(m, self.dims.clone())
    }
}

/// Applies `u` on factor `slot` and the identity elsewhere.
pub fn rotate_subsystem<T: LocalUnitary>(x: &T, u: &CMatrix, slot: usize) -> Result<T> {
    check_unitary(u)?;
    let layout = FactorLayout::new(x.dims(), slot)?;
    if u.nrows() != layout.dim {
        return Err(Error::DimensionMismatch {
            expected: layout.dim,
            got: u.nrows(),
        });
    }
    Ok(x.apply_local(u, layout))
}

/// Objects with a normalized expectation value.
pub trait Expectation {
    /// Unnormalized `⟨ψ|A|ψ⟩` or `Tr ρA`, and the normalization.
    fn raw_expectation(&self, op: &CMatrix) -> Result<(C64, f64)>;
}

impl Expectation for StateVector {
    fn raw_expectation(&self, op: &CMatrix) -> Result<(C64, f64)> {
        if op.nrows() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: op.nrows(),
            });
        }
        let av = mat_vec(op, self.amplitudes());
        Ok((inner(self.amplitudes(), &av), self.norm_sqr()))
    }
}

impl Expectation for DensityMatrix {
    fn raw_expectation(&self, op: &CMatrix) -> Result<(C64, f64)> {
        if op.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: op.nrows(),
            });
        }
        Ok((trace_product(&self.entries, op), self.trace()))
    }
}

/// `⟨ψ|Aψ⟩/⟨ψ|ψ⟩` or `Tr(ρA)/Tr ρ`.
pub fn expectation<T: Expectation>(x: &T, op: &HermitianOperator) -> Result<f64> {
    let (value, norm) = x.raw_expectation(op.matrix())?;
    if norm <= 0.0 {
        return Err(Error::InvalidState("zero norm".into()));
    }
    let v = value / norm;
    if v.im.abs() > tolerances::REAL_RESIDUAL {
        return Err(Error::ComplexResidual { residual: v.im.abs() });
    }
    Ok(v.re)
}

/// Normalized Haar-like random state (Gaussian amplitudes).
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> StateVector {
    let total: usize = dims.iter().product();
    let amps: Vec<C64> = (0..total)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let s = StateVector {
        amplitudes: amps,
        dims: dims.to_vec(),
    };
    s.normalized().expect("Gaussian vector is nonzero")
}

/// Haar random unitary via QR of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn tensor_of_basis_states() {
        let up = StateVector::from_real(&[1.0, 0.0]).unwrap();
        let down = StateVector::from_real(&[0.0, 1.0]).unwrap();
        let s = tensor_state(&up, &down);
        assert_eq!(s.dims(), &[2, 2]);
        assert_eq!(s.amplitudes(), &[ZERO, ONE, ZERO, ZERO]);
        let s = tensor_state(&up, &up);
        assert_eq!(s.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
    }

    #[test]
    fn tensor_norm_is_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = random_state(&mut rng, &[3]).scaled(c(1.7, 0.3));
            let b = random_state(&mut rng, &[2]).scaled(c(0.4, -0.9));
            let s = tensor_state(&a, &b);
            // oracle: sum of |a_i b_j|^2 by explicit double loop
            let mut direct = 0.0;
            for x in a.amplitudes() {
                for y in b.amplitudes() {
                    direct += (x * y).norm_sqr();
                }
            }
            assert!((s.norm() - a.norm() * b.norm()).abs() < 1e-12);
            assert!((s.norm_sqr() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_correlated_state() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::new(vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)], vec![2, 2]).unwrap();
        for keep in 0..2 {
            let r = partial_trace(&psi.projector(), keep).unwrap();
            assert!((r.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
            assert!((r.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
            assert!(r.matrix()[(0, 1)].norm() < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_singlet_is_maximally_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::new(vec![ZERO, c(h, 0.0), c(-h, 0.0), ZERO], vec![2, 2]).unwrap();
        let r = partial_trace(&psi.projector(), 1).unwrap();
        let target = CMatrix::identity(2, 2).map(|z| z * 0.5);
        assert!((r.matrix() - target).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_single_factor() {
        let rho = DensityMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(partial_trace(&rho, 0), Err(Error::SingleFactor { .. })));
    }

    #[test]
    fn product_state_reduces_to_pure_projectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_state(&mut rng, &[2]);
            let b = random_state(&mut rng, &[3]);
            let rho = tensor_state(&a, &b).projector();
            let ra = partial_trace(&rho, 0).unwrap();
            let rb = partial_trace(&rho, 1).unwrap();
            assert!((ra.matrix() - a.projector().matrix()).norm() < 1e-12);
            assert!((rb.matrix() - b.projector().matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_by_identity_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random_state(&mut rng, &[2, 3]);
        let out = rotate_subsystem(&psi, &CMatrix::identity(3, 3), 1).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn rotation_reproduces_primed_decomposition() {
        // |1>_2 = (|1'> + |2'>)/√2, |2>_2 = (|1'> − |2'>)/√2: primed coordinates
        // are obtained with the Hadamard matrix acting on the second factor.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (p11, p22) = (c(0.6, 0.0), c(0.0, 0.8));
        let psi = StateVector::new(vec![p11, ZERO, ZERO, p22], vec![2, 2]).unwrap();
        let had = CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]);
        let out = rotate_subsystem(&psi, &had, 1).unwrap();
        let a = out.amplitudes();
        // Φ^(1)' = (ψ11|1> + ψ22|2>)/√2 at r' = 1, Φ^(2)' = (ψ11|1> − ψ22|2>)/√2 at r' = 2
        assert!((a[0] - p11 * h).norm() < 1e-15);
        assert!((a[2] - p22 * h).norm() < 1e-15);
        assert!((a[1] - p11 * h).norm() < 1e-15);
        assert!((a[3] + p22 * h).norm() < 1e-15);
    }

    #[test]
    fn non_unitary_rotation_is_rejected_with_residual() {
        let psi = StateVector::new(vec![ONE, ZERO, ZERO, ZERO], vec![2, 2]).unwrap();
        let bad = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        match rotate_subsystem(&psi, &bad, 0) {
            Err(Error::NotUnitary { residual, .. }) => assert!(residual > 0.5),
            other => panic!("expected NotUnitary, got {other:?}"),
        }
    }

    #[test]
    fn expectation_examples() {
        let up = StateVector::from_real(&[1.0, 0.0]).unwrap();
        assert_eq!(expectation(&up, &sigma3()).unwrap(), 1.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::from_real(&[h, h]).unwrap();
        assert!(expectation(&plus, &sigma3()).unwrap().abs() < 1e-15);
        let rho = DensityMatrix::from_real(&[&[0.75, 0.0], &[0.0, 0.25]]).unwrap();
        assert!((expectation(&rho, &sigma3()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let up = StateVector::from_real(&[1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            expectation(&up, &sigma3()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn density_matrix_validation() {
        let bad = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(DensityMatrix::single(bad), Err(Error::NotHermitian { .. })));
        let neg = DensityMatrix::from_real(&[&[1.2, 0.0], &[0.0, -0.2]]);
        assert!(matches!(neg, Err(Error::NotPositive { .. })));
    }

    #[test]
    fn gauge_makes_largest_component_real() {
        let s = StateVector::from_amplitudes(vec![c(0.1, 0.2), c(0.0, -0.9)]).unwrap();
        let g = s.gauge_fixed();
        assert!(g.amplitudes()[1].im.abs() < 1e-15);
        assert!(g.amplitudes()[1].re > 0.0);
        assert!((s.fidelity(&g).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..5 {
            assert!(unitary_residual(&random_unitary(&mut rng, n)) < 1e-13);
        }
    }

    #[test]
    fn embedded_operator_matches_kron() {
        let s1 = sigma1().into_matrix();
        let id3 = CMatrix::identity(3, 3);
        assert_eq!(embed_operator(&s1, &[2, 3], 0).unwrap(), kron(&s1, &id3));
        let s3 = sigma3().into_matrix();
        assert_eq!(embed_operator(&s3, &[3, 2], 1).unwrap(), kron(&id3, &s3));
    }
}
