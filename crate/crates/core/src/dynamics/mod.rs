//! Nonlinear Schrödinger dynamics `i dψ/dt = Ĥ(ψ, ψ̄)ψ`, the neoclassical
//! Bloch equations and the special functions used by closed-form solutions.

mod bloch;
mod elliptic;
pub mod rk4;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use bloch::{bloch_rhs, integrate_bloch, integrate_bloch_general, BlochParams, BlochState, BlochTrajectory};
pub use elliptic::{complete_elliptic_k, jacobi_elliptic};

use crate::error::{Error, Result};
use crate::hilbert::{
    hermitian_residual, inner, mat_vec, norm_sqr, sigma1, sigma2, sigma3, CMatrix, HermitianOperator, StateVector, C64,
};
use crate::observables::{Evaluator, HomogeneousObservable};
use crate::tolerances;
pub use rk4::{rk4_step, step_grid, OdeState};

/// The right-hand side `Ĥ(ψ)ψ` of a nonlinear Schrödinger equation.
pub trait Generator {
    fn apply(&self, psi: &[C64]) -> Result<Vec<C64>>;

    /// Hamiltonian function `H(ψ)` when the flow has one.
    fn energy(&self, _psi: &[C64]) -> Option<f64> {
        None
    }

    /// `Ĥ(ψ)`, used for the default step heuristic.
    fn operator(&self, psi: &[C64]) -> Result<CMatrix>;
}

/// Hamilton equations of a homogeneous observable: `Ĥ(ψ)ψ = ∂H/∂ψ̄`.
pub struct HamiltonianFlow<'a> {
    pub hamiltonian: &'a HomogeneousObservable,
}

impl<'a> HamiltonianFlow<'a> {
    pub fn new(hamiltonian: &'a HomogeneousObservable) -> Self {
        Self { hamiltonian }
    }
}

impl Generator for HamiltonianFlow<'_> {
    fn apply(&self, psi: &[C64]) -> Result<Vec<C64>> {
        self.hamiltonian.gradient(psi)
    }

    fn energy(&self, psi: &[C64]) -> Option<f64> {
        self.hamiltonian.value(psi).ok()
    }

    fn operator(&self, psi: &[C64]) -> Result<CMatrix> {
        self.hamiltonian.operator(psi).map(HermitianOperator::into_matrix)
    }
}

pub type OperatorBuilder = Arc<dyn Fn(&[C64]) -> Result<CMatrix> + Send + Sync>;

/// A flow given by a state-dependent matrix. Every evaluation is checked for
/// Hermiticity within `1e−8`.
#[derive(Clone)]
pub struct OperatorFlow {
    builder: OperatorBuilder,
    energy: Option<Evaluator>,
}

impl OperatorFlow {
    pub fn new<F>(builder: F) -> Self
    where
        F: Fn(&[C64]) -> Result<CMatrix> + Send + Sync + 'static,
    {
        Self {
            builder: Arc::new(builder),
            energy: None,
        }
    }

    /// Records this function as the energy series.
    pub fn with_energy<F>(mut self, energy: F) -> Self
    where
        F: Fn(&[C64]) -> f64 + Send + Sync + 'static,
    {
        self.energy = Some(Arc::new(energy));
        self
    }
}

impl Generator for OperatorFlow {
    fn apply(&self, psi: &[C64]) -> Result<Vec<C64>> {
        Ok(mat_vec(&self.operator(psi)?, psi))
    }

    fn energy(&self, psi: &[C64]) -> Option<f64> {
        self.energy.as_ref().map(|e| e(psi))
    }

    fn operator(&self, psi: &[C64]) -> Result<CMatrix> {
        let h = (self.builder)(psi)?;
        let residual = hermitian_residual(&h);
        if !(residual <= tolerances::HERMITIAN_NUMERIC) {
            return Err(Error::NotHermitian {
                residual,
                tolerance: tolerances::HERMITIAN_NUMERIC,
            });
        }
        Ok(h)
    }
}

pub type Recorder = Arc<dyn Fn(&StateVector) -> f64 + Send + Sync>;

/// Integration settings for [`integrate_nls`].
#[derive(Clone)]
pub struct NlsOptions {
    pub t_end: f64,
    /// `None` selects [`default_dt`].
    pub dt: Option<f64>,
    /// Allowed `|n(t) − n(0)|` per step taken.
    pub norm_budget_per_step: f64,
    /// Extra series recorded at every step.
    pub recorders: Vec<(String, Recorder)>,
    pub frame: Frame,
}

/// Integration frame. Every Ĥ built from a homogeneous observable satisfies
/// `Ĥ(e^{iθ}ψ) = Ĥ(ψ)`, so the flow of `Ĥ − c·1` differs from the flow of `Ĥ`
/// only by the global phase `e^{−ict}`, which is restored exactly on output.
/// Centring the spectrum keeps the fastest phase rotation small.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Frame {
    /// `c` = midpoint of the frequency range used by [`default_dt`].
    Centred,
    Fixed(f64),
    /// Integrate `Ĥ` as given.
    Lab,
}

impl NlsOptions {
    pub fn new(t_end: f64) -> Self {
        Self {
            t_end,
            dt: None,
            norm_budget_per_step: tolerances::NORM_DRIFT_PER_STEP,
            recorders: Vec::new(),
            frame: Frame::Centred,
        }
    }

    pub fn frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn record<F>(mut self, name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&StateVector) -> f64 + Send + Sync + 'static,
    {
        self.recorders.push((name.into(), Arc::new(f)));
        self
    }
}

/// Time-ordered states with recorded real series (`norm`, `energy` when the
/// flow has a Hamiltonian function, and any requested expectations).
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub series: BTreeMap<String, Vec<f64>>,
}

impl Trajectory {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.get(name).map(Vec::as_slice)
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// `max_t |x(t) − x(0)|` of a recorded series.
    pub fn drift(&self, name: &str) -> Option<f64> {
        let s = self.series.get(name)?;
        let first = *s.first()?;
        Some(s.iter().map(|x| (x - first).abs()).fold(0.0, f64::max))
    }
}

/// Range covered by the diagonal values of `Ĥ(ψ0)` and the instantaneous
/// component frequencies `Re(ψ̄_k (Ĥψ)_k)/|ψ_k|²`.
pub(crate) fn frequency_range<G: Generator + ?Sized>(generator: &G, psi0: &[C64]) -> Result<(f64, f64)> {
    let ev = HermitianOperator::symmetrized(&generator.operator(psi0)?).eigenvalues();
    let (mut lo, mut hi) = (ev[0], ev[ev.len() - 1]);
    let g = generator.apply(psi0)?;
    let n = norm_sqr(psi0);
    for (p, gk) in psi0.iter().zip(&g) {
        if p.norm_sqr() > 1e-12 * n {
            let w = (p.conj() * gk).re / p.norm_sqr();
            lo = lo.min(w);
            hi = hi.max(w);
        }
    }
    Ok((lo, hi))
}

/// Default step: 1/200 of the shortest period `2π/(ω_max − ω_min)` over the
/// diagonal values of `Ĥ(ψ0)` and the component frequencies, or `2π/max|ω|`
/// when these coincide.
pub fn default_dt<G: Generator + ?Sized>(generator: &G, psi0: &[C64]) -> Result<f64> {
    let (lo, hi) = frequency_range(generator, psi0)?;
    let spread = hi - lo;
    let scale = lo.abs().max(hi.abs());
    let omega = if spread > 1e-9 * scale.max(1.0) { spread } else { scale };
    if omega <= 0.0 {
        return Ok(0.01);
    }
    Ok(2.0 * std::f64::consts::PI / omega / 200.0)
}

/// Fixed-step RK4 integration of `i dψ/dt = Ĥ(ψ)ψ`.
///
/// The norm is never renormalized. Its drift is checked after every step
/// against `norm_budget_per_step · steps_taken`; exceeding it aborts with the
/// drift profile in the error.
pub fn integrate_nls<G: Generator + ?Sized>(
    generator: &G,
    psi0: &StateVector,
    opts: &NlsOptions,
) -> Result<Trajectory> {
    if !(opts.t_end > 0.0) || !opts.t_end.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t_end".into(),
            detail: format!("must be positive, got {}", opts.t_end),
        });
    }
    let n0 = psi0.norm_sqr();
    if !(n0 > 0.0) {
        return Err(Error::InvalidState("initial state has zero norm".into()));
    }
    let dt = match opts.dt {
        Some(dt) if dt > 0.0 && dt.is_finite() => dt,
        Some(dt) => {
            return Err(Error::InvalidParameter {
                name: "dt".into(),
                detail: format!("must be positive, got {dt}"),
            })
        }
        None => default_dt(generator, psi0.amplitudes())?,
    };
    let (steps, dt) = step_grid(opts.t_end, dt);
    let shift = match opts.frame {
        Frame::Lab => 0.0,
        Frame::Fixed(c) => c,
        Frame::Centred => {
            let (lo, hi) = frequency_range(generator, psi0.amplitudes())?;
            0.5 * (lo + hi)
        }
    };
    let dims = psi0.dims().to_vec();
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        series: BTreeMap::new(),
    };
    let has_energy = generator.energy(psi0.amplitudes()).is_some();
    let record = |traj: &mut Trajectory, t: f64, psi: &[C64]| -> Result<()> {
        let phase = C64::from_polar(1.0, -shift * t);
        let state = StateVector::new(psi.iter().map(|z| z * phase).collect(), dims.clone())?;
        traj.series.entry("norm".into()).or_default().push(state.norm_sqr());
        if has_energy {
            let e = generator.energy(state.amplitudes()).unwrap_or(f64::NAN);
            traj.series.entry("energy".into()).or_default().push(e);
        }
        for (name, f) in &opts.recorders {
            traj.series.entry(name.clone()).or_default().push(f(&state));
        }
        traj.times.push(t);
        traj.states.push(state);
        Ok(())
    };
    let mut rhs = |_t: f64, psi: &Vec<C64>| -> Result<Vec<C64>> {
        let g = generator.apply(psi)?;
        Ok(g.iter()
            .zip(psi)
            .map(|(gk, pk)| (gk - pk * shift) * C64::new(0.0, -1.0))
            .collect())
    };
    let mut psi = psi0.amplitudes().to_vec();
    record(&mut traj, 0.0, &psi)?;
    for k in 0..steps {
        psi = rk4_step(&mut rhs, k as f64 * dt, &psi, dt)?;
        let t = (k + 1) as f64 * dt;
        let drift = (norm_sqr(&psi) - n0).abs();
        let budget = opts.norm_budget_per_step * (k + 1) as f64;
        if !(drift <= budget) {
            return Err(Error::NormDrift {
                drift,
                budget,
                time: t,
                step: k + 1,
            });
        }
        record(&mut traj, t, &psi)?;
    }
    Ok(traj)
}

/// Closed-form solution for `H = Σ E_k|ψ_k|² + (Σ ε_k|ψ_k|²)²/n`:
/// `ψ_k(t) = ψ_k(0) exp[−i(E_k + 2⟨ε̂⟩ε_k − ⟨ε̂⟩²)t]`.
pub fn canonical_solution(energies: &[f64], eps: &[f64], psi0: &StateVector, t: f64) -> Result<StateVector> {
    let n = psi0.len();
    if energies.len() != n || eps.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: energies.len().min(eps.len()),
        });
    }
    let amps = psi0.amplitudes();
    let mean = amps.iter().zip(eps).map(|(z, e)| e * z.norm_sqr()).sum::<f64>() / psi0.norm_sqr();
    let out = (0..n)
        .map(|k| {
            let omega = energies[k] + 2.0 * mean * eps[k] - mean * mean;
            amps[k] * C64::from_polar(1.0, -omega * t)
        })
        .collect();
    StateVector::new(out, psi0.dims().to_vec())
}

fn mean(psi: &[C64], op: &CMatrix) -> f64 {
    inner(psi, &mat_vec(op, psi)).re / norm_sqr(psi)
}

/// `Ĥ(ψ) = Ĥ_b − ½ε⟨σ3⟩²·1 − (A/4)⟨σ2⟩σ1 + (A/4)⟨σ1⟩σ2 + ε⟨σ3⟩σ3`
/// for a two-level system with base operator `Ĥ_b` (typically `E·1`).
pub fn neo_hamiltonian(a: f64, eps: f64, base: &HermitianOperator) -> Result<OperatorFlow> {
    if base.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: base.dim(),
        });
    }
    let (s1, s2, s3) = (sigma1().into_matrix(), sigma2().into_matrix(), sigma3().into_matrix());
    let b = base.matrix().clone();
    let b_energy = b.clone();
    let s3e = s3.clone();
    Ok(OperatorFlow::new(move |psi: &[C64]| {
        let (m1, m2, m3) = (mean(psi, &s1), mean(psi, &s2), mean(psi, &s3));
        let id = CMatrix::identity(2, 2);
        Ok(
            &b - id.map(|z| z * (0.5 * eps * m3 * m3)) - s1.map(|z| z * (0.25 * a * m2))
                + s2.map(|z| z * (0.25 * a * m1))
                + s3.map(|z| z * (eps * m3)),
        )
    })
    .with_energy(move |psi: &[C64]| {
        let m3 = mean(psi, &s3e);
        inner(psi, &mat_vec(&b_energy, psi)).re + 0.5 * eps * m3 * m3 * norm_sqr(psi)
    }))
}

/// `Ĥ(ψ) = Ĥ0 + ⟨Â⟩B̂ − ⟨B̂⟩Â`: a (0,0)-homogeneous flow whose expectation
/// `⟨ψ|Ĥψ⟩ = ⟨ψ|Ĥ0ψ⟩` is not its Hamiltonian function.
pub fn ab_minus_ba(h0: &HermitianOperator, a: &HermitianOperator, b: &HermitianOperator) -> Result<OperatorFlow> {
    let d = h0.dim();
    for op in [a, b] {
        if op.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: op.dim(),
            });
        }
    }
    let (h0, a, b) = (h0.matrix().clone(), a.matrix().clone(), b.matrix().clone());
    Ok(OperatorFlow::new(move |psi: &[C64]| {
        let (ma, mb) = (mean(psi, &a), mean(psi, &b));
        Ok(&h0 + b.map(|z| z * ma) - a.map(|z| z * mb))
    }))
}

/// Bloch vector `(⟨σ1⟩, ⟨σ2⟩, ⟨σ3⟩)` of a normalized-or-not two-level state.
pub fn spin_vector(psi: &[C64]) -> [f64; 3] {
    let n = norm_sqr(psi);
    let c = psi[0].conj() * psi[1];
    [
        2.0 * c.re / n,
        2.0 * c.im / n,
        (psi[0].norm_sqr() - psi[1].norm_sqr()) / n,
    ]
}
