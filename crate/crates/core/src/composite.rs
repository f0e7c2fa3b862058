//! Composite systems: Weinberg's slice-sum description against Polchinski's
//! density-matrix description, and the experiments that tell them apart.

use rayon::prelude::*;

use crate::dynamics::{integrate_nls, rk4_step, step_grid, Frame, HamiltonianFlow, NlsOptions, Trajectory};
use crate::error::{Error, Result};
use crate::hilbert::{
    check_unitary, reduced_density, sigma1, sigma2, sigma3, tensor_state, trace_product, CMatrix, DensityMatrix,
    HermitianOperator, StateVector, C64,
};
use crate::observables::{
    bilinear, canonical, polchinski_lift, weinberg_lift, DensityFunctional, HomogeneousObservable,
};
use crate::tolerances;

/// The two Polchinski-type extensions of `E·n + ε⟨σ3⟩²/n` to mixed states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolchinskiVariant {
    /// `(Tr ρε̂)²/Tr ρ`
    Plain,
    /// `(Tr ρε̂)²/Tr ρ · Tr ρ²/(Tr ρ)²`
    PurityWeighted,
}

impl PolchinskiVariant {
    pub fn functional(self, epshat: &HermitianOperator) -> Result<DensityFunctional> {
        match self {
            Self::Plain => DensityFunctional::squared_mean(epshat.matrix().clone()),
            Self::PurityWeighted => DensityFunctional::purity_weighted(epshat.matrix().clone()),
        }
    }
}

#[derive(Clone, Debug)]
pub enum CompositeDescription {
    /// Slice sum over the given basis of the rest.
    Weinberg {
        rest_basis: CMatrix,
    },
    Polchinski(PolchinskiVariant),
}

impl CompositeDescription {
    pub fn weinberg(rest_basis: CMatrix) -> Result<Self> {
        check_unitary(&rest_basis)?;
        Ok(Self::Weinberg { rest_basis })
    }
}

/// `ψ ↦ Σ_r H(Φ^(r))` on `C^{d_sub} ⊗ C^{d_rest}`, the slices taken in the
/// columns of `rest_basis`.
pub fn weinberg_composite(
    h_sub: &HomogeneousObservable,
    d_sub: usize,
    d_rest: usize,
    rest_basis: &CMatrix,
) -> Result<HomogeneousObservable> {
    if d_sub == 0 || d_rest == 0 {
        return Err(Error::InvalidParameter {
            name: "dims".into(),
            detail: format!("factor dimensions must be positive, got {d_sub} and {d_rest}"),
        });
    }
    weinberg_lift(h_sub, &[d_sub, d_rest], 0, rest_basis)
}

/// A constant of motion checked along a density-matrix flow.
pub struct Invariant {
    pub name: String,
    pub eval: Box<dyn Fn(&CMatrix) -> f64 + Send + Sync>,
    pub tolerance: f64,
}

impl Invariant {
    pub fn new<F>(name: impl Into<String>, tolerance: f64, eval: F) -> Self
    where
        F: Fn(&CMatrix) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Box::new(eval),
            tolerance,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DensityTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
}

impl DensityTrajectory {
    /// `ρ_kl(t)` as a series.
    pub fn entry(&self, k: usize, l: usize) -> Vec<C64> {
        self.states.iter().map(|r| r[(k, l)]).collect()
    }

    /// Largest entrywise distance between two trajectories on the same grid.
    pub fn max_distance(&self, other: &DensityTrajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (a - b).camax())
            .fold(0.0, f64::max)
    }
}

/// `i ρ̇ = [D(ρ), ρ]` for the derivative `D` of a density functional, by
/// fixed-step RK4. Every invariant is compared with its initial value after
/// each step.
pub fn density_flow(
    f: &DensityFunctional,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
    invariants: &[Invariant],
) -> Result<DensityTrajectory> {
    if rho0.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: rho0.dim(),
        });
    }
    if !(t_end > 0.0 && dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t_end/dt".into(),
            detail: format!("must be positive, got {t_end} and {dt}"),
        });
    }
    let (steps, dt) = step_grid(t_end, dt);
    let minus_i = C64::new(0.0, -1.0);
    let mut rhs = |_t: f64, rho: &CMatrix| -> Result<CMatrix> {
        let d = f.derivative(rho);
        Ok((&d * rho - rho * &d) * minus_i)
    };
    let initial: Vec<f64> = invariants.iter().map(|inv| (inv.eval)(rho0.matrix())).collect();
    let mut rho = rho0.matrix().clone();
    let mut out = DensityTrajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
    };
    out.times.push(0.0);
    out.states.push(rho.clone());
    for k in 0..steps {
        rho = rk4_step(&mut rhs, k as f64 * dt, &rho, dt)?;
        let t = (k + 1) as f64 * dt;
        for (inv, v0) in invariants.iter().zip(&initial) {
            let drift = ((inv.eval)(&rho) - v0).abs();
            if !(drift <= inv.tolerance) {
                return Err(Error::Unstable {
                    time: t,
                    detail: format!("{} drifted by {drift:.3e} (tolerance {:.1e})", inv.name, inv.tolerance),
                });
            }
        }
        out.times.push(t);
        out.states.push(rho.clone());
    }
    Ok(out)
}

/// The reduced flow of either Polchinski variant for a diagonal `ε̂`:
/// `ρ̇_kl = −2i (Tr ρε̂/Tr ρ)(ε_k − ε_l) ρ_kl`, times `Tr ρ²/(Tr ρ)²` for the
/// purity-weighted variant. `Tr ρ`, `Tr ρε̂` and `Tr ρ²` are checked after
/// every step.
pub fn polchinski_reduced_flow(
    variant: PolchinskiVariant,
    epshat: &HermitianOperator,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
) -> Result<DensityTrajectory> {
    let e = epshat.matrix();
    let off_diagonal = (0..e.nrows())
        .flat_map(|k| (0..e.ncols()).map(move |l| (k, l)))
        .filter(|(k, l)| k != l)
        .map(|(k, l)| e[(k, l)].norm())
        .fold(0.0, f64::max);
    if off_diagonal > tolerances::HERMITIAN {
        return Err(Error::InvalidParameter {
            name: "epshat".into(),
            detail: format!("must be diagonal, off-diagonal entry {off_diagonal:.3e}"),
        });
    }
    let f = variant.functional(epshat)?;
    let tol = tolerances::REDUCED_FLOW_INVARIANT;
    let ev = e.clone();
    let invariants = [
        Invariant::new("Tr ρ", tol, |r| r.trace().re),
        Invariant::new("Tr ρε̂", tol, move |r| trace_product(r, &ev).re),
        Invariant::new("Tr ρ²", tol, |r| trace_product(r, r).re),
    ];
    density_flow(&f, rho0, t_end, dt, &invariants)
}

/// Instantaneous rotation rate `Re([D, ρ]_kl / ρ_kl)` of the coherence `ρ_kl`,
/// so that `ρ_kl ∝ e^{−iωt}` locally.
pub fn coherence_rate(f: &DensityFunctional, rho: &CMatrix, k: usize, l: usize) -> f64 {
    let d = f.derivative(rho);
    let comm = &d * rho - rho * &d;
    (comm[(k, l)] / rho[(k, l)]).re
}

/// Frequency of `ρ_kl(t) ∝ e^{−iωt}` from the unwrapped phase.
pub fn coherence_frequency(traj: &DensityTrajectory, k: usize, l: usize) -> Result<f64> {
    let series = traj.entry(k, l);
    if series.iter().any(|z| z.norm() < 1e-300) {
        return Err(Error::InvalidState(format!(
            "coherence ρ_{k}{l} vanishes along the flow"
        )));
    }
    let mut phase = Vec::with_capacity(series.len());
    let mut acc = series[0].arg();
    phase.push(acc);
    for w in series.windows(2) {
        let d = (w[1] * w[0].conj()).arg();
        if d.abs() > 0.5 * std::f64::consts::PI {
            return Err(Error::TooCoarse(format!("coherence phase jumps {d:.3} rad per sample")));
        }
        acc += d;
        phase.push(acc);
    }
    Ok(-slope(&traj.times, &phase))
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Least-squares fit `y ≈ A sin(ωt + φ) + c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinusoidFit {
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub rms_residual: f64,
}

fn linear_fit(t: &[f64], y: &[f64], omega: f64) -> (f64, f64, f64, f64) {
    // normal equations for y ≈ a sin ωt + b cos ωt + c
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    let mut rhs = nalgebra::Vector3::<f64>::zeros();
    for (ti, yi) in t.iter().zip(y) {
        let row = nalgebra::Vector3::new((omega * ti).sin(), (omega * ti).cos(), 1.0);
        m += row * row.transpose();
        rhs += row * *yi;
    }
    let coef = m
        .try_inverse()
        .map(|inv| inv * rhs)
        .unwrap_or_else(|| nalgebra::Vector3::new(0.0, 0.0, y.iter().sum::<f64>() / y.len() as f64));
    let sse: f64 = t
        .iter()
        .zip(y)
        .map(|(ti, yi)| {
            let r = yi - coef[0] * (omega * ti).sin() - coef[1] * (omega * ti).cos() - coef[2];
            r * r
        })
        .sum();
    (coef[0], coef[1], coef[2], sse)
}

/// Frequency scan followed by golden-section refinement of the residual.
/// A signal below `1e−12` everywhere is reported with zero amplitude and
/// frequency.
pub fn fit_sinusoid(times: &[f64], values: &[f64]) -> Result<SinusoidFit> {
    if times.len() < 8 || times.len() != values.len() {
        return Err(Error::TooCoarse("a sinusoid fit needs at least eight samples".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.iter().all(|v| (v - mean).abs() < 1e-12) {
        return Ok(SinusoidFit {
            frequency: 0.0,
            amplitude: 0.0,
            phase: 0.0,
            offset: mean,
            rms_residual: 0.0,
        });
    }
    let duration = times[times.len() - 1] - times[0];
    let stride = (times.len() / 2000).max(1);
    let ts: Vec<f64> = times.iter().step_by(stride).copied().collect();
    let ys: Vec<f64> = values.iter().step_by(stride).copied().collect();
    let nyquist = std::f64::consts::PI / (ts[1] - ts[0]);
    let step = std::f64::consts::PI / (4.0 * duration);
    let count = (nyquist / step) as usize;
    let best = (1..=count)
        .into_par_iter()
        .map(|j| {
            let omega = j as f64 * step;
            (omega, linear_fit(&ts, &ys, omega).3)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(omega, _)| omega)
        .unwrap_or(step);
    let (mut a, mut b) = ((best - step).max(0.0), best + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if linear_fit(times, values, c).3 < linear_fit(times, values, d).3 {
            b = d;
        } else {
            a = c;
        }
    }
    let omega = 0.5 * (a + b);
    let (s, c, offset, sse) = linear_fit(times, values, omega);
    Ok(SinusoidFit {
        frequency: omega,
        amplitude: s.hypot(c),
        phase: c.atan2(s),
        offset,
        rms_residual: (sse / times.len() as f64).sqrt(),
    })
}

/// The sender's basis choice `[[α, β], [−β̄, ᾱ]]` and the two Hamiltonian
/// functions `H1 = E1·n`, `H2 = E2·n + ε⟨σ3⟩²/n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TelegraphParams {
    pub alpha: C64,
    pub beta: C64,
    pub eps: f64,
    pub e1: f64,
    pub e2: f64,
}

impl TelegraphParams {
    pub fn new(alpha: C64, beta: C64, eps: f64, e1: f64, e2: f64) -> Result<Self> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter {
                name: "alpha, beta".into(),
                detail: format!("|α|² + |β|² = {n}, expected 1"),
            });
        }
        Ok(Self {
            alpha,
            beta,
            eps,
            e1,
            e2,
        })
    }

    /// `X = |β|² − |α|²`
    pub fn x(&self) -> f64 {
        self.beta.norm_sqr() - self.alpha.norm_sqr()
    }

    pub fn sender_matrix(&self) -> CMatrix {
        let (a, b) = (self.alpha, self.beta);
        CMatrix::from_row_slice(2, 2, &[a, b, -b.conj(), a.conj()])
    }

    /// `⟨σ2⟩_II(t) = 2 Re(ᾱβ) sin(4ε(|α|² − |β|²)t)`.
    pub fn analytic_sigma2(&self, t: f64) -> f64 {
        2.0 * (self.alpha.conj() * self.beta).re * (-4.0 * self.eps * self.x() * t).sin()
    }

    /// `ψ(0) = (1/√2)[[−β, α], [−ᾱ, −β̄]]`, rows indexing subsystem I.
    pub fn initial_state(&self) -> Result<StateVector> {
        let (a, b) = (self.alpha, self.beta);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![-b * h, a * h, -a.conj() * h, -b.conj() * h], vec![2, 2])
    }
}

/// Numeric telegraph signal next to its analytic form.
#[derive(Clone, Debug)]
pub struct TelegraphReport {
    pub times: Vec<f64>,
    /// `⟨σ1⟩, ⟨σ2⟩, ⟨σ3⟩` of the receiving subsystem.
    pub sigma: [Vec<f64>; 3],
    pub analytic: Vec<f64>,
    pub linf_error: f64,
    pub fit: SinusoidFit,
    pub analytic_amplitude: f64,
    pub analytic_frequency: f64,
    pub norm_drift: f64,
    pub energy_drift: f64,
}

fn pauli_series(traj: &Trajectory, slot: usize) -> Result<[Vec<f64>; 3]> {
    let paulis = [sigma1(), sigma2(), sigma3()];
    let mut out: [Vec<f64>; 3] = Default::default();
    for s in &traj.states {
        let rho = reduced_density(s, slot)?;
        for (series, p) in out.iter_mut().zip(&paulis) {
            series.push(trace_product(rho.matrix(), p.matrix()).re / rho.trace());
        }
    }
    Ok(out)
}

fn telegraph_report(
    traj: &Trajectory,
    slot: usize,
    analytic: impl Fn(f64) -> f64,
    analytic_amplitude: f64,
    analytic_frequency: f64,
) -> Result<TelegraphReport> {
    let sigma = pauli_series(traj, slot)?;
    let analytic: Vec<f64> = traj.times.iter().map(|&t| analytic(t)).collect();
    let linf_error = sigma[1]
        .iter()
        .zip(&analytic)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let fit = fit_sinusoid(&traj.times, &sigma[1])?;
    Ok(TelegraphReport {
        times: traj.times.clone(),
        sigma,
        analytic,
        linf_error,
        fit,
        analytic_amplitude,
        analytic_frequency,
        norm_drift: traj.drift("norm").unwrap_or(0.0),
        energy_drift: traj.drift("energy").unwrap_or(0.0),
    })
}

/// `E1·n` on subsystem I plus the Weinberg slice sum of
/// `H2 = E2·n + ε⟨σ3⟩²/n` on subsystem II, slices taken in the standard basis
/// of subsystem I.
pub fn gisin_hamiltonian(e1: f64, e2: f64, eps: f64) -> Result<HomogeneousObservable> {
    let h1 = bilinear("E1·n", CMatrix::identity(4, 4).map(|z| z * e1))?;
    let h2 = weinberg_lift(&canonical(e2, e2, eps), &[2, 2], 1, &CMatrix::identity(2, 2))?;
    Ok(h1.plus(&h2))
}

/// Gisin's telegraph: the singlet written in the sender's basis evolves under
/// the Weinberg composite, and the nonlinear side's `⟨σ2⟩` carries the
/// sender's choice.
pub fn gisin_telegraph(p: &TelegraphParams, t_end: f64, dt: Option<f64>) -> Result<TelegraphReport> {
    let h = gisin_hamiltonian(p.e1, p.e2, p.eps)?;
    let mut opts = NlsOptions::new(t_end);
    opts.dt = dt;
    let traj = integrate_nls(&HamiltonianFlow::new(&h), &p.initial_state()?, &opts)?;
    let amplitude = 2.0 * (p.alpha.conj() * p.beta).re.abs();
    let frequency = (4.0 * p.eps * p.x()).abs();
    let pp = *p;
    telegraph_report(&traj, 1, move |t| pp.analytic_sigma2(t), amplitude, frequency)
}

/// The mobility telegraph: `ψ = (|1⟩⊗|φ⟩ + |2⟩⊗|φ'⟩)/√2` with
/// `φ = (cos θ, sin θ)`, `φ' = (sin θ, −cos θ)` and `⟨σ3⟩_φ = cos 2θ = s`.
/// Subsystem I is linear (`E1·n`), subsystem II carries `E2·n + ε⟨σ3⟩²/n` in
/// the Weinberg composite. The coherence of `ρ1` gives
/// `⟨σ2⟩ = √(1 − s²) sin(4εs t)` and `⟨σ1⟩ = ⟨σ3⟩ = 0`, the latter enforced
/// within `1e−9`.
pub fn mobility_telegraph(eps: f64, s: f64, e1: f64, e2: f64, t_end: f64, dt: Option<f64>) -> Result<TelegraphReport> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter {
            name: "s".into(),
            detail: format!("⟨σ3⟩ must lie in [−1, 1], got {s}"),
        });
    }
    let theta = 0.5 * s.acos();
    let (c, sn) = (theta.cos(), theta.sin());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi0 = StateVector::new(
        [c, sn, sn, -c].iter().map(|v| C64::new(v * h, 0.0)).collect(),
        vec![2, 2],
    )?;
    let ham = gisin_hamiltonian(e1, e2, eps)?;
    let mut opts = NlsOptions::new(t_end);
    opts.dt = dt;
    let traj = integrate_nls(&HamiltonianFlow::new(&ham), &psi0, &opts)?;
    let amplitude = (1.0 - s * s).sqrt();
    let nu = 4.0 * eps * s;
    let report = telegraph_report(&traj, 0, move |t| amplitude * (nu * t).sin(), amplitude, nu.abs())?;
    let side = report.sigma[0]
        .iter()
        .chain(&report.sigma[2])
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if side > 1e-9 {
        return Err(Error::Numerical(format!(
            "⟨σ1⟩ or ⟨σ3⟩ of the linear subsystem reached {side:.3e}"
        )));
    }
    Ok(report)
}

/// Hamiltonian function of subsystem II in either description.
#[derive(Clone)]
pub enum RemoteHamiltonian {
    Weinberg(HomogeneousObservable),
    Polchinski(DensityFunctional),
}

impl RemoteHamiltonian {
    fn lifted(&self, e1: f64) -> Result<HomogeneousObservable> {
        let h2 = match self {
            Self::Weinberg(h) => weinberg_lift(h, &[2, 2], 1, &CMatrix::identity(2, 2))?,
            Self::Polchinski(f) => polchinski_lift(f, &[2, 2], 1)?,
        };
        Ok(bilinear("E1·n", CMatrix::identity(4, 4).map(|z| z * e1))?.plus(&h2))
    }
}

#[derive(Clone, Debug)]
pub struct SignalingReport {
    pub times: Vec<f64>,
    /// `max |ρ_II(t) − ρ'_II(t)|` entrywise at each sample.
    pub deviation: Vec<f64>,
    pub max_deviation: f64,
}

/// `(|12⟩ − |21⟩)/√2` on two qubits.
pub fn singlet() -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::new(
        vec![
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
            C64::new(-h, 0.0),
            C64::new(0.0, 0.0),
        ],
        vec![2, 2],
    )
    .expect("valid singlet")
}

/// Evolves `psi0` and `(U ⊗ 1)psi0` under `E1·n + H2` and compares the
/// reduced density matrices of subsystem II along the way.
pub fn no_signaling_check(
    h2: &RemoteHamiltonian,
    e1: f64,
    psi0: &StateVector,
    remote_u: &CMatrix,
    t_end: f64,
    dt: Option<f64>,
) -> Result<SignalingReport> {
    if psi0.dims() != [2, 2] {
        return Err(Error::InvalidState(format!(
            "expected a two-qubit state, got dims {:?}",
            psi0.dims()
        )));
    }
    check_unitary(remote_u)?;
    let rotated = StateVector::new(
        crate::hilbert::mat_vec(
            &crate::hilbert::kron(remote_u, &CMatrix::identity(2, 2)),
            psi0.amplitudes(),
        ),
        vec![2, 2],
    )?;
    let h = h2.lifted(e1)?;
    let flow = HamiltonianFlow::new(&h);
    let dt = match dt {
        Some(dt) => dt,
        None => crate::dynamics::default_dt(&flow, psi0.amplitudes())?
            .min(crate::dynamics::default_dt(&flow, rotated.amplitudes())?),
    };
    // one frame for both runs, so that their truncation errors match exactly
    let (lo, hi) = crate::dynamics::frequency_range(&flow, psi0.amplitudes())?;
    let opts = NlsOptions::new(t_end).dt(dt).frame(Frame::Fixed(0.5 * (lo + hi)));
    let runs: Vec<Result<Trajectory>> = [psi0, &rotated]
        .par_iter()
        .map(|s| integrate_nls(&flow, s, &opts))
        .collect();
    let mut runs = runs.into_iter();
    let (a, b) = (runs.next().unwrap()?, runs.next().unwrap()?);
    let mut deviation = Vec::with_capacity(a.times.len());
    for (sa, sb) in a.states.iter().zip(&b.states) {
        let ra = reduced_density(sa, 1)?;
        let rb = reduced_density(sb, 1)?;
        deviation.push((ra.matrix() - rb.matrix()).camax());
    }
    let max_deviation = deviation.iter().copied().fold(0.0, f64::max);
    Ok(SignalingReport {
        times: a.times,
        deviation,
        max_deviation,
    })
}

/// Weights of the two preparation branches, the coupling `f` and the
/// interaction time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParadoxParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub f: f64,
    pub t: f64,
}

impl ParadoxParams {
    pub fn new(lambda1: f64, lambda2: f64, f: f64, t: f64) -> Result<Self> {
        let ok =
            (0.0..=1.0).contains(&lambda1) && (0.0..=1.0).contains(&lambda2) && (lambda1 + lambda2 - 1.0).abs() < 1e-12;
        if !ok {
            return Err(Error::InvalidParameter {
                name: "lambda".into(),
                detail: format!("need λ1, λ2 ∈ [0, 1] with λ1 + λ2 = 1, got {lambda1}, {lambda2}"),
            });
        }
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "t".into(),
                detail: format!("interaction time must be non-negative, got {t}"),
            });
        }
        Ok(Self { lambda1, lambda2, f, t })
    }

    /// `ρ0 = λ1·1/2 + λ2·[[3/4, 1/4], [1/4, 1/4]]`.
    pub fn initial_rho(&self) -> CMatrix {
        let (l1, l2) = (self.lambda1, self.lambda2);
        CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5 * l1 + 0.75 * l2, 0.0),
                C64::new(0.25 * l2, 0.0),
                C64::new(0.25 * l2, 0.0),
                C64::new(0.5 * l1 + 0.25 * l2, 0.0),
            ],
        )
    }

    /// `ρ(t) = (λ1/2)1 + (λ2/4)(2·1 + σ1 + σ3 cos 2λ2ft − σ2 sin 2λ2ft)`.
    pub fn analytic_rho(&self, t: f64) -> CMatrix {
        let w = 2.0 * self.lambda2 * self.f * t;
        let id = CMatrix::identity(2, 2);
        let q = 0.25 * self.lambda2;
        id.map(|z| z * (0.5 * self.lambda1 + 2.0 * q))
            + sigma1().matrix().map(|z| z * q)
            + sigma3().matrix().map(|z| z * (q * w.cos()))
            - sigma2().matrix().map(|z| z * (q * w.sin()))
    }

    /// Heisenberg-picture `P±(t) = (1 ± σ3 cos 2λ2ft ± σ2 sin 2λ2ft)/2`.
    pub fn heisenberg_projector(&self, sign: f64, t: f64) -> CMatrix {
        let w = 2.0 * self.lambda2 * self.f * t;
        let id = CMatrix::identity(2, 2);
        (id + (sigma3().matrix().map(|z| z * w.cos()) + sigma2().matrix().map(|z| z * w.sin())).map(|z| z * sign))
            .map(|z| z * 0.5)
    }
}

#[derive(Clone, Debug)]
pub struct ParadoxReport {
    pub times: Vec<f64>,
    pub rho: Vec<CMatrix>,
    /// `max_t |ρ_ODE(t) − ρ_analytic(t)|` entrywise.
    pub linf_vs_analytic: f64,
    /// `Tr ρ(t)P+` in the Schrödinger picture.
    pub p_plus: Vec<f64>,
    /// `Tr ρ(0)P+(t)` in the Heisenberg picture.
    pub p_plus_heisenberg: Vec<f64>,
    pub picture_mismatch: f64,
    /// Coefficient of `σ3` in `ρ` at the start and the end.
    pub sigma3_initial: f64,
    pub sigma3_final: f64,
}

/// The four-step process: a spin prepared as the mixture `ρ0` interacts for
/// time `t` under `i ρ̇ = 2f (Tr ρσ1/Tr ρ)[σ1, ρ]`. `Tr ρσ1` is checked to
/// stay constant within `1e−10`.
pub fn intention_paradox(p: &ParadoxParams, dt: f64) -> Result<ParadoxReport> {
    let rho0 = DensityMatrix::single(p.initial_rho())?;
    let times: Vec<f64>;
    let rho: Vec<CMatrix>;
    if p.t == 0.0 {
        times = vec![0.0];
        rho = vec![rho0.matrix().clone()];
    } else {
        let f = DensityFunctional::squared_mean(sigma1().into_matrix())?.scaled(p.f);
        let s1 = sigma1().into_matrix();
        let inv = [Invariant::new("Tr ρσ1", 1e-10, move |r| trace_product(r, &s1).re)];
        let traj = density_flow(&f, &rho0, p.t, dt, &inv)?;
        times = traj.times;
        rho = traj.states;
    }
    let linf_vs_analytic = times
        .iter()
        .zip(&rho)
        .map(|(&t, r)| (r - p.analytic_rho(t)).camax())
        .fold(0.0, f64::max);
    let up = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ],
    );
    let p_plus: Vec<f64> = rho.iter().map(|r| trace_product(r, &up).re).collect();
    let r0 = rho0.matrix();
    let p_plus_heisenberg: Vec<f64> = times
        .iter()
        .map(|&t| trace_product(r0, &p.heisenberg_projector(1.0, t)).re)
        .collect();
    let picture_mismatch = p_plus
        .iter()
        .zip(&p_plus_heisenberg)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let s3 = sigma3().into_matrix();
    let sigma3_initial = 0.5 * trace_product(&rho[0], &s3).re;
    let sigma3_final = 0.5 * trace_product(rho.last().unwrap(), &s3).re;
    Ok(ParadoxReport {
        times,
        rho,
        linf_vs_analytic,
        p_plus,
        p_plus_heisenberg,
        picture_mismatch,
        sigma3_initial,
        sigma3_final,
    })
}

/// The purification behind Gisin's argument: given two decompositions
/// `Σ x_i |ψ_i⟩⟨ψ_i| = Σ y_j |φ_j⟩⟨φ_j|` into orthonormal states, returns
/// `|χ⟩ = Σ √x_i |ψ_i⟩|α_i⟩ = Σ √y_j |φ_j⟩|β_j⟩` together with the bases
/// `{α_i}` (standard) and `{β_j}` of the ancilla.
///
/// Only the static construction is provided. Propagating the collapsed
/// subensembles independently is an interpretational step and is not modelled.
pub fn two_decomposition_purification(
    x: &[f64],
    psi: &[StateVector],
    y: &[f64],
    phi: &[StateVector],
) -> Result<(StateVector, Vec<StateVector>, Vec<StateVector>)> {
    let n = x.len();
    if psi.len() != n || y.len() != phi.len() || phi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: phi.len(),
        });
    }
    let d = psi.first().map(|s| s.len()).unwrap_or(0);
    let orthonormal = |set: &[StateVector]| -> Result<()> {
        for (i, a) in set.iter().enumerate() {
            for (j, b) in set.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = a.inner(b)?;
                if (got - C64::new(want, 0.0)).norm() > 1e-10 {
                    return Err(Error::InvalidState(format!("states {i} and {j} are not orthonormal")));
                }
            }
        }
        Ok(())
    };
    orthonormal(psi)?;
    orthonormal(phi)?;
    if x.iter().chain(y).any(|&p| !(p > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "probabilities".into(),
            detail: "all weights must be positive".into(),
        });
    }
    let mixture = |w: &[f64], set: &[StateVector]| -> CMatrix {
        set.iter().zip(w).fold(CMatrix::zeros(d, d), |acc, (s, p)| {
            acc + s.projector().matrix().map(|z| z * p)
        })
    };
    let mismatch = (mixture(x, psi) - mixture(y, phi)).camax();
    if mismatch > 1e-10 {
        return Err(Error::InvalidState(format!(
            "the two mixtures differ by {mismatch:.3e}"
        )));
    }
    let alpha: Vec<StateVector> = (0..n).map(|i| StateVector::basis(n, i)).collect::<Result<_>>()?;
    let chi = psi
        .iter()
        .zip(x)
        .zip(&alpha)
        .map(|((s, p), a)| tensor_state(s, a).scaled(C64::new(p.sqrt(), 0.0)))
        .reduce(|acc, v| {
            StateVector::new(
                acc.amplitudes()
                    .iter()
                    .zip(v.amplitudes())
                    .map(|(a, b)| a + b)
                    .collect(),
                acc.dims().to_vec(),
            )
            .expect("same dims")
        })
        .ok_or_else(|| Error::InvalidState("empty decomposition".into()))?;
    // β_j = y_j^{−1/2} (⟨φ_j| ⊗ 1)|χ⟩
    let beta = phi
        .iter()
        .zip(y)
        .map(|(f, &w)| {
            let amps = (0..n)
                .map(|r| {
                    (0..d)
                        .map(|a| f.amplitudes()[a].conj() * chi.amplitudes()[a * n + r])
                        .sum::<C64>()
                        / w.sqrt()
                })
                .collect();
            StateVector::from_amplitudes(amps)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((chi, alpha, beta))
}
