//! A nonlinear K-level atom coupled to one truncated field mode, in the
//! Polchinski (reduced density matrix) and Weinberg (Fock-slice)
//! descriptions, with the closed-form inversion for the resonant case.
//!
//! Units have `ħ = 1`. The state is indexed `(k, n)` with atomic level `k`
//! (0 = lower level of the coupled pair, 1 = upper, 2.. spectators) and
//! photon number `n ≤ n_max`, flattened as `k·(n_max+1) + n`.

use crate::dynamics::{integrate_nls, jacobi_elliptic, HamiltonianFlow, NlsOptions, Trajectory};
use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, StateVector, C64};
use crate::observables::{
    bilinear, polchinski_lift, power_family, weinberg_lift, DensityFunctional, HomogeneousObservable,
};
use crate::tolerances;

#[derive(Clone, Debug, PartialEq)]
pub struct AtomFieldParams {
    /// Level frequencies `ω_k`.
    pub omega_levels: Vec<f64>,
    /// Nonlinearity weights `ε_k` (the diagonal of `ε̂`).
    pub eps_levels: Vec<f64>,
    /// Field frequency.
    pub omega: f64,
    /// Coupling. A complex `q` enters the derived constants through `|q|²`.
    pub q: C64,
    pub n_max: usize,
}

impl AtomFieldParams {
    pub fn new(omega_levels: Vec<f64>, eps_levels: Vec<f64>, omega: f64, q: C64, n_max: usize) -> Result<Self> {
        if omega_levels.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "omega_levels".into(),
                detail: format!("need at least two levels, got {}", omega_levels.len()),
            });
        }
        if eps_levels.len() != omega_levels.len() {
            return Err(Error::DimensionMismatch {
                expected: omega_levels.len(),
                got: eps_levels.len(),
            });
        }
        if n_max < 1 {
            return Err(Error::InvalidParameter {
                name: "n_max".into(),
                detail: "Fock truncation must keep at least one photon".into(),
            });
        }
        Ok(Self {
            omega_levels,
            eps_levels,
            omega,
            q,
            n_max,
        })
    }

    /// Two resonant levels `ω1 = 0`, `ω2 = ω`, with the `σ3`-type weights
    /// `ε1 = −ε2 = −eps2` and the default truncation `n_max = 4`.
    pub fn resonant_sigma3(omega: f64, q: f64, eps2: f64) -> Self {
        Self {
            omega_levels: vec![0.0, omega],
            eps_levels: vec![-eps2, eps2],
            omega,
            q: C64::new(q, 0.0),
            n_max: 4,
        }
    }

    pub fn levels(&self) -> usize {
        self.omega_levels.len()
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.levels(), self.n_max + 1]
    }

    pub fn dim(&self) -> usize {
        self.levels() * (self.n_max + 1)
    }

    pub fn index(&self, level: usize, photons: usize) -> usize {
        level * (self.n_max + 1) + photons
    }

    /// `ω0 = ω2 − ω1`
    pub fn omega0(&self) -> f64 {
        self.omega_levels[1] - self.omega_levels[0]
    }

    /// `ε0 = ε2 − ε1`
    pub fn eps0(&self) -> f64 {
        self.eps_levels[1] - self.eps_levels[0]
    }

    /// `Δ = ω0 − ω`
    pub fn delta(&self) -> f64 {
        self.omega0() - self.omega
    }

    /// `Δ' = Δ + ε2² − ε1²` for initial states confined to the coupled pair.
    pub fn delta_prime(&self) -> f64 {
        let (e1, e2) = (self.eps_levels[0], self.eps_levels[1]);
        self.delta() + e2 * e2 - e1 * e1
    }

    /// The inversion nonlinearity `ε = 2ε0²`.
    pub fn inversion_eps(&self) -> f64 {
        2.0 * self.eps0() * self.eps0()
    }

    /// `ς` with `ε²/8 = 2ς²`, i.e. `ς = ε/4`.
    pub fn varsigma(&self) -> f64 {
        0.25 * self.inversion_eps()
    }

    /// `Ω = |q| √(N + ½)` for the excitation number `N = ⟨R3 + a†a⟩`.
    pub fn rabi(&self, big_n: f64) -> f64 {
        self.q.norm() * (big_n + 0.5).sqrt()
    }

    /// `|level, photons⟩`.
    pub fn basis_state(&self, level: usize, photons: usize) -> Result<StateVector> {
        if level >= self.levels() || photons > self.n_max {
            return Err(Error::InvalidParameter {
                name: "basis_state".into(),
                detail: format!(
                    "|{level}, {photons}⟩ lies outside {} levels × {} photons",
                    self.levels(),
                    self.n_max
                ),
            });
        }
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[self.index(level, photons)] = C64::new(1.0, 0.0);
        StateVector::new(v, self.dims().to_vec())
    }

    /// `Σ ω_k b†_k b_k + ω a†a + (iq/2)(b†₂b₁a − a†b†₁b₂)` on the truncated space.
    pub fn linear_hamiltonian(&self) -> CMatrix {
        let dim = self.dim();
        let mut h = CMatrix::zeros(dim, dim);
        for (k, wk) in self.omega_levels.iter().enumerate() {
            for n in 0..=self.n_max {
                let i = self.index(k, n);
                h[(i, i)] = C64::new(wk + n as f64 * self.omega, 0.0);
            }
        }
        let half_iq = C64::new(0.0, 0.5) * self.q;
        for n in 1..=self.n_max {
            let (up, down) = (self.index(1, n - 1), self.index(0, n));
            let g = half_iq * (n as f64).sqrt();
            h[(up, down)] = g;
            h[(down, up)] = g.conj();
        }
        h
    }

    fn epshat(&self) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.levels(),
            self.eps_levels.iter().map(|e| C64::new(*e, 0.0)),
        ))
    }
}

/// How the atomic nonlinearity is extended to the atom+field system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomDescription {
    /// `(Tr ρ_AT ε̂)²/Tr ρ_AT`
    Polchinski,
    /// `Σ_n ⟨ε̂ P_n⟩²/⟨P_n⟩` over photon-number slices.
    WeinbergFock,
}

/// Hamiltonian function of the whole atom+field system.
pub fn build_atom_field(desc: AtomDescription, p: &AtomFieldParams) -> Result<HomogeneousObservable> {
    let linear = bilinear("atom+field", p.linear_hamiltonian())?;
    let dims = p.dims();
    let nonlinear = match desc {
        AtomDescription::Polchinski => polchinski_lift(&DensityFunctional::squared_mean(p.epshat())?, &dims, 0)?,
        AtomDescription::WeinbergFock => {
            let atomic = power_family(&vec![0.0; p.levels()], &p.eps_levels, 1.0, 2)?;
            weinberg_lift(&atomic, &dims, 0, &CMatrix::identity(p.n_max + 1, p.n_max + 1))?
        }
    };
    Ok(linear.plus(&nonlinear))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `Ω > ς`: `w = −cn(Ωt, ς/Ω)`
    Oscillating,
    /// `Ω = ς`: `w = −sech(Ωt)`
    Separatrix,
    /// `Ω < ς`: `w = −dn(ςt, Ω/ς)`
    Trapped,
    Linear,
}

pub fn regime(omega: f64, varsigma: f64) -> Regime {
    if varsigma == 0.0 {
        Regime::Linear
    } else if (omega - varsigma).abs() <= 1e-12 * omega.max(varsigma) {
        Regime::Separatrix
    } else if omega > varsigma {
        Regime::Oscillating
    } else {
        Regime::Trapped
    }
}

/// `w(t)` from the closed form for `Δ' = 0` and `w(0) = −1`.
pub fn elliptic_inversion(omega: f64, varsigma: f64, t: f64) -> Result<f64> {
    if !(omega >= 0.0 && varsigma >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "Omega, varsigma".into(),
            detail: format!("must be non-negative, got {omega} and {varsigma}"),
        });
    }
    Ok(match regime(omega, varsigma) {
        Regime::Linear => -(omega * t).cos(),
        Regime::Separatrix => -1.0 / (omega * t).cosh(),
        Regime::Oscillating => -jacobi_elliptic(omega * t, varsigma / omega)?.1,
        Regime::Trapped => -jacobi_elliptic(varsigma * t, omega / varsigma)?.2,
    })
}

#[derive(Clone, Debug)]
pub struct InversionSeries {
    pub times: Vec<f64>,
    /// `w = 2⟨R3⟩`
    pub w: Vec<f64>,
    pub regime: Regime,
    /// `⟨R3 + a†a⟩` at the start.
    pub excitation: f64,
    pub excitation_drift: f64,
    pub norm_drift: f64,
    pub energy_drift: f64,
    /// Largest population met in the top Fock level.
    pub top_fock_population: f64,
    /// For `K > 2`: modulus and unwrapped phase of the most populated
    /// third-level component.
    pub third_level: Option<(Vec<f64>, Vec<f64>)>,
    pub trajectory: Trajectory,
}

fn level_population(p: &AtomFieldParams, psi: &[C64], level: usize) -> f64 {
    (0..=p.n_max).map(|n| psi[p.index(level, n)].norm_sqr()).sum()
}

fn excitation_number(p: &AtomFieldParams, psi: &[C64]) -> f64 {
    let mut out = 0.0;
    for k in 0..p.levels() {
        let r3 = match k {
            0 => -0.5,
            1 => 0.5,
            _ => 0.0,
        };
        for n in 0..=p.n_max {
            out += (r3 + n as f64) * psi[p.index(k, n)].norm_sqr();
        }
    }
    out
}

/// Full nonlinear Schrödinger evolution with `w(t) = 2⟨R3⟩` recorded.
///
/// Fails with [`Error::TruncationLeak`] when the top Fock level collects more
/// than `1e−8` of the population.
pub fn inversion_trajectory(
    desc: AtomDescription,
    p: &AtomFieldParams,
    psi0: &StateVector,
    t_end: f64,
    dt: Option<f64>,
) -> Result<InversionSeries> {
    if psi0.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: psi0.len(),
        });
    }
    if (psi0.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!(
            "initial state has norm² {}",
            psi0.norm_sqr()
        )));
    }
    let psi0 = psi0.with_dims(p.dims().to_vec())?;
    let h = build_atom_field(desc, p)?;
    let mut opts = NlsOptions::new(t_end);
    opts.dt = dt;
    let traj = integrate_nls(&HamiltonianFlow::new(&h), &psi0, &opts)?;

    let top = p.n_max;
    let mut top_fock_population: f64 = 0.0;
    let mut w = Vec::with_capacity(traj.times.len());
    let mut number = Vec::with_capacity(traj.times.len());
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let z = s.amplitudes();
        let pop_top: f64 = (0..p.levels()).map(|k| z[p.index(k, top)].norm_sqr()).sum();
        if pop_top > tolerances::TRUNCATION_LEAK {
            return Err(Error::TruncationLeak {
                population: pop_top,
                n_max: p.n_max,
                time: *t,
            });
        }
        top_fock_population = top_fock_population.max(pop_top);
        let n = s.norm_sqr();
        w.push((level_population(p, z, 1) - level_population(p, z, 0)) / n);
        number.push(excitation_number(p, z) / n);
    }
    let excitation = number[0];
    let excitation_drift = number.iter().map(|v| (v - excitation).abs()).fold(0.0, f64::max);

    let third_level = (p.levels() > 2).then(|| {
        let z0 = psi0.amplitudes();
        let n3 = (0..=p.n_max)
            .max_by(|&a, &b| z0[p.index(2, a)].norm().total_cmp(&z0[p.index(2, b)].norm()))
            .unwrap_or(0);
        let i = p.index(2, n3);
        let modulus: Vec<f64> = traj.states.iter().map(|s| s.amplitudes()[i].norm()).collect();
        let mut phase = Vec::with_capacity(modulus.len());
        let mut acc = traj.states[0].amplitudes()[i].arg();
        phase.push(acc);
        for pair in traj.states.windows(2) {
            acc += (pair[1].amplitudes()[i] * pair[0].amplitudes()[i].conj()).arg();
            phase.push(acc);
        }
        (modulus, phase)
    });

    let varsigma = if desc == AtomDescription::Polchinski {
        p.varsigma()
    } else {
        0.0
    };
    Ok(InversionSeries {
        times: traj.times.clone(),
        w,
        regime: regime(p.rabi(excitation), varsigma),
        excitation,
        excitation_drift,
        norm_drift: traj.drift("norm").unwrap_or(0.0),
        energy_drift: traj.drift("energy").unwrap_or(0.0),
        top_fock_population,
        third_level,
        trajectory: traj,
    })
}

/// Right-hand side of the inversion equation for an initial `R3`, `a†a`
/// eigenstate with `R3 = n'` and excitation number `N`:
///
/// `ẅ = 2Δ'(Δ'n' + ε/8) + (ε(Δ'n' + ε/8) − Δ'² − Ω²) w − ¾εΔ' w² − (ε²/8) w³`
///
/// with `Ω² = |q|²(N + ½)`.
pub fn inversion_rhs(p: &AtomFieldParams, n_prime: f64, big_n: f64, w: f64) -> f64 {
    let dp = p.delta_prime();
    let eps = p.inversion_eps();
    let c = dp * n_prime + eps / 8.0;
    let omega2 = p.q.norm_sqr() * (big_n + 0.5);
    2.0 * dp * c + (eps * c - dp * dp - omega2) * w - 0.75 * eps * dp * w * w - eps * eps / 8.0 * w * w * w
}

#[derive(Clone, Debug)]
pub struct OdeCheck {
    pub linf_residual: f64,
    pub step: f64,
}

/// Second differences of `w` against [`inversion_rhs`] at interior samples.
pub fn inversion_ode_check(
    series: &InversionSeries,
    p: &AtomFieldParams,
    n_prime: f64,
    big_n: f64,
) -> Result<OdeCheck> {
    let t = &series.times;
    if t.len() < 5 {
        return Err(Error::TooCoarse(format!(
            "{} samples cannot support second differences",
            t.len()
        )));
    }
    let h = t[1] - t[0];
    // characteristic rate of the equation; second differences need h·rate ≪ 1
    let eps = p.inversion_eps();
    let dp = p.delta_prime();
    let rate = (p.q.norm_sqr() * (big_n + 0.5) + dp * dp + eps * eps / 8.0 + eps * dp.abs()).sqrt();
    if h * rate > 0.2 {
        return Err(Error::TooCoarse(format!(
            "sample spacing {h:.3e} is too wide for the rate {rate:.3e}"
        )));
    }
    let w = &series.w;
    let linf_residual = (1..w.len() - 1)
        .map(|j| {
            let ddw = (w[j + 1] - 2.0 * w[j] + w[j - 1]) / (h * h);
            (ddw - inversion_rhs(p, n_prime, big_n, w[j])).abs()
        })
        .fold(0.0, f64::max);
    Ok(OdeCheck { linf_residual, step: h })
}

#[cfg(test)]
mod tests;
