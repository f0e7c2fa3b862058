//! Measurement-value notions for nonlinear observables: eigenvalues,
//! diagonal values, eigenfrequencies, and probabilities from moments.
//!
//! In linear quantum mechanics the three notions coincide. For a nonlinear
//! observable they do not, and none of them is privileged here.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::hilbert::{inner, norm_sqr, random_state, StateVector, C64, ONE};
use crate::observables::{nonlinear_operator, star_product, HomogeneousObservable};
use crate::tolerances;

/// A solution of `∂H/∂ψ̄ = λψ`.
#[derive(Clone, Debug)]
pub struct EigenstateRecord {
    pub lambda: f64,
    /// Normalized and gauge-fixed.
    pub state: StateVector,
    /// `‖∂H/∂ψ̄ − λψ‖`.
    pub residual: f64,
    /// Dimension of the connected family of projective solutions through this
    /// one (0 for an isolated eigenstate, 1 for a free relative phase).
    pub family_dim: usize,
}

/// Seed grid for [`find_eigenstates`]. In dimension 2 the seeds are
/// `(cos θ, sin θ e^{iφ})` on a `n_theta × n_phi` grid with `θ ∈ [0, π/2]`;
/// larger dimensions use `n_theta·n_phi` random seeds drawn from `seed`.
#[derive(Clone, Copy, Debug)]
pub struct SeedGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub seed: u64,
}

impl Default for SeedGrid {
    fn default() -> Self {
        Self {
            n_theta: 32,
            n_phi: 16,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CensusDiagnostics {
    pub seeds: usize,
    pub converged: usize,
    /// Seeds whose refinement failed; dropped from the census.
    pub dropped: usize,
}

#[derive(Clone, Debug)]
pub struct EigenCensus {
    /// Ascending in `lambda`.
    pub eigenstates: Vec<EigenstateRecord>,
    pub diagnostics: CensusDiagnostics,
}

impl EigenCensus {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigenstates.iter().map(|r| r.lambda).collect()
    }
}

fn seeds(dim: usize, grid: &SeedGrid) -> Vec<Vec<C64>> {
    if dim == 2 {
        let mut out = Vec::with_capacity(grid.n_theta * grid.n_phi);
        let denom = (grid.n_theta.max(2) - 1) as f64;
        for i in 0..grid.n_theta {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / denom;
            for j in 0..grid.n_phi {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / grid.n_phi as f64;
                out.push(vec![C64::new(theta.cos(), 0.0), C64::from_polar(theta.sin(), phi)]);
            }
        }
        out
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
        let mut out: Vec<Vec<C64>> = (0..dim)
            .map(|k| {
                let mut v = vec![C64::new(0.0, 0.0); dim];
                v[k] = ONE;
                v
            })
            .collect();
        for _ in 0..grid.n_theta * grid.n_phi {
            out.push(random_state(&mut rng, &[dim]).into_amplitudes());
        }
        out
    }
}

/// Affine chart `ψ_c = 1` of projective space.
struct Chart<'a> {
    obs: &'a HomogeneousObservable,
    dim: usize,
    c: usize,
}

impl Chart<'_> {
    fn state(&self, x: &DVector<f64>) -> Vec<C64> {
        let mut psi = Vec::with_capacity(self.dim);
        let mut k = 0;
        for j in 0..self.dim {
            if j == self.c {
                psi.push(ONE);
            } else {
                psi.push(C64::new(x[2 * k], x[2 * k + 1]));
                k += 1;
            }
        }
        psi
    }

    fn coords(&self, psi: &[C64]) -> DVector<f64> {
        let pc = psi[self.c];
        let mut x = DVector::zeros(2 * (self.dim - 1));
        let mut k = 0;
        for (j, p) in psi.iter().enumerate() {
            if j != self.c {
                let z = p / pc;
                x[2 * k] = z.re;
                x[2 * k + 1] = z.im;
                k += 1;
            }
        }
        x
    }

    /// `F_j = g_j − ψ_j g_c` for `j ≠ c`, split into real and imaginary parts.
    fn residual(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let psi = self.state(x);
        let g = self.obs.gradient(&psi).ok()?;
        let mut f = DVector::zeros(2 * (self.dim - 1));
        let mut k = 0;
        for j in 0..self.dim {
            if j != self.c {
                let r = g[j] - psi[j] * g[self.c];
                f[2 * k] = r.re;
                f[2 * k + 1] = r.im;
                k += 1;
            }
        }
        f.iter().all(|v| v.is_finite()).then_some(f)
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = x.len();
        let h = 1e-7 * (1.0 + x.norm());
        let mut jac = DMatrix::zeros(n, n);
        let mut xp = x.clone();
        for col in 0..n {
            xp[col] = x[col] + h;
            let fp = self.residual(&xp)?;
            xp[col] = x[col] - h;
            let fm = self.residual(&xp)?;
            xp[col] = x[col];
            jac.set_column(col, &((fp - fm) / (2.0 * h)));
        }
        Some(jac)
    }
}

struct Refined {
    psi: Vec<C64>,
    nullity: usize,
}

fn refine(obs: &HomogeneousObservable, seed: &[C64]) -> Option<Refined> {
    let dim = seed.len();
    let c = (0..dim)
        .max_by(|&a, &b| seed[a].norm().total_cmp(&seed[b].norm()))
        .unwrap_or(0);
    let chart = Chart { obs, dim, c };
    let mut x = chart.coords(seed);
    let mut f = chart.residual(&x)?;
    for _ in 0..200 {
        let fnorm = f.norm();
        if fnorm < 1e-14 * (1.0 + x.norm_squared()) {
            break;
        }
        let jac = chart.jacobian(&x)?;
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd.solve(&(-&f), 1e-12 * smax.max(1e-300)).ok()?;
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-6 {
            let trial = &x + &step * alpha;
            if let Some(ft) = chart.residual(&trial) {
                if ft.norm() < fnorm {
                    x = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted || x.norm() > 1e8 {
            break;
        }
    }
    let jac = chart.jacobian(&x)?;
    let sv = jac.svd(false, false).singular_values;
    let smax = sv.max().max(1.0);
    let nullity = sv.iter().filter(|&&s| s < 1e-6 * smax).count();
    let psi = chart.state(&x);
    let n = norm_sqr(&psi).sqrt();
    Some(Refined {
        psi: psi.iter().map(|z| z / n).collect(),
        nullity,
    })
}

/// `(λ, ‖∂H/∂ψ̄ − λψ‖)` at a normalized state, with `λ = ⟨ψ|∂H/∂ψ̄⟩ = H(ψ)`.
fn eigen_residual(obs: &HomogeneousObservable, psi: &[C64]) -> Option<(f64, f64)> {
    let g = obs.gradient(psi).ok()?;
    let lambda = inner(psi, &g).re;
    let r: f64 = g.iter().zip(psi).map(|(gk, pk)| (gk - pk * lambda).norm_sqr()).sum();
    Some((lambda, r.sqrt()))
}

/// Whether two equal-λ, equal-modulus eigenstates are joined by eigenstates
/// along the straight interpolation of their component phases.
fn phase_connected(obs: &HomogeneousObservable, a: &[C64], b: &[C64], lambda: f64) -> bool {
    let moduli_match = a.iter().zip(b).all(|(x, y)| (x.norm() - y.norm()).abs() < 1e-7);
    if !moduli_match {
        return false;
    }
    [0.25, 0.5, 0.75].iter().all(|&tau| {
        let psi: Vec<C64> = a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let mut d = y.arg() - x.arg();
                d = (d + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
                C64::from_polar(x.norm(), x.arg() + tau * d)
            })
            .collect();
        match eigen_residual(obs, &psi) {
            Some((l, r)) => r < 1e-8 && (l - lambda).abs() < 1e-8,
            None => false,
        }
    })
}

fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    inner(a, b).norm_sqr() / (norm_sqr(a) * norm_sqr(b))
}

/// All projectively distinct solutions of `∂H/∂ψ̄ = λψ` reachable from the
/// seed grid, by Newton iteration in affine charts.
///
/// Solutions closer than fidelity `1 − 1e−8` are merged, as are equal-λ
/// solutions connected through a continuous family of relative phases.
pub fn find_eigenstates(obs: &HomogeneousObservable, dim: usize, grid: &SeedGrid) -> Result<EigenCensus> {
    if dim < 2 {
        return Err(Error::InvalidParameter {
            name: "dim".into(),
            detail: "eigenstate search needs dimension ≥ 2".into(),
        });
    }
    if let Some(d) = obs.dim() {
        if d != dim {
            return Err(Error::DimensionMismatch { expected: d, got: dim });
        }
    }
    let seeds = seeds(dim, grid);
    let refined: Vec<Option<(Refined, f64, f64)>> = seeds
        .par_iter()
        .map(|s| {
            let r = refine(obs, s)?;
            let (lambda, residual) = eigen_residual(obs, &r.psi)?;
            (residual < tolerances::EIGEN_RESIDUAL).then_some((r, lambda, residual))
        })
        .collect();
    let mut diagnostics = CensusDiagnostics {
        seeds: seeds.len(),
        ..Default::default()
    };
    let mut records: Vec<EigenstateRecord> = Vec::new();
    for item in refined {
        let Some((r, lambda, residual)) = item else {
            diagnostics.dropped += 1;
            continue;
        };
        diagnostics.converged += 1;
        let state = StateVector::from_amplitudes(r.psi)?.gauge_fixed();
        let duplicate = records.iter_mut().find(|rec| {
            let (a, b) = (rec.state.amplitudes(), state.amplitudes());
            fidelity(a, b) > tolerances::DEDUP_FIDELITY
                || ((rec.lambda - lambda).abs() < 1e-8 && phase_connected(obs, a, b, lambda))
        });
        match duplicate {
            Some(rec) => {
                if residual < rec.residual {
                    rec.state = state;
                    rec.residual = residual;
                    rec.lambda = lambda;
                }
                rec.family_dim = rec.family_dim.max(r.nullity);
            }
            None => records.push(EigenstateRecord {
                lambda,
                state,
                residual,
                family_dim: r.nullity,
            }),
        }
    }
    records.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(EigenCensus {
        eigenstates: records,
        diagnostics,
    })
}

/// Eigenvalues of `Â(ψ)`, ascending.
pub fn diagonal_values(obs: &HomogeneousObservable, psi: &StateVector) -> Result<Vec<f64>> {
    Ok(nonlinear_operator(obs, psi)?.eigenvalues())
}

/// One quasi-periodic component of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyComponent {
    pub component: usize,
    pub frequency: f64,
    /// Time-averaged `|ψ_k|²`.
    pub weight: f64,
    pub method: FrequencyMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrequencyMethod {
    PhaseUnwrap,
    Fourier,
}

/// Dominant frequency of every amplitude component, in the sign convention
/// `ψ_k(t) ∝ e^{−iω_k t}`.
///
/// Components of constant modulus are treated by phase unwrapping and a
/// least-squares slope. Otherwise a Hann-windowed Fourier peak is located,
/// which needs a record of at least `2π/resolution`.
pub fn eigenfrequencies(traj: &Trajectory, resolution: f64) -> Result<Vec<FrequencyComponent>> {
    let times = &traj.times;
    if times.len() < 3 {
        return Err(Error::TooCoarse("need at least three samples".into()));
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
            return Err(Error::TooCoarse("samples are not uniformly spaced".into()));
        }
    }
    let duration = times[times.len() - 1] - times[0];
    let dim = traj.states[0].len();
    let mut out = Vec::with_capacity(dim);
    for k in 0..dim {
        let series: Vec<C64> = traj.states.iter().map(|s| s.amplitudes()[k]).collect();
        let moduli: Vec<f64> = series.iter().map(|z| z.norm()).collect();
        let weight = moduli.iter().map(|m| m * m).sum::<f64>() / moduli.len() as f64;
        let mmax = moduli.iter().copied().fold(0.0, f64::max);
        let mmin = moduli.iter().copied().fold(f64::INFINITY, f64::min);
        if mmax < 1e-12 {
            out.push(FrequencyComponent {
                component: k,
                frequency: 0.0,
                weight,
                method: FrequencyMethod::PhaseUnwrap,
            });
            continue;
        }
        if mmax - mmin <= 1e-6 * mmax {
            let mut unwrapped = Vec::with_capacity(series.len());
            let mut acc = series[0].arg();
            unwrapped.push(acc);
            for w in series.windows(2) {
                let d = (w[1] * w[0].conj()).arg();
                acc += d;
                unwrapped.push(acc);
            }
            let slope = least_squares_slope(times, &unwrapped);
            if (slope * dt).abs() > 0.5 * std::f64::consts::PI {
                return Err(Error::TooCoarse(format!(
                    "phase advances {:.3} rad per sample in component {k}",
                    slope * dt
                )));
            }
            out.push(FrequencyComponent {
                component: k,
                frequency: -slope,
                weight,
                method: FrequencyMethod::PhaseUnwrap,
            });
        } else {
            let required = 2.0 * std::f64::consts::PI / resolution;
            if duration < required {
                return Err(Error::Resolution {
                    required_duration: required,
                    duration,
                });
            }
            let frequency = fourier_peak(times, &series, dt, resolution);
            out.push(FrequencyComponent {
                component: k,
                frequency,
                weight,
                method: FrequencyMethod::Fourier,
            });
        }
    }
    Ok(out)
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn windowed_power(times: &[f64], series: &[C64], omega: f64) -> f64 {
    let n = series.len();
    let t0 = times[0];
    let mut acc = C64::new(0.0, 0.0);
    for (j, (t, z)) in times.iter().zip(series).enumerate() {
        let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * j as f64 / (n - 1) as f64).cos();
        acc += z * C64::from_polar(w, omega * (t - t0));
    }
    acc.norm_sqr()
}

fn fourier_peak(times: &[f64], series: &[C64], dt: f64, resolution: f64) -> f64 {
    let nyquist = std::f64::consts::PI / dt;
    let step = 0.25 * resolution;
    let count = (2.0 * nyquist / step).ceil() as usize;
    let mut best = (0.0, f64::NEG_INFINITY);
    for j in 0..=count {
        let omega = -nyquist + j as f64 * step;
        let p = windowed_power(times, series, omega);
        if p > best.1 {
            best = (omega, p);
        }
    }
    // golden-section refinement on the bracket around the grid maximum
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if windowed_power(times, series, c) > windowed_power(times, series, d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// How probabilities are read off the moments of the degenerate canonical
/// observable `E·n + ε⟨σ3⟩²/n`, whose eigenvalues are `E + ε` and `E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbabilityMethod {
    /// `⟨H⟩ = p(E+ε) + (1−p)E`.
    FirstMoment,
    /// `⟨H*H⟩ = p(E+ε)² + (1−p)E²`.
    StarSquare,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilitySet {
    pub method: ProbabilityMethod,
    /// `[E + ε, E]`
    pub outcomes: [f64; 2],
    pub probabilities: [f64; 2],
}

fn degenerate_params(obs: &HomogeneousObservable) -> Result<(f64, f64)> {
    let get = |name: &str| {
        obs.param(name).ok_or_else(|| Error::InvalidParameter {
            name: name.into(),
            detail: format!("observable `{}` carries no such parameter", obs.label()),
        })
    };
    let (e1, e2, eps) = (get("E1")?, get("E2")?, get("eps")?);
    if obs.label() != "canonical" || e1 != e2 {
        return Err(Error::InvalidParameter {
            name: "observable".into(),
            detail: "moment probabilities need the degenerate canonical family E1 = E2".into(),
        });
    }
    Ok((e1, eps))
}

/// Probabilities of the outcomes `E + ε` and `E` by the chosen moment.
pub fn moment_probabilities(
    obs: &HomogeneousObservable,
    psi: &StateVector,
    method: ProbabilityMethod,
) -> Result<ProbabilitySet> {
    let (e, eps) = degenerate_params(obs)?;
    let n = psi.norm_sqr();
    let (upper, lower) = (e + eps, e);
    let p = match method {
        ProbabilityMethod::FirstMoment => {
            if eps == 0.0 {
                return Err(Error::SingularMethod("ε = 0 makes the outcomes coincide".into()));
            }
            (obs.value(psi.amplitudes())? / n - lower) / (upper - lower)
        }
        ProbabilityMethod::StarSquare => {
            let denom = upper * upper - lower * lower;
            if denom == 0.0 {
                return Err(Error::SingularMethod(format!("2Eε + ε² = 0 at E = {e}, ε = {eps}")));
            }
            let hh = star_product(obs, obs, psi)?;
            if hh.im.abs() > tolerances::REAL_RESIDUAL {
                return Err(Error::ComplexResidual { residual: hh.im.abs() });
            }
            (hh.re / n - lower * lower) / denom
        }
    };
    Ok(ProbabilitySet {
        method,
        outcomes: [upper, lower],
        probabilities: [p, 1.0 - p],
    })
}

/// Both probability constructions side by side.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub first_moment: ProbabilitySet,
    pub star_square: ProbabilitySet,
    /// `p_star(E+ε) − p_first(E+ε)`.
    pub discrepancy: f64,
}

pub fn probability_consistency(obs: &HomogeneousObservable, psi: &StateVector) -> Result<ConsistencyReport> {
    let first_moment = moment_probabilities(obs, psi, ProbabilityMethod::FirstMoment)?;
    let star_square = moment_probabilities(obs, psi, ProbabilityMethod::StarSquare)?;
    let discrepancy = star_square.probabilities[0] - first_moment.probabilities[0];
    Ok(ConsistencyReport {
        first_moment,
        star_square,
        discrepancy,
    })
}

/// Bisection for the parameter at which an integer-valued census changes,
/// e.g. the number of eigenstates as a coupling crosses a bifurcation.
pub fn bisect_count_change<F>(count: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<usize>,
{
    let c_lo = count(lo)?;
    if count(hi)? == c_lo {
        return Err(Error::InvalidParameter {
            name: "bracket".into(),
            detail: format!("count is {c_lo} at both ends of [{lo}, {hi}]"),
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if count(mid)? == c_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Everything this module computes for one observable and state.
#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub eigenstates: Vec<EigenstateRecord>,
    pub diagonal_values: Vec<f64>,
    pub eigenfrequencies: Vec<FrequencyComponent>,
    pub probability_sets: Vec<ProbabilitySet>,
}
