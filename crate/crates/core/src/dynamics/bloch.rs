//! Neoclassical Bloch equations in the rotating frame.

use super::rk4::{rk4_step, step_grid};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochParams {
    /// detuning Δ
    pub delta: f64,
    /// Rabi frequency Ω
    pub omega: f64,
    /// Einstein coefficient A
    pub a: f64,
    /// Lamb-shift parameter ε
    pub eps: f64,
}

impl BlochParams {
    /// Rotating-frame coefficients `(ω̃1, ω̃2, ω̃3) = (−(A/2)v, (A/2)u, 2εw)`.
    pub fn omega_tilde(&self, r: &BlochState) -> [f64; 3] {
        [-0.5 * self.a * r.v, 0.5 * self.a * r.u, 2.0 * self.eps * r.w]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochState {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl BlochState {
    pub fn new(u: f64, v: f64, w: f64) -> Self {
        Self { u, v, w }
    }

    pub fn length_sqr(&self) -> f64 {
        self.u * self.u + self.v * self.v + self.w * self.w
    }

    fn to_array(self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }

    fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

#[derive(Clone, Debug, Default)]
pub struct BlochTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochState>,
}

impl BlochTrajectory {
    pub fn u(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.u).collect()
    }

    pub fn v(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.v).collect()
    }

    pub fn w(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.w).collect()
    }
}

/// Right-hand side of Jaynes' neoclassical system:
///
/// ```text
/// u̇ = −Δv − 2εwv + (A/2)uw
/// v̇ =  Δu + Ωw + 2εwu − (A/2)vw
/// ẇ = −Ωv − (A/2)(u² + v²)
/// ```
pub fn bloch_rhs(p: &BlochParams, r: [f64; 3]) -> [f64; 3] {
    let [u, v, w] = r;
    let half_a = 0.5 * p.a;
    [
        -p.delta * v - 2.0 * p.eps * w * v + half_a * u * w,
        p.delta * u + p.omega * w + 2.0 * p.eps * w * u - half_a * v * w,
        -p.omega * v - half_a * (u * u + v * v),
    ]
}

/// Fixed-step integration of the neoclassical Bloch equations.
///
/// Each step compares the change of `|r|²` with the trapezoid estimate of
/// `∫ −2Awv² dt`; a mismatch above `1e−6` (or a non-finite state) reports the
/// step size as unstable.
pub fn integrate_bloch(p: &BlochParams, r0: BlochState, t_end: f64, dt: f64) -> Result<BlochTrajectory> {
    validate(t_end, dt)?;
    let (steps, dt) = step_grid(t_end, dt);
    let mut f = |_t: f64, r: &[f64; 3]| -> Result<[f64; 3]> { Ok(bloch_rhs(p, *r)) };
    let dissipation = |r: &BlochState| -2.0 * p.a * r.w * r.v * r.v;
    let mut out = BlochTrajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
    };
    let mut r = r0;
    out.times.push(0.0);
    out.states.push(r);
    for k in 0..steps {
        let t = k as f64 * dt;
        let next = BlochState::from_array(rk4_step(&mut f, t, &r.to_array(), dt)?);
        let t_next = (k + 1) as f64 * dt;
        if !next.length_sqr().is_finite() {
            return Err(Error::Unstable {
                time: t_next,
                detail: "non-finite Bloch vector".into(),
            });
        }
        let actual = next.length_sqr() - r.length_sqr();
        let predicted = 0.5 * dt * (dissipation(&r) + dissipation(&next));
        if (actual - predicted).abs() > 1e-6 {
            return Err(Error::Unstable {
                time: t_next,
                detail: format!(
                    "|r|² changed by {actual:.3e} where the dissipation law gives {predicted:.3e}; reduce dt = {dt}"
                ),
            });
        }
        r = next;
        out.times.push(t_next);
        out.states.push(r);
    }
    Ok(out)
}

/// General rotating-frame form `ṙ = (ω̃(r) + (−Ω, 0, Δ)) × r` with a
/// state-dependent `ω̃`. Conserves `|r|` for any `ω̃`.
pub fn integrate_bloch_general<F>(
    omega_tilde: F,
    delta: f64,
    omega: f64,
    r0: BlochState,
    t_end: f64,
    dt: f64,
) -> Result<BlochTrajectory>
where
    F: Fn(&BlochState) -> [f64; 3],
{
    validate(t_end, dt)?;
    let (steps, dt) = step_grid(t_end, dt);
    let mut f = |_t: f64, r: &[f64; 3]| -> Result<[f64; 3]> {
        let s = BlochState::from_array(*r);
        let wt = omega_tilde(&s);
        let a = [wt[0] - omega, wt[1], wt[2] + delta];
        Ok([
            a[1] * r[2] - a[2] * r[1],
            a[2] * r[0] - a[0] * r[2],
            a[0] * r[1] - a[1] * r[0],
        ])
    };
    let mut out = BlochTrajectory::default();
    let mut r = r0;
    out.times.push(0.0);
    out.states.push(r);
    for k in 0..steps {
        r = BlochState::from_array(rk4_step(&mut f, k as f64 * dt, &r.to_array(), dt)?);
        out.times.push((k + 1) as f64 * dt);
        out.states.push(r);
    }
    Ok(out)
}

fn validate(t_end: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt".into(),
            detail: format!("must be positive, got {dt}"),
        });
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t_end".into(),
            detail: format!("must be positive, got {t_end}"),
        });
    }
    Ok(())
}
