//! Classical fixed-step fourth-order Runge–Kutta, shared by every integrator.

use crate::hilbert::{CMatrix, C64};

/// A vector-space element the stepper can combine.
pub trait OdeState: Clone {
    /// `self + a·other`
    fn axpy(&self, a: f64, other: &Self) -> Self;
}

impl OdeState for Vec<C64> {
    fn axpy(&self, a: f64, other: &Self) -> Self {
        self.iter().zip(other).map(|(x, y)| x + y * a).collect()
    }
}

impl OdeState for Vec<f64> {
    fn axpy(&self, a: f64, other: &Self) -> Self {
        self.iter().zip(other).map(|(x, y)| x + y * a).collect()
    }
}

impl OdeState for [f64; 3] {
    fn axpy(&self, a: f64, other: &Self) -> Self {
        [self[0] + a * other[0], self[1] + a * other[1], self[2] + a * other[2]]
    }
}

impl OdeState for CMatrix {
    fn axpy(&self, a: f64, other: &Self) -> Self {
        self + other.map(|z| z * a)
    }
}

/// One step of `y' = f(t, y)`.
pub fn rk4_step<S, E, F>(f: &mut F, t: f64, y: &S, dt: f64) -> Result<S, E>
where
    S: OdeState,
    F: FnMut(f64, &S) -> Result<S, E>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * dt, &y.axpy(0.5 * dt, &k1))?;
    let k3 = f(t + 0.5 * dt, &y.axpy(0.5 * dt, &k2))?;
    let k4 = f(t + dt, &y.axpy(dt, &k3))?;
    Ok(y.axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4))
}

/// Number of steps and the adjusted step so that `steps·dt = t_end` exactly.
pub fn step_grid(t_end: f64, dt: f64) -> (usize, f64) {
    let steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    (steps, t_end / steps as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_converges_at_fourth_order() {
        let mut f = |_t: f64, y: &Vec<f64>| -> Result<Vec<f64>, ()> { Ok(vec![-y[0]]) };
        let mut err = |dt: f64| {
            let (n, dt) = step_grid(2.0, dt);
            let mut y = vec![1.0];
            for k in 0..n {
                y = rk4_step(&mut f, k as f64 * dt, &y, dt).unwrap();
            }
            (y[0] - (-2.0f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn grid_hits_end_time() {
        let (n, dt) = step_grid(1.0, 0.3);
        assert_eq!(n, 4);
        assert!((n as f64 * dt - 1.0).abs() < 1e-15);
        assert_eq!(step_grid(1.0, 0.25).0, 4);
    }
}
