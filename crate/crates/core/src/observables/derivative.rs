//! Central-difference Wirtinger calculus on `(Re ψ_n, Im ψ_n)` coordinates.
//! First derivatives use the five-point stencil.

use crate::hilbert::{norm_sqr, CMatrix, C64, ZERO};
use crate::tolerances::WIRTINGER_STEP;

fn step(psi: &[C64]) -> f64 {
    WIRTINGER_STEP * (1.0 + norm_sqr(psi).sqrt())
}

/// Fourth-order central difference of `f` along `dir` at coordinate `m`.
fn central<T>(work: &mut [C64], m: usize, dir: C64, f: &dyn Fn(&[C64]) -> T, h: f64) -> T
where
    T: Diff,
{
    let base = work[m];
    let mut at = |k: f64| {
        work[m] = base + dir * k;
        f(work)
    };
    let (p1, m1, p2, m2) = (at(1.0), at(-1.0), at(2.0), at(-2.0));
    work[m] = base;
    T::combine(&p1, &m1, &p2, &m2, 1.0 / (12.0 * h))
}

trait Diff {
    /// `(8(p1 − m1) − (p2 − m2)) · scale`
    fn combine(p1: &Self, m1: &Self, p2: &Self, m2: &Self, scale: f64) -> Self;
}

impl Diff for C64 {
    fn combine(p1: &Self, m1: &Self, p2: &Self, m2: &Self, scale: f64) -> Self {
        ((p1 - m1) * 8.0 - (p2 - m2)) * scale
    }
}

impl Diff for Vec<C64> {
    fn combine(p1: &Self, m1: &Self, p2: &Self, m2: &Self, scale: f64) -> Self {
        (0..p1.len())
            .map(|k| C64::combine(&p1[k], &m1[k], &p2[k], &m2[k], scale))
            .collect()
    }
}

/// `(∂F/∂ψ_m, ∂F/∂ψ̄_m)` for a complex functional `F`.
pub fn numeric_wirtinger(f: &dyn Fn(&[C64]) -> C64, psi: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let h = step(psi);
    let n = psi.len();
    let mut d_psi = vec![ZERO; n];
    let mut d_bar = vec![ZERO; n];
    let mut work = psi.to_vec();
    let i = C64::new(0.0, 1.0);
    for m in 0..n {
        let dx = central(&mut work, m, C64::new(h, 0.0), &|v| f(v), h);
        let dy = central(&mut work, m, C64::new(0.0, h), &|v| f(v), h);
        d_psi[m] = (dx - i * dy) * 0.5;
        d_bar[m] = (dx + i * dy) * 0.5;
    }
    (d_psi, d_bar)
}

/// `M_mn = ∂g_m/∂ψ_n = ½(∂g_m/∂x_n − i ∂g_m/∂y_n)` for an analytic gradient `g`.
pub(crate) fn jacobian_of_gradient(g: &(dyn Fn(&[C64]) -> Vec<C64> + Send + Sync), psi: &[C64]) -> CMatrix {
    let h = step(psi);
    let n = psi.len();
    let mut out = CMatrix::zeros(n, n);
    let mut work = psi.to_vec();
    let i = C64::new(0.0, 1.0);
    for col in 0..n {
        let dx = central(&mut work, col, C64::new(h, 0.0), &|v| g(v), h);
        let dy = central(&mut work, col, C64::new(0.0, h), &|v| g(v), h);
        for row in 0..n {
            out[(row, col)] = (dx[row] - i * dy[row]) * 0.5;
        }
    }
    out
}

/// Wirtinger Hessian from the real Hessian of `A` over `(x, y)`:
/// `Â_mn = ¼(H_{x_m x_n} + H_{y_m y_n} + i(H_{y_m x_n} − H_{x_m y_n}))`.
/// Hermitian by construction.
pub fn numeric_hessian(a: &dyn Fn(&[C64]) -> f64, psi: &[C64]) -> CMatrix {
    let n = psi.len();
    // second differences need a wider step to keep round-off below truncation
    let h = 10.0 * step(psi);
    let coords = 2 * n;
    let shift = |v: &mut Vec<C64>, k: usize, d: f64| {
        if k < n {
            v[k] += C64::new(d, 0.0);
        } else {
            v[k - n] += C64::new(0.0, d);
        }
    };
    let f0 = a(psi);
    let mut hess = vec![vec![0.0; coords]; coords];
    for p in 0..coords {
        for q in p..coords {
            let value = if p == q {
                let mut v = psi.to_vec();
                shift(&mut v, p, h);
                let fp = a(&v);
                shift(&mut v, p, -2.0 * h);
                let fm = a(&v);
                (fp - 2.0 * f0 + fm) / (h * h)
            } else {
                let mut acc = 0.0;
                for (sp, sq, sign) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                    let mut v = psi.to_vec();
                    shift(&mut v, p, sp * h);
                    shift(&mut v, q, sq * h);
                    acc += sign * a(&v);
                }
                acc / (4.0 * h * h)
            };
            hess[p][q] = value;
            hess[q][p] = value;
        }
    }
    CMatrix::from_fn(n, n, |m, k| {
        let (xm, ym, xk, yk) = (m, m + n, k, k + n);
        C64::new(
            0.25 * (hess[xm][xk] + hess[ym][yk]),
            0.25 * (hess[ym][xk] - hess[xm][yk]),
        )
    })
}
