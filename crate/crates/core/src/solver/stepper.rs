//! Second-order implicit-explicit BDF stepping for `dw/dt + L w = f(t)`
//! with `L` treated implicitly and `f` extrapolated.

use num_complex::Complex64;

use crate::{CMatrix, CVector};

/// Pre-inverted IMEX-BDF2 system for one fixed operator and step size.
///
/// The step solves
///
/// ```text
/// (I + 2/3 dt L) w^{n+1} = 4/3 w^n - 1/3 w^{n-1} + 2/3 dt (2 f^n - f^{n-1})
/// ```
///
/// and is started with one IMEX-Euler step `(I + dt L) w^1 = w^0 + dt f^0`.
#[derive(Debug, Clone)]
pub struct ImexBdf2 {
    dt: f64,
    euler_inv: CMatrix,
    bdf2_inv: CMatrix,
}

impl ImexBdf2 {
    /// `None` when a system matrix is singular (only possible for a
    /// non-accretive `L` and a large step).
    pub fn new(matrix: &CMatrix, dt: f64) -> Option<Self> {
        let n = matrix.nrows();
        let ident = CMatrix::identity(n, n);
        let euler_inv = (&ident + matrix * Complex64::new(dt, 0.0)).try_inverse()?;
        let bdf2_inv = (&ident + matrix * Complex64::new(2.0 * dt / 3.0, 0.0)).try_inverse()?;
        Some(Self {
            dt,
            euler_inv,
            bdf2_inv,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn start(&self, w0: &CVector, f0: &CVector) -> CVector {
        let rhs = w0 + f0 * Complex64::new(self.dt, 0.0);
        &self.euler_inv * rhs
    }

    pub fn step(&self, w_n: &CVector, w_prev: &CVector, f_n: &CVector, f_prev: &CVector) -> CVector {
        let c = |x: f64| Complex64::new(x, 0.0);
        let rhs = w_n * c(4.0 / 3.0) - w_prev * c(1.0 / 3.0)
            + (f_n * c(2.0) - f_prev) * c(2.0 * self.dt / 3.0);
        &self.bdf2_inv * rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_decay_is_second_order() {
        // dw/dt = -(1 + 2i) w + e^{-t}, exact solution by variation of constants.
        let lam = Complex64::new(1.0, 2.0);
        let exact = |t: f64| {
            let w0 = Complex64::new(1.0, 0.0);
            let forced = ((-t).exp() - (-lam * t).exp()) / (lam - 1.0);
            w0 * (-lam * t).exp() + forced
        };
        let err_at = |dt: f64| {
            let m = CMatrix::from_element(1, 1, lam);
            let s = ImexBdf2::new(&m, dt).unwrap();
            let f = |t: f64| CVector::from_element(1, Complex64::new((-t).exp(), 0.0));
            let steps = (1.0 / dt).round() as usize;
            let mut prev = CVector::from_element(1, Complex64::new(1.0, 0.0));
            let mut cur = s.start(&prev, &f(0.0));
            for n in 1..steps {
                let next = s.step(&cur, &prev, &f(n as f64 * dt), &f((n - 1) as f64 * dt));
                prev = cur;
                cur = next;
            }
            (cur[0] - exact(1.0)).norm()
        };
        let e1 = err_at(0.01);
        let e2 = err_at(0.005);
        let order = (e1 / e2).log2();
        assert!(order > 1.8 && order < 2.2, "observed order {order}");
    }
}
