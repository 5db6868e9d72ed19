//! Per-mode linearized operator and the stream-function problems.

use std::sync::Arc;

use nalgebra::{DMatrix, Dyn, LU};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{real_times_complex, RadialGrid};
use crate::{CMatrix, CVector, RMatrix};

/// Physical configuration of the background flow `(A r + B / r) e_theta`.
///
/// `A` is carried for provenance only: in the weighted mode variables it
/// reduces to a phase `e^{ikAt}` and never enters the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub nu: f64,
    pub a: f64,
    pub b: f64,
    pub outer_radius: f64,
}

impl FlowParams {
    pub fn new(nu: f64, a: f64, b: f64, outer_radius: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::config(format!("nu = {nu} must be positive")));
        }
        if b == 0.0 || !b.is_finite() {
            return Err(Error::config(format!("B = {b} must be nonzero")));
        }
        if !(outer_radius > 1.0) || !outer_radius.is_finite() {
            return Err(Error::config(format!("R = {outer_radius} must exceed 1")));
        }
        if !a.is_finite() {
            return Err(Error::config(format!("A = {a} must be finite")));
        }
        Ok(Self {
            nu,
            a,
            b,
            outer_radius,
        })
    }

    /// Same as [`FlowParams::new`] but accepts `B = 0`, the self-adjoint
    /// limit used as a reference case in tests and diagnostics.
    pub fn shear_free(nu: f64, outer_radius: f64) -> Result<Self> {
        let p = Self::new(nu, 0.0, 1.0, outer_radius)?;
        Ok(Self { b: 0.0, ..p })
    }

    /// Vorticity of the background flow, `2A`.
    pub fn background_vorticity(&self) -> f64 {
        2.0 * self.a
    }

    pub fn log_r(&self) -> f64 {
        self.outer_radius.ln()
    }

    /// `nu k^2 <= |B|`.
    pub fn low_frequency(&self, k: i32) -> bool {
        self.nu * (k as f64).powi(2) <= self.b.abs()
    }

    /// Enhanced-dissipation scale `(nu k^2)^{1/3} |B|^{2/3} R^{-2}`.
    pub fn enhanced_rate(&self, k: i32) -> f64 {
        (self.nu * (k as f64).powi(2)).cbrt() * self.b.abs().powf(2.0 / 3.0)
            / self.outer_radius.powi(2)
    }

    /// `mu_k = max{(nu k^2)^{1/3} |B|^{2/3} R^{-2}, nu k^2 R^{-2}}`.
    pub fn mu(&self, k: i32) -> f64 {
        let heat = self.nu * (k as f64).powi(2) / self.outer_radius.powi(2);
        self.enhanced_rate(k).max(heat)
    }

    /// `log R / (nu^{-1/3} |B|^{1/3})`; the small-data theory asks for this
    /// to be at most an order-one constant, taken here as 1.
    pub fn regime_ratio(&self) -> f64 {
        self.log_r() * self.nu.cbrt() / self.b.abs().cbrt()
    }

    pub fn in_regime(&self) -> bool {
        self.regime_ratio() <= 1.0
    }
}

/// Dense realization of `L_k` on the interior collocation nodes.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    k: i32,
    params: FlowParams,
    grid: Arc<RadialGrid>,
    matrix: CMatrix,
    weighted: CMatrix,
}

/// Assemble `L_k = -nu (d_r^2 - (k^2 - 1/4)/r^2) + i k B / r^2` with the
/// boundary rows and columns removed (`w = 0` at `r = 1, R`).
pub fn assemble_mode_operator(grid: &Arc<RadialGrid>, params: &FlowParams, k: i32) -> ModeOperator {
    let m = grid.interior_len();
    let r = grid.interior_nodes();
    let d2 = grid.d2_interior();
    let kk = (k as f64).powi(2) - 0.25;
    let nu = params.nu;
    let kb = k as f64 * params.b;
    let matrix = DMatrix::from_fn(m, m, |i, j| {
        let mut re = -nu * d2[(i, j)];
        let mut im = 0.0;
        if i == j {
            let inv_r2 = 1.0 / (r[i] * r[i]);
            re += nu * kk * inv_r2;
            im = kb * inv_r2;
        }
        Complex64::new(re, im)
    });
    let sq = grid.interior_weights().map(f64::sqrt);
    let weighted = DMatrix::from_fn(m, m, |i, j| matrix[(i, j)] * (sq[i] / sq[j]));
    ModeOperator {
        k,
        params: *params,
        grid: Arc::clone(grid),
        matrix,
        weighted,
    }
}

impl ModeOperator {
    pub fn k(&self) -> i32 {
        self.k
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Collocation matrix acting on interior node values.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `Q^{1/2} L Q^{-1/2}` with `Q` the interior quadrature weights: the
    /// Euclidean geometry of this matrix is the discrete `L^2(dr)` geometry
    /// of `L_k`, so its singular values and exponential norms are the
    /// function-space quantities.
    pub fn weighted_matrix(&self) -> &CMatrix {
        &self.weighted
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        apply_mode_operator(self, v)
    }

    /// Quadrature form `<L v, v>` in `L^2(dr)`.
    pub fn quadratic_form(&self, v: &CVector) -> Result<Complex64> {
        let lv = self.apply(v)?;
        let q = self.grid.interior_weights();
        Ok(lv
            .iter()
            .zip(v.iter())
            .zip(q.iter())
            .map(|((a, b), w)| a * b.conj() * *w)
            .sum())
    }

    /// `nu (||v'||^2 + (k^2 - 1/4) ||v / r||^2)`, the real part of the
    /// quadratic form after integrating by parts.
    pub fn coercive_form(&self, v: &CVector) -> Result<f64> {
        let full = self.grid.extend(v)?;
        let dv = self.grid.derivative(&full)?;
        let dnorm = self.grid.l2_norm(&dv)?;
        let r = self.grid.interior_nodes();
        let vr = CVector::from_iterator(v.len(), v.iter().zip(r.iter()).map(|(z, x)| z / *x));
        let vrnorm = self.grid.l2_norm(&vr)?;
        let kk = (self.k as f64).powi(2) - 0.25;
        Ok(self.params.nu * (dnorm * dnorm + kk * vrnorm * vrnorm))
    }
}

pub fn apply_mode_operator(op: &ModeOperator, v: &CVector) -> Result<CVector> {
    if v.len() != op.dim() {
        return Err(Error::Shape {
            expected: op.dim(),
            got: v.len(),
        });
    }
    Ok(&op.matrix * v)
}

/// Inverse of `d_r^2 - (k^2 - 1/4)/r^2` with `phi = 0` at both walls,
/// precomputed for repeated solves at a fixed `k`.
#[derive(Debug, Clone)]
pub struct StreamSolver {
    k: i32,
    forward: RMatrix,
    lu: LU<f64, Dyn, Dyn>,
}

impl StreamSolver {
    pub fn new(grid: &RadialGrid, k: i32) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain(
                "the weighted stream problem is only posed for k != 0; use ZeroModeSolver",
            ));
        }
        let r = grid.interior_nodes();
        let kk = (k as f64).powi(2) - 0.25;
        let mut forward = grid.d2_interior();
        for i in 0..forward.nrows() {
            forward[(i, i)] -= kk / (r[i] * r[i]);
        }
        let lu = forward.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::domain("singular stream-function operator"));
        }
        Ok(Self { k, forward, lu })
    }

    pub fn k(&self) -> i32 {
        self.k
    }

    pub fn solve(&self, w: &CVector) -> Result<CVector> {
        check_len(self.forward.nrows(), w.len())?;
        Ok(lu_solve_complex(&self.lu, w))
    }

    /// `(d_r^2 - (k^2 - 1/4)/r^2) phi` on interior nodes.
    pub fn forward(&self, phi: &CVector) -> Result<CVector> {
        check_len(self.forward.nrows(), phi.len())?;
        Ok(real_times_complex(&self.forward, phi))
    }
}

/// Inverse of the axisymmetric polar operator `d_r^2 + (1/r) d_r` with
/// `phi = 0` at both walls. Acts on unweighted `w_=`, `phi_=`.
#[derive(Debug, Clone)]
pub struct ZeroModeSolver {
    forward: RMatrix,
    lu: LU<f64, Dyn, Dyn>,
}

impl ZeroModeSolver {
    pub fn new(grid: &RadialGrid) -> Result<Self> {
        let forward = polar_laplacian_interior(grid);
        let lu = forward.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::domain("singular axisymmetric stream operator"));
        }
        Ok(Self { forward, lu })
    }

    pub fn solve(&self, w: &CVector) -> Result<CVector> {
        check_len(self.forward.nrows(), w.len())?;
        Ok(lu_solve_complex(&self.lu, w))
    }

    pub fn forward(&self, phi: &CVector) -> Result<CVector> {
        check_len(self.forward.nrows(), phi.len())?;
        Ok(real_times_complex(&self.forward, phi))
    }
}

/// Interior block of `d_r^2 + diag(1/r) d_r`.
pub fn polar_laplacian_interior(grid: &RadialGrid) -> RMatrix {
    let m = grid.interior_len();
    let r = grid.nodes();
    let d1 = grid.d1();
    let d2 = grid.d2();
    RMatrix::from_fn(m, m, |i, j| d2[(i + 1, j + 1)] + d1[(i + 1, j + 1)] / r[i + 1])
}

/// One-shot solve of `(d_r^2 - (k^2 - 1/4)/r^2) phi = w`, `phi = 0` at the
/// walls, for interior data `w` and `|k| >= 1`.
pub fn solve_stream(grid: &RadialGrid, k: i32, w: &CVector) -> Result<CVector> {
    StreamSolver::new(grid, k)?.solve(w)
}

/// Solve with a real factorization, real and imaginary parts separately.
pub(crate) fn lu_solve_complex(lu: &LU<f64, Dyn, Dyn>, b: &CVector) -> CVector {
    let re = lu.solve(&b.map(|z| z.re)).expect("factorization checked invertible");
    let im = lu.solve(&b.map(|z| z.im)).expect("factorization checked invertible");
    CVector::from_iterator(b.len(), re.iter().zip(im.iter()).map(|(&x, &y)| Complex64::new(x, y)))
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Shape { expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RVector;

    fn inverse_power(grid: &RadialGrid, p: f64) -> RVector {
        grid.interior_nodes().map(|r| r.powf(-p))
    }
    use crate::grid::build_grid;
    use crate::linalg::{hermitian_eigenvalues, hermitian_part};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize, r: f64) -> Arc<RadialGrid> {
        Arc::new(build_grid(n, r).unwrap())
    }

    fn smooth_interior(g: &RadialGrid, seed: u64) -> CVector {
        // Random combination of sin(m pi (r - 1)/(R - 1)), m <= 6.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<Complex64> = (0..6)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let rr = g.outer_radius();
        let full = g.sample_complex(|r| {
            coeffs
                .iter()
                .enumerate()
                .map(|(m, c)| c * (std::f64::consts::PI * (m + 1) as f64 * (r - 1.0) / (rr - 1.0)).sin())
                .sum()
        });
        g.restrict(&full).unwrap()
    }

    fn rel(a: &CVector, b: &CVector) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn params_validation() {
        assert!(FlowParams::new(0.0, 0.0, 1.0, 2.0).unwrap_err().is_config());
        assert!(FlowParams::new(1e-3, 0.0, 0.0, 2.0).unwrap_err().is_config());
        assert!(FlowParams::new(1e-3, 0.0, 1.0, 1.0).unwrap_err().is_config());
        let p = FlowParams::new(1e-3, 0.5, -2.0, 2.0).unwrap();
        assert_eq!(p.background_vorticity(), 1.0);
        assert!(p.low_frequency(10));
        assert!(!p.low_frequency(100));
        let heat: f64 = 1e-3 * 1e4 / 4.0;
        assert_eq!(p.mu(100), heat.max(p.enhanced_rate(100)));
        assert!(p.in_regime());
    }

    #[test]
    fn shear_free_operator_is_self_adjoint_positive() {
        let g = grid(48, 2.0);
        let p = FlowParams::shear_free(1.0, 2.0).unwrap();
        let op = assemble_mode_operator(&g, &p, 1);
        assert!(op.matrix().iter().all(|z| z.im == 0.0));
        let ev = hermitian_eigenvalues(&hermitian_part(op.weighted_matrix()));
        assert!(ev[0] > 0.0);
        // The weighted matrix is close to symmetric but not exactly: the
        // Clenshaw-Curtis rule does not integrate u'' v exactly.
        let asym = (op.weighted_matrix() - op.weighted_matrix().transpose()).norm() / op.weighted_matrix().norm();
        assert!(asym < 0.05);
    }

    #[test]
    fn skew_part_is_the_shear_symbol() {
        let g = grid(32, 2.0);
        let p = FlowParams::new(1e-2, 0.0, 1.0, 2.0).unwrap();
        let op = assemble_mode_operator(&g, &p, 1);
        let r = g.interior_nodes();
        for i in 0..op.dim() {
            for j in 0..op.dim() {
                let z = op.matrix()[(i, j)];
                let expected = if i == j { 1.0 / (r[i] * r[i]) } else { 0.0 };
                assert!((z.im - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn conjugation_symmetry() {
        let g = grid(24, 2.0);
        let p = FlowParams::new(1e-3, 0.0, 3.0, 2.0).unwrap();
        let q = FlowParams { b: -3.0, ..p };
        let a = assemble_mode_operator(&g, &p, 2);
        let b = assemble_mode_operator(&g, &q, 2);
        let c = assemble_mode_operator(&g, &p, -2);
        assert_eq!(a.matrix(), &b.matrix().map(|z| z.conj()));
        assert_eq!(a.matrix(), &c.matrix().map(|z| z.conj()));
    }

    #[test]
    fn apply_is_linear_and_checks_shape() {
        let g = grid(32, 2.0);
        let p = FlowParams::new(1e-3, 0.0, 1.0, 2.0).unwrap();
        let op = assemble_mode_operator(&g, &p, 3);
        let zero = CVector::zeros(op.dim());
        assert_eq!(op.apply(&zero).unwrap(), zero);
        let v = smooth_interior(&g, 1);
        let w = smooth_interior(&g, 2);
        let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let lhs = op.apply(&(&v * a + &w * b)).unwrap();
        let rhs = op.apply(&v).unwrap() * a + op.apply(&w).unwrap() * b;
        assert!(rel(&lhs, &rhs) < 1e-13);
        assert!(matches!(op.apply(&CVector::zeros(3)), Err(Error::Shape { .. })));
    }

    #[test]
    fn quadratic_form_real_and_imaginary_parts() {
        let g = grid(128, 2.0);
        let p = FlowParams::new(1e-3, 0.0, 1.5, 2.0).unwrap();
        for k in [1, 2, 5] {
            let op = assemble_mode_operator(&g, &p, k);
            for seed in 0..4 {
                let v = smooth_interior(&g, seed);
                let form = op.quadratic_form(&v).unwrap();
                let coercive = op.coercive_form(&v).unwrap();
                assert!(((form.re - coercive) / coercive).abs() < 1e-8, "k={k}");
                let inv_r2 = inverse_power(&g, 2.0);
                let vr = CVector::from_iterator(v.len(), v.iter().zip(inv_r2.iter()).map(|(z, w)| z * *w));
                let shear = k as f64 * p.b * crate::grid::weighted_inner(&g, &vr, &v, &RVector::from_element(v.len(), 1.0)).unwrap().re;
                assert!(((form.im - shear) / shear).abs() < 1e-8);
                assert!(form.re >= 0.0);
            }
        }
    }

    #[test]
    fn stream_solver_inverts_forward_operator() {
        let g = grid(96, 2.0);
        for k in [1, 3, -4] {
            let s = StreamSolver::new(&g, k).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64((k + 10) as u64);
            let w = CVector::from_fn(g.interior_len(), |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let phi = s.solve(&w).unwrap();
            let back = s.forward(&phi).unwrap();
            assert!(rel(&back, &w) < 1e-10);
        }
        let zero = CVector::zeros(g.interior_len());
        assert_eq!(solve_stream(&g, 2, &zero).unwrap(), zero);
        assert!(matches!(solve_stream(&g, 0, &zero), Err(Error::Domain(_))));
    }

    #[test]
    fn stream_solver_recovers_weighted_eigenfunction() {
        let r_out = 2.0f64;
        let g = grid(96, r_out);
        let log_r = r_out.ln();
        let alpha = (2.0 / log_r).sqrt();
        let beta = std::f64::consts::PI / log_r;
        for k in [1, 2] {
            for l in [1, 3] {
                let lam = (beta * l as f64).powi(2) + (k as f64).powi(2);
                let psi = g.sample_complex(|r| Complex64::new(alpha * r.sqrt() * (beta * l as f64 * r.ln()).sin(), 0.0));
                let psi_i = g.restrict(&psi).unwrap();
                let r = g.interior_nodes();
                let w = CVector::from_iterator(psi_i.len(), psi_i.iter().zip(r.iter()).map(|(z, x)| -lam * z / (x * x)));
                let phi = solve_stream(&g, k, &w).unwrap();
                assert!(RadialGrid::max_abs(&(&phi - &psi_i)) < 1e-8, "k={k} l={l}");
            }
        }
    }

    #[test]
    fn zero_mode_solver_inverts_polar_laplacian() {
        let g = grid(64, 3.0);
        let s = ZeroModeSolver::new(&g).unwrap();
        // phi = log(r) - log(R) (r - 1)/(R - 1) vanishes at both walls.
        let lr = 3.0f64.ln();
        let phi = g.restrict(&g.sample_complex(|r| Complex64::new(r.ln() - lr * (r - 1.0) / 2.0, 0.0))).unwrap();
        // (d_r^2 + d_r / r) phi = -lr / (2 r)
        let w = g.restrict(&g.sample_complex(|r| Complex64::new(-lr / (2.0 * r), 0.0))).unwrap();
        assert!(rel(&s.solve(&w).unwrap(), &phi) < 1e-11);
    }
}
