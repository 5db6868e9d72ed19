//! Chebyshev collocation on the radial interval `[1, R]`.
//!
//! Nodes are the Chebyshev-Gauss-Lobatto points `x_j = cos(j pi / N)`,
//! `j = 0..=N`, mapped affinely onto `[1, R]`. The ordering is descending:
//! `nodes[0] == R` and `nodes[N] == 1`. Every other module relies on this
//! orientation; the interior (Dirichlet) unknowns are `nodes[1..N]`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{CVector, RMatrix, RVector};

/// Smallest admissible polynomial degree.
pub const MIN_DEGREE: usize = 8;

#[derive(Debug, Clone)]
pub struct RadialGrid {
    n: usize,
    outer_radius: f64,
    nodes: RVector,
    d1: RMatrix,
    d2: RMatrix,
    quad_weights: RVector,
}

/// Build the collocation grid of polynomial degree `n` (so `n + 1` nodes)
/// on `[1, outer_radius]`.
pub fn build_grid(n: usize, outer_radius: f64) -> Result<RadialGrid> {
    RadialGrid::new(n, outer_radius)
}

impl RadialGrid {
    pub fn new(n: usize, outer_radius: f64) -> Result<Self> {
        if n < MIN_DEGREE {
            return Err(Error::config(format!(
                "grid degree n = {n} is below the minimum {MIN_DEGREE}"
            )));
        }
        if !(outer_radius > 1.0) || !outer_radius.is_finite() {
            return Err(Error::config(format!(
                "outer radius R = {outer_radius} must be finite and > 1"
            )));
        }

        let x = cheb_points(n);
        let half = 0.5 * (outer_radius - 1.0);
        let mut nodes = DVector::from_iterator(n + 1, x.iter().map(|&xi| 1.0 + half * (xi + 1.0)));
        nodes[0] = outer_radius;
        nodes[n] = 1.0;

        let (dx1, dx2) = cheb_diff_matrices(n);
        let scale = 1.0 / half;
        let d1 = dx1 * scale;
        let d2 = dx2 * (scale * scale);

        let quad_weights = clenshaw_curtis_weights(n) * half;

        Ok(Self {
            n,
            outer_radius,
            nodes,
            d1,
            d2,
            quad_weights,
        })
    }

    /// Polynomial degree `N`; the grid holds `N + 1` nodes.
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn n_points(&self) -> usize {
        self.n + 1
    }

    /// Number of interior (Dirichlet) unknowns, `N - 1`.
    pub fn interior_len(&self) -> usize {
        self.n - 1
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn nodes(&self) -> &RVector {
        &self.nodes
    }

    pub fn d1(&self) -> &RMatrix {
        &self.d1
    }

    pub fn d2(&self) -> &RMatrix {
        &self.d2
    }

    pub fn quad_weights(&self) -> &RVector {
        &self.quad_weights
    }

    pub fn interior_nodes(&self) -> RVector {
        self.nodes.rows(1, self.n - 1).into_owned()
    }

    pub fn interior_weights(&self) -> RVector {
        self.quad_weights.rows(1, self.n - 1).into_owned()
    }

    /// Interior block of `d2` (rows and columns of the boundary nodes dropped).
    pub fn d2_interior(&self) -> RMatrix {
        self.d2.view((1, 1), (self.n - 1, self.n - 1)).into_owned()
    }

    /// Pad an interior vector with the homogeneous Dirichlet values.
    pub fn extend(&self, interior: &CVector) -> Result<CVector> {
        self.check_interior(interior.len())?;
        let mut full = CVector::zeros(self.n + 1);
        full.rows_mut(1, self.n - 1).copy_from(interior);
        Ok(full)
    }

    pub fn restrict(&self, full: &CVector) -> Result<CVector> {
        self.check_full(full.len())?;
        Ok(full.rows(1, self.n - 1).into_owned())
    }

    /// Node values of `f(r)` on the full grid.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> RVector {
        self.nodes.map(f)
    }

    pub fn sample_complex<F: Fn(f64) -> Complex64>(&self, f: F) -> CVector {
        self.nodes.map(f)
    }

    /// Quadrature of node values over `[1, R]`.
    pub fn integrate(&self, f: &RVector) -> Result<f64> {
        self.check_full(f.len())?;
        Ok(self.quad_weights.dot(f))
    }

    /// First derivative of full-grid complex node values.
    pub fn derivative(&self, f: &CVector) -> Result<CVector> {
        self.check_full(f.len())?;
        Ok(real_times_complex(&self.d1, f))
    }

    /// Discrete `L^2(dr)` norm of a full-grid or interior vector.
    pub fn l2_norm(&self, f: &CVector) -> Result<f64> {
        let q = self.weights_for(f.len())?;
        Ok(f.iter()
            .zip(q.iter())
            .map(|(v, w)| v.norm_sqr() * w)
            .sum::<f64>()
            .sqrt())
    }

    /// Maximum modulus over the nodes.
    pub fn max_abs(f: &CVector) -> f64 {
        f.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub(crate) fn weights_for(&self, len: usize) -> Result<RVector> {
        if len == self.n + 1 {
            Ok(self.quad_weights.clone())
        } else if len == self.n - 1 {
            Ok(self.interior_weights())
        } else {
            Err(Error::Shape {
                expected: self.n + 1,
                got: len,
            })
        }
    }

    pub(crate) fn check_full(&self, len: usize) -> Result<()> {
        if len != self.n + 1 {
            return Err(Error::Shape {
                expected: self.n + 1,
                got: len,
            });
        }
        Ok(())
    }

    pub(crate) fn check_interior(&self, len: usize) -> Result<()> {
        if len != self.n - 1 {
            return Err(Error::Shape {
                expected: self.n - 1,
                got: len,
            });
        }
        Ok(())
    }
}

/// Quadrature approximation of `int f conj(g) weight dr`.
///
/// The vectors may be given either on the full grid (`N + 1` values) or on
/// the interior nodes only (`N - 1` values, boundary values taken as zero);
/// all three must use the same layout.
pub fn weighted_inner(
    grid: &RadialGrid,
    f: &CVector,
    g: &CVector,
    weight: &RVector,
) -> Result<Complex64> {
    let q = grid.weights_for(f.len())?;
    for len in [g.len(), weight.len()] {
        if len != f.len() {
            return Err(Error::Shape {
                expected: f.len(),
                got: len,
            });
        }
    }
    Ok(f.iter()
        .zip(g.iter())
        .zip(weight.iter().zip(q.iter()))
        .map(|((a, b), (w, qj))| a * b.conj() * (w * qj))
        .sum())
}

/// Real matrix times complex vector, split into real and imaginary parts so
/// the real kernel does the work.
pub(crate) fn real_times_complex(m: &RMatrix, v: &CVector) -> CVector {
    let re = m * v.map(|z| z.re);
    let im = m * v.map(|z| z.im);
    CVector::from_iterator(m.nrows(), re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)))
}

/// Chebyshev-Gauss-Lobatto points in descending order, symmetric to
/// round-off.
fn cheb_points(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| (PI * (n as f64 - 2.0 * j as f64) / (2.0 * n as f64)).sin())
        .collect()
}

/// First and second derivative matrices on `[-1, 1]`.
///
/// The second derivative uses the Welfert recursion rather than `D1 * D1`;
/// node differences come from the product-of-sines identity to avoid
/// cancellation near the endpoints. Diagonals use the negative sum trick.
fn cheb_diff_matrices(n: usize) -> (RMatrix, RMatrix) {
    let np = n + 1;
    let c = |i: usize| -> f64 {
        let base = if i == 0 || i == n { 2.0 } else { 1.0 };
        if i % 2 == 0 {
            base
        } else {
            -base
        }
    };
    let diff = |i: usize, j: usize| -> f64 {
        let a = PI * (i + j) as f64 / (2.0 * n as f64);
        let b = PI * (i as f64 - j as f64) / (2.0 * n as f64);
        -2.0 * a.sin() * b.sin()
    };

    let mut d1 = DMatrix::<f64>::zeros(np, np);
    for i in 0..np {
        let mut row = 0.0;
        for j in 0..np {
            if i != j {
                let v = c(i) / c(j) / diff(i, j);
                d1[(i, j)] = v;
                row += v;
            }
        }
        d1[(i, i)] = -row;
    }

    let mut d2 = DMatrix::<f64>::zeros(np, np);
    for i in 0..np {
        let mut row = 0.0;
        for j in 0..np {
            if i != j {
                let v = 2.0 * d1[(i, j)] * (d1[(i, i)] - 1.0 / diff(i, j));
                d2[(i, j)] = v;
                row += v;
            }
        }
        d2[(i, i)] = -row;
    }
    (d1, d2)
}

/// Clenshaw-Curtis weights on `[-1, 1]` for the Chebyshev-Gauss-Lobatto
/// points (Trefethen's `clencurt`).
fn clenshaw_curtis_weights(n: usize) -> RVector {
    let nf = n as f64;
    let theta: Vec<f64> = (0..=n).map(|j| PI * j as f64 / nf).collect();
    let mut w = DVector::<f64>::zeros(n + 1);
    let mut v = vec![1.0; n.saturating_sub(1)];
    if n % 2 == 0 {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for k in 1..n / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= (nf * theta[i + 1]).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for k in 1..=(n - 1) / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    for (i, vi) in v.iter().enumerate() {
        w[i + 1] = 2.0 * vi / nf;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_max_err(a: &RVector, b: &RVector) -> f64 {
        let scale = b.amax().max(1e-300);
        (a - b).amax() / scale
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(build_grid(7, 2.0).unwrap_err().is_config());
        assert!(build_grid(16, 1.0).unwrap_err().is_config());
        assert!(build_grid(16, f64::NAN).unwrap_err().is_config());
    }

    #[test]
    fn endpoints_are_exact_and_descending() {
        let g = build_grid(8, 2.0).unwrap();
        assert_eq!(g.nodes()[0], 2.0);
        assert_eq!(g.nodes()[8], 1.0);
        for j in 0..8 {
            assert!(g.nodes()[j] > g.nodes()[j + 1]);
        }
        let g = build_grid(33, 2.3).unwrap();
        assert_eq!(g.nodes()[0], 2.3);
        assert_eq!(g.nodes()[33], 1.0);
    }

    #[test]
    fn d1_kills_constants_and_differentiates_r_squared() {
        for &(n, r) in &[(16, 2.0), (64, 2.0), (96, 4.0), (128, 1.5)] {
            let g = build_grid(n, r).unwrap();
            let ones = RVector::from_element(n + 1, 1.0);
            let d1_norm = g.d1().amax();
            assert!((g.d1() * &ones).amax() / d1_norm < 1e-12);

            let sq = g.sample(|x| x * x);
            let exact = g.sample(|x| 2.0 * x);
            assert!(rel_max_err(&(g.d1() * sq), &exact) < 1e-10);
        }
    }

    #[test]
    fn second_derivative_matches_first_squared() {
        for &n in &[16usize, 64, 128] {
            let g = build_grid(n, 2.0).unwrap();
            let prod = g.d1() * g.d1();
            let diff = (&prod - g.d2()).amax() / g.d2().amax();
            assert!(diff < 1e-8, "n = {n}: {diff}");
        }
    }

    #[test]
    fn monomials_are_differentiated_exactly() {
        for &n in &[32usize, 128] {
            let g = build_grid(n, 2.0).unwrap();
            for m in [1usize, 5, n / 2, n - 2] {
                let f = g.sample(|x| x.powi(m as i32));
                let exact = g.sample(|x| m as f64 * x.powi(m as i32 - 1));
                let err = rel_max_err(&(g.d1() * f), &exact);
                assert!(err < 1e-9, "n = {n}, m = {m}: {err}");
            }
        }
    }

    #[test]
    fn quadrature_reproduces_closed_forms() {
        let g = build_grid(64, 2.0).unwrap();
        let one = g.integrate(&g.sample(|_| 1.0)).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        let inv = g.integrate(&g.sample(|x| 1.0 / x)).unwrap();
        assert!((inv - std::f64::consts::LN_2).abs() < 1e-10);

        for &r in &[1.5, 2.0, 4.0] {
            let g = build_grid(64, r).unwrap();
            let inv = g.integrate(&g.sample(|x| 1.0 / x)).unwrap();
            assert!((inv - r.ln()).abs() < 1e-10, "R = {r}");
        }
    }

    #[test]
    fn quadrature_is_exact_for_low_degree_polynomials() {
        let n = 40;
        let r = 3.0f64;
        let g = build_grid(n, r).unwrap();
        for m in 0..n {
            let f = g.sample(|x| (x - 2.0).powi(m as i32));
            let exact = ((r - 2.0).powi(m as i32 + 1) - (-1.0f64).powi(m as i32 + 1)) / (m + 1) as f64;
            let got = g.integrate(&f).unwrap();
            assert!((got - exact).abs() < 1e-10 * exact.abs().max(1.0), "m = {m}");
        }
    }

    #[test]
    fn weighted_inner_basic_properties() {
        let g = build_grid(32, 2.0).unwrap();
        let one = CVector::from_element(33, Complex64::new(1.0, 0.0));
        let w = RVector::from_element(33, 1.0);
        let v = weighted_inner(&g, &one, &one, &w).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        let f = g.sample_complex(|x| Complex64::new(x.sin(), x * x));
        let h = g.sample_complex(|x| Complex64::new(x.cos(), -x));
        let wr = g.sample(|x| 1.0 / (x * x));
        let a = weighted_inner(&g, &f, &h, &wr).unwrap();
        let b = weighted_inner(&g, &h, &f, &wr).unwrap();
        assert!((a - b.conj()).norm() < 1e-14);
        assert!(weighted_inner(&g, &f, &h, &RVector::zeros(5)).is_err());
        assert!(matches!(
            weighted_inner(&g, &CVector::zeros(4), &CVector::zeros(4), &RVector::zeros(4)),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn extend_and_restrict_roundtrip() {
        let g = build_grid(10, 2.0).unwrap();
        let v = CVector::from_fn(9, |i, _| Complex64::new(i as f64, 1.0));
        let full = g.extend(&v).unwrap();
        assert_eq!(full[0], Complex64::new(0.0, 0.0));
        assert_eq!(full[10], Complex64::new(0.0, 0.0));
        assert_eq!(g.restrict(&full).unwrap(), v);
    }
}
