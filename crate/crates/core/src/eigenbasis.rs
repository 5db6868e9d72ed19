//! Closed-form weighted eigenbasis of `-d_r^2 + (k^2 - 1/4)/r^2` and the
//! integrated inviscid-damping quantities built on it.
//!
//! `psi_l(r) = alpha r^{1/2} sin(beta l log r)` with `alpha = (2/log R)^{1/2}`
//! and `beta = pi / log R` is orthonormal in `L^2([1, R], dr / r^2)` and
//! satisfies `(d_r^2 - (k^2 - 1/4)/r^2) psi_l = -lambda_{k,l} psi_l / r^2`
//! with `lambda_{k,l} = (beta l)^2 + k^2`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::operators::{assemble_mode_operator, FlowParams, StreamSolver};
use crate::{CVector, RMatrix, RVector};

/// Boundary values above this (relative to the sup norm) raise the
/// non-vanishing warning.
const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct WeightedBasis {
    grid: Arc<RadialGrid>,
    l_max: usize,
    alpha: f64,
    beta: f64,
    /// `values[(j, l - 1)] = psi_l(r_j)` on the full grid.
    values: RMatrix,
}

/// Tabulate `psi_1 .. psi_{l_max}` on the grid nodes. Requires
/// `l_max <= N / 4`, beyond which the oscillation is under-resolved.
pub fn build_basis(grid: &Arc<RadialGrid>, l_max: usize) -> Result<WeightedBasis> {
    let limit = grid.degree() / 4;
    if l_max == 0 || l_max > limit {
        return Err(Error::config(format!(
            "l_max = {l_max} must lie in 1..={limit} for N = {}",
            grid.degree()
        )));
    }
    let log_r = grid.outer_radius().ln();
    let alpha = (2.0 / log_r).sqrt();
    let beta = PI / log_r;
    let nodes = grid.nodes();
    let mut values = RMatrix::from_fn(nodes.len(), l_max, |j, l| {
        psi_value(alpha, beta, l + 1, nodes[j])
    });
    // sin(l pi) is not exactly zero in floating point.
    let last = nodes.len() - 1;
    for l in 0..l_max {
        values[(0, l)] = 0.0;
        values[(last, l)] = 0.0;
    }
    Ok(WeightedBasis {
        grid: Arc::clone(grid),
        l_max,
        alpha,
        beta,
        values,
    })
}

fn psi_value(alpha: f64, beta: f64, l: usize, r: f64) -> f64 {
    alpha * r.sqrt() * (beta * l as f64 * r.ln()).sin()
}

impl WeightedBasis {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda(&self, k: i32, l: usize) -> f64 {
        (self.beta * l as f64).powi(2) + (k as f64).powi(2)
    }

    /// `psi_l(r)` from the closed form, for any `r` in `[1, R]`.
    pub fn psi(&self, l: usize, r: f64) -> f64 {
        psi_value(self.alpha, self.beta, l, r)
    }

    /// Node values of `psi_l` on the full grid, `1 <= l <= l_max`.
    pub fn column(&self, l: usize) -> RVector {
        assert!((1..=self.l_max).contains(&l), "basis index {l} out of range");
        self.values.column(l - 1).into_owned()
    }

    pub fn values(&self) -> &RMatrix {
        &self.values
    }

    /// Gram matrix in `<f, g>_w = int f g dr / r^2`.
    pub fn gram(&self) -> RMatrix {
        let q = self.grid.quad_weights();
        let r = self.grid.nodes();
        let scaled = RMatrix::from_fn(self.values.nrows(), self.l_max, |j, l| {
            self.values[(j, l)] * q[j] / (r[j] * r[j])
        });
        self.values.transpose() * scaled
    }

    /// Largest entry of `|Gram - I|`.
    pub fn gram_deviation(&self) -> f64 {
        let g = self.gram();
        let mut worst: f64 = 0.0;
        for i in 0..self.l_max {
            for j in 0..self.l_max {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// `||(d_r^2 - (k^2 - 1/4)/r^2) psi_l + lambda_{k,l} psi_l / r^2|| / ||psi_l||`
    /// with the collocation second derivative.
    pub fn eigen_residual(&self, k: i32, l: usize) -> f64 {
        let psi = self.column(l);
        let r = self.grid.nodes();
        let kk = (k as f64).powi(2) - 0.25;
        let lam = self.lambda(k, l);
        let d2 = self.grid.d2() * &psi;
        let res = CVector::from_iterator(
            psi.len(),
            (0..psi.len()).map(|j| {
                let inv_r2 = 1.0 / (r[j] * r[j]);
                Complex64::new(d2[j] - kk * inv_r2 * psi[j] + lam * inv_r2 * psi[j], 0.0)
            }),
        );
        let norm = self.grid.l2_norm(&psi.map(|x| Complex64::new(x, 0.0))).unwrap();
        self.grid.l2_norm(&res).unwrap() / norm
    }

    /// Plain `L^2(dr)` coefficients `<f, psi_l>`, `l = 1..=l_max`, for full-grid
    /// or interior node values.
    pub fn coefficients(&self, f: &CVector) -> Result<Vec<Complex64>> {
        self.project(f, false)
    }

    /// Weighted coefficients `<f, psi_l>_w`.
    pub fn weighted_coefficients(&self, f: &CVector) -> Result<Vec<Complex64>> {
        self.project(f, true)
    }

    fn project(&self, f: &CVector, weighted: bool) -> Result<Vec<Complex64>> {
        let q = self.grid.weights_for(f.len())?;
        let offset = if f.len() == self.grid.n_points() { 0 } else { 1 };
        let r = self.grid.nodes();
        Ok((0..self.l_max)
            .map(|l| {
                (0..f.len())
                    .map(|j| {
                        let rj = r[j + offset];
                        let w = if weighted { 1.0 / (rj * rj) } else { 1.0 };
                        f[j] * (self.values[(j + offset, l)] * q[j] * w)
                    })
                    .sum()
            })
            .collect())
    }
}

/// Truncated damping sum and whether the data failed to vanish at the walls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingSum {
    pub value: f64,
    pub boundary_warning: bool,
}

/// Phase-mixed vorticity `e^{-ikBt/r^2} w0` on the full grid.
pub fn phase_mixed(grid: &RadialGrid, w0: &CVector, k: i32, b: f64, t: f64) -> Result<CVector> {
    grid.check_full(w0.len())?;
    let r = grid.nodes();
    let kbt = k as f64 * b * t;
    Ok(CVector::from_iterator(
        w0.len(),
        w0.iter()
            .zip(r.iter())
            .map(|(z, x)| z * Complex64::from_polar(1.0, -kbt / (x * x))),
    ))
}

fn boundary_warning(w0: &CVector) -> bool {
    let scale = RadialGrid::max_abs(w0).max(f64::MIN_POSITIVE);
    let last = w0.len() - 1;
    w0[0].norm() > BOUNDARY_TOL * scale || w0[last].norm() > BOUNDARY_TOL * scale
}

/// `sum_{l <= l_max} |<w~, psi_l>|^2 / lambda_{k,l}` for full-grid data `w0`.
pub fn damping_sum(w0: &CVector, k: i32, b: f64, t: f64, basis: &WeightedBasis) -> Result<DampingSum> {
    if k == 0 {
        return Err(Error::domain("damping sum is defined for k != 0"));
    }
    let wt = phase_mixed(basis.grid(), w0, k, b, t)?;
    let coeffs = basis.coefficients(&wt)?;
    let value = coeffs
        .iter()
        .enumerate()
        .map(|(l, c)| c.norm_sqr() / basis.lambda(k, l + 1))
        .sum();
    Ok(DampingSum {
        value,
        boundary_warning: boundary_warning(w0),
    })
}

/// `-<w~, phi~>` with `phi~` from the collocation stream solve.
pub fn stream_pairing(grid: &RadialGrid, w0: &CVector, k: i32, b: f64, t: f64) -> Result<f64> {
    let wt = grid.restrict(&phase_mixed(grid, w0, k, b, t)?)?;
    let phi = StreamSolver::new(grid, k)?.solve(&wt)?;
    let q = grid.interior_weights();
    let s: Complex64 = (0..wt.len()).map(|j| wt[j] * phi[j].conj() * q[j]).sum();
    Ok(-s.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingSample {
    pub t: f64,
    /// `||d_r phi~||^2`
    pub dphi_sq: f64,
    /// `k^2 ||phi~ / r||^2`
    pub kphi_sq: f64,
    /// Trapezoid integral of the two columns up to `t`.
    pub running: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingRecord {
    pub k: i32,
    pub params: FlowParams,
    pub t_final: f64,
    pub n_t: usize,
    /// `int_0^T ||d_r phi~||^2 + k^2 ||phi~/r||^2 dt`
    pub integral: f64,
    /// `||r^2 w0||^2`
    pub data_norm_sq: f64,
    /// `|kB| |k| (log R)^2 integral / ||r^2 w0||^2`
    pub ratio: f64,
    pub boundary_warning: bool,
    /// The phase `e^{-ikBt/r^2}` stays resolvable on the grid up to `T`;
    /// past that point the discrete integrand stops decaying.
    pub phase_resolved: bool,
    pub samples: Vec<DampingSample>,
}

/// `|kB| T (1 - R^{-2}) <= 2N`: radians of phase spread the grid resolves.
pub fn phase_resolved(grid: &RadialGrid, params: &FlowParams, k: i32, t_final: f64) -> bool {
    let spread = (k as f64 * params.b).abs() * (1.0 - params.outer_radius.powi(-2));
    spread * t_final <= 2.0 * grid.degree() as f64
}

/// Largest uniform step keeping the fastest phase `kBt(1 - R^{-2})` under
/// `pi / 4` per step.
pub fn phase_step_limit(params: &FlowParams, k: i32) -> f64 {
    let spread = (k as f64 * params.b).abs() * (1.0 - params.outer_radius.powi(-2));
    PI / (4.0 * spread)
}

/// `||d_r phi||^2` and `k^2 ||phi / r||^2` for interior `phi`.
fn stream_energies(grid: &RadialGrid, phi: &CVector, k: i32) -> Result<(f64, f64)> {
    let dphi = grid.derivative(&grid.extend(phi)?)?;
    let r = grid.interior_nodes();
    let over_r = CVector::from_iterator(phi.len(), phi.iter().zip(r.iter()).map(|(z, x)| z / *x));
    Ok((
        grid.l2_norm(&dphi)?.powi(2),
        (k as f64).powi(2) * grid.l2_norm(&over_r)?.powi(2),
    ))
}

fn weighted_norm_sq(grid: &RadialGrid, f: &CVector, p: f64) -> Result<f64> {
    let r = grid.nodes();
    grid.check_full(f.len())?;
    let g = CVector::from_iterator(f.len(), f.iter().zip(r.iter()).map(|(z, x)| z * x.powf(p)));
    Ok(grid.l2_norm(&g)?.powi(2))
}

/// Time integral of the phase-mixed stream energies over `[0, T]` on a
/// uniform grid of at least `n_t` points (refined further if the phase
/// criterion asks for it).
pub fn integrated_damping(
    grid: &Arc<RadialGrid>,
    w0: &CVector,
    k: i32,
    params: &FlowParams,
    t_final: f64,
    n_t: usize,
) -> Result<DampingRecord> {
    grid.check_full(w0.len())?;
    if k == 0 {
        return Err(Error::domain("integrated damping is defined for k != 0"));
    }
    let kb = (k as f64 * params.b).abs();
    if kb == 0.0 || !(t_final >= 10.0 / kb) {
        return Err(Error::config(format!(
            "T = {t_final} must be at least 10 / |kB| = {}",
            10.0 / kb
        )));
    }
    if n_t < 200 {
        return Err(Error::config(format!("n_t = {n_t} must be at least 200")));
    }
    let needed = (t_final / phase_step_limit(params, k)).ceil() as usize + 1;
    let n_t = n_t.max(needed);
    let dt = t_final / (n_t - 1) as f64;
    let data_norm_sq = weighted_norm_sq(grid, w0, 2.0)?;
    let warn = boundary_warning(w0);
    if data_norm_sq == 0.0 {
        return Ok(DampingRecord {
            k,
            params: *params,
            t_final,
            n_t,
            integral: 0.0,
            data_norm_sq,
            ratio: 0.0,
            boundary_warning: warn,
            phase_resolved: phase_resolved(grid, params, k, t_final),
            samples: (0..n_t)
                .map(|i| DampingSample {
                    t: i as f64 * dt,
                    dphi_sq: 0.0,
                    kphi_sq: 0.0,
                    running: 0.0,
                })
                .collect(),
        });
    }
    let solver = StreamSolver::new(grid, k)?;
    let energies: Vec<(f64, f64)> = (0..n_t)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let t = i as f64 * dt;
            let wt = grid.restrict(&phase_mixed(grid, w0, k, params.b, t)?)?;
            stream_energies(grid, &solver.solve(&wt)?, k)
        })
        .collect::<Result<_>>()?;
    let samples = running_trapezoid(&energies, dt);
    let integral = samples.last().map_or(0.0, |s| s.running);
    let ratio = kb * (k as f64).abs() * params.log_r().powi(2) * integral / data_norm_sq;
    Ok(DampingRecord {
        k,
        params: *params,
        t_final,
        n_t,
        integral,
        data_norm_sq,
        ratio,
        boundary_warning: warn,
        phase_resolved: phase_resolved(grid, params, k, t_final),
        samples,
    })
}

fn running_trapezoid(energies: &[(f64, f64)], dt: f64) -> Vec<DampingSample> {
    let mut running = 0.0;
    let mut out = Vec::with_capacity(energies.len());
    for (i, &(a, b)) in energies.iter().enumerate() {
        if i > 0 {
            let (pa, pb) = energies[i - 1];
            running += 0.5 * dt * (a + b + pa + pb);
        }
        out.push(DampingSample {
            t: i as f64 * dt,
            dphi_sq: a,
            kphi_sq: b,
            running,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViscousDampingRecord {
    pub k: i32,
    pub params: FlowParams,
    pub t_final: f64,
    pub n_t: usize,
    pub c_prime: f64,
    /// `k^2 |B| R^{-4} (||e d_r phi||^2 + k^2 ||e phi / r||^2)` in `L^2 L^2`.
    pub lhs: f64,
    /// Initial-data functional of the space-time estimate.
    pub rhs: f64,
    pub ratio: f64,
    pub samples: Vec<DampingSample>,
}

/// Space-time stream-function norms along the true linear evolution
/// `e^{-tL_k} w0`, weighted by `e^{c' (nu k^2)^{1/3} |B|^{2/3} R^{-2} t}`.
pub fn viscous_damping_check(
    grid: &Arc<RadialGrid>,
    w0: &CVector,
    k: i32,
    params: &FlowParams,
    t_final: f64,
    c_prime: f64,
) -> Result<ViscousDampingRecord> {
    grid.check_full(w0.len())?;
    if k == 0 {
        return Err(Error::domain("viscous damping check is defined for k != 0"));
    }
    if !(t_final > 0.0) || !(c_prime >= 0.0) {
        return Err(Error::config("T must be positive and c' non-negative"));
    }
    let kf = k as f64;
    let kb = (kf * params.b).abs();
    let rr = params.outer_radius;
    let dt_max = phase_step_limit(params, k).min(t_final / 200.0);
    let n_t = (t_final / dt_max).ceil() as usize + 1;
    let dt = t_final / (n_t - 1) as f64;

    let rhs = {
        let s = params.nu / kb;
        let dw = grid.derivative(w0)?;
        let t1 = params.log_r().powi(-2) * rr.powi(-4) * weighted_norm_sq(grid, w0, 2.0)?;
        let t2 = rr.powi(6) * weighted_norm_sq(grid, w0, -3.0)?;
        let t3 = s.powf(2.0 / 3.0) * rr * rr * grid.l2_norm(&dw)?.powi(2);
        let t4 = (s.cbrt() * params.log_r() + 1.0)
            * (rr.powi(-2) * weighted_norm_sq(grid, w0, 1.0)?
                + s.powf(4.0 / 3.0) * kf.powi(4) * rr * rr * weighted_norm_sq(grid, w0, -1.0)?);
        t1 + t2 + t3 + t4
    };

    let op = assemble_mode_operator(grid, params, k);
    let step = crate::spectral::propagator(&op, dt);
    let sq = grid.interior_weights().map(f64::sqrt);
    let solver = StreamSolver::new(grid, k)?;
    let rate = c_prime * params.enhanced_rate(k);
    let mut y = CVector::from_iterator(sq.len(), grid.restrict(w0)?.iter().zip(sq.iter()).map(|(z, s)| z * *s));
    let mut energies = Vec::with_capacity(n_t);
    for i in 0..n_t {
        if i > 0 {
            y = &step * &y;
        }
        let w = CVector::from_iterator(y.len(), y.iter().zip(sq.iter()).map(|(z, s)| z / *s));
        let (a, b) = stream_energies(grid, &solver.solve(&w)?, k)?;
        let e2 = (2.0 * rate * i as f64 * dt).exp();
        energies.push((e2 * a, e2 * b));
    }
    let samples = running_trapezoid(&energies, dt);
    let integral = samples.last().map_or(0.0, |s| s.running);
    let lhs = kf * kf * params.b.abs() * rr.powi(-4) * integral;
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(ViscousDampingRecord {
        k,
        params: *params,
        t_final,
        n_t,
        c_prime,
        lhs,
        rhs,
        ratio,
        samples,
    })
}

/// `psi_l` sampled on the full grid as a complex vector.
pub fn psi_profile(grid: &RadialGrid, l: usize) -> CVector {
    let log_r = grid.outer_radius().ln();
    let (alpha, beta) = ((2.0 / log_r).sqrt(), PI / log_r);
    let mut v = grid.sample_complex(|r| Complex64::new(psi_value(alpha, beta, l, r), 0.0));
    let last = v.len() - 1;
    v[0] = Complex64::new(0.0, 0.0);
    v[last] = Complex64::new(0.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    fn grid(n: usize, r: f64) -> Arc<RadialGrid> {
        Arc::new(build_grid(n, r).unwrap())
    }

    /// Smooth bump with vanishing value and second derivative at the walls.
    fn bump(g: &RadialGrid, phase: f64) -> CVector {
        let r_out = g.outer_radius();
        g.sample_complex(|r| {
            let s = ((r - 1.0) * (r_out - r)).powi(3);
            Complex64::new(s * (1.0 + 0.3 * r), s * (phase * r).sin())
        })
    }

    #[test]
    fn midpoint_value_and_walls() {
        let g = grid(64, 2.0);
        let b = build_basis(&g, 16).unwrap();
        let mid = 2f64.sqrt();
        assert!((b.psi(1, mid) - b.alpha() * 2f64.powf(0.25)).abs() < 1e-14);
        let c = b.column(3);
        assert_eq!(c[0], 0.0);
        assert_eq!(c[c.len() - 1], 0.0);
    }

    #[test]
    fn rejects_under_resolved_basis() {
        let g = grid(64, 2.0);
        assert!(build_basis(&g, 17).unwrap_err().is_config());
        assert!(build_basis(&g, 0).unwrap_err().is_config());
    }

    #[test]
    fn gram_matrix_is_identity() {
        let b = build_basis(&grid(128, 2.0), 16).unwrap();
        assert!(b.gram_deviation() < 1e-10, "{}", b.gram_deviation());
    }

    #[test]
    fn eigen_relation_holds() {
        // Collocation roundoff in d_r^2 grows like N^4 eps; N = 80 keeps it
        // below the tolerance while still resolving l = 20.
        let b = build_basis(&grid(80, 2.0), 20).unwrap();
        for l in 1..=20 {
            let res = b.eigen_residual(1, l);
            assert!(res < 1e-8, "l = {l}: {res}");
        }
    }

    #[test]
    fn parseval_in_weighted_space() {
        let g = grid(128, 2.0);
        let b = build_basis(&g, 32).unwrap();
        let f = bump(&g, 1.0);
        let r = g.nodes().clone();
        let norm_w: f64 = (0..f.len()).map(|j| f[j].norm_sqr() * g.quad_weights()[j] / (r[j] * r[j])).sum();
        let sum: f64 = b.weighted_coefficients(&f).unwrap().iter().map(|c| c.norm_sqr()).sum();
        assert!(((sum - norm_w) / norm_w).abs() < 1e-6);
    }

    #[test]
    fn damping_sum_closed_value_and_zero() {
        let g = grid(96, 2.0);
        let b = build_basis(&g, 24).unwrap();
        let lam = b.lambda(1, 1);
        let r = g.nodes().clone();
        let psi = b.column(1);
        let w0 = CVector::from_iterator(psi.len(), (0..psi.len()).map(|j| Complex64::new(-lam * psi[j] / (r[j] * r[j]), 0.0)));
        let s = damping_sum(&w0, 1, 1.0, 0.0, &b).unwrap();
        assert!(((s.value - lam) / lam).abs() < 1e-10);
        assert!(!s.boundary_warning);
        let z = damping_sum(&CVector::zeros(psi.len()), 1, 1.0, 3.0, &b).unwrap();
        assert_eq!(z.value, 0.0);

        let flat = CVector::from_element(psi.len(), Complex64::new(1.0, 0.0));
        assert!(damping_sum(&flat, 1, 1.0, 0.0, &b).unwrap().boundary_warning);
    }

    #[test]
    fn damping_sum_matches_stream_pairing() {
        let g = grid(128, 2.0);
        let b = build_basis(&g, 32).unwrap();
        for (k, t) in [(1, 0.0), (1, 1.3), (2, 0.4), (3, 2.0)] {
            let w0 = bump(&g, 2.0);
            let s = damping_sum(&w0, k, 1.0, t, &b).unwrap().value;
            let p = stream_pairing(&g, &w0, k, 1.0, t).unwrap();
            assert!(((s - p) / p).abs() < 1e-8, "k={k} t={t}: {s} vs {p}");
        }
    }

    #[test]
    fn damping_sum_monotone_in_l_max() {
        let g = grid(96, 2.0);
        let w0 = bump(&g, 3.0);
        let mut prev = 0.0;
        for l_max in [2, 4, 8, 16, 24] {
            let b = build_basis(&g, l_max).unwrap();
            let s = damping_sum(&w0, 1, 1.0, 0.7, &b).unwrap().value;
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn integrated_damping_guards_and_zero() {
        let g = grid(48, 2.0);
        let p = FlowParams::new(1e-4, 0.0, 1.0, 2.0).unwrap();
        let n = g.n_points();
        assert!(integrated_damping(&g, &CVector::zeros(n), 1, &p, 5.0, 400).unwrap_err().is_config());
        assert!(integrated_damping(&g, &CVector::zeros(n), 1, &p, 50.0, 100).unwrap_err().is_config());
        let z = integrated_damping(&g, &CVector::zeros(n), 1, &p, 50.0, 400).unwrap();
        assert_eq!(z.ratio, 0.0);
    }

    #[test]
    fn integrated_damping_converges_in_time() {
        let g = grid(96, 2.0);
        let p = FlowParams::new(1e-4, 0.0, 1.0, 2.0).unwrap();
        let w0 = bump(&g, 0.0);
        let a = integrated_damping(&g, &w0, 1, &p, 100.0, 400).unwrap();
        let b = integrated_damping(&g, &w0, 1, &p, 200.0, 400).unwrap();
        assert!(a.phase_resolved && b.phase_resolved);
        assert!(((a.ratio - b.ratio) / b.ratio).abs() < 0.02);
        assert!(a.dt_ok());
    }

    impl DampingRecord {
        fn dt_ok(&self) -> bool {
            self.samples[1].t <= phase_step_limit(&self.params, self.k) * (1.0 + 1e-12)
        }
    }

    #[test]
    fn integrated_damping_b_rescaling() {
        let g = grid(160, 2.0);
        let w0 = bump(&g, 0.0);
        let vals: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&b| {
                let p = FlowParams::new(1e-4, 0.0, b, 2.0).unwrap();
                let rec = integrated_damping(&g, &w0, 1, &p, 100.0, 400).unwrap();
                assert!(rec.phase_resolved);
                rec.integral * b
            })
            .collect();
        for v in &vals {
            assert!(((v - vals[0]) / vals[0]).abs() < 0.05);
        }
    }

    #[test]
    fn viscous_check_zero_data() {
        let g = grid(32, 2.0);
        let p = FlowParams::new(1e-3, 0.0, 1.0, 2.0).unwrap();
        let r = viscous_damping_check(&g, &CVector::zeros(g.n_points()), 1, &p, 50.0, 0.5).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert_eq!(r.lhs, 0.0);
    }
}
