//! Randomized checks of one-dimensional functional inequalities on `[1, R]`.
//!
//! Test functions are short Fourier series in `s = log r / log R` with
//! random, geometrically decaying coefficients. They are evaluated in
//! closed form, integrated with a Clenshaw-Curtis rule and sup norms are
//! taken over a dense point set. Stream functions for the elliptic bounds
//! come from the collocation solvers and are interpolated barycentrically.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_grid, RadialGrid};
use crate::operators::{StreamSolver, ZeroModeSolver};
use crate::CVector;

/// Slack allowed on inequalities with explicit constants.
pub const PASS_TOL: f64 = 1e-6;
/// Minimum sample count per check.
pub const MIN_SAMPLES: usize = 100;
/// Points of the dense set used for sup norms (plus the grid nodes).
const DENSE_POINTS: usize = 2001;
/// Fourier terms per sample.
const TERMS: usize = 12;

/// Regression bounds for the elliptic estimates with unspecified constants:
/// twice the largest ratio seen in a 10^4-sample calibration over
/// `R in {1.5, 2, 4}` and `k in {1, 2, 4}` (N = 64, seed 0).
pub const ELLIPTIC_ENERGY_BOUND: f64 = 2.0 * ELLIPTIC_ENERGY_CALIBRATED;
pub const ELLIPTIC_L1_BOUND: f64 = 2.0 * ELLIPTIC_L1_CALIBRATED;
pub const ELLIPTIC_LINF_BOUND: f64 = 2.0 * ELLIPTIC_LINF_CALIBRATED;
pub const CURL_PAIRING_BOUND: f64 = 2.0 * CURL_PAIRING_CALIBRATED;
const ELLIPTIC_ENERGY_CALIBRATED: f64 = 0.7477;
const ELLIPTIC_L1_CALIBRATED: f64 = 0.2288;
const ELLIPTIC_LINF_CALIBRATED: f64 = 0.8780;
const CURL_PAIRING_CALIBRATED: f64 = 0.2055;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMode {
    /// No constraint at the walls.
    Free,
    /// `w(1) = w(R) = 0`.
    Dirichlet,
    /// `int_1^R w dr = 0`.
    MeanZero,
}

/// Seeded generator of smooth complex test functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSampler {
    pub seed: u64,
    pub mode: BoundaryMode,
    /// Coefficient of term `n` is drawn with scale `rho^n`, `rho` uniform
    /// in this range per sample.
    pub decay: (f64, f64),
}

impl TestFunctionSampler {
    pub fn new(seed: u64, mode: BoundaryMode) -> Self {
        Self {
            seed,
            mode,
            decay: (0.3, 0.9),
        }
    }

    /// Sample `index`; each index has its own RNG stream, so results do not
    /// depend on evaluation order.
    pub fn sample(&self, index: u64, outer_radius: f64) -> TestFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let mut normal = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let mut coeff = |scale: f64| normal() * scale;
        let mut local = ChaCha8Rng::seed_from_u64(self.seed);
        local.set_stream(index.wrapping_add(1 << 63));
        let rho = local.random_range(self.decay.0..=self.decay.1);
        let sin: Vec<Complex64> = (1..=TERMS).map(|n| coeff(rho.powi(n as i32 - 1))).collect();
        let (cos, offset, slope) = match self.mode {
            BoundaryMode::Dirichlet => (vec![Complex64::new(0.0, 0.0); TERMS], Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            _ => (
                (1..=TERMS).map(|n| coeff(rho.powi(n as i32 - 1))).collect(),
                coeff(1.0),
                coeff(1.0),
            ),
        };
        let mut f = TestFunction {
            log_r: outer_radius.ln(),
            outer_radius,
            sin,
            cos,
            offset,
            slope,
        };
        if self.mode == BoundaryMode::MeanZero {
            let g = mean_grid(outer_radius);
            let mean = g.quad_weights().iter().zip(g.nodes().iter()).map(|(q, &r)| f.value(r) * *q).sum::<Complex64>()
                / (outer_radius - 1.0);
            f.offset -= mean;
        }
        f
    }
}

fn mean_grid(outer_radius: f64) -> RadialGrid {
    build_grid(64, outer_radius).expect("valid fixed grid")
}

/// `offset + slope s + sum_n (a_n sin(n pi s) + b_n cos(n pi s))`,
/// `s = log r / log R`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub log_r: f64,
    pub outer_radius: f64,
    pub sin: Vec<Complex64>,
    pub cos: Vec<Complex64>,
    pub offset: Complex64,
    pub slope: Complex64,
}

impl TestFunction {
    fn s(&self, r: f64) -> f64 {
        (r.ln() / self.log_r).clamp(0.0, 1.0)
    }

    pub fn value(&self, r: f64) -> Complex64 {
        let s = self.s(r);
        let mut v = self.offset + self.slope * s;
        for n in 0..self.sin.len() {
            let a = PI * (n + 1) as f64 * s;
            v += self.sin[n] * a.sin() + self.cos[n] * a.cos();
        }
        v
    }

    pub fn derivative(&self, r: f64) -> Complex64 {
        let s = self.s(r);
        let mut d = self.slope;
        for n in 0..self.sin.len() {
            let w = PI * (n + 1) as f64;
            d += (self.sin[n] * (w * s).cos() - self.cos[n] * (w * s).sin()) * w;
        }
        d / (r * self.log_r)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let z = Complex64::new(c, 0.0);
        Self {
            sin: self.sin.iter().map(|a| a * z).collect(),
            cos: self.cos.iter().map(|a| a * z).collect(),
            offset: self.offset * z,
            slope: self.slope * z,
            ..self.clone()
        }
    }
}

/// Quadrature grid plus dense evaluation points.
struct Workspace {
    grid: RadialGrid,
    dense: Vec<f64>,
    bary: Vec<f64>,
}

impl Workspace {
    fn new(n: usize, outer_radius: f64) -> Result<Self> {
        let grid = build_grid(n, outer_radius)?;
        let dense = (0..DENSE_POINTS)
            .map(|i| 1.0 + (outer_radius - 1.0) * i as f64 / (DENSE_POINTS - 1) as f64)
            .chain(grid.nodes().iter().copied())
            .collect();
        let bary = (0..=n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Ok(Self { grid, dense, bary })
    }

    /// `(int |f|^2 r^p dr)^{1/2}` for node values `f`.
    fn norm(&self, f: &[Complex64], p: f64) -> f64 {
        let q = self.grid.quad_weights();
        let r = self.grid.nodes();
        (0..f.len()).map(|j| f[j].norm_sqr() * r[j].powf(p) * q[j]).sum::<f64>().sqrt()
    }

    fn l1(&self, f: &[Complex64], p: f64) -> f64 {
        let q = self.grid.quad_weights();
        let r = self.grid.nodes();
        (0..f.len()).map(|j| f[j].norm() * r[j].powf(p) * q[j]).sum()
    }

    fn nodal<F: Fn(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.grid.nodes().iter().map(|&r| f(r)).collect()
    }

    /// `sup |f(r)| r^p` over the dense set, `f` analytic.
    fn sup<F: Fn(f64) -> Complex64>(&self, f: F, p: f64) -> f64 {
        self.dense.iter().fold(0.0, |m, &r| m.max(f(r).norm() * r.powf(p)))
    }

    /// Barycentric interpolation of full-grid node values.
    fn interpolate(&self, values: &CVector, x: f64) -> Complex64 {
        let nodes = self.grid.nodes();
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..nodes.len() {
            let d = x - nodes[j];
            if d == 0.0 {
                return values[j];
            }
            let w = self.bary[j] / d;
            num += values[j] * w;
            den += w;
        }
        num / den
    }

    fn sup_interp(&self, values: &CVector, p: f64) -> f64 {
        self.dense
            .iter()
            .fold(0.0, |m, &r| m.max(self.interpolate(values, r).norm() * r.powf(p)))
    }
}

/// Result of one inequality over a batch of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub outer_radius: f64,
    pub k: Option<i32>,
    pub samples: usize,
    pub seed: u64,
    pub worst_ratio: f64,
    pub worst_sample: u64,
    /// Ratio the check is held to: `1 + PASS_TOL` for explicit constants,
    /// a regression bound otherwise.
    pub bound: f64,
    pub passed: bool,
    /// First few sample indices above the bound.
    pub violations: Vec<u64>,
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::config(format!(
            "samples = {samples} must be at least {MIN_SAMPLES}"
        )));
    }
    Ok(())
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// Evaluate `ratio_of(sample)` on every sample index in parallel.
fn run_batch<F>(
    name: &str,
    outer_radius: f64,
    k: Option<i32>,
    samples: usize,
    sampler: TestFunctionSampler,
    bound: f64,
    ratio_of: F,
) -> CheckReport
where
    F: Fn(&TestFunction) -> f64 + Sync,
{
    let ratios: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| ratio_of(&sampler.sample(i, outer_radius)))
        .collect();
    let (worst_sample, worst_ratio) = ratios
        .iter()
        .enumerate()
        .fold((0u64, 0.0f64), |(bi, bv), (i, &v)| if v > bv { (i as u64, v) } else { (bi, bv) });
    let violations: Vec<u64> = ratios
        .iter()
        .enumerate()
        .filter(|(_, &v)| !(v <= bound))
        .map(|(i, _)| i as u64)
        .take(10)
        .collect();
    CheckReport {
        name: name.to_string(),
        outer_radius,
        k,
        samples,
        seed: sampler.seed,
        worst_ratio,
        worst_sample,
        bound,
        passed: violations.is_empty(),
        violations,
    }
}

/// `||w||_inf^2 <= 2 ||w/r^{1/2}|| ||r^{1/2} w'|| + R/(R-1) ||w/r^{1/2}||^2`
/// on free samples and the same without the last term on Dirichlet samples.
pub fn check_sobolev(n: usize, outer_radius: f64, samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    check_samples(samples)?;
    let ws = Workspace::new(n, outer_radius)?;
    let c = outer_radius / (outer_radius - 1.0);
    let free = run_batch("sobolev_free", outer_radius, None, samples, TestFunctionSampler::new(seed, BoundaryMode::Free), 1.0 + PASS_TOL, |f| {
        let w = ws.nodal(|r| f.value(r));
        let dw = ws.nodal(|r| f.derivative(r));
        let a = ws.norm(&w, -1.0);
        ratio(ws.sup(|r| f.value(r), 0.0).powi(2), 2.0 * a * ws.norm(&dw, 1.0) + c * a * a)
    });
    let dir = run_batch("sobolev_dirichlet", outer_radius, None, samples, TestFunctionSampler::new(seed, BoundaryMode::Dirichlet), 1.0 + PASS_TOL, |f| {
        let w = ws.nodal(|r| f.value(r));
        let dw = ws.nodal(|r| f.derivative(r));
        ratio(ws.sup(|r| f.value(r), 0.0).powi(2), 2.0 * ws.norm(&w, -1.0) * ws.norm(&dw, 1.0))
    });
    Ok(vec![free, dir])
}

/// `||r^{1/2} w||_inf^2 <= 4 ||r^{1/2} w|| ||r^{1/2} w'||` on Dirichlet samples.
pub fn check_weighted_linf(n: usize, outer_radius: f64, samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    check_samples(samples)?;
    let ws = Workspace::new(n, outer_radius)?;
    Ok(vec![run_batch("weighted_linf", outer_radius, None, samples, TestFunctionSampler::new(seed, BoundaryMode::Dirichlet), 1.0 + PASS_TOL, |f| {
        let w = ws.nodal(|r| f.value(r));
        let dw = ws.nodal(|r| f.derivative(r));
        ratio(ws.sup(|r| f.value(r), 0.5).powi(2), 4.0 * ws.norm(&w, 1.0) * ws.norm(&dw, 1.0))
    })])
}

/// `||w|| <= 2 ||r w'||` and `||w / r^{1/2}|| <= 2 log R ||r^{1/2} w'||` on
/// Dirichlet samples.
pub fn check_poincare(n: usize, outer_radius: f64, samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    check_samples(samples)?;
    let ws = Workspace::new(n, outer_radius)?;
    let sampler = TestFunctionSampler::new(seed, BoundaryMode::Dirichlet);
    let log_r = outer_radius.ln();
    let first = run_batch("poincare_plain", outer_radius, None, samples, sampler, 1.0 + PASS_TOL, |f| {
        let w = ws.nodal(|r| f.value(r));
        let dw = ws.nodal(|r| f.derivative(r));
        ratio(ws.norm(&w, 0.0), 2.0 * ws.norm(&dw, 2.0))
    });
    let second = run_batch("poincare_log", outer_radius, None, samples, sampler, 1.0 + PASS_TOL, |f| {
        let w = ws.nodal(|r| f.value(r));
        let dw = ws.nodal(|r| f.derivative(r));
        ratio(ws.norm(&w, -1.0), 2.0 * log_r * ws.norm(&dw, 1.0))
    });
    Ok(vec![first, second])
}

/// Raw ratios of the three mode-`k` elliptic bounds for one sample, each
/// left side over its right side without constant.
pub fn elliptic_ratios(ws_n: usize, outer_radius: f64, k: i32, f: &TestFunction) -> Result<[f64; 3]> {
    let ws = Workspace::new(ws_n, outer_radius)?;
    let solver = StreamSolver::new(&ws.grid, k)?;
    elliptic_with(&ws, &solver, k, f)
}

fn elliptic_with(ws: &Workspace, solver: &StreamSolver, k: i32, f: &TestFunction) -> Result<[f64; 3]> {
    let g = &ws.grid;
    let kf = (k as f64).abs();
    let rr = g.outer_radius();
    let w_full = CVector::from_vec(ws.nodal(|r| f.value(r)));
    let phi = g.extend(&solver.solve(&g.restrict(&w_full)?)?)?;
    let dphi = g.derivative(&phi)?;
    let energy = ws.norm(dphi.as_slice(), 0.0).powi(2) + kf * kf * ws.norm(phi.as_slice(), -2.0).powi(2);
    let rw = ws.norm(w_full.as_slice(), 2.0);
    let l1 = ws.l1(w_full.as_slice(), 0.5);
    let linf = ws.sup_interp(&dphi, 0.5) + kf * ws.sup_interp(&phi, -0.5);
    Ok([
        ratio(energy, rw * rw / (kf * kf)),
        ratio(energy, l1 * l1 / kf),
        ratio(linf, (rr / (rr - 1.0)).sqrt() / kf.sqrt() * rw),
    ])
}

/// The three mode-`k` elliptic bounds on free samples, held to the frozen
/// regression constants.
pub fn check_elliptic(n: usize, outer_radius: f64, k: i32, samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    check_samples(samples)?;
    let ws = Workspace::new(n, outer_radius)?;
    let solver = StreamSolver::new(&ws.grid, k)?;
    let sampler = TestFunctionSampler::new(seed, BoundaryMode::Free);
    let all: Vec<[f64; 3]> = (0..samples as u64)
        .into_par_iter()
        .map(|i| elliptic_with(&ws, &solver, k, &sampler.sample(i, outer_radius)))
        .collect::<Result<_>>()?;
    let names = ["elliptic_energy", "elliptic_l1", "elliptic_linf"];
    let bounds = [ELLIPTIC_ENERGY_BOUND, ELLIPTIC_L1_BOUND, ELLIPTIC_LINF_BOUND];
    Ok((0..3)
        .map(|j| {
            let col: Vec<f64> = all.iter().map(|a| a[j]).collect();
            report_from(names[j], outer_radius, Some(k), seed, bounds[j], &col)
        })
        .collect())
}

fn report_from(name: &str, outer_radius: f64, k: Option<i32>, seed: u64, bound: f64, ratios: &[f64]) -> CheckReport {
    let (worst_sample, worst_ratio) = ratios
        .iter()
        .enumerate()
        .fold((0u64, 0.0f64), |(bi, bv), (i, &v)| if v > bv { (i as u64, v) } else { (bi, bv) });
    let violations: Vec<u64> = ratios
        .iter()
        .enumerate()
        .filter(|(_, &v)| !(v <= bound))
        .map(|(i, _)| i as u64)
        .take(10)
        .collect();
    CheckReport {
        name: name.to_string(),
        outer_radius,
        k,
        samples: ratios.len(),
        seed,
        worst_ratio,
        worst_sample,
        bound,
        passed: violations.is_empty(),
        violations,
    }
}

fn curl_pairing_with(ws: &Workspace, solver: &ZeroModeSolver, f: &TestFunction) -> Result<f64> {
    let g = &ws.grid;
    let rr = g.outer_radius();
    let w_full = CVector::from_vec(ws.nodal(|r| f.value(r)));
    let phi = g.extend(&solver.solve(&g.restrict(&w_full)?)?)?;
    let dphi = g.derivative(&phi)?;
    let rhs = (rr / (rr - 1.0)).sqrt() * (1.0 + rr.ln()) * ws.norm(w_full.as_slice(), 3.0);
    Ok(ratio(ws.sup_interp(&dphi, 0.0), rhs))
}

/// `||phi'||_inf` against `(R/(R-1))^{1/2} (1 + log R) ||r^{3/2} w||` for
/// `w = (d_r^2 + (1/r) d_r) phi` with Dirichlet data on both.
pub fn check_curl_pairing(n: usize, outer_radius: f64, samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    check_samples(samples)?;
    let ws = Workspace::new(n, outer_radius)?;
    let solver = ZeroModeSolver::new(&ws.grid)?;
    let sampler = TestFunctionSampler::new(seed, BoundaryMode::Dirichlet);
    let ratios: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| curl_pairing_with(&ws, &solver, &sampler.sample(i, outer_radius)))
        .collect::<Result<_>>()?;
    Ok(vec![report_from("curl_pairing", outer_radius, None, seed, CURL_PAIRING_BOUND, &ratios)])
}

/// Largest raw ratio of each regression-frozen bound over the calibration
/// sweep, in the order energy, L1, Linf, A6.
pub fn calibrate(n: usize, samples: usize, seed: u64) -> Result<[f64; 4]> {
    let mut worst = [0.0f64; 4];
    for &rr in &SUITE_RADII {
        for &k in &SUITE_MODES {
            for rep in check_elliptic(n, rr, k, samples, seed)? {
                let j = match rep.name.as_str() {
                    "elliptic_energy" => 0,
                    "elliptic_l1" => 1,
                    _ => 2,
                };
                worst[j] = worst[j].max(rep.worst_ratio);
            }
        }
        worst[3] = worst[3].max(check_curl_pairing(n, rr, samples, seed)?[0].worst_ratio);
    }
    Ok(worst)
}

/// Radii swept by [`run_suite`].
pub const SUITE_RADII: [f64; 3] = [1.5, 2.0, 4.0];
/// Modes of the elliptic bounds in [`run_suite`].
pub const SUITE_MODES: [i32; 3] = [1, 2, 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub seed: u64,
    pub samples: usize,
    pub n: usize,
    pub reports: Vec<CheckReport>,
    pub all_passed: bool,
}

/// Every check at every radius of [`SUITE_RADII`].
pub fn run_suite(n: usize, samples: usize, seed: u64) -> Result<InequalityReport> {
    let mut reports = Vec::new();
    for &rr in &SUITE_RADII {
        reports.extend(check_sobolev(n, rr, samples, seed)?);
        reports.extend(check_weighted_linf(n, rr, samples, seed)?);
        reports.extend(check_poincare(n, rr, samples, seed)?);
        for &k in &SUITE_MODES {
            reports.extend(check_elliptic(n, rr, k, samples, seed)?);
        }
        reports.extend(check_curl_pairing(n, rr, samples, seed)?);
    }
    let all_passed = reports.iter().all(|r| r.passed);
    Ok(InequalityReport {
        seed,
        samples,
        n,
        reports,
        all_passed,
    })
}
