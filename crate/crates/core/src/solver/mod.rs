//! Time integration of the full perturbation system: Fourier modes in the
//! angle, collocation in the radius, IMEX-BDF2 in time.
//!
//! Each `L_k` (and the polar diffusion of the axisymmetric part) is treated
//! implicitly with a pre-inverted system; the advection terms are
//! extrapolated explicitly.

pub mod nonlinear;
pub mod state;
pub mod stepper;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_grid, RadialGrid};
use crate::operators::{assemble_mode_operator, polar_laplacian_interior, FlowParams};
use crate::spectral::{fit_decay, rate_guess, DecayFit, FIT_WINDOW};
use crate::{CMatrix, CVector};

pub use nonlinear::{explicit_forcing, nonlinear_terms, nonlinear_terms_with, StreamOperators, Streams};
pub use state::{initial_state, Profile, SpectralState};
pub use stepper::ImexBdf2;

/// Courant number used for the default step.
const CFL_NUMBER: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub params: FlowParams,
    /// Highest retained angular mode `K`.
    pub k_max: usize,
    /// Chebyshev degree `N`.
    pub n: usize,
    /// Time step; `None` picks `min(0.1 / mu_K, CFL)`.
    pub dt: Option<f64>,
    pub t_final: f64,
    pub profile: Profile,
    /// `||w(0)||` in `L^2(r dr d theta)`.
    pub amplitude: f64,
    pub seed: u64,
    /// `false` drops the advection terms (linear evolution).
    pub nonlinear: bool,
    /// Approximate number of stored diagnostic records.
    pub n_records: usize,
    /// Exponent factor `c'` of the energy weights `e^{c' mu_k t}`.
    pub c_prime: f64,
}

impl SimulationConfig {
    pub fn new(params: FlowParams, k_max: usize, n: usize, t_final: f64, amplitude: f64) -> Self {
        Self {
            params,
            k_max,
            n,
            dt: None,
            t_final,
            profile: Profile::Psi1,
            amplitude,
            seed: 0,
            nonlinear: true,
            n_records: 200,
            c_prime: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::config(format!("dt = {dt} must be positive")));
            }
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::config(format!("T = {} must be positive", self.t_final)));
        }
        if self.k_max == 0 {
            return Err(Error::config("K must be at least 1"));
        }
        if self.n_records == 0 {
            return Err(Error::config("n_records must be at least 1"));
        }
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::config(format!("amplitude = {} must be non-negative", self.amplitude)));
        }
        if !(self.c_prime >= 0.0) {
            return Err(Error::config(format!("c_prime = {} must be non-negative", self.c_prime)));
        }
        Ok(())
    }
}

/// Advances a [`SpectralState`] by fixed steps.
pub struct Integrator {
    state: SpectralState,
    steppers: Vec<ImexBdf2>,
    streams_ops: StreamOperators,
    streams: Option<Streams>,
    history: Option<(Vec<CVector>, Vec<CVector>)>,
    nonlinear: bool,
    dt: f64,
}

impl Integrator {
    pub fn new(state: SpectralState, dt: f64, nonlinear: bool) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::config(format!("dt = {dt} must be positive")));
        }
        let grid = Arc::clone(state.grid());
        let params = *state.params();
        let k_max = state.k_max();
        let steppers = (0..=k_max)
            .into_par_iter()
            .map(|k| {
                let matrix = if k == 0 {
                    polar_laplacian_interior(&grid).map(|x| Complex64::new(-params.nu * x, 0.0))
                } else {
                    assemble_mode_operator(&grid, &params, k as i32).matrix().clone()
                };
                ImexBdf2::new(&matrix, dt).ok_or_else(|| Error::domain("singular implicit system"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            streams_ops: StreamOperators::new(&grid, k_max)?,
            state,
            steppers,
            streams: None,
            history: None,
            nonlinear,
            dt,
        })
    }

    pub fn state(&self) -> &SpectralState {
        &self.state
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Stream functions of the current state (cached between steps).
    pub fn streams(&mut self) -> Result<&Streams> {
        if self.streams.is_none() {
            self.streams = Some(self.streams_ops.solve(&self.state)?);
        }
        Ok(self.streams.as_ref().unwrap())
    }

    fn forcing(&mut self) -> Result<Vec<CVector>> {
        let m = self.state.grid().interior_len();
        if !self.nonlinear {
            return Ok(vec![CVector::zeros(m); self.state.k_max() + 1]);
        }
        let grid = Arc::clone(self.state.grid());
        explicit_forcing(&grid, self.streams()?)
    }

    /// One IMEX step; the first step is IMEX-Euler, later ones BDF2.
    pub fn step(&mut self) -> Result<()> {
        let f_n = self.forcing()?;
        let w_n = self.state.modes.clone();
        let next: Vec<CVector> = match &self.history {
            None => (0..w_n.len())
                .into_par_iter()
                .map(|k| self.steppers[k].start(&w_n[k], &f_n[k]))
                .collect(),
            Some((w_prev, f_prev)) => (0..w_n.len())
                .into_par_iter()
                .map(|k| self.steppers[k].step(&w_n[k], &w_prev[k], &f_n[k], &f_prev[k]))
                .collect(),
        };
        let t_next = self.state.time + self.dt;
        let mut candidate = self.state.clone();
        candidate.modes = next;
        // Rounding can leave an imaginary residue in the polar mode.
        candidate.modes[0] = candidate.modes[0].map(|z| Complex64::new(z.re, 0.0));
        candidate.time = t_next;
        if !candidate.is_finite() {
            return Err(Error::Integration {
                time: t_next,
                reason: format!("non-finite state; last good state at t = {}", self.state.time),
            });
        }
        self.history = Some((w_n, f_n));
        self.state = candidate;
        self.streams = None;
        Ok(())
    }
}

/// One row of the diagnostic time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    /// `||w - \bar w||`
    pub deviation_norm: f64,
    /// `||\bar w||`
    pub mean_norm: f64,
    /// `(||w||^2 - ||w(0)||^2 + 2 int_0^t D) / ||w(0)||^2`, with `D` the
    /// viscous dissipation; zero for the exact dynamics.
    pub enstrophy_residual: f64,
    /// Running `E_0, ..., E_K`.
    pub energies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub dt: f64,
    pub n_steps: usize,
    /// Step bound from `0.1 / mu_K`.
    pub dt_rate_bound: f64,
    /// Step bound from the Courant condition at `t = 0`.
    pub dt_cfl_bound: f64,
    /// Largest Courant number seen at the recorded times.
    pub max_cfl: f64,
    pub mu: Vec<f64>,
    pub regime_ratio: f64,
    pub initial_functional: f64,
    pub initial_energy: f64,
    pub initial_deviation: f64,
    pub initial_mean: f64,
    pub final_deviation: f64,
    /// `||w - \bar w||(T) / ||w - \bar w||(0)`, or 0 for zero data.
    pub final_ratio: f64,
    /// Largest `||w - \bar w||(t) / ||w - \bar w||(0)` over all steps.
    pub max_growth: f64,
    pub max_mean_norm: f64,
    /// Largest `|enstrophy residual| / t` over the records.
    pub max_residual_rate: f64,
    pub decay_fit: Option<DecayFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub config: SimulationConfig,
    pub records: Vec<DiagnosticRecord>,
    pub summary: SimulationSummary,
}

/// `2 pi [nu ||r^{1/2} d_r w_=||^2 + 2 sum_k nu (||d_r w_k||^2 + (k^2 - 1/4) ||w_k / r||^2)]`.
fn dissipation(state: &SpectralState) -> f64 {
    let g = state.grid();
    let nu = state.params().nu;
    let r_full = g.nodes();
    let r = g.interior_nodes();
    let mut total = 0.0;
    for k in 0..=state.k_max() {
        let w = &state.modes[k];
        let d = g.derivative(&g.extend(w).unwrap()).unwrap();
        if k == 0 {
            let rd = CVector::from_iterator(d.len(), d.iter().zip(r_full.iter()).map(|(z, x)| z * x.sqrt()));
            total += nu * g.l2_norm(&rd).unwrap().powi(2);
        } else {
            let over_r = CVector::from_iterator(w.len(), w.iter().zip(r.iter()).map(|(z, x)| z / *x));
            let kk = (k as f64).powi(2) - 0.25;
            total += 2.0 * nu * (g.l2_norm(&d).unwrap().powi(2) + kk * g.l2_norm(&over_r).unwrap().powi(2));
        }
    }
    2.0 * PI * total
}

/// Running pieces of the energies `E_k`.
struct EnergyTracker {
    c_prime: f64,
    mu: Vec<f64>,
    b_abs: f64,
    outer_radius: f64,
    sup: Vec<f64>,
    l2: Vec<f64>,
    l2linf: Vec<f64>,
    last: Option<(f64, Vec<(f64, f64)>)>,
}

impl EnergyTracker {
    fn new(params: &FlowParams, k_max: usize, c_prime: f64) -> Self {
        Self {
            c_prime,
            mu: (0..=k_max).map(|k| params.mu(k as i32)).collect(),
            b_abs: params.b.abs(),
            outer_radius: params.outer_radius,
            sup: vec![0.0; k_max + 1],
            l2: vec![0.0; k_max + 1],
            l2linf: vec![0.0; k_max + 1],
            last: None,
        }
    }

    /// Fold in the state at time `t`.
    fn push(&mut self, t: f64, state: &SpectralState, streams: &Streams) {
        let g = state.grid();
        let r = g.interior_nodes();
        let mut now = Vec::with_capacity(self.mu.len());
        for k in 0..self.mu.len() {
            let norm = g.l2_norm(&streams.w[k]).unwrap();
            if k == 0 {
                self.sup[0] = self.sup[0].max(norm);
                now.push((0.0, 0.0));
                continue;
            }
            let phi_max = streams.phi[k]
                .iter()
                .zip(r.iter())
                .fold(0.0f64, |m, (z, x)| m.max(z.norm() / x.sqrt()));
            // Weighted quantities in log form so a decaying mode never meets
            // an overflowing weight.
            let lw = self.c_prime * self.mu[k] * t;
            let weighted = |x: f64| if x > 0.0 { (lw + x.ln()).exp() } else { 0.0 };
            let wn = weighted(norm);
            self.sup[k] = self.sup[k].max(wn);
            now.push((wn * wn, weighted(phi_max).powi(2)));
        }
        if let Some((t0, prev)) = &self.last {
            let h = t - t0;
            for k in 1..self.mu.len() {
                self.l2[k] += 0.5 * h * (now[k].0 + prev[k].0);
                self.l2linf[k] += 0.5 * h * (now[k].1 + prev[k].1);
            }
        }
        self.last = Some((t, now));
    }

    fn energies(&self) -> Vec<f64> {
        (0..self.mu.len())
            .map(|k| {
                if k == 0 {
                    self.sup[0]
                } else {
                    let kf = k as f64;
                    self.sup[k]
                        + self.mu[k].sqrt() * self.l2[k].sqrt()
                        + self.b_abs.sqrt() * kf.powf(1.5) / self.outer_radius.powi(2) * self.l2linf[k].sqrt()
                }
            })
            .collect()
    }
}

/// Courant denominator `K (|B| + U_theta) + U_r / dr_min` from the stream
/// functions; `dt = CFL_NUMBER / denominator`.
fn courant_rate(state: &SpectralState, streams: &Streams) -> f64 {
    let g = state.grid();
    let r = g.interior_nodes();
    let nodes = g.nodes();
    let dr_min = nodes[0] - nodes[1];
    let mut u_theta = 0.0;
    let mut u_r = 0.0;
    for k in 0..=state.k_max() {
        let mult = if k == 0 { 1.0 } else { 2.0 };
        u_theta += mult * RadialGrid::max_abs(&streams.dphi[k]);
        let radial = streams.phi[k]
            .iter()
            .zip(r.iter())
            .fold(0.0f64, |m, (z, x)| m.max(z.norm() / x.powf(1.5)));
        u_r += mult * k as f64 * radial;
    }
    state.k_max() as f64 * (state.params().b.abs() + u_theta) + u_r / dr_min
}

/// Integrate the configured run and collect diagnostics.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationResult> {
    config.validate()?;
    let params = config.params;
    let grid = Arc::new(build_grid(config.n, params.outer_radius)?);
    let k_max = config.k_max;
    let state = initial_state(&grid, &params, k_max, config.profile, config.amplitude, config.seed)?;

    let dt_rate_bound = 0.1 / params.mu(k_max as i32);
    let initial_streams = StreamOperators::new(&grid, k_max)?.solve(&state)?;
    let dt_cfl_bound = CFL_NUMBER / courant_rate(&state, &initial_streams);
    let requested = config.dt.unwrap_or(dt_rate_bound.min(dt_cfl_bound));
    // Land exactly on T.
    let n_steps = ((config.t_final / requested) - 1e-9).ceil().max(1.0) as usize;
    let dt = config.t_final / n_steps as f64;
    let record_every = (n_steps / config.n_records).max(1);

    let initial_deviation = state.deviation_norm();
    let initial_mean = state.mean_norm();
    let z0 = state.total_norm().powi(2);
    let initial_functional = state.initial_functional();
    let initial_energy = state.initial_energy();

    let mut integ = Integrator::new(state, dt, config.nonlinear)?;
    let mut tracker = EnergyTracker::new(&params, k_max, config.c_prime);
    let mut records = Vec::new();
    let mut dissipated = 0.0;
    let mut d_prev = dissipation(integ.state());
    let mut max_growth: f64 = if initial_deviation > 0.0 { 1.0 } else { 0.0 };
    let mut max_mean: f64 = initial_mean;
    let mut max_cfl: f64 = 0.0;
    let mut max_residual_rate: f64 = 0.0;

    for n in 0..=n_steps {
        if n > 0 {
            integ.step()?;
            let d_now = dissipation(integ.state());
            dissipated += 0.5 * dt * (d_now + d_prev);
            d_prev = d_now;
        }
        let t = integ.state().time();
        let dev = integ.state().deviation_norm();
        let mean = integ.state().mean_norm();
        if initial_deviation > 0.0 {
            max_growth = max_growth.max(dev / initial_deviation);
        }
        max_mean = max_mean.max(mean);
        let streams = integ.streams()?.clone();
        tracker.push(t, integ.state(), &streams);
        if n % record_every == 0 || n == n_steps {
            let residual = if z0 > 0.0 {
                (integ.state().total_norm().powi(2) - z0 + 2.0 * dissipated) / z0
            } else {
                0.0
            };
            if t > 0.0 {
                max_residual_rate = max_residual_rate.max(residual.abs() / t);
            }
            max_cfl = max_cfl.max(dt * courant_rate(integ.state(), &streams));
            records.push(DiagnosticRecord {
                t,
                deviation_norm: dev,
                mean_norm: mean,
                enstrophy_residual: residual,
                energies: tracker.energies(),
            });
        }
    }

    let final_deviation = records.last().map_or(0.0, |r| r.deviation_norm);
    let final_ratio = if initial_deviation > 0.0 {
        final_deviation / initial_deviation
    } else {
        0.0
    };
    let decay_fit = deviation_decay_fit(&params, config.n, &records, config.t_final);
    Ok(SimulationResult {
        config: config.clone(),
        records,
        summary: SimulationSummary {
            dt,
            n_steps,
            dt_rate_bound,
            dt_cfl_bound,
            max_cfl,
            mu: (0..=k_max).map(|k| params.mu(k as i32)).collect(),
            regime_ratio: params.regime_ratio(),
            initial_functional,
            initial_energy,
            initial_deviation,
            initial_mean,
            final_deviation,
            final_ratio,
            max_growth,
            max_mean_norm: max_mean,
            max_residual_rate,
            decay_fit,
        },
    })
}

/// Exponential fit of `||w - \bar w||` over `[2, 20] / rate_guess(k = 1)`,
/// clipped to `T`.
fn deviation_decay_fit(params: &FlowParams, n: usize, records: &[DiagnosticRecord], t_final: f64) -> Option<DecayFit> {
    let g = rate_guess(params, 1);
    let window = (FIT_WINDOW.0 / g, (FIT_WINDOW.1 / g).min(t_final));
    let (ts, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.t >= window.0 && r.t <= window.1 && r.deviation_norm > 0.0)
        .map(|r| (r.t, r.deviation_norm))
        .unzip();
    if ts.len() < 3 {
        return None;
    }
    fit_decay(params, 1, n, &ts, &ys, window).ok()
}

/// Zero-mode and mode-`k` operators as plain matrices, for callers that
/// integrate a single linear mode outside [`Integrator`].
pub fn mode_matrix(grid: &Arc<RadialGrid>, params: &FlowParams, k: i32) -> CMatrix {
    if k == 0 {
        polar_laplacian_interior(grid).map(|x| Complex64::new(-params.nu * x, 0.0))
    } else {
        assemble_mode_operator(grid, params, k).matrix().clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::propagate;

    fn params(nu: f64) -> FlowParams {
        FlowParams::new(nu, 0.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn zero_amplitude_stays_zero() {
        let mut cfg = SimulationConfig::new(params(1e-3), 3, 32, 5.0, 0.0);
        cfg.dt = Some(0.05);
        let res = simulate(&cfg).unwrap();
        for r in &res.records {
            assert_eq!(r.deviation_norm, 0.0);
            assert_eq!(r.mean_norm, 0.0);
            assert!(r.energies.iter().all(|&e| e == 0.0));
        }
        assert_eq!(res.summary.max_growth, 0.0);
        assert!(res.summary.decay_fit.is_none());
    }

    #[test]
    fn rejects_bad_step() {
        let mut cfg = SimulationConfig::new(params(1e-3), 3, 32, 5.0, 1.0);
        cfg.dt = Some(0.0);
        let err = simulate(&cfg).unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("dt"));
    }

    #[test]
    fn linear_run_matches_matrix_exponential() {
        let p = params(1e-2);
        let grid = Arc::new(build_grid(32, 2.0).unwrap());
        let s0 = initial_state(&grid, &p, 1, Profile::Psi1, 1.0, 0).unwrap();
        let w0 = s0.mode(1);
        let t = 2.0;
        let exact = propagate(&assemble_mode_operator(&grid, &p, 1), &w0, t).unwrap();
        let err = |dt: f64| {
            let mut integ = Integrator::new(s0.clone(), dt, false).unwrap();
            for _ in 0..(t / dt).round() as usize {
                integ.step().unwrap();
            }
            grid.l2_norm(&(integ.state().mode(1) - &exact)).unwrap() / grid.l2_norm(&exact).unwrap()
        };
        let (e1, e2) = (err(0.02), err(0.01));
        assert!(e2 < 1e-4);
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }

    #[test]
    fn a_does_not_enter() {
        let run = |a: f64| {
            let mut cfg = SimulationConfig::new(FlowParams::new(1e-3, a, 1.0, 2.0).unwrap(), 3, 24, 3.0, 0.5);
            cfg.profile = Profile::Random;
            cfg.dt = Some(0.05);
            simulate(&cfg).unwrap().records
        };
        let a = run(0.0);
        let b = run(7.5);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.deviation_norm, y.deviation_norm);
            assert_eq!(x.mean_norm, y.mean_norm);
        }
    }

    #[test]
    fn axisymmetric_heat_flow_is_dissipative() {
        let p = params(1e-2);
        let grid = Arc::new(build_grid(32, 2.0).unwrap());
        let mut s = SpectralState::zeros(&grid, &p, 2).unwrap();
        let r = grid.interior_nodes();
        s.set_mode(0, r.map(|x| Complex64::new((x - 1.0) * (2.0 - x), 0.0))).unwrap();
        let mut integ = Integrator::new(s, 0.1, true).unwrap();
        let mut prev = integ.state().mean_norm();
        for _ in 0..50 {
            integ.step().unwrap();
            let now = integ.state().mean_norm();
            assert!(now <= prev * (1.0 + 1e-12));
            assert_eq!(integ.state().deviation_norm(), 0.0);
            prev = now;
        }
    }

    #[test]
    fn enstrophy_budget_converges_at_second_order() {
        let run = |dt: f64| {
            let mut cfg = SimulationConfig::new(params(1e-2), 4, 32, 2.0, 2.0);
            cfg.profile = Profile::Random;
            cfg.seed = 4;
            cfg.dt = Some(dt);
            simulate(&cfg).unwrap().records.last().unwrap().enstrophy_residual.abs()
        };
        let (a, b) = (run(0.02), run(0.01));
        assert!(b < 1e-4, "{b}");
        let order = (a / b).log2();
        assert!(order > 1.5, "order {order}: {a} {b}");
    }
}
