//! Fourier-Chebyshev state of the perturbation vorticity.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eigenbasis::psi_profile;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::operators::FlowParams;
use crate::CVector;

/// Modes `k = 0..=K` on the interior nodes. `k >= 1` holds the weighted
/// vorticity `w_k = r^{1/2} \hat w_k`; slot 0 holds the axisymmetric part
/// `w_=` in polar form (real). Negative modes are the conjugates, so the
/// field is real by construction.
#[derive(Debug, Clone)]
pub struct SpectralState {
    pub(crate) params: FlowParams,
    pub(crate) grid: Arc<RadialGrid>,
    pub(crate) modes: Vec<CVector>,
    pub(crate) time: f64,
}

impl SpectralState {
    pub fn zeros(grid: &Arc<RadialGrid>, params: &FlowParams, k_max: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::config("K must be at least 1"));
        }
        Ok(Self {
            params: *params,
            grid: Arc::clone(grid),
            modes: vec![CVector::zeros(grid.interior_len()); k_max + 1],
            time: 0.0,
        })
    }

    pub fn k_max(&self) -> usize {
        self.modes.len() - 1
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Weighted mode `w_k` for `-K <= k <= K`; for `k = 0` this is
    /// `r^{1/2} w_=`.
    pub fn mode(&self, k: i32) -> CVector {
        let idx = k.unsigned_abs() as usize;
        assert!(idx <= self.k_max(), "mode {k} beyond cutoff {}", self.k_max());
        if k == 0 {
            self.weighted_zero_mode()
        } else if k > 0 {
            self.modes[idx].clone()
        } else {
            self.modes[idx].map(|z| z.conj())
        }
    }

    /// The axisymmetric part `w_=` (polar, unweighted).
    pub fn mean_mode(&self) -> &CVector {
        &self.modes[0]
    }

    fn weighted_zero_mode(&self) -> CVector {
        let r = self.grid.interior_nodes();
        CVector::from_iterator(r.len(), self.modes[0].iter().zip(r.iter()).map(|(z, x)| z * x.sqrt()))
    }

    /// Set `w_k` for `k >= 1` (weighted) or `w_=` for `k = 0` (polar; the
    /// imaginary part is dropped).
    pub fn set_mode(&mut self, k: usize, values: CVector) -> Result<()> {
        if k > self.k_max() {
            return Err(Error::config(format!("mode {k} beyond cutoff {}", self.k_max())));
        }
        self.grid.check_interior(values.len())?;
        self.modes[k] = if k == 0 {
            values.map(|z| Complex64::new(z.re, 0.0))
        } else {
            values
        };
        Ok(())
    }

    /// `|| w - \bar w ||` in `L^2(r dr d theta)`.
    pub fn deviation_norm(&self) -> f64 {
        let s: f64 = self.modes[1..]
            .iter()
            .map(|w| self.grid.l2_norm(w).unwrap().powi(2))
            .sum();
        (4.0 * PI * s).sqrt()
    }

    /// `|| \bar w ||` in `L^2(r dr d theta)`.
    pub fn mean_norm(&self) -> f64 {
        (2.0 * PI).sqrt() * self.grid.l2_norm(&self.weighted_zero_mode()).unwrap()
    }

    /// `|| w ||` in `L^2(r dr d theta)`.
    pub fn total_norm(&self) -> f64 {
        self.deviation_norm().hypot(self.mean_norm())
    }

    pub fn is_finite(&self) -> bool {
        self.modes
            .iter()
            .all(|w| w.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Multiply every mode by `s`.
    pub fn scale(&mut self, s: f64) {
        for w in &mut self.modes {
            *w *= Complex64::new(s, 0.0);
        }
    }

    /// `R ||w||_{L^2 H^1} + R^{-2} (log R)^{-3/2} ||r^2 w|| + R^3 ||w / r^3||`,
    /// norms in `L^2(dr d theta)` of the physical vorticity.
    pub fn initial_functional(&self) -> f64 {
        let g = &self.grid;
        let rr = self.params.outer_radius;
        let r = g.nodes();
        let (mut l2, mut h1, mut r2, mut rm3) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..=self.k_max() {
            // Physical mode on the full grid, counted twice for k != 0.
            let phys = if k == 0 {
                g.extend(&self.modes[0]).unwrap()
            } else {
                let full = g.extend(&self.modes[k]).unwrap();
                CVector::from_iterator(full.len(), full.iter().zip(r.iter()).map(|(z, x)| z / x.sqrt()))
            };
            let mult = if k == 0 { 2.0 * PI } else { 4.0 * PI };
            let d = g.derivative(&phys).unwrap();
            let pw = |p: f64| {
                let v = CVector::from_iterator(phys.len(), phys.iter().zip(r.iter()).map(|(z, x)| z * x.powf(p)));
                g.l2_norm(&v).unwrap().powi(2)
            };
            l2 += mult * pw(0.0);
            h1 += mult * g.l2_norm(&d).unwrap().powi(2);
            r2 += mult * pw(2.0);
            rm3 += mult * pw(-3.0);
        }
        rr * (l2 + h1).sqrt() + rr.powi(-2) * self.params.log_r().powf(-1.5) * r2.sqrt() + rr.powi(3) * rm3.sqrt()
    }

    /// `M(0) = sum_k M_k(0)` over all `k` (negative modes included), with
    /// `M_0 = ||w_0||` and the regime-dependent `M_k` for `k != 0`.
    pub fn initial_energy(&self) -> f64 {
        let g = &self.grid;
        let p = &self.params;
        let rr = p.outer_radius;
        let r = g.nodes();
        let mut total = g.l2_norm(&self.weighted_zero_mode()).unwrap();
        for k in 1..=self.k_max() {
            let w = &self.modes[k];
            let mk = if p.low_frequency(k as i32) {
                let full = g.extend(w).unwrap();
                let pw = |q: f64| {
                    let v = CVector::from_iterator(full.len(), full.iter().zip(r.iter()).map(|(z, x)| z * x.powf(q)));
                    g.l2_norm(&v).unwrap()
                };
                rr.powi(-2) / p.log_r() * pw(2.0)
                    + rr.powi(3) * pw(-3.0)
                    + rr * g.l2_norm(&g.derivative(&full).unwrap()).unwrap()
            } else {
                g.l2_norm(w).unwrap()
            };
            total += 2.0 * mk;
        }
        total
    }
}

/// Named initial perturbations; each is scaled to a prescribed
/// `L^2(r dr d theta)` amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// `\hat w_{+-1}(r) = psi_1(r)`, no other modes.
    Psi1,
    /// Random combination of `psi_l` in every mode `0..=K`, coefficients
    /// decaying like `2^{-(k + l)}`.
    Random,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Psi1 => "psi1",
            Profile::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "psi1" => Ok(Profile::Psi1),
            "random" => Ok(Profile::Random),
            other => Err(Error::config(format!(
                "unknown profile '{other}' (expected psi1 or random)"
            ))),
        }
    }
}

/// Number of basis functions per mode in the random profile.
const RANDOM_TERMS: usize = 6;

/// Initial state for `profile` with `||w(0)|| = amplitude`.
pub fn initial_state(
    grid: &Arc<RadialGrid>,
    params: &FlowParams,
    k_max: usize,
    profile: Profile,
    amplitude: f64,
    seed: u64,
) -> Result<SpectralState> {
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(Error::config(format!("amplitude = {amplitude} must be non-negative")));
    }
    let mut state = SpectralState::zeros(grid, params, k_max)?;
    let r = grid.nodes();
    // Weighted mode from a physical radial profile on the full grid.
    let weighted = |phys: &CVector| -> CVector {
        let full = CVector::from_iterator(phys.len(), phys.iter().zip(r.iter()).map(|(z, x)| z * x.sqrt()));
        grid.restrict(&full).unwrap()
    };
    match profile {
        Profile::Psi1 => {
            state.set_mode(1, weighted(&psi_profile(grid, 1)))?;
        }
        Profile::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let basis: Vec<CVector> = (1..=RANDOM_TERMS).map(|l| psi_profile(grid, l)).collect();
            for k in 0..=k_max {
                let mut phys = CVector::zeros(grid.n_points());
                for (l, psi) in basis.iter().enumerate() {
                    let decay = 0.5f64.powi((k + l) as i32);
                    let c = Complex64::new(rng.random_range(-1.0..1.0), if k == 0 { 0.0 } else { rng.random_range(-1.0..1.0) });
                    phys += psi * (c * decay);
                }
                if k == 0 {
                    state.set_mode(0, grid.restrict(&phys)?)?;
                } else {
                    state.set_mode(k, weighted(&phys))?;
                }
            }
        }
    }
    let norm = state.total_norm();
    if norm > 0.0 {
        state.scale(amplitude / norm);
    }
    Ok(state)
}
