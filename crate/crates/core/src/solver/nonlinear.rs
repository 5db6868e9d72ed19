//! Stream functions and the quadratic advection terms in mode form.
//!
//! For `k != 0` the weighted equation reads
//!
//! ```text
//! d_t w_k + L_k w_k + (1/r) [ i k f1 - r^{1/2} d_r (r^{1/2} f2) ] = 0
//! f1 = sum_l d_r(r^{-1/2} phi_l) w_{k-l}
//! f2 = sum_l i l r^{-3/2} phi_l w_{k-l}
//! ```
//!
//! and the axisymmetric part obeys
//! `d_t w_= - nu (d_r^2 + (1/r) d_r) w_= = (1/r) d_r (r^{1/2} f2_0)`.
//! Sums run over `|l|, |k - l| <= K`: the truncated convolution keeps no
//! aliased products.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{real_times_complex, RadialGrid};
use crate::operators::{StreamSolver, ZeroModeSolver};
use crate::{CVector, RVector};

use super::state::SpectralState;

/// Factorized stream-function problems for modes `0..=K`.
#[derive(Debug, Clone)]
pub struct StreamOperators {
    modes: Vec<StreamSolver>,
    zero: ZeroModeSolver,
    sqrt_r: RVector,
    inv_sqrt_r: RVector,
}

/// Stream functions of one state on the interior nodes.
#[derive(Debug, Clone)]
pub struct Streams {
    /// Weighted `phi_k`, `k = 0..=K`; slot 0 is `r^{1/2} phi_=`.
    pub phi: Vec<CVector>,
    /// `d_r(r^{-1/2} phi_k)`.
    pub dphi: Vec<CVector>,
    /// Weighted `w_k`, `k = 0..=K`.
    pub w: Vec<CVector>,
}

impl StreamOperators {
    pub fn new(grid: &RadialGrid, k_max: usize) -> Result<Self> {
        let modes = (1..=k_max as i32)
            .map(|k| StreamSolver::new(grid, k))
            .collect::<Result<Vec<_>>>()?;
        let r = grid.interior_nodes();
        Ok(Self {
            modes,
            zero: ZeroModeSolver::new(grid)?,
            sqrt_r: r.map(f64::sqrt),
            inv_sqrt_r: r.map(|x| 1.0 / x.sqrt()),
        })
    }

    pub fn solve(&self, state: &SpectralState) -> Result<Streams> {
        let grid = state.grid();
        let k_max = state.k_max();
        if k_max != self.modes.len() {
            return Err(Error::Shape {
                expected: self.modes.len(),
                got: k_max,
            });
        }
        let results: Vec<(CVector, CVector, CVector)> = (0..=k_max)
            .into_par_iter()
            .map(|k| -> Result<(CVector, CVector, CVector)> {
                let (phi, w) = if k == 0 {
                    let phi_eq = self.zero.solve(state.mean_mode())?;
                    (scale(&phi_eq, &self.sqrt_r), scale(state.mean_mode(), &self.sqrt_r))
                } else {
                    let w = state.modes[k].clone();
                    (self.modes[k - 1].solve(&w)?, w)
                };
                let unweighted = grid.extend(&scale(&phi, &self.inv_sqrt_r))?;
                let dphi = grid.restrict(&real_times_complex(grid.d1(), &unweighted))?;
                Ok((phi, dphi, w))
            })
            .collect::<Result<_>>()?;
        let mut streams = Streams {
            phi: Vec::with_capacity(k_max + 1),
            dphi: Vec::with_capacity(k_max + 1),
            w: Vec::with_capacity(k_max + 1),
        };
        for (phi, dphi, w) in results {
            streams.phi.push(phi);
            streams.dphi.push(dphi);
            streams.w.push(w);
        }
        Ok(streams)
    }
}

fn scale(v: &CVector, s: &RVector) -> CVector {
    CVector::from_iterator(v.len(), v.iter().zip(s.iter()).map(|(z, x)| z * *x))
}

/// Value of slot `k` of a one-sided mode list, conjugated for `k < 0`.
#[inline]
fn at(list: &[CVector], k: i32, j: usize) -> Complex64 {
    let z = list[k.unsigned_abs() as usize][j];
    if k < 0 {
        z.conj()
    } else {
        z
    }
}

/// `(f1, f2)` of mode `k` on the interior nodes.
pub fn nonlinear_terms_with(
    grid: &RadialGrid,
    streams: &Streams,
    k: i32,
) -> Result<(CVector, CVector)> {
    let k_max = streams.w.len() as i32 - 1;
    if k.abs() > k_max {
        return Err(Error::config(format!("mode {k} beyond cutoff {k_max}")));
    }
    let r = grid.interior_nodes();
    let m = r.len();
    let r32: Vec<f64> = r.iter().map(|x| x.powf(-1.5)).collect();
    let mut f1 = CVector::zeros(m);
    let mut f2 = CVector::zeros(m);
    for l in (k - k_max).max(-k_max)..=(k + k_max).min(k_max) {
        let j = k - l;
        let il = Complex64::new(0.0, l as f64);
        for i in 0..m {
            let wj = at(&streams.w, j, i);
            f1[i] += at(&streams.dphi, l, i) * wj;
            if l != 0 {
                f2[i] += il * r32[i] * at(&streams.phi, l, i) * wj;
            }
        }
    }
    Ok((f1, f2))
}

/// `(f1, f2)` of mode `k`, solving for the stream functions first.
pub fn nonlinear_terms(state: &SpectralState, k: i32) -> Result<(CVector, CVector)> {
    let ops = StreamOperators::new(state.grid(), state.k_max())?;
    let streams = ops.solve(state)?;
    nonlinear_terms_with(state.grid(), &streams, k)
}

/// `r^{-1/2} d_r(r^{1/2} f2)` on the interior, using `f2 = 0` at the walls.
fn flux_divergence(grid: &RadialGrid, f2: &CVector) -> Result<CVector> {
    let r = grid.nodes();
    let full = grid.extend(f2)?;
    let weighted = CVector::from_iterator(full.len(), full.iter().zip(r.iter()).map(|(z, x)| z * x.sqrt()));
    let d = real_times_complex(grid.d1(), &weighted);
    let ri = grid.interior_nodes();
    Ok(CVector::from_iterator(
        ri.len(),
        (0..ri.len()).map(|i| d[i + 1] / ri[i].sqrt()),
    ))
}

/// Explicit right-hand sides: slot 0 for `w_=`, slot `k` for weighted `w_k`.
pub fn explicit_forcing(grid: &RadialGrid, streams: &Streams) -> Result<Vec<CVector>> {
    let k_max = streams.w.len() - 1;
    let r = grid.interior_nodes();
    (0..=k_max)
        .into_par_iter()
        .map(|k| -> Result<CVector> {
            let (f1, f2) = nonlinear_terms_with(grid, streams, k as i32)?;
            let div = flux_divergence(grid, &f2)?;
            if k == 0 {
                // (1/r) d_r(r^{1/2} f2_0) = r^{-1/2} div; real for a real field.
                Ok(CVector::from_iterator(
                    r.len(),
                    (0..r.len()).map(|i| Complex64::new(div[i].re / r[i].sqrt(), 0.0)),
                ))
            } else {
                let ik = Complex64::new(0.0, k as f64);
                Ok(CVector::from_iterator(
                    r.len(),
                    (0..r.len()).map(|i| div[i] - ik * f1[i] / r[i]),
                ))
            }
        })
        .collect()
}
