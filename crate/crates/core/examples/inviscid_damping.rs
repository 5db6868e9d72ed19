//! Phase mixing of one mode: the basis sum against the elliptic pairing and
//! the time-integrated stream-function energy.

use std::sync::Arc;

use num_complex::Complex64;
use tcflow::eigenbasis::{build_basis, damping_sum, integrated_damping, stream_pairing};
use tcflow::{build_grid, FlowParams};

fn main() -> tcflow::Result<()> {
    let grid = Arc::new(build_grid(128, 2.0)?);
    let w0 = grid.sample_complex(|r| Complex64::new(((r - 1.0) * (2.0 - r)).powi(3), 0.0));
    let basis = build_basis(&grid, 32)?;
    for t in [0.0, 1.0, 4.0] {
        let s = damping_sum(&w0, 1, 1.0, t, &basis)?.value;
        let p = stream_pairing(&grid, &w0, 1, 1.0, t)?;
        println!("t {t:>4}  basis sum {s:.10e}  pairing {p:.10e}");
    }
    let p = FlowParams::new(1e-4, 0.0, 1.0, 2.0)?;
    let rec = integrated_damping(&grid, &w0, 1, &p, 100.0, 400)?;
    println!("int_0^100 energy {:.4e}  normalized {:.4}  phase resolved {}", rec.integral, rec.ratio, rec.phase_resolved);
    Ok(())
}
