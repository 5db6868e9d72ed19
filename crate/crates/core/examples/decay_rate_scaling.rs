//! Fitted decay rates over a `nu` ladder and their log-log slope.

use std::sync::Arc;

use tcflow::spectral::{decay_rate_fit, default_time_grid, scaling_exponent, SweepVariable};
use tcflow::{assemble_mode_operator, build_grid, FlowParams};

fn main() -> tcflow::Result<()> {
    let mut fits = Vec::new();
    for nu in [1e-6, 1e-5, 1e-4, 1e-3] {
        let p = FlowParams::new(nu, 0.0, 1.0, 2.0)?;
        let op = assemble_mode_operator(&Arc::new(build_grid(96, 2.0)?), &p, 1);
        let f = decay_rate_fit(&op, &default_time_grid(&p, 1))?;
        println!("nu {nu:.0e}  rate {:.4e}  r2 {:.5}", f.rate, f.r_squared);
        fits.push(f);
    }
    let e = scaling_exponent(&fits, SweepVariable::Nu)?;
    println!("rate ~ nu^{:.3} (r2 {:.4})", e.slope, e.r_squared);
    Ok(())
}
