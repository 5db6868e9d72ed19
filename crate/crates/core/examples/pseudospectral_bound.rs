//! `Psi` against the enhanced-dissipation scale `(nu k^2)^{1/3} |B|^{2/3} R^{-2}`.

use std::sync::Arc;

use tcflow::spectral::{default_lambda_grid, pseudospectral_bound};
use tcflow::{assemble_mode_operator, build_grid, FlowParams};

fn main() -> tcflow::Result<()> {
    for nu in [1e-5, 1e-4, 1e-3] {
        let p = FlowParams::new(nu, 0.0, 1.0, 2.0)?;
        let op = assemble_mode_operator(&Arc::new(build_grid(96, 2.0)?), &p, 1);
        let b = pseudospectral_bound(&op, &default_lambda_grid(&p, 1), 30)?;
        println!("nu {nu:.0e}  Psi {:.4e}  Psi / scale {:.3}", b.value, b.value / p.enhanced_rate(1));
    }
    Ok(())
}
