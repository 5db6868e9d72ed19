//! Semigroup norms under the Gearhart-Pruss envelope `e^{-t Psi + pi/2}`.

use std::sync::Arc;

use tcflow::spectral::{default_lambda_grid, default_time_grid, gearhart_pruss_check, pseudospectral_bound};
use tcflow::{assemble_mode_operator, build_grid, FlowParams};

fn main() -> tcflow::Result<()> {
    let p = FlowParams::new(1e-4, 0.0, 1.0, 2.0)?;
    let op = assemble_mode_operator(&Arc::new(build_grid(64, 2.0)?), &p, 1);
    let psi = pseudospectral_bound(&op, &default_lambda_grid(&p, 1), 30)?.value;
    for s in gearhart_pruss_check(&op, &default_time_grid(&p, 1), psi, 1e-6)?.iter().step_by(3) {
        println!("t {:>9.2}  norm {:.4e}  bound {:.4e}  {}", s.t, s.norm, s.bound, if s.holds { "ok" } else { "VIOLATED" });
    }
    Ok(())
}
