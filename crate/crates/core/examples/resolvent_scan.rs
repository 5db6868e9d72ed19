//! Smallest singular value of `L_1 - i lambda` across the symbol range.

use std::sync::Arc;

use tcflow::spectral::{default_lambda_grid, resolvent_scan};
use tcflow::{assemble_mode_operator, build_grid, FlowParams};

fn main() -> tcflow::Result<()> {
    let p = FlowParams::new(1e-4, 0.0, 1.0, 2.0)?;
    let grid = Arc::new(build_grid(64, p.outer_radius)?);
    let op = assemble_mode_operator(&grid, &p, 1);
    let probes = resolvent_scan(&op, &default_lambda_grid(&p, 1));
    let best = probes.iter().min_by(|a, b| a.sigma_min.total_cmp(&b.sigma_min)).unwrap();
    for pr in probes.iter().step_by(20) {
        println!("lambda {:>9.4}  sigma_min {:.4e}", pr.lambda, pr.sigma_min);
    }
    println!("minimum {:.4e} at lambda = {:.4}", best.sigma_min, best.lambda);
    Ok(())
}
