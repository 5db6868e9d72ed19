//! Orthonormality and eigen-relation of the weighted log-sine basis.

use std::sync::Arc;

use tcflow::build_grid;
use tcflow::eigenbasis::build_basis;

fn main() -> tcflow::Result<()> {
    let basis = build_basis(&Arc::new(build_grid(80, 2.0)?), 20)?;
    println!("alpha {:.6}  beta {:.6}", basis.alpha(), basis.beta());
    println!("Gram deviation {:.3e}", basis.gram_deviation());
    for l in [1, 5, 10, 20] {
        println!("l {l:>2}  lambda_(1,l) {:>9.3}  residual {:.3e}", basis.lambda(1, l), basis.eigen_residual(1, l));
    }
    Ok(())
}
