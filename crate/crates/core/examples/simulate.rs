//! Small nonlinear run: deviation and mean norms over time.

use tcflow::solver::{simulate, Profile, SimulationConfig};
use tcflow::FlowParams;

fn main() -> tcflow::Result<()> {
    let p = FlowParams::new(1e-3, 0.0, 1.0, 2.0)?;
    let mut cfg = SimulationConfig::new(p, 4, 32, 5.0 / p.mu(1), 0.05);
    cfg.profile = Profile::Random;
    cfg.n_records = 10;
    let res = simulate(&cfg)?;
    for r in &res.records {
        println!("t {:>8.2}  |w - mean| {:.4e}  |mean| {:.4e}", r.t, r.deviation_norm, r.mean_norm);
    }
    let s = &res.summary;
    println!("dt {:.3e}, {} steps, max growth {:.3}, final ratio {:.3e}", s.dt, s.n_steps, s.max_growth, s.final_ratio);
    Ok(())
}
