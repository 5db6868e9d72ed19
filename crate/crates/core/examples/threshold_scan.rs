//! Ladder of stability probes followed by bisection on the first bracket.

use tcflow::linalg::geomspace;
use tcflow::solver::SimulationConfig;
use tcflow::threshold::{ladder_scan, threshold_bisect, StabilityRule, Verdict};
use tcflow::FlowParams;

fn main() -> tcflow::Result<()> {
    let p = FlowParams::new(1e-2, 0.0, 1.0, 2.0)?;
    let cfg = SimulationConfig::new(p, 2, 16, 10.0 / p.mu(1), 0.0);
    let rule = StabilityRule::default();
    let amps = geomspace(1e-3, 1e3, 7);
    let ladder = ladder_scan(&cfg, &amps, &rule)?;
    for pr in &ladder {
        println!("amplitude {:.1e}  {}  final ratio {:.3e}", pr.amplitude, pr.verdict.name(), pr.final_ratio);
    }
    match ladder.iter().position(|q| q.verdict != Verdict::Stable) {
        Some(i) if i > 0 => {
            let rec = threshold_bisect(&cfg, amps[i - 1], amps[i], 6, &rule)?;
            println!("threshold in [{:.4e}, {:.4e}]", rec.bracket.0, rec.bracket.1);
        }
        Some(_) => println!("not certified even at the smallest amplitude"),
        None => println!("stable on the whole ladder"),
    }
    Ok(())
}
