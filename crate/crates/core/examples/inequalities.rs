//! Functional-inequality suite on a few hundred samples per check.

use tcflow::inequalities::run_suite;

fn main() -> tcflow::Result<()> {
    let report = run_suite(64, 200, 1)?;
    for r in &report.reports {
        let k = r.k.map(|k| format!(" k={k}")).unwrap_or_default();
        println!("{:<22} R={:<3}{k:<5} worst {:.4} / bound {:.4}  {}", r.name, r.outer_radius, r.worst_ratio, r.bound, if r.passed { "ok" } else { "FAIL" });
    }
    println!("all passed: {}", report.all_passed);
    Ok(())
}
