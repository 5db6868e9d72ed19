//! Command-line front end: one subcommand per experiment family.
//!
//! Exit codes: 0 success, 1 a numerical check failed (or the integration
//! blew up), 2 configuration or usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::eigenbasis::{build_basis, integrated_damping, psi_profile, viscous_damping_check};
use crate::error::{Error, Result};
use crate::grid::{build_grid, RadialGrid};
use crate::inequalities::run_suite;
use crate::linalg::{geomspace, linspace};
use crate::operators::{assemble_mode_operator, FlowParams};
use crate::output::{write_artifacts, Cell, CsvTable, Provenance};
use crate::solver::{simulate, Profile, SimulationConfig};
use crate::spectral::{
    decay_rate_fit, default_lambda_grid, default_time_grid, gearhart_pruss_check, pseudospectral_bound,
    resolvent_scan, scaling_exponent, SweepVariable,
};
use crate::threshold::{beta_fit, ladder_scan, threshold_bisect, StabilityRule, ThresholdRecord, Verdict};
use crate::CVector;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tcflow", version, about = "Stability experiments for 2D Taylor-Couette flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// sigma_min(L_k - i lambda) over a lambda grid.
    Resolvent(CommonArgs),
    /// Pseudospectral bound Psi over a parameter sweep.
    Pseudospectrum(CommonArgs),
    /// Semigroup norms against the Gearhart-Pruss bound.
    Semigroup(CommonArgs),
    /// Fitted decay rates and their scaling exponent.
    Rates(CommonArgs),
    /// Gram matrix and eigen-relation residuals of the weighted basis.
    Basis(CommonArgs),
    /// Time-integrated inviscid damping of one mode.
    Damping(CommonArgs),
    /// Nonlinear (or linear) time integration.
    Simulate(CommonArgs),
    /// Amplitude bisection for the stability threshold.
    Threshold(CommonArgs),
    /// Randomized functional-inequality suite.
    Inequalities(InequalityArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Flat JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's `out`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed overriding the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 = one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Args)]
struct InequalityArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Samples per inequality and radius.
    #[arg(long)]
    samples: Option<usize>,
}

/// Everything a command produces besides the provenance header.
struct Outcome {
    table: CsvTable,
    passed: bool,
    result: Value,
    grid: Vec<(&'static str, Value)>,
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Integration { .. } => EXIT_CHECK_FAILED,
                _ => EXIT_CONFIG,
            }
        }
    }
}

fn execute(cli: Cli) -> Result<bool> {
    let (name, common, samples) = match &cli.command {
        Command::Resolvent(c) => ("resolvent", c, None),
        Command::Pseudospectrum(c) => ("pseudospectrum", c, None),
        Command::Semigroup(c) => ("semigroup", c, None),
        Command::Rates(c) => ("rates", c, None),
        Command::Basis(c) => ("basis", c, None),
        Command::Damping(c) => ("damping", c, None),
        Command::Simulate(c) => ("simulate", c, None),
        Command::Threshold(c) => ("threshold", c, None),
        Command::Inequalities(a) => ("inequalities", &a.common, a.samples),
    };
    let (mut cfg, echo) = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => (ExperimentConfig::default(), json!({})),
    };
    let mut prov = Provenance::new(name, echo);
    if let Some(s) = common.seed {
        cfg.seed = Some(s);
        prov = prov.with_flag("seed", s);
    }
    if let Some(s) = samples {
        cfg.samples = Some(s);
        prov = prov.with_flag("samples", s);
    }
    let out_dir = output_dir(common.out.as_deref(), &cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads)
        .build()
        .map_err(|e| Error::config(format!("cannot start {} threads: {e}", common.threads)))?;
    let start = Instant::now();
    let outcome = pool.install(|| match cli.command {
        Command::Resolvent(_) => cmd_resolvent(&cfg),
        Command::Pseudospectrum(_) => cmd_pseudospectrum(&cfg),
        Command::Semigroup(_) => cmd_semigroup(&cfg),
        Command::Rates(_) => cmd_rates(&cfg),
        Command::Basis(_) => cmd_basis(&cfg),
        Command::Damping(_) => cmd_damping(&cfg),
        Command::Simulate(_) => cmd_simulate(&cfg),
        Command::Threshold(_) => cmd_threshold(&cfg),
        Command::Inequalities(_) => cmd_inequalities(&cfg),
    })?;
    for (k, v) in outcome.grid {
        prov = prov.with_grid(k, v);
    }
    let artifacts = write_artifacts(
        &out_dir,
        &prov,
        &outcome.table,
        outcome.passed,
        outcome.result,
        start.elapsed(),
    )?;
    eprintln!(
        "{name}: {} -> {}, {}",
        if outcome.passed { "passed" } else { "CHECK FAILED" },
        artifacts.csv.display(),
        artifacts.json.display()
    );
    Ok(outcome.passed)
}

fn grid_for(n: usize, params: &FlowParams) -> Result<Arc<RadialGrid>> {
    Ok(Arc::new(build_grid(n, params.outer_radius)?))
}

fn params_row(p: &FlowParams, k: i32) -> Vec<Cell> {
    vec![p.nu.into(), p.a.into(), p.b.into(), p.outer_radius.into(), k.into()]
}

const SCAN_COLUMNS: [&str; 9] = ["nu", "A", "B", "R", "k", "variable", "value", "n", "r_squared"];

fn scan_table(extra: &[&str]) -> CsvTable {
    let cols: Vec<&str> = SCAN_COLUMNS.iter().copied().chain(extra.iter().copied()).collect();
    CsvTable::new(&cols)
}

fn cmd_resolvent(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = cfg.params()?;
    let (k, n) = (cfg.k_or(1), cfg.n_or(64));
    let op = assemble_mode_operator(&grid_for(n, &p)?, &p, k);
    let lambdas = match (cfg.lambda_min, cfg.lambda_max) {
        (Some(a), Some(b)) if b > a => linspace(a, b, cfg.n_lambda.unwrap_or(201).max(2)),
        (None, None) => default_lambda_grid(&p, k),
        _ => return Err(Error::config("lambda_min and lambda_max must both be given, with lambda_min < lambda_max")),
    };
    let probes = resolvent_scan(&op, &lambdas);
    let best = probes
        .iter()
        .min_by(|a, b| a.sigma_min.total_cmp(&b.sigma_min))
        .copied()
        .ok_or_else(|| Error::config("empty lambda grid"))?;
    let mut table = scan_table(&[]);
    for pr in &probes {
        let mut row = params_row(&p, k);
        row.extend([pr.lambda.into(), pr.sigma_min.into(), n.into(), Cell::Text(String::new())]);
        table.push(row);
    }
    Ok(Outcome {
        table,
        passed: true,
        result: json!({"params": p, "k": k, "n_lambda": probes.len(), "lambda_min": best.lambda, "sigma_min": best.sigma_min}),
        grid: vec![("N", json!(n))],
    })
}

fn cmd_pseudospectrum(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (k, n) = (cfg.k_or(1), cfg.n_or(64));
    let refine = cfg.refine_iters.unwrap_or(30);
    let mut table = scan_table(&["normalized"]);
    let mut points = Vec::new();
    for p in cfg.param_sweep()? {
        let op = assemble_mode_operator(&grid_for(n, &p)?, &p, k);
        let b = pseudospectral_bound(&op, &default_lambda_grid(&p, k), refine)?;
        let scale = p.enhanced_rate(k);
        let normalized = b.value / scale;
        let mut row = params_row(&p, k);
        row.extend([b.lambda_min.into(), b.value.into(), n.into(), Cell::Text(String::new()), normalized.into()]);
        table.push(row);
        points.push(json!({"params": p, "psi": b.value, "lambda_min": b.lambda_min, "normalized": normalized}));
    }
    let norms: Vec<f64> = points.iter().map(|v| v["normalized"].as_f64().unwrap_or(f64::NAN)).collect();
    let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        table,
        passed: true,
        result: json!({"k": k, "points": points, "normalized_min": lo, "normalized_max": hi, "spread": hi / lo}),
        grid: vec![("N", json!(n))],
    })
}

fn cmd_semigroup(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (k, n) = (cfg.k_or(1), cfg.n_or(64));
    let tol = cfg.gp_tol.unwrap_or(1e-6);
    let mut table = scan_table(&["psi", "bound", "holds"]);
    let mut points = Vec::new();
    let mut passed = true;
    for p in cfg.param_sweep()? {
        let op = assemble_mode_operator(&grid_for(n, &p)?, &p, k);
        let psi = pseudospectral_bound(&op, &default_lambda_grid(&p, k), cfg.refine_iters.unwrap_or(30))?.value;
        let times = cfg.times.clone().unwrap_or_else(|| default_time_grid(&p, k));
        let samples = gearhart_pruss_check(&op, &times, psi, tol)?;
        let holds = samples.iter().all(|s| s.holds);
        passed &= holds;
        for s in &samples {
            let mut row = params_row(&p, k);
            row.extend([
                s.t.into(),
                s.norm.into(),
                n.into(),
                Cell::Text(String::new()),
                psi.into(),
                s.bound.into(),
                s.holds.into(),
            ]);
            table.push(row);
        }
        let worst = samples.iter().map(|s| s.norm / s.bound).fold(0.0, f64::max);
        points.push(json!({"params": p, "psi": psi, "n_times": samples.len(), "worst_norm_over_bound": worst, "holds": holds}));
    }
    Ok(Outcome {
        table,
        passed,
        result: json!({"k": k, "tol": tol, "points": points}),
        grid: vec![("N", json!(n))],
    })
}

fn cmd_rates(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (k, n) = (cfg.k_or(1), cfg.n_or(96));
    let variable = match cfg.variable.as_deref().unwrap_or("nu") {
        "nu" => SweepVariable::Nu,
        "B" | "b" => SweepVariable::B,
        other => return Err(Error::config(format!("variable = {other:?} must be \"nu\" or \"B\""))),
    };
    let mut table = scan_table(&["rate_over_scale", "accepted"]);
    let mut fits = Vec::new();
    for p in cfg.param_sweep()? {
        let op = assemble_mode_operator(&grid_for(n, &p)?, &p, k);
        let fit = decay_rate_fit(&op, &default_time_grid(&p, k))?;
        let rec = fit.to_record(variable.of(&p));
        let mut row = params_row(&p, k);
        row.extend([
            rec.variable.into(),
            rec.value.into(),
            rec.n_points.into(),
            fit.r_squared.into(),
            (fit.rate / p.enhanced_rate(k)).into(),
            fit.accepted.into(),
        ]);
        table.push(row);
        fits.push(fit);
    }
    let exponent = if fits.len() >= 4 { Some(scaling_exponent(&fits, variable)?) } else { None };
    let passed = match (cfg.expected_exponent, &exponent) {
        (Some(e), Some(f)) => (f.slope - e).abs() <= cfg.exponent_tol.unwrap_or(0.07),
        (Some(_), None) => return Err(Error::config("expected_exponent needs at least 4 sweep points")),
        (None, _) => true,
    };
    Ok(Outcome {
        table,
        passed,
        result: json!({"k": k, "variable": variable.name(), "fits": fits, "exponent": exponent}),
        grid: vec![("N", json!(n))],
    })
}

fn cmd_basis(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = cfg.params()?;
    let (k, n) = (cfg.k_or(1), cfg.n_or(80));
    let l_max = cfg.l_max.unwrap_or(16);
    let basis = build_basis(&grid_for(n, &p)?, l_max)?;
    let gram = basis.gram_deviation();
    let gram_tol = cfg.gram_tol.unwrap_or(1e-10);
    let res_tol = cfg.residual_tol.unwrap_or(1e-8);
    let mut table = CsvTable::new(&["k", "l", "lambda", "residual"]);
    let mut worst = 0.0f64;
    for l in 1..=l_max {
        let r = basis.eigen_residual(k, l);
        worst = worst.max(r);
        table.push(vec![k.into(), l.into(), basis.lambda(k, l).into(), r.into()]);
    }
    let passed = gram <= gram_tol && worst <= res_tol;
    Ok(Outcome {
        table,
        passed,
        result: json!({
            "R": p.outer_radius, "k": k, "l_max": l_max, "alpha": basis.alpha(), "beta": basis.beta(),
            "gram_deviation": gram, "gram_tol": gram_tol, "max_residual": worst, "residual_tol": res_tol,
        }),
        grid: vec![("N", json!(n)), ("l_max", json!(l_max))],
    })
}

/// Initial radial profile on the full grid: `psi_1`, or six basis functions
/// with seeded complex coefficients decaying like `2^{-l}`.
fn radial_profile(grid: &RadialGrid, profile: Profile, seed: u64) -> CVector {
    match profile {
        Profile::Psi1 => psi_profile(grid, 1),
        Profile::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v = CVector::zeros(grid.nodes().len());
            for l in 1..=6usize {
                let c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * 0.5f64.powi(l as i32);
                v += psi_profile(grid, l) * c;
            }
            v
        }
    }
}

fn profile_of(cfg: &ExperimentConfig) -> Result<Profile> {
    cfg.profile.as_deref().map(Profile::parse).transpose().map(|p| p.unwrap_or(Profile::Psi1))
}

fn cmd_damping(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = cfg.params()?;
    let (k, n) = (cfg.k_or(1), cfg.n_or(96));
    let t_final = cfg.t_final.unwrap_or(100.0);
    let grid = grid_for(n, &p)?;
    let w0 = radial_profile(&grid, profile_of(cfg)?, cfg.seed_or(0));
    let mut rec = integrated_damping(&grid, &w0, k, &p, t_final, cfg.n_t.unwrap_or(200))?;
    let mut table = CsvTable::new(&["t", "dphi_sq", "kphi_sq", "running"]);
    for s in &rec.samples {
        table.push(vec![s.t.into(), s.dphi_sq.into(), s.kphi_sq.into(), s.running.into()]);
    }
    rec.samples.clear();
    let viscous = match cfg.c_prime {
        Some(c) if p.nu > 0.0 => {
            let mut v = viscous_damping_check(&grid, &w0, k, &p, t_final, c)?;
            v.samples.clear();
            Some(v)
        }
        _ => None,
    };
    Ok(Outcome {
        table,
        passed: rec.phase_resolved,
        result: json!({"inviscid": rec, "viscous": viscous}),
        grid: vec![("N", json!(n)), ("n_t", json!(rec.n_t))],
    })
}

/// `nu^{1/2} |B|^{1/2} R^{-2}`, the amplitude unit of the threshold scans.
fn amplitude_unit(p: &FlowParams) -> f64 {
    (p.nu * p.b.abs()).sqrt() / p.outer_radius.powi(2)
}

fn simulation_config(cfg: &ExperimentConfig, p: FlowParams) -> Result<SimulationConfig> {
    let t_final = cfg.t_final.unwrap_or(10.0 / p.mu(1));
    let amplitude = cfg.amplitude.unwrap_or(0.01 * amplitude_unit(&p));
    let mut s = SimulationConfig::new(p, cfg.k_max.unwrap_or(8), cfg.n_or(48), t_final, amplitude);
    s.dt = cfg.dt;
    s.profile = profile_of(cfg)?;
    s.seed = cfg.seed_or(0);
    if let Some(b) = cfg.nonlinear {
        s.nonlinear = b;
    }
    if let Some(r) = cfg.n_records {
        s.n_records = r;
    }
    if let Some(c) = cfg.c_prime {
        s.c_prime = c;
    }
    s.validate()?;
    Ok(s)
}

fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sc = simulation_config(cfg, cfg.params()?)?;
    let res = simulate(&sc)?;
    let mut cols = vec!["t".to_string(), "deviation_norm".into(), "mean_norm".into(), "enstrophy_residual".into()];
    cols.extend((0..=sc.k_max).map(|k| format!("E_{k}")));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut table = CsvTable::new(&col_refs);
    for r in &res.records {
        let mut row: Vec<Cell> = vec![r.t.into(), r.deviation_norm.into(), r.mean_norm.into(), r.enstrophy_residual.into()];
        row.extend(r.energies.iter().map(|&e| Cell::from(e)));
        table.push(row);
    }
    Ok(Outcome {
        table,
        passed: true,
        result: json!({"config": sc, "summary": res.summary}),
        grid: vec![("N", json!(sc.n)), ("K", json!(sc.k_max))],
    })
}

fn cmd_threshold(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rule = StabilityRule {
        decay_ratio: cfg.decay_ratio.unwrap_or(StabilityRule::default().decay_ratio),
        growth_cap: cfg.growth_cap.unwrap_or(StabilityRule::default().growth_cap),
    };
    let (lo, hi) = (cfg.a_lo.unwrap_or(0.01), cfg.a_hi.unwrap_or(10.0));
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::config(format!("a_lo = {lo}, a_hi = {hi}: need 0 < a_lo < a_hi")));
    }
    let iters = cfg.iters.unwrap_or(6);
    let rungs = cfg.ladder.unwrap_or(5);
    if rungs < 2 {
        return Err(Error::config(format!("ladder = {rungs} must be at least 2")));
    }
    let mut table = CsvTable::new(&["nu", "B", "R", "amplitude", "verdict", "final_ratio", "max_growth"]);
    let mut records: Vec<ThresholdRecord> = Vec::new();
    let mut summary = Vec::new();
    let mut sc0 = None;
    for p in cfg.param_sweep()? {
        let sc = simulation_config(cfg, p)?;
        let unit = amplitude_unit(&p);
        let amps = geomspace(lo * unit, hi * unit, rungs);
        let ladder = ladder_scan(&sc, &amps, &rule)?;
        let mut probes = ladder.clone();
        // Bracket: last stable rung before the first uncertified one.
        let first_bad = ladder.iter().position(|q| q.verdict != Verdict::Stable);
        let (star, bracket, status) = match first_bad {
            Some(0) => (None, None, "unstable_at_a_lo"),
            None => (Some(amps[rungs - 1]), None, "stable_at_a_hi"),
            Some(i) => {
                let rec = threshold_bisect(&sc, amps[i - 1], amps[i], iters, &rule)?;
                // The bracket ends were already probed on the ladder.
                probes.extend(rec.probes.iter().skip(2).cloned());
                let out = (Some(rec.amplitude_star), Some(rec.bracket), "bracketed");
                records.push(rec);
                out
            }
        };
        for pr in &probes {
            table.push(vec![
                p.nu.into(),
                p.b.into(),
                p.outer_radius.into(),
                pr.amplitude.into(),
                pr.verdict.name().into(),
                pr.final_ratio.into(),
                pr.max_growth.into(),
            ]);
        }
        summary.push(json!({
            "params": p, "T": sc.t_final, "status": status, "amplitude_star": star,
            "amplitude_star_units": star.map(|a| a / unit), "bracket": bracket, "n_probes": probes.len(),
        }));
        sc0.get_or_insert(sc);
    }
    let beta = if records.len() >= 4 { Some(beta_fit(&records)?) } else { None };
    let sc0 = sc0.ok_or_else(|| Error::config("empty sweep"))?;
    Ok(Outcome {
        table,
        passed: true,
        result: json!({"rule": rule, "amplitude_unit": "nu^(1/2) |B|^(1/2) R^(-2)", "records": summary, "beta_fit": beta}),
        grid: vec![("N", json!(sc0.n)), ("K", json!(sc0.k_max))],
    })
}

fn cmd_inequalities(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = cfg.n_or(64);
    let samples = cfg.samples.unwrap_or(1000);
    let report = run_suite(n, samples, cfg.seed_or(0))?;
    let mut table = CsvTable::new(&["name", "R", "k", "samples", "worst_ratio", "worst_sample", "bound", "passed"]);
    for r in &report.reports {
        table.push(vec![
            r.name.clone().into(),
            r.outer_radius.into(),
            r.k.map(Cell::from).unwrap_or(Cell::Text(String::new())),
            r.samples.into(),
            r.worst_ratio.into(),
            r.worst_sample.into(),
            r.bound.into(),
            r.passed.into(),
        ]);
    }
    Ok(Outcome {
        table,
        passed: report.all_passed,
        result: serde_json::to_value(&report)?,
        grid: vec![("N", json!(n))],
    })
}

/// `--out` if given, else the config's `out`, else `out`.
pub fn output_dir(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_in(dir: &Path, args: &[&str], config: Option<&str>) -> i32 {
        let mut argv: Vec<String> = vec!["tcflow".into()];
        argv.extend(args.iter().map(|s| s.to_string()));
        if let Some(c) = config {
            let p = dir.join("c.json");
            std::fs::write(&p, c).unwrap();
            argv.push("--config".into());
            argv.push(p.display().to_string());
        }
        argv.push("--out".into());
        argv.push(dir.display().to_string());
        run(argv)
    }

    #[test]
    fn resolvent_happy_path() {
        let d = tempfile::tempdir().unwrap();
        assert_eq!(run_in(d.path(), &["resolvent"], Some(r#"{"nu": 1e-3, "N": 24}"#)), EXIT_OK);
        assert!(d.path().join("resolvent.csv").exists());
        assert!(d.path().join("resolvent.json").exists());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["tcflow", "resolvent", "--bogus"]), EXIT_CONFIG);
        assert_eq!(run(["tcflow", "nosuch"]), EXIT_CONFIG);
        assert_eq!(run(["tcflow", "--help"]), EXIT_OK);
    }

    #[test]
    fn bad_config_exits_two() {
        let d = tempfile::tempdir().unwrap();
        assert_eq!(run_in(d.path(), &["simulate"], Some(r#"{"dt": -1}"#)), EXIT_CONFIG);
        assert_eq!(run_in(d.path(), &["basis"], Some(r#"{"typo": 1}"#)), EXIT_CONFIG);
        assert_eq!(run_in(d.path(), &["rates"], Some(r#"{"variable": "x"}"#)), EXIT_CONFIG);
    }

    #[test]
    fn failing_check_exits_one() {
        let d = tempfile::tempdir().unwrap();
        let code = run_in(d.path(), &["basis"], Some(r#"{"N": 40, "l_max": 8, "gram_tol": 1e-300}"#));
        assert_eq!(code, EXIT_CHECK_FAILED);
    }
}
