//! Amplitude bisection for the finite-horizon stability threshold and the
//! fit of its exponent in `nu`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::fit_line;
use crate::operators::FlowParams;
use crate::solver::{simulate, SimulationConfig};

/// Finite-horizon proxy for asymptotic stability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRule {
    /// `||w - \bar w||(T) / ||w - \bar w||(0)` must not exceed this.
    pub decay_ratio: f64,
    /// `||w - \bar w||(t) / ||w - \bar w||(0)` must stay below this.
    pub growth_cap: f64,
}

impl Default for StabilityRule {
    fn default() -> Self {
        Self {
            decay_ratio: 0.1,
            growth_cap: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    NotCertified,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::NotCertified => "not_certified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub amplitude: f64,
    pub verdict: Verdict,
    pub final_ratio: f64,
    pub max_growth: f64,
    /// `E(0)` of the probed initial data.
    pub initial_functional: f64,
    pub decay_rate: Option<f64>,
    /// Why a probe failed to certify, when it is not just the thresholds.
    pub reason: Option<String>,
}

/// Run one simulation at `amplitude` and classify it.
pub fn stability_probe(config: &SimulationConfig, amplitude: f64, rule: &StabilityRule) -> Result<ProbeResult> {
    let min_t = 10.0 / config.params.mu(1);
    if config.t_final < min_t * (1.0 - 1e-12) {
        return Err(Error::config(format!(
            "horizon T = {} is below 10 / mu_1 = {min_t}",
            config.t_final
        )));
    }
    let mut cfg = config.clone();
    cfg.amplitude = amplitude;
    match simulate(&cfg) {
        Ok(res) => {
            let s = &res.summary;
            let zero = s.initial_deviation == 0.0;
            let ok = zero || (s.final_ratio <= rule.decay_ratio && s.max_growth <= rule.growth_cap);
            Ok(ProbeResult {
                amplitude,
                verdict: if ok { Verdict::Stable } else { Verdict::NotCertified },
                final_ratio: s.final_ratio,
                max_growth: s.max_growth,
                initial_functional: s.initial_functional,
                decay_rate: s.decay_fit.as_ref().map(|f| f.rate),
                reason: None,
            })
        }
        Err(Error::Integration { time, reason }) => Ok(ProbeResult {
            amplitude,
            verdict: Verdict::NotCertified,
            final_ratio: f64::NAN,
            max_growth: f64::INFINITY,
            initial_functional: f64::NAN,
            decay_rate: None,
            reason: Some(format!("integration failed at t = {time}: {reason}")),
        }),
        Err(e) => Err(e),
    }
}

/// Probes at several amplitudes, run in parallel, returned in input order.
pub fn ladder_scan(config: &SimulationConfig, amplitudes: &[f64], rule: &StabilityRule) -> Result<Vec<ProbeResult>> {
    amplitudes
        .par_iter()
        .map(|&a| stability_probe(config, a, rule))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub params: FlowParams,
    pub t_final: f64,
    pub rule: StabilityRule,
    /// Largest amplitude certified stable.
    pub amplitude_star: f64,
    /// Final bracket `[stable, not certified]`.
    pub bracket: (f64, f64),
    /// The initial bracket was already tighter than a factor 1.01, so no
    /// probe ran.
    pub short_circuit: bool,
    pub probes: Vec<ProbeResult>,
}

/// Geometric bisection of `[a_lo, a_hi]` for at most `iters` steps.
pub fn threshold_bisect(
    config: &SimulationConfig,
    a_lo: f64,
    a_hi: f64,
    iters: usize,
    rule: &StabilityRule,
) -> Result<ThresholdRecord> {
    if !(a_lo > 0.0) || !(a_hi > a_lo) || !a_hi.is_finite() {
        return Err(Error::config(format!("invalid bracket [{a_lo}, {a_hi}]")));
    }
    if iters > 12 {
        return Err(Error::config(format!("iters = {iters} exceeds 12")));
    }
    let mut record = ThresholdRecord {
        params: config.params,
        t_final: config.t_final,
        rule: *rule,
        amplitude_star: a_lo,
        bracket: (a_lo, a_hi),
        short_circuit: false,
        probes: Vec::new(),
    };
    if a_hi <= 1.01 * a_lo {
        record.short_circuit = true;
        return Ok(record);
    }
    let ends = ladder_scan(config, &[a_lo, a_hi], rule)?;
    if ends[0].verdict != Verdict::Stable || ends[1].verdict != Verdict::NotCertified {
        return Err(Error::config(format!(
            "bracket [{a_lo}, {a_hi}] is not (stable, not certified): got ({}, {})",
            ends[0].verdict.name(),
            ends[1].verdict.name()
        )));
    }
    record.probes.extend(ends);
    let (mut lo, mut hi) = (a_lo, a_hi);
    for _ in 0..iters {
        if hi <= 1.01 * lo {
            break;
        }
        let mid = (lo * hi).sqrt();
        let p = stability_probe(config, mid, rule)?;
        if p.verdict == Verdict::Stable {
            lo = mid;
        } else {
            hi = mid;
        }
        record.probes.push(p);
    }
    record.amplitude_star = lo;
    record.bracket = (lo, hi);
    Ok(record)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Half-width of the 95% confidence interval of the slope.
    pub ci95: f64,
    pub n_records: usize,
    pub degenerate: bool,
}

/// Two-sided 95% Student-t quantiles for 1..=10 degrees of freedom.
const T95: [f64; 10] = [12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228];

/// Slope of `log amplitude_star` against `log nu`.
pub fn beta_fit(records: &[ThresholdRecord]) -> Result<BetaFit> {
    if records.len() < 4 {
        return Err(Error::config(format!(
            "beta fit needs at least 4 records, got {}",
            records.len()
        )));
    }
    let first = records[0].params;
    if records.iter().any(|r| {
        r.params.b != first.b || r.params.a != first.a || r.params.outer_radius != first.outer_radius
    }) {
        return Err(Error::config("records differ in a parameter other than nu"));
    }
    let mut pts: Vec<(f64, f64)> = records.iter().map(|r| (r.params.nu, r.amplitude_star)).collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let n = pts.len();
    if pts.iter().all(|p| p.0 == pts[0].0) {
        return Ok(BetaFit {
            slope: 0.0,
            intercept: pts[0].1.ln(),
            r_squared: 0.0,
            ci95: f64::INFINITY,
            n_records: n,
            degenerate: true,
        });
    }
    let ratios: Vec<f64> = pts.windows(2).map(|w| w[1].0 / w[0].0).collect();
    if ratios.iter().any(|q| ((q - ratios[0]) / ratios[0]).abs() > 1e-6) {
        return Err(Error::config("nu values are not a geometric ladder"));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::domain("degenerate ladder"))?;
    let mx = xs.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - fit.intercept - fit.slope * x).powi(2))
        .sum();
    let df = n - 2;
    let t = T95.get(df - 1).copied().unwrap_or(1.96);
    Ok(BetaFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        ci95: t * (sse / df as f64 / sxx).sqrt(),
        n_records: n,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Profile;

    fn config(nu: f64) -> SimulationConfig {
        let p = FlowParams::new(nu, 0.0, 1.0, 2.0).unwrap();
        let mut c = SimulationConfig::new(p, 3, 24, 10.0 / p.mu(1), 0.0);
        c.profile = Profile::Psi1;
        c.n_records = 50;
        c
    }

    fn planted(nu: f64, a: f64) -> ThresholdRecord {
        ThresholdRecord {
            params: FlowParams::new(nu, 0.0, 1.0, 2.0).unwrap(),
            t_final: 1.0,
            rule: StabilityRule::default(),
            amplitude_star: a,
            bracket: (a, 2.0 * a),
            short_circuit: false,
            probes: vec![],
        }
    }

    #[test]
    fn zero_amplitude_is_stable() {
        let p = stability_probe(&config(1e-2), 0.0, &StabilityRule::default()).unwrap();
        assert_eq!(p.verdict, Verdict::Stable);
    }

    #[test]
    fn short_horizon_is_rejected() {
        let mut c = config(1e-2);
        c.t_final *= 0.5;
        assert!(stability_probe(&c, 1e-3, &StabilityRule::default()).unwrap_err().is_config());
    }

    #[test]
    fn small_amplitude_is_stable_and_deterministic() {
        let c = config(1e-2);
        let a = 0.01 * (1e-2f64).sqrt() / 4.0;
        let p = stability_probe(&c, a, &StabilityRule::default()).unwrap();
        let q = stability_probe(&c, a, &StabilityRule::default()).unwrap();
        assert_eq!(p.verdict, Verdict::Stable);
        assert_eq!(p, q);
    }

    #[test]
    fn tight_bracket_returns_immediately() {
        let r = threshold_bisect(&config(1e-2), 1.0, 1.005, 5, &StabilityRule::default()).unwrap();
        assert!(r.short_circuit && r.probes.is_empty());
        assert_eq!(r.amplitude_star, 1.0);
    }

    #[test]
    fn invalid_bracket_is_a_config_error() {
        let c = config(1e-2);
        let rule = StabilityRule::default();
        assert!(threshold_bisect(&c, 2.0, 1.0, 3, &rule).unwrap_err().is_config());
        assert!(threshold_bisect(&c, 1.0, 2.0, 13, &rule).unwrap_err().is_config());
        // Both ends stable.
        assert!(threshold_bisect(&c, 1e-6, 1e-5, 3, &rule).unwrap_err().is_config());
    }

    #[test]
    fn beta_fit_planted_and_degenerate() {
        let recs: Vec<_> = [1e-5, 1e-4, 1e-3, 1e-2].iter().map(|&nu: &f64| planted(nu, 0.3 * nu.sqrt())).collect();
        let f = beta_fit(&recs).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!(f.ci95 < 1e-6);
        let same: Vec<_> = (0..4).map(|_| planted(1e-3, 0.1)).collect();
        let d = beta_fit(&same).unwrap();
        assert!(d.degenerate && d.slope == 0.0);
        assert!(beta_fit(&recs[..3]).unwrap_err().is_config());
    }
}
