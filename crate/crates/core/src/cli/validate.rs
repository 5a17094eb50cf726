//! Self-check suites: `fast` covers the smoke grid, `full` every
//! acceptance property at full sample sizes.

use super::figure::{figure_dataset, FigureId};
use super::output::{render, OutputFormat};
use crate::capacity::{
    capacity_awgn, capacity_high_snr, capacity_high_snr_budget, capacity_quadrature,
    capacity_rayleigh, capacity_series, Diagnostics, DEFAULT_SERIES_TERMS,
};
use crate::channel::{
    db_to_linear, integrate_against_pdf, moment, moment_log_derivative, normalized_moment,
    ChannelParams, Mode, Parameterization,
};
use crate::montecarlo::{
    estimate_capacity, estimate_moment, ks_test, ks_test_marginals, McConfig, ACCEPTANCE_SAMPLES,
    DEFAULT_BATCHES, SMOKE_SAMPLES,
};
use crate::special::{hyp2f1_cross_derivative, AccuracyPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fast,
    Full,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            _ => Err(format!("unknown suite '{s}', expected fast or full")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, failures: Vec<String>, summary: String) -> Self {
        let passed = failures.is_empty();
        let detail = if passed { summary } else { failures.join("; ") };
        Check {
            name,
            passed,
            detail,
        }
    }

    fn error(name: &'static str, e: impl std::fmt::Display) -> Self {
        Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

pub const SMOKE_SNR_DB: [f64; 4] = [-10.0, 0.0, 10.0, 20.0];
pub const SMOKE_RHO: [f64; 3] = [0.0, 0.5, 0.9];

fn smoke_grid() -> impl Iterator<Item = (f64, f64)> {
    SMOKE_RHO
        .iter()
        .flat_map(|&r| SMOKE_SNR_DB.iter().map(move |&s| (s, r)))
}

fn mc(n: u64, seed: u64) -> McConfig {
    McConfig {
        n_samples: n,
        seed,
        n_batches: DEFAULT_BATCHES,
    }
}

fn recv(snr: f64, rho: f64) -> crate::Result<Parameterization> {
    Parameterization::new(Mode::FixedReceiverSnr, snr, rho)
}

pub fn run_suite(suite: Suite, policy: &AccuracyPolicy, seed: u64) -> Vec<Check> {
    match suite {
        Suite::Fast => vec![
            wrap("pdf_normalisation", || {
                pdf_normalisation(&[0.1, 1.0, 10.0, 100.0], &SMOKE_RHO, policy)
            }),
            wrap("moment_identity", || {
                moment_identity(&[0.0, 0.5, 0.9], policy, None)
            }),
            wrap("series_quadrature", || {
                series_quadrature(&SMOKE_SNR_DB, &SMOKE_RHO, policy)
            }),
            wrap("high_snr_asymptote", || high_snr_asymptote(policy, false)),
            wrap("mc_triangle", || {
                mc_triangle(policy, &mc(SMOKE_SAMPLES, seed))
            }),
            wrap("sampler_law", || {
                sampler_law(policy, &mc(SMOKE_SAMPLES, seed))
            }),
            wrap("derivatives", derivatives),
        ],
        Suite::Full => {
            let big = mc(ACCEPTANCE_SAMPLES, seed);
            vec![
                wrap("pdf_normalisation", || {
                    pdf_normalisation(&[0.01, 1.0, 100.0], &[0.0, 0.3, 0.6, 0.9, 0.99], policy)
                }),
                wrap("moment_identity", || {
                    moment_identity(&[0.0, 0.3, 0.6, 0.9], policy, Some(&big))
                }),
                wrap("series_quadrature", || {
                    let grid: Vec<f64> = (0..9).map(|i| -10.0 + 5.0 * i as f64).collect();
                    series_quadrature(&grid, &[0.0, 0.3, 0.6, 0.9], policy)
                }),
                wrap("high_snr_asymptote", || high_snr_asymptote(policy, true)),
                wrap("fixed_budget_collapse", || {
                    fixed_budget_collapse(policy, &big)
                }),
                wrap("low_snr_benefit", || low_snr_benefit(policy, &big)),
                wrap("mc_triangle", || mc_triangle(policy, &big)),
                wrap("sampler_law", || {
                    sampler_law(policy, &mc(SMOKE_SAMPLES, seed))
                }),
                wrap("derivatives", derivatives),
                wrap("determinism", || determinism(policy, seed)),
            ]
        }
    }
}

type Outcome = crate::Result<(Vec<String>, String)>;

fn wrap<F: FnOnce() -> Outcome>(name: &'static str, f: F) -> Check {
    match f() {
        Ok((failures, summary)) => Check::new(name, failures, summary),
        Err(e) => Check::error(name, e),
    }
}

fn pdf_normalisation(gbars: &[f64], rhos: &[f64], policy: &AccuracyPolicy) -> Outcome {
    let mut fails = Vec::new();
    let (mut worst_mass, mut worst_mean) = (0.0f64, 0.0f64);
    for &g in gbars {
        for &r in rhos {
            let p = ChannelParams::new(g, r)?;
            let mass = (integrate_against_pdf(&p, |_| 1.0, policy)?.value - 1.0).abs();
            let mean = (integrate_against_pdf(&p, |t| t * t, policy)?.value / g - 1.0).abs();
            worst_mass = worst_mass.max(mass);
            worst_mean = worst_mean.max(mean);
            if mass > 1e-8 || mean > 1e-7 {
                fails.push(format!(
                    "gbar={g} rho={r}: mass err {mass:.2e}, mean err {mean:.2e}"
                ));
            }
        }
    }
    Ok((
        fails,
        format!("max mass err {worst_mass:.2e}, max mean err {worst_mean:.2e}"),
    ))
}

fn moment_identity(rhos: &[f64], policy: &AccuracyPolicy, mc_cfg: Option<&McConfig>) -> Outcome {
    let gbar = 2.0;
    let mut fails = Vec::new();
    let mut worst = 0.0f64;
    let mut worst_z = 0.0f64;
    for &r in rhos {
        let p = ChannelParams::new(gbar, r)?;
        for k in 1..=3u32 {
            let closed = moment(&p, k as f64)?;
            let quad = integrate_against_pdf(&p, |t| t.powi(2 * k as i32), policy)?.value;
            let rel = (quad / closed - 1.0).abs();
            worst = worst.max(rel);
            if rel > 1e-7 {
                fails.push(format!("rho={r} k={k}: quadrature {quad} vs {closed}"));
            }
            if let Some(c) = mc_cfg {
                let m = estimate_moment(&recv(gbar, r)?, k, c)?;
                let z = (m.estimate - closed).abs() / m.std_error;
                worst_z = worst_z.max(z);
                if z > 3.0 {
                    fails.push(format!(
                        "rho={r} k={k}: mc {} ± {} vs {closed}",
                        m.estimate, m.std_error
                    ));
                }
            }
        }
    }
    Ok((
        fails,
        format!("max rel err {worst:.2e}, max mc z {worst_z:.2}"),
    ))
}

fn series_quadrature(snr_db: &[f64], rhos: &[f64], policy: &AccuracyPolicy) -> Outcome {
    let mut fails = Vec::new();
    let mut worst = 0.0f64;
    for &r in rhos {
        for &s in snr_db {
            let p = ChannelParams::new(db_to_linear(s), r)?;
            let q = capacity_quadrature(&p, policy)?.value;
            let ser = capacity_series(&p, policy, DEFAULT_SERIES_TERMS)?;
            let rel = (ser.value / q - 1.0).abs();
            worst = worst.max(rel);
            if rel > 1e-6 {
                fails.push(format!(
                    "snr={s} rho={r}: series {} vs quadrature {q}",
                    ser.value
                ));
            }
            if r == 0.0 && !matches!(ser.diagnostics, Diagnostics::Series { terms: 1, .. }) {
                fails.push(format!(
                    "snr={s}: series used more than one term at rho = 0"
                ));
            }
        }
    }
    Ok((fails, format!("max rel diff {worst:.2e}")))
}

/// Near-unit correlation used where the density is needed as `rho -> 1`.
pub const RHO_NEAR_ONE: f64 = 0.999;

fn high_snr_asymptote(policy: &AccuracyPolicy, with_unit_gap: bool) -> Outcome {
    let mut fails = Vec::new();
    let mut last = Vec::new();
    for r in [0.0, 0.5, 0.9] {
        let mut gaps = Vec::new();
        for s in [20.0, 30.0, 40.0] {
            let p = ChannelParams::new(db_to_linear(s), r)?;
            gaps.push((capacity_quadrature(&p, policy)?.value - capacity_high_snr(&p).value).abs());
        }
        if !(gaps[1] < gaps[0] && gaps[2] < gaps[1]) || gaps[2] > 0.05 {
            fails.push(format!("rho={r}: gaps {gaps:?}"));
        }
        last.push(gaps[2]);
    }
    let mut summary = format!("40 dB gaps {:.4}, {:.4}, {:.4}", last[0], last[1], last[2]);
    if with_unit_gap {
        let c0 = capacity_quadrature(&ChannelParams::new(1e4, 0.0)?, policy)?.value;
        let c1 = capacity_quadrature(&ChannelParams::new(1e4, RHO_NEAR_ONE)?, policy)?.value;
        let d = c0 - c1;
        if (d - 1.0).abs() > 0.05 {
            fails.push(format!(
                "rho 0 vs {RHO_NEAR_ONE} capacity gap at 40 dB = {d:.6}, outside 1 ± 0.05"
            ));
        }
        summary.push_str(&format!(", correlation gap {d:.4}"));
    }
    Ok((fails, summary))
}

fn fixed_budget_collapse(policy: &AccuracyPolicy, c: &McConfig) -> Outcome {
    let target = capacity_high_snr_budget(1e4)?.value;
    let mut fails = Vec::new();
    let mut values = Vec::new();
    for r in [0.0, 0.5, 1.0] {
        let param = Parameterization::new(Mode::FixedPowerBudget, 1e4, r)?;
        let v = if r < 1.0 {
            capacity_quadrature(&param.channel()?, policy)?.value
        } else {
            estimate_capacity(&param, c)?.estimate
        };
        values.push(v);
        if (v - target).abs() > 0.05 {
            fails.push(format!("rho={r}: {v} vs {target}"));
        }
    }
    Ok((fails, format!("capacities {values:.4?} around {target:.4}")))
}

fn low_snr_benefit(policy: &AccuracyPolicy, c: &McConfig) -> Outcome {
    let gi = db_to_linear(-30.0);
    let budget = |r| Parameterization::new(Mode::FixedPowerBudget, gi, r);
    let c0 = capacity_quadrature(&budget(0.0)?.channel()?, policy)?.value;
    let c5 = capacity_quadrature(&budget(0.5)?.channel()?, policy)?.value;
    let c1 = estimate_capacity(&budget(1.0)?, c)?.estimate;
    let awgn = capacity_awgn(gi)?.value;
    let mut fails = Vec::new();
    for (r, v) in [(0.5, c5), (1.0, c1)] {
        let ratio = v / c0;
        if (ratio / (1.0 + r) - 1.0).abs() > 0.05 {
            fails.push(format!("rho={r}: ratio {ratio}"));
        }
        if v / awgn <= 1.0 {
            fails.push(format!(
                "rho={r}: normalised capacity {} not above 1",
                v / awgn
            ));
        }
    }
    Ok((fails, format!("ratios {:.4} and {:.4}", c5 / c0, c1 / c0)))
}

fn mc_triangle(policy: &AccuracyPolicy, c: &McConfig) -> Outcome {
    let mut fails = Vec::new();
    let mut worst_z = 0.0f64;
    for (s, r) in smoke_grid() {
        let g = db_to_linear(s);
        let param = recv(g, r)?;
        let q = capacity_quadrature(&param.channel()?, policy)?.value;
        let m = estimate_capacity(&param, c)?;
        let z = (m.estimate - q).abs() / m.std_error;
        worst_z = worst_z.max(z);
        if z > 3.0 {
            fails.push(format!(
                "snr={s} rho={r}: mc {} ± {} vs quadrature {q}",
                m.estimate, m.std_error
            ));
        }
        let ray = capacity_rayleigh(g)?.value;
        let awgn = capacity_awgn(g)?.value;
        if !(q < ray && ray < awgn) {
            fails.push(format!(
                "snr={s} rho={r}: ordering {q} < {ray} < {awgn} violated"
            ));
        }
    }
    Ok((fails, format!("12 points, max z {worst_z:.2}")))
}

fn sampler_law(policy: &AccuracyPolicy, c: &McConfig) -> Outcome {
    let mut fails = Vec::new();
    let mut worst = 0.0f64;
    for r in [0.0, 0.5, 0.9] {
        let ks = ks_test(&recv(1.0, r)?, c, policy)?;
        worst = worst.max(ks.statistic / ks.critical);
        if !ks.passed {
            fails.push(format!("rho={r}: D={} >= {}", ks.statistic, ks.critical));
        }
        let (f, b) = ks_test_marginals(r, c)?;
        for (name, k) in [("g_f", f), ("g_b", b)] {
            worst = worst.max(k.statistic / k.critical);
            if !k.passed {
                fails.push(format!(
                    "rho={r} {name}: D={} >= {}",
                    k.statistic, k.critical
                ));
            }
        }
    }
    Ok((fails, format!("max D/critical {worst:.3}")))
}

fn derivatives() -> Outcome {
    let mut fails = Vec::new();
    let mut worst = 0.0f64;
    let h = 1e-4;
    for r in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let fd = (normalized_moment(r, h)? - normalized_moment(r, -h)?) / (2.0 * h);
        let d = (fd - moment_log_derivative(r)?).abs();
        worst = worst.max(d);
        if d > 1e-6 {
            fails.push(format!("moment rho={r}: fd {fd}"));
        }
    }
    // the terminating sum with its upper limit held fixed is smooth in (a, b)
    let frozen = |a: f64, b: f64, top: i64, rho: f64| -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 0..top {
            let mf = m as f64;
            term *= (mf - a) * (mf - b) / ((mf + 1.0) * (mf + 1.0)) * rho;
            sum += term;
        }
        sum
    };
    let rho = 0.6;
    let h = 1e-4;
    for a in 0..=3i64 {
        for b in 0..=3i64 {
            let top = a.min(b);
            let (af, bf) = (a as f64, b as f64);
            let fd = (frozen(af + h, bf + h, top, rho)
                - frozen(af + h, bf - h, top, rho)
                - frozen(af - h, bf + h, top, rho)
                + frozen(af - h, bf - h, top, rho))
                / (4.0 * h * h);
            let d = (fd - hyp2f1_cross_derivative(a, b, rho)?).abs();
            worst = worst.max(d);
            if d > 1e-5 {
                fails.push(format!("cross derivative ({a},{b}): fd {fd}"));
            }
        }
    }
    Ok((fails, format!("max abs err {worst:.2e}")))
}

fn determinism(policy: &AccuracyPolicy, seed: u64) -> Outcome {
    let c = McConfig {
        seed,
        ..FigureId::default_mc()
    };
    let run = || -> crate::Result<String> {
        let rows = figure_dataset(FigureId::FixedBudget, policy, &c)
            .map_err(|e| crate::Error::Config(e.to_string()))?;
        Ok(render(&rows, OutputFormat::Csv))
    };
    let (a, b) = (run()?, run()?);
    let fails = if a == b {
        Vec::new()
    } else {
        vec!["figure 2 output differs between runs".to_string()]
    };
    Ok((fails, format!("{} bytes identical", a.len())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("fast".parse::<Suite>().unwrap(), Suite::Fast);
        assert!("quick".parse::<Suite>().is_err());
    }

    #[test]
    fn derivative_checks_pass() {
        let (fails, _) = derivatives().unwrap();
        assert!(fails.is_empty(), "{fails:?}");
    }

    #[test]
    fn fast_suite_passes() {
        let checks = run_suite(Suite::Fast, &AccuracyPolicy::default(), 11);
        for c in &checks {
            assert!(c.passed, "{c}");
        }
        assert_eq!(checks.len(), 7);
    }
}
