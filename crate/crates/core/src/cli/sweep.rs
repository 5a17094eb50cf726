//! Parameter sweeps over (rho, SNR, method).

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::OutputFormat;
use super::CliError;
use crate::capacity::{
    capacity_awgn, capacity_high_snr_for, capacity_low_snr, capacity_quadrature, capacity_rayleigh,
    capacity_series, CapacityEstimate, Method, DEFAULT_SERIES_TERMS,
};
use crate::channel::{db_to_linear, Mode, Parameterization};
use crate::montecarlo::{estimate_capacity, McConfig};
use crate::special::AccuracyPolicy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub mode: Mode,
    pub snr_db_grid: Vec<f64>,
    pub rho_list: Vec<f64>,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub mc: Option<McConfig>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub output_format: OutputFormat,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        strictly_increasing("snr_db_grid", &self.snr_db_grid)?;
        strictly_increasing("rho_list", &self.rho_list)?;
        if let Some(r) = self.rho_list.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(CliError::Usage(format!("rho = {r} outside [0, 1]")));
        }
        if let Some(s) = self
            .snr_db_grid
            .iter()
            .find(|s| !db_to_linear(**s).is_normal())
        {
            return Err(CliError::Usage(format!("snr_db = {s} out of range")));
        }
        if self.methods.is_empty() {
            return Err(CliError::Usage("no methods requested".into()));
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return Err(CliError::Usage("duplicate method in list".into()));
        }
        if self.rho_list.contains(&1.0) {
            if let Some(m) = self.methods.iter().find(|m| m.needs_density()) {
                return Err(CliError::Usage(format!(
                    "method {m} needs rho < 1; at rho = 1 use mc, asymptotic_high or asymptotic_low"
                )));
            }
        }
        if self.methods.contains(&Method::MonteCarlo) {
            self.mc_config().validate()?;
        }
        Ok(())
    }

    pub fn mc_config(&self) -> McConfig {
        self.mc.unwrap_or_default()
    }

    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for &rho in &self.rho_list {
            for &snr_db in &self.snr_db_grid {
                for &method in &self.methods {
                    out.push(Point {
                        mode: self.mode,
                        rho,
                        snr_db,
                        method,
                        normalise: false,
                    });
                }
            }
        }
        out
    }
}

fn strictly_increasing(name: &str, xs: &[f64]) -> Result<(), CliError> {
    if xs.is_empty() {
        return Err(CliError::Usage(format!("{name} is empty")));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Usage(format!(
            "{name} contains a non-finite value"
        )));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage(format!(
            "{name} must be strictly increasing"
        )));
    }
    Ok(())
}

/// One evaluation. With `normalise`, the capacity is divided by the AWGN
/// capacity at the grid SNR and the method label gains a `_norm` suffix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub mode: Mode,
    pub rho: f64,
    pub snr_db: f64,
    pub method: Method,
    pub normalise: bool,
}

impl Point {
    fn label(&self) -> String {
        if self.normalise {
            format!("{}_norm", self.method.as_str())
        } else {
            self.method.as_str().to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub mode: Mode,
    pub rho: f64,
    pub snr_db: f64,
    /// Linear value of the grid SNR (`γ̄` or `γ̄ᴵ` depending on the mode).
    pub gamma_bar_linear: f64,
    pub method: String,
    pub capacity_bpshz: f64,
    /// NaN for asymptotic rows.
    pub error_bound: f64,
    pub diagnostics: String,
}

/// Capacity by one method. AWGN and Rayleigh references use the grid SNR
/// directly.
pub fn evaluate(
    param: &Parameterization,
    method: Method,
    policy: &AccuracyPolicy,
    mc: &McConfig,
) -> crate::Result<CapacityEstimate> {
    match method {
        Method::Quadrature => capacity_quadrature(&param.channel()?, policy),
        Method::Series => capacity_series(&param.channel()?, policy, DEFAULT_SERIES_TERMS),
        Method::AsymptoticHigh => capacity_high_snr_for(param),
        Method::AsymptoticLow => Ok(capacity_low_snr(param)),
        Method::AwgnReference => capacity_awgn(param.snr()),
        Method::RayleighReference => capacity_rayleigh(param.snr()),
        Method::MonteCarlo => Ok(estimate_capacity(param, mc)?.into_capacity_estimate()),
    }
}

fn evaluate_point(p: &Point, policy: &AccuracyPolicy, mc: &McConfig) -> Result<Row, CliError> {
    let where_ = || {
        format!(
            "{} at rho = {}, snr_db = {} ({})",
            p.method,
            p.rho,
            p.snr_db,
            p.mode.as_str()
        )
    };
    let param = Parameterization::from_db(p.mode, p.snr_db, p.rho)
        .map_err(|e| CliError::from_lib(e, &where_()))?;
    let est =
        evaluate(&param, p.method, policy, mc).map_err(|e| CliError::from_lib(e, &where_()))?;
    let (mut value, mut error) = (est.value, est.error_bound.value());
    if p.normalise {
        let awgn = capacity_awgn(param.snr())
            .map_err(|e| CliError::from_lib(e, &where_()))?
            .value;
        value /= awgn;
        error /= awgn;
    }
    Ok(Row {
        mode: p.mode,
        rho: p.rho,
        snr_db: p.snr_db,
        gamma_bar_linear: param.snr(),
        method: p.label(),
        capacity_bpshz: value,
        error_bound: error,
        diagnostics: est.diagnostics.to_string(),
    })
}

/// Evaluates all points (in parallel) and returns rows sorted by
/// `(rho, snr_db, method)`. The first failing point in input order is
/// reported.
pub fn run_points(
    points: &[Point],
    policy: &AccuracyPolicy,
    mc: &McConfig,
) -> Result<Vec<Row>, CliError> {
    let results: Vec<Result<Row, CliError>> = points
        .par_iter()
        .map(|p| evaluate_point(p, policy, mc))
        .collect();
    let mut rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    rows.sort_by(|a, b| {
        a.rho
            .total_cmp(&b.rho)
            .then(a.snr_db.total_cmp(&b.snr_db))
            .then_with(|| a.method.cmp(&b.method))
    });
    Ok(rows)
}

pub fn run_sweep(spec: &SweepSpec, policy: &AccuracyPolicy) -> Result<Vec<Row>, CliError> {
    spec.validate()?;
    run_points(&spec.points(), policy, &spec.mc_config())
}

/// Parses `a,b,c` or `start:stop:step` (stop inclusive).
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |what: &str| CliError::Usage(format!("bad grid '{s}': {what}"));
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| bad(&format!("'{t}' is not a number")))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        if n > 1_000_000 {
            return Err(bad("too many points"));
        }
        return Ok((0..=n).map(|i| start + i as f64 * step).collect());
    }
    s.split(',').map(num).collect()
}

pub fn parse_methods(s: &str) -> Result<Vec<Method>, CliError> {
    s.split(',').map(|t| parse_method(t.trim())).collect()
}

pub fn parse_method(s: &str) -> Result<Method, CliError> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
        CliError::Usage(format!(
            "unknown method '{s}', expected one of quadrature, series, asymptotic_high, asymptotic_low, mc, awgn, rayleigh"
        ))
    })
}

pub fn parse_mode(s: &str) -> Result<Mode, CliError> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
        CliError::Usage(format!(
            "unknown mode '{s}', expected fixed_receiver_snr or fixed_power_budget"
        ))
    })
}
