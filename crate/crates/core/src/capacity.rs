//! Ergodic capacity (bps/Hz) by quadrature, Meijer-G series and asymptotes,
//! plus the AWGN and single-Rayleigh reference curves.

use std::f64::consts::{LN_2, LOG2_E};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, integrate_against_pdf, ChannelParams, Mode, Parameterization};
use crate::error::{Error, Result};
use crate::special::{
    exp_integral_e1_scaled, ln_gamma, meijer_g_scaled, AccuracyPolicy, GParams, EULER_GAMMA,
};

/// Default series length cap. Terms shrink roughly like `rho^k`, so
/// `rho = 0.9` needs a couple of hundred terms for 1e-10.
pub const DEFAULT_SERIES_TERMS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    Series,
    AsymptoticHigh,
    AsymptoticLow,
    #[serde(rename = "awgn")]
    AwgnReference,
    #[serde(rename = "rayleigh")]
    RayleighReference,
    #[serde(rename = "mc")]
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::Series => "series",
            Method::AsymptoticHigh => "asymptotic_high",
            Method::AsymptoticLow => "asymptotic_low",
            Method::AwgnReference => "awgn",
            Method::RayleighReference => "rayleigh",
            Method::MonteCarlo => "mc",
        }
    }

    /// Methods that need the closed-form density (`rho < 1`).
    pub fn needs_density(&self) -> bool {
        matches!(self, Method::Quadrature | Method::Series)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Numerical error bound, or a marker that the value is an asymptote with no
/// known remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorBound {
    Estimate(f64),
    Asymptotic,
}

impl ErrorBound {
    /// Numeric view; NaN for asymptotes.
    pub fn value(&self) -> f64 {
        match self {
            ErrorBound::Estimate(e) => *e,
            ErrorBound::Asymptotic => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostics {
    None,
    Quadrature {
        evals: usize,
    },
    Series {
        terms: usize,
        last_term: f64,
        contour_nodes: usize,
    },
    MonteCarlo {
        samples: u64,
        batches: u32,
        seed: u64,
    },
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostics::None => Ok(()),
            Diagnostics::Quadrature { evals } => write!(f, "evals={evals}"),
            Diagnostics::Series {
                terms,
                last_term,
                contour_nodes,
            } => {
                write!(
                    f,
                    "terms={terms};last_term={last_term:.3e};contour_nodes={contour_nodes}"
                )
            }
            Diagnostics::MonteCarlo {
                samples,
                batches,
                seed,
            } => {
                write!(f, "samples={samples};batches={batches};seed={seed}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEstimate {
    /// bps/Hz. Asymptotes may be negative at low SNR and are not clamped.
    pub value: f64,
    pub method: Method,
    pub error_bound: ErrorBound,
    pub diagnostics: Diagnostics,
}

impl CapacityEstimate {
    fn exact(value: f64, method: Method, error: f64) -> Self {
        Self {
            value,
            method,
            error_bound: ErrorBound::Estimate(error),
            diagnostics: Diagnostics::None,
        }
    }

    fn asymptotic(value: f64, method: Method) -> Self {
        Self {
            value,
            method,
            error_bound: ErrorBound::Asymptotic,
            diagnostics: Diagnostics::None,
        }
    }
}

/// `E{log2(1 + γ)}` by tanh-sinh quadrature of the density in `sqrt(γ)`.
pub fn capacity_quadrature(
    params: &ChannelParams,
    policy: &AccuracyPolicy,
) -> Result<CapacityEstimate> {
    let r = integrate_against_pdf(params, |t| (t * t).ln_1p() / LN_2, policy)?;
    Ok(CapacityEstimate {
        value: r.value,
        method: Method::Quadrature,
        error_bound: ErrorBound::Estimate(r.error),
        diagnostics: Diagnostics::Quadrature { evals: r.evals },
    })
}

/// Capacity as `C1 Σ_k C_k G^{4,1}_{2,4}[a²/4 | -k-1, -k; 0, 0, -k-1, -k-1]`,
/// with `C_k = (b/2)^{2k} / (2 (k!)²)`.
///
/// Summation stops once two consecutive terms fall below `rel_tol` times the
/// running sum; at `rho = 0` only the `k = 0` term exists.
pub fn capacity_series(
    params: &ChannelParams,
    policy: &AccuracyPolicy,
    k_max: usize,
) -> Result<CapacityEstimate> {
    if k_max < 1 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    let kc = params.kernel()?;
    let z = 0.25 * kc.a * kc.a;
    let ln_half_b = if kc.b > 0.0 {
        (0.5 * kc.b).ln()
    } else {
        f64::NEG_INFINITY
    };

    let mut sum = 0.0;
    let mut err = 0.0;
    let mut nodes = 0;
    let mut small_run = 0;
    let mut last_term = 0.0;
    for k in 0..k_max {
        let kernel = GParams::capacity_kernel(k, z)?;
        let g = meijer_g_scaled(&kernel, kernel.default_abscissa(), policy)?;
        nodes += g.nodes;
        let ln_ck = if k == 0 {
            -LN_2
        } else {
            -LN_2 + 2.0 * k as f64 * ln_half_b - 2.0 * ln_gamma(k as f64 + 1.0)?
        };
        let weight = kc.c1 * (ln_ck + g.ln_scale).exp();
        let term = weight * g.mantissa;
        sum += term;
        err += weight * g.mantissa_error;
        last_term = term;
        if kc.b == 0.0 {
            return Ok(series_estimate(sum, err, 1, last_term, nodes));
        }
        if term.abs() < policy.rel_tol() * sum.abs() {
            small_run += 1;
            if small_run == 2 {
                // geometric tail with ratio rho
                let tail = term.abs() * params.rho() / (1.0 - params.rho());
                return Ok(series_estimate(sum, err + tail, k + 1, last_term, nodes));
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::convergence(
        "capacity_series",
        format!(
            "{k_max} terms used at rho = {}, last term {last_term:e} vs sum {sum:e}; use capacity_quadrature",
            params.rho()
        ),
    ))
}

fn series_estimate(
    value: f64,
    err: f64,
    terms: usize,
    last_term: f64,
    contour_nodes: usize,
) -> CapacityEstimate {
    CapacityEstimate {
        value,
        method: Method::Series,
        error_bound: ErrorBound::Estimate(err),
        diagnostics: Diagnostics::Series {
            terms,
            last_term,
            contour_nodes,
        },
    }
}

/// `log2 γ̄ - 2 log2(e) γ_e - log2(1 + rho)`; valid at `rho = 1`.
pub fn capacity_high_snr(params: &ChannelParams) -> CapacityEstimate {
    let v = params.mean_snr().log2() - 2.0 * LOG2_E * EULER_GAMMA - params.rho().ln_1p() / LN_2;
    CapacityEstimate::asymptotic(v, Method::AsymptoticHigh)
}

/// `log2 γ̄ᴵ - 2 log2(e) γ_e`, independent of the correlation.
pub fn capacity_high_snr_budget(snr_i_linear: f64) -> Result<CapacityEstimate> {
    positive("capacity_high_snr_budget", snr_i_linear)?;
    Ok(CapacityEstimate::asymptotic(
        snr_i_linear.log2() - 2.0 * LOG2_E * EULER_GAMMA,
        Method::AsymptoticHigh,
    ))
}

/// High-SNR asymptote for an operating point in either parameterisation.
pub fn capacity_high_snr_for(param: &Parameterization) -> Result<CapacityEstimate> {
    match param.mode {
        Mode::FixedReceiverSnr => Ok(capacity_high_snr(&param.channel()?)),
        Mode::FixedPowerBudget => capacity_high_snr_budget(param.budget_snr()),
    }
}

/// First-moment approximation `log2(e) E{γ} = log2(e) γ̄ᴵ (1 + rho)`.
pub fn capacity_low_snr(param: &Parameterization) -> CapacityEstimate {
    CapacityEstimate::asymptotic(LOG2_E * param.receiver_mean_snr(), Method::AsymptoticLow)
}

pub fn capacity_awgn(snr_linear: f64) -> Result<CapacityEstimate> {
    positive("capacity_awgn", snr_linear)?;
    let v = snr_linear.ln_1p() / LN_2;
    Ok(CapacityEstimate::exact(
        v,
        Method::AwgnReference,
        v * f64::EPSILON,
    ))
}

/// Single-link Rayleigh capacity `log2(e) e^(1/γ̄) E1(1/γ̄)`.
pub fn capacity_rayleigh(snr_linear: f64) -> Result<CapacityEstimate> {
    positive("capacity_rayleigh", snr_linear)?;
    let v = LOG2_E * exp_integral_e1_scaled(1.0 / snr_linear)?;
    Ok(CapacityEstimate::exact(
        v,
        Method::RayleighReference,
        v * 1e-14,
    ))
}

fn positive(op: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("snr = {x}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverPoint {
    pub snr_db: f64,
    pub quadrature: f64,
    pub asymptote: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverReport {
    pub rho: f64,
    pub points: Vec<CrossoverPoint>,
    /// Gap strictly decreasing across all grid points at or above 20 dB.
    pub monotone_above_20db: bool,
}

/// Gap between quadrature and the high-SNR asymptote across a receiver-SNR
/// grid (dB) at fixed `rho`.
pub fn asymptote_crossover_check(
    rho: f64,
    grid_db: &[f64],
    policy: &AccuracyPolicy,
) -> Result<CrossoverReport> {
    let mut points = Vec::with_capacity(grid_db.len());
    for &snr_db in grid_db {
        let params = ChannelParams::new(db_to_linear(snr_db), rho)?;
        let quadrature = capacity_quadrature(&params, policy)?.value;
        let asymptote = capacity_high_snr(&params).value;
        points.push(CrossoverPoint {
            snr_db,
            quadrature,
            asymptote,
            gap: (quadrature - asymptote).abs(),
        });
    }
    let high: Vec<&CrossoverPoint> = points.iter().filter(|p| p.snr_db >= 20.0).collect();
    let monotone_above_20db = high.windows(2).all(|w| w[1].gap < w[0].gap);
    Ok(CrossoverReport {
        rho,
        points,
        monotone_above_20db,
    })
}
