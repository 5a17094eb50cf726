//! Link budget, the correlated Rayleigh product-SNR law and its moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_half_line, tanh_sinh, QuadResult};
use crate::special::{
    bessel_i0_scaled, bessel_k0_scaled, hyp2f1_sym, ln_gamma, AccuracyPolicy, EULER_GAMMA,
};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn check_rho(rho: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::domain(
            "channel",
            format!("rho = {rho} outside [0, 1]"),
        ))
    }
}

/// Transmit power, aggregate loss and receiver noise of the backscatter link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    transmit_power: f64,
    aggregate_loss: f64,
    noise_power: f64,
}

impl LinkBudget {
    /// Powers in watts; `aggregate_loss` is a linear gain in `(0, 1]`.
    pub fn new(transmit_power: f64, aggregate_loss: f64, noise_power: f64) -> Result<Self> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(transmit_power) || !pos(noise_power) || !pos(aggregate_loss) || aggregate_loss > 1.0
        {
            return Err(Error::domain(
                "LinkBudget",
                format!("P_T = {transmit_power}, L_t = {aggregate_loss}, N_0 = {noise_power}"),
            ));
        }
        Ok(Self {
            transmit_power,
            aggregate_loss,
            noise_power,
        })
    }

    /// Noise referred to the transmitter output, `N_0 / L_t`.
    pub fn equivalent_noise(&self) -> f64 {
        self.noise_power / self.aggregate_loss
    }
}

/// Transmit-referenced SNR `P_T L_t / N_0`, the receiver mean SNR in the
/// absence of correlation.
pub fn budget_to_snr(budget: &LinkBudget) -> f64 {
    budget.transmit_power * budget.aggregate_loss / budget.noise_power
}

/// Correlated product channel: receiver mean SNR and power correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    mean_snr: f64,
    rho: f64,
}

/// Constants of the density `C1 I0(b sqrt(γ)) K0(a sqrt(γ))` (capacity in bits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
}

impl ChannelParams {
    pub fn new(mean_snr: f64, rho: f64) -> Result<Self> {
        if !(mean_snr.is_finite() && mean_snr > 0.0) {
            return Err(Error::domain(
                "ChannelParams",
                format!("mean SNR {mean_snr}"),
            ));
        }
        check_rho(rho)?;
        Ok(Self { mean_snr, rho })
    }

    /// `E{γ}` at the receiver (linear).
    pub fn mean_snr(&self) -> f64 {
        self.mean_snr
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Whether the closed-form density (and everything built on it) applies.
    pub fn is_analytic(&self) -> bool {
        self.rho < 1.0
    }

    pub fn kernel(&self) -> Result<KernelConstants> {
        if !self.is_analytic() {
            return Err(Error::Unsupported(
                "rho = 1 has no density; use Monte Carlo or the asymptotes".into(),
            ));
        }
        let rho = self.rho;
        let a = 2.0 / (1.0 - rho) * ((1.0 + rho) / self.mean_snr).sqrt();
        let b = a * rho.sqrt();
        let c1 = a * a * (1.0 - rho) / (2.0 * std::f64::consts::LN_2);
        Ok(KernelConstants { a, b, c1 })
    }

    /// Length scale `1 / (a - b)` of the density's exponential tail in `sqrt(γ)`.
    pub(crate) fn tail_scale(&self) -> Result<f64> {
        let k = self.kernel()?;
        Ok(1.0 / (k.a - k.b))
    }
}

pub fn params_from_receiver_snr(snr_db: f64, rho: f64) -> Result<ChannelParams> {
    ChannelParams::new(db_to_linear(snr_db), rho)
}

/// Channel seen at the receiver for a fixed transmit-referenced SNR: the
/// correlation raises the receiver mean by `1 + rho`.
pub fn params_from_power_budget(snr_i_db: f64, rho: f64) -> Result<ChannelParams> {
    check_rho(rho)?;
    ChannelParams::new(db_to_linear(snr_i_db) * (1.0 + rho), rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    FixedReceiverSnr,
    FixedPowerBudget,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::FixedReceiverSnr => "fixed_receiver_snr",
            Mode::FixedPowerBudget => "fixed_power_budget",
        }
    }
}

/// An operating point: the SNR value is `γ̄` in fixed-receiver mode and
/// `γ̄ᴵ` in fixed-budget mode (both linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameterization {
    pub mode: Mode,
    snr: f64,
    rho: f64,
}

impl Parameterization {
    pub fn new(mode: Mode, snr_linear: f64, rho: f64) -> Result<Self> {
        if !(snr_linear.is_finite() && snr_linear > 0.0) {
            return Err(Error::domain(
                "Parameterization",
                format!("snr = {snr_linear}"),
            ));
        }
        check_rho(rho)?;
        Ok(Self {
            mode,
            snr: snr_linear,
            rho,
        })
    }

    pub fn from_db(mode: Mode, snr_db: f64, rho: f64) -> Result<Self> {
        Self::new(mode, db_to_linear(snr_db), rho)
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Receiver mean SNR `γ̄`.
    pub fn receiver_mean_snr(&self) -> f64 {
        match self.mode {
            Mode::FixedReceiverSnr => self.snr,
            Mode::FixedPowerBudget => self.snr * (1.0 + self.rho),
        }
    }

    /// Transmit-referenced SNR `γ̄ᴵ = γ̄ / (1 + rho)`.
    pub fn budget_snr(&self) -> f64 {
        match self.mode {
            Mode::FixedReceiverSnr => self.snr / (1.0 + self.rho),
            Mode::FixedPowerBudget => self.snr,
        }
    }

    pub fn channel(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.receiver_mean_snr(), self.rho)
    }
}

/// Density of the instantaneous SNR at the reader.
pub fn pdf(params: &ChannelParams, gamma: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::domain("pdf", format!("gamma = {gamma}")));
    }
    let k = params.kernel()?;
    density_in_root(params, &k, gamma.sqrt())
}

// f_γ(t²) evaluated from the scaled Bessel pair
fn density_in_root(params: &ChannelParams, k: &KernelConstants, t: f64) -> Result<f64> {
    let rho = params.rho;
    let prefactor = 2.0 / params.mean_snr * (1.0 + rho) / (1.0 - rho);
    let i0e = bessel_i0_scaled(k.b * t)?;
    let k0e = bessel_k0_scaled(k.a * t)?;
    Ok(prefactor * i0e * k0e * ((k.b - k.a) * t).exp())
}

/// `∫_0^∞ g(γ) f_γ(γ) dγ`, integrated in `t = sqrt(γ)`.
///
/// `g` receives `t`, not `γ`, so callers can keep precision near the origin.
/// The tail is followed until its panels fall below `rel_tol / 1000` of the
/// running total.
pub fn integrate_against_pdf<G>(
    params: &ChannelParams,
    g: G,
    policy: &AccuracyPolicy,
) -> Result<QuadResult>
where
    G: Fn(f64) -> f64,
{
    let k = params.kernel()?;
    let scale = params.tail_scale()?;
    let integrand = |t: f64| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match density_in_root(params, &k, t) {
            Ok(d) => 2.0 * t * d * g(t),
            Err(_) => f64::NAN,
        }
    };
    integrate_half_line(
        integrand,
        scale.min(1.0),
        30.0 * scale,
        policy.rel_tol(),
        policy.max_quadrature_nodes(),
    )
}

/// `P(γ ≤ x)` by quadrature of the density.
pub fn cdf(params: &ChannelParams, gamma: f64, policy: &AccuracyPolicy) -> Result<f64> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::domain("cdf", format!("gamma = {gamma}")));
    }
    let k = params.kernel()?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    if gamma.is_infinite() {
        return Ok(1.0);
    }
    let limit = gamma.sqrt();
    let scale = params.tail_scale()?;
    let integrand = |t: f64| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        density_in_root(params, &k, t).map_or(f64::NAN, |d| 2.0 * t * d)
    };
    let mut lo = 0.0;
    let mut hi = scale.min(1.0).min(limit);
    let mut total = 0.0;
    loop {
        let r = tanh_sinh(
            integrand,
            lo,
            hi,
            policy.rel_tol() * 0.1,
            policy.abs_tol() * 1e-3,
        )?;
        total += r.value;
        if hi >= limit {
            return Ok(total.min(1.0));
        }
        lo = hi;
        hi = (hi * 2.0).min(limit);
        // past the tail the remaining mass is negligible
        if lo > 60.0 * scale {
            return Ok(total.min(1.0));
        }
    }
}

/// CDF at every point of an ascending sample, accumulated gap by gap.
pub fn cdf_sorted(
    params: &ChannelParams,
    sorted: &[f64],
    policy: &AccuracyPolicy,
) -> Result<Vec<f64>> {
    let k = params.kernel()?;
    let integrand = |t: f64| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        density_in_root(params, &k, t).map_or(f64::NAN, |d| 2.0 * t * d)
    };
    let mut out = Vec::with_capacity(sorted.len());
    let mut acc = 0.0;
    let mut comp = 0.0;
    let mut prev = 0.0;
    for &x in sorted {
        if x.is_nan() || x < prev * prev {
            return Err(Error::domain(
                "cdf_sorted",
                "sample must be ascending and non-negative",
            ));
        }
        let t = x.sqrt();
        if t > prev {
            let r = tanh_sinh(integrand, prev, t, policy.rel_tol() * 0.1, 1e-17)?;
            // Neumaier summation keeps 1e5 increments accurate
            let s = acc + r.value;
            if acc.abs() >= r.value.abs() {
                comp += (acc - s) + r.value;
            } else {
                comp += (r.value - s) + acc;
            }
            acc = s;
            prev = t;
        }
        out.push((acc + comp).min(1.0));
    }
    Ok(out)
}

/// Normalised moment `E{γ^k} / γ̄^k = (1+ρ)^(-k) Γ(1+k)² ₂F₁(-k,-k;1;ρ)`,
/// for real `k > -1/2`.
pub fn normalized_moment(rho: f64, k: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(k.is_finite() && k > -0.5) {
        return Err(Error::domain("moment", format!("k = {k}")));
    }
    let log_gamma_sq = 2.0 * ln_gamma(1.0 + k)?;
    Ok((log_gamma_sq - k * (1.0 + rho).ln()).exp() * hyp2f1_sym(k, rho)?)
}

/// `E{γ^k}` for real `k > -1/2`; valid at `rho = 1` as well.
pub fn moment(params: &ChannelParams, k: f64) -> Result<f64> {
    Ok(params.mean_snr.powf(k) * normalized_moment(params.rho, k)?)
}

/// `dM(k)/dk` at `k = 0`, equal to `-2 γ_e - ln(1 + ρ)`.
pub fn moment_log_derivative(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(-2.0 * EULER_GAMMA - rho.ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> AccuracyPolicy {
        AccuracyPolicy::default()
    }

    #[test]
    fn conversions() {
        let p = params_from_receiver_snr(0.0, 0.0).unwrap();
        let k = p.kernel().unwrap();
        assert_eq!(p.mean_snr(), 1.0);
        assert!((k.a - 2.0).abs() < 1e-15);
        assert_eq!(k.b, 0.0);
        assert!((k.c1 - 2.0 / std::f64::consts::LN_2).abs() < 1e-14);

        let k = params_from_receiver_snr(0.0, 0.5)
            .unwrap()
            .kernel()
            .unwrap();
        assert!((k.a - 4.898_979_485_566_356).abs() < 1e-14);
        assert!((k.b - 3.464_101_615_137_754_6).abs() < 1e-14);

        let p = params_from_receiver_snr(10.0, 1.0).unwrap();
        assert!(!p.is_analytic());
        assert!(matches!(p.kernel(), Err(Error::Unsupported(_))));
        assert!(params_from_receiver_snr(0.0, 1.1).is_err());
        assert!(params_from_receiver_snr(0.0, -0.1).is_err());
    }

    #[test]
    fn power_budget_raises_mean() {
        assert!((params_from_power_budget(10.0, 1.0).unwrap().mean_snr() - 20.0).abs() < 1e-12);
        assert_eq!(
            params_from_power_budget(0.0, 0.0).unwrap(),
            params_from_receiver_snr(0.0, 0.0).unwrap()
        );
        assert!((params_from_power_budget(-20.0, 0.5).unwrap().mean_snr() - 0.015).abs() < 1e-15);
        for &x in &[-30.0, -7.3, 0.0, 12.5, 40.0] {
            for &rho in &[0.0, 0.3, 1.0] {
                let b = params_from_power_budget(x, rho).unwrap().mean_snr();
                let r = params_from_receiver_snr(x, rho).unwrap().mean_snr();
                assert_eq!(b, r * (1.0 + rho));
            }
        }
    }

    #[test]
    fn budget_snr_examples() {
        for (pt, lt, n0) in [(1.0, 1.0, 1e-3), (1.0, 1e-6, 1e-9), (2.0, 0.5, 1e-3)] {
            let b = LinkBudget::new(pt, lt, n0).unwrap();
            assert!((budget_to_snr(&b) - 1000.0).abs() < 1e-9);
            assert!((budget_to_snr(&b) - pt / b.equivalent_noise()).abs() < 1e-9);
        }
        assert!(LinkBudget::new(1.0, 1.5, 1.0).is_err());
        assert!(LinkBudget::new(0.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn pdf_reference_points() {
        let p = ChannelParams::new(1.0, 0.0).unwrap();
        assert!((pdf(&p, 1.0).unwrap() - 0.227_787_745_499_066_87).abs() < 1e-14);
        // 6 I0(sqrt 12) K0(sqrt 24), extended-precision reference
        let p = ChannelParams::new(1.0, 0.5).unwrap();
        assert!((pdf(&p, 1.0).unwrap() / 0.177_123_000_438_146_46 - 1.0).abs() < 1e-13);
        assert!(pdf(&p, 0.0).is_err());
        assert!(pdf(&ChannelParams::new(1.0, 1.0).unwrap(), 1.0).is_err());
    }

    #[test]
    fn pdf_reduces_to_double_rayleigh() {
        for &gbar in &[0.1, 1.0, 37.0] {
            let p = ChannelParams::new(gbar, 0.0).unwrap();
            for &g in &[1e-6, 0.01, 1.0, 10.0, 300.0] {
                let x = 2.0 * (g / gbar).sqrt();
                let want = 2.0 / gbar * crate::special::bessel_k0_scaled(x).unwrap() * (-x).exp();
                assert!((pdf(&p, g).unwrap() / want - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn cdf_examples() {
        let p = ChannelParams::new(1.0, 0.0).unwrap();
        assert_eq!(cdf(&p, 0.0, &pol()).unwrap(), 0.0);
        assert_eq!(cdf(&p, f64::INFINITY, &pol()).unwrap(), 1.0);
        // double Rayleigh: F(x) = 1 - 2 sqrt(x) K1(2 sqrt(x)); 1 - 2 K1(2) at x = 1
        let at_mean = cdf(&p, 1.0, &pol()).unwrap();
        assert!(
            (at_mean - 0.720_268_236_366_955_1).abs() < 1e-9,
            "{at_mean}"
        );
        assert!(at_mean > 0.5 && at_mean < 1.0);
        assert!((cdf(&p, 1e6, &pol()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cdf_sorted_matches_pointwise() {
        let p = ChannelParams::new(2.0, 0.7).unwrap();
        let xs = [1e-5, 0.01, 0.3, 0.31, 2.0, 7.5, 40.0];
        let acc = cdf_sorted(&p, &xs, &pol()).unwrap();
        for (x, c) in xs.iter().zip(&acc) {
            assert!((cdf(&p, *x, &pol()).unwrap() - c).abs() < 1e-11);
        }
        for w in acc.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(cdf_sorted(&p, &[2.0, 1.0], &pol()).is_err());
    }

    #[test]
    fn moment_examples() {
        let p = ChannelParams::new(3.0, 0.4).unwrap();
        assert_eq!(moment(&p, 0.0).unwrap(), 1.0);
        assert!((moment(&p, 1.0).unwrap() - 3.0).abs() < 1e-14);
        let p0 = ChannelParams::new(2.0, 0.0).unwrap();
        assert!((moment(&p0, 2.0).unwrap() - 16.0).abs() < 1e-12);
        let p = ChannelParams::new(1.0, 0.5).unwrap();
        assert!((moment(&p, 2.0).unwrap() - 4.0 * 3.25 / 2.25).abs() < 1e-13);
        assert!(moment(&p, -0.5).is_err());
        // rho = 1: E{g^4}/E{g^2}^2 = 24/4
        let p1 = ChannelParams::new(1.0, 1.0).unwrap();
        assert!((moment(&p1, 2.0).unwrap() - 6.0).abs() < 1e-13);
    }

    #[test]
    fn fractional_and_negative_moments_match_quadrature() {
        for &(rho, k) in &[(0.0, 0.5), (0.5, -0.25), (0.8, 1.5), (0.3, -0.4)] {
            let p = ChannelParams::new(2.0, rho).unwrap();
            let q = integrate_against_pdf(&p, |t| t.powf(2.0 * k), &pol())
                .unwrap()
                .value;
            let m = moment(&p, k).unwrap();
            assert!((m / q - 1.0).abs() < 1e-8, "rho={rho} k={k}: {m} vs {q}");
        }
    }

    #[test]
    fn log_derivative_values() {
        assert!((moment_log_derivative(0.0).unwrap() + 1.154_431_329_803_065_8).abs() < 1e-15);
        assert!((moment_log_derivative(1.0).unwrap() + 1.847_578_510_363_011).abs() < 1e-14);
        assert!((moment_log_derivative(0.5).unwrap() + 1.559_896_437_911_230_4).abs() < 1e-14);
    }

    #[test]
    fn normalization_and_mean_small_grid() {
        for &gbar in &[0.1, 1.0, 100.0] {
            for &rho in &[0.0, 0.5, 0.9] {
                let p = ChannelParams::new(gbar, rho).unwrap();
                let mass = integrate_against_pdf(&p, |_| 1.0, &pol()).unwrap().value;
                assert!(
                    (mass - 1.0).abs() < 1e-8,
                    "gbar={gbar} rho={rho} mass={mass}"
                );
                let mean = integrate_against_pdf(&p, |t| t * t, &pol()).unwrap().value;
                assert!((mean / gbar - 1.0).abs() < 1e-7);
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(32))]

        #[test]
        fn cdf_is_monotone_and_bounded(gbar in 0.01f64..100.0, rho in 0.0f64..0.99, x in 1e-4f64..10.0) {
            let p = ChannelParams::new(gbar, rho).unwrap();
            let xs = [x * gbar, 2.0 * x * gbar];
            let f = cdf_sorted(&p, &xs, &pol()).unwrap();
            proptest::prop_assert!(0.0 <= f[0] && f[0] < f[1] && f[1] <= 1.0);
        }
    }
}
