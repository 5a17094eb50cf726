//! Seedable Monte Carlo simulation of correlated Rayleigh power pairs.
//!
//! Each batch draws from its own ChaCha8 stream, selected by the batch index
//! under a key derived from the seed, so results do not depend on how
//! batches are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{CapacityEstimate, Diagnostics, ErrorBound, Method};
use crate::channel::{cdf_sorted, Mode, Parameterization};
use crate::error::{Error, Result};
use crate::special::AccuracyPolicy;

pub const ACCEPTANCE_SAMPLES: u64 = 10_000_000;
pub const SMOKE_SAMPLES: u64 = 100_000;
pub const DEFAULT_BATCHES: u32 = 100;
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Asymptotic Kolmogorov critical constant at the 1% level.
pub const KS_CRITICAL_1PCT: f64 = 1.6276;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub n_batches: u32,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: SMOKE_SAMPLES,
            seed: DEFAULT_SEED,
            n_batches: DEFAULT_BATCHES,
        }
    }
}

impl McConfig {
    pub fn new(n_samples: u64, seed: u64, n_batches: u32) -> Result<Self> {
        let c = Self {
            n_samples,
            seed,
            n_batches,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_batches == 0 {
            return Err(Error::Config("n_batches must be positive".into()));
        }
        if self.n_samples < self.n_batches as u64 * 100 {
            return Err(Error::Config(format!(
                "n_samples = {} is below 100 per batch for {} batches",
                self.n_samples, self.n_batches
            )));
        }
        Ok(())
    }

    fn batch_len(&self, batch: u32) -> u64 {
        let b = self.n_batches as u64;
        self.n_samples / b + u64::from((batch as u64) < self.n_samples % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingPairSample {
    pub g_f: f64,
    pub g_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McResult {
    pub estimate: f64,
    /// Standard error from the spread of batch means.
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub n_batches: u32,
    pub batch_estimates: Vec<f64>,
}

impl McResult {
    pub fn into_capacity_estimate(self) -> CapacityEstimate {
        CapacityEstimate {
            value: self.estimate,
            method: Method::MonteCarlo,
            error_bound: ErrorBound::Estimate(self.std_error),
            diagnostics: Diagnostics::MonteCarlo {
                samples: self.n_samples,
                batches: self.n_batches,
                seed: self.seed,
            },
        }
    }

    /// True when `x` lies within `k` standard errors of the estimate.
    pub fn brackets(&self, x: f64, k: f64) -> bool {
        (self.estimate - x).abs() <= k * self.std_error
    }
}

#[derive(Debug, Clone, Copy)]
struct PairSampler {
    mix: f64,
    fresh: f64,
}

impl PairSampler {
    fn new(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::domain("sample_pair", format!("rho = {rho}")));
        }
        Ok(Self {
            mix: rho.sqrt(),
            fresh: (1.0 - rho).sqrt(),
        })
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> FadingPairSample {
        // unit-variance circular Gaussians: each component has variance 1/2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (u1r, u1i): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let (u2r, u2i): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let (fr, fi) = (s * u1r, s * u1i);
        let br = self.mix * fr + self.fresh * s * u2r;
        let bi = self.mix * fi + self.fresh * s * u2i;
        FadingPairSample {
            g_f: fr * fr + fi * fi,
            g_b: br * br + bi * bi,
        }
    }
}

/// One draw of `(|h_f|², |h_b|²)` with `h_b = √ρ h_f + √(1-ρ) u`.
pub fn sample_pair<R: Rng + ?Sized>(rng: &mut R, rho: f64) -> Result<FadingPairSample> {
    Ok(PairSampler::new(rho)?.draw(rng))
}

fn batch_rng(seed: u64, batch: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Batch-means estimate of `E{f(g_f, g_b)}` under power correlation `rho`.
pub fn estimate_expectation<F>(rho: f64, config: &McConfig, f: F) -> Result<McResult>
where
    F: Fn(FadingPairSample) -> f64 + Sync,
{
    config.validate()?;
    let sampler = PairSampler::new(rho)?;
    let sums: Vec<f64> = (0..config.n_batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = batch_rng(config.seed, batch);
            let mut acc = Neumaier::default();
            for _ in 0..config.batch_len(batch) {
                acc.add(f(sampler.draw(&mut rng)));
            }
            acc.total()
        })
        .collect();

    let mut total = Neumaier::default();
    for &s in &sums {
        total.add(s);
    }
    let estimate = total.total() / config.n_samples as f64;
    let batch_estimates: Vec<f64> = sums
        .iter()
        .enumerate()
        .map(|(i, s)| s / config.batch_len(i as u32) as f64)
        .collect();
    let b = batch_estimates.len() as f64;
    let std_error = if batch_estimates.len() < 2 {
        0.0
    } else {
        let mut ss = Neumaier::default();
        for &m in &batch_estimates {
            ss.add((m - estimate).powi(2));
        }
        (ss.total() / (b - 1.0) / b).sqrt()
    };
    Ok(McResult {
        estimate,
        std_error,
        n_samples: config.n_samples,
        seed: config.seed,
        n_batches: config.n_batches,
        batch_estimates,
    })
}

/// Scale from `g_f g_b` to the instantaneous SNR: `γ̄ / (1 + rho)` in
/// fixed-receiver mode (so the mean SNR is exactly `γ̄`), `γ̄ᴵ` otherwise.
fn snr_scale(param: &Parameterization) -> f64 {
    match param.mode {
        Mode::FixedReceiverSnr => param.snr() / (1.0 + param.rho()),
        Mode::FixedPowerBudget => param.snr(),
    }
}

/// Mean of `log2(1 + γ)`.
pub fn estimate_capacity(param: &Parameterization, config: &McConfig) -> Result<McResult> {
    let scale = snr_scale(param);
    estimate_expectation(param.rho(), config, |p| {
        (scale * p.g_f * p.g_b).ln_1p() * std::f64::consts::LOG2_E
    })
}

/// Mean of `γ^k` for `k` in `1..=4`.
pub fn estimate_moment(param: &Parameterization, k: u32, config: &McConfig) -> Result<McResult> {
    if !(1..=4).contains(&k) {
        return Err(Error::domain(
            "estimate_moment",
            format!("k = {k}, expected 1..=4"),
        ));
    }
    let scale = snr_scale(param);
    estimate_expectation(param.rho(), config, |p| {
        (scale * p.g_f * p.g_b).powi(k as i32)
    })
}

/// Draws `config.n_samples` pairs, batch by batch in index order.
pub fn sample_pairs(rho: f64, config: &McConfig) -> Result<Vec<FadingPairSample>> {
    config.validate()?;
    let sampler = PairSampler::new(rho)?;
    let chunks: Vec<Vec<FadingPairSample>> = (0..config.n_batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = batch_rng(config.seed, batch);
            (0..config.batch_len(batch))
                .map(|_| sampler.draw(&mut rng))
                .collect()
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Instantaneous SNR samples for an operating point.
pub fn sample_snr(param: &Parameterization, config: &McConfig) -> Result<Vec<f64>> {
    let scale = snr_scale(param);
    Ok(sample_pairs(param.rho(), config)?
        .into_iter()
        .map(|p| scale * p.g_f * p.g_b)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical: f64,
    pub n: usize,
    pub passed: bool,
}

impl KsResult {
    fn new(statistic: f64, n: usize) -> Self {
        let critical = KS_CRITICAL_1PCT / (n as f64).sqrt();
        Self {
            statistic,
            critical,
            n,
            passed: statistic < critical,
        }
    }
}

/// Two-sided KS statistic given the model CDF at each point of an ascending
/// sample.
pub fn ks_statistic(cdf_at_sorted: &[f64]) -> f64 {
    let n = cdf_at_sorted.len() as f64;
    cdf_at_sorted
        .iter()
        .enumerate()
        .map(|(i, &f)| (f - i as f64 / n).max((i + 1) as f64 / n - f))
        .fold(0.0, f64::max)
}

/// KS test of an arbitrary sample against the product-SNR law of `param`.
pub fn ks_test_samples(
    param: &Parameterization,
    samples: &[f64],
    policy: &AccuracyPolicy,
) -> Result<KsResult> {
    if param.rho() >= 1.0 {
        return Err(Error::Unsupported(
            "KS test needs the analytic CDF, which requires rho < 1".into(),
        ));
    }
    if samples.is_empty() {
        return Err(Error::Config("KS test needs at least one sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cdf = cdf_sorted(&param.channel()?, &sorted, policy)?;
    Ok(KsResult::new(ks_statistic(&cdf), sorted.len()))
}

/// KS test of simulated SNR samples against the analytic CDF at 1%.
pub fn ks_test(
    param: &Parameterization,
    config: &McConfig,
    policy: &AccuracyPolicy,
) -> Result<KsResult> {
    if param.rho() >= 1.0 {
        return Err(Error::Unsupported(
            "KS test needs the analytic CDF, which requires rho < 1".into(),
        ));
    }
    let samples = sample_snr(param, config)?;
    ks_test_samples(param, &samples, policy)
}

/// KS tests of `g_f` and `g_b` against the unit-mean exponential law.
pub fn ks_test_marginals(rho: f64, config: &McConfig) -> Result<(KsResult, KsResult)> {
    let pairs = sample_pairs(rho, config)?;
    let test = |mut xs: Vec<f64>| {
        xs.sort_by(f64::total_cmp);
        let cdf: Vec<f64> = xs.iter().map(|&x| -(-x).exp_m1()).collect();
        KsResult::new(ks_statistic(&cdf), xs.len())
    };
    Ok((
        test(pairs.iter().map(|p| p.g_f).collect()),
        test(pairs.iter().map(|p| p.g_b).collect()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::capacity_quadrature;
    use crate::channel::normalized_moment;

    fn cfg(n: u64) -> McConfig {
        McConfig::new(n, 7, 100).unwrap()
    }

    fn recv(snr: f64, rho: f64) -> Parameterization {
        Parameterization::new(Mode::FixedReceiverSnr, snr, rho).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::new(10_000, 1, 100).is_ok());
        assert!(McConfig::new(9_999, 1, 100).is_err());
        assert!(McConfig::new(1000, 1, 0).is_err());
        let c = McConfig::new(10_050, 1, 100).unwrap();
        let total: u64 = (0..100).map(|b| c.batch_len(b)).sum();
        assert_eq!(total, 10_050);
    }

    #[test]
    fn full_correlation_gives_identical_gains() {
        let mut rng = batch_rng(3, 0);
        for _ in 0..1000 {
            let p = sample_pair(&mut rng, 1.0).unwrap();
            assert_eq!(p.g_f, p.g_b);
        }
        assert!(sample_pair(&mut rng, 1.5).is_err());
        assert!(sample_pair(&mut rng, -0.1).is_err());
    }

    #[test]
    fn independent_pairs_have_zero_covariance() {
        let r =
            estimate_expectation(0.0, &cfg(1_000_000), |p| (p.g_f - 1.0) * (p.g_b - 1.0)).unwrap();
        assert!(r.brackets(0.0, 3.0), "{} ± {}", r.estimate, r.std_error);
    }

    #[test]
    fn product_mean_is_one_plus_rho() {
        let r = estimate_expectation(0.5, &cfg(1_000_000), |p| p.g_f * p.g_b).unwrap();
        assert!(r.brackets(1.5, 3.0), "{} ± {}", r.estimate, r.std_error);
    }

    #[test]
    fn power_correlation_is_calibrated() {
        // unit means and variances, so the correlation is E{(g_f-1)(g_b-1)}
        for &rho in &[0.0, 0.25, 0.5, 0.75, 0.9, 1.0] {
            let r = estimate_expectation(rho, &cfg(1_000_000), |p| (p.g_f - 1.0) * (p.g_b - 1.0))
                .unwrap();
            assert!(
                r.brackets(rho, 3.0),
                "rho={rho}: {} ± {}",
                r.estimate,
                r.std_error
            );
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let p = recv(10.0, 0.6);
        let c = cfg(200_000);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| estimate_capacity(&p, &c)).unwrap();
        let b = four.install(|| estimate_capacity(&p, &c)).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a, b);
        let other = estimate_capacity(&p, &McConfig { seed: 8, ..c }).unwrap();
        assert_ne!(a.estimate, other.estimate);
    }

    #[test]
    fn receiver_mode_mean_snr_is_exact() {
        for &rho in &[0.0, 0.5, 1.0] {
            let r = estimate_moment(&recv(3.0, rho), 1, &cfg(1_000_000)).unwrap();
            assert!(
                r.brackets(3.0, 3.0),
                "rho={rho}: {} ± {}",
                r.estimate,
                r.std_error
            );
        }
        let budget = Parameterization::new(Mode::FixedPowerBudget, 3.0, 0.5).unwrap();
        let r = estimate_moment(&budget, 1, &cfg(1_000_000)).unwrap();
        assert!(r.brackets(4.5, 3.0));
    }

    #[test]
    fn second_moments() {
        let want = 4.0 * 3.25 / 2.25;
        assert!((normalized_moment(0.5, 2.0).unwrap() - want).abs() < 1e-12);
        let r = estimate_moment(&recv(1.0, 0.5), 2, &cfg(1_000_000)).unwrap();
        assert!(r.brackets(want, 3.0), "{} ± {}", r.estimate, r.std_error);
        let r = estimate_moment(&recv(1.0, 1.0), 2, &cfg(1_000_000)).unwrap();
        assert!(r.brackets(6.0, 3.0), "{} ± {}", r.estimate, r.std_error);
        assert!(estimate_moment(&recv(1.0, 0.5), 5, &cfg(10_000)).is_err());
    }

    #[test]
    fn capacity_agrees_with_quadrature() {
        let p = recv(1000.0, 0.0);
        let r = estimate_capacity(&p, &cfg(1_000_000)).unwrap();
        let q = capacity_quadrature(&p.channel().unwrap(), &AccuracyPolicy::default())
            .unwrap()
            .value;
        assert!(
            r.brackets(q, 3.0),
            "{} ± {} vs {q}",
            r.estimate,
            r.std_error
        );
        let e = r.into_capacity_estimate();
        assert_eq!(e.method, Method::MonteCarlo);
        assert_eq!(
            e.diagnostics.to_string(),
            "samples=1000000;batches=100;seed=7"
        );
    }

    #[test]
    fn ks_accepts_correct_law() {
        let pol = AccuracyPolicy::default();
        for &rho in &[0.0, 0.5] {
            let r = ks_test(&recv(1.0, rho), &cfg(100_000), &pol).unwrap();
            assert!(r.passed, "rho={rho}: D={} crit={}", r.statistic, r.critical);
            assert!((r.critical - 0.005_147).abs() < 1e-5);
        }
        assert!(matches!(
            ks_test(&recv(1.0, 1.0), &cfg(10_000), &pol),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn ks_rejects_doubled_snr() {
        let p = recv(1.0, 0.5);
        let doubled: Vec<f64> = sample_snr(&p, &cfg(100_000))
            .unwrap()
            .iter()
            .map(|g| 2.0 * g)
            .collect();
        let r = ks_test_samples(&p, &doubled, &AccuracyPolicy::default()).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn marginals_are_unit_exponential() {
        for &rho in &[0.0, 0.5, 0.9] {
            let (f, b) = ks_test_marginals(rho, &cfg(100_000)).unwrap();
            assert!(
                f.passed && b.passed,
                "rho={rho}: {} {}",
                f.statistic,
                b.statistic
            );
        }
    }

    #[test]
    fn ks_statistic_of_perfect_grid() {
        let n = 10;
        let cdf: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_statistic(&cdf) - 0.05).abs() < 1e-15);
    }
}
