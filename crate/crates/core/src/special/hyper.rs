//! Gauss hypergeometric values `2F1(-k, -k; 1; rho)` and the mixed parameter
//! derivative used by the high-SNR moment expansion.

use crate::error::{Error, Result};
use crate::special::gamma::{digamma, ln_gamma};

fn check_rho(op: &'static str, rho: f64, closed: bool) -> Result<()> {
    let ok = rho >= 0.0 && if closed { rho <= 1.0 } else { rho < 1.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::domain(op, format!("rho = {rho}")))
    }
}

/// Terminating sum `2F1(-k, -k; 1; rho) = Σ_{m=0}^{k} C(k,m)^2 rho^m`.
pub fn hyp2f1_neg_int(k: i64, rho: f64) -> Result<f64> {
    if k < 0 {
        return Err(Error::domain("hyp2f1_neg_int", format!("k = {k}")));
    }
    check_rho("hyp2f1_neg_int", rho, true)?;
    // term ratio: [(-k)_{m+1} / (-k)_m]^2 / (m+1)^2 * rho = ((k-m)/(m+1))^2 rho
    let kf = k as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 0..k {
        let r = (kf - m as f64) / (m as f64 + 1.0);
        term *= r * r * rho;
        sum += term;
    }
    Ok(sum)
}

/// `2F1(-k, -k; 1; rho)` for real `k > -1/2`.
///
/// Integer `k` uses the terminating sum. Otherwise the convergent series is
/// summed for `rho < 1`, and Gauss' theorem `Γ(1 + 2k) / Γ(1 + k)^2` is used
/// at `rho = 1`.
pub fn hyp2f1_sym(k: f64, rho: f64) -> Result<f64> {
    if !k.is_finite() || k <= -0.5 {
        return Err(Error::domain("hyp2f1_sym", format!("k = {k}")));
    }
    check_rho("hyp2f1_sym", rho, true)?;
    if k == k.round() && k < 1e6 {
        return hyp2f1_neg_int(k as i64, rho);
    }
    if rho == 1.0 {
        return Ok((ln_gamma(1.0 + 2.0 * k)? - 2.0 * ln_gamma(1.0 + k)?).exp());
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 0..1_000_000u32 {
        let mf = m as f64;
        let r = (mf - k) / (mf + 1.0);
        term *= r * r * rho;
        sum += term;
        if term.abs() <= 1e-16 * sum.abs() && mf > k {
            return Ok(sum);
        }
    }
    Err(Error::convergence(
        "hyp2f1_sym",
        format!("k = {k}, rho = {rho}"),
    ))
}

/// Mixed derivative `∂²/∂a∂b 2F1(-a, -b; 1; rho)` at non-negative integers,
/// from the terminating form `Σ_{m ≤ min(a,b)} a!/(a-m)! b!/(b-m)! rho^m/(m!)^2`
/// with the gamma ratios differentiated term by term.
pub fn hyp2f1_cross_derivative(a: i64, b: i64, rho: f64) -> Result<f64> {
    if a < 0 || b < 0 {
        return Err(Error::domain(
            "hyp2f1_cross_derivative",
            format!("a = {a}, b = {b}"),
        ));
    }
    check_rho("hyp2f1_cross_derivative", rho, false)?;
    let weight = |n: i64, m: i64| -> Result<f64> {
        let n1 = (n + 1) as f64;
        let nm1 = (n - m + 1) as f64;
        let ratio = (ln_gamma(n1)? - ln_gamma(nm1)?).exp();
        Ok(ratio * (digamma(n1)? - digamma(nm1)?))
    };
    let mut sum = 0.0;
    let mut m_fact = 1.0;
    for m in 0..=a.min(b) {
        if m > 0 {
            m_fact *= m as f64;
        }
        let rho_m = if m == 0 { 1.0 } else { rho.powi(m as i32) };
        sum += weight(a, m)? * weight(b, m)? * rho_m / (m_fact * m_fact);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn small_cases() {
        assert_eq!(hyp2f1_neg_int(0, 0.7).unwrap(), 1.0);
        assert!((hyp2f1_neg_int(1, 0.3).unwrap() - 1.3).abs() < 1e-15);
        assert!((hyp2f1_neg_int(2, 0.5).unwrap() - 3.25).abs() < 1e-15);
    }

    #[test]
    fn vandermonde_at_rho_one() {
        for k in 0..=10u64 {
            let exact = binomial(2 * k, k);
            let got = hyp2f1_neg_int(k as i64, 1.0).unwrap();
            assert_eq!(got.round() as u64, exact);
            assert!((got - exact as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn generic_series_oracle_agrees() {
        // direct Pochhammer sum with no shortcuts
        let oracle = |k: i64, rho: f64| -> f64 {
            let mut total = 0.0;
            for m in 0..=k {
                let mut poch = 1.0;
                let mut fact = 1.0;
                for j in 0..m {
                    poch *= (-k + j) as f64;
                    fact *= (j + 1) as f64;
                }
                total += poch * poch / (fact * fact) * rho.powi(m as i32);
            }
            total
        };
        for k in 0..12 {
            for &rho in &[0.0, 0.1, 0.5, 0.9, 1.0] {
                let got = hyp2f1_neg_int(k, rho).unwrap();
                assert!((got - oracle(k, rho)).abs() < 1e-12 * got);
                assert!(got >= 1.0);
            }
        }
    }

    #[test]
    fn non_integer_k_is_continuous() {
        for &rho in &[0.0, 0.4, 0.9, 1.0] {
            let at = hyp2f1_sym(2.0, rho).unwrap();
            let near = hyp2f1_sym(2.0 + 1e-7, rho).unwrap();
            assert!((at - near).abs() < 1e-5 * at, "rho={rho}");
        }
        // Gauss' theorem: Γ(2) / Γ(3/2)^2 = 4/π
        let g = hyp2f1_sym(0.5, 1.0).unwrap();
        assert!((g - 4.0 / std::f64::consts::PI).abs() < 1e-14);
        let below = hyp2f1_sym(0.5, 0.999).unwrap();
        assert!(below < g && g - below < 1e-2);
    }

    #[test]
    fn cross_derivative_examples() {
        assert_eq!(hyp2f1_cross_derivative(0, 0, 0.4).unwrap(), 0.0);
        assert!((hyp2f1_cross_derivative(1, 1, 0.5).unwrap() - 0.5).abs() < 1e-14);
        assert!((hyp2f1_cross_derivative(1, 2, 0.3).unwrap() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(hyp2f1_neg_int(-1, 0.5).is_err());
        assert!(hyp2f1_neg_int(2, 1.5).is_err());
        assert!(hyp2f1_neg_int(2, -0.1).is_err());
        assert!(hyp2f1_cross_derivative(-1, 0, 0.5).is_err());
        assert!(hyp2f1_cross_derivative(1, 1, 1.0).is_err());
        assert!(hyp2f1_sym(-0.5, 0.5).is_err());
    }
}
