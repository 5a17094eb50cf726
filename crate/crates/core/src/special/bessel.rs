//! Exponentially scaled modified Bessel functions of order zero.
//!
//! The scaled forms are the primitives; the capacity integrand combines them
//! as `i0e(b t) * k0e(a t) * exp((b - a) t)`, which stays finite where the raw
//! `I0` overflows and `K0` underflows.

use crate::error::{Error, Result};
use crate::special::EULER_GAMMA;

const I0_SERIES_LIMIT: f64 = 20.0;
const K0_SERIES_LIMIT: f64 = 2.0;

/// `exp(-x) * I0(x)` for `x >= 0`.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain("bessel_i0_scaled", format!("x = {x}")));
    }
    if x <= I0_SERIES_LIMIT {
        Ok(i0_series(x) * (-x).exp())
    } else {
        Ok(i0_asymptotic_scaled(x))
    }
}

/// `exp(x) * K0(x)` for `x > 0`.
pub fn bessel_k0_scaled(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("bessel_k0_scaled", format!("x = {x}")));
    }
    if x <= K0_SERIES_LIMIT {
        Ok(k0_series(x) * x.exp())
    } else {
        Ok(k0_steed_scaled(x))
    }
}

/// Unscaled `I0(x)`; overflows to infinity beyond x ~ 713.
pub fn bessel_i0(x: f64) -> Result<f64> {
    bessel_i0_scaled(x).map(|v| v * x.exp())
}

/// Unscaled `K0(x)`; underflows to zero beyond x ~ 705.
pub fn bessel_k0(x: f64) -> Result<f64> {
    bessel_k0_scaled(x).map(|v| v * (-x).exp())
}

// sum (x^2/4)^k / (k!)^2; every term is positive so there is no cancellation
fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term < sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

fn i0_asymptotic_scaled(x: f64) -> f64 {
    // exp(-x) I0(x) ~ (2 pi x)^(-1/2) sum_k ((2k-1)!!)^2 / (k! (8x)^k)
    let inv8x = 1.0 / (8.0 * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd * inv8x / k as f64;
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

fn k0_series(x: f64) -> f64 {
    // K0(x) = -(ln(x/2) + gamma) I0(x) + sum_{k>=1} H_k (x^2/4)^k / (k!)^2
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut tail = 0.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        harmonic += 1.0 / k;
        i0 += term;
        tail += harmonic * term;
        if term < 1e-18 * i0 {
            break;
        }
        k += 1.0;
    }
    -((0.5 * x).ln() + EULER_GAMMA) * i0 + tail
}

// Steed's evaluation of the Thompson-Barnett continued fraction for K_nu,
// specialised to nu = 0. Returns exp(x) K0(x).
fn k0_steed_scaled(x: f64) -> f64 {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    (std::f64::consts::PI / (2.0 * x)).sqrt() / s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // I0(x) = (1/pi) int_0^pi exp(x cos th) d th; the periodic trapezoid rule
    // converges geometrically, scaled by exp(-x) inside the integrand.
    fn i0_scaled_oracle(x: f64) -> f64 {
        let n = 4000;
        let h = PI / n as f64;
        let mut s = 0.0;
        for j in 0..=n {
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            s += w * (x * ((j as f64 * h).cos() - 1.0)).exp();
        }
        s * h / PI
    }

    // K0(x) = int_0^inf exp(-x cosh t) dt
    fn k0_scaled_oracle(x: f64) -> f64 {
        let h = 1e-3;
        let mut s = 0.5;
        let mut j = 1;
        loop {
            let t = j as f64 * h;
            let v = (-x * (t.cosh() - 1.0)).exp();
            s += v;
            if v < 1e-20 {
                break;
            }
            j += 1;
        }
        s * h
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn i0_known_values() {
        assert_eq!(bessel_i0_scaled(0.0).unwrap(), 1.0);
        assert!(rel(bessel_i0_scaled(1.0).unwrap(), 0.465_759_607_593_640_6) < 1e-14);
        // 1/sqrt(200 pi) * (1 + 1/800 + 9/1_280_000 + ...)
        let v100 = bessel_i0_scaled(100.0).unwrap();
        assert!(rel(v100, 0.039_944_379_299_096_68) < 1e-12, "{v100}");
    }

    #[test]
    fn k0_known_values() {
        assert!(rel(bessel_k0_scaled(1.0).unwrap(), 1.144_463_079_806_895_4) < 1e-14);
        // 2 K0(2) anchors the rho = 0 density at gamma = gamma_bar = 1
        let two_k0_2 = 2.0 * bessel_k0(2.0).unwrap();
        assert!(
            rel(two_k0_2, 0.227_787_745_499_066_87) < 1e-13,
            "{two_k0_2}"
        );
        assert!(rel(bessel_k0_scaled(2.0).unwrap(), 0.841_568_215_070_771_3) < 1e-13);
    }

    #[test]
    fn matches_integral_oracles_across_branches() {
        for &x in &[
            1e-6, 0.01, 0.3, 1.0, 1.9, 2.0, 2.1, 5.0, 8.0, 15.0, 19.9, 20.1, 40.0, 300.0,
        ] {
            let i = bessel_i0_scaled(x).unwrap();
            assert!(rel(i, i0_scaled_oracle(x)) < 1e-12, "i0e({x})");
            let k = bessel_k0_scaled(x).unwrap();
            assert!(rel(k, k0_scaled_oracle(x)) < 1e-12, "k0e({x})");
        }
    }

    #[test]
    fn k0_scaled_approaches_leading_term_from_below() {
        let mut prev_ratio = 0.0;
        for &x in &[10.0, 100.0, 1e3, 1e4, 1e6] {
            let lead = (PI / (2.0 * x)).sqrt();
            let ratio = bessel_k0_scaled(x).unwrap() / lead;
            assert!(ratio < 1.0 && ratio > prev_ratio, "x={x} ratio={ratio}");
            prev_ratio = ratio;
        }
        assert!((1.0 - prev_ratio) < 1e-6);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_i0_scaled(-1.0).is_err());
        assert!(bessel_i0_scaled(f64::NAN).is_err());
        assert!(bessel_i0_scaled(f64::INFINITY).is_err());
        assert!(bessel_k0_scaled(0.0).is_err());
        assert!(bessel_k0_scaled(-2.0).is_err());
    }

    #[test]
    fn huge_arguments_stay_finite() {
        assert!(bessel_i0_scaled(1e300).unwrap() > 0.0);
        assert!(bessel_k0_scaled(1e300).unwrap() > 0.0);
        assert!(bessel_k0_scaled(1e-300).unwrap().is_finite());
    }

    #[test]
    fn scaled_product_identity() {
        for &(x, y) in &[(0.5, 0.2), (3.0, 2.5), (10.0, 12.0), (50.0, 49.0)] {
            let scaled =
                bessel_i0_scaled(y).unwrap() * bessel_k0_scaled(x).unwrap() * (y - x).exp();
            let raw = bessel_i0(y).unwrap() * bessel_k0(x).unwrap();
            assert!(rel(scaled, raw) < 1e-13);
        }
    }

    proptest::proptest! {
        #[test]
        fn i0_scaled_is_decreasing(x in 0.0f64..200.0, dx in 1e-3f64..5.0) {
            let a = bessel_i0_scaled(x).unwrap();
            let b = bessel_i0_scaled(x + dx).unwrap();
            proptest::prop_assert!(b < a);
        }
    }
}
