//! Log-gamma (complex, principal branch), real gamma helpers and digamma.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// Beyond this many recurrence steps the reflection formula is used instead.
const MAX_RECURRENCE_SHIFT: f64 = 64.0;

/// Principal branch of `ln Γ(z)`.
///
/// The branch cut lies on the negative real axis only, so the imaginary part
/// is continuous along any vertical line with `Re z > 0`, and along vertical
/// lines with `Re z > -64` away from the real axis. Use
/// [`ln_gamma_vertical`] when a path crossing the negative real axis needs a
/// continuous phase.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::domain("ln_gamma_complex", format!("z = {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole(format!("{}", z.re)));
    }
    if z.re >= 0.5 {
        return Ok(lanczos(z));
    }
    let shift = (0.5 - z.re).ceil();
    if shift <= MAX_RECURRENCE_SHIFT {
        // ln Γ(z) = ln Γ(z + n) - Σ ln(z + k); each log is principal, so the
        // sum inherits the cut of ln Γ exactly.
        let n = shift as usize;
        let mut acc = lanczos(z + shift);
        for k in 0..n {
            acc -= (z + k as f64).ln();
        }
        return Ok(acc);
    }
    // ln Γ(z) = ln π - ln sin(π z) - ln Γ(1 - z), correct modulo 2πi.
    let sin_pz = (z * PI).sin();
    Ok(Complex64::new(PI.ln(), 0.0) - sin_pz.ln() - lanczos(Complex64::new(1.0, 0.0) - z))
}

fn lanczos(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let mut series = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (zm1 + i as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    HALF_LN_2PI + (zm1 + 0.5) * t.ln() - t + series.ln()
}

/// `ln Γ(re + i t)` at each `t`, with the imaginary part unwrapped so it is
/// continuous in `t`. `ts` must be sorted; values are anchored so that the
/// first point matches the principal branch.
pub fn ln_gamma_vertical(re: f64, ts: &[f64]) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(ts.len());
    let mut prev_im: Option<f64> = None;
    for &t in ts {
        let mut v = ln_gamma_complex(Complex64::new(re, t))?;
        if let Some(p) = prev_im {
            let turns = ((p - v.im) / (2.0 * PI)).round();
            v.im += turns * 2.0 * PI;
        }
        prev_im = Some(v.im);
        out.push(v);
    }
    Ok(out)
}

/// `ln |Γ(x)|` for real `x` away from the poles.
pub fn ln_gamma(x: f64) -> Result<f64> {
    ln_gamma_complex(Complex64::new(x, 0.0)).map(|v| v.re)
}

/// `Γ(x)` for real `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::domain("gamma", format!("x = {x}")));
    }
    ln_gamma(x).map(f64::exp)
}

/// Digamma `ψ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("digamma", format!("x = {x}")));
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli tail: B_2n / (2n x^2n) for n = 1..7
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2
                                        * (1.0 / 132.0
                                            - inv2 * (691.0 / 32_760.0 - inv2 / 12.0))))));
    Ok(shift + x.ln() - 0.5 / x - tail)
}
