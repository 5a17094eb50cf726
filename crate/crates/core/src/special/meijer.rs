//! Meijer G-function of real positive argument by direct Mellin–Barnes
//! quadrature.
//!
//! ```text
//!                 1    ⌠  Π_{j<m} Γ(b_j + s) Π_{j<n} Γ(1 - a_j - s)
//! G^{m,n}_{p,q} = ──── │  ───────────────────────────────────────────── z^(-s) ds
//!                 2πi  ⌡  Π_{j≥m} Γ(1 - b_j - s) Π_{j≥n} Γ(a_j + s)
//! ```
//!
//! The contour is the vertical line `Re s = c` inside the strip separating the
//! poles of `Γ(b_j + s)` (left) from those of `Γ(1 - a_j - s)` (right). The
//! integrand is analytic in that strip and decays like `exp(-π δ |t|)` with
//! `δ = m + n - (p + q)/2`, so the trapezoid rule on the truncated line
//! converges geometrically in the step size. Repeated parameters (higher-order
//! poles) need no special treatment, which is the reason residue sums are not
//! used.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::gamma::ln_gamma_complex;
use crate::special::AccuracyPolicy;

/// Parameters of `G^{m,n}_{p,q}[z | a; b]` with `p = a.len()`, `q = b.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct GParams {
    m: usize,
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    z: f64,
}

impl GParams {
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>, z: f64) -> Result<Self> {
        if m > b.len() || n > a.len() {
            return Err(Error::Parameter(format!(
                "need m <= q and n <= p, got m={m}, n={n}, p={}, q={}",
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Parameter("non-finite G-function parameter".into()));
        }
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::Parameter(format!(
                "argument z = {z} must be positive"
            )));
        }
        let params = Self { m, n, a, b, z };
        let (lo, hi) = params.strip();
        if lo >= hi {
            return Err(Error::Parameter(format!(
                "no contour separates the pole families: strip ({lo}, {hi}) is empty"
            )));
        }
        if params.decay_rate() <= 0.0 {
            return Err(Error::Parameter(format!(
                "m + n - (p + q)/2 = {} must be positive for an absolutely convergent contour",
                params.decay_rate()
            )));
        }
        Ok(params)
    }

    /// The `k`-th term kernel of the capacity series,
    /// `G^{4,1}_{2,4}[z | -k-1, -k; 0, 0, -k-1, -k-1]`.
    pub fn capacity_kernel(k: usize, z: f64) -> Result<Self> {
        let kf = k as f64;
        Self::new(
            1 + 3,
            1,
            vec![-kf - 1.0, -kf],
            vec![0.0, 0.0, -kf - 1.0, -kf - 1.0],
            z,
        )
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Open interval of admissible contour abscissae.
    pub fn strip(&self) -> (f64, f64) {
        let lo = self.b[..self.m]
            .iter()
            .map(|b| -b)
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = self.a[..self.n]
            .iter()
            .map(|a| 1.0 - a)
            .fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    /// Strip midpoint, or one unit inside a half-infinite strip.
    pub fn default_abscissa(&self) -> f64 {
        match self.strip() {
            (lo, hi) if lo.is_finite() && hi.is_finite() => 0.5 * (lo + hi),
            (lo, _) if lo.is_finite() => lo + 1.0,
            (_, hi) if hi.is_finite() => hi - 1.0,
            _ => 0.0,
        }
    }

    /// Exponential decay rate `δ` of the integrand: `|f(c+it)| ~ e^(-π δ |t|)`.
    pub fn decay_rate(&self) -> f64 {
        (self.m + self.n) as f64 - 0.5 * (self.a.len() + self.b.len()) as f64
    }

    /// `ln` of the Mellin–Barnes integrand at `s`, including `z^(-s)`.
    /// Returns `None` where a denominator gamma has a pole (integrand zero).
    pub fn log_integrand(&self, s: Complex64) -> Result<Option<Complex64>> {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = -s * self.z.ln();
        for &b in &self.b[..self.m] {
            acc += ln_gamma_complex(s + b)?;
        }
        for &a in &self.a[..self.n] {
            acc += ln_gamma_complex(one - a - s)?;
        }
        for &b in &self.b[self.m..] {
            match ln_gamma_complex(one - b - s) {
                Ok(v) => acc -= v,
                Err(Error::Pole(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        for &a in &self.a[self.n..] {
            match ln_gamma_complex(s + a) {
                Ok(v) => acc -= v,
                Err(Error::Pole(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        Ok(Some(acc))
    }
}

/// A G-function value with its quadrature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeijerValue {
    pub value: f64,
    /// Absolute error estimate (difference between the last two refinements
    /// plus the truncated tail bound).
    pub error: f64,
    pub nodes: usize,
    pub abscissa: f64,
    pub truncation: f64,
}

/// A G-function value represented as `mantissa * exp(ln_scale)`, for kernels
/// whose magnitude overflows `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMeijer {
    pub mantissa: f64,
    pub mantissa_error: f64,
    pub ln_scale: f64,
    pub nodes: usize,
    pub abscissa: f64,
    pub truncation: f64,
}

impl ScaledMeijer {
    /// `ln` of the value; the value must be positive.
    pub fn ln_value(&self) -> f64 {
        self.mantissa.ln() + self.ln_scale
    }
}

/// `G^{m,n}_{p,q}[z]` on the default contour.
pub fn meijer_g(params: &GParams, policy: &AccuracyPolicy) -> Result<MeijerValue> {
    meijer_g_at(params, params.default_abscissa(), policy)
}

/// `G^{m,n}_{p,q}[z]` on the contour `Re s = c`.
pub fn meijer_g_at(params: &GParams, c: f64, policy: &AccuracyPolicy) -> Result<MeijerValue> {
    let r = meijer_g_scaled(params, c, policy)?;
    let scale = r.ln_scale.exp();
    let value = r.mantissa * scale;
    if !value.is_finite() || (value == 0.0 && r.mantissa != 0.0) {
        return Err(Error::Parameter(format!(
            "G-function value mantissa {} * exp({}) is not representable",
            r.mantissa, r.ln_scale
        )));
    }
    Ok(MeijerValue {
        value,
        error: r.mantissa_error * scale,
        nodes: r.nodes,
        abscissa: r.abscissa,
        truncation: r.truncation,
    })
}

/// Contour quadrature returning the value in scaled form.
pub fn meijer_g_scaled(params: &GParams, c: f64, policy: &AccuracyPolicy) -> Result<ScaledMeijer> {
    let (lo, hi) = params.strip();
    if !(c > lo && c < hi) {
        return Err(Error::Parameter(format!(
            "abscissa {c} outside the strip ({lo}, {hi})"
        )));
    }
    let eval = |t: f64| -> Result<Option<Complex64>> { params.log_integrand(Complex64::new(c, t)) };
    let max_nodes = policy.max_quadrature_nodes();

    // Coarse outward scan fixes the scale and the truncation point.
    let scan_step = 0.5;
    let drop = -policy.rel_tol().ln() + policy.contour_truncation_margin() + 7.0;
    let mut peak = f64::NEG_INFINITY;
    let mut below = 0;
    let mut prev = f64::INFINITY;
    let mut t = 0.0;
    let mut scanned = 0usize;
    let truncation = loop {
        let lr = eval(t)?.map_or(f64::NEG_INFINITY, |v| v.re);
        peak = peak.max(lr);
        scanned += 1;
        if lr < peak - drop && lr < prev {
            below += 1;
            if below >= 3 {
                break t;
            }
        } else {
            below = 0;
        }
        prev = lr;
        t += scan_step;
        if scanned > max_nodes {
            return Err(Error::convergence(
                "meijer_g",
                format!("integrand did not decay within |Im s| <= {t}"),
            ));
        }
    };
    if !peak.is_finite() {
        return Err(Error::Parameter(
            "integrand vanishes identically on the contour".into(),
        ));
    }
    let ln_scale = peak;

    // Re f(c + it) is even in t, so integrate over t >= 0 and double.
    let re_f = |t: f64| -> Result<(f64, f64)> {
        Ok(match eval(t)? {
            Some(v) => {
                let w = (v - ln_scale).exp();
                (w.re, w.norm())
            }
            None => (0.0, 0.0),
        })
    };

    let mut h = scan_step;
    let mut n_intervals = (truncation / h).ceil() as usize;
    let (f0, a0) = re_f(0.0)?;
    let mut sum = 0.5 * f0;
    let mut abs_sum = 0.5 * a0;
    for j in 1..=n_intervals {
        let (f, a) = re_f(j as f64 * h)?;
        sum += f;
        abs_sum += a;
    }
    let mut nodes;
    let mut estimate = h * sum / PI;
    let mut refinements = 0;
    loop {
        h *= 0.5;
        n_intervals *= 2;
        for j in (1..=n_intervals).step_by(2) {
            let (f, a) = re_f(j as f64 * h)?;
            sum += f;
            abs_sum += a;
        }
        nodes = n_intervals + 1;
        let refined = h * sum / PI;
        let delta = (refined - estimate).abs();
        estimate = refined;
        refinements += 1;
        let magnitude = h * abs_sum / PI;
        let target = policy.rel_tol() * estimate.abs() + policy.abs_tol() * magnitude;
        if refinements >= 2 && delta <= target {
            // tail beyond the truncation point is below exp(-drop) of the peak
            let tail = (-drop).exp() * truncation.max(1.0) / PI;
            return Ok(ScaledMeijer {
                mantissa: estimate,
                mantissa_error: delta + tail,
                ln_scale,
                nodes,
                abscissa: c,
                truncation,
            });
        }
        if 2 * n_intervals + 1 > max_nodes {
            return Err(Error::convergence(
                "meijer_g",
                format!(
                    "trapezoid refinement reached {nodes} nodes with change {delta:e} (target {target:e})"
                ),
            ));
        }
    }
}
