use crate::error::{Error, Result};

/// Tolerances shared by every adaptive routine in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyPolicy {
    rel_tol: f64,
    abs_tol: f64,
    max_quadrature_nodes: usize,
    contour_truncation_margin: f64,
}

impl Default for AccuracyPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_quadrature_nodes: 200_000,
            contour_truncation_margin: 8.0,
        }
    }
}

impl AccuracyPolicy {
    pub fn new(
        rel_tol: f64,
        abs_tol: f64,
        max_quadrature_nodes: usize,
        contour_truncation_margin: f64,
    ) -> Result<Self> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(rel_tol) || !positive(abs_tol) || !positive(contour_truncation_margin) {
            return Err(Error::Config(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        if rel_tol < 100.0 * f64::EPSILON {
            return Err(Error::Config(format!(
                "rel_tol {rel_tol:e} is below 100 machine epsilons"
            )));
        }
        if max_quadrature_nodes < 16 {
            return Err(Error::Config(
                "max_quadrature_nodes must be at least 16".into(),
            ));
        }
        Ok(Self {
            rel_tol,
            abs_tol,
            max_quadrature_nodes,
            contour_truncation_margin,
        })
    }

    /// Default policy with a different relative tolerance.
    pub fn with_rel_tol(rel_tol: f64) -> Result<Self> {
        let d = Self::default();
        Self::new(
            rel_tol,
            d.abs_tol,
            d.max_quadrature_nodes,
            d.contour_truncation_margin,
        )
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn max_quadrature_nodes(&self) -> usize {
        self.max_quadrature_nodes
    }

    /// Extra e-folds of decay, beyond `ln(1/rel_tol)`, required before a
    /// contour integral is truncated.
    pub fn contour_truncation_margin(&self) -> f64 {
        self.contour_truncation_margin
    }
}
