//! Datasets for the three capacity figures.

use super::sweep::{run_points, Point, Row};
use super::CliError;
use crate::capacity::Method;
use crate::channel::Mode;
use crate::montecarlo::{McConfig, DEFAULT_BATCHES, DEFAULT_SEED};
use crate::special::AccuracyPolicy;

pub const FIGURE_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    /// Capacity against the mean SNR at the reader.
    FixedReceiver,
    /// Capacity against the transmit-referenced SNR.
    FixedBudget,
    /// Fixed-budget capacity divided by the AWGN capacity.
    AwgnNormalised,
}

impl FigureId {
    pub fn from_number(n: u32) -> Option<Self> {
        match n {
            1 => Some(FigureId::FixedReceiver),
            2 => Some(FigureId::FixedBudget),
            3 => Some(FigureId::AwgnNormalised),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::FixedReceiver => "fig_fixed_receiver",
            FigureId::FixedBudget => "fig_fixed_budget",
            FigureId::AwgnNormalised => "fig_awgn_normalised",
        }
    }

    pub fn default_mc() -> McConfig {
        McConfig {
            n_samples: FIGURE_SAMPLES,
            seed: DEFAULT_SEED,
            n_batches: DEFAULT_BATCHES,
        }
    }

    pub fn points(&self) -> Vec<Point> {
        let mut pts = Vec::new();
        let mut push = |mode, rho, snr_db, method, normalise| {
            pts.push(Point {
                mode,
                rho,
                snr_db,
                method,
                normalise,
            });
        };
        match self {
            FigureId::FixedReceiver => {
                let mode = Mode::FixedReceiverSnr;
                for rho in [0.0, 0.3, 0.6, 0.9] {
                    for snr in grid(-10, 40, 2) {
                        for m in [
                            Method::Quadrature,
                            Method::AsymptoticHigh,
                            Method::AwgnReference,
                            Method::RayleighReference,
                        ] {
                            push(mode, rho, snr, m, false);
                        }
                    }
                    for snr in grid(-10, 40, 5) {
                        push(mode, rho, snr, Method::MonteCarlo, false);
                    }
                }
            }
            FigureId::FixedBudget => {
                let mode = Mode::FixedPowerBudget;
                for rho in [0.0, 0.5, 1.0] {
                    for snr in grid(-10, 40, 2) {
                        if rho < 1.0 {
                            push(mode, rho, snr, Method::Quadrature, false);
                        }
                        push(mode, rho, snr, Method::AsymptoticHigh, false);
                    }
                    for snr in grid(-10, 40, 5) {
                        push(mode, rho, snr, Method::MonteCarlo, false);
                    }
                }
            }
            FigureId::AwgnNormalised => {
                let mode = Mode::FixedPowerBudget;
                for rho in [0.0, 0.5, 1.0] {
                    for snr in grid(-30, 10, 2) {
                        if rho < 1.0 {
                            push(mode, rho, snr, Method::Quadrature, true);
                        }
                        push(mode, rho, snr, Method::AsymptoticLow, true);
                    }
                    for snr in grid(-30, 10, 5) {
                        push(mode, rho, snr, Method::MonteCarlo, true);
                    }
                }
            }
        }
        pts
    }
}

fn grid(start: i32, stop: i32, step: usize) -> impl Iterator<Item = f64> {
    (start..=stop).step_by(step).map(f64::from)
}

pub fn figure_dataset(
    fig: FigureId,
    policy: &AccuracyPolicy,
    mc: &McConfig,
) -> Result<Vec<Row>, CliError> {
    mc.validate()?;
    run_points(&fig.points(), policy, mc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_mc() -> McConfig {
        McConfig {
            n_samples: 20_000,
            seed: 1,
            n_batches: 100,
        }
    }

    fn at<'a>(rows: &'a [Row], rho: f64, snr: f64, method: &str) -> &'a Row {
        rows.iter()
            .find(|r| r.rho == rho && r.snr_db == snr && r.method == method)
            .unwrap()
    }

    #[test]
    fn ids_and_grids() {
        assert_eq!(FigureId::from_number(2), Some(FigureId::FixedBudget));
        assert_eq!(FigureId::from_number(4), None);
        let pts = FigureId::FixedReceiver.points();
        assert_eq!(
            pts.iter()
                .filter(|p| p.method == Method::MonteCarlo)
                .count(),
            4 * 11
        );
        assert_eq!(
            pts.iter()
                .filter(|p| p.method == Method::Quadrature)
                .count(),
            4 * 26
        );
        assert!(FigureId::FixedBudget
            .points()
            .iter()
            .all(|p| p.rho < 1.0 || !p.method.needs_density()));
    }

    #[test]
    fn fixed_receiver_gap_at_high_snr() {
        let rows = figure_dataset(
            FigureId::FixedReceiver,
            &AccuracyPolicy::default(),
            &quick_mc(),
        )
        .unwrap();
        let gap = at(&rows, 0.0, 40.0, "quadrature").capacity_bpshz
            - at(&rows, 0.9, 40.0, "quadrature").capacity_bpshz;
        assert!((gap - 0.925_999_4).abs() < 0.05, "{gap}");
        for w in rows.windows(2) {
            assert!((w[0].rho, w[0].snr_db) <= (w[1].rho, w[1].snr_db));
        }
    }

    #[test]
    fn normalised_low_snr_limit() {
        let rows = figure_dataset(
            FigureId::AwgnNormalised,
            &AccuracyPolicy::default(),
            &quick_mc(),
        )
        .unwrap();
        let q = at(&rows, 0.5, -30.0, "quadrature_norm").capacity_bpshz;
        assert!((q / 1.5 - 1.0).abs() < 0.05, "{q}");
        let m = at(&rows, 1.0, -30.0, "mc_norm").capacity_bpshz;
        assert!((m / 2.0 - 1.0).abs() < 0.05, "{m}");
        assert!((at(&rows, 1.0, -30.0, "asymptotic_low_norm").capacity_bpshz - 2.0).abs() < 0.01);
    }
}
