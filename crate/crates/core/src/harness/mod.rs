//! End-to-end experiments: the endpoint distributional estimate, the
//! multilinear estimate and its sharpness, weighted-bound probes, and the
//! interpolation bound against measured distributions.
//!
//! Experiments return plain rows; writing CSV/JSON is left to the caller.

pub mod analytic;
mod jmz;
mod probe;
mod sharpness;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::grid::GridFunction;
use crate::orlicz::{eval_unchecked, YoungSpec};

pub use analytic::{analytic_square_profile, analytic_square_superlevel, analytic_square_superlevel_window, square_profile_1d};
pub use jmz::{
    bsmf_experiment, bsmf_experiment_tensor, jmz_experiment, jmz_experiment_tensor, jmz_family, BsmfReport, JmzFamilyMember,
    SelfCheck,
};
pub use probe::{l1xlp_domination, probe_test_functions, weighted_bound_probe, DominationReport, DominationRow, ProbeMode, ProbeReport};
pub use sharpness::{sharpness_sweep, SharpnessRow};

/// One experiment measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    /// Which function or configuration the row belongs to.
    pub label: String,
    /// Swept parameters (`lambda`, `N`, `alpha`, …).
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; `None` when the row is flagged.
    pub ratio: Option<f64>,
    /// Secondary columns, e.g. contrast ratios.
    pub extra: BTreeMap<String, f64>,
    pub runtime_ms: u64,
    /// Degenerate row (`rhs = 0` or a non-finite side).
    pub flagged: bool,
}

impl ExperimentRow {
    pub fn new(label: impl Into<String>, params: &[(&str, f64)], lhs: f64, rhs: f64) -> Self {
        let flagged = !(rhs > 0.0 && rhs.is_finite() && lhs.is_finite());
        ExperimentRow {
            label: label.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            lhs,
            rhs,
            ratio: if flagged { None } else { Some(lhs / rhs) },
            extra: BTreeMap::new(),
            runtime_ms: 0,
            flagged,
        }
    }

    pub fn param(&self, key: &str) -> f64 {
        self.params.get(key).copied().unwrap_or(f64::NAN)
    }
}

/// Largest ratio over unflagged rows: the empirical constant of a sweep.
pub fn empirical_constant(rows: &[ExperimentRow]) -> Option<f64> {
    rows.iter().filter_map(|r| r.ratio).reduce(f64::max)
}

/// `count` geometrically spaced values from `lo` to `hi`, both included.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > 0.0 && count >= 1);
    if count == 1 {
        return vec![lo];
    }
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|k| if k + 1 == count { hi } else { lo * (step * k as f64).exp() }).collect()
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    LinearFit {
        slope,
        intercept,
        r_squared: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
    }
}

/// `∫ Φ(|f|/λ)` as a plain cell sum times cell volume.
pub fn modular_integral(f: &GridFunction, phi: &YoungSpec, lambda: f64) -> f64 {
    let s: f64 = f
        .values()
        .iter()
        .filter(|&&v| v != 0.0)
        .map(|&v| eval_unchecked(phi, v.abs() / lambda))
        .sum();
    s * f.grid().cell_volume()
}

pub(crate) fn elapsed_ms(t: std::time::Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|a| 3.0 * a - 2.0).collect();
        let f = linear_fit(&x, &y);
        assert!((f.slope - 3.0).abs() < 1e-12 && (f.intercept + 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let noisy: Vec<f64> = y.iter().enumerate().map(|(k, v)| v + if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(linear_fit(&x, &noisy).r_squared < 1.0);
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = geometric_grid(0.005, 0.1, 24);
        assert_eq!(g.len(), 24);
        assert_eq!(g[0], 0.005);
        assert_eq!(g[23], 0.1);
        let q = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - q).abs() < 1e-12));
    }

    #[test]
    fn flagged_rows() {
        let r = ExperimentRow::new("zero", &[("lambda", 0.5)], 0.0, 0.0);
        assert!(r.flagged && r.ratio.is_none());
        let r = ExperimentRow::new("ok", &[("lambda", 0.5)], 1.0, 4.0);
        assert_eq!(r.ratio, Some(0.25));
        assert_eq!(r.param("lambda"), 0.5);
    }
}
