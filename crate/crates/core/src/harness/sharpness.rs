use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{analytic_square_superlevel, elapsed_ms};
use crate::error::{Error, Result};
use crate::orlicz::{eval_unchecked, YoungSpec};

/// One row of the sharpness table for `(χ_{[0,1]²}, N χ_{[0,1]²})` at `α = 1/10`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    #[serde(rename = "N")]
    pub n: f64,
    pub lambda: f64,
    pub lhs: f64,
    pub rhs_phi1: f64,
    pub rhs_phi2: f64,
    pub ratio1: f64,
    pub ratio2: f64,
    pub runtime_ms: u64,
}

/// `|{M_ℛ(χ, Nχ) > α²}|` against `{∏ ∫Φ(f_i/α)}^{1/2}` with `Φ = Φ₂` and `Φ = Φ₂∘Φ₂`.
///
/// Since `M_ℛ(χ, Nχ) = N (M_ℛχ)²`, the left side is the area where
/// `M_ℛχ > α/√N = 1/(10√N)`, read off the closed form.
pub fn sharpness_sweep(ns: &[f64]) -> Result<Vec<SharpnessRow>> {
    let alpha = 0.1;
    let phi1 = YoungSpec::Phi { n: 2, m: 1 };
    let phi2 = YoungSpec::Phi { n: 2, m: 2 };
    ns.iter()
        .map(|&n| {
            if !(n >= 1.0 && n.is_finite()) {
                return Err(Error::input("N", format!("N must be ≥ 1, got {n}")));
            }
            let t = Instant::now();
            let lambda = alpha / n.sqrt();
            let lhs = analytic_square_superlevel(lambda)?;
            let rhs = |phi: &YoungSpec| (eval_unchecked(phi, 1.0 / alpha) * eval_unchecked(phi, n / alpha)).sqrt();
            let (rhs_phi1, rhs_phi2) = (rhs(&phi1), rhs(&phi2));
            Ok(SharpnessRow {
                n,
                lambda,
                lhs,
                rhs_phi1,
                rhs_phi2,
                ratio1: lhs / rhs_phi1,
                ratio2: lhs / rhs_phi2,
                runtime_ms: elapsed_ms(t),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpec;
    use crate::grid::{GridBox, GridFunction};
    use crate::maximal::{multilinear_maximal_map, MaximalOptions};

    #[test]
    fn base_case_and_trends() {
        let ns: Vec<f64> = (0..=10).map(|k| 4f64.powi(k)).collect();
        let rows = sharpness_sweep(&ns).unwrap();
        assert!(rows[0].lhs.is_finite() && rows[0].rhs_phi1.is_finite());
        assert!(rows.windows(2).all(|w| w[1].ratio1 > w[0].ratio1));
        assert!(sharpness_sweep(&[0.5]).is_err());
    }

    #[test]
    fn reduction_matches_grid() {
        // the pair map and the thresholded single map agree cell by cell
        let gbox = GridBox::new(vec![-3.0, -3.0], vec![5.0, 5.0], vec![16, 16]).unwrap();
        let chi = GridFunction::from_sampler(gbox, |x| if (0.0..1.0).contains(&x[0]) && (0.0..1.0).contains(&x[1]) { 1.0 } else { 0.0 }).unwrap();
        let n = 16.0;
        let pair = multilinear_maximal_map(&[chi.clone(), chi.scaled(n).unwrap()], &BasisSpec::Rectangles, &MaximalOptions::default()).unwrap();
        let single = multilinear_maximal_map(&[chi], &BasisSpec::Rectangles, &MaximalOptions::default()).unwrap();
        let alpha: f64 = 0.1;
        let lam = alpha / n.sqrt();
        let a = pair.superlevel_set(alpha * alpha);
        let b = single.superlevel_set(lam);
        let diff = a.bits().iter().zip(b.bits()).filter(|(x, y)| x != y).count();
        // only cells whose value sits within rounding of the threshold may differ
        assert!(diff <= 4, "{diff}");
    }
}
