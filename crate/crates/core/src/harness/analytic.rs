//! Closed forms for the strong maximal function of the unit-square indicator.
//!
//! The best rectangle through `x` stretches from the far side of the square
//! to `x`, so `M_ℛ χ_{[0,1]²}(x) = s(x_1) s(x_2)` with `s = 1` on `[0,1]`,
//! `1/u` for `u > 1` and `1/(1−u)` for `u < 0`.

use crate::error::{Error, Result};
use crate::interp::adaptive_simpson;

/// The one-dimensional factor `s(u)`.
pub fn square_profile_1d(u: f64) -> f64 {
    if u > 1.0 {
        1.0 / u
    } else if u < 0.0 {
        1.0 / (1.0 - u)
    } else {
        1.0
    }
}

/// `M_ℛ χ_{[0,1]^n}(x)` for a point of any dimension.
pub fn analytic_square_profile(x: &[f64]) -> f64 {
    x.iter().map(|&u| square_profile_1d(u)).product()
}

/// `{u : s(u) > μ}` as an open interval; empty when `μ ≥ 1`.
fn profile_superlevel(mu: f64) -> Option<(f64, f64)> {
    if mu >= 1.0 {
        None
    } else if mu <= 0.0 {
        Some((f64::NEG_INFINITY, f64::INFINITY))
    } else {
        Some((1.0 - 1.0 / mu, 1.0 / mu))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::input("lambda", format!("λ must lie in (0, 1), got {lambda}")))
    }
}

/// `|{s(x)s(y) > λ}| = 1 + (4/λ) ln(1/λ)`.
///
/// For fixed `x` the `y`-section has length `2s(x)/λ − 1`; integrating over
/// `{s(x) > λ} = (1 − 1/λ, 1/λ)` gives `2/λ − 1` from `[0,1]` and
/// `(2/λ) ln(1/λ) − 1/λ + 1` from each side.
pub fn analytic_square_superlevel(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(1.0 + 4.0 / lambda * (1.0 / lambda).ln())
}

/// The same area restricted to the window `[lo_0, hi_0] × [lo_1, hi_1]`.
pub fn analytic_square_superlevel_window(lambda: f64, lo: [f64; 2], hi: [f64; 2]) -> Result<f64> {
    check_lambda(lambda)?;
    if !(lo[0] < hi[0] && lo[1] < hi[1]) {
        return Err(Error::input("window", format!("empty window {lo:?}..{hi:?}")));
    }
    let section = |x: f64| match profile_superlevel(lambda / square_profile_1d(x)) {
        None => 0.0,
        Some((a, b)) => (b.min(hi[1]) - a.max(lo[1])).max(0.0),
    };
    // the section length is smooth between the points where s(x) equals one of
    // λ, λ·hi_1 or λ(1 − lo_1), and at the corners 0 and 1 of the square
    let mut cuts = vec![lo[0], hi[0], 0.0, 1.0];
    for c in [lambda, lambda * hi[1], lambda * (1.0 - lo[1])] {
        if c > 0.0 && c < 1.0 {
            cuts.push(1.0 / c);
            cuts.push(1.0 - 1.0 / c);
        }
    }
    cuts.retain(|&c| c >= lo[0] && c <= hi[0]);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    Ok(cuts
        .windows(2)
        .map(|w| adaptive_simpson(section, w[0], w[1], 1e-12 * (w[1] - w[0]).max(1.0)))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpec;
    use crate::grid::{GridBox, GridFunction};
    use crate::maximal::{maximal_map, MaximalOptions};

    #[test]
    fn profile_values_and_symmetry() {
        assert_eq!(analytic_square_profile(&[0.3, 0.9]), 1.0);
        assert_eq!(analytic_square_profile(&[2.0, 2.0]), 0.25);
        for (a, b) in [(2.5, -0.7), (-3.0, 0.2), (1.7, 4.1)] {
            assert_eq!(analytic_square_profile(&[a, b]), analytic_square_profile(&[b, a]));
            assert_eq!(analytic_square_profile(&[a, b]), analytic_square_profile(&[1.0 - a, b]));
        }
    }

    #[test]
    fn profile_matches_grid_map() {
        let gbox = GridBox::new(vec![0.0, 0.0], vec![4.0, 4.0], vec![64, 64]).unwrap();
        let chi = GridFunction::from_sampler(gbox.clone(), |x| if x[0] < 1.0 && x[1] < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let m = maximal_map(&chi, &BasisSpec::Rectangles, &MaximalOptions::default()).unwrap();
        let h = gbox.cell_width(0);
        let mut worst: f64 = 0.0;
        for i in 0..64 {
            for j in 0..64 {
                let c = gbox.cell_center(&[i, j]);
                worst = worst.max((m.get(&[i, j]) - analytic_square_profile(&c)).abs());
            }
        }
        // |∇(s⊗s)| ≤ 1 off the square, so half a cell of shift per axis
        assert!(worst <= 2.0 * h, "{worst}");
        let at = gbox.locate(0, 2.0 - h / 2.0).unwrap();
        assert!((m.get(&[at, at]) - 0.25).abs() <= 2.0 * h);
    }

    #[test]
    fn superlevel_closed_form() {
        assert!(check_lambda(1.0).is_err() && check_lambda(0.0).is_err());
        assert!((analytic_square_superlevel(1.0 - 1e-9).unwrap() - 1.0).abs() < 1e-6);
        // a window holding the whole set reproduces the closed form
        for lambda in [0.9, 0.25, 0.05] {
            let big = 1.0 / lambda + 1.0;
            let w = analytic_square_superlevel_window(lambda, [-big, -big], [big, big]).unwrap();
            let c = analytic_square_superlevel(lambda).unwrap();
            assert!((w - c).abs() < 1e-9 * c, "{w} vs {c}");
        }
        let mut prev = 0.0;
        for k in 1..60 {
            let lambda = 0.9f64.powi(k);
            let a = analytic_square_superlevel(lambda).unwrap();
            assert!(a > prev);
            prev = a;
        }
        let lambda = 1e-12;
        let lead = lambda * analytic_square_superlevel(lambda).unwrap() / (1.0 / lambda).ln();
        assert!((lead - 4.0).abs() < 1e-3);
    }

    #[test]
    fn window_by_monte_carlo_cells() {
        // direct cell-centre count on a fine mesh
        let (lambda, lo, hi) = (0.05, [0.0, -2.0], [12.0, 9.0]);
        let n = 1200;
        let (dx, dy) = ((hi[0] - lo[0]) / n as f64, (hi[1] - lo[1]) / n as f64);
        let mut count = 0usize;
        for i in 0..n {
            for j in 0..n {
                let p = [lo[0] + (i as f64 + 0.5) * dx, lo[1] + (j as f64 + 0.5) * dy];
                if analytic_square_profile(&p) > lambda {
                    count += 1;
                }
            }
        }
        let mesh = count as f64 * dx * dy;
        let w = analytic_square_superlevel_window(lambda, lo, hi).unwrap();
        assert!((mesh - w).abs() < 0.01 * w, "{mesh} vs {w}");
    }
}
