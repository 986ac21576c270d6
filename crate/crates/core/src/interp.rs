//! Constant bookkeeping for interpolating distributional estimates.
//!
//! [`l1xlp_bound`] evaluates the `L¹ × Lᵖ` estimate obtained from an
//! `L¹ × L¹` distributional bound (constant `B1`) and an `L¹ × L^∞` bound
//! (constant `B2`) by truncating `g` at height `ε√(α/2)`.
//!
//! [`strong_type_constant`] assembles the four-term bound on
//! `∫ λ^{p−1} |{|T(f_1,f_2)| > 4λ}| dλ` for `‖f_i‖_{2p} = 1`:
//!
//! ```text
//! I   = 2A ∫₀¹ λ^{2p−1} Φ(1/λ) dλ
//! II  = B1^s (s1·a1)^{−s/s1} (s2·b2)^{−s/s2},   a1 = p/s1 − 1/2,  b2 = 1/2 − p/s2
//! III = the same with B2
//! IV  = B^s / (s − p)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::orlicz::{eval_unchecked, young_inverse, young_log_eval, YoungSpec};

/// Absolute tolerance of the adaptive Simpson rule.
pub const QUAD_TOL: f64 = 1e-10;
const MAX_DEPTH: u32 = 60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpConstants {
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub s1: f64,
    pub s2: f64,
    /// Derived from `1/s = 1/s1 + 1/s2` when absent.
    #[serde(default)]
    pub s: Option<f64>,
    pub p: f64,
}

impl InterpConstants {
    fn resolved_s(&self) -> Result<f64> {
        let s = 1.0 / (1.0 / self.s1 + 1.0 / self.s2);
        match self.s {
            Some(given) if (given - s).abs() > 1e-12 * s => Err(Error::input(
                "s",
                format!("s = {given} is inconsistent with 1/s = 1/s1 + 1/s2 = 1/{s}"),
            )),
            _ => Ok(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongTypeReport {
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "II")]
    pub ii: f64,
    #[serde(rename = "III")]
    pub iii: f64,
    #[serde(rename = "IV")]
    pub iv: f64,
    pub total: f64,
    /// `∫₀¹ λ^{2p−1} Φ(1/λ) dλ`.
    pub j_integral: f64,
    pub s: f64,
    /// `(p·4^p·total)^{1/p}`: the resulting bound on `‖T(f_1,f_2)‖_p` for unit inputs in `L^{2p}`.
    pub operator_bound: f64,
}

fn simpson_step(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // split once so symmetric integrands cannot fool the first error estimate
    let m = 0.5 * (a + b);
    let half = |lo: f64, hi: f64| {
        let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        simpson_step(&f, lo, hi, fa, fm, fb, whole, 0.5 * tol, MAX_DEPTH)
    };
    half(a, m) + half(m, b)
}

/// `∫₀¹ λ^{2p−1} Φ(1/λ) dλ`.
///
/// With `λ = e^{−v}` and `v = w/(1−w)` the integral becomes
/// `∫₀¹ exp(−2pv + ln Φ(e^v)) / (1−w)² dw`, a smooth integrand evaluated in log space.
pub fn i_integral(young: &YoungSpec, p: f64) -> Result<f64> {
    if !(p > 0.5) {
        return Err(Error::Divergence {
            integral: "I",
            condition: format!("p = {p} ≤ 1/2: λ^{{2p−1}}Φ(1/λ) is not integrable at 0"),
        });
    }
    if let YoungSpec::Psi { .. } = young {
        return Err(Error::Divergence {
            integral: "I",
            condition: "Ψ(1/λ) grows faster than every power of 1/λ".into(),
        });
    }
    young.validate()?;
    let g = |w: f64| {
        if w >= 1.0 {
            return 0.0;
        }
        let v = w / (1.0 - w);
        let jac = 1.0 / ((1.0 - w) * (1.0 - w));
        let l = -2.0 * p * v + young_log_eval(young, v);
        if l < -745.0 {
            0.0
        } else {
            l.exp() * jac
        }
    };
    Ok(adaptive_simpson(g, 0.0, 1.0, QUAD_TOL))
}

fn divergence(integral: &'static str, condition: String) -> Error {
    Error::Divergence { integral, condition }
}

/// The four-term decomposition and its total.
pub fn strong_type_constant(c: &InterpConstants, young: &YoungSpec) -> Result<StrongTypeReport> {
    for (name, v) in [("A", c.a), ("B1", c.b1), ("B2", c.b2), ("B", c.b)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::input(name, format!("must be finite and ≥ 0, got {v}")));
        }
    }
    if !(c.s1 > 1.0 && c.s2 > c.s1 && c.s2.is_finite()) {
        return Err(Error::input("s1/s2", format!("need 1 < s1 < s2 < ∞, got s1 = {}, s2 = {}", c.s1, c.s2)));
    }
    let s = c.resolved_s()?;
    let p = c.p;
    if !p.is_finite() {
        return Err(Error::input("p", format!("p must be finite, got {p}")));
    }
    if p <= 0.5 {
        return Err(divergence("I", format!("p = {p} ≤ 1/2")));
    }
    if p <= c.s1 / 2.0 {
        return Err(divergence("II", format!("p = {p} ≤ s1/2 = {}", c.s1 / 2.0)));
    }
    if p >= c.s2 / 2.0 {
        return Err(divergence("II", format!("p = {p} ≥ s2/2 = {}", c.s2 / 2.0)));
    }
    // s is derived from s1, s2 and carries rounding; p = s must still diverge
    if p >= s * (1.0 - 4.0 * f64::EPSILON) {
        return Err(divergence("IV", format!("p = {p} ≥ s = {s}")));
    }
    let j = i_integral(young, p)?;
    let i = 2.0 * c.a * j;
    let a1 = p / c.s1 - 0.5;
    let b2 = 0.5 - p / c.s2;
    let shape = (c.s1 * a1).powf(-s / c.s1) * (c.s2 * b2).powf(-s / c.s2);
    let ii = c.b1.powf(s) * shape;
    let iii = c.b2.powf(s) * shape;
    let iv = c.b.powf(s) / (s - p);
    let total = i + ii + iii + iv;
    Ok(StrongTypeReport {
        i,
        ii,
        iii,
        iv,
        total,
        j_integral: j,
        s,
        operator_bound: (p * 4f64.powf(p) * total).powf(1.0 / p),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1xLpBound {
    pub epsilon: f64,
    /// `‖Φ_n(f/√α)‖₁`.
    pub f_norm: f64,
    /// `‖Φ_n(g/√α)‖_p`.
    pub g_norm: f64,
    #[serde(rename = "L1_bound")]
    pub l1_bound: f64,
    #[serde(rename = "L2_bound")]
    pub l2_bound: f64,
    /// `L1 + L2`.
    pub bound: f64,
    /// `C·{B1^{1/p} B2^{(p−1)/p} ‖Φ(f/√α)‖₁ ‖Φ(g/√α)‖_p}^{p/(p+1)}` with the explicit
    /// `C = C_d + C_d^{(p+1)/2}`, `C_d = √2(1 + ln2/2)^{n−1}`; always ≥ `bound`.
    pub closed_form: f64,
    /// The truncation height `ε√(α/2)` separating `g^α` (above) from `g_α`.
    pub threshold: f64,
}

/// `Φ_n(√2 t) ≤ C_d Φ_n(t)`.
pub fn doubling_constant(n: u32) -> f64 {
    2f64.sqrt() * (1.0 + 0.5 * 2f64.ln()).powi(n as i32 - 1)
}

/// `(g^α, g_α)`: the parts of `g` above and at-or-below `threshold`.
pub fn split_at(g: &GridFunction, threshold: f64) -> (GridFunction, GridFunction) {
    let hi = g.map(|v| if v > threshold { v } else { 0.0 }).expect("subset of valid values");
    let lo = g.map(|v| if v > threshold { 0.0 } else { v }).expect("subset of valid values");
    (hi, lo)
}

/// `∫ Φ_n(f/c)^q`.
fn phi_integral(f: &GridFunction, phi: &YoungSpec, c: f64, q: f64) -> f64 {
    let s: f64 = f
        .values()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let x = eval_unchecked(phi, v / c);
            if q == 1.0 {
                x
            } else {
                x.powf(q)
            }
        })
        .sum();
    s * f.grid().cell_volume()
}

pub fn l1xlp_bound(f: &GridFunction, g: &GridFunction, alpha: f64, b1: f64, b2: f64, p: f64, n: u32) -> Result<L1xLpBound> {
    f.grid().check_same(g.grid(), "l1xlp")?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::input("alpha", format!("α must be positive, got {alpha}")));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::input("p", format!("p must lie in (1, ∞), got {p}")));
    }
    for (name, v) in [("B1", b1), ("B2", b2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::input(name, format!("must be positive, got {v}")));
        }
    }
    if n < 2 {
        return Err(Error::input("n", format!("n must be ≥ 2, got {n}")));
    }
    if g.values().iter().all(|&v| v == 0.0) {
        return Err(Error::input("g", "g must not vanish identically"));
    }
    let phi = YoungSpec::phi(n);
    let ra = alpha.sqrt();
    let rh = (alpha / 2.0).sqrt();
    let f1 = phi_integral(f, &phi, ra, 1.0);
    let gp = phi_integral(g, &phi, ra, p).powf(1.0 / p);
    if f1 == 0.0 {
        return Ok(L1xLpBound {
            epsilon: f64::INFINITY,
            f_norm: 0.0,
            g_norm: gp,
            l1_bound: 0.0,
            l2_bound: 0.0,
            bound: 0.0,
            closed_form: 0.0,
            threshold: f64::INFINITY,
        });
    }
    let target = (b1 * gp.powf(p) / (b2 * b2 * f1)).powf(1.0 / (p + 1.0));
    let epsilon = young_inverse(&phi, target)?;
    let threshold = epsilon * rh;
    let (g_hi, g_lo) = split_at(g, threshold);
    let f_half = phi_integral(f, &phi, rh, 1.0);
    let l1 = (b1 * f_half * phi_integral(&g_hi, &phi, rh, 1.0)).sqrt();
    let l2 = b2 * f_half * eval_unchecked(&phi, g_lo.max_value() / rh);
    let k = b1.powf(1.0 / (p + 1.0)) * b2.powf((p - 1.0) / (p + 1.0)) * (f1 * gp).powf(p / (p + 1.0));
    let cd = doubling_constant(n);
    Ok(L1xLpBound {
        epsilon,
        f_norm: f1,
        g_norm: gp,
        l1_bound: l1,
        l2_bound: l2,
        bound: l1 + l2,
        closed_form: (cd + cd.powf((p + 1.0) / 2.0)) * k,
        threshold,
    })
}
