//! Young functions, Luxemburg norms and the averaging lemmas built on them.
//!
//! `Φ_n(t) = t·log(e+t)^{n−1}`, `Ψ_n(t) = exp(t^{1/(n−1)}) − 1`, and `Φ^{(m)}`
//! the m-fold composition of `Φ_n`. Norms are taken over a cell set `E` with
//! the normalized measure `dx/|E|`.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellSet, GridFunction};

/// Upper limit on bisection steps for norms and inverses.
pub const MAX_BISECTION: usize = 200;
/// Target residual `|modular − 1|` for a nonzero norm.
pub const NORM_RESIDUAL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum YoungSpec {
    /// `Φ_n` composed `m` times.
    Phi { n: u32, m: u32 },
    Psi { n: u32 },
    /// `t(1 + (log⁺ t)^{n−1})`, the non-smooth form equivalent to `Φ_n` up to constants.
    PhiVariant { n: u32 },
    Linear,
}

impl YoungSpec {
    pub fn phi(n: u32) -> Self {
        YoungSpec::Phi { n, m: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            YoungSpec::Phi { n, m } => {
                if n < 2 {
                    return Err(Error::input("n", format!("Φ_n needs n ≥ 2, got {n}")));
                }
                if m < 1 {
                    return Err(Error::input("m", "iteration count m must be ≥ 1"));
                }
            }
            YoungSpec::Psi { n } | YoungSpec::PhiVariant { n } if n < 2 => {
                return Err(Error::input("n", format!("n must be ≥ 2, got {n}")));
            }
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for YoungSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YoungSpec::Phi { n, m } => write!(f, "phi:n={n},m={m}"),
            YoungSpec::Psi { n } => write!(f, "psi:n={n}"),
            YoungSpec::PhiVariant { n } => write!(f, "phi_variant:n={n}"),
            YoungSpec::Linear => write!(f, "linear"),
        }
    }
}

/// Accepts `linear`, `n=2,m=1` (a Φ), `phi:n=2,m=2`, `psi:n=3`, `phi_variant:n=2`.
impl FromStr for YoungSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "linear" {
            return Ok(YoungSpec::Linear);
        }
        let (family, params) = match s.split_once(':') {
            Some((fam, rest)) => (fam, rest),
            None => ("phi", s),
        };
        let mut n = None;
        let mut m = None;
        for kv in params.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::input("young", format!("expected key=value, got `{kv}`")))?;
            let v: u32 = v
                .trim()
                .parse()
                .map_err(|_| Error::input("young", format!("`{k}` must be a nonnegative integer, got `{v}`")))?;
            match k.trim() {
                "n" => n = Some(v),
                "m" => m = Some(v),
                other => return Err(Error::input("young", format!("unknown parameter `{other}`"))),
            }
        }
        let n = n.ok_or_else(|| Error::input("young", "missing n"))?;
        let spec = match family {
            "phi" => YoungSpec::Phi { n, m: m.unwrap_or(1) },
            "psi" if m.is_none() => YoungSpec::Psi { n },
            "phi_variant" if m.is_none() => YoungSpec::PhiVariant { n },
            _ => return Err(Error::input("young", format!("unknown family or parameters in `{s}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[inline]
fn phi_once(n: u32, t: f64) -> f64 {
    if n == 2 {
        t * (E + t).ln()
    } else {
        t * (E + t).ln().powi(n as i32 - 1)
    }
}

/// Evaluates `Φ(t)` without domain checks; `t` must be ≥ 0.
#[inline]
pub fn eval_unchecked(spec: &YoungSpec, t: f64) -> f64 {
    match *spec {
        YoungSpec::Phi { n, m } => {
            let mut x = t;
            for _ in 0..m {
                x = phi_once(n, x);
            }
            x
        }
        YoungSpec::Psi { n } => t.powf(1.0 / (n as f64 - 1.0)).exp_m1(),
        YoungSpec::PhiVariant { n } => {
            let l = if t > 1.0 { t.ln() } else { 0.0 };
            t * (1.0 + l.powi(n as i32 - 1))
        }
        YoungSpec::Linear => t,
    }
}

pub fn young_eval(spec: &YoungSpec, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::input("t", format!("Young functions are defined on [0, ∞), got {t}")));
    }
    Ok(eval_unchecked(spec, t))
}

/// `ln(e + e^l)` without overflow.
#[inline]
fn ln_e_plus_exp(l: f64) -> f64 {
    if l > 1.0 {
        l + (1.0 - l).exp().ln_1p()
    } else {
        1.0 + (l - 1.0).exp().ln_1p()
    }
}

/// `ln Φ(e^l)`, accurate for arguments far beyond the f64 range of `t`.
pub fn young_log_eval(spec: &YoungSpec, l: f64) -> f64 {
    match *spec {
        YoungSpec::Phi { n, m } => {
            let mut x = l;
            for _ in 0..m {
                x += (n as f64 - 1.0) * ln_e_plus_exp(x).ln();
            }
            x
        }
        YoungSpec::Psi { n } => {
            let s = (l / (n as f64 - 1.0)).exp();
            if s > 1.0 {
                s + (-(-s).exp_m1()).ln()
            } else {
                s.exp_m1().ln()
            }
        }
        YoungSpec::PhiVariant { n } => l + (1.0 + l.max(0.0).powi(n as i32 - 1)).ln(),
        YoungSpec::Linear => l,
    }
}

/// The `t ≥ 0` with `Φ(t) = y`, by bracket doubling and bisection.
pub fn young_inverse(spec: &YoungSpec, y: f64) -> Result<f64> {
    if !(y >= 0.0) || y.is_infinite() {
        return Err(Error::input("y", format!("inverse needs a finite y ≥ 0, got {y}")));
    }
    match *spec {
        YoungSpec::Linear => return Ok(y),
        _ if y == 0.0 => return Ok(0.0),
        _ => {}
    }
    let f = |t: f64| eval_unchecked(spec, t);
    let mut hi = 1.0;
    while f(hi) < y {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while f(lo) > y && lo > f64::MIN_POSITIVE {
        lo /= 2.0;
    }
    if f(lo) > y {
        lo = 0.0;
    }
    for _ in 0..MAX_BISECTION {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // the closer endpoint
    Ok(if (f(lo) - y).abs() <= (f(hi) - y).abs() { lo } else { hi })
}

fn restrict(f: &GridFunction, e: &CellSet) -> Result<Vec<f64>> {
    f.grid().check_same(e.grid(), "orlicz")?;
    if e.is_empty() {
        return Err(Error::input("E", "the set must have positive measure"));
    }
    Ok(f.values().iter().zip(e.bits()).filter(|(_, &b)| b).map(|(&v, _)| v).collect())
}

fn modular_of(vals: &[f64], spec: &YoungSpec, lambda: f64) -> f64 {
    vals.iter().map(|&v| eval_unchecked(spec, v / lambda)).sum::<f64>() / vals.len() as f64
}

/// `(1/|E|) ∫_E Φ(f/λ)`.
pub fn modular(f: &GridFunction, e: &CellSet, spec: &YoungSpec, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::input("lambda", format!("λ must be positive and finite, got {lambda}")));
    }
    Ok(modular_of(&restrict(f, e)?, spec, lambda))
}

/// `(1/|E|) ∫_E Φ(f)`.
pub fn mean_young(f: &GridFunction, e: &CellSet, spec: &YoungSpec) -> Result<f64> {
    modular(f, e, spec, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub iterations: usize,
    /// `|modular(value) − 1|`; 0 for the zero function.
    pub residual: f64,
}

fn luxemburg_of(vals: &[f64], spec: &YoungSpec) -> NormResult {
    if vals.iter().all(|&v| v == 0.0) {
        return NormResult {
            value: 0.0,
            iterations: 0,
            residual: 0.0,
        };
    }
    let m = |l: f64| modular_of(vals, spec, l);
    let mut hi = 1.0;
    while m(hi) > 1.0 {
        hi *= 2.0;
    }
    let mut lo = hi;
    while m(lo) <= 1.0 {
        lo /= 2.0;
    }
    let mut iterations = 0;
    let mut best = (hi, (m(hi) - 1.0).abs());
    while iterations < MAX_BISECTION {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = m(mid);
        let r = (v - 1.0).abs();
        if r < best.1 {
            best = (mid, r);
        }
        if r <= NORM_RESIDUAL * 1e-2 {
            break;
        }
        if v > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    NormResult {
        value: best.0,
        iterations,
        residual: best.1,
    }
}

/// `‖f‖_{Φ,E} = inf{λ > 0 : (1/|E|) ∫_E Φ(f/λ) ≤ 1}`.
pub fn luxemburg_norm(f: &GridFunction, e: &CellSet, spec: &YoungSpec) -> Result<NormResult> {
    Ok(luxemburg_of(&restrict(f, e)?, spec))
}

/// Both sides of `(1/|E|)∫_E fg ≤ 2‖f‖_{Φ_n,E}‖g‖_{Ψ_n,E}`.
pub fn holder_check(f: &GridFunction, g: &GridFunction, e: &CellSet, n: u32) -> Result<(f64, f64)> {
    f.grid().check_same(g.grid(), "holder")?;
    let fv = restrict(f, e)?;
    let gv = restrict(g, e)?;
    let lhs = fv.iter().zip(&gv).map(|(a, b)| a * b).sum::<f64>() / fv.len() as f64;
    let nf = luxemburg_of(&fv, &YoungSpec::Phi { n, m: 1 }).value;
    let ng = luxemburg_of(&gv, &YoungSpec::Psi { n }).value;
    Ok((lhs, 2.0 * nf * ng))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyLemmaReport {
    /// Whether `∏‖f_i‖_{Φ,E} > 1`.
    pub applicable: bool,
    /// `∏ ‖f_i‖_{Φ_n,E}`.
    pub lhs_product: f64,
    /// `∏ (1/|E|) ∫_E Φ_n^{(m)}(f_i)`.
    pub rhs_product: f64,
    /// `lhs / rhs`: the smallest constant that works for these inputs.
    pub c_required: f64,
}

/// Compares `∏‖f_i‖_{Φ_n,E}` with `∏ mean_E Φ_n^{(m)}(f_i)` where `m = fs.len()`.
pub fn keylemma_check(fs: &[GridFunction], e: &CellSet, n: u32) -> Result<KeyLemmaReport> {
    if fs.is_empty() {
        return Err(Error::input("functions", "at least one function is required"));
    }
    let m = fs.len() as u32;
    let phi = YoungSpec::Phi { n, m: 1 };
    let iter = YoungSpec::Phi { n, m };
    let mut lhs = 1.0;
    let mut rhs = 1.0;
    for f in fs {
        let vals = restrict(f, e)?;
        lhs *= luxemburg_of(&vals, &phi).value;
        rhs *= modular_of(&vals, &iter, 1.0);
    }
    Ok(KeyLemmaReport {
        applicable: lhs > 1.0,
        lhs_product: lhs,
        rhs_product: rhs,
        c_required: if rhs > 0.0 { lhs / rhs } else { f64::INFINITY },
    })
}
