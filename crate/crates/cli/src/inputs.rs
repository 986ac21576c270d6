//! Input files: grid functions, `expr` presets, rectangle families, cell sets.

use serde::Deserialize;
use serde_json::Value;

use maxrect::{CellSet, GridBox, GridFunction, Rect};

use crate::error::CliError;

/// Reads files and remembers their digests for the manifest.
#[derive(Default)]
pub struct Inputs {
    pub digests: Vec<(String, String)>,
}

/// `{"expr": "power|0.5", "lower": [..], "upper": [..], "dims": [..]}`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetFile {
    expr: String,
    lower: Vec<f64>,
    upper: Vec<f64>,
    dims: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RectsFile {
    dims: Vec<usize>,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
    rects: Vec<Rect>,
}

fn in_unit_box(x: &[f64]) -> bool {
    x.iter().all(|&t| (0.0..1.0).contains(&t))
}

/// Evaluates a preset at cell centers.
///
/// `indicator_box` is χ of `[0,1)^n`, `scaled_indicator|N` is `N` times it,
/// `constant[|c]` is `c` (default 1) and `power|α` is `|x|^α`.
pub fn preset(expr: &str, gbox: GridBox) -> maxrect::Result<GridFunction> {
    let (name, arg) = match expr.split_once('|') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (expr.trim(), None),
    };
    let num = |a: Option<&str>| -> maxrect::Result<f64> {
        let a = a.ok_or_else(|| bad(format!("preset `{name}` needs a parameter, as in `{name}|2`")))?;
        a.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(format!("`{a}` is not a finite number")))
    };
    match name {
        "indicator_box" if arg.is_none() => GridFunction::from_sampler(gbox, |x| if in_unit_box(x) { 1.0 } else { 0.0 }),
        "scaled_indicator" => {
            let n = num(arg)?;
            GridFunction::from_sampler(gbox, |x| if in_unit_box(x) { n } else { 0.0 })
        }
        "constant" => {
            let c = if arg.is_some() { num(arg)? } else { 1.0 };
            GridFunction::constant(gbox, c)
        }
        "power" => {
            let a = num(arg)?;
            GridFunction::from_sampler(gbox, |x| x.iter().map(|t| t * t).sum::<f64>().powf(0.5 * a))
        }
        _ => Err(bad(format!(
            "unknown preset `{expr}`; expected indicator_box, constant[|c], power|α or scaled_indicator|N"
        ))),
    }
}

fn bad(reason: String) -> maxrect::Error {
    maxrect::Error::InputDomain {
        field: "expr".into(),
        reason,
    }
}

impl Inputs {
    pub fn read(&mut self, path: &str, field: &str) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("--{field}: cannot read `{path}`: {e}")))?;
        self.digests.push((path.to_string(), crate::output::sha256_hex(&bytes)));
        Ok(bytes)
    }

    fn json(&mut self, path: &str, field: &str) -> Result<Value, CliError> {
        let bytes = self.read(path, field)?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::Input(format!("--{field}: `{path}` is not valid JSON: {e}")))
    }

    /// A grid file, or a preset file carrying `expr` in place of `values`.
    pub fn function(&mut self, path: &str, field: &str) -> Result<GridFunction, CliError> {
        let v = self.json(path, field)?;
        let wrap = |e: String| CliError::Input(format!("--{field}: `{path}`: {e}"));
        if v.get("expr").is_some() {
            let p: PresetFile = serde_json::from_value(v).map_err(|e| wrap(e.to_string()))?;
            let gbox = GridBox::new(p.lower, p.upper, p.dims).map_err(|e| wrap(e.to_string()))?;
            preset(&p.expr, gbox).map_err(|e| wrap(e.to_string()))
        } else {
            let file = serde_json::from_value(v).map_err(|e| wrap(e.to_string()))?;
            GridFunction::from_file(file).map_err(|e| wrap(e.to_string()))
        }
    }

    pub fn functions(&mut self, paths: &[String], field: &str) -> Result<Vec<GridFunction>, CliError> {
        paths.iter().map(|p| self.function(p, field)).collect()
    }

    pub fn rects(&mut self, path: &str, field: &str) -> Result<(GridBox, Vec<Rect>), CliError> {
        let v = self.json(path, field)?;
        let wrap = |e: String| CliError::Input(format!("--{field}: `{path}`: {e}"));
        let f: RectsFile = serde_json::from_value(v).map_err(|e| wrap(e.to_string()))?;
        let d = f.dims.len();
        let lower = f.lower.unwrap_or_else(|| vec![0.0; d]);
        let upper = f.upper.unwrap_or_else(|| vec![1.0; d]);
        let gbox = GridBox::new(lower, upper, f.dims).map_err(|e| wrap(e.to_string()))?;
        Ok((gbox, f.rects))
    }
}

fn indices(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Input(format!("--set: `{s}` is not a cell index"))))
        .collect()
}

/// `all`, `superlevel:λ` (cells where `f > λ`) or `rect:i0,j0:i1,j1` (half-open).
pub fn cell_set(spec: &str, f: &GridFunction) -> Result<CellSet, CliError> {
    let gbox = f.grid().clone();
    if spec == "all" {
        return Ok(CellSet::full(gbox));
    }
    if let Some(l) = spec.strip_prefix("superlevel:") {
        let l: f64 = l
            .parse()
            .map_err(|_| CliError::Input(format!("--set: `{l}` is not a number")))?;
        return Ok(f.superlevel_set(l));
    }
    if let Some(r) = spec.strip_prefix("rect:") {
        let (lo, hi) = r
            .split_once(':')
            .ok_or_else(|| CliError::Input(format!("--set: expected rect:lo:hi, got `{spec}`")))?;
        let r = Rect::new(&indices(lo)?, &indices(hi)?)?;
        return Ok(CellSet::from_rect(gbox, &r)?);
    }
    Err(CliError::Input(format!("--set: expected all, superlevel:λ or rect:lo:hi, got `{spec}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let g = GridBox::new(vec![-1.0, -1.0], vec![3.0, 3.0], vec![4, 4]).unwrap();
        let chi = preset("indicator_box", g.clone()).unwrap();
        assert_eq!(chi.integral(), 1.0);
        assert_eq!(preset("scaled_indicator|8", g.clone()).unwrap().integral(), 8.0);
        assert_eq!(preset("constant", g.clone()).unwrap().max_value(), 1.0);
        assert_eq!(preset("constant|2.5", g.clone()).unwrap().max_value(), 2.5);
        let p = preset("power|2", g.clone()).unwrap();
        assert_eq!(p.get(&[1, 1]), 0.5);
        assert!(preset("power", g.clone()).is_err());
        assert!(preset("nope", g).is_err());
    }
}
