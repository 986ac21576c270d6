use std::collections::BTreeSet;
use std::path::Path;

use serde_json::{json, Value};

use maxrect::covering::{
    select_alpha_scattered, select_exp_overlap, select_half_overlap, verify_alpha_scattered, verify_half_overlap, Order,
};
use maxrect::harness::{
    bsmf_experiment, geometric_grid, jmz_experiment, jmz_experiment_tensor, jmz_family, linear_fit, probe_test_functions,
    sharpness_sweep, weighted_bound_probe, ExperimentRow, ProbeMode,
};
use maxrect::interp::{l1xlp_bound, strong_type_constant, InterpConstants};
use maxrect::maximal::{compute as compute_map, MaximalRequest};
use maxrect::orlicz::{luxemburg_norm, mean_young};
use maxrect::weights::{bump_constant, multi_ap_constant, nu_of, ExponentVector};
use maxrect::{Algorithm, BasisSpec, MaximalOptions, YoungSpec};

use crate::args::*;
use crate::error::{required, CliError};
use crate::inputs::{cell_set, Inputs};
use crate::output::{value, Report, Table};

pub struct Ctx {
    pub opts: MaximalOptions,
    pub seed: u64,
    pub inputs: Inputs,
}

fn basis(text: &str) -> Result<BasisSpec, CliError> {
    Ok(BasisSpec::parse(text)?)
}

fn young(text: &str) -> Result<YoungSpec, CliError> {
    text.parse::<YoungSpec>()
        .map_err(|e| CliError::Input(format!("--phi: {e}")))
}

fn lambda_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(CliError::Input(format!("--lambda-min/--lambda-max: need 0 < min ≤ max, got {lo}, {hi}")));
    }
    if per_decade == 0 {
        return Err(CliError::Input("--per-decade: must be at least 1".into()));
    }
    let count = ((hi / lo).log10() * per_decade as f64).round() as usize + 1;
    Ok(geometric_grid(lo, hi, count))
}

/// label, params…, lhs, rhs, ratio, extras…, flagged, runtime_ms
fn rows_table(rows: &[ExperimentRow]) -> Table {
    let params: BTreeSet<&String> = rows.iter().flat_map(|r| r.params.keys()).collect();
    let extras: BTreeSet<&String> = rows.iter().flat_map(|r| r.extra.keys()).collect();
    let mut headers = vec!["label".to_string()];
    headers.extend(params.iter().map(|s| s.to_string()));
    headers.extend(["lhs", "rhs", "ratio"].map(String::from));
    headers.extend(extras.iter().map(|s| s.to_string()));
    headers.extend(["flagged", "runtime_ms"].map(String::from));
    let rows = rows
        .iter()
        .map(|r| {
            let mut v = vec![json!(r.label)];
            v.extend(params.iter().map(|k| value(&r.params.get(*k))));
            v.extend([json!(r.lhs), json!(r.rhs), value(&r.ratio)]);
            v.extend(extras.iter().map(|k| value(&r.extra.get(*k))));
            v.extend([json!(r.flagged), json!(r.runtime_ms)]);
            v
        })
        .collect();
    Table { headers, rows }
}

pub fn compute(ctx: &mut Ctx, a: &ComputeArgs) -> Result<Report, CliError> {
    let mut fs = ctx.inputs.functions(&a.f, "f")?;
    if fs.is_empty() {
        return Err(CliError::Input("missing required value `--f`".into()));
    }
    if let Some(m) = a.m {
        if fs.len() == 1 && m > 1 {
            fs = vec![fs[0].clone(); m];
        } else if m != fs.len() {
            return Err(CliError::Input(format!("--m: {m} does not match the {} functions given by --f", fs.len())));
        }
    }
    let weight = a.weight.as_deref().map(|w| ctx.inputs.function(w, "weight")).transpose()?;
    let algorithm: Algorithm = a.algorithm.parse()?;
    let req = MaximalRequest {
        functions: fs,
        weight,
        spec: basis(&a.basis)?,
        options: MaximalOptions {
            algorithm,
            ..ctx.opts.clone()
        },
    };
    let map = compute_map(&req)?;
    let gbox = map.grid();
    let ndim = gbox.ndim();
    let mut headers: Vec<String> = (0..ndim).map(|k| format!("i{k}")).collect();
    headers.extend((0..ndim).map(|k| format!("x{k}")));
    headers.push("value".into());
    let rows = (0..gbox.cell_count())
        .map(|flat| {
            let idx = gbox.multi_index(flat);
            let mut r: Vec<Value> = idx[..ndim].iter().map(|&i| json!(i)).collect();
            r.extend(gbox.cell_center(&idx[..ndim]).into_iter().map(|x| json!(x)));
            r.push(json!(map.values()[flat]));
            r
        })
        .collect();
    let mut report = Report::table(value(&map.to_file()), Table { headers, rows });
    report.default_format = crate::args::Format::Json;
    Ok(report)
}

pub fn orlicz_norm(ctx: &mut Ctx, a: &NormArgs) -> Result<Report, CliError> {
    let spec = young(&a.phi)?;
    let f = ctx.inputs.function(&required(a.f.clone(), "f")?, "f")?;
    let e = cell_set(&a.set, &f)?;
    let norm = luxemburg_norm(&f, &e, &spec)?;
    let mean = mean_young(&f, &e, &spec)?;
    Ok(Report::json(json!({
        "phi": spec.to_string(),
        "norm": norm.value,
        "iterations": norm.iterations,
        "residual": norm.residual,
        "mean_young": mean,
        "set_measure": e.measure(),
    })))
}

pub fn weights_apvec(ctx: &mut Ctx, a: &ApvecArgs) -> Result<Report, CliError> {
    let e = ExponentVector::parse(&required(a.p.clone(), "p")?)?;
    let ws = ctx.inputs.functions(&a.w, "w")?;
    if ws.len() != e.m() {
        return Err(CliError::Input(format!("--w: {} weights given for {} exponents", ws.len(), e.m())));
    }
    let spec = basis(&a.basis)?;
    let nu = a.nu.as_deref().map(|p| ctx.inputs.function(p, "nu")).transpose()?;
    let multi = multi_ap_constant(&ws, &e, &spec, nu.as_ref(), &ctx.opts.budget)?;
    let mut out = json!({
        "constant": multi.value,
        "constant_name": "multi_ap",
        "attaining_rect": multi.attaining_rect,
        "sets_scanned": multi.sets_scanned,
        "p": e.p(),
        "exponents": e.ps(),
    });
    if let Some(r) = a.bump_r {
        let target = match &nu {
            Some(v) => v.clone(),
            None => nu_of(&ws, &e)?,
        };
        let b = bump_constant(&target, &ws, &e, r, &spec, &ctx.opts.budget)?;
        out["bump"] = json!({ "r": r, "value": b.value, "attaining_rect": b.attaining_rect, "sets_scanned": b.sets_scanned });
    }
    Ok(Report::json(out))
}

pub fn cover(ctx: &mut Ctx, a: &CoverArgs) -> Result<Report, CliError> {
    let (gbox, input) = ctx.inputs.rects(&required(a.rects.clone(), "rects")?, "rects")?;
    let order: Order = a.order.parse()?;
    // same stable order as covering::ordered, kept as a permutation so output indices refer to the input file
    let mut perm: Vec<usize> = (0..input.len()).collect();
    if order == Order::ByMeasureDesc {
        perm.sort_by_key(|&k| std::cmp::Reverse(input[k].cell_count()));
    }
    let rects: Vec<_> = perm.iter().map(|&k| input[k]).collect();
    let (res, check) = match a.method.as_str() {
        "half" => {
            let res = select_half_overlap(&gbox, &rects)?;
            let c = verify_half_overlap(&gbox, &rects, &res, &[1, 2])?;
            let v = json!({ "violations": c.violations(), "detail": value(&c) });
            (res, v)
        }
        "scattered" => {
            let lambda = required(a.lambda, "lambda")?;
            let res = select_alpha_scattered(&gbox, &rects, lambda)?;
            let c = verify_alpha_scattered(&gbox, &rects, &res, lambda)?;
            let v = json!({ "violations": c.violations(), "detail": value(&c) });
            (res, v)
        }
        "exp" => (select_exp_overlap(&gbox, &rects, a.n, a.delta0)?, Value::Null),
        m => return Err(CliError::Input(format!("--method: expected half|scattered|exp, got `{m}`"))),
    };
    let back = |v: &[usize]| v.iter().map(|&k| perm[k]).collect::<Vec<_>>();
    let mut overlap = vec![0.0; input.len()];
    for (k, &r) in res.overlap_ratios.iter().enumerate() {
        overlap[perm[k]] = r;
    }
    Ok(Report::json(json!({
        "method": a.method,
        "order": a.order,
        "selected": back(&res.selected),
        "rejected": back(&res.rejected),
        "overlap_ratios": overlap,
        "part_measures": res.disjoint_parts.iter().map(|p| p.measure()).collect::<Vec<_>>(),
        "alpha": res.alpha,
        "union_ratio": res.union_ratio,
        "psi_norm": res.psi_norm,
        "check": check,
    })))
}

pub fn interp_l1lp(ctx: &mut Ctx, a: &L1lpArgs) -> Result<Report, CliError> {
    let f = ctx.inputs.function(&required(a.f.clone(), "f")?, "f")?;
    let g = ctx.inputs.function(&required(a.g.clone(), "g")?, "g")?;
    let n = a.n.unwrap_or(f.grid().ndim().max(2) as u32);
    let b = l1xlp_bound(
        &f,
        &g,
        required(a.alpha, "alpha")?,
        required(a.b1, "B1")?,
        required(a.b2, "B2")?,
        required(a.p, "p")?,
        n,
    )?;
    Ok(Report::json(value(&b)))
}

pub fn interp_strong(_ctx: &mut Ctx, a: &StrongArgs) -> Result<Report, CliError> {
    let c = InterpConstants {
        b1: required(a.b1, "B1")?,
        b2: required(a.b2, "B2")?,
        b: required(a.b, "B")?,
        a: required(a.a, "A")?,
        s1: required(a.s1, "s1")?,
        s2: required(a.s2, "s2")?,
        s: a.s,
        p: required(a.p, "p")?,
    };
    let r = strong_type_constant(&c, &young(&a.phi)?)?;
    Ok(Report::json(value(&r)))
}

fn label(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string())
}

pub fn jmz(ctx: &mut Ctx, a: &JmzArgs) -> Result<Report, CliError> {
    let lambdas = lambda_grid(a.lambda_min, a.lambda_max, a.per_decade)?;
    let rows = if a.family {
        if !a.f.is_empty() {
            return Err(CliError::Input("--family: cannot be combined with --f".into()));
        }
        if a.cells_per_unit == 0 {
            return Err(CliError::Input("--cells-per-unit: must be at least 1".into()));
        }
        let fam = jmz_family(a.lambda_min, a.cells_per_unit)?;
        jmz_experiment_tensor(&fam, &lambdas, a.n, &ctx.opts)?
    } else {
        if a.f.is_empty() {
            return Err(CliError::Input("missing required value `--f` (or pass --family)".into()));
        }
        let fs = ctx.inputs.functions(&a.f, "f")?;
        let named: Vec<_> = a.f.iter().map(|p| label(p)).zip(fs).collect();
        jmz_experiment(&named, &lambdas, a.n, &ctx.opts)?
    };
    let json = json!({ "rows": rows, "empirical_constant": maxrect::harness::empirical_constant(&rows) });
    Ok(Report::table(json, rows_table(&rows)))
}

pub fn bsmf(ctx: &mut Ctx, a: &BsmfArgs) -> Result<Report, CliError> {
    if a.f.is_empty() {
        return Err(CliError::Input("missing required value `--f`".into()));
    }
    let fs = ctx.inputs.functions(&a.f, "f")?;
    let lambdas = lambda_grid(a.lambda_min, a.lambda_max, a.per_decade)?;
    let rep = bsmf_experiment(&fs, &lambdas, a.n, &ctx.opts)?;
    let mut report = Report::table(value(&rep), rows_table(&rep.rows));
    if !rep.self_check.passed() {
        report.check_failure = Some(format!(
            "self-check failed: identity_exact = {}, tensor_bound_violations = {}",
            rep.self_check.identity_exact, rep.self_check.tensor_bound_violations
        ));
    }
    Ok(report)
}

pub fn sharpness(_ctx: &mut Ctx, a: &SharpnessArgs) -> Result<Report, CliError> {
    if !(a.n_max >= 1.0 && a.n_max.is_finite()) {
        return Err(CliError::Input(format!("--Nmax: must be a finite number ≥ 1, got {}", a.n_max)));
    }
    if !(a.base > 1.0 && a.base.is_finite()) {
        return Err(CliError::Input(format!("--base: must exceed 1, got {}", a.base)));
    }
    let mut ns = vec![1.0];
    while ns[ns.len() - 1] * a.base <= a.n_max * (1.0 + 1e-12) {
        let next = ns[ns.len() - 1] * a.base;
        ns.push(next);
    }
    let rows = sharpness_sweep(&ns)?;
    let headers = ["N", "lambda", "lhs", "rhs_phi1", "rhs_phi2", "ratio1", "ratio2", "runtime_ms"].map(String::from).to_vec();
    let table = rows
        .iter()
        .map(|r| vec![json!(r.n), json!(r.lambda), json!(r.lhs), json!(r.rhs_phi1), json!(r.rhs_phi2), json!(r.ratio1), json!(r.ratio2), json!(r.runtime_ms)])
        .collect();
    let x: Vec<f64> = rows.iter().map(|r| r.n.ln().sqrt()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.ratio1).collect();
    let fit = (rows.len() >= 3).then(|| linear_fit(&x, &y));
    let r2: Vec<f64> = rows.iter().map(|r| r.ratio2).collect();
    let spread = r2.iter().cloned().fold(f64::MIN, f64::max) / r2.iter().cloned().fold(f64::MAX, f64::min);
    let json = json!({ "rows": rows, "ratio1_fit_sqrt_log_n": fit, "ratio2_spread": spread });
    Ok(Report::table(json, Table { headers, rows: table }))
}

pub fn probe(ctx: &mut Ctx, a: &ProbeArgs) -> Result<Report, CliError> {
    let mode: ProbeMode = a.mode.parse()?;
    let e = ExponentVector::parse(&required(a.p.clone(), "p")?)?;
    let ws = ctx.inputs.functions(&a.w, "w")?;
    if ws.len() != e.m() {
        return Err(CliError::Input(format!("--w: {} weights given for {} exponents", ws.len(), e.m())));
    }
    let nu = a.nu.as_deref().map(|p| ctx.inputs.function(p, "nu")).transpose()?;
    if a.tests == 0 {
        return Err(CliError::Input("--tests: must be at least 1".into()));
    }
    let tests = probe_test_functions(ws[0].grid(), e.m(), a.tests, ctx.seed);
    let rep = weighted_bound_probe(&ws, &e, &basis(&a.basis)?, &tests, mode, nu.as_ref(), a.bump_r, &ctx.opts)?;
    Ok(Report::table(value(&rep), rows_table(&rep.rows)))
}
