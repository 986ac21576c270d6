//! Maximal operators over a basis: `M_B f`, the weighted `M_{B,w} f` and the
//! multilinear `M_B(f_1, …, f_m)`.
//!
//! Every operator reduces to one problem: each basis member `B` carries a
//! candidate value (a product of averages over `B`), and the output at a cell
//! is the largest candidate among members containing it, or 0 when no member
//! does. Three kernels solve it:
//!
//! * `brute` scans, per cell, every member containing the cell;
//! * the interval kernel handles the full rectangle family in one or two
//!   dimensions by folding suffix maxima over interval endpoints;
//! * the range-max tree ([`sweep::RangeMaxTree`]) handles any other family.
//!
//! Candidate values are computed by the same function in every kernel and
//! maxima are exact, so all kernels agree bit for bit, for any thread count.

pub mod separable;
pub mod sweep;

use rayon::prelude::*;

use crate::basis::{Basis, BasisBudget, BasisSpec, Rect};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, SummedTable, MAX_DIM};
use sweep::RangeMaxTree;

/// Below this many rectangle-cell visits `auto` picks the brute kernel.
pub const AUTO_BRUTE_LIMIT: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Algorithm {
    Brute,
    Sweep,
    #[default]
    Auto,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Algorithm::Brute),
            "sweep" => Ok(Algorithm::Sweep),
            "auto" => Ok(Algorithm::Auto),
            _ => Err(Error::input("algorithm", format!("expected brute|sweep|auto, got `{s}`"))),
        }
    }
}

/// Which fast kernel the sweep path uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKernel {
    /// Interval folding when the basis is all rectangles in 1 or 2 dimensions,
    /// the range-max tree otherwise.
    Preferred,
    /// Always the range-max tree.
    RangeMaxTree,
}

#[derive(Clone, Debug)]
pub struct MaximalOptions {
    pub algorithm: Algorithm,
    pub kernel: SweepKernel,
    pub budget: BasisBudget,
    /// Worker count; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for MaximalOptions {
    fn default() -> Self {
        MaximalOptions {
            algorithm: Algorithm::Auto,
            kernel: SweepKernel::Preferred,
            budget: BasisBudget::default(),
            threads: None,
        }
    }
}

impl MaximalOptions {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        MaximalOptions {
            algorithm,
            ..Default::default()
        }
    }
}

/// A full operator request.
#[derive(Clone, Debug)]
pub struct MaximalRequest {
    pub functions: Vec<GridFunction>,
    pub weight: Option<GridFunction>,
    pub spec: BasisSpec,
    pub options: MaximalOptions,
}

/// Dispatches a request to the linear, weighted or multilinear operator.
pub fn compute(req: &MaximalRequest) -> Result<GridFunction> {
    match (req.functions.len(), &req.weight) {
        (0, _) => Err(Error::input("functions", "at least one function is required")),
        (1, None) => maximal_map(&req.functions[0], &req.spec, &req.options),
        (1, Some(w)) => weighted_maximal_map(&req.functions[0], w, &req.spec, &req.options),
        (_, None) => multilinear_maximal_map(&req.functions, &req.spec, &req.options),
        (_, Some(_)) => Err(Error::input("weight", "weights apply only to the linear operator")),
    }
}

/// `M_B f`.
pub fn maximal_map(f: &GridFunction, spec: &BasisSpec, opts: &MaximalOptions) -> Result<GridFunction> {
    let basis = Basis::for_grid(spec, f.grid())?;
    let table = f.prefix_sums();
    let values = run(&basis, opts, |r| table.rect_mean(r))?;
    Ok(GridFunction::from_raw(f.grid().clone(), values))
}

/// `M_{B,w} f(x) = sup_{B∋x} (∫_B f w) / w(B)`. `w` must be strictly positive.
pub fn weighted_maximal_map(
    f: &GridFunction,
    w: &GridFunction,
    spec: &BasisSpec,
    opts: &MaximalOptions,
) -> Result<GridFunction> {
    f.grid().check_same(w.grid(), "weighted maximal")?;
    if let Some(k) = w.values().iter().position(|&v| v <= 0.0) {
        let idx = w.grid().multi_index(k);
        return Err(Error::input(
            "weight",
            format!("weight must be strictly positive; cell {:?} holds {}", &idx[..w.grid().ndim()], w.values()[k]),
        ));
    }
    let basis = Basis::for_grid(spec, f.grid())?;
    let fw = f.product(w)?.prefix_sums();
    let tw = w.prefix_sums();
    let values = run(&basis, opts, |r| fw.rect_sum(r) / tw.rect_sum(r))?;
    Ok(GridFunction::from_raw(f.grid().clone(), values))
}

/// `M_B(f_1,…,f_m)(x) = sup_{B∋x} ∏_i (1/|B|) ∫_B f_i`.
pub fn multilinear_maximal_map(fs: &[GridFunction], spec: &BasisSpec, opts: &MaximalOptions) -> Result<GridFunction> {
    let first = fs.first().ok_or_else(|| Error::input("functions", "at least one function is required"))?;
    for f in &fs[1..] {
        first.grid().check_same(f.grid(), "multilinear maximal")?;
    }
    let basis = Basis::for_grid(spec, first.grid())?;
    let tables: Vec<SummedTable> = fs.iter().map(|f| f.prefix_sums()).collect();
    let values = run(&basis, opts, |r| product_of_means(&tables, r))?;
    Ok(GridFunction::from_raw(first.grid().clone(), values))
}

/// `∏_i mean_r(f_i)`, multiplied left to right.
#[inline]
pub fn product_of_means(tables: &[SummedTable], r: &Rect) -> f64 {
    let mut p = tables[0].rect_mean(r);
    for t in &tables[1..] {
        p *= t.rect_mean(r);
    }
    p
}

/// Per-cell maximum of `value` over the members of `basis`, using the kernel `opts` selects.
pub fn run<F>(basis: &Basis, opts: &MaximalOptions, value: F) -> Result<Vec<f64>>
where
    F: Fn(&Rect) -> f64 + Sync,
{
    let visits = basis.cell_visits();
    let algorithm = match opts.algorithm {
        Algorithm::Auto if visits < AUTO_BRUTE_LIMIT => Algorithm::Brute,
        Algorithm::Auto => Algorithm::Sweep,
        a => a,
    };
    let work = if algorithm == Algorithm::Brute { visits } else { basis.count() };
    opts.budget.check(work)?;
    let exec = || match algorithm {
        Algorithm::Brute => brute_kernel(basis, &value),
        _ => {
            let interval = opts.kernel == SweepKernel::Preferred
                && *basis.spec() == BasisSpec::Rectangles
                && basis.ndim() <= 2;
            if interval {
                interval_kernel(basis.dims(), &value)
            } else {
                tree_kernel(basis, &value)
            }
        }
    };
    match opts.threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::input("threads", e.to_string()))?;
            Ok(pool.install(exec))
        }
        None => Ok(exec()),
    }
}

/// Scans every member containing each cell.
pub fn brute_kernel<F>(basis: &Basis, value: &F) -> Vec<f64>
where
    F: Fn(&Rect) -> f64 + Sync,
{
    let dims = {
        let mut d = [1; MAX_DIM];
        d[..basis.ndim()].copy_from_slice(basis.dims());
        d
    };
    let total = dims[0] * dims[1] * dims[2];
    (0..total)
        .into_par_iter()
        .map(|flat| {
            let cell = [flat / (dims[1] * dims[2]), (flat / dims[2]) % dims[1], flat % dims[2]];
            let mut best = 0.0;
            for r in basis.members_containing(cell) {
                let v = value(&r);
                if v > best {
                    best = v;
                }
            }
            best
        })
        .collect()
}

/// Every member is max-assigned into a range-max tree. Members are split into
/// contiguous chunks, one tree per worker, merged cellwise at the end.
pub fn tree_kernel<F>(basis: &Basis, value: &F) -> Vec<f64>
where
    F: Fn(&Rect) -> f64 + Sync,
{
    let mut dims = [1; MAX_DIM];
    dims[..basis.ndim()].copy_from_slice(basis.dims());
    let tree = (0..basis.shapes().len())
        .into_par_iter()
        .fold(
            || RangeMaxTree::new(dims),
            |mut tree, s| {
                for r in basis.shape_members(s) {
                    tree.insert(&r, value(&r));
                }
                tree
            },
        )
        .reduce_with(|mut a, b| {
            a.merge(&b);
            a
        })
        .unwrap_or_else(|| RangeMaxTree::new(dims));
    tree.finish()
}

/// `out[u] = max(out[u], max_{l ≤ u < r} v(l, r))` over all intervals of `0..n`.
#[inline]
fn fold_intervals(n: usize, out: &mut [f64], mut v: impl FnMut(usize, usize) -> f64) {
    for l in 0..n {
        let mut run = 0.0;
        for r in (l + 1..=n).rev() {
            let x = v(l, r);
            if x > run {
                run = x;
            }
            if run > out[r - 1] {
                out[r - 1] = run;
            }
        }
    }
}

/// All rectangles in one or two dimensions. For each second-axis interval `J`
/// the first axis is a one-dimensional interval problem; the per-`J` maps are
/// then folded over `J` the same way. `O(d0² d1²)` candidate evaluations.
pub fn interval_kernel<F>(dims: &[usize], value: &F) -> Vec<f64>
where
    F: Fn(&Rect) -> f64 + Sync,
{
    match dims.len() {
        1 => {
            let n = dims[0];
            let mut out = vec![0.0; n];
            fold_intervals(n, &mut out, |l, r| value(&Rect::from_padded([l, 0, 0], [r, 1, 1], 1)));
            out
        }
        2 => {
            let (d0, d1) = (dims[0], dims[1]);
            (0..d1)
                .into_par_iter()
                .fold(
                    || vec![0.0; d0 * d1],
                    |mut out, a| {
                        let mut run = vec![0.0; d0];
                        let mut h = vec![0.0; d0];
                        for b in (a + 1..=d1).rev() {
                            h.iter_mut().for_each(|x| *x = 0.0);
                            fold_intervals(d0, &mut h, |l, r| value(&Rect::from_padded([l, a, 0], [r, b, 1], 2)));
                            for u in 0..d0 {
                                if h[u] > run[u] {
                                    run[u] = h[u];
                                }
                                let cell = &mut out[u * d1 + b - 1];
                                if run[u] > *cell {
                                    *cell = run[u];
                                }
                            }
                        }
                        out
                    },
                )
                .reduce_with(|mut x, y| {
                    for (a, b) in x.iter_mut().zip(&y) {
                        if *b > *a {
                            *a = *b;
                        }
                    }
                    x
                })
                .unwrap_or_else(|| vec![0.0; d0 * d1])
        }
        n => panic!("interval kernel supports 1 or 2 dimensions, got {n}"),
    }
}

/// Range-assign-max of an explicit list of valued rectangles.
pub fn sweep_engine(gbox: &crate::grid::GridBox, items: impl IntoIterator<Item = (Rect, f64)>) -> Result<GridFunction> {
    let mut tree = RangeMaxTree::new(gbox.padded_dims());
    for (r, v) in items {
        if !gbox.contains_rect(&r) {
            return Err(Error::Index(format!("rectangle {:?}..{:?} outside grid", r.lo(), r.hi())));
        }
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::input("value", format!("rectangle value {v} must be finite and nonnegative")));
        }
        tree.insert(&r, v);
    }
    Ok(GridFunction::from_raw(gbox.clone(), tree.finish()))
}

/// `(M f)^m` cellwise, multiplied left to right like [`product_of_means`].
pub fn power_map(g: &GridFunction, m: usize) -> GridFunction {
    let vals = g
        .values()
        .iter()
        .map(|&v| {
            let mut p = v;
            for _ in 1..m {
                p *= v;
            }
            p
        })
        .collect();
    GridFunction::from_raw(g.grid().clone(), vals)
}
