//! Weight constants over a basis: `A_{p,B}`, the multilinear `A_{P⃗,B}` in
//! one- and two-weight form, the power bump, and an empirical probe of the
//! covering condition `w({M_B χ_E > λ}) ≤ c(λ) w(E)`.
//!
//! Every constant is a maximum over the finite cell-aligned family, i.e. a
//! lower bound for the continuous supremum. Reports carry the maximizing set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, BasisBudget, BasisSpec, Rect};
use crate::error::{Error, Result};
use crate::grid::{set_mass, CellSet, GridFunction, SummedTable, MAX_DIM};
use crate::maximal::{maximal_map, MaximalOptions};

/// `(p_1, …, p_m)` with `1/p = Σ 1/p_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ExponentVector {
    ps: Vec<f64>,
    p: f64,
}

impl TryFrom<Vec<f64>> for ExponentVector {
    type Error = Error;
    fn try_from(ps: Vec<f64>) -> Result<Self> {
        ExponentVector::new(ps)
    }
}

impl From<ExponentVector> for Vec<f64> {
    fn from(e: ExponentVector) -> Self {
        e.ps
    }
}

impl ExponentVector {
    pub fn new(ps: Vec<f64>) -> Result<Self> {
        if ps.is_empty() {
            return Err(Error::input("p", "at least one exponent is required"));
        }
        if let Some(bad) = ps.iter().find(|&&p| !(p >= 1.0 && p.is_finite())) {
            return Err(Error::input("p", format!("exponents must lie in [1, ∞), got {bad}")));
        }
        let p = 1.0 / ps.iter().map(|p| 1.0 / p).sum::<f64>();
        Ok(ExponentVector { ps, p })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ps = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::input("p", format!("`{s}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        ExponentVector::new(ps)
    }

    pub fn ps(&self) -> &[f64] {
        &self.ps
    }

    pub fn m(&self) -> usize {
        self.ps.len()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `p_j' = p_j/(p_j − 1)`; infinite for `p_j = 1`.
    pub fn conjugate(&self, j: usize) -> f64 {
        let pj = self.ps[j];
        if pj == 1.0 {
            f64::INFINITY
        } else {
            pj / (pj - 1.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub value: f64,
    pub attaining_rect: Option<Rect>,
    pub sets_scanned: u64,
}

/// Rejects weights that are not strictly positive.
pub fn check_weight(w: &GridFunction, field: &str) -> Result<()> {
    if let Some(k) = w.values().iter().position(|&v| !(v > 0.0)) {
        let idx = w.grid().multi_index(k);
        return Err(Error::input(
            field,
            format!("weights must be strictly positive; cell {:?} holds {}", &idx[..w.grid().ndim()], w.values()[k]),
        ));
    }
    Ok(())
}

/// Range minimum queries over rectangles in `O(2^n)` per query: an n-d sparse
/// table holding minima over all boxes with power-of-two sides.
#[derive(Clone, Debug)]
pub struct MinTable {
    dims: [usize; MAX_DIM],
    levels: [usize; MAX_DIM],
    tables: Vec<Vec<f64>>,
}

fn floor_log2(x: usize) -> usize {
    (usize::BITS - 1 - x.leading_zeros()) as usize
}

impl MinTable {
    pub fn new(f: &GridFunction) -> Self {
        let dims = f.grid().padded_dims();
        let levels = [floor_log2(dims[0]) + 1, floor_log2(dims[1]) + 1, floor_log2(dims[2]) + 1];
        let strides = [dims[1] * dims[2], dims[2], 1];
        let n = f.values().len();
        let mut tables: Vec<Vec<f64>> = Vec::with_capacity(levels.iter().product());
        for k0 in 0..levels[0] {
            for k1 in 0..levels[1] {
                for k2 in 0..levels[2] {
                    let k = [k0, k1, k2];
                    let t = match k.iter().position(|&x| x > 0) {
                        None => f.values().to_vec(),
                        Some(axis) => {
                            let mut prev_k = k;
                            prev_k[axis] -= 1;
                            let prev = &tables[Self::slot(levels, prev_k)];
                            let half = 1usize << prev_k[axis];
                            let off = half * strides[axis];
                            let mut t = vec![f64::INFINITY; n];
                            for (i, v) in t.iter_mut().enumerate() {
                                let c = (i / strides[axis]) % dims[axis];
                                if c + 2 * half <= dims[axis] {
                                    *v = prev[i].min(prev[i + off]);
                                }
                            }
                            t
                        }
                    };
                    tables.push(t);
                }
            }
        }
        MinTable { dims, levels, tables }
    }

    fn slot(levels: [usize; MAX_DIM], k: [usize; MAX_DIM]) -> usize {
        (k[0] * levels[1] + k[1]) * levels[2] + k[2]
    }

    /// `min_{c ∈ r} f(c)`.
    pub fn min(&self, r: &Rect) -> f64 {
        let lo = r.lo_padded();
        let hi = r.hi_padded();
        let mut k = [0; MAX_DIM];
        let mut starts = [[0; 2]; MAX_DIM];
        for a in 0..MAX_DIM {
            k[a] = floor_log2(hi[a] - lo[a]);
            starts[a] = [lo[a], hi[a] - (1 << k[a])];
        }
        let t = &self.tables[Self::slot(self.levels, k)];
        let mut m = f64::INFINITY;
        for &i in &starts[0] {
            for &j in &starts[1] {
                for &l in &starts[2] {
                    m = m.min(t[(i * self.dims[1] + j) * self.dims[2] + l]);
                }
            }
        }
        m
    }
}

/// Max of `value` over the basis; ties go to the smallest rectangle in `Rect` order.
fn scan_max<F>(basis: &Basis, budget: &BasisBudget, value: F) -> Result<ConstantReport>
where
    F: Fn(&Rect) -> f64 + Sync,
{
    let count = basis.count();
    budget.check(count)?;
    let better = |a: (f64, Option<Rect>), b: (f64, Option<Rect>)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1.is_some() && (a.1.is_none() || b.1 < a.1)) {
            b
        } else {
            a
        }
    };
    let best = (0..basis.shapes().len())
        .into_par_iter()
        .map(|s| {
            basis
                .shape_members(s)
                .fold((f64::NEG_INFINITY, None), |acc, r| better(acc, (value(&r), Some(r))))
        })
        .reduce(|| (f64::NEG_INFINITY, None), better);
    Ok(ConstantReport {
        value: best.0.max(0.0),
        attaining_rect: best.1,
        sets_scanned: count,
    })
}

/// Per-weight factor `(avg_B w^{1−p'})^{p/p'}`, or `(inf_B w)^{−p}` when the exponent is 1.
enum DualFactor {
    Power { table: SummedTable, outer: f64 },
    Inf { table: MinTable, p: f64 },
}

impl DualFactor {
    fn new(w: &GridFunction, pj: f64, p: f64, r: f64) -> Result<Self> {
        if pj == 1.0 {
            return Ok(DualFactor::Inf {
                table: MinTable::new(w),
                p,
            });
        }
        let pc = pj / (pj - 1.0);
        let inner = (1.0 - pc) * r;
        let dual = w.map(|v| v.powf(inner))?;
        Ok(DualFactor::Power {
            table: dual.prefix_sums(),
            outer: p / (pc * r),
        })
    }

    #[inline]
    fn eval(&self, b: &Rect) -> f64 {
        match self {
            DualFactor::Power { table, outer } => table.rect_mean(b).powf(*outer),
            DualFactor::Inf { table, p } => table.min(b).powf(-p),
        }
    }
}

/// `[w]_{A_{p,B}}`: for `p > 1` the max over `B` of `avg_B(w)·avg_B(w^{1−p'})^{p−1}`;
/// for `p = 1` the max over cells of `M_B w / w`.
pub fn ap_constant(w: &GridFunction, p: f64, spec: &BasisSpec, budget: &BasisBudget) -> Result<ConstantReport> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::input("p", format!("p must lie in [1, ∞), got {p}")));
    }
    check_weight(w, "w")?;
    let basis = Basis::for_grid(spec, w.grid())?;
    let avg = w.prefix_sums();
    let dual = DualFactor::new(w, p, p, 1.0)?;
    if p == 1.0 {
        // max_c max_{B∋c} avg_B w / w(c) = max_B avg_B w / min_B w
        let DualFactor::Inf { table, .. } = &dual else { unreachable!() };
        return scan_max(&basis, budget, |b| avg.rect_mean(b) / table.min(b));
    }
    scan_max(&basis, budget, |b| avg.rect_mean(b) * dual.eval(b))
}

/// `ν_{w⃗} = ∏ w_j^{p/p_j}`.
pub fn nu_of(ws: &[GridFunction], e: &ExponentVector) -> Result<GridFunction> {
    check_vector(ws, e)?;
    let p = e.p();
    let mut vals = vec![1.0; ws[0].values().len()];
    for (w, &pj) in ws.iter().zip(e.ps()) {
        let ex = p / pj;
        for (v, &x) in vals.iter_mut().zip(w.values()) {
            *v *= if ex == 1.0 { x } else { x.powf(ex) };
        }
    }
    GridFunction::new(ws[0].grid().clone(), vals)
}

fn check_vector(ws: &[GridFunction], e: &ExponentVector) -> Result<()> {
    if ws.len() != e.m() {
        return Err(Error::input("w", format!("{} weights for {} exponents", ws.len(), e.m())));
    }
    for (j, w) in ws.iter().enumerate() {
        ws[0].grid().check_same(w.grid(), "weight vector")?;
        check_weight(w, &format!("w[{j}]"))?;
    }
    Ok(())
}

/// `[w⃗]_{A_{P⃗,B}}`; with `nu` given, the two-weight form with that `ν`.
pub fn multi_ap_constant(
    ws: &[GridFunction],
    e: &ExponentVector,
    spec: &BasisSpec,
    nu: Option<&GridFunction>,
    budget: &BasisBudget,
) -> Result<ConstantReport> {
    bumped(ws, e, spec, nu, 1.0, budget)
}

/// The power-bump quantity: inner dual averages of `w_j^{(1−p_j')r}` raised to `p/(p_j' r)`.
pub fn bump_constant(
    nu: &GridFunction,
    ws: &[GridFunction],
    e: &ExponentVector,
    r: f64,
    spec: &BasisSpec,
    budget: &BasisBudget,
) -> Result<ConstantReport> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::input("r", format!("bump exponent must exceed 1, got {r}")));
    }
    bumped(ws, e, spec, Some(nu), r, budget)
}

fn bumped(
    ws: &[GridFunction],
    e: &ExponentVector,
    spec: &BasisSpec,
    nu: Option<&GridFunction>,
    r: f64,
    budget: &BasisBudget,
) -> Result<ConstantReport> {
    check_vector(ws, e)?;
    let nu = match nu {
        Some(v) => {
            ws[0].grid().check_same(v.grid(), "nu")?;
            check_weight(v, "nu")?;
            v.clone()
        }
        None => nu_of(ws, e)?,
    };
    let basis = Basis::for_grid(spec, nu.grid())?;
    let avg = nu.prefix_sums();
    let duals = ws
        .iter()
        .zip(e.ps())
        .map(|(w, &pj)| DualFactor::new(w, pj, e.p(), r))
        .collect::<Result<Vec<_>>>()?;
    scan_max(&basis, budget, |b| {
        let mut v = avg.rect_mean(b);
        for d in &duals {
            v *= d.eval(b);
        }
        v
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionAReport {
    pub c_hat: f64,
    pub worst_e: Option<CellSet>,
    pub trials: usize,
    /// Samples with `w(E) = 0`.
    pub skipped: usize,
}

/// `w({M_B χ_E > λ}) / w(E)`; `None` when `w(E) = 0`.
pub fn condition_a_ratio(
    w: &GridFunction,
    e: &CellSet,
    spec: &BasisSpec,
    lambda: f64,
    opts: &MaximalOptions,
) -> Result<Option<f64>> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::input("lambda", format!("λ must lie in (0,1), got {lambda}")));
    }
    let we = set_mass(w, e)?;
    if we == 0.0 {
        return Ok(None);
    }
    let m = maximal_map(&e.indicator(), spec, opts)?;
    Ok(Some(set_mass(w, &m.superlevel_set(lambda))? / we))
}

/// A union of 1..=`max_rects` uniformly random rectangles.
pub fn random_union(gbox: &crate::grid::GridBox, rng: &mut ChaCha8Rng, max_rects: usize) -> CellSet {
    let mut e = CellSet::empty(gbox.clone());
    let k = rng.gen_range(1..=max_rects.max(1));
    for _ in 0..k {
        let mut lo = [0; MAX_DIM];
        let mut hi = [1; MAX_DIM];
        for (a, &d) in gbox.dims().iter().enumerate() {
            lo[a] = rng.gen_range(0..d);
            hi[a] = rng.gen_range(lo[a] + 1..=d);
        }
        let n = gbox.ndim();
        e.insert_rect(&Rect::new(&lo[..n], &hi[..n]).expect("nonempty"))
            .expect("inside grid");
    }
    e
}

/// Empirical `c(λ)`: the worst ratio over `trials` random unions of rectangles.
pub fn condition_a_probe(
    w: &GridFunction,
    spec: &BasisSpec,
    lambda: f64,
    seed: u64,
    trials: usize,
    max_rects: usize,
    opts: &MaximalOptions,
) -> Result<ConditionAReport> {
    if trials == 0 {
        return Err(Error::input("trials", "at least one trial is required"));
    }
    check_weight(w, "w")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConditionAReport {
        c_hat: 0.0,
        worst_e: None,
        trials,
        skipped: 0,
    };
    for _ in 0..trials {
        let e = random_union(w.grid(), &mut rng, max_rects);
        match condition_a_ratio(w, &e, spec, lambda, opts)? {
            None => report.skipped += 1,
            Some(r) if r > report.c_hat => {
                report.c_hat = r;
                report.worst_e = Some(e);
            }
            Some(_) => {}
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridBox;

    fn budget() -> BasisBudget {
        BasisBudget::default()
    }

    fn random_weight(rng: &mut ChaCha8Rng, dims: &[usize]) -> GridFunction {
        let b = GridBox::unit(dims).unwrap();
        let n = b.cell_count();
        GridFunction::new(b, (0..n).map(|_| rng.gen_range(0.05..3.0)).collect()).unwrap()
    }

    fn power_weight(dims: usize, alpha: f64) -> GridFunction {
        let b = GridBox::new(vec![0.0], vec![1.0], vec![dims]).unwrap();
        GridFunction::from_sampler(b, |x| x[0].powf(alpha)).unwrap()
    }

    /// Direct evaluation of the one-weight quantity over every member.
    fn direct_multi(ws: &[GridFunction], e: &ExponentVector, spec: &BasisSpec) -> f64 {
        let basis = Basis::for_grid(spec, ws[0].grid()).unwrap();
        let st = ws[0].grid().strides();
        let p = e.p();
        let mut best = 0.0f64;
        for b in basis.members() {
            let cells: Vec<usize> = {
                let mut v = Vec::new();
                b.for_each_cell(|c| v.push(c[0] * st[0] + c[1] * st[1] + c[2]));
                v
            };
            let n = cells.len() as f64;
            let nu: f64 = cells
                .iter()
                .map(|&k| ws.iter().zip(e.ps()).map(|(w, pj)| w.values()[k].powf(p / pj)).product::<f64>())
                .sum::<f64>()
                / n;
            let mut v = nu;
            for (j, w) in ws.iter().enumerate() {
                let pj = e.ps()[j];
                if pj == 1.0 {
                    let inf = cells.iter().map(|&k| w.values()[k]).fold(f64::INFINITY, f64::min);
                    v *= inf.powf(-p);
                } else {
                    let pc = e.conjugate(j);
                    let a: f64 = cells.iter().map(|&k| w.values()[k].powf(1.0 - pc)).sum::<f64>() / n;
                    v *= a.powf(p / pc);
                }
            }
            best = best.max(v);
        }
        best
    }

    #[test]
    fn exponent_vector() {
        let e = ExponentVector::parse("2, 2").unwrap();
        assert_eq!(e.p(), 1.0);
        assert_eq!(e.conjugate(0), 2.0);
        let e = ExponentVector::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(e.conjugate(0), f64::INFINITY);
        assert!((e.p() - 0.75).abs() < 1e-15);
        assert!(ExponentVector::new(vec![0.5]).is_err());
        assert!(ExponentVector::parse("2,x").is_err());
    }

    #[test]
    fn min_table_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for dims in [vec![13usize], vec![9, 7], vec![5, 6, 3]] {
            let w = random_weight(&mut rng, &dims);
            let t = MinTable::new(&w);
            let basis = Basis::for_grid(&BasisSpec::Rectangles, w.grid()).unwrap();
            let st = w.grid().strides();
            for r in basis.members() {
                let mut m = f64::INFINITY;
                r.for_each_cell(|c| m = m.min(w.values()[c[0] * st[0] + c[1] * st[1] + c[2]]));
                assert_eq!(t.min(&r), m);
            }
        }
    }

    #[test]
    fn nu_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let b = GridBox::unit(&[4, 4]).unwrap();
        let ones = GridFunction::constant(b, 1.0).unwrap();
        let e = ExponentVector::new(vec![2.0, 3.0]).unwrap();
        assert!(nu_of(&[ones.clone(), ones.clone()], &e).unwrap().values().iter().all(|&v| v == 1.0));
        let w1 = random_weight(&mut rng, &[4, 4]);
        let w2 = random_weight(&mut rng, &[4, 4]);
        let nu = nu_of(&[w1.clone(), w2.clone()], &ExponentVector::new(vec![2.0, 2.0]).unwrap()).unwrap();
        for k in 0..16 {
            let want = (w1.values()[k] * w2.values()[k]).sqrt();
            assert!((nu.values()[k] - want).abs() < 1e-14 * want);
        }
        let nu = nu_of(&[w1.clone(), w1.clone()], &ExponentVector::new(vec![1.5, 4.0]).unwrap()).unwrap();
        for k in 0..16 {
            assert!((nu.values()[k] - w1.values()[k]).abs() < 1e-14 * w1.values()[k]);
        }
    }

    #[test]
    fn unit_weight_gives_one() {
        for (dims, spec) in [
            (vec![8usize, 8], BasisSpec::Rectangles),
            (vec![8, 8], BasisSpec::Cubes),
            (vec![8, 8], BasisSpec::DyadicCubes),
            (vec![8, 8], BasisSpec::Eccentricity { n: 2.0 }),
            (vec![3, 3, 9], BasisSpec::ZygmundSts),
        ] {
            let w = GridFunction::constant(GridBox::unit(&dims).unwrap(), 1.0).unwrap();
            for p in [1.0, 1.5, 2.0, 4.0] {
                assert_eq!(ap_constant(&w, p, &spec, &budget()).unwrap().value, 1.0, "{spec:?} p={p}");
            }
            let e = ExponentVector::new(vec![2.0, 1.0]).unwrap();
            assert_eq!(multi_ap_constant(&[w.clone(), w.clone()], &e, &spec, None, &budget()).unwrap().value, 1.0);
            assert_eq!(bump_constant(&w, &[w.clone(), w.clone()], &e, 1.7, &spec, &budget()).unwrap().value, 1.0);
        }
    }

    #[test]
    fn a1_matches_maximal_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for spec in [BasisSpec::Rectangles, BasisSpec::Cubes, BasisSpec::DyadicCubes] {
            let w = random_weight(&mut rng, &[8, 8]);
            let m = maximal_map(&w, &spec, &MaximalOptions::default()).unwrap();
            let want = m.values().iter().zip(w.values()).map(|(a, b)| a / b).fold(0.0, f64::max);
            assert_eq!(ap_constant(&w, 1.0, &spec, &budget()).unwrap().value, want);
        }
    }

    #[test]
    fn multi_matches_direct_and_override() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for ps in [vec![2.0, 2.0], vec![1.5, 3.0], vec![1.0, 2.0], vec![2.0, 3.0, 4.0]] {
            let e = ExponentVector::new(ps).unwrap();
            let ws: Vec<_> = (0..e.m()).map(|_| random_weight(&mut rng, &[6, 6])).collect();
            let got = multi_ap_constant(&ws, &e, &BasisSpec::Rectangles, None, &budget()).unwrap();
            let want = direct_multi(&ws, &e, &BasisSpec::Rectangles);
            assert!((got.value - want).abs() <= 1e-12 * want, "{} vs {want}", got.value);
            let nu = nu_of(&ws, &e).unwrap();
            let with = multi_ap_constant(&ws, &e, &BasisSpec::Rectangles, Some(&nu), &budget()).unwrap();
            assert_eq!(got, with);
        }
    }

    #[test]
    fn equal_weights_reduce_to_linear_form() {
        // w1 = w2 = w, p1 = p2 = 2: ν = w, and each factor is avg(w^{-1})^{1/2}, so the
        // product is the A_2 quantity of w
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let w = random_weight(&mut rng, &[7, 7]);
        let e = ExponentVector::new(vec![2.0, 2.0]).unwrap();
        let multi = multi_ap_constant(&[w.clone(), w.clone()], &e, &BasisSpec::Rectangles, None, &budget()).unwrap();
        let lin = ap_constant(&w, 2.0, &BasisSpec::Rectangles, &budget()).unwrap();
        assert!((multi.value - lin.value).abs() <= 1e-12 * lin.value);
    }

    #[test]
    fn scale_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let w = random_weight(&mut rng, &[8, 8]);
        for p in [1.0, 1.5, 3.0] {
            let a = ap_constant(&w, p, &BasisSpec::Rectangles, &budget()).unwrap().value;
            for c in [0.001, 0.3, 7.0, 1e4] {
                let b = ap_constant(&w.scaled(c).unwrap(), p, &BasisSpec::Rectangles, &budget()).unwrap().value;
                assert!((a - b).abs() <= 1e-12 * a, "p={p} c={c}");
            }
        }
    }

    #[test]
    fn bump_dominates_unbumped() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..10 {
            let e = ExponentVector::new(vec![2.0, 3.0]).unwrap();
            let ws = vec![random_weight(&mut rng, &[6, 6]), random_weight(&mut rng, &[6, 6])];
            let nu = random_weight(&mut rng, &[6, 6]);
            let plain = multi_ap_constant(&ws, &e, &BasisSpec::Rectangles, Some(&nu), &budget()).unwrap().value;
            for r in [1.1, 1.5, 3.0] {
                let bump = bump_constant(&nu, &ws, &e, r, &BasisSpec::Rectangles, &budget()).unwrap().value;
                assert!(bump >= plain * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn power_weight_refinement() {
        // inside the A_2 range: stable; outside: grows
        let a = |dims, alpha| ap_constant(&power_weight(dims, alpha), 2.0, &BasisSpec::Rectangles, &budget()).unwrap().value;
        let (c64, c512) = (a(64, 0.5), a(512, 0.5));
        assert!((c512 - c64).abs() < 0.05 * c64, "{c64} {c512}");
        let mut prev = a(64, 3.0);
        for d in [128, 256, 512] {
            let c = a(d, 3.0);
            assert!(c >= 2.0 * prev, "{d}: {c} vs {prev}");
            prev = c;
        }
    }

    #[test]
    fn rejects_nonpositive_weights() {
        let w = GridFunction::zeros(GridBox::unit(&[2, 2]).unwrap());
        assert!(matches!(ap_constant(&w, 2.0, &BasisSpec::Cubes, &budget()), Err(Error::InputDomain { .. })));
        let ok = GridFunction::constant(GridBox::unit(&[2, 2]).unwrap(), 1.0).unwrap();
        assert!(ap_constant(&ok, 0.5, &BasisSpec::Cubes, &budget()).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let w = GridFunction::constant(GridBox::unit(&[8, 8]).unwrap(), 1.0).unwrap();
        let r = ap_constant(&w, 2.0, &BasisSpec::Rectangles, &BasisBudget::new(10).unwrap());
        assert!(matches!(r, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn condition_a_cases() {
        let b = GridBox::unit(&[12, 12]).unwrap();
        let ones = GridFunction::constant(b.clone(), 1.0).unwrap();
        let opts = MaximalOptions::default();
        let e = CellSet::from_rect(b.clone(), &Rect::new(&[3, 4], &[6, 8]).unwrap()).unwrap();
        let near_one = condition_a_ratio(&ones, &e, &BasisSpec::Rectangles, 0.999, &opts).unwrap().unwrap();
        assert_eq!(near_one, 1.0);
        let half = condition_a_ratio(&ones, &e, &BasisSpec::Rectangles, 0.5, &opts).unwrap().unwrap();
        assert!(half > 1.0 && half < 10.0);
        let rep1 = condition_a_probe(&ones, &BasisSpec::Rectangles, 0.5, 1, 30, 1, &opts).unwrap();
        let rep2 = condition_a_probe(&ones, &BasisSpec::Rectangles, 0.5, 2, 30, 1, &opts).unwrap();
        assert!(rep1.c_hat < 10.0 && rep2.c_hat < 10.0);
        assert!(condition_a_ratio(&ones, &e, &BasisSpec::Rectangles, 1.0, &opts).is_err());
        assert_eq!(condition_a_ratio(&ones, &CellSet::empty(b), &BasisSpec::Rectangles, 0.5, &opts).unwrap(), None);
    }
}
