//! Greedy selections from finite families of rectangles.
//!
//! * half-overlap: keep `B` when it meets the union kept so far in less than half its measure;
//! * α-scattered: keep `A` when the overlap is at most `λ|A|`;
//! * exponential overlap: after sorting by decreasing second-axis side, keep `R` when
//!   `∫_R exp((δ₀·Σ_kept χ)^{1/(n−1)}) ≤ 2|R|`.
//!
//! All three are deterministic functions of the input order. Verifiers for the
//! covering properties live next to each selection.

use serde::{Deserialize, Serialize};

use crate::basis::{BasisSpec, Rect};
use crate::error::{Error, Result};
use crate::grid::{set_mass, CellSet, GridBox, GridFunction};
use crate::maximal::{maximal_map, power_map, MaximalOptions};
use crate::orlicz::{luxemburg_norm, YoungSpec};
use crate::weights::condition_a_ratio;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    #[default]
    Given,
    ByMeasureDesc,
}

impl std::str::FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "given" => Ok(Order::Given),
            "by-measure-desc" => Ok(Order::ByMeasureDesc),
            _ => Err(Error::input("order", format!("expected given|by-measure-desc, got `{s}`"))),
        }
    }
}

/// Applies `order` (stable) and returns the reordered family.
pub fn ordered(rects: &[Rect], order: Order) -> Vec<Rect> {
    let mut v = rects.to_vec();
    if order == Order::ByMeasureDesc {
        v.sort_by_key(|r| std::cmp::Reverse(r.cell_count()));
    }
    v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Indices into the input family, in selection order.
    pub selected: Vec<usize>,
    pub rejected: Vec<usize>,
    /// `E_k`: the part of the k-th selected set not covered by earlier selections.
    pub disjoint_parts: Vec<CellSet>,
    /// Per input index: `|B ∩ ∪(selected before B)| / |B|` at the moment `B` was examined.
    pub overlap_ratios: Vec<f64>,
    /// Largest overlap ratio among selected sets: the family is α-scattered for this α.
    pub alpha: f64,
    /// `|∪ all| / |∪ selected|` (exponential-overlap selection only).
    pub union_ratio: Option<f64>,
    /// `‖Σ_selected χ‖_{Ψ_n, ∪ selected}` (exponential-overlap selection only).
    pub psi_norm: Option<f64>,
}

fn check_family(gbox: &GridBox, rects: &[Rect]) -> Result<()> {
    if rects.is_empty() {
        return Err(Error::input("rects", "the family must be nonempty"));
    }
    if let Some((k, r)) = rects.iter().enumerate().find(|(_, r)| !gbox.contains_rect(r)) {
        return Err(Error::Index(format!("rect {k} ({:?}..{:?}) lies outside the grid", r.lo(), r.hi())));
    }
    Ok(())
}

/// Shared greedy loop: `keep(rect, overlap_cells, coverage)` decides each set in turn.
fn greedy(
    gbox: &GridBox,
    rects: &[Rect],
    visit: impl IntoIterator<Item = usize>,
    mut keep: impl FnMut(&Rect, usize, &[u32]) -> bool,
) -> SelectionResult {
    let mut cover = vec![0u32; gbox.cell_count()];
    let st = gbox.strides();
    let mut union = CellSet::empty(gbox.clone());
    let mut res = SelectionResult {
        selected: Vec::new(),
        rejected: Vec::new(),
        disjoint_parts: Vec::new(),
        overlap_ratios: vec![0.0; rects.len()],
        alpha: 0.0,
        union_ratio: None,
        psi_norm: None,
    };
    for k in visit {
        let r = &rects[k];
        let overlap = union.count_in_rect(r);
        res.overlap_ratios[k] = overlap as f64 / r.cell_count() as f64;
        if keep(r, overlap, &cover) {
            let mut part = CellSet::from_rect(gbox.clone(), r).expect("checked family");
            part = part.difference(&union).expect("same grid");
            union.insert_rect(r).expect("checked family");
            r.for_each_cell(|c| cover[c[0] * st[0] + c[1] * st[1] + c[2]] += 1);
            if !res.selected.is_empty() {
                res.alpha = res.alpha.max(res.overlap_ratios[k]);
            }
            res.selected.push(k);
            res.disjoint_parts.push(part);
        } else {
            res.rejected.push(k);
        }
    }
    res.rejected.sort_unstable();
    res
}

/// Keeps `B` when `|B ∩ ∪ kept| < |B|/2`.
pub fn select_half_overlap(gbox: &GridBox, rects: &[Rect]) -> Result<SelectionResult> {
    check_family(gbox, rects)?;
    Ok(greedy(gbox, rects, 0..rects.len(), |r, overlap, _| 2 * overlap < r.cell_count()))
}

/// Keeps `A` when `|A ∩ ∪ kept| ≤ λ|A|`.
pub fn select_alpha_scattered(gbox: &GridBox, rects: &[Rect], lambda: f64) -> Result<SelectionResult> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::input("lambda", format!("λ must lie in (0,1), got {lambda}")));
    }
    check_family(gbox, rects)?;
    Ok(greedy(gbox, rects, 0..rects.len(), |r, overlap, _| {
        overlap as f64 <= lambda * r.cell_count() as f64
    }))
}

/// Sorts by decreasing side along the second axis (stable) and keeps `R` when
/// `Σ_{c∈R} exp((δ₀·cover(c))^{1/(n−1)}) ≤ 2·#R`.
pub fn select_exp_overlap(gbox: &GridBox, rects: &[Rect], n: usize, delta0: f64) -> Result<SelectionResult> {
    if n < 2 || n != gbox.ndim() {
        return Err(Error::input("n", format!("n must be ≥ 2 and equal the grid dimension {}, got {n}", gbox.ndim())));
    }
    if !(delta0 > 0.0 && delta0.is_finite()) {
        return Err(Error::input("delta0", format!("δ₀ must be positive, got {delta0}")));
    }
    check_family(gbox, rects)?;
    let mut order: Vec<usize> = (0..rects.len()).collect();
    order.sort_by_key(|&k| std::cmp::Reverse(rects[k].side(1)));
    let st = gbox.strides();
    let root = 1.0 / (n as f64 - 1.0);
    let mut res = greedy(gbox, rects, order, |r, _, cover| {
        let mut s = 0.0;
        r.for_each_cell(|c| {
            let k = cover[c[0] * st[0] + c[1] * st[1] + c[2]];
            s += if k == 0 { 1.0 } else { (delta0 * k as f64).powf(root).exp() };
        });
        s <= 2.0 * r.cell_count() as f64
    });
    let mut all = CellSet::empty(gbox.clone());
    let mut kept = CellSet::empty(gbox.clone());
    let mut count = vec![0.0; gbox.cell_count()];
    for (k, r) in rects.iter().enumerate() {
        all.insert_rect(r)?;
        if res.selected.contains(&k) {
            kept.insert_rect(r)?;
            r.for_each_cell(|c| count[c[0] * st[0] + c[1] * st[1] + c[2]] += 1.0);
        }
    }
    res.union_ratio = Some(all.count() as f64 / kept.count() as f64);
    let overlap = GridFunction::new(gbox.clone(), count)?;
    res.psi_norm = Some(luxemburg_norm(&overlap, &kept, &YoungSpec::Psi { n: n as u32 })?.value);
    Ok(res)
}

/// Number of cells of `r` inside `s`.
fn count_in(s: &CellSet, r: &Rect) -> usize {
    s.count_in_rect(r)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HalfOverlapCheck {
    /// Selected sets meeting earlier selections in ≥ half their measure.
    pub keep_rule: usize,
    /// Rejected sets meeting the final union in < half their measure.
    pub reject_rule: usize,
    /// Selected sets with `|E_k| ≤ |B̃_k|/2`.
    pub disjoint_part: usize,
    /// Input cells where `M_ℛ(χ_U, …, χ_U) < 2^{−m}`, per `m` checked.
    pub maximal_claim: Vec<usize>,
    /// Whether the selection/rejection lists partition the input and parts are disjoint.
    pub partition_ok: bool,
}

impl HalfOverlapCheck {
    pub fn violations(&self) -> usize {
        self.keep_rule
            + self.reject_rule
            + self.disjoint_part
            + self.maximal_claim.iter().sum::<usize>()
            + usize::from(!self.partition_ok)
    }
}

fn partition_ok(res: &SelectionResult, n: usize, gbox: &GridBox, rects: &[Rect]) -> bool {
    let mut seen = vec![0u8; n];
    res.selected.iter().chain(&res.rejected).for_each(|&k| seen[k] += 1);
    if seen.iter().any(|&s| s != 1) {
        return false;
    }
    let mut acc = CellSet::empty(gbox.clone());
    for (part, &k) in res.disjoint_parts.iter().zip(&res.selected) {
        let own = CellSet::from_rect(gbox.clone(), &rects[k]).expect("checked");
        if !part.is_disjoint(&acc) || !part.is_subset(&own) {
            return false;
        }
        acc = acc.union(part).expect("same grid");
    }
    true
}

/// Re-checks the half-overlap properties, including that every input set lies in
/// `{M_ℛ(χ_U, …, χ_U) ≥ 2^{−m}}` for the final union `U` and each `m` in `ms`.
pub fn verify_half_overlap(gbox: &GridBox, rects: &[Rect], res: &SelectionResult, ms: &[usize]) -> Result<HalfOverlapCheck> {
    let mut chk = HalfOverlapCheck {
        partition_ok: partition_ok(res, rects.len(), gbox, rects),
        ..Default::default()
    };
    let mut union = CellSet::empty(gbox.clone());
    for (&k, part) in res.selected.iter().zip(&res.disjoint_parts) {
        let r = &rects[k];
        if 2 * count_in(&union, r) >= r.cell_count() {
            chk.keep_rule += 1;
        }
        if 2 * part.count() <= r.cell_count() {
            chk.disjoint_part += 1;
        }
        union.insert_rect(r)?;
    }
    for &k in &res.rejected {
        let r = &rects[k];
        if 2 * count_in(&union, r) < r.cell_count() {
            chk.reject_rule += 1;
        }
    }
    let m1 = maximal_map(&union.indicator(), &BasisSpec::Rectangles, &MaximalOptions::default())?;
    for &m in ms {
        let mm = power_map(&m1, m);
        let thr = 0.5f64.powi(m as i32);
        let mut bad = 0;
        for r in rects {
            r.for_each_cell(|c| {
                if mm.get(&c[..gbox.ndim()]) < thr {
                    bad += 1;
                }
            });
        }
        chk.maximal_claim.push(bad);
    }
    Ok(chk)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScatteredCheck {
    /// Selected sets with overlap above `λ|Ã_i|`.
    pub scattered_rule: usize,
    /// Rejected sets not contained in `{M_ℛ χ_{kept so far} > λ}`.
    pub containment: usize,
    pub partition_ok: bool,
}

impl ScatteredCheck {
    pub fn violations(&self) -> usize {
        self.scattered_rule + self.containment + usize::from(!self.partition_ok)
    }
}

/// Selected prefix unions: `unions[j]` = union of selected sets with input index `< j`.
fn selected_prefix_unions(gbox: &GridBox, rects: &[Rect], res: &SelectionResult) -> Vec<CellSet> {
    let mut out = Vec::with_capacity(rects.len() + 1);
    let kept: std::collections::BTreeSet<usize> = res.selected.iter().copied().collect();
    let mut u = CellSet::empty(gbox.clone());
    out.push(u.clone());
    for (k, r) in rects.iter().enumerate() {
        if kept.contains(&k) {
            u.insert_rect(r).expect("checked");
        }
        out.push(u.clone());
    }
    out
}

/// Re-checks the scattered property and that each rejected set lies in the
/// `λ`-superlevel set of the maximal function of the union kept before it.
pub fn verify_alpha_scattered(gbox: &GridBox, rects: &[Rect], res: &SelectionResult, lambda: f64) -> Result<ScatteredCheck> {
    let mut chk = ScatteredCheck {
        partition_ok: partition_ok(res, rects.len(), gbox, rects),
        ..Default::default()
    };
    let prefix = selected_prefix_unions(gbox, rects, res);
    for &k in &res.selected {
        let r = &rects[k];
        if count_in(&prefix[k], r) as f64 > lambda * r.cell_count() as f64 {
            chk.scattered_rule += 1;
        }
    }
    let mut cache: Vec<(usize, GridFunction)> = Vec::new();
    for &k in &res.rejected {
        let u = &prefix[k];
        let key = u.count();
        let m = match cache.iter().find(|(c, _)| *c == key) {
            Some((_, m)) => m.clone(),
            None => {
                let m = maximal_map(&u.indicator(), &BasisSpec::Rectangles, &MaximalOptions::default())?;
                cache.push((key, m.clone()));
                m
            }
        };
        let mut inside = true;
        rects[k].for_each_cell(|c| inside &= m.get(&c[..gbox.ndim()]) > lambda);
        if !inside {
            chk.containment += 1;
        }
    }
    Ok(chk)
}

/// The worst condition-(A) ratio over the sets `∪_{s<j} Ã_s`, j = 1..M+1.
pub fn scattered_chain_constant(
    w: &GridFunction,
    rects: &[Rect],
    res: &SelectionResult,
    lambda: f64,
    opts: &MaximalOptions,
) -> Result<f64> {
    let prefix = selected_prefix_unions(w.grid(), rects, res);
    let mut c = 0.0f64;
    let mut last = usize::MAX;
    for u in &prefix {
        if u.count() == last {
            continue;
        }
        last = u.count();
        if let Some(r) = condition_a_ratio(w, u, &BasisSpec::Rectangles, lambda, opts)? {
            c = c.max(r);
        }
    }
    Ok(c)
}

/// Counts pairs `1 ≤ i < j ≤ M+1` violating
/// `w(∪_{s<j}A_s) ≤ c[w(∪_{s<i}A_s) + w(∪_{i≤s<j}Ã_s)]`.
pub fn chain_violations(w: &GridFunction, rects: &[Rect], res: &SelectionResult, c: f64) -> Result<usize> {
    let gbox = w.grid();
    let m = rects.len();
    let mut all_prefix = Vec::with_capacity(m + 1);
    let mut u = CellSet::empty(gbox.clone());
    all_prefix.push(0.0);
    for r in rects {
        u.insert_rect(r)?;
        all_prefix.push(set_mass(w, &u)?);
    }
    let selected: std::collections::BTreeSet<usize> = res.selected.iter().copied().collect();
    let mut bad = 0;
    // indices are 1-based in the statement: s < j means input positions 0..j-1
    for i in 1..=m {
        let mut window = CellSet::empty(gbox.clone());
        for j in i + 1..=m + 1 {
            let s = j - 2; // position i-1 ..= j-2 joins the window
            if selected.contains(&s) {
                window.insert_rect(&rects[s])?;
            }
            let lhs = all_prefix[j - 1];
            let rhs = c * (all_prefix[i - 1] + set_mass(w, &window)?);
            if lhs > rhs * (1.0 + 1e-12) {
                bad += 1;
            }
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(d: usize) -> GridBox {
        GridBox::unit(&[d, d]).unwrap()
    }

    fn rect(lo: [usize; 2], hi: [usize; 2]) -> Rect {
        Rect::new(&lo, &hi).unwrap()
    }

    fn random_family(rng: &mut ChaCha8Rng, d: usize, n: usize, max_side: usize) -> Vec<Rect> {
        (0..n)
            .map(|_| {
                let w = rng.gen_range(1..=max_side);
                let h = rng.gen_range(1..=max_side);
                let x = rng.gen_range(0..=d - w);
                let y = rng.gen_range(0..=d - h);
                rect([x, y], [x + w, y + h])
            })
            .collect()
    }

    #[test]
    fn identical_rectangles() {
        let r = rect([1, 1], [4, 5]);
        let g = grid(8);
        for res in [
            select_half_overlap(&g, &[r, r, r]).unwrap(),
            select_alpha_scattered(&g, &[r, r, r], 0.5).unwrap(),
            select_exp_overlap(&g, &[r, r, r], 2, 1.0).unwrap(),
        ] {
            assert_eq!(res.selected, vec![0]);
            assert_eq!(res.rejected, vec![1, 2]);
            assert_eq!(&res.overlap_ratios[1..], &[1.0, 1.0]);
        }
    }

    #[test]
    fn disjoint_family_is_kept() {
        let g = grid(8);
        let rs = [rect([0, 0], [2, 2]), rect([2, 0], [5, 3]), rect([0, 4], [8, 8])];
        for res in [
            select_half_overlap(&g, &rs).unwrap(),
            select_alpha_scattered(&g, &rs, 0.1).unwrap(),
            select_exp_overlap(&g, &rs, 2, 1.0).unwrap(),
        ] {
            let mut sel = res.selected.clone();
            sel.sort_unstable();
            assert_eq!(sel, vec![0, 1, 2]);
            for (p, &k) in res.disjoint_parts.iter().zip(&res.selected) {
                assert_eq!(p.count(), rs[k].cell_count());
            }
        }
        let res = select_exp_overlap(&g, &rs, 2, 1.0).unwrap();
        assert_eq!(res.union_ratio, Some(1.0));
        // overlap count ≡ 1 on the union: ‖1‖_{Ψ_2} = 1/Ψ_2^{-1}(1) = 1/ln 2
        assert!((res.psi_norm.unwrap() - 1.0 / 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn exp_overlap_orders_by_second_side() {
        let g = grid(8);
        let rs = [rect([0, 0], [1, 2]), rect([4, 0], [5, 6])];
        let res = select_exp_overlap(&g, &rs, 2, 1.0).unwrap();
        assert_eq!(res.selected, vec![1, 0]);
    }

    #[test]
    fn half_overlap_random_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let g = grid(16);
            let rs = random_family(&mut rng, 16, 30, 8);
            let res = select_half_overlap(&g, &rs).unwrap();
            let chk = verify_half_overlap(&g, &rs, &res, &[1, 2]).unwrap();
            assert_eq!(chk.violations(), 0, "{chk:?}");
            let sum_parts: usize = res.disjoint_parts.iter().map(|p| p.count()).sum();
            let sum_sel: usize = res.selected.iter().map(|&k| rs[k].cell_count()).sum();
            assert!(2 * sum_parts >= sum_sel);
        }
    }

    #[test]
    fn scattered_random_families_and_monotone_in_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let g = grid(16);
            let rs = random_family(&mut rng, 16, 25, 8);
            for lam in [0.25, 0.5, 0.75] {
                let res = select_alpha_scattered(&g, &rs, lam).unwrap();
                let chk = verify_alpha_scattered(&g, &rs, &res, lam).unwrap();
                assert_eq!(chk.violations(), 0, "{chk:?}");
                assert!(res.alpha <= lam);
            }
            // the first rejection can only move later as λ grows
            let a = select_alpha_scattered(&g, &rs, 0.2).unwrap();
            let b = select_alpha_scattered(&g, &rs, 0.6).unwrap();
            let first_rej = |r: &SelectionResult| r.rejected.first().copied().unwrap_or(usize::MAX);
            assert!(first_rej(&b) >= first_rej(&a));
        }
    }

    #[test]
    fn chain_property_with_measured_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let g = grid(12);
        let w = GridFunction::new(g.clone(), (0..144).map(|_| rng.gen_range(0.2..2.0)).collect()).unwrap();
        let rs = random_family(&mut rng, 12, 15, 6);
        let res = select_alpha_scattered(&g, &rs, 0.5).unwrap();
        let c = scattered_chain_constant(&w, &rs, &res, 0.5, &MaximalOptions::default()).unwrap();
        assert!(c >= 1.0 && c.is_finite());
        assert_eq!(chain_violations(&w, &rs, &res, c).unwrap(), 0);
    }

    #[test]
    fn ordering_and_errors() {
        let rs = [rect([0, 0], [1, 1]), rect([0, 0], [3, 3]), rect([0, 0], [2, 2])];
        let o = ordered(&rs, Order::ByMeasureDesc);
        assert_eq!(o.iter().map(|r| r.cell_count()).collect::<Vec<_>>(), vec![9, 4, 1]);
        assert_eq!(ordered(&rs, Order::Given), rs.to_vec());
        let g = grid(2);
        assert!(select_half_overlap(&g, &[]).is_err());
        assert!(matches!(select_half_overlap(&g, &[rect([0, 0], [3, 1])]), Err(Error::Index(_))));
        assert!(select_alpha_scattered(&g, &rs[..1], 1.0).is_err());
        assert!(select_exp_overlap(&g, &rs[..1], 3, 1.0).is_err());
    }
}
