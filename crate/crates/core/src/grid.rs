//! Cell-constant functions and sets on an axis-aligned box.
//!
//! Everything continuous is represented at cell resolution: a function is one
//! nonnegative value per cell, a set is a membership bitmap, and every measure
//! is a cell count times the cell volume. Rectangle sums come from a summed
//! table whose entries are kept as unevaluated double-double pairs, so a sum
//! over a small rectangle far from the origin keeps full relative precision.

use serde::{Deserialize, Serialize};

use crate::basis::Rect;
use crate::error::{Error, Result};

/// Largest supported grid dimension.
pub const MAX_DIM: usize = 3;

/// The ambient box `[lower, upper)` cut into `dims[i]` cells along axis `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxRepr", into = "BoxRepr")]
pub struct GridBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
    dims: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxRepr {
    lower: Vec<f64>,
    upper: Vec<f64>,
    dims: Vec<usize>,
}

impl TryFrom<BoxRepr> for GridBox {
    type Error = Error;
    fn try_from(r: BoxRepr) -> Result<Self> {
        GridBox::new(r.lower, r.upper, r.dims)
    }
}

impl From<GridBox> for BoxRepr {
    fn from(b: GridBox) -> Self {
        BoxRepr {
            lower: b.lower,
            upper: b.upper,
            dims: b.dims,
        }
    }
}

impl GridBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, dims: Vec<usize>) -> Result<Self> {
        let n = dims.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::input("dims", format!("dimension must be 1..={MAX_DIM}, got {n}")));
        }
        if lower.len() != n || upper.len() != n {
            return Err(Error::input(
                "lower/upper",
                format!("expected {n} coordinates, got {} and {}", lower.len(), upper.len()),
            ));
        }
        for i in 0..n {
            if dims[i] == 0 {
                return Err(Error::input("dims", format!("axis {i} has zero cells")));
            }
            if !(lower[i].is_finite() && upper[i].is_finite() && upper[i] > lower[i]) {
                return Err(Error::input(
                    "upper",
                    format!("axis {i}: need finite lower < upper, got [{}, {}]", lower[i], upper[i]),
                ));
            }
        }
        Ok(GridBox { lower, upper, dims })
    }

    /// `[0,1]^n` with the given resolution.
    pub fn unit(dims: &[usize]) -> Result<Self> {
        GridBox::new(vec![0.0; dims.len()], vec![1.0; dims.len()], dims.to_vec())
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Dimensions padded with 1 up to [`MAX_DIM`].
    pub fn padded_dims(&self) -> [usize; MAX_DIM] {
        let mut d = [1; MAX_DIM];
        d[..self.ndim()].copy_from_slice(&self.dims);
        d
    }

    pub fn cell_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.dims[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.ndim()).map(|i| self.cell_width(i)).product()
    }

    pub fn volume(&self) -> f64 {
        self.cell_volume() * self.cell_count() as f64
    }

    /// Row-major strides (last axis fastest), padded to [`MAX_DIM`].
    pub fn strides(&self) -> [usize; MAX_DIM] {
        let d = self.padded_dims();
        [d[1] * d[2], d[2], 1]
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let s = self.strides();
        idx.iter().zip(s.iter()).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, flat: usize) -> [usize; MAX_DIM] {
        let d = self.padded_dims();
        [flat / (d[1] * d[2]), (flat / d[2]) % d[1], flat % d[2]]
    }

    pub fn cell_center(&self, idx: &[usize]) -> Vec<f64> {
        (0..self.ndim())
            .map(|i| self.lower[i] + (idx[i] as f64 + 0.5) * self.cell_width(i))
            .collect()
    }

    /// Index of the cell containing coordinate `x` along `axis`, if inside the box.
    pub fn locate(&self, axis: usize, x: f64) -> Option<usize> {
        if x < self.lower[axis] || x >= self.upper[axis] {
            return None;
        }
        let k = ((x - self.lower[axis]) / self.cell_width(axis)).floor() as usize;
        Some(k.min(self.dims[axis] - 1))
    }

    /// The rectangle covering every cell.
    pub fn full_rect(&self) -> Rect {
        Rect::new(&vec![0; self.ndim()], &self.dims).expect("dims are nonzero")
    }

    pub fn contains_rect(&self, r: &Rect) -> bool {
        r.ndim() == self.ndim() && (0..self.ndim()).all(|i| r.hi()[i] <= self.dims[i])
    }

    pub fn same_grid(&self, other: &GridBox) -> bool {
        self == other
    }

    pub(crate) fn check_same(&self, other: &GridBox, what: &str) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!("{what}: grids differ ({:?} vs {:?})", self.dims, other.dims)))
        }
    }
}

/// A nonnegative cell-constant function.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    gbox: GridBox,
    values: Vec<f64>,
}

/// On-disk form: `{"lower": [...], "upper": [...], "dims": [...], "values": [...]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(gbox: GridBox, values: Vec<f64>) -> Result<Self> {
        if values.len() != gbox.cell_count() {
            return Err(Error::Shape(format!(
                "values has {} entries, grid has {} cells",
                values.len(),
                gbox.cell_count()
            )));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::input(
                "values",
                format!("cell {:?} holds {v}; values must be finite and nonnegative", &gbox.multi_index(k)[..gbox.ndim()]),
            ));
        }
        Ok(GridFunction { gbox, values })
    }

    /// Samples `sampler` at every cell center.
    pub fn from_sampler(gbox: GridBox, mut sampler: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(gbox.cell_count());
        for k in 0..gbox.cell_count() {
            let idx = gbox.multi_index(k);
            let x = gbox.cell_center(&idx[..gbox.ndim()]);
            let v = sampler(&x);
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::input(
                    "sampler",
                    format!("cell {:?} (center {x:?}) sampled {v}", &idx[..gbox.ndim()]),
                ));
            }
            values.push(v);
        }
        Ok(GridFunction { gbox, values })
    }

    pub fn constant(gbox: GridBox, c: f64) -> Result<Self> {
        let n = gbox.cell_count();
        GridFunction::new(gbox, vec![c; n])
    }

    pub fn zeros(gbox: GridBox) -> Self {
        let n = gbox.cell_count();
        GridFunction { gbox, values: vec![0.0; n] }
    }

    /// Constructor for values already known to be finite and nonnegative.
    pub(crate) fn from_raw(gbox: GridBox, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), gbox.cell_count());
        GridFunction { gbox, values }
    }

    pub fn grid(&self) -> &GridBox {
        &self.gbox
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.gbox.flat_index(idx)]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `∫ f` as a cell sum times the cell volume.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.gbox.cell_volume()
    }

    /// Applies `op` cellwise. The result must again be finite and nonnegative.
    pub fn map(&self, op: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(self.gbox.clone(), self.values.iter().map(|&v| op(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Result<GridFunction> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::input("scale", format!("scale factor {c} must be finite and nonnegative")));
        }
        Ok(GridFunction::from_raw(self.gbox.clone(), self.values.iter().map(|v| v * c).collect()))
    }

    /// Cellwise product with another function on the same grid.
    pub fn product(&self, other: &GridFunction) -> Result<GridFunction> {
        self.gbox.check_same(&other.gbox, "product")?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        GridFunction::new(self.gbox.clone(), values)
    }

    /// `|{x : g(x) > λ}|`, strict inequality.
    pub fn superlevel_measure(&self, lambda: f64) -> f64 {
        let count = self.values.iter().filter(|&&v| v > lambda).count();
        count as f64 * self.gbox.cell_volume()
    }

    /// The set `{g > λ}`.
    pub fn superlevel_set(&self, lambda: f64) -> CellSet {
        CellSet {
            gbox: self.gbox.clone(),
            bits: self.values.iter().map(|&v| v > lambda).collect(),
        }
    }

    pub fn prefix_sums(&self) -> SummedTable {
        SummedTable::new(self)
    }

    pub fn to_file(&self) -> GridFile {
        GridFile {
            lower: self.gbox.lower.clone(),
            upper: self.gbox.upper.clone(),
            dims: self.gbox.dims.clone(),
            values: self.values.clone(),
        }
    }

    pub fn from_file(file: GridFile) -> Result<Self> {
        GridFunction::new(GridBox::new(file.lower, file.upper, file.dims)?, file.values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("grid files always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GridFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            source_name: "grid function".into(),
            message: e.to_string(),
        })?;
        GridFunction::from_file(file)
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn dd_add(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (s, e) = two_sum(a.0, b.0);
    let e = e + a.1 + b.1;
    let hi = s + e;
    (hi, e - (hi - s))
}

/// Orthant sums `S[i] = Σ_{j < i} f[j]` over a grid padded by one in every axis.
#[derive(Clone, Debug)]
pub struct SummedTable {
    gbox: GridBox,
    ndim: usize,
    strides: [usize; MAX_DIM],
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl SummedTable {
    pub fn new(g: &GridFunction) -> Self {
        let gbox = g.grid().clone();
        let d = gbox.padded_dims();
        let tp = [d[0] + 1, d[1] + 1, d[2] + 1];
        let strides = [tp[1] * tp[2], tp[2], 1];
        let size = tp[0] * tp[1] * tp[2];
        let mut hi = vec![0.0; size];
        let mut lo = vec![0.0; size];
        let src = gbox.strides();
        for i in 0..d[0] {
            for j in 0..d[1] {
                for k in 0..d[2] {
                    hi[(i + 1) * strides[0] + (j + 1) * strides[1] + (k + 1)] =
                        g.values[i * src[0] + j * src[1] + k];
                }
            }
        }
        // One pass per axis, in increasing index order.
        for axis in 0..MAX_DIM {
            let st = strides[axis];
            for flat in 0..size {
                let coord = (flat / st) % tp[axis];
                if coord == 0 {
                    continue;
                }
                let prev = flat - st;
                let (h, l) = dd_add((hi[flat], lo[flat]), (hi[prev], lo[prev]));
                hi[flat] = h;
                lo[flat] = l;
            }
        }
        SummedTable {
            ndim: gbox.ndim(),
            gbox,
            strides,
            hi,
            lo,
        }
    }

    pub fn grid(&self) -> &GridBox {
        &self.gbox
    }

    /// The orthant sum over all cells with index `< corner` in every axis.
    pub fn orthant_sum(&self, corner: &[usize]) -> f64 {
        let mut flat = 0;
        for (a, c) in corner.iter().enumerate() {
            flat += c * self.strides[a];
        }
        for a in corner.len()..MAX_DIM {
            flat += self.strides[a];
        }
        self.hi[flat] + self.lo[flat]
    }

    /// Sum of cell values in `r`. `r` must lie inside the grid.
    #[inline]
    pub fn rect_sum(&self, r: &Rect) -> f64 {
        let lo = r.lo_padded();
        let hi = r.hi_padded();
        let s = &self.strides;
        match self.ndim {
            1 => {
                let a = hi[0] * s[0] + s[1] + s[2];
                let b = lo[0] * s[0] + s[1] + s[2];
                let acc = (self.hi[a], self.lo[a]);
                let acc = dd_add(acc, (-self.hi[b], -self.lo[b]));
                acc.0 + acc.1
            }
            2 => {
                let base = s[2];
                let i11 = hi[0] * s[0] + hi[1] * s[1] + base;
                let i01 = lo[0] * s[0] + hi[1] * s[1] + base;
                let i10 = hi[0] * s[0] + lo[1] * s[1] + base;
                let i00 = lo[0] * s[0] + lo[1] * s[1] + base;
                let mut acc = (self.hi[i11], self.lo[i11]);
                acc = dd_add(acc, (-self.hi[i01], -self.lo[i01]));
                acc = dd_add(acc, (-self.hi[i10], -self.lo[i10]));
                acc = dd_add(acc, (self.hi[i00], self.lo[i00]));
                acc.0 + acc.1
            }
            _ => {
                let mut acc = (0.0, 0.0);
                for mask in 0..8u32 {
                    let mut flat = 0;
                    for a in 0..3 {
                        let c = if mask & (1 << a) == 0 { hi[a] } else { lo[a] };
                        flat += c * s[a];
                    }
                    let term = if mask.count_ones() % 2 == 0 {
                        (self.hi[flat], self.lo[flat])
                    } else {
                        (-self.hi[flat], -self.lo[flat])
                    };
                    acc = dd_add(acc, term);
                }
                acc.0 + acc.1
            }
        }
    }

    /// Exact mean of the cell values in `r`, without bounds checks.
    #[inline]
    pub fn rect_mean(&self, r: &Rect) -> f64 {
        self.rect_sum(r) / r.cell_count() as f64
    }

    /// `(1/|r|) ∫_r f` for a nonempty rectangle inside the grid.
    pub fn rect_average(&self, r: &Rect) -> Result<f64> {
        if !self.gbox.contains_rect(r) {
            return Err(Error::Index(format!(
                "rectangle {:?}..{:?} outside grid {:?}",
                r.lo(),
                r.hi(),
                self.gbox.dims()
            )));
        }
        Ok(self.rect_mean(r))
    }
}

/// A set of cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSet {
    gbox: GridBox,
    bits: Vec<bool>,
}

impl CellSet {
    pub fn empty(gbox: GridBox) -> Self {
        let n = gbox.cell_count();
        CellSet { gbox, bits: vec![false; n] }
    }

    pub fn full(gbox: GridBox) -> Self {
        let n = gbox.cell_count();
        CellSet { gbox, bits: vec![true; n] }
    }

    pub fn from_bits(gbox: GridBox, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != gbox.cell_count() {
            return Err(Error::Shape(format!("bitmap has {} entries, grid has {} cells", bits.len(), gbox.cell_count())));
        }
        Ok(CellSet { gbox, bits })
    }

    pub fn from_rect(gbox: GridBox, r: &Rect) -> Result<Self> {
        let mut s = CellSet::empty(gbox);
        s.insert_rect(r)?;
        Ok(s)
    }

    pub fn grid(&self) -> &GridBox {
        &self.gbox
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn contains(&self, idx: &[usize]) -> bool {
        self.bits[self.gbox.flat_index(idx)]
    }

    pub fn insert_rect(&mut self, r: &Rect) -> Result<()> {
        if !self.gbox.contains_rect(r) {
            return Err(Error::Index(format!("rectangle {:?}..{:?} outside grid", r.lo(), r.hi())));
        }
        let strides = self.gbox.strides();
        r.for_each_cell(|c| self.bits[c[0] * strides[0] + c[1] * strides[1] + c[2]] = true);
        Ok(())
    }

    /// Number of cells of `r` inside the set.
    pub fn count_in_rect(&self, r: &Rect) -> usize {
        let strides = self.gbox.strides();
        let mut n = 0;
        r.for_each_cell(|c| {
            if self.bits[c[0] * strides[0] + c[1] * strides[1] + c[2]] {
                n += 1
            }
        });
        n
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// `|E|`.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.gbox.cell_volume()
    }

    pub fn union(&self, other: &CellSet) -> Result<CellSet> {
        self.gbox.check_same(&other.gbox, "union")?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect();
        Ok(CellSet { gbox: self.gbox.clone(), bits })
    }

    pub fn intersection(&self, other: &CellSet) -> Result<CellSet> {
        self.gbox.check_same(&other.gbox, "intersection")?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect();
        Ok(CellSet { gbox: self.gbox.clone(), bits })
    }

    pub fn difference(&self, other: &CellSet) -> Result<CellSet> {
        self.gbox.check_same(&other.gbox, "difference")?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a && !*b).collect();
        Ok(CellSet { gbox: self.gbox.clone(), bits })
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }

    pub fn is_disjoint(&self, other: &CellSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !(*a && *b))
    }

    /// `χ_E` as a grid function.
    pub fn indicator(&self) -> GridFunction {
        GridFunction::from_raw(
            self.gbox.clone(),
            self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
    }
}

/// `w(E) = Σ_{c∈E} w[c] · |cell|`.
pub fn set_mass(w: &GridFunction, e: &CellSet) -> Result<f64> {
    w.grid().check_same(e.grid(), "set_mass")?;
    let s: f64 = w
        .values()
        .iter()
        .zip(e.bits())
        .filter(|(_, b)| **b)
        .map(|(v, _)| *v)
        .sum();
    Ok(s * w.grid().cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square_box(len: f64, d: usize) -> GridBox {
        GridBox::new(vec![0.0, 0.0], vec![len, len], vec![d, d]).unwrap()
    }

    #[test]
    fn constant_sampler_fills_every_cell() {
        let g = GridFunction::from_sampler(square_box(1.0, 4), |_| 1.0).unwrap();
        assert!(g.values().iter().all(|&v| v == 1.0));
        assert_eq!(g.values().len(), 16);
        assert_eq!(g.integral(), 1.0);
    }

    #[test]
    fn aligned_indicator_marks_lower_left_block() {
        let g = GridFunction::from_sampler(square_box(4.0, 64), |x| {
            if x[0] <= 1.0 && x[1] <= 1.0 { 1.0 } else { 0.0 }
        })
        .unwrap();
        for i in 0..64 {
            for j in 0..64 {
                let expect = if i < 16 && j < 16 { 1.0 } else { 0.0 };
                assert_eq!(g.get(&[i, j]), expect, "cell {i},{j}");
            }
        }
    }

    #[test]
    fn sqrt_sampler_midpoint_mass() {
        let b = GridBox::new(vec![0.0], vec![1.0], vec![8]).unwrap();
        let g = GridFunction::from_sampler(b, |x| x[0].sqrt()).unwrap();
        for k in 0..8 {
            assert_eq!(g.values()[k], ((2 * k + 1) as f64 / 16.0).sqrt());
        }
        let mass = g.values().iter().sum::<f64>() / 8.0;
        assert!((g.integral() - mass).abs() < 1e-15);
        assert!((mass - 2.0 / 3.0).abs() / (2.0 / 3.0) <= 0.02);
    }

    #[test]
    fn sampler_rejects_negative_and_nan() {
        let err = GridFunction::from_sampler(square_box(1.0, 2), |x| if x[0] > 0.5 { -1.0 } else { 0.0 }).unwrap_err();
        assert!(matches!(err, Error::InputDomain { .. }));
        assert!(err.to_string().contains("[1, 0]"), "{err}");
        assert!(GridFunction::from_sampler(square_box(1.0, 2), |_| f64::NAN).is_err());
    }

    #[test]
    fn box_validation() {
        assert!(GridBox::new(vec![0.0], vec![0.0], vec![3]).is_err());
        assert!(GridBox::new(vec![0.0], vec![1.0], vec![0]).is_err());
        assert!(GridBox::new(vec![0.0; 4], vec![1.0; 4], vec![1; 4]).is_err());
    }

    #[test]
    fn all_ones_corner_sums() {
        let g = GridFunction::constant(GridBox::unit(&[2, 2]).unwrap(), 1.0).unwrap();
        let t = g.prefix_sums();
        assert_eq!(t.orthant_sum(&[1, 1]), 1.0);
        assert_eq!(t.orthant_sum(&[1, 2]), 2.0);
        assert_eq!(t.orthant_sum(&[2, 1]), 2.0);
        assert_eq!(t.orthant_sum(&[2, 2]), 4.0);
    }

    #[test]
    fn single_cell_orthants() {
        let mut v = vec![0.0; 9];
        v[0] = 2.5;
        let g = GridFunction::new(GridBox::unit(&[3, 3]).unwrap(), v).unwrap();
        let t = g.prefix_sums();
        for i in 1..=3 {
            for j in 1..=3 {
                assert_eq!(t.orthant_sum(&[i, j]), 2.5);
            }
        }
        assert_eq!(t.orthant_sum(&[0, 3]), 0.0);
    }

    fn brute_sum(g: &GridFunction, r: &Rect) -> f64 {
        let mut s = 0.0;
        let st = g.grid().strides();
        r.for_each_cell(|c| s += g.values()[c[0] * st[0] + c[1] * st[1] + c[2]]);
        s
    }

    #[test]
    fn every_rectangle_of_integer_grid_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vals: Vec<f64> = (0..64).map(|_| rng.gen_range(0..1000) as f64).collect();
        let g = GridFunction::new(GridBox::unit(&[8, 8]).unwrap(), vals).unwrap();
        let t = g.prefix_sums();
        let mut n = 0;
        for a0 in 0..8 {
            for b0 in a0 + 1..=8 {
                for a1 in 0..8 {
                    for b1 in a1 + 1..=8 {
                        let r = Rect::new(&[a0, a1], &[b0, b1]).unwrap();
                        assert_eq!(t.rect_sum(&r), brute_sum(&g, &r));
                        n += 1;
                    }
                }
            }
        }
        assert_eq!(n, 36 * 36);
    }

    #[test]
    fn random_rectangles_match_direct_sums_up_to_3d() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dims in [vec![32], vec![32, 32], vec![32, 32, 32]] {
            let b = GridBox::unit(&dims).unwrap();
            let vals: Vec<f64> = (0..b.cell_count()).map(|_| rng.gen::<f64>()).collect();
            let g = GridFunction::new(b, vals).unwrap();
            let t = g.prefix_sums();
            for _ in 0..1000 {
                let mut lo = vec![];
                let mut hi = vec![];
                for &d in &dims {
                    let a = rng.gen_range(0..d);
                    let c = rng.gen_range(a + 1..=d);
                    lo.push(a);
                    hi.push(c);
                }
                let r = Rect::new(&lo, &hi).unwrap();
                let direct = brute_sum(&g, &r);
                let fast = t.rect_sum(&r);
                assert!((fast - direct).abs() <= 1e-12 * direct.abs(), "{dims:?} {fast} vs {direct}");
                let mean = t.rect_average(&r).unwrap();
                let dmean = direct / r.cell_count() as f64;
                assert!((mean - dmean).abs() <= 1e-12 * dmean);
            }
        }
    }

    #[test]
    fn rect_average_examples_and_errors() {
        let c = GridFunction::constant(GridBox::unit(&[5, 5]).unwrap(), 3.25).unwrap();
        let t = c.prefix_sums();
        assert_eq!(t.rect_average(&Rect::new(&[1, 2], &[4, 5]).unwrap()).unwrap(), 3.25);
        // χ_[0,1]² on [0,4]², averaged over [0,2]².
        let chi = GridFunction::from_sampler(square_box(4.0, 8), |x| {
            if x[0] < 1.0 && x[1] < 1.0 { 1.0 } else { 0.0 }
        })
        .unwrap();
        let t = chi.prefix_sums();
        assert_eq!(t.rect_average(&Rect::new(&[0, 0], &[4, 4]).unwrap()).unwrap(), 0.25);
        assert!(matches!(t.rect_average(&Rect::new(&[0, 0], &[9, 1]).unwrap()), Err(Error::Index(_))));
        assert!(Rect::new(&[2, 0], &[2, 1]).is_err());
    }

    #[test]
    fn superlevel_examples() {
        let g = GridFunction::constant(GridBox::unit(&[4, 4]).unwrap(), 1.0).unwrap();
        assert_eq!(g.superlevel_measure(2.0), 0.0);
        assert_eq!(g.superlevel_measure(0.5), 1.0);
        assert_eq!(g.superlevel_measure(1.0), 0.0);
    }

    #[test]
    fn set_mass_examples() {
        let b = GridBox::new(vec![0.0, 0.0], vec![2.0, 1.0], vec![4, 4]).unwrap();
        let ones = GridFunction::constant(b.clone(), 1.0).unwrap();
        let r = Rect::new(&[1, 0], &[3, 2]).unwrap();
        let e = CellSet::from_rect(b.clone(), &r).unwrap();
        assert!((set_mass(&ones, &e).unwrap() - e.measure()).abs() < 1e-15);
        assert_eq!(set_mass(&ones, &CellSet::empty(b.clone())).unwrap(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = GridFunction::new(b.clone(), (0..16).map(|_| rng.gen::<f64>()).collect()).unwrap();
        let via_table = w.prefix_sums().rect_sum(&r) * b.cell_volume();
        assert!((set_mass(&w, &e).unwrap() - via_table).abs() < 1e-14);

        let other = GridBox::unit(&[4, 4]).unwrap();
        assert!(matches!(set_mass(&w, &CellSet::empty(other)), Err(Error::Shape(_))));
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let g = GridFunction::from_sampler(square_box(2.0, 3), |x| x[0] + x[1]).unwrap();
        let back = GridFunction::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        let bad = r#"{"lower":[0],"upper":[1],"dims":[1],"values":[1],"extra":1}"#;
        assert!(GridFunction::from_json(bad).is_err());
    }
}
