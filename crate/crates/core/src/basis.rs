//! Cell-aligned families of axis-parallel rectangles.
//!
//! A basis is described by a [`BasisSpec`] and materialized against a grid
//! resolution as a [`Basis`]: a list of admissible side-length vectors
//! ("shapes") together with the placement rule for each shape. Members are
//! half-open index boxes, so unions and intersections have exact measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridBox, MAX_DIM};

/// Default number of set visits allowed before an enumeration aborts.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// A half-open box of cells: `lo[i] <= c[i] < hi[i]` on every axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rect {
    lo: [usize; MAX_DIM],
    hi: [usize; MAX_DIM],
    ndim: u8,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RectRepr {
    lo: Vec<usize>,
    hi: Vec<usize>,
}

impl Serialize for Rect {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RectRepr {
            lo: self.lo().to_vec(),
            hi: self.hi().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rect {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RectRepr::deserialize(d)?;
        Rect::new(&r.lo, &r.hi).map_err(serde::de::Error::custom)
    }
}

impl Rect {
    pub fn new(lo: &[usize], hi: &[usize]) -> Result<Rect> {
        let n = lo.len();
        if n == 0 || n > MAX_DIM || hi.len() != n {
            return Err(Error::Index(format!("rectangle needs 1..={MAX_DIM} matching bounds, got {lo:?}..{hi:?}")));
        }
        let mut r = Rect {
            lo: [0; MAX_DIM],
            hi: [1; MAX_DIM],
            ndim: n as u8,
        };
        for i in 0..n {
            if lo[i] >= hi[i] {
                return Err(Error::Index(format!("empty rectangle {lo:?}..{hi:?}")));
            }
            r.lo[i] = lo[i];
            r.hi[i] = hi[i];
        }
        Ok(r)
    }

    #[inline]
    pub(crate) fn from_padded(lo: [usize; MAX_DIM], hi: [usize; MAX_DIM], ndim: usize) -> Rect {
        Rect { lo, hi, ndim: ndim as u8 }
    }

    pub fn ndim(&self) -> usize {
        self.ndim as usize
    }

    pub fn lo(&self) -> &[usize] {
        &self.lo[..self.ndim()]
    }

    pub fn hi(&self) -> &[usize] {
        &self.hi[..self.ndim()]
    }

    #[inline]
    pub fn lo_padded(&self) -> [usize; MAX_DIM] {
        self.lo
    }

    #[inline]
    pub fn hi_padded(&self) -> [usize; MAX_DIM] {
        self.hi
    }

    pub fn side(&self, axis: usize) -> usize {
        self.hi[axis] - self.lo[axis]
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1]) * (self.hi[2] - self.lo[2])
    }

    /// `|R|` on the given grid.
    pub fn measure(&self, gbox: &GridBox) -> f64 {
        self.cell_count() as f64 * gbox.cell_volume()
    }

    pub fn contains_cell(&self, cell: &[usize]) -> bool {
        cell.iter().enumerate().all(|(i, &c)| self.lo[i] <= c && c < self.hi[i])
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        (0..MAX_DIM).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let mut out = *self;
        for i in 0..MAX_DIM {
            out.lo[i] = self.lo[i].max(other.lo[i]);
            out.hi[i] = self.hi[i].min(other.hi[i]);
            if out.lo[i] >= out.hi[i] {
                return None;
            }
        }
        Some(out)
    }

    /// Calls `f` with the padded index of every cell, in row-major order.
    #[inline]
    pub fn for_each_cell(&self, mut f: impl FnMut([usize; MAX_DIM])) {
        for i in self.lo[0]..self.hi[0] {
            for j in self.lo[1]..self.hi[1] {
                for k in self.lo[2]..self.hi[2] {
                    f([i, j, k]);
                }
            }
        }
    }
}

/// Declarative description of a basis family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisSpec {
    /// Equal side lengths in cells.
    Cubes,
    /// Cubes of side `2^k` at offsets that are multiples of `2^k`.
    DyadicCubes,
    /// Every index box.
    Rectangles,
    /// Planar rectangles with sides `s` and `round(N·s)`, either orientation.
    Eccentricity {
        #[serde(rename = "N")]
        n: f64,
    },
    /// Boxes in three dimensions with sides `s`, `t`, `s·t`.
    ZygmundSts,
}

impl BasisSpec {
    pub fn name(&self) -> String {
        match self {
            BasisSpec::Cubes => "cubes".into(),
            BasisSpec::DyadicCubes => "dyadic_cubes".into(),
            BasisSpec::Rectangles => "rectangles".into(),
            BasisSpec::Eccentricity { n } => format!("eccentricity(N={n})"),
            BasisSpec::ZygmundSts => "zygmund_sts".into(),
        }
    }

    /// Parses the CLI spelling: `rectangles`, `cubes`, `dyadic`, `eccentricity:4`, `sts`.
    pub fn parse(text: &str) -> Result<BasisSpec> {
        let t = text.trim();
        if let Some(rest) = t.strip_prefix("eccentricity") {
            let num = rest.trim_start_matches([':', '=']);
            let n: f64 = num
                .parse()
                .map_err(|_| Error::input("basis", format!("cannot read eccentricity from `{t}`")))?;
            return Ok(BasisSpec::Eccentricity { n });
        }
        match t {
            "cubes" => Ok(BasisSpec::Cubes),
            "dyadic" | "dyadic_cubes" => Ok(BasisSpec::DyadicCubes),
            "rectangles" | "rects" => Ok(BasisSpec::Rectangles),
            "sts" | "zygmund_sts" => Ok(BasisSpec::ZygmundSts),
            _ if t.starts_with('{') => serde_json::from_str(t).map_err(|e| Error::Parse {
                source_name: "basis".into(),
                message: e.to_string(),
            }),
            _ => Err(Error::input("basis", format!("unknown basis `{t}`"))),
        }
    }

    pub fn validate(&self, ndim: usize) -> Result<()> {
        match self {
            BasisSpec::Eccentricity { n } => {
                if ndim != 2 {
                    return Err(Error::input("basis", "eccentricity basis requires a 2-dimensional grid"));
                }
                if !(n.is_finite() && *n > 1.0) {
                    return Err(Error::input("basis", format!("eccentricity N must exceed 1, got {n}")));
                }
                Ok(())
            }
            BasisSpec::ZygmundSts if ndim != 3 => {
                Err(Error::input("basis", "zygmund_sts basis requires a 3-dimensional grid"))
            }
            _ => Ok(()),
        }
    }
}

/// Upper bound on set visits for one enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisBudget {
    max_sets: u64,
}

impl BasisBudget {
    pub fn new(max_sets: u64) -> Result<Self> {
        if max_sets == 0 {
            return Err(Error::input("budget", "budget must be at least 1"));
        }
        Ok(BasisBudget { max_sets })
    }

    pub fn max_sets(&self) -> u64 {
        self.max_sets
    }

    pub fn unlimited() -> Self {
        BasisBudget { max_sets: u64::MAX }
    }

    pub(crate) fn check(&self, visited: u64) -> Result<()> {
        if visited > self.max_sets {
            Err(Error::BudgetExceeded {
                budget: self.max_sets,
                visited,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for BasisBudget {
    fn default() -> Self {
        BasisBudget { max_sets: DEFAULT_BUDGET }
    }
}

/// One admissible side-length vector and how it may be placed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub sides: [usize; MAX_DIM],
    /// Offsets must be multiples of the side length (dyadic placement).
    pub aligned: bool,
}

/// A basis materialized at one grid resolution.
#[derive(Clone, Debug)]
pub struct Basis {
    spec: BasisSpec,
    dims: [usize; MAX_DIM],
    ndim: usize,
    shapes: Vec<Shape>,
}

impl Basis {
    pub fn new(spec: &BasisSpec, dims: &[usize]) -> Result<Basis> {
        let ndim = dims.len();
        if ndim == 0 || ndim > MAX_DIM || dims.contains(&0) {
            return Err(Error::input("dims", format!("unsupported grid dims {dims:?}")));
        }
        spec.validate(ndim)?;
        let mut d = [1; MAX_DIM];
        d[..ndim].copy_from_slice(dims);
        let shapes = build_shapes(spec, d, ndim);
        Ok(Basis {
            spec: spec.clone(),
            dims: d,
            ndim,
            shapes,
        })
    }

    pub fn for_grid(spec: &BasisSpec, gbox: &GridBox) -> Result<Basis> {
        Basis::new(spec, gbox.dims())
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.ndim]
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    fn positions(&self, shape: &Shape, axis: usize) -> usize {
        let d = self.dims[axis];
        let s = shape.sides[axis];
        if shape.aligned {
            d / s
        } else {
            d + 1 - s
        }
    }

    /// Number of members.
    pub fn count(&self) -> u64 {
        self.shapes
            .iter()
            .map(|sh| (0..MAX_DIM).map(|a| self.positions(sh, a) as u64).product::<u64>())
            .sum()
    }

    /// `Σ_B |B|` in cells: the work of a per-cell scan over the whole basis.
    pub fn cell_visits(&self) -> u64 {
        self.shapes
            .iter()
            .map(|sh| {
                let places: u64 = (0..MAX_DIM).map(|a| self.positions(sh, a) as u64).product();
                let vol: u64 = sh.sides.iter().map(|&s| s as u64).product();
                places.saturating_mul(vol)
            })
            .fold(0u64, |a, b| a.saturating_add(b))
    }

    /// Every member, shape by shape, positions in row-major order.
    pub fn members(&self) -> impl Iterator<Item = Rect> + '_ {
        (0..self.shapes.len()).flat_map(move |s| self.shape_members(s))
    }

    /// Members of the `s`-th shape, positions in row-major order.
    pub fn shape_members(&self, s: usize) -> impl Iterator<Item = Rect> + '_ {
        let sh = &self.shapes[s];
        let n0 = self.positions(sh, 0);
        let n1 = self.positions(sh, 1);
        let n2 = self.positions(sh, 2);
        let step = if sh.aligned { sh.sides } else { [1; MAX_DIM] };
        let sides = sh.sides;
        let ndim = self.ndim;
        (0..n0).flat_map(move |i| {
            (0..n1).flat_map(move |j| {
                (0..n2).map(move |k| {
                    let lo = [i * step[0], j * step[1], k * step[2]];
                    let hi = [lo[0] + sides[0], lo[1] + sides[1], lo[2] + sides[2]];
                    Rect::from_padded(lo, hi, ndim)
                })
            })
        })
    }

    fn range_containing(&self, sh: &Shape, axis: usize, c: usize) -> std::ops::Range<usize> {
        let s = sh.sides[axis];
        let d = self.dims[axis];
        if sh.aligned {
            let lo = c / s * s;
            if lo + s <= d {
                lo..lo + 1
            } else {
                0..0
            }
        } else {
            let first = (c + 1).saturating_sub(s);
            let last = c.min(d - s);
            first..last + 1
        }
    }

    /// Members containing the cell (padded index, already bounds-checked).
    pub fn members_containing(&self, cell: [usize; MAX_DIM]) -> impl Iterator<Item = Rect> + '_ {
        self.shapes.iter().flat_map(move |sh| {
            let r0 = self.range_containing(sh, 0, cell[0]);
            let r1 = self.range_containing(sh, 1, cell[1]);
            let r2 = self.range_containing(sh, 2, cell[2]);
            let sides = sh.sides;
            let ndim = self.ndim;
            r0.flat_map(move |i| {
                let r2 = r2.clone();
                r1.clone().flat_map(move |j| {
                    r2.clone().map(move |k| {
                        let lo = [i, j, k];
                        let hi = [i + sides[0], j + sides[1], k + sides[2]];
                        Rect::from_padded(lo, hi, ndim)
                    })
                })
            })
        })
    }

    pub(crate) fn check_cell(&self, cell: &[usize]) -> Result<[usize; MAX_DIM]> {
        if cell.len() != self.ndim || cell.iter().zip(self.dims()).any(|(c, d)| c >= d) {
            return Err(Error::Index(format!("cell {cell:?} outside grid {:?}", self.dims())));
        }
        let mut c = [0; MAX_DIM];
        c[..self.ndim].copy_from_slice(cell);
        Ok(c)
    }
}

fn round_side(x: f64) -> usize {
    (x.round() as usize).max(1)
}

fn build_shapes(spec: &BasisSpec, d: [usize; MAX_DIM], ndim: usize) -> Vec<Shape> {
    let pad = |v: &[usize]| {
        let mut s = [1; MAX_DIM];
        s[..v.len()].copy_from_slice(v);
        s
    };
    let min_side = d[..ndim].iter().copied().min().unwrap_or(1);
    let mut shapes = Vec::new();
    match spec {
        BasisSpec::Rectangles => {
            for a in 1..=d[0] {
                for b in 1..=d[1] {
                    for c in 1..=d[2] {
                        shapes.push(Shape { sides: [a, b, c], aligned: false });
                    }
                }
            }
        }
        BasisSpec::Cubes => {
            for s in 1..=min_side {
                shapes.push(Shape { sides: pad(&vec![s; ndim]), aligned: false });
            }
        }
        BasisSpec::DyadicCubes => {
            let mut s = 1;
            while s <= min_side {
                shapes.push(Shape { sides: pad(&vec![s; ndim]), aligned: true });
                s *= 2;
            }
        }
        BasisSpec::Eccentricity { n } => {
            for s in 1.. {
                let long = round_side(n * s as f64);
                let fits_a = s <= d[0] && long <= d[1];
                let fits_b = long <= d[0] && s <= d[1];
                if !fits_a && !fits_b {
                    break;
                }
                if fits_a {
                    shapes.push(Shape { sides: [s, long, 1], aligned: false });
                }
                if fits_b && long != s {
                    shapes.push(Shape { sides: [long, s, 1], aligned: false });
                }
            }
        }
        BasisSpec::ZygmundSts => {
            for s in 1..=d[0] {
                for t in 1..=d[1] {
                    if s * t <= d[2] {
                        shapes.push(Shape { sides: [s, t, s * t], aligned: false });
                    }
                }
            }
        }
    }
    shapes
}

/// Budgeted stream over a basis. Yields an error once the count passes the budget.
pub struct Enumeration<I> {
    inner: I,
    budget: BasisBudget,
    visited: u64,
    done: bool,
}

impl<I: Iterator<Item = Rect>> Iterator for Enumeration<I> {
    type Item = Result<Rect>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let r = self.inner.next()?;
        self.visited += 1;
        if let Err(e) = self.budget.check(self.visited) {
            self.done = true;
            return Some(Err(e));
        }
        Some(Ok(r))
    }
}

/// Every member of `spec` on a grid of `dims` cells.
pub fn enumerate(
    spec: &BasisSpec,
    dims: &[usize],
    budget: BasisBudget,
) -> Result<Enumeration<std::vec::IntoIter<Rect>>> {
    let basis = Basis::new(spec, dims)?;
    // Materialize lazily bounded by the budget so an oversized family fails fast.
    let cap = basis.count().min(budget.max_sets().saturating_add(1));
    let rects: Vec<Rect> = basis.members().take(cap as usize).collect();
    Ok(Enumeration {
        inner: rects.into_iter(),
        budget,
        visited: 0,
        done: false,
    })
}

/// Members of `spec` that contain `cell`.
pub fn containing(
    spec: &BasisSpec,
    dims: &[usize],
    cell: &[usize],
    budget: BasisBudget,
) -> Result<Enumeration<std::vec::IntoIter<Rect>>> {
    let basis = Basis::new(spec, dims)?;
    let c = basis.check_cell(cell)?;
    let cap = budget.max_sets().saturating_add(1);
    let rects: Vec<Rect> = basis.members_containing(c).take(cap.min(usize::MAX as u64) as usize).collect();
    Ok(Enumeration {
        inner: rects.into_iter(),
        budget,
        visited: 0,
        done: false,
    })
}
