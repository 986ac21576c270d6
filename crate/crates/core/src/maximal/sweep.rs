//! Offline range-assign-max.
//!
//! Each rectangle's interval on every axis is split into the canonical nodes
//! of a bottom-up segment tree, and the value is max-assigned to the product
//! of those nodes. After all insertions the tags are pushed from parents to
//! children one axis at a time; leaf tags are then the per-cell maxima.

use crate::basis::Rect;
use crate::grid::MAX_DIM;

/// Canonical node list for one interval (at most `2·log2(n)+2` nodes).
struct Nodes {
    buf: [usize; 128],
    len: usize,
}

impl Nodes {
    #[inline]
    fn of(lo: usize, hi: usize, n: usize) -> Nodes {
        let mut out = Nodes { buf: [0; 128], len: 0 };
        let (mut l, mut r) = (lo + n, hi + n);
        while l < r {
            if l & 1 == 1 {
                out.buf[out.len] = l;
                out.len += 1;
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                out.buf[out.len] = r;
                out.len += 1;
            }
            l >>= 1;
            r >>= 1;
        }
        out
    }

    #[inline]
    fn as_slice(&self) -> &[usize] {
        &self.buf[..self.len]
    }
}

/// Accumulates `(rectangle, value)` pairs and reports per-cell maxima.
#[derive(Clone, Debug)]
pub struct RangeMaxTree {
    leaves: [usize; MAX_DIM],
    stride: [usize; MAX_DIM],
    tags: Vec<f64>,
}

impl RangeMaxTree {
    /// `dims` padded to [`MAX_DIM`] with ones. Empty tags start at 0.
    pub fn new(dims: [usize; MAX_DIM]) -> Self {
        let size = [2 * dims[0], 2 * dims[1], 2 * dims[2]];
        RangeMaxTree {
            leaves: dims,
            stride: [size[1] * size[2], size[2], 1],
            tags: vec![0.0; size[0] * size[1] * size[2]],
        }
    }

    #[inline]
    pub fn insert(&mut self, r: &Rect, value: f64) {
        let lo = r.lo_padded();
        let hi = r.hi_padded();
        let n0 = Nodes::of(lo[0], hi[0], self.leaves[0]);
        let n1 = Nodes::of(lo[1], hi[1], self.leaves[1]);
        let n2 = Nodes::of(lo[2], hi[2], self.leaves[2]);
        for &a in n0.as_slice() {
            for &b in n1.as_slice() {
                let base = a * self.stride[0] + b * self.stride[1];
                for &c in n2.as_slice() {
                    let t = &mut self.tags[base + c];
                    if value > *t {
                        *t = value;
                    }
                }
            }
        }
    }

    /// Cellwise maximum with another tree over the same dims.
    pub fn merge(&mut self, other: &RangeMaxTree) {
        debug_assert_eq!(self.leaves, other.leaves);
        for (a, b) in self.tags.iter_mut().zip(&other.tags) {
            if *b > *a {
                *a = *b;
            }
        }
    }

    /// Per-cell maxima in row-major order.
    pub fn finish(mut self) -> Vec<f64> {
        let size = [2 * self.leaves[0], 2 * self.leaves[1], 2 * self.leaves[2]];
        for axis in 0..MAX_DIM {
            let n = self.leaves[axis];
            let st = self.stride[axis];
            let (o1, o2) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            for node in 1..n {
                for x in 0..size[o1] {
                    for y in 0..size[o2] {
                        let rest = x * self.stride[o1] + y * self.stride[o2];
                        let parent = self.tags[node * st + rest];
                        if parent == 0.0 {
                            continue;
                        }
                        for child in [2 * node, 2 * node + 1] {
                            let t = &mut self.tags[child * st + rest];
                            if parent > *t {
                                *t = parent;
                            }
                        }
                    }
                }
            }
        }
        let l = self.leaves;
        let mut out = Vec::with_capacity(l[0] * l[1] * l[2]);
        for i in 0..l[0] {
            for j in 0..l[1] {
                for k in 0..l[2] {
                    out.push(self.tags[(i + l[0]) * self.stride[0] + (j + l[1]) * self.stride[1] + (k + l[2])]);
                }
            }
        }
        out
    }
}
