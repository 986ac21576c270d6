//! Tensor-product functions `f(x) = a_1(x_1)·a_2(x_2)·…` and their maximal maps.
//!
//! Over the rectangle basis a rectangle is a product of intervals, so its
//! average of a tensor product is the product of one-dimensional averages and
//! the supremum splits axis by axis:
//!
//! ```text
//! M_ℛ(f_1,…,f_m)(x) = ∏_axes  sup_{I ∋ x_k} ∏_i avg_I a_{i,k}
//! ```
//!
//! This gives the strong maximal function of large grids (hundreds of cells
//! per side and beyond) from one-dimensional interval scans.

use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::grid::{GridBox, GridFunction, MAX_DIM};

use super::{multilinear_maximal_map, Algorithm, MaximalOptions};

/// `a_1 ⊗ a_2 ⊗ …`, one one-dimensional factor per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorFunction {
    factors: Vec<GridFunction>,
}

impl TensorFunction {
    pub fn new(factors: Vec<GridFunction>) -> Result<Self> {
        if factors.is_empty() || factors.len() > MAX_DIM {
            return Err(Error::input("factors", format!("need 1..={MAX_DIM} factors, got {}", factors.len())));
        }
        if let Some(k) = factors.iter().position(|f| f.grid().ndim() != 1) {
            return Err(Error::input("factors", format!("factor {k} is not one-dimensional")));
        }
        Ok(TensorFunction { factors })
    }

    pub fn factors(&self) -> &[GridFunction] {
        &self.factors
    }

    pub fn ndim(&self) -> usize {
        self.factors.len()
    }

    pub fn grid(&self) -> GridBox {
        let g = |f: &GridFunction| (f.grid().lower()[0], f.grid().upper()[0], f.grid().dims()[0]);
        let parts: Vec<_> = self.factors.iter().map(g).collect();
        GridBox::new(
            parts.iter().map(|p| p.0).collect(),
            parts.iter().map(|p| p.1).collect(),
            parts.iter().map(|p| p.2).collect(),
        )
        .expect("factor boxes are valid")
    }

    pub fn cell_volume(&self) -> f64 {
        self.factors.iter().map(|f| f.grid().cell_volume()).product()
    }

    /// Dense values, each cell the left-to-right product of its factors.
    pub fn to_grid(&self) -> GridFunction {
        let gbox = self.grid();
        let mut values = Vec::with_capacity(gbox.cell_count());
        self.for_each_value(|v| values.push(v));
        GridFunction::from_raw(gbox, values)
    }

    fn for_each_value(&self, mut f: impl FnMut(f64)) {
        let v: Vec<&[f64]> = self.factors.iter().map(|g| g.values()).collect();
        match v.len() {
            1 => v[0].iter().for_each(|&a| f(a)),
            2 => {
                for &a in v[0] {
                    for &b in v[1] {
                        f(a * b)
                    }
                }
            }
            _ => {
                for &a in v[0] {
                    for &b in v[1] {
                        for &c in v[2] {
                            f(a * b * c)
                        }
                    }
                }
            }
        }
    }

    /// `∫ op(f)` over cells where `f > 0`; `op(0)` is taken to be 0.
    pub fn integral_of(&self, op: impl Fn(f64) -> f64) -> f64 {
        let nz: Vec<Vec<f64>> = self
            .factors
            .iter()
            .map(|g| g.values().iter().copied().filter(|&x| x > 0.0).collect())
            .collect();
        let sparse = TensorFunction {
            factors: nz
                .into_iter()
                .map(|v| {
                    let n = v.len().max(1);
                    let v = if v.is_empty() { vec![0.0] } else { v };
                    GridFunction::from_raw(GridBox::unit(&[n]).unwrap(), v)
                })
                .collect(),
        };
        let mut s = 0.0;
        sparse.for_each_value(|x| {
            if x > 0.0 {
                s += op(x)
            }
        });
        s * self.cell_volume()
    }

    pub fn integral(&self) -> f64 {
        self.factors.iter().map(|f| f.integral()).product()
    }

    /// `|{f > λ}|` without materializing the grid.
    pub fn superlevel_measure(&self, lambda: f64) -> f64 {
        let v: Vec<&[f64]> = self.factors.iter().map(|g| g.values()).collect();
        let count = match v.len() {
            1 => v[0].iter().filter(|&&a| a > lambda).count(),
            2 => pair_count(v[0], v[1], lambda, |a| a),
            _ => v[0]
                .iter()
                .map(|&a| pair_count(v[1], v[2], lambda, |b| a * b))
                .sum(),
        };
        count as f64 * self.cell_volume()
    }
}

/// `#{(i,j) : lead(x_i)·y_j > λ}` by binary search over sorted `y`.
fn pair_count(x: &[f64], y: &[f64], lambda: f64, lead: impl Fn(f64) -> f64) -> usize {
    let mut ys = y.to_vec();
    ys.sort_by(f64::total_cmp);
    x.iter()
        .map(|&a| {
            let p = lead(a);
            // predicate p·y > λ is monotone in y for p ≥ 0
            ys.len() - ys.partition_point(|&b| !(p * b > lambda))
        })
        .sum()
}

/// `M_ℛ(f_1,…,f_m)` for tensor products sharing one product grid.
pub fn tensor_maximal_map(fs: &[TensorFunction], opts: &MaximalOptions) -> Result<TensorFunction> {
    let first = fs.first().ok_or_else(|| Error::input("functions", "at least one function is required"))?;
    let nd = first.ndim();
    if let Some(k) = fs.iter().position(|f| f.ndim() != nd) {
        return Err(Error::Shape(format!("function {k} has {} factors, expected {nd}", fs[k].ndim())));
    }
    let mut axis_opts = opts.clone();
    if axis_opts.algorithm == Algorithm::Auto {
        axis_opts.algorithm = Algorithm::Sweep;
    }
    let factors = (0..nd)
        .map(|axis| {
            let slot: Vec<GridFunction> = fs.iter().map(|f| f.factors[axis].clone()).collect();
            multilinear_maximal_map(&slot, &BasisSpec::Rectangles, &axis_opts)
        })
        .collect::<Result<Vec<_>>>()?;
    TensorFunction::new(factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maximal::maximal_map;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_1d(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> GridFunction {
        let b = GridBox::new(vec![lo], vec![hi], vec![n]).unwrap();
        GridFunction::new(b, (0..n).map(|_| rng.gen::<f64>()).collect()).unwrap()
    }

    #[test]
    fn tensor_map_matches_dense_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let t1 = TensorFunction::new(vec![random_1d(&mut rng, 9, 0.0, 2.0), random_1d(&mut rng, 7, -1.0, 1.0)]).unwrap();
            let t2 = TensorFunction::new(vec![random_1d(&mut rng, 9, 0.0, 2.0), random_1d(&mut rng, 7, -1.0, 1.0)]).unwrap();
            let opts = MaximalOptions::default();
            let dense = multilinear_maximal_map(&[t1.to_grid(), t2.to_grid()], &BasisSpec::Rectangles, &opts).unwrap();
            let sep = tensor_maximal_map(&[t1.clone(), t2], &opts).unwrap().to_grid();
            for (a, b) in dense.values().iter().zip(sep.values()) {
                assert!((a - b).abs() <= 1e-13 * a.max(1e-300), "{a} vs {b}");
            }
            let dense1 = maximal_map(&t1.to_grid(), &BasisSpec::Rectangles, &opts).unwrap();
            let sep1 = tensor_maximal_map(&[t1], &opts).unwrap().to_grid();
            for (a, b) in dense1.values().iter().zip(sep1.values()) {
                assert!((a - b).abs() <= 1e-13 * a.max(1e-300));
            }
        }
    }

    #[test]
    fn superlevel_counts_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let t = TensorFunction::new(vec![
            random_1d(&mut rng, 10, 0.0, 1.0),
            random_1d(&mut rng, 6, 0.0, 3.0),
            random_1d(&mut rng, 5, 0.0, 1.0),
        ])
        .unwrap();
        let d = t.to_grid();
        for lam in [0.0, 0.01, 0.1, 0.3, 0.7, 2.0] {
            assert_eq!(t.superlevel_measure(lam), d.superlevel_measure(lam));
        }
        let t2 = TensorFunction::new(t.factors()[..2].to_vec()).unwrap();
        let d2 = t2.to_grid();
        for lam in [0.0, 0.05, 0.2, 0.5] {
            assert_eq!(t2.superlevel_measure(lam), d2.superlevel_measure(lam));
        }
    }

    #[test]
    fn integrals() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let t = TensorFunction::new(vec![random_1d(&mut rng, 8, 0.0, 1.0), random_1d(&mut rng, 8, 0.0, 2.0)]).unwrap();
        let d = t.to_grid();
        assert!((t.integral() - d.integral()).abs() < 1e-12);
        let sq = t.integral_of(|x| x * x);
        let direct: f64 = d.values().iter().map(|x| x * x).sum::<f64>() * d.grid().cell_volume();
        assert!((sq - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn rejects_bad_factors() {
        assert!(TensorFunction::new(vec![]).is_err());
        let two_d = GridFunction::zeros(GridBox::unit(&[2, 2]).unwrap());
        assert!(TensorFunction::new(vec![two_d]).is_err());
    }
}
