use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{elapsed_ms, modular_integral, ExperimentRow};
use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::grid::{GridBox, GridFunction};
use crate::maximal::separable::{tensor_maximal_map, TensorFunction};
use crate::maximal::{multilinear_maximal_map, power_map, MaximalOptions};
use crate::orlicz::{eval_unchecked, YoungSpec};

/// What the experiments need from a function: its distribution and its modulars.
trait Field: Sync {
    fn measure_above(&self, lambda: f64) -> f64;
    fn modular(&self, phi: &YoungSpec, lambda: f64) -> f64;
}

impl Field for GridFunction {
    fn measure_above(&self, lambda: f64) -> f64 {
        self.superlevel_measure(lambda)
    }
    fn modular(&self, phi: &YoungSpec, lambda: f64) -> f64 {
        modular_integral(self, phi, lambda)
    }
}

impl Field for TensorFunction {
    fn measure_above(&self, lambda: f64) -> f64 {
        self.superlevel_measure(lambda)
    }
    fn modular(&self, phi: &YoungSpec, lambda: f64) -> f64 {
        self.integral_of(|v| eval_unchecked(phi, v / lambda))
    }
}

/// Exact self-checks run alongside every multilinear experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfCheck {
    /// `M(f_1,…,f_1) = (M f_1)^m` bit for bit.
    pub identity_exact: bool,
    /// Cells where `M(f⃗) > ∏ M f_i`.
    pub tensor_bound_violations: usize,
}

impl SelfCheck {
    pub fn passed(&self) -> bool {
        self.identity_exact && self.tensor_bound_violations == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsmfReport {
    pub rows: Vec<ExperimentRow>,
    pub self_check: SelfCheck,
    /// Largest `lhs/rhs` against the `Φ_n^{(m)}` right side.
    pub empirical_constant: Option<f64>,
}

fn rows_for<F: Field>(label: &str, map: &impl Field, fs: &[F], lambdas: &[f64], n: u32, map_ms: u64) -> Vec<ExperimentRow> {
    let m = fs.len();
    lambdas
        .iter()
        .map(|&lambda| {
            let t = Instant::now();
            let lhs = map.measure_above(lambda.powi(m as i32));
            let rhs_k = |k: usize| {
                let phi = YoungSpec::Phi { n, m: k as u32 };
                fs.iter().map(|f| f.modular(&phi, lambda)).product::<f64>().powf(1.0 / m as f64)
            };
            let mut row = ExperimentRow::new(label, &[("lambda", lambda)], lhs, rhs_k(m));
            for k in 1..m {
                let r = rhs_k(k);
                row.extra.insert(format!("rhs_phi{k}"), r);
                if r > 0.0 {
                    row.extra.insert(format!("ratio_phi{k}"), lhs / r);
                }
            }
            row.runtime_ms = map_ms + elapsed_ms(t);
            row
        })
        .collect()
}

fn check_inputs(m: usize, lambdas: &[f64], n: u32) -> Result<()> {
    if !(1..=3).contains(&m) {
        return Err(Error::input("functions", format!("m must be 1, 2 or 3, got {m}")));
    }
    if n < 1 {
        return Err(Error::input("n", "n must be ≥ 1"));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::input("lambda", format!("λ must be positive, got {l}")));
    }
    Ok(())
}

/// `|{M_ℛ f > λ}|` against `∫Φ_n(|f|/λ)` for each labelled function and λ.
pub fn jmz_experiment(fs: &[(String, GridFunction)], lambdas: &[f64], n: u32, opts: &MaximalOptions) -> Result<Vec<ExperimentRow>> {
    check_inputs(1, lambdas, n)?;
    let per: Result<Vec<Vec<ExperimentRow>>> = fs
        .par_iter()
        .map(|(label, f)| {
            let t = Instant::now();
            let map = multilinear_maximal_map(std::slice::from_ref(f), &BasisSpec::Rectangles, opts)?;
            Ok(rows_for(label, &map, std::slice::from_ref(f), lambdas, n, elapsed_ms(t)))
        })
        .collect();
    Ok(per?.into_iter().flatten().collect())
}

/// [`jmz_experiment`] for tensor-product functions through the separable path.
pub fn jmz_experiment_tensor(fs: &[JmzFamilyMember], lambdas: &[f64], n: u32, opts: &MaximalOptions) -> Result<Vec<ExperimentRow>> {
    check_inputs(1, lambdas, n)?;
    let per: Result<Vec<Vec<ExperimentRow>>> = fs
        .par_iter()
        .map(|member| {
            let t = Instant::now();
            let map = tensor_maximal_map(std::slice::from_ref(&member.function), opts)?;
            Ok(rows_for(&member.label, &map, std::slice::from_ref(&member.function), lambdas, n, elapsed_ms(t)))
        })
        .collect();
    Ok(per?.into_iter().flatten().collect())
}

/// `|{M_ℛ(f⃗) > λ^m}|` against `{∏∫Φ_n^{(m)}(f_i/λ)}^{1/m}`, with the `Φ_n^{(k)}`,
/// `k < m`, right sides as contrast columns.
pub fn bsmf_experiment(fs: &[GridFunction], lambdas: &[f64], n: u32, opts: &MaximalOptions) -> Result<BsmfReport> {
    let m = fs.len();
    check_inputs(m, lambdas, n)?;
    let spec = BasisSpec::Rectangles;
    let t = Instant::now();
    let map = multilinear_maximal_map(fs, &spec, opts)?;
    let map_ms = elapsed_ms(t);
    let singles = fs
        .iter()
        .map(|f| multilinear_maximal_map(std::slice::from_ref(f), &spec, opts))
        .collect::<Result<Vec<_>>>()?;
    let repeated = multilinear_maximal_map(&vec![fs[0].clone(); m], &spec, opts)?;
    let identity_exact = repeated.values() == power_map(&singles[0], m).values();
    let tensor_bound_violations = (0..map.values().len())
        .filter(|&c| map.values()[c] > singles.iter().fold(1.0, |acc, s| acc * s.values()[c]))
        .count();
    let rows = rows_for(&format!("m={m}"), &map, fs, lambdas, n, map_ms);
    Ok(BsmfReport {
        empirical_constant: super::empirical_constant(&rows),
        rows,
        self_check: SelfCheck {
            identity_exact,
            tensor_bound_violations,
        },
    })
}

/// [`bsmf_experiment`] for tensor products; self-checks run axis by axis.
pub fn bsmf_experiment_tensor(fs: &[TensorFunction], lambdas: &[f64], n: u32, opts: &MaximalOptions) -> Result<BsmfReport> {
    let m = fs.len();
    check_inputs(m, lambdas, n)?;
    let t = Instant::now();
    let map = tensor_maximal_map(fs, opts)?;
    let map_ms = elapsed_ms(t);
    let singles = fs
        .iter()
        .map(|f| tensor_maximal_map(std::slice::from_ref(f), opts))
        .collect::<Result<Vec<_>>>()?;
    let repeated = tensor_maximal_map(&vec![fs[0].clone(); m], opts)?;
    let mut identity_exact = true;
    let mut tensor_bound_violations = 0;
    for k in 0..map.ndim() {
        identity_exact &= repeated.factors()[k].values() == power_map(&singles[0].factors()[k], m).values();
        let v = map.factors()[k].values();
        tensor_bound_violations += (0..v.len())
            .filter(|&c| v[c] > singles.iter().fold(1.0, |acc, s| acc * s.factors()[k].values()[c]))
            .count();
    }
    let rows = rows_for(&format!("m={m}"), &map, fs, lambdas, n, map_ms);
    Ok(BsmfReport {
        empirical_constant: super::empirical_constant(&rows),
        rows,
        self_check: SelfCheck {
            identity_exact,
            tensor_bound_violations,
        },
    })
}

/// A labelled tensor-product test function.
#[derive(Clone, Debug, PartialEq)]
pub struct JmzFamilyMember {
    pub label: String,
    pub function: TensorFunction,
}

/// One-dimensional profiles on `[0, len]` with values in `[0, 1]`.
const PROFILES: [(&str, f64); 10] = [
    ("box1", 1.0),
    ("box2", 2.0),
    ("box_half", 0.5),
    ("tent", 1.0),
    ("sine", 1.0),
    ("ramp", 1.0),
    ("two_boxes", 2.0),
    ("stairs", 1.5),
    ("root_tent", 1.0),
    ("low_box3", 3.0),
];

fn profile(k: usize, x: f64) -> f64 {
    let len = PROFILES[k].1;
    if !(0.0..len).contains(&x) {
        return 0.0;
    }
    match k {
        0..=2 => 1.0,
        3 => 1.0 - (2.0 * x - 1.0).abs(),
        4 => (std::f64::consts::PI * x).sin(),
        5 => 1.0 - x,
        6 => {
            if !(0.5..1.5).contains(&x) {
                1.0
            } else {
                0.0
            }
        }
        7 => {
            if x < 0.5 {
                1.0
            } else {
                0.5
            }
        }
        8 => (1.0 - (2.0 * x - 1.0).abs()).sqrt(),
        _ => 0.5,
    }
}

/// Profile index pairs of the twelve family members.
const PAIRS: [(usize, usize); 12] = [(0, 0), (0, 1), (1, 2), (3, 3), (4, 0), (5, 4), (6, 0), (7, 3), (8, 8), (9, 0), (2, 6), (7, 9)];

/// Twelve tensor products of compactly supported profiles, each factor on a
/// window long enough that `{M_ℛ f > λ}` lies inside it for every `λ ≥ lambda_min`.
pub fn jmz_family(lambda_min: f64, cells_per_unit: usize) -> Result<Vec<JmzFamilyMember>> {
    if !(lambda_min > 0.0 && lambda_min < 1.0) {
        return Err(Error::input("lambda_min", format!("must lie in (0, 1), got {lambda_min}")));
    }
    if cells_per_unit == 0 {
        return Err(Error::input("cells_per_unit", "must be positive"));
    }
    let h = 1.0 / cells_per_unit as f64;
    // mass and peak of each sampled profile
    let stats: Vec<(f64, f64)> = (0..PROFILES.len())
        .map(|k| {
            let cells = (PROFILES[k].1 * cells_per_unit as f64).round() as usize;
            let v: Vec<f64> = (0..cells).map(|i| profile(k, (i as f64 + 0.5) * h)).collect();
            (v.iter().sum::<f64>() * h, v.iter().copied().fold(0.0, f64::max))
        })
        .collect();
    let factor = |k: usize, other_peak: f64| -> Result<GridFunction> {
        // M a(x) ≤ mass/dist(x, supp a), and the other axis contributes at most its peak
        let pad = (stats[k].0 * other_peak / lambda_min + 1.0).ceil();
        let len = PROFILES[k].1;
        let dims = ((len + 2.0 * pad) * cells_per_unit as f64).round() as usize;
        let gbox = GridBox::new(vec![-pad], vec![len + pad], vec![dims])?;
        GridFunction::from_sampler(gbox, |x| profile(k, x[0]))
    };
    PAIRS
        .iter()
        .map(|&(a, b)| {
            Ok(JmzFamilyMember {
                label: format!("{}x{}", PROFILES[a].0, PROFILES[b].0),
                function: TensorFunction::new(vec![factor(a, stats[b].1)?, factor(b, stats[a].1)?])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{analytic_square_superlevel, geometric_grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square(gbox: GridBox) -> GridFunction {
        GridFunction::from_sampler(gbox, |x| if (0.0..1.0).contains(&x[0]) && (0.0..1.0).contains(&x[1]) { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn bsmf_m1_is_jmz() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let gbox = GridBox::unit(&[6, 6]).unwrap();
        let f = GridFunction::new(gbox, (0..36).map(|_| rng.gen::<f64>()).collect()).unwrap();
        let lambdas = geometric_grid(0.05, 0.8, 7);
        let opts = MaximalOptions::default();
        let a = jmz_experiment(&[("m=1".into(), f.clone())], &lambdas, 2, &opts).unwrap();
        let b = bsmf_experiment(&[f], &lambdas, 2, &opts).unwrap();
        for (x, y) in a.iter().zip(&b.rows) {
            assert_eq!((x.lhs, x.rhs, x.ratio), (y.lhs, y.rhs, y.ratio));
        }
        assert!(b.self_check.passed());
    }

    #[test]
    fn square_rows_against_oracle() {
        let gbox = GridBox::new(vec![-4.0, -4.0], vec![5.0, 5.0], vec![36, 36]).unwrap();
        let chi = square(gbox.clone());
        let opts = MaximalOptions::default();
        // the best aligned rectangle runs from the square to the far edge of the cell
        let map = multilinear_maximal_map(std::slice::from_ref(&chi), &BasisSpec::Rectangles, &opts).unwrap();
        let far = |i: usize, axis: usize| {
            let h = gbox.cell_width(axis);
            let lo = gbox.lower()[axis] + i as f64 * h;
            if lo >= 1.0 {
                lo + h
            } else {
                lo
            }
        };
        for i in 0..36 {
            for j in 0..36 {
                let want = crate::harness::analytic_square_profile(&[far(i, 0), far(j, 1)]);
                assert!((map.get(&[i, j]) - want).abs() < 1e-14, "cell ({i},{j})");
            }
        }
        let rows = jmz_experiment(&[("chi".into(), chi)], &[0.5, 0.25], 2, &opts).unwrap();
        for r in &rows {
            let lambda = r.param("lambda");
            assert!(r.lhs <= analytic_square_superlevel(lambda).unwrap());
            let want = (1.0 / lambda) * (std::f64::consts::E + 1.0 / lambda).ln();
            assert!((r.rhs - want).abs() < 1e-14 * want);
        }
        let zero = jmz_experiment(&[("zero".into(), GridFunction::zeros(GridBox::unit(&[4, 4]).unwrap()))], &[0.5], 2, &opts).unwrap();
        assert!(zero[0].flagged && zero[0].lhs == 0.0 && zero[0].rhs == 0.0);
    }

    #[test]
    fn scaled_indicator_invariance() {
        // (c·f, c·λ) reproduces the row of (f, λ)
        let chi = square(GridBox::new(vec![-3.0, -3.0], vec![4.0, 4.0], vec![28, 28]).unwrap());
        let opts = MaximalOptions::default();
        let base = jmz_experiment(&[("chi".into(), chi.clone())], &[0.3], 2, &opts).unwrap();
        for c in [2.0, 8.0, 64.0] {
            let r = jmz_experiment(&[("c".into(), chi.scaled(c).unwrap())], &[0.3 * c], 2, &opts).unwrap();
            assert!((r[0].ratio.unwrap() - base[0].ratio.unwrap()).abs() < 1e-12 * base[0].ratio.unwrap());
        }
    }

    #[test]
    fn square_pair_identity_and_contrast() {
        let gbox = GridBox::new(vec![-4.0, -4.0], vec![5.0, 5.0], vec![36, 36]).unwrap();
        let chi = square(gbox);
        let lambdas = [0.5, 0.3];
        let r = bsmf_experiment(&[chi.clone(), chi.clone()], &lambdas, 2, &MaximalOptions::default()).unwrap();
        assert!(r.self_check.passed());
        let single = jmz_experiment(&[("chi".into(), chi)], &lambdas, 2, &MaximalOptions::default()).unwrap();
        for (p, s) in r.rows.iter().zip(&single) {
            assert_eq!(p.lhs, s.lhs);
            assert!(p.extra.contains_key("ratio_phi1"));
        }
    }

    #[test]
    fn tensor_matches_dense() {
        let fam = jmz_family(0.5, 2).unwrap();
        assert_eq!(fam.len(), 12);
        let lambdas = [0.5, 0.7];
        let opts = MaximalOptions::default();
        for member in fam.iter().take(3) {
            let dense = jmz_experiment(&[(member.label.clone(), member.function.to_grid())], &lambdas, 2, &opts).unwrap();
            let tensor = jmz_experiment_tensor(std::slice::from_ref(member), &lambdas, 2, &opts).unwrap();
            for (d, t) in dense.iter().zip(&tensor) {
                assert!((d.lhs - t.lhs).abs() <= 1e-12 * d.lhs.max(1.0));
                assert!((d.rhs - t.rhs).abs() <= 1e-12 * d.rhs);
            }
        }
        let fs: Vec<TensorFunction> = fam[..2].iter().map(|m| m.function.clone()).collect();
        assert!(bsmf_experiment_tensor(&fs, &lambdas, 2, &opts).is_err(), "factor grids differ");
        let same = vec![fam[0].function.clone(), fam[0].function.clone()];
        assert!(bsmf_experiment_tensor(&same, &lambdas, 2, &opts).unwrap().self_check.passed());
    }
}
