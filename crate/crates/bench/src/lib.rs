//! Input generators shared by the benchmarks.

use maxrect::{GridBox, GridFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform `[0, 1)` values on the unit square at `side × side`.
pub fn random_square(side: usize, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..side * side).map(|_| rng.gen::<f64>()).collect();
    GridFunction::new(GridBox::unit(&[side, side]).expect("nonempty"), values).expect("finite values")
}

/// `m` independent random squares.
pub fn random_vector(side: usize, m: usize, seed: u64) -> Vec<GridFunction> {
    (0..m as u64).map(|k| random_square(side, seed.wrapping_add(k))).collect()
}
