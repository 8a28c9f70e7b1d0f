//! Seeded random symbols for sweeps and tests.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fourier::{FourierLoop, LoopLog};
use crate::invariants::SteinbergSymbol;

pub const MAX_WINDING: i64 = 3;
pub const MAX_BAND: usize = 6;
pub const MAX_COEFF: f64 = 0.3;

/// Coefficient uniformly distributed in the disk of the given radius.
pub fn disk_sample<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, 2.0 * PI * rng.gen::<f64>())
}

/// Loop with band uniform in `0..=max_band` and coefficients in the disk.
pub fn random_loop<R: Rng>(rng: &mut R, max_band: usize, radius: f64) -> FourierLoop {
    let band = rng.gen_range(0..=max_band) as i64;
    FourierLoop::from_pairs((-band..=band).map(|k| (k, disk_sample(rng, radius))).collect::<Vec<_>>())
}

pub fn random_symbol<R: Rng>(rng: &mut R) -> SteinbergSymbol {
    let n = rng.gen_range(-MAX_WINDING..=MAX_WINDING);
    let a = random_loop(rng, MAX_BAND, MAX_COEFF);
    let m = rng.gen_range(-MAX_WINDING..=MAX_WINDING);
    let b = random_loop(rng, MAX_BAND, MAX_COEFF);
    SteinbergSymbol::new(LoopLog::new(n, a), LoopLog::new(m, b))
}

/// The first `count` symbols of the stream seeded by `seed`.
pub fn symbol_corpus(seed: u64, count: usize) -> Vec<SteinbergSymbol> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_symbol(&mut rng)).collect()
}
