//! Seeded random test data. All randomness in the crate flows through a
//! counter-based generator seeded explicitly, so every run is reproducible.

use crate::fiber::Signal;
use crate::group::{FiniteAbelianGroup, Side};
use crate::linalg::{CMat, CVec};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_signal(group: &FiniteAbelianGroup, side: Side, rng: &mut ChaCha8Rng) -> Signal {
    let values: CVec = (0..group.order()).map(|_| random_complex(rng)).collect();
    Signal::new(group, side, values)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_shape_fn((rows, cols), |_| random_complex(rng))
}

pub fn random_vector(len: usize, rng: &mut ChaCha8Rng) -> CVec {
    (0..len).map(|_| random_complex(rng)).collect()
}
