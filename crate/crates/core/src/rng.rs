use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math;

/// ChaCha8 seeded from a 64-bit seed, on an explicit stream so that one seed
/// can drive several independent draws.
pub(crate) fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Box-Muller pair of independent standard normals.
pub(crate) fn normal_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    let rad = math::sqrt(-2.0 * math::ln(u1));
    (rad * math::cos(TAU * u2), rad * math::sin(TAU * u2))
}
