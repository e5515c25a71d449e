//! Seeded random streams.
//!
//! Every sampler in the crate draws from a private [`ChaCha8Rng`] seeded with
//! `seed_from_u64`. Independent streams (sweep points, estimation groups) get
//! their seeds from [`derive_seed`], so results never depend on scheduling.
//! Multinomial draws visit outcomes in index order and take conditional
//! binomials; [`SAMPLER_VERSION`] names this scheme and is recorded in reports.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

pub const SAMPLER_VERSION: &str = "chacha8-conditional-binomial-v1";

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer over `(seed, stream)`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream.wrapping_add(1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One `Binomial(trials, p)` draw with `p` clamped into `[0, 1]`.
pub fn binomial(rng: &mut ChaCha8Rng, trials: u64, p: f64) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    Binomial::new(trials, p)
        .expect("probability clamped into (0, 1)")
        .sample(rng)
}

/// Multinomial draw of `trials` over `probabilities` (need not be exactly normalised).
pub fn multinomial(rng: &mut ChaCha8Rng, trials: u64, probabilities: &[f64]) -> Vec<u64> {
    let mut counts = vec![0; probabilities.len()];
    let mut remaining = trials;
    let mut mass: f64 = probabilities.iter().map(|p| p.max(0.0)).sum();
    let last = probabilities.iter().rposition(|&p| p > 0.0);
    for (i, &p) in probabilities.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        if Some(i) == last {
            counts[i] = remaining;
            break;
        }
        if p == 0.0 {
            continue;
        }
        let k = binomial(rng, remaining, p / mass);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    counts
}
