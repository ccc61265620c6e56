//! Seeded reference sampling shared by the content and temporal threshold
//! estimators. Both estimators must see the identical sample in the same
//! repeat, so the per-repeat seed schedule lives here.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives the RNG seed for one repeat of the threshold procedure from the
/// event's base seed. SplitMix64-style finalizer so consecutive repeats
/// decorrelate.
pub fn repeat_seed(base: u64, repeat: u32) -> u64 {
    let mut z = base ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(u64::from(repeat) + 1);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic sample of `floor(fraction * n)` indices out of `0..n` for the
/// given repeat, sorted ascending.
pub fn sample_indices(base_seed: u64, repeat: u32, n: usize, fraction: f64) -> Vec<usize> {
    let k = ((fraction * n as f64).floor() as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(repeat_seed(base_seed, repeat));
    let mut picked = rand::seq::index::sample(&mut rng, n, k).into_vec();
    picked.sort_unstable();
    picked
}

/// Indices of `0..n` not present in the sorted sample.
pub fn complement_indices(sample: &[usize], n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n - sample.len());
    let mut it = sample.iter().peekable();
    for i in 0..n {
        if it.peek() == Some(&&i) {
            it.next();
        } else {
            out.push(i);
        }
    }
    out
}
