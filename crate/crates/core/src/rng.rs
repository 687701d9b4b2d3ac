//! Deterministic, splittable random streams.
//!
//! The generator is SplitMix64 driven by an explicit counter, so the whole
//! state is `(seed, counter)` and every draw is a pure function of both:
//!
//! ```text
//! mix(z):   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!           z ^= z >> 27; z *= 0x94D049BB133111EB;
//!           z ^= z >> 31
//! next_u64: counter += 1; mix(seed + counter * 0x9E3779B97F4A7C15)
//! next_f64: (next_u64 >> 11) * 2^-53                      in [0, 1)
//! below(n): (next_u64 * n) >> 64  (128-bit product)       in [0, n)
//! derive(i): Rng::new(mix(seed ^ 0xD1B54A32D192ED03) ^ mix(i + 1) * 0x9E3779B97F4A7C15)
//! gaussian: Box-Muller on (u1 = 1 - next_f64, u2 = next_f64), cosine branch only
//! ```
//!
//! All arithmetic wraps modulo 2^64. `derive` ignores the counter, so a child
//! stream depends only on the parent seed and the child index.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const DERIVE_SALT: u64 = 0xD1B5_4A32_D192_ED03;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    seed: u64,
    counter: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream; a pure function of `(seed, index)`.
    pub fn derive(&self, index: u64) -> Rng {
        let child = mix(self.seed ^ DERIVE_SALT) ^ mix(index.wrapping_add(1)).wrapping_mul(GAMMA);
        Rng::new(child)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.seed.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`; returns `lo` when the range is empty.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)`. `n` must be non-zero.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo) as u64 + 1;
        lo + self.below(span) as i64
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    pub fn gaussian(&mut self, mean: f64, std_dev: f64) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        mean + std_dev * z
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.below(len as u64) as usize
    }

    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> Option<&'a T> {
        if items.is_empty() {
            None
        } else {
            Some(&items[self.index(items.len())])
        }
    }

    /// Fisher-Yates, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};

    #[test]
    fn splitmix_reference_values() {
        // SplitMix64 seeded with 0: the well-known first outputs.
        let mut rng = Rng::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(rng.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn derive_ignores_counter() {
        let mut a = Rng::new(42);
        let b = Rng::new(42);
        a.next_u64();
        a.next_u64();
        assert_eq!(a.derive(3), b.derive(3));
        assert_ne!(b.derive(3), b.derive(4));
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = Rng::new(9);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.gaussian(1.0, 2.0)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
        assert!((var - 4.0).abs() < 0.06, "var {var}");
    }

    proptest! {
        #[test]
        fn same_seed_same_sequence(seed in any::<u64>()) {
            let mut a = Rng::new(seed);
            let mut b = Rng::new(seed);
            for _ in 0..16 {
                prop_assert_eq!(a.next_u64(), b.next_u64());
            }
        }

        #[test]
        fn unit_interval(seed in any::<u64>()) {
            let mut rng = Rng::new(seed);
            for _ in 0..64 {
                let x = rng.next_f64();
                prop_assert!((0.0..1.0).contains(&x));
            }
        }

        #[test]
        fn below_in_range(seed in any::<u64>(), n in 1u64..1000) {
            let mut rng = Rng::new(seed);
            for _ in 0..32 {
                prop_assert!(rng.below(n) < n);
            }
        }

        #[test]
        fn shuffle_is_permutation(seed in any::<u64>(), len in 0usize..64) {
            let mut v: Vec<usize> = (0..len).collect();
            Rng::new(seed).shuffle(&mut v);
            v.sort_unstable();
            prop_assert_eq!(v, (0..len).collect::<Vec<_>>());
        }
    }
}
