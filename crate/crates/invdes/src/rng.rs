//! Deterministic pseudo-random streams for task generation, stochastic
//! oracles, and baseline agents.
//!
//! Frozen manifests and calibration artifacts must re-freeze byte-identically
//! years from now, so the generator is owned by this crate instead of pulled
//! from an external crate whose stream may change between major versions.
//! The core is xoshiro256** seeded through SplitMix64; statistical quality is
//! far beyond what goal sampling and Gillespie draws need. Not cryptographic.

/// One SplitMix64 step. Also used as the key-derivation mixer.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a list of stream labels.
///
/// Every independent stream in the suite (per task, per run, per turn) is
/// keyed this way so that parallel evaluation never shares generator state.
pub fn derive_seed(parent: u64, labels: &[u64]) -> u64 {
    let mut state = parent ^ 0xa076_1d64_78bd_642f;
    let mut out = splitmix64(&mut state);
    for &label in labels {
        state ^= label.wrapping_mul(0xe703_7ed1_a0b4_28db);
        out ^= splitmix64(&mut state);
    }
    out
}

/// Hashes a string label into a stream key.
pub fn label(s: &str) -> u64 {
    // FNV-1a, folded into 64 bits.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// xoshiro256** stream.
#[derive(Debug, Clone)]
pub struct DetRng {
    s: [u64; 4],
}

impl DetRng {
    pub fn new(seed: u64) -> Self {
        let mut state = seed;
        let s = [
            splitmix64(&mut state),
            splitmix64(&mut state),
            splitmix64(&mut state),
            splitmix64(&mut state),
        ];
        DetRng { s }
    }

    /// Stream keyed by a parent seed plus string labels.
    pub fn keyed(parent: u64, labels: &[&str]) -> Self {
        let keys: Vec<u64> = labels.iter().map(|l| label(l)).collect();
        Self::new(derive_seed(parent, &keys))
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1]
            .wrapping_mul(5)
            .rotate_left(7)
            .wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.f64()
    }

    /// Uniform integer in `[0, n)`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        // Multiply-shift rejection-free mapping; bias is negligible for the
        // small ranges used here but we reject the tail anyway to keep the
        // distribution exact.
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    /// Uniform integer in `[lo, hi]` inclusive.
    pub fn int_range(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        lo + self.below((hi - lo + 1) as usize) as i64
    }

    /// Standard normal via Box-Muller (one value per call; the pair's second
    /// member is discarded to keep call sequences position-independent).
    pub fn normal(&mut self) -> f64 {
        let u1 = loop {
            let u = self.f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Exponential variate with the given rate (mean `1/rate`).
    pub fn exponential(&mut self, rate: f64) -> f64 {
        let u = loop {
            let u = self.f64();
            if u > 0.0 {
                break u;
            }
        };
        -u.ln() / rate
    }

    /// Chooses one element of a slice.
    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    /// Draws `k` distinct indices from `0..n` (partial Fisher-Yates).
    pub fn distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx
    }
}

/// Radical-inverse (van der Corput) value of `index` in the given base.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut frac = 1.0 / base as f64;
    while index > 0 {
        result += (index % base) as f64 * frac;
        index /= base;
        frac /= base as f64;
    }
    result
}

const HALTON_PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Low-discrepancy point in the `dims`-dimensional unit cube.
///
/// Dimensions beyond the prime table wrap around with an index offset, which
/// keeps the sweep defined for any dimensionality (quality degrades past 16
/// dimensions; the calibration sweeps stay well under that).
pub fn halton_point(index: u64, dims: usize) -> Vec<f64> {
    (0..dims)
        .map(|d| {
            let base = HALTON_PRIMES[d % HALTON_PRIMES.len()];
            let shifted = index + 1 + (d / HALTON_PRIMES.len()) as u64 * 64;
            radical_inverse(shifted, base)
        })
        .collect()
}
