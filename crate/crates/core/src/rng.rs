//! Portable seeded randomness.
//!
//! Every random decision in the harness is drawn from ChaCha8 keyed by the
//! user seed. The construction is fixed so other implementations can
//! reproduce a batch exactly:
//!
//! * key: the 64-bit seed as 8 little-endian bytes followed by 24 zero bytes
//!   (or a SHA-256 digest for per-question streams, see [`SeededRng::derived`]);
//! * stream (nonce): a [`Stream`] constant identifying the purpose;
//! * `next_u64`: two consecutive 32-bit output words, low word first;
//! * `below(n)`: rejection sampling, draw `x = next_u64()` until
//!   `x < 2^64 - (2^64 mod n)`, return `x mod n`;
//! * `shuffle`: Fisher-Yates from the end, `j = below(i + 1)` for
//!   `i = len-1 down to 1`;
//! * `unit()`: `(next_u64() >> 11) * 2^-53`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

/// Purpose-specific stream identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Sample = 1,
    Presentation = 2,
    Options = 3,
    Noise = 4,
    MonteCarlo = 5,
}

pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream: Stream) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Self::from_key(key, stream)
    }

    /// A stream keyed by `SHA-256(seed_le || label)`, for draws that must not
    /// depend on the order in which questions are processed.
    pub fn derived(seed: u64, label: &str, stream: Stream) -> Self {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(label.as_bytes());
        Self::from_key(h.finalize().into(), stream)
    }

    fn from_key(key: [u8; 32], stream: Stream) -> Self {
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream as u64);
        SeededRng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        let lo = self.inner.next_u32() as u64;
        let hi = self.inner.next_u32() as u64;
        (hi << 32) | lo
    }

    /// Uniform integer in `0..n`. Panics on `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        // 2^64 mod n, computed without overflow.
        let rem = (u64::MAX % n + 1) % n;
        let limit = u64::MAX - rem; // accept x <= limit, i.e. x < 2^64 - rem
        loop {
            let x = self.next_u64();
            if rem == 0 || x <= limit {
                return x % n;
            }
        }
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n`, uniformly, via partial Fisher-Yates
    /// from the front: for `i in 0..k`, swap slot `i` with `i + below(n - i)`.
    /// Returned in selection order.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}
