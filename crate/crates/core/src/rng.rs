//! Reproducible random streams and the chunked parallel reduction.
//!
//! A stream is keyed by `(master_seed, stream_index, tag)`; chunk `k` of a run
//! uses ChaCha's stream selector `k`. Work inside a chunk is sequential and
//! chunk results are merged in index order, so the output depends on the seed
//! and the chunk size but never on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_CHUNK: usize = 16_384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }

    /// Sibling stream with a different index.
    pub fn with_stream(self, stream_index: u64) -> Self {
        Self { stream_index, ..self }
    }

    /// Generator for one chunk. Distinct `tag`s give unrelated streams for the same seed.
    pub fn rng(&self, tag: u64, chunk: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_index.to_le_bytes());
        key[16..24].copy_from_slice(&tag.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(chunk);
        rng
    }
}

/// Streaming mean and centred second moment.
///
/// The reported mean is the plain ordered sum over `n`, which keeps it
/// monotone in the samples; the running mean only feeds `m2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.n as f64 * w;
        self.sum += other.sum;
        self.n = n;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// A Monte Carlo value with its sampling error and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: SeedSpec,
}

impl Estimate {
    pub fn from_moments(m: &Moments, seed: SeedSpec) -> Self {
        Self { value: m.mean(), std_error: m.std_error(), n_samples: m.n, seed }
    }

    /// Whether `other` lies within `k` combined standard errors.
    pub fn agrees_with(&self, other: f64, other_se: f64, k: f64) -> bool {
        let se = self.std_error.hypot(other_se);
        (self.value - other).abs() <= k * se
    }
}

/// Run `work(rng, chunk_index, count)` over `n` samples split into fixed chunks.
///
/// Results come back in chunk order.
pub fn run_chunks<T, F>(seed: SeedSpec, tag: u64, n: usize, chunk: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize, usize) -> T + Sync,
{
    let chunk = chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let count = chunk.min(n - k * chunk);
            let mut rng = seed.rng(tag, k as u64);
            work(&mut rng, k, count)
        })
        .collect()
}

/// Fold chunk-local [`Moments`] into one, merging left to right.
pub fn merge_all<'a, I: IntoIterator<Item = &'a Moments>>(parts: I) -> Moments {
    let mut total = Moments::default();
    for m in parts {
        total.merge(m);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_key_same_stream() {
        let s = SeedSpec::new(7, 3);
        let a: Vec<u64> = (0..4).map(|_| 0).scan(s.rng(1, 2), |r, _| Some(r.random())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(s.rng(1, 2), |r, _| Some(r.random())).collect();
        assert_eq!(a, b);
        let c: u64 = s.with_stream(4).rng(1, 2).random();
        assert_ne!(a[0], c);
        let d: u64 = s.rng(1, 3).random();
        assert_ne!(a[0], d);
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut seq = Moments::default();
        xs.iter().for_each(|&x| seq.push(x));
        let mut parts = Vec::new();
        for c in xs.chunks(77) {
            let mut m = Moments::default();
            c.iter().for_each(|&x| m.push(x));
            parts.push(m);
        }
        let merged = merge_all(&parts);
        assert_eq!(merged.n, seq.n);
        assert!((merged.mean() - seq.mean()).abs() < 1e-12);
        assert!((merged.m2 - seq.m2).abs() < 1e-8 * seq.m2);
    }

    #[test]
    fn independent_of_thread_count() {
        let s = SeedSpec::new(11, 0);
        let run = || {
            let parts = run_chunks(s, 5, 10_001, 1000, |rng, _, count| {
                let mut m = Moments::default();
                for _ in 0..count {
                    m.push(rng.random::<f64>());
                }
                m
            });
            merge_all(&parts)
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
        assert_eq!(one, four);
        assert_eq!(one.n, 10_001);
    }
}
