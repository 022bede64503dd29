//! Deterministic sampling.
//!
//! Points come from a Halton sequence with a Cranley-Patterson shift, and
//! per-sample random vectors come from a ChaCha stream. Both are keyed by
//! `(seed, check_id)` and the sample index alone, so sample `i` is the same
//! no matter how many samples are drawn or in which order (or on which
//! thread) they are evaluated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use nalgebra::DVector;

use crate::geometry::DOMAIN_MARGIN;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % b) as f64 * scale;
        index /= b;
        scale *= inv;
    }
    out
}

#[derive(Debug, Clone)]
pub struct Sampler {
    key: [u8; 32],
}

impl Sampler {
    pub fn new(seed: u64, check_id: &str) -> Sampler {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(check_id.as_bytes());
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        Sampler { key }
    }

    /// Independent random stream for sample `index`.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index as u64);
        rng
    }

    fn shift(&self, dim: usize) -> f64 {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(u64::MAX);
        rng.set_word_pos(2 * dim as u128);
        rng.random::<f64>()
    }

    /// Point `index` of the shifted Halton sequence, mapped into `domain`
    /// with the chart margin.
    pub fn point(&self, index: usize, domain: &[(f64, f64)]) -> Vec<f64> {
        domain
            .iter()
            .enumerate()
            .map(|(k, &(lo, hi))| {
                let u = if k < PRIMES.len() {
                    (radical_inverse(index as u64 + 1, PRIMES[k]) + self.shift(k)).fract()
                } else {
                    let mut rng = self.rng(index);
                    rng.set_word_pos(1 << 40 | (2 * k as u128));
                    rng.random::<f64>()
                };
                let (a, b) = (lo + DOMAIN_MARGIN, hi - DOMAIN_MARGIN);
                a + (b - a) * u
            })
            .collect()
    }
}

/// Uniform vector with components in `[-1, 1]`.
pub fn random_vector(rng: &mut impl Rng, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.random_range(-1.0..=1.0))
}

/// Outcome of a max-reduction over samples. Samples whose evaluation fails
/// are counted and skipped; the error of the lowest failing index is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub max: f64,
    pub evaluated: usize,
    pub aborted: usize,
    pub first_error: Option<(usize, String)>,
}

impl Reduction {
    fn empty() -> Reduction {
        Reduction {
            max: 0.0,
            evaluated: 0,
            aborted: 0,
            first_error: None,
        }
    }

    fn merge(self, other: Reduction) -> Reduction {
        let first_error = match (self.first_error, other.first_error) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        Reduction {
            max: fmax(self.max, other.max),
            evaluated: self.evaluated + other.evaluated,
            aborted: self.aborted + other.aborted,
            first_error,
        }
    }
}

/// NaN-poisoning maximum: a NaN residual counts as infinitely bad.
pub fn fmax(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::INFINITY
    } else {
        a.max(b)
    }
}

/// Evaluates `f` on sample indices `0..count` in parallel and reduces by max.
pub fn max_over<E, F>(count: usize, f: F) -> Reduction
where
    E: std::fmt::Display,
    F: Fn(usize) -> Result<f64, E> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| match f(i) {
            Ok(v) => Reduction {
                max: fmax(0.0, v),
                evaluated: 1,
                ..Reduction::empty()
            },
            Err(e) => Reduction {
                aborted: 1,
                first_error: Some((i, e.to_string())),
                ..Reduction::empty()
            },
        })
        .reduce(Reduction::empty, Reduction::merge)
}
