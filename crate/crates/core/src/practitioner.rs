//! Boundedly rational practitioners: noisy evaluation and idea generation.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bitspace::Strategy;
use crate::error::{Error, Result};
use crate::landscape::Landscape;

/// A practitioner's view of its own landscape. Practitioner `0` is the firm.
#[derive(Debug, Clone, Copy)]
pub struct Practitioner<'a> {
    index: usize,
    error_stddev: f64,
    landscape: &'a Landscape,
}

impl<'a> Practitioner<'a> {
    pub fn new(index: usize, error_stddev: f64, landscape: &'a Landscape) -> Result<Self> {
        if !(error_stddev >= 0.0 && error_stddev.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "error stddev must be finite and >= 0, got {error_stddev}"
            )));
        }
        Ok(Practitioner {
            index,
            error_stddev,
            landscape,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn is_firm(&self) -> bool {
        self.index == 0
    }

    pub fn error_stddev(&self) -> f64 {
        self.error_stddev
    }

    pub fn landscape(&self) -> &'a Landscape {
        self.landscape
    }

    /// True performance plus a fresh `Normal(0, E_j^2)` error. Not clamped.
    pub fn noisy_eval<R: Rng + ?Sized>(&self, s: &Strategy, rng: &mut R) -> f64 {
        let truth = self.landscape.performance(s);
        if self.error_stddev == 0.0 {
            return truth;
        }
        let z: f64 = StandardNormal.sample(rng);
        truth + self.error_stddev * z
    }

    /// Imagines `q` distinct members of `pool`, evaluates each once and returns
    /// the one perceived best. Exact ties are broken uniformly at random.
    pub fn generate_idea<R: Rng + ?Sized>(
        &self,
        pool: &[Strategy],
        q: usize,
        rng: &mut R,
    ) -> Result<Strategy> {
        if q == 0 || q > pool.len() {
            return Err(Error::InvalidInput(format!(
                "imagination capacity Q={q} must be in 1..={}",
                pool.len()
            )));
        }
        let mut best = None;
        let mut best_value = f64::NEG_INFINITY;
        let mut ties = 0u32;
        for i in index::sample(rng, pool.len(), q) {
            let candidate = pool[i];
            let value = self.noisy_eval(&candidate, rng);
            if value > best_value {
                best = Some(candidate);
                best_value = value;
                ties = 1;
            } else if value == best_value {
                // reservoir choice keeps each tied candidate with equal probability
                ties += 1;
                if rng.random_range(0..ties) == 0 {
                    best = Some(candidate);
                }
            }
        }
        Ok(best.expect("q >= 1 candidates evaluated"))
    }
}

/// Individual error levels `E_j = |D_j|` with `D_j ~ Normal(0, E^2)`.
pub fn draw_error_stddevs<R: Rng + ?Sized>(count: usize, base_stddev: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(base_stddev >= 0.0 && base_stddev.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "base error stddev must be finite and >= 0, got {base_stddev}"
        )));
    }
    Ok((0..count)
        .map(|_| {
            let d: f64 = StandardNormal.sample(rng);
            (base_stddev * d).abs()
        })
        .collect())
}
