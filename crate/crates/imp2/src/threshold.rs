//! Step-budget estimation by sampling the program space.
//!
//! Programs of bounded code length are drawn uniformly at random and run
//! under a generous provisional budget. The step counts of the runs that
//! terminate on their own (valid halts and extensions alike) form an
//! empirical distribution; the threshold is a quantile of it scaled by a
//! safety factor. With the defaults (quantile 1, factor 2) that is twice
//! the slowest termination observed.

use crate::codec::sample_program;
use crate::interpreter::{execute_code, Status};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThresholdError {
    #[error("no sampled program terminated within {budget} steps; increase the provisional budget or the sample count")]
    NoTerminatingSamples { budget: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Inputs of [`estimate_threshold`].
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdParams {
    /// Maximum code length of sampled programs.
    pub max_len: u32,
    /// Number of programs to draw.
    pub samples: u64,
    /// Step budget used while sampling.
    pub provisional_budget: u64,
    /// Quantile of the terminating step counts, in (0, 1]; 1 is the max.
    pub quantile: f64,
    /// Multiplier applied on top of the quantile, at least 1.
    pub safety_factor: f64,
    pub rng_seed: u64,
}

impl ThresholdParams {
    pub fn new(max_len: u32, rng_seed: u64) -> Self {
        ThresholdParams {
            max_len,
            samples: 100_000,
            provisional_budget: 1_000_000,
            quantile: 1.0,
            safety_factor: 2.0,
            rng_seed,
        }
    }
}

/// The estimate together with everything needed to audit or reproduce it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdEstimate {
    pub threshold: u64,
    pub samples_drawn: u64,
    /// Samples whose run terminated on its own (halted or extension).
    pub halting_samples: u64,
    pub max_halting_steps: u64,
    pub quantile_used: String,
    pub safety_factor: String,
    pub rng_seed: u64,
}

/// Draws `samples` programs of length at most `max_len`, executes each
/// under the provisional budget, and returns the scaled quantile of the
/// terminating step counts. Deterministic for a fixed seed.
pub fn estimate_threshold(params: &ThresholdParams) -> Result<ThresholdEstimate, ThresholdError> {
    if params.samples == 0 {
        return Err(ThresholdError::InvalidParameter(
            "samples must be at least 1".into(),
        ));
    }
    if params.provisional_budget == 0 {
        return Err(ThresholdError::InvalidParameter(
            "provisional budget must be at least 1".into(),
        ));
    }
    if !(params.quantile > 0.0 && params.quantile <= 1.0) {
        return Err(ThresholdError::InvalidParameter(
            "quantile must lie in (0, 1]".into(),
        ));
    }
    if !(params.safety_factor >= 1.0) {
        return Err(ThresholdError::InvalidParameter(
            "safety factor must be at least 1".into(),
        ));
    }
    if params.max_len == 0 {
        return Err(ThresholdError::InvalidParameter(
            "maximum code length must be at least 1".into(),
        ));
    }

    // Draw every program from one sequential generator so the sample set
    // depends only on the seed, then execute in parallel.
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let codes: Vec<_> = (0..params.samples)
        .map(|_| sample_program(params.max_len, &mut rng).expect("max_len >= 1"))
        .collect();

    let mut terminating: Vec<u64> = codes
        .par_iter()
        .filter_map(|code| {
            let outcome = execute_code(code, params.provisional_budget);
            outcome
                .status
                .is_termination()
                .then_some(outcome.steps_used)
        })
        .collect();
    terminating.sort_unstable();

    if terminating.is_empty() {
        return Err(ThresholdError::NoTerminatingSamples {
            budget: params.provisional_budget,
        });
    }

    let quantile_steps = quantile_of_sorted(&terminating, params.quantile);
    let threshold = (quantile_steps as f64 * params.safety_factor).ceil() as u64;

    Ok(ThresholdEstimate {
        threshold,
        samples_drawn: params.samples,
        halting_samples: terminating.len() as u64,
        max_halting_steps: *terminating.last().expect("non-empty"),
        quantile_used: format!("{}", params.quantile),
        safety_factor: format!("{}", params.safety_factor),
        rng_seed: params.rng_seed,
    })
}

/// The smallest element with at least `ceil(q * n)` elements at or below
/// it; `q = 1` is the maximum.
fn quantile_of_sorted(sorted: &[u64], q: f64) -> u64 {
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// Scaled quantile of a multiset of step counts; what the estimator
/// applies to the sampled termination statistics.
pub fn scaled_quantile(mut steps: Vec<u64>, quantile: f64, safety_factor: f64) -> Option<u64> {
    if steps.is_empty() {
        return None;
    }
    steps.sort_unstable();
    let q = quantile_of_sorted(&steps, quantile);
    Some((q as f64 * safety_factor).ceil() as u64)
}

/// Re-executes the terminating samples of an estimate's seed under the
/// returned threshold and reports whether any run changed status.
pub fn verify_estimate(params: &ThresholdParams, estimate: &ThresholdEstimate) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let codes: Vec<_> = (0..params.samples)
        .map(|_| sample_program(params.max_len, &mut rng).expect("max_len >= 1"))
        .collect();
    codes.par_iter().all(|code| {
        let provisional = execute_code(code, params.provisional_budget);
        if !provisional.status.is_termination() {
            return true;
        }
        let rerun = execute_code(code, estimate.threshold);
        rerun.status == provisional.status && rerun.steps_used == provisional.steps_used
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_arithmetic_on_known_multiset() {
        assert_eq!(scaled_quantile(vec![3, 10], 1.0, 2.0), Some(20));
        assert_eq!(scaled_quantile(vec![10, 3], 1.0, 2.0), Some(20));
        assert_eq!(scaled_quantile(vec![1, 2, 3, 4], 0.5, 1.0), Some(2));
        assert_eq!(scaled_quantile(vec![7], 0.01, 3.0), Some(21));
        assert_eq!(scaled_quantile(vec![], 1.0, 2.0), None);
    }

    #[test]
    fn singleton_space_gives_twice_the_skip_cost() {
        // Every length-1 code is skip on the empty input, which takes one
        // step, so the default estimator returns 2.
        let params = ThresholdParams {
            samples: 10,
            provisional_budget: 100,
            ..ThresholdParams::new(1, 99)
        };
        let est = estimate_threshold(&params).unwrap();
        assert_eq!(est.threshold, 2);
        assert_eq!(est.samples_drawn, 10);
        assert_eq!(est.halting_samples, 10);
        assert_eq!(est.max_halting_steps, 1);
    }

    #[test]
    fn same_seed_reproduces_the_estimate() {
        let params = ThresholdParams {
            samples: 500,
            provisional_budget: 10_000,
            ..ThresholdParams::new(10, 1234)
        };
        let a = estimate_threshold(&params).unwrap();
        let b = estimate_threshold(&params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn larger_safety_factor_never_lowers_the_threshold() {
        let base = ThresholdParams {
            samples: 300,
            provisional_budget: 10_000,
            ..ThresholdParams::new(12, 7)
        };
        let mut previous = 0;
        for factor in [1.0, 1.5, 2.0, 4.0] {
            let est = estimate_threshold(&ThresholdParams {
                safety_factor: factor,
                ..base.clone()
            })
            .unwrap();
            assert!(est.threshold >= previous);
            previous = est.threshold;
        }
        // The max quantile dominates any smaller quantile.
        let q_max = estimate_threshold(&base).unwrap();
        let q_half = estimate_threshold(&ThresholdParams {
            quantile: 0.5,
            ..base.clone()
        })
        .unwrap();
        assert!(q_max.threshold >= q_half.threshold);
    }

    #[test]
    fn rerunning_samples_under_the_estimate_preserves_termination() {
        let params = ThresholdParams {
            samples: 400,
            provisional_budget: 10_000,
            ..ThresholdParams::new(12, 42)
        };
        let est = estimate_threshold(&params).unwrap();
        assert!(verify_estimate(&params, &est));
    }

    #[test]
    fn rejects_degenerate_parameters() {
        let ok = ThresholdParams::new(5, 0);
        let broken = [
            ThresholdParams {
                samples: 0,
                ..ok.clone()
            },
            ThresholdParams {
                provisional_budget: 0,
                ..ok.clone()
            },
            ThresholdParams {
                quantile: 0.0,
                ..ok.clone()
            },
            ThresholdParams {
                quantile: 1.5,
                ..ok.clone()
            },
            ThresholdParams {
                safety_factor: 0.5,
                ..ok.clone()
            },
            ThresholdParams {
                max_len: 0,
                ..ok.clone()
            },
        ];
        for params in broken {
            assert!(matches!(
                estimate_threshold(&params),
                Err(ThresholdError::InvalidParameter(_))
            ));
        }
    }
}
