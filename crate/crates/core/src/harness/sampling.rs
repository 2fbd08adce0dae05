//! Index-addressed parallel evaluation with a deterministic, ordered reduction.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Seed labels separating the random streams used by the harness.
pub(crate) mod labels {
    pub const TAIL: u64 = 1;
    pub const EXPECTATION: u64 = 2;
    pub const ENSEMBLE_A: u64 = 10;
    pub const ENSEMBLE_B: u64 = 11;
    pub const PERTURB_A: u64 = 12;
    pub const PERTURB_B: u64 = 13;
}

/// Evaluate `f(0), ..., f(n-1)` in parallel and return results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    (0..n as u64).into_par_iter().map(&f).collect()
}

/// Like [`map_indexed`] but fails on the first (lowest-index) error.
pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    map_indexed(n, |i| {
        f(i).map_err(|e| match e {
            Error::Sample { .. } => e,
            other => Error::Sample {
                index: i,
                source: Box::new(other),
            },
        })
    })
    .into_iter()
    .collect()
}

/// Fraction of failed samples above which a run is rejected.
pub const MAX_FAILURE_FRACTION: f64 = 1e-3;

/// Split results into successes and failures; error if failures exceed
/// [`MAX_FAILURE_FRACTION`] of the total.
pub fn tolerate_failures<T>(results: Vec<Result<T>>) -> Result<(Vec<T>, usize, Option<String>)> {
    let total = results.len();
    let mut ok = Vec::with_capacity(total);
    let mut failed = 0;
    let mut first = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                failed += 1;
                if first.is_none() {
                    first = Some(format!("sample {i}: {e}"));
                }
            }
        }
    }
    if failed as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return Err(Error::TooManyFailures {
            failed,
            total,
            first: first.unwrap_or_default(),
        });
    }
    Ok((ok, failed, first))
}
