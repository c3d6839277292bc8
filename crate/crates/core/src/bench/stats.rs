use serde::{Deserialize, Serialize};

use super::BenchError;

pub const PERCENTILE_CONVENTION: &str =
    "type 7: p-quantile at 0-based rank h = (n - 1) p, linear interpolation between floor(h) and ceil(h)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub median_ns: f64,
    pub p25_ns: f64,
    pub p75_ns: f64,
    /// Number of samples summarized (converged runs only).
    pub n_converged: usize,
}

/// Type-7 quantile of an ascending-sorted, non-empty slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(times: &[f64]) -> Result<SummaryStats, BenchError> {
    if times.is_empty() {
        return Err(BenchError::EmptySample);
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(BenchError::NonFiniteSample);
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(SummaryStats {
        median_ns: quantile_sorted(&sorted, 0.5),
        p25_ns: quantile_sorted(&sorted, 0.25),
        p75_ns: quantile_sorted(&sorted, 0.75),
        n_converged: sorted.len(),
    })
}
