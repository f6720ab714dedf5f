//! Accumulation helpers shared by the estimators.
//!
//! Long reductions use pairwise (tree) summation so rounding error grows
//! like O(log n) instead of O(n); the dot product additionally splits the
//! stream over independent accumulators to keep the FP pipelines busy.

/// Pairwise sum of a slice.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Dot product over equal-length slices with eight running accumulators.
///
/// Intended for block-sized inputs (a few thousand elements); callers that
/// reduce longer streams should combine block results with [`pairwise_sum`].
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let chunks = a.len() / 8;
    for i in 0..chunks {
        let pa = &a[i * 8..i * 8 + 8];
        let pb = &b[i * 8..i * 8 + 8];
        for l in 0..8 {
            acc[l] += pa[l] * pb[l];
        }
    }
    let mut tail = 0.0;
    for i in chunks * 8..a.len() {
        tail += a[i] * b[i];
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

/// Mean of a slice via pairwise summation.
pub(crate) fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Population variance (divides by n) via pairwise summation.
pub(crate) fn population_variance(xs: &[f64], mean: f64) -> f64 {
    let sq: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    pairwise_sum(&sq) / xs.len() as f64
}
