//! Local-extremum pickers over sampled curves.

use crate::Scalar;

/// Indices of strict local maxima.
///
/// A run of equal values counts as one candidate located at its first index,
/// and is a peak only if it is strictly greater than the values just outside
/// both ends of the run. Runs touching either end of the slice are never peaks.
pub fn strict_local_maxima<T: Scalar>(values: &[T]) -> Vec<usize> {
    let n = values.len();
    let mut peaks = Vec::new();
    if n < 3 {
        return peaks;
    }
    let mut i = 1;
    while i < n - 1 {
        let v = values[i];
        let mut end = i;
        while end + 1 < n && values[end + 1] == v {
            end += 1;
        }
        if end + 1 < n && values[i - 1] < v && values[end + 1] < v {
            peaks.push(i);
        }
        i = end + 1;
    }
    peaks
}

/// Indices where the slope strictly changes sign (maxima and minima).
///
/// Zero differences keep the previous sign; when a flat run sits between a
/// rising and a falling stretch, the extremum is reported at the run's first
/// index.
pub fn slope_sign_changes<T: Scalar>(values: &[T]) -> Vec<usize> {
    let mut out = Vec::new();
    // sign of the last nonzero forward difference, and where its flat run began
    let mut last_sign = 0i8;
    let mut run_start = 0usize;
    for i in 1..values.len() {
        let d = values[i] - values[i - 1];
        let s = if d > T::zero() {
            1
        } else if d < T::zero() {
            -1
        } else {
            0
        };
        if s == 0 {
            continue;
        }
        if last_sign != 0 && s != last_sign {
            out.push(run_start);
        }
        last_sign = s;
        run_start = i;
    }
    out
}
