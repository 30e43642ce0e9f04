//! Bicriterion result sets.

use crate::timetable::{Time, INFINITY};

/// `(arrival, transfers)` pairs, transfers ascending and arrivals strictly
/// decreasing. Entry `(a, n)` means: arriving at `a` with at most `n`
/// transfers, and no fewer transfers achieve `a`.
pub type ParetoSet = Vec<(Time, usize)>;

/// Builds the Pareto set from per-transfer-count labels, where
/// `labels[n]` is the best arrival found with `n` transfers (exactly or at
/// most; a running minimum is applied either way).
pub fn from_labels(labels: &[Time]) -> ParetoSet {
    let mut out = Vec::new();
    let mut best = INFINITY;
    for (n, &a) in labels.iter().enumerate() {
        if a < best {
            best = a;
            out.push((a, n));
        }
    }
    out
}

/// True when `set` is sorted by transfers with strictly decreasing arrivals.
pub fn is_pareto(set: &[(Time, usize)]) -> bool {
    set.windows(2).all(|w| w[0].1 < w[1].1 && w[0].0 > w[1].0)
}

/// Removes dominated entries from an arbitrary list of labels.
pub fn normalize(mut labels: Vec<(Time, usize)>) -> ParetoSet {
    labels.sort_by_key(|&(a, n)| (n, a));
    let mut out: ParetoSet = Vec::new();
    for (a, n) in labels {
        if out.last().is_none_or(|&(b, _)| a < b) {
            out.push((a, n));
        }
    }
    out
}

/// Restricts a set computed with a larger transfer limit to `max_transfers`.
pub fn truncate(set: &[(Time, usize)], max_transfers: usize) -> ParetoSet {
    set.iter().copied().filter(|&(_, n)| n <= max_transfers).collect()
}
