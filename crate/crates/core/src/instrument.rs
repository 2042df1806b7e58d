//! Process-wide instrumentation counters.
//!
//! Tests assert work budgets (e.g. how many similarity matrices a pruning
//! run may build) against these monotone counters.

use std::sync::atomic::{AtomicU64, Ordering};

static RSM_BUILDS: AtomicU64 = AtomicU64::new(0);

pub(crate) fn record_rsm_build() {
    RSM_BUILDS.fetch_add(1, Ordering::Relaxed);
}

/// Total number of representational similarity matrices built by this
/// process so far.
pub fn rsm_build_count() -> u64 {
    RSM_BUILDS.load(Ordering::Relaxed)
}
