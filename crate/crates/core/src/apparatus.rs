//! Call counter for the training-time reward apparatus.
//!
//! The text/scene embedders, the object detector and the risk describer all
//! tick a shared [`ApparatusCounter`]. Evaluation runs execute the policy
//! alone; the harness asserts the counter stayed at zero, which is the
//! deployment contract: none of the reward machinery runs at test time.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Shared, thread-safe counter of reward-apparatus invocations.
#[derive(Debug, Clone, Default)]
pub struct ApparatusCounter(Arc<AtomicU64>);

impl ApparatusCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one apparatus call.
    pub fn tick(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    /// Total calls recorded so far.
    pub fn count(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_across_clones() {
        let c = ApparatusCounter::new();
        let c2 = c.clone();
        c.tick();
        c2.tick();
        assert_eq!(c.count(), 2);
        c.reset();
        assert_eq!(c2.count(), 0);
    }
}
