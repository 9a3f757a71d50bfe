//! Tags identify nested differentiation instantiations.
//!
//! Every call into the differentiation API creates a fresh tag. A value
//! produced under a newer (higher) tag wraps values of older tags, so an
//! operation can always tell which perturbation belongs to which
//! instantiation. Keeping the tags apart is what prevents perturbation
//! confusion when derivatives are nested.

use std::sync::atomic::{AtomicU64, Ordering};

/// The identity of one differentiation instantiation.
///
/// Tags are totally ordered: a higher tag means a more recently started
/// (more deeply nested) instantiation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(u64);

impl Tag {
    pub fn id(self) -> u64 {
        self.0
    }
}

static NEXT_TAG: AtomicU64 = AtomicU64::new(1);

/// Returns a tag strictly greater than every tag returned before, across
/// all threads of the process.
pub fn fresh_tag() -> Tag {
    let id = NEXT_TAG.fetch_add(1, Ordering::Relaxed);
    // 2^64 instantiations are unreachable in practice; if the counter
    // ever wraps we must not silently reuse tags.
    assert!(id != u64::MAX, "tag counter exhausted");
    Tag(id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_are_strictly_increasing() {
        let a = fresh_tag();
        let b = fresh_tag();
        let c = fresh_tag();
        assert!(a < b && b < c);
    }

    #[test]
    fn tags_are_unique_across_threads() {
        let handles: Vec<_> = (0..8)
            .map(|_| std::thread::spawn(|| (0..1000).map(|_| fresh_tag()).collect::<Vec<_>>()))
            .collect();
        let mut all: Vec<Tag> = handles
            .into_iter()
            .flat_map(|h| h.join().unwrap())
            .collect();
        let n = all.len();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), n);
    }
}
