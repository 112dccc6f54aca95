use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::arrangement::Line;

/// One canonical line per projective class of nonzero integer triples with
/// max-norm at most `bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidatePool {
    pub bound: u32,
    /// Sorted canonical lines.
    pub lines: Vec<Line>,
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

pub fn candidate_pool(bound: u32) -> CandidatePool {
    assert!(bound >= 1, "pool bound must be positive");
    let r = bound as i64;
    let mut set = BTreeSet::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                if let Ok(l) = Line::new(a, b, c) {
                    set.insert(l);
                }
            }
        }
    }
    CandidatePool {
        bound,
        lines: set.into_iter().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_pool() {
        let p = candidate_pool(1);
        assert_eq!(p.len(), 13);
        for t in [[1, 0, 0], [0, 1, 0], [0, 0, 1]] {
            assert!(p.lines.contains(&Line::new(t[0], t[1], t[2]).unwrap()));
        }
    }

    #[test]
    fn coefficients_are_bounded_and_coprime() {
        for l in candidate_pool(3).lines {
            assert!(l.height() <= 3.into());
        }
    }
}
