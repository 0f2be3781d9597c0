use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Opaque label of a ground-set element. Labels are stable across matroid
/// derivations (restriction, contraction, ...).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct ElementId(pub u64);

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite set of element labels.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct GroundSet {
    elems: BTreeSet<ElementId>,
}

impl GroundSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(e: ElementId) -> Self {
        let mut s = Self::new();
        s.insert(e);
        s
    }

    pub fn insert(&mut self, e: ElementId) -> bool {
        self.elems.insert(e)
    }

    pub fn remove(&mut self, e: ElementId) -> bool {
        self.elems.remove(&e)
    }

    pub fn contains(&self, e: ElementId) -> bool {
        self.elems.contains(&e)
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn is_subset(&self, other: &GroundSet) -> bool {
        self.elems.is_subset(&other.elems)
    }

    pub fn is_disjoint(&self, other: &GroundSet) -> bool {
        self.elems.is_disjoint(&other.elems)
    }

    pub fn union(&self, other: &GroundSet) -> GroundSet {
        GroundSet { elems: self.elems.union(&other.elems).copied().collect() }
    }

    pub fn intersection(&self, other: &GroundSet) -> GroundSet {
        GroundSet { elems: self.elems.intersection(&other.elems).copied().collect() }
    }

    pub fn difference(&self, other: &GroundSet) -> GroundSet {
        GroundSet { elems: self.elems.difference(&other.elems).copied().collect() }
    }

    /// Elements in ascending label order.
    pub fn iter(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.elems.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<ElementId> {
        self.elems.iter().copied().collect()
    }

    pub fn max_label(&self) -> Option<u64> {
        self.elems.iter().next_back().map(|e| e.0)
    }

    /// Errors with `ElementOutOfGround` unless `self` is a subset of `ground`.
    pub fn check_within(&self, ground: &GroundSet) -> Result<()> {
        if self.is_subset(ground) {
            Ok(())
        } else {
            Err(Error::ElementOutOfGround)
        }
    }
}

impl FromIterator<ElementId> for GroundSet {
    fn from_iter<I: IntoIterator<Item = ElementId>>(iter: I) -> Self {
        GroundSet { elems: iter.into_iter().collect() }
    }
}

impl FromIterator<u64> for GroundSet {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        GroundSet { elems: iter.into_iter().map(ElementId).collect() }
    }
}

impl fmt::Display for GroundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gs(ids: &[u64]) -> GroundSet {
        ids.iter().copied().collect()
    }

    #[test]
    fn set_operations() {
        let a = gs(&[1, 2, 3]);
        let b = gs(&[2, 3, 4]);
        assert_eq!(a.union(&b), gs(&[1, 2, 3, 4]));
        assert_eq!(a.intersection(&b), gs(&[2, 3]));
        assert_eq!(a.difference(&b), gs(&[1]));
        assert!(gs(&[2]).is_subset(&a));
        assert!(!a.is_subset(&b));
        assert!(a.is_disjoint(&gs(&[5])));
    }

    #[test]
    fn subset_check() {
        let a = gs(&[1, 2]);
        assert!(a.check_within(&gs(&[1, 2, 3])).is_ok());
        assert_eq!(a.check_within(&gs(&[1])), Err(Error::ElementOutOfGround));
    }
}
