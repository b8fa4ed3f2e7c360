use std::fmt;

use fixedbitset::FixedBitSet;
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::causal::EventId;

/// Membership set over the events of one structure.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct EventSet(FixedBitSet);

impl EventSet {
    pub fn empty(n: usize) -> Self {
        EventSet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        EventSet(bits)
    }

    pub fn from_ids(n: usize, ids: impl IntoIterator<Item = EventId>) -> Self {
        let mut s = Self::empty(n);
        for id in ids {
            s.insert(id);
        }
        s
    }

    /// Size of the universe, not the member count.
    pub fn capacity(&self) -> usize {
        self.0.len()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn contains(&self, id: EventId) -> bool {
        self.0.contains(id.index())
    }

    pub fn insert(&mut self, id: EventId) {
        self.0.insert(id.index());
    }

    pub fn remove(&mut self, id: EventId) {
        self.0.set(id.index(), false);
    }

    pub fn iter(&self) -> impl Iterator<Item = EventId> + '_ {
        self.0.ones().map(EventId::new)
    }

    pub fn union_with(&mut self, other: &EventSet) {
        self.0.union_with(&other.0);
    }

    pub fn intersect_with(&mut self, other: &EventSet) {
        self.0.intersect_with(&other.0);
    }

    pub fn difference_with(&mut self, other: &EventSet) {
        self.0.difference_with(&other.0);
    }

    pub fn intersection(&self, other: &EventSet) -> EventSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn is_subset(&self, other: &EventSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &EventSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn intersection_count(&self, other: &EventSet) -> usize {
        self.0.intersection_count(&other.0)
    }

    pub fn first(&self) -> Option<EventId> {
        self.0.minimum().map(EventId::new)
    }

    /// The `k`-th member in increasing id order.
    pub fn nth(&self, mut k: usize) -> Option<EventId> {
        for (b, &block) in self.0.as_slice().iter().enumerate() {
            let ones = block.count_ones() as usize;
            if k < ones {
                let mut word = block;
                for _ in 0..k {
                    word &= word - 1;
                }
                return Some(EventId::new(b * usize::BITS as usize + word.trailing_zeros() as usize));
            }
            k -= ones;
        }
        None
    }

    pub(crate) fn from_bits(bits: FixedBitSet) -> Self {
        EventSet(bits)
    }

    pub fn to_vec(&self) -> Vec<EventId> {
        self.iter().collect()
    }
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.ones()).finish()
    }
}

/// Serialized as the ascending list of member ids.
impl Serialize for EventSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for id in self.iter() {
            seq.serialize_element(&id)?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nth_walks_members_in_order() {
        let ids: Vec<EventId> = [1, 5, 64, 65, 200].into_iter().map(EventId::new).collect();
        let s = EventSet::from_ids(300, ids.iter().copied());
        for (k, &id) in ids.iter().enumerate() {
            assert_eq!(s.nth(k), Some(id));
        }
        assert_eq!(s.nth(5), None);
    }

    #[test]
    fn full_and_empty() {
        assert_eq!(EventSet::full(70).len(), 70);
        assert!(EventSet::empty(70).is_empty());
        assert_eq!(EventSet::empty(70).capacity(), 70);
    }
}

