//! Dynamic integer set with O(1) insert, remove and uniform sampling.

use crate::rng::Rng;

const ABSENT: u32 = u32::MAX;

/// Set over a fixed domain `0..capacity`, backed by a dense array with
/// swap-removal plus a position map. Sampling picks a uniform slot of the
/// dense array, so every member is equally likely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    dense: Vec<u32>,
    pos: Vec<u32>,
}

impl SampleSet {
    /// Empty set over the domain `0..capacity`.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity < ABSENT as usize, "domain too large");
        SampleSet {
            dense: Vec::new(),
            pos: vec![ABSENT; capacity],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dense.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.dense.is_empty()
    }

    #[inline]
    pub fn contains(&self, item: u32) -> bool {
        self.pos[item as usize] != ABSENT
    }

    /// Inserts `item`; no-op if already present. Returns whether it was new.
    #[inline]
    pub fn insert(&mut self, item: u32) -> bool {
        if self.contains(item) {
            return false;
        }
        self.pos[item as usize] = self.dense.len() as u32;
        self.dense.push(item);
        true
    }

    /// Removes `item` by swapping the last dense entry into its slot.
    /// Returns whether it was present.
    #[inline]
    pub fn remove(&mut self, item: u32) -> bool {
        let slot = self.pos[item as usize];
        if slot == ABSENT {
            return false;
        }
        let last = self.dense.pop().expect("pos map said non-empty");
        if last != item {
            self.dense[slot as usize] = last;
            self.pos[last as usize] = slot;
        }
        self.pos[item as usize] = ABSENT;
        true
    }

    /// Uniform member.
    ///
    /// # Panics
    ///
    /// Panics if the set is empty.
    #[inline]
    pub fn sample(&self, rng: &mut Rng) -> u32 {
        assert!(!self.dense.is_empty(), "cannot sample an empty set");
        self.dense[rng.index(self.dense.len())]
    }

    /// Members in dense (insertion/swap) order.
    pub fn iter(&self) -> std::slice::Iter<'_, u32> {
        self.dense.iter()
    }

    /// Members as a sorted vector, for comparisons in tests and rebuild
    /// checks.
    pub fn sorted(&self) -> Vec<u32> {
        let mut v = self.dense.clone();
        v.sort_unstable();
        v
    }
}
