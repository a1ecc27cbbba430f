//! Dense integer set with O(1) insert, swap-remove, membership and
//! uniform sampling. Backs the infected set of every engine.

use alloc::vec::Vec;
use rand::Rng;

const ABSENT: u32 = u32::MAX;

/// Set of `u32` ids drawn from a bounded universe.
#[derive(Clone, Debug, Default)]
pub struct IndexedSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl IndexedSet {
    pub fn with_universe(universe: usize) -> Self {
        IndexedSet {
            items: Vec::new(),
            pos: alloc::vec![ABSENT; universe],
        }
    }

    /// Grows the universe so that `id` is addressable.
    pub fn ensure_universe(&mut self, universe: usize) {
        if self.pos.len() < universe {
            self.pos.resize(universe, ABSENT);
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        (id as usize) < self.pos.len() && self.pos[id as usize] != ABSENT
    }

    /// Inserts `id`; returns true if it was not already present.
    pub fn insert(&mut self, id: u32) -> bool {
        if self.contains(id) {
            return false;
        }
        self.pos[id as usize] = self.items.len() as u32;
        self.items.push(id);
        true
    }

    /// Removes `id`; returns true if it was present.
    pub fn remove(&mut self, id: u32) -> bool {
        if !self.contains(id) {
            return false;
        }
        let i = self.pos[id as usize] as usize;
        let last = *self.items.last().unwrap();
        self.items[i] = last;
        self.pos[last as usize] = i as u32;
        self.items.pop();
        self.pos[id as usize] = ABSENT;
        true
    }

    /// Uniformly random member. Panics on an empty set.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.items[rng.gen_range(0..self.items.len())]
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.items.iter().copied()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.items
    }

    pub fn clear(&mut self) {
        for &id in &self.items {
            self.pos[id as usize] = ABSENT;
        }
        self.items.clear();
    }
}
