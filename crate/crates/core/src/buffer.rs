use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng;

use crate::{Error, Transition};

/// FIFO transition store with optional capacity; the oldest entry is evicted
/// once full.
#[derive(Clone, Debug, Default)]
pub struct ReplayBuffer {
    capacity: Option<usize>,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn unbounded() -> Self {
        ReplayBuffer { capacity: None, items: VecDeque::new() }
    }

    pub fn with_capacity(capacity: usize) -> Self {
        ReplayBuffer { capacity: Some(capacity), items: VecDeque::with_capacity(capacity) }
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, tr: Transition) {
        if let Some(cap) = self.capacity {
            if cap == 0 {
                return;
            }
            while self.items.len() >= cap {
                self.items.pop_front();
            }
        }
        self.items.push_back(tr);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    /// `n` distinct positions, uniform without replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>, Error> {
        if n > self.items.len() {
            return Err(Error::SampleTooLarge { requested: n, available: self.items.len() });
        }
        Ok(rand::seq::index::sample(rng, self.items.len(), n).into_vec())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Transition>, Error> {
        Ok(self.sample_indices(n, rng)?.into_iter().map(|i| self.items[i]).collect())
    }
}
