use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

/// Capacity-bounded FIFO cache over variable-size entries measured in lines.
/// Hits do not refresh an entry's position.
#[derive(Debug, Clone)]
pub struct FifoCache<K> {
    capacity_lines: u64,
    occupancy: u64,
    queue: VecDeque<(K, u64)>,
    resident: HashMap<K, u64>,
    evictions: u64,
}

impl<K: Copy + Eq + Hash> FifoCache<K> {
    pub fn new(capacity_lines: u64) -> Self {
        Self {
            capacity_lines,
            occupancy: 0,
            queue: VecDeque::new(),
            resident: HashMap::new(),
            evictions: 0,
        }
    }

    pub fn contains(&self, key: &K) -> bool {
        self.resident.contains_key(key)
    }

    /// Inserts `key` unless it is already resident or larger than the whole
    /// cache, evicting the oldest entries until it fits. Returns the evicted keys.
    pub fn insert(&mut self, key: K, lines: u64) -> Vec<K> {
        let mut evicted = Vec::new();
        if self.resident.contains_key(&key) || lines > self.capacity_lines {
            return evicted;
        }
        while self.occupancy + lines > self.capacity_lines {
            let (old, l) = self.queue.pop_front().expect("occupancy implies entries");
            self.resident.remove(&old);
            self.occupancy -= l;
            self.evictions += 1;
            evicted.push(old);
        }
        self.queue.push_back((key, lines));
        self.resident.insert(key, lines);
        self.occupancy += lines;
        evicted
    }

    pub fn occupancy_lines(&self) -> u64 {
        self.occupancy
    }

    pub fn capacity_lines(&self) -> u64 {
        self.capacity_lines
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn evictions(&self) -> u64 {
        self.evictions
    }
}
