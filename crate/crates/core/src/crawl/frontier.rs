//! Priority frontier: highest priority first, FIFO among equal priorities,
//! bounded with lowest-priority eviction (or a typed overflow in strict mode).

use std::collections::BTreeMap;

use thiserror::Error;
use url::Url;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("frontier exceeded its cap of {cap} entries")]
pub struct FrontierOverflow {
    pub cap: usize,
}

/// A URI awaiting crawling. In archive mode the URI is always an original
/// (URI-R) form, never a rewritten archive URI.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierEntry {
    pub uri: Url,
    pub depth: u32,
    /// Parent's aggregate relevance; seeds carry 1.0. Clamped to [0, 1].
    pub priority: f64,
    pub parent: Option<Url>,
}

impl FrontierEntry {
    pub fn new(uri: Url, depth: u32, priority: f64, parent: Option<Url>) -> Self {
        FrontierEntry { uri, depth, priority: priority.clamp(0.0, 1.0), parent }
    }

    pub fn seed(uri: Url) -> Self {
        FrontierEntry::new(uri, 0, 1.0, None)
    }
}

/// Ordering key: priority ascending, then insertion sequence descending, so
/// the map's last entry is the highest-priority, earliest-inserted one.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    priority: f64,
    seq: u64,
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.priority.total_cmp(&other.priority).then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Default)]
pub struct Frontier {
    entries: BTreeMap<Key, FrontierEntry>,
    next_seq: u64,
    cap: Option<usize>,
    evict_on_full: bool,
}

impl Frontier {
    pub fn new(cap: usize, evict_on_full: bool) -> Self {
        Frontier { entries: BTreeMap::new(), next_seq: 0, cap: Some(cap), evict_on_full }
    }

    pub fn unbounded() -> Self {
        Frontier { entries: BTreeMap::new(), next_seq: 0, cap: None, evict_on_full: false }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Enqueues an entry. At the cap, the lowest-priority entry is evicted to
    /// make room (an incoming entry that is itself lowest is dropped); with
    /// eviction disabled the push overflows instead.
    pub fn push(&mut self, entry: FrontierEntry) -> Result<(), FrontierOverflow> {
        if let Some(cap) = self.cap {
            if self.entries.len() >= cap {
                if !self.evict_on_full {
                    return Err(FrontierOverflow { cap });
                }
                let lowest = *self.entries.first_key_value().expect("cap > 0").0;
                if entry.priority <= lowest.priority {
                    return Ok(());
                }
                self.entries.pop_first();
            }
        }
        let key = Key { priority: entry.priority, seq: self.next_seq };
        self.next_seq += 1;
        self.entries.insert(key, entry);
        Ok(())
    }

    /// Removes and returns the highest-priority entry, FIFO among ties.
    pub fn pop(&mut self) -> Option<FrontierEntry> {
        self.entries.pop_last().map(|(_, e)| e)
    }

    /// Priority of the best remaining entry.
    pub fn peek_max_priority(&self) -> Option<f64> {
        self.entries.last_key_value().map(|(k, _)| k.priority)
    }
}
