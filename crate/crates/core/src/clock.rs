//! Wall-clock abstraction so crawls can be replayed deterministically.

use chrono::{DateTime, Utc};

/// Source of "now" for crawl timestamps. Production code uses [`SystemClock`];
/// deterministic tests substitute a logical clock.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

/// The real wall clock.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}
