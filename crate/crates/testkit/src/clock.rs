//! Logical clock: every `now()` call advances a fixed step from a fixed
//! start, so crawl timestamps are a pure function of call order.

use std::sync::atomic::{AtomicI64, Ordering};

use chrono::{DateTime, Duration, TimeZone, Utc};
use eventcrawl_core::clock::Clock;

pub struct LogicalClock {
    start: DateTime<Utc>,
    step: Duration,
    ticks: AtomicI64,
}

impl LogicalClock {
    pub fn new(start: DateTime<Utc>, step: Duration) -> Self {
        LogicalClock { start, step, ticks: AtomicI64::new(0) }
    }

    /// One-second steps from a fixed epoch.
    pub fn default_epoch() -> Self {
        LogicalClock::new(Utc.with_ymd_and_hms(2018, 3, 1, 0, 0, 0).unwrap(), Duration::seconds(1))
    }
}

impl Clock for LogicalClock {
    fn now(&self) -> DateTime<Utc> {
        let tick = self.ticks.fetch_add(1, Ordering::SeqCst);
        self.start + self.step * (tick as i32)
    }
}
