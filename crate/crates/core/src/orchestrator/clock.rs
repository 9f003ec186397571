use std::sync::Mutex;

use chrono::{DateTime, Duration, Utc};

/// Time source, injectable so stored timestamps are reproducible in tests.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Starts at a fixed instant and advances by `step` on every read.
#[derive(Debug)]
pub struct FixedClock {
    next: Mutex<DateTime<Utc>>,
    step: Duration,
}

impl FixedClock {
    pub fn new(start: DateTime<Utc>, step: Duration) -> Self {
        FixedClock { next: Mutex::new(start), step }
    }

    /// 2025-01-06T09:00:00Z, one second per read.
    pub fn default_start() -> Self {
        let start = DateTime::parse_from_rfc3339("2025-01-06T09:00:00Z").unwrap().with_timezone(&Utc);
        FixedClock::new(start, Duration::seconds(1))
    }
}

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        let mut g = self.next.lock().unwrap();
        let t = *g;
        *g = t + self.step;
        t
    }
}

/// Fixed-width UTC timestamp whose string order matches time order.
pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%S%.6fZ").to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_clock_steps() {
        let c = FixedClock::default_start();
        let a = c.now();
        let b = c.now();
        assert_eq!(b - a, Duration::seconds(1));
        assert_eq!(format_timestamp(&a), "2025-01-06T09:00:00.000000Z");
    }
}
