use std::sync::Mutex;

use chrono::{DateTime, TimeDelta, Utc};

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

/// Wall clock that never repeats or goes backwards within a process.
#[derive(Debug, Default)]
pub struct SystemClock {
    last: Mutex<Option<DateTime<Utc>>>,
}

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        let mut last = self.last.lock().unwrap();
        let mut t = Utc::now();
        if let Some(prev) = *last {
            if t <= prev {
                t = prev + TimeDelta::microseconds(1);
            }
        }
        *last = Some(t);
        t
    }
}

/// Deterministic clock for tests: starts at `origin` and advances by `step`
/// on every read.
#[derive(Debug)]
pub struct StepClock {
    next: Mutex<DateTime<Utc>>,
    step: TimeDelta,
}

impl StepClock {
    pub fn new(origin: DateTime<Utc>, step: TimeDelta) -> Self {
        Self { next: Mutex::new(origin), step }
    }

    pub fn starting_at_epoch() -> Self {
        Self::new(DateTime::UNIX_EPOCH, TimeDelta::seconds(1))
    }
}

impl Clock for StepClock {
    fn now(&self) -> DateTime<Utc> {
        let mut next = self.next.lock().unwrap();
        let t = *next;
        *next = t + self.step;
        t
    }
}
