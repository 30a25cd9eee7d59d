//! Per-user token buckets on an injectable clock.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

/// Wall-clock time since the Unix epoch.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default()
    }
}

/// A clock that only moves when told to.
#[derive(Debug, Clone, Default)]
pub struct ManualClock {
    millis: Arc<AtomicU64>,
}

impl ManualClock {
    pub fn at(start: Duration) -> Self {
        ManualClock { millis: Arc::new(AtomicU64::new(start.as_millis() as u64)) }
    }

    pub fn advance(&self, by: Duration) {
        self.millis.fetch_add(by.as_millis() as u64, Ordering::SeqCst);
    }

    pub fn set(&self, to: Duration) {
        self.millis.store(to.as_millis() as u64, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        Duration::from_millis(self.millis.load(Ordering::SeqCst))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateConfig {
    pub capacity: u64,
    pub refill_per_minute: u64,
}

impl Default for RateConfig {
    fn default() -> Self {
        RateConfig { capacity: 30, refill_per_minute: 10 }
    }
}

const MINUTE_MS: u128 = 60_000;

/// One user's bucket. Credit is kept in units of 1/60000 token so refills
/// over whole milliseconds stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RateLimiterState {
    pub capacity: u64,
    pub refill_per_minute: u64,
    credit: u128,
    pub last_refill_ms: u128,
}

impl RateLimiterState {
    pub fn full(config: RateConfig, now: Duration) -> Self {
        RateLimiterState {
            capacity: config.capacity,
            refill_per_minute: config.refill_per_minute,
            credit: config.capacity as u128 * MINUTE_MS,
            last_refill_ms: now.as_millis(),
        }
    }

    /// Whole tokens currently available.
    pub fn tokens(&self) -> u64 {
        (self.credit / MINUTE_MS) as u64
    }

    fn refill(&mut self, now: Duration) {
        let now = now.as_millis();
        if now > self.last_refill_ms {
            let gained = (now - self.last_refill_ms) * self.refill_per_minute as u128;
            self.credit = (self.credit + gained).min(self.capacity as u128 * MINUTE_MS);
            self.last_refill_ms = now;
        }
    }

    /// Takes one token, or returns the whole seconds until one is available.
    pub fn try_take(&mut self, now: Duration) -> Result<(), u64> {
        self.refill(now);
        if self.credit >= MINUTE_MS {
            self.credit -= MINUTE_MS;
            return Ok(());
        }
        if self.refill_per_minute == 0 {
            return Err(u64::MAX);
        }
        let missing = MINUTE_MS - self.credit;
        let wait_ms = missing.div_ceil(self.refill_per_minute as u128);
        Err((wait_ms.div_ceil(1000) as u64).max(1))
    }
}

#[derive(Debug, Clone, Default)]
pub struct RateLimiter {
    config: RateConfig,
    buckets: HashMap<String, RateLimiterState>,
}

impl RateLimiter {
    pub fn new(config: RateConfig) -> Self {
        RateLimiter { config, buckets: HashMap::new() }
    }

    pub fn check(&mut self, user: &str, now: Duration) -> Result<(), u64> {
        let config = self.config;
        self.buckets.entry(user.to_string()).or_insert_with(|| RateLimiterState::full(config, now)).try_take(now)
    }

    pub fn state(&self, user: &str) -> Option<&RateLimiterState> {
        self.buckets.get(user)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burst_then_refill() {
        let mut l = RateLimiter::new(RateConfig::default());
        let t0 = Duration::from_secs(1000);
        for _ in 0..30 {
            l.check("a", t0).unwrap();
        }
        assert_eq!(l.check("a", t0), Err(6));
        assert!(l.check("b", t0).is_ok());
        assert_eq!(l.check("a", t0 + Duration::from_millis(5999)), Err(1));
        assert!(l.check("a", t0 + Duration::from_secs(6)).is_ok());
        assert_eq!(l.state("a").unwrap().tokens(), 0);
    }
}
