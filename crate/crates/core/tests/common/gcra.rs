//! Virtual-scheduling (GCRA) formulation of a token bucket, used as the
//! admission oracle. Time is measured in ms × refill-per-minute so the
//! emission interval is exactly 60000.

use std::collections::HashMap;

pub struct Gcra {
    capacity: i128,
    refill_per_minute: i128,
    tat: HashMap<String, i128>,
}

const T: i128 = 60_000;

impl Gcra {
    pub fn new(capacity: u64, refill_per_minute: u64) -> Self {
        Gcra { capacity: capacity as i128, refill_per_minute: refill_per_minute as i128, tat: HashMap::new() }
    }

    pub fn admit(&mut self, user: &str, now_ms: u64) -> bool {
        let t = now_ms as i128 * self.refill_per_minute;
        let tau = (self.capacity - 1) * T;
        let tat = *self.tat.get(user).unwrap_or(&t);
        if tat - t > tau {
            return false;
        }
        self.tat.insert(user.to_string(), tat.max(t) + T);
        true
    }
}
