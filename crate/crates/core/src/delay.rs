//! Wall-clock delay measurement for enumeration streams.

use std::time::Instant;

use serde::{Deserialize, Serialize};

/// Time to the first output (or to the final "no"), the largest gap between
/// consecutive outputs, and every gap in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    pub first_ms: f64,
    pub max_gap_ms: f64,
    pub count: u64,
    pub per_gap: Vec<f64>,
}

#[derive(Debug)]
pub struct DelayMeter {
    start: Instant,
    last: Option<Instant>,
    first_ms: f64,
    count: u64,
    gaps: Vec<f64>,
}

impl Default for DelayMeter {
    fn default() -> Self {
        Self::start()
    }
}

fn ms(from: Instant, to: Instant) -> f64 {
    to.duration_since(from).as_secs_f64() * 1e3
}

impl DelayMeter {
    pub fn start() -> Self {
        DelayMeter {
            start: Instant::now(),
            last: None,
            first_ms: 0.0,
            count: 0,
            gaps: Vec::new(),
        }
    }

    /// Records one output.
    pub fn tick(&mut self) {
        let now = Instant::now();
        match self.last {
            None => self.first_ms = ms(self.start, now),
            Some(prev) => self.gaps.push(ms(prev, now)),
        }
        self.last = Some(now);
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Closes the measurement. With no outputs, `first_ms` is the time taken
    /// to conclude there are none.
    pub fn finish(self) -> DelayReport {
        let first_ms = if self.count == 0 {
            ms(self.start, Instant::now())
        } else {
            self.first_ms
        };
        DelayReport {
            first_ms,
            max_gap_ms: self.gaps.iter().copied().fold(0.0, f64::max),
            count: self.count,
            per_gap: self.gaps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_count_is_one_less_than_outputs() {
        let mut m = DelayMeter::start();
        for _ in 0..4 {
            m.tick();
        }
        let r = m.finish();
        assert_eq!(r.count, 4);
        assert_eq!(r.per_gap.len(), 3);
        assert!(r.per_gap.iter().all(|&g| g >= 0.0 && g <= r.max_gap_ms));
    }

    #[test]
    fn empty_run_reports_time_to_no() {
        let r = DelayMeter::start().finish();
        assert_eq!((r.count, r.per_gap.len(), r.max_gap_ms), (0, 0, 0.0));
        assert!(r.first_ms >= 0.0);
    }

    #[test]
    fn json_keys() {
        let r = DelayReport {
            first_ms: 1.5,
            max_gap_ms: 0.25,
            count: 2,
            per_gap: vec![0.25],
        };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["count", "first_ms", "max_gap_ms", "per_gap"]);
    }
}
