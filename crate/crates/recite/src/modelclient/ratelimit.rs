//! Sliding-window rate limiter shared by all in-flight requests.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Grants at most `limit` permits per sliding one-second window.
pub struct RateLimiter {
    limit: usize,
    state: Mutex<LimiterState>,
}

struct LimiterState {
    recent: VecDeque<Instant>,
    grants: Vec<Instant>,
}

impl RateLimiter {
    pub fn new(limit: usize) -> Self {
        assert!(limit >= 1, "rate limit must be at least 1/s");
        RateLimiter {
            limit,
            state: Mutex::new(LimiterState {
                recent: VecDeque::new(),
                grants: Vec::new(),
            }),
        }
    }

    /// Block until a permit is available, then record the grant.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut state = self.state.lock().unwrap();
                let now = Instant::now();
                while let Some(&front) = state.recent.front() {
                    if now.duration_since(front) >= Duration::from_secs(1) {
                        state.recent.pop_front();
                    } else {
                        break;
                    }
                }
                if state.recent.len() < self.limit {
                    state.recent.push_back(now);
                    state.grants.push(now);
                    return;
                }
                let oldest = *state.recent.front().unwrap();
                (oldest + Duration::from_secs(1)).saturating_duration_since(now)
            };
            std::thread::sleep(wait.max(Duration::from_millis(1)));
        }
    }

    /// Timestamps of every grant so far, for auditing.
    pub fn grant_log(&self) -> Vec<Instant> {
        self.state.lock().unwrap().grants.clone()
    }

    pub fn limit(&self) -> usize {
        self.limit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn no_sliding_window_exceeds_the_limit() {
        let limiter = Arc::new(RateLimiter::new(5));
        let mut handles = Vec::new();
        for _ in 0..4 {
            let l = Arc::clone(&limiter);
            handles.push(std::thread::spawn(move || {
                for _ in 0..4 {
                    l.acquire();
                }
            }));
        }
        for h in handles {
            h.join().unwrap();
        }
        let mut grants = limiter.grant_log();
        grants.sort();
        assert_eq!(grants.len(), 16);
        for (i, &t) in grants.iter().enumerate() {
            let in_window = grants[..i]
                .iter()
                .filter(|&&g| t.duration_since(g) < Duration::from_secs(1))
                .count();
            assert!(
                in_window < 5,
                "grant {i} saw {in_window} earlier grants inside 1s"
            );
        }
    }
}
