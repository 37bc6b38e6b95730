use std::time::Duration;

use async_trait::async_trait;

/// Time source for the scheduler, measured from the clock's creation.
#[async_trait]
pub trait Clock: Send + Sync {
    fn elapsed(&self) -> Duration;
    async fn sleep_until(&self, at: Duration);
}

/// Backed by tokio's timer. Inside a runtime with paused time the clock is
/// virtual: sleeps complete instantly in simulated time, so rate tests run
/// without waiting and produce exact timestamps.
#[derive(Debug, Clone)]
pub struct TokioClock {
    origin: tokio::time::Instant,
}

impl TokioClock {
    pub fn new() -> Self {
        Self {
            origin: tokio::time::Instant::now(),
        }
    }
}

impl Default for TokioClock {
    fn default() -> Self {
        Self::new()
    }
}

#[async_trait]
impl Clock for TokioClock {
    fn elapsed(&self) -> Duration {
        self.origin.elapsed()
    }

    async fn sleep_until(&self, at: Duration) {
        tokio::time::sleep_until(self.origin + at).await;
    }
}
