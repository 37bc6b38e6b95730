use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::feed::{Feed, Pagination};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrawlConfig {
    pub base_url: String,
    /// Requests dispatched together; never more are in flight.
    pub batch_size: usize,
    /// Minimum gap between consecutive batch starts.
    #[serde(with = "duration_text")]
    pub inter_batch_delay: Duration,
    /// Posts created outside the window are dropped (and logged).
    pub window_start: Option<DateTime<Utc>>,
    pub window_end: Option<DateTime<Utc>>,
    /// Retries after the first attempt.
    pub max_retries: u32,
    #[serde(with = "duration_text")]
    pub retry_base: Duration,
    #[serde(with = "duration_text")]
    pub request_timeout: Duration,
    pub user_agent: String,
    /// Sent as `Authorization: Bearer ...` when set. Off by default.
    pub bearer_token: Option<String>,
    pub feeds: Vec<Feed>,
    pub pagination: Pagination,
    /// Seeds retry jitter.
    pub seed: u64,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        Self {
            base_url: String::new(),
            batch_size: 4,
            inter_batch_delay: Duration::from_secs(1),
            window_start: None,
            window_end: None,
            max_retries: 3,
            retry_base: Duration::from_millis(500),
            request_timeout: Duration::from_secs(30),
            user_agent: concat!("corpuskit/", env!("CARGO_PKG_VERSION")).to_string(),
            bearer_token: None,
            feeds: Feed::ALL.to_vec(),
            pagination: Pagination::Cursor,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("base_url is empty")]
    MissingBaseUrl,
    #[error("base_url {0:?} is not an http(s) URL")]
    BadBaseUrl(String),
    #[error("batch_size must be at least 1")]
    ZeroBatch,
    #[error("window_start is after window_end")]
    EmptyWindow,
    #[error("no feeds selected")]
    NoFeeds,
}

impl CrawlConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.base_url.trim().is_empty() {
            return Err(ConfigError::MissingBaseUrl);
        }
        let lower = self.base_url.to_ascii_lowercase();
        if !(lower.starts_with("http://") || lower.starts_with("https://")) {
            return Err(ConfigError::BadBaseUrl(self.base_url.clone()));
        }
        if self.batch_size == 0 {
            return Err(ConfigError::ZeroBatch);
        }
        if let (Some(a), Some(b)) = (self.window_start, self.window_end) {
            if a > b {
                return Err(ConfigError::EmptyWindow);
            }
        }
        if self.feeds.is_empty() {
            return Err(ConfigError::NoFeeds);
        }
        Ok(())
    }

    pub fn in_window(&self, t: DateTime<Utc>) -> bool {
        self.window_start.is_none_or(|s| t >= s) && self.window_end.is_none_or(|e| t <= e)
    }
}

/// Durations as human text ("1s", "500ms").
pub mod duration_text {
    use super::*;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&humantime::format_duration(*d).to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let raw = String::deserialize(d)?;
        parse(&raw).map_err(serde::de::Error::custom)
    }

    /// Accepts humantime syntax, plus a bare number of seconds.
    pub fn parse(raw: &str) -> Result<Duration, String> {
        let raw = raw.trim();
        if let Ok(secs) = raw.parse::<f64>() {
            if secs.is_finite() && secs >= 0.0 {
                return Ok(Duration::from_secs_f64(secs));
            }
            return Err(format!("invalid duration {raw:?}"));
        }
        humantime::parse_duration(raw).map_err(|e| format!("invalid duration {raw:?}: {e}"))
    }
}
