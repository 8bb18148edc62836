//! Document downloads: from the original URL or from a byte range of a
//! crawl archive, with payload validation and per-domain politeness.

use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub mod origin;
pub mod pool;
pub mod scheduler;
pub mod store;
pub mod validate;
pub mod warc;

pub use origin::fetch_original;
pub use validate::{validate_pdf_payload, InvalidPayload, PayloadCheck};
pub use warc::{fetch_from_warc, HttpRangeReader, LocalRangeReader, RangeReader};

/// Bodies at exactly this length were cut by the crawler.
pub const CRAWLER_TRUNCATION_BYTES: usize = 1_048_576;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum FetchError {
    #[error("invalid url: {0}")]
    InvalidUrl(String),
    #[error("host not found")]
    Dns,
    #[error("connection failed: {0}")]
    Connect(String),
    #[error("timed out")]
    Timeout,
    #[error("client error {0}")]
    Http4xx(u16),
    #[error("server error {0}")]
    Http5xx(u16),
    #[error("unexpected status {0}")]
    HttpStatus(u16),
    #[error("more than the allowed redirects")]
    TooManyRedirects,
    #[error("payload exceeds {0} bytes")]
    Oversize(u64),
    #[error("server ignored the range request")]
    RangeUnsupported,
    #[error("bad gzip member: {0}")]
    BadGzip(String),
    #[error("bad WARC record: {0}")]
    BadWarcRecord(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl FetchError {
    /// Worth retrying with backoff.
    pub fn is_transient(&self) -> bool {
        matches!(self, FetchError::Connect(_) | FetchError::Timeout | FetchError::Http5xx(_) | FetchError::Io(_))
    }

    /// Short machine-readable name.
    pub fn kind(&self) -> &'static str {
        match self {
            FetchError::InvalidUrl(_) => "invalid_url",
            FetchError::Dns => "dns",
            FetchError::Connect(_) => "connect",
            FetchError::Timeout => "timeout",
            FetchError::Http4xx(_) => "http_4xx",
            FetchError::Http5xx(_) => "http_5xx",
            FetchError::HttpStatus(_) => "http_status",
            FetchError::TooManyRedirects => "too_many_redirects",
            FetchError::Oversize(_) => "oversize",
            FetchError::RangeUnsupported => "range_unsupported",
            FetchError::BadGzip(_) => "bad_gzip",
            FetchError::BadWarcRecord(_) => "bad_warc_record",
            FetchError::Io(_) => "io",
        }
    }

    pub(crate) fn from_status(status: u16) -> FetchError {
        match status {
            400..=499 => FetchError::Http4xx(status),
            500..=599 => FetchError::Http5xx(status),
            _ => FetchError::HttpStatus(status),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Origin,
    Warc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FetchResult {
    pub url: String,
    pub source: Source,
    #[serde(skip)]
    pub bytes: Vec<u8>,
    /// Only archive records can be truncated by the crawler.
    pub truncated: bool,
    pub http_status: u16,
    pub fetched_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FetchConfig {
    #[serde(with = "secs")]
    pub timeout: Duration,
    pub max_retries: u32,
    pub max_redirects: u32,
    pub max_bytes: u64,
    pub user_agent: String,
    /// First retry delay; doubles on each further attempt.
    #[serde(with = "secs")]
    pub backoff: Duration,
    /// Stamp results with this time instead of the wall clock.
    pub fixed_time: Option<DateTime<Utc>>,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            timeout: Duration::from_secs(30),
            max_retries: 3,
            max_redirects: 5,
            max_bytes: 512 * 1024 * 1024,
            user_agent: concat!("pdfcorpus/", env!("CARGO_PKG_VERSION")).to_string(),
            backoff: Duration::from_millis(500),
            fixed_time: None,
        }
    }
}

impl FetchConfig {
    pub fn now(&self) -> DateTime<Utc> {
        self.fixed_time.unwrap_or_else(Utc::now)
    }

    pub(crate) fn agent(&self) -> ureq::Agent {
        ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .max_redirects(self.max_redirects)
            .http_status_as_error(false)
            .user_agent(self.user_agent.as_str())
            .build()
            .new_agent()
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn map_ureq_error(e: ureq::Error, max_bytes: u64) -> FetchError {
    match e {
        ureq::Error::StatusCode(s) => FetchError::from_status(s),
        ureq::Error::BadUri(u) => FetchError::InvalidUrl(u),
        ureq::Error::HostNotFound => FetchError::Dns,
        ureq::Error::Timeout(_) => FetchError::Timeout,
        ureq::Error::TooManyRedirects => FetchError::TooManyRedirects,
        ureq::Error::BodyExceedsLimit(_) => FetchError::Oversize(max_bytes),
        ureq::Error::ConnectionFailed => FetchError::Connect("connection failed".into()),
        ureq::Error::Io(io) => match io.kind() {
            std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock => FetchError::Timeout,
            std::io::ErrorKind::ConnectionRefused
            | std::io::ErrorKind::ConnectionReset
            | std::io::ErrorKind::ConnectionAborted
            | std::io::ErrorKind::NotConnected => FetchError::Connect(io.to_string()),
            _ => match io.get_ref().and_then(|inner| inner.downcast_ref::<ureq::Error>()) {
                Some(ureq::Error::BodyExceedsLimit(_)) => FetchError::Oversize(max_bytes),
                _ => FetchError::Io(io.to_string()),
            },
        },
        other => FetchError::Connect(other.to_string()),
    }
}

/// Sleeps before retry `attempt` (1-based).
pub(crate) fn backoff_delay(cfg: &FetchConfig, attempt: u32) -> Duration {
    cfg.backoff.saturating_mul(1u32 << (attempt - 1).min(16))
}
