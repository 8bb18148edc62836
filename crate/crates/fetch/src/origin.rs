//! Downloads from the original URL.

use crate::{backoff_delay, map_ureq_error, FetchConfig, FetchError, FetchResult, Source};

fn attempt(agent: &ureq::Agent, url: &str, cfg: &FetchConfig) -> Result<(u16, Vec<u8>), FetchError> {
    let mut resp = agent.get(url).call().map_err(|e| map_ureq_error(e, cfg.max_bytes))?;
    let status = resp.status().as_u16();
    if !(200..300).contains(&status) {
        return Err(FetchError::from_status(status));
    }
    let body = resp
        .body_mut()
        .with_config()
        .limit(cfg.max_bytes)
        .read_to_vec()
        .map_err(|e| map_ureq_error(e, cfg.max_bytes))?;
    Ok((status, body))
}

/// GET with at most `cfg.max_redirects` redirects, retrying transient
/// failures up to `cfg.max_retries` times with doubling delays.
pub fn fetch_original(url: &str, cfg: &FetchConfig) -> Result<FetchResult, FetchError> {
    url::Url::parse(url).map_err(|e| FetchError::InvalidUrl(e.to_string()))?;
    let agent = cfg.agent();
    let mut tries = 0;
    loop {
        match attempt(&agent, url, cfg) {
            Ok((status, bytes)) => {
                return Ok(FetchResult {
                    url: url.to_string(),
                    source: Source::Origin,
                    bytes,
                    truncated: false,
                    http_status: status,
                    fetched_at: cfg.now(),
                })
            }
            Err(e) if e.is_transient() && tries < cfg.max_retries => {
                tries += 1;
                std::thread::sleep(backoff_delay(cfg, tries));
            }
            Err(e) => return Err(e),
        }
    }
}
