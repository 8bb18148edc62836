//! Cheap checks that a payload is a complete PDF.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadCheck {
    Ok,
    /// Truncated payload without a trailing `%%EOF`.
    OkWithWarning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidPayload {
    #[error("no %PDF- header in the first 1024 bytes")]
    NoMagic,
    #[error("no %%EOF in the last 2048 bytes")]
    NoEof,
}

fn contains(hay: &[u8], needle: &[u8]) -> bool {
    hay.windows(needle.len()).any(|w| w == needle)
}

/// `%PDF-` within the first 1024 bytes and `%%EOF` within the last 2048.
pub fn validate_pdf_payload(bytes: &[u8], truncated: bool) -> Result<PayloadCheck, InvalidPayload> {
    if !contains(&bytes[..bytes.len().min(1024)], b"%PDF-") {
        return Err(InvalidPayload::NoMagic);
    }
    if contains(&bytes[bytes.len().saturating_sub(2048)..], b"%%EOF") {
        Ok(PayloadCheck::Ok)
    } else if truncated {
        Ok(PayloadCheck::OkWithWarning)
    } else {
        Err(InvalidPayload::NoEof)
    }
}
