//! One line of the published index.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use pdfcorpus_core::cdx::CdxRecord;
use pdfcorpus_core::lang::LangCode;
use pdfcorpus_fetch::Source;
use pdfcorpus_pdf::ScanReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Selected,
    Downloaded,
    DownloadFailed,
    Parsed,
    ParseFailed,
    BornDigital,
    NeedsOcr,
    /// Text came out but no language could be identified in it.
    NoText,
    LangMismatchDropped,
    Indexed,
}

impl Status {
    pub const ALL: [Status; 10] = [
        Status::Selected,
        Status::Downloaded,
        Status::DownloadFailed,
        Status::Parsed,
        Status::ParseFailed,
        Status::BornDigital,
        Status::NeedsOcr,
        Status::NoText,
        Status::LangMismatchDropped,
        Status::Indexed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Selected => "selected",
            Status::Downloaded => "downloaded",
            Status::DownloadFailed => "download_failed",
            Status::Parsed => "parsed",
            Status::ParseFailed => "parse_failed",
            Status::BornDigital => "born_digital",
            Status::NeedsOcr => "needs_ocr",
            Status::NoText => "no_text",
            Status::LangMismatchDropped => "lang_mismatch_dropped",
            Status::Indexed => "indexed",
        }
    }

    /// Statuses reachable in one step.
    pub fn successors(self) -> &'static [Status] {
        use Status::*;
        match self {
            Selected => &[Downloaded, DownloadFailed],
            Downloaded => &[Parsed, ParseFailed],
            Parsed => &[BornDigital, NeedsOcr, NoText, LangMismatchDropped, Indexed],
            BornDigital => &[NoText, LangMismatchDropped, Indexed],
            DownloadFailed | ParseFailed | NeedsOcr | NoText | LangMismatchDropped | Indexed => &[],
        }
    }

    pub fn can_become(self, next: Status) -> bool {
        self.successors().contains(&next)
    }

    pub fn is_terminal(self) -> bool {
        self.successors().is_empty()
    }

    pub fn is_failure(self) -> bool {
        matches!(self, Status::DownloadFailed | Status::ParseFailed)
    }

    pub fn reached_download(self) -> bool {
        !matches!(self, Status::Selected | Status::DownloadFailed)
    }

    pub fn reached_parse(self) -> bool {
        self.reached_download() && !matches!(self, Status::Downloaded | Status::ParseFailed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    NativeExtraction,
    ExternalOcr,
}

/// Where the capture sits in the archive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveLocation {
    pub filename: String,
    pub offset: u64,
    pub length: u64,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextSummary {
    /// Token file relative to the work directory.
    pub path: String,
    pub pages: usize,
    pub words: usize,
    pub lines: usize,
    pub chars: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub url: String,
    pub domain: String,
    pub url_lang: LangCode,
    pub status: Status,
    pub archive: ArchiveLocation,
    pub sha256: Option<String>,
    pub size: Option<u64>,
    pub source: Option<Source>,
    pub truncated: bool,
    /// Payload path relative to the work directory.
    pub path: Option<String>,
    pub scan: Option<ScanReport>,
    pub route: Option<Route>,
    pub text: Option<TextSummary>,
    pub content_lang: Option<LangCode>,
    pub content_confidence: Option<f64>,
    pub multi_language_suspected: bool,
    pub error: Option<String>,
    pub timestamps: BTreeMap<String, DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{url}: {from:?} cannot become {to:?}")]
pub struct BadTransition {
    pub url: String,
    pub from: Status,
    pub to: Status,
}

impl DocumentRecord {
    pub fn selected(cdx: &CdxRecord, domain: String, url_lang: LangCode, at: DateTime<Utc>) -> DocumentRecord {
        let mut timestamps = BTreeMap::new();
        timestamps.insert(Status::Selected.as_str().to_string(), at);
        DocumentRecord {
            url: cdx.url.clone(),
            domain,
            url_lang,
            status: Status::Selected,
            archive: ArchiveLocation {
                filename: cdx.warc_filename.clone(),
                offset: cdx.warc_offset,
                length: cdx.warc_length,
                timestamp: cdx.timestamp.clone(),
            },
            sha256: None,
            size: None,
            source: None,
            truncated: false,
            path: None,
            scan: None,
            route: None,
            text: None,
            content_lang: None,
            content_confidence: None,
            multi_language_suspected: false,
            error: None,
            timestamps,
        }
    }

    /// Moves along the pipeline graph, stamping the new status.
    pub fn advance(&mut self, to: Status, at: DateTime<Utc>) -> Result<(), BadTransition> {
        if !self.status.can_become(to) {
            return Err(BadTransition {
                url: self.url.clone(),
                from: self.status,
                to,
            });
        }
        self.status = to;
        self.timestamps.insert(to.as_str().to_string(), at);
        Ok(())
    }

    pub fn fail(&mut self, to: Status, error: impl Into<String>, at: DateTime<Utc>) -> Result<(), BadTransition> {
        self.advance(to, at)?;
        self.error = Some(error.into());
        Ok(())
    }
}
