//! Native extraction versus external OCR.

use std::io;
use std::path::{Path, PathBuf};
use std::process::Command;

use pdfcorpus_core::layout::{parse_hocr, HocrError, PageText};

use crate::config::OcrSettings;
use crate::record::{DocumentRecord, Route, Status};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Routing {
    NativeExtraction,
    /// OCR with the engine's name for the URL language.
    ExternalOcr { lang: String },
}

impl Routing {
    pub fn route(&self) -> Route {
        match self {
            Routing::NativeExtraction => Route::NativeExtraction,
            Routing::ExternalOcr { .. } => Route::ExternalOcr,
        }
    }
}

/// Born-digital documents go to the native extractor; everything else to
/// OCR in the language the URL suggested.
pub fn route_document(record: &DocumentRecord, ocr: &OcrSettings) -> Routing {
    debug_assert!(record.scan.is_some(), "routing needs a scan");
    if record.status == Status::BornDigital {
        Routing::NativeExtraction
    } else {
        Routing::ExternalOcr {
            lang: ocr.engine_lang(record.url_lang),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OcrError {
    #[error("no OCR command configured")]
    NotConfigured,
    #[error("OCR program `{0}` not found")]
    MissingBinary(String),
    #[error("OCR program could not run: {0}")]
    Spawn(io::Error),
    #[error("OCR exited with {0}")]
    Failed(String),
    #[error("OCR left no output at {0}")]
    NoOutput(PathBuf),
    #[error("unreadable hOCR: {0}")]
    BadOutput(#[from] HocrError),
}

/// Splits the template on whitespace and fills the placeholders.
pub fn expand_command(template: &str, input: &Path, lang: &str, output: &Path) -> Vec<String> {
    template
        .split_whitespace()
        .map(|part| {
            part.replace("{input}", &input.to_string_lossy())
                .replace("{lang}", lang)
                .replace("{output}", &output.to_string_lossy())
        })
        .collect()
}

/// Runs the configured engine on `input` and imports its hOCR.
pub fn run_ocr(
    settings: &OcrSettings,
    input: &Path,
    lang: &str,
    output: &Path,
    page_sizes: &[(f64, f64)],
) -> Result<Vec<PageText>, OcrError> {
    let template = settings.command.as_deref().ok_or(OcrError::NotConfigured)?;
    let argv = expand_command(template, input, lang, output);
    let (program, args) = argv.split_first().ok_or(OcrError::NotConfigured)?;
    if let Some(dir) = output.parent() {
        std::fs::create_dir_all(dir).map_err(OcrError::Spawn)?;
    }
    let result = Command::new(program).args(args).output();
    let out = match result {
        Ok(o) => o,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(OcrError::MissingBinary(program.clone())),
        Err(e) => return Err(OcrError::Spawn(e)),
    };
    if !out.status.success() {
        return Err(OcrError::Failed(out.status.to_string()));
    }
    // Tesseract appends the format extension to the output base name
    let mut suffixed = output.as_os_str().to_owned();
    suffixed.push(".hocr");
    let candidates = [output.to_path_buf(), PathBuf::from(suffixed)];
    let found = candidates
        .iter()
        .find(|p| p.is_file())
        .ok_or_else(|| OcrError::NoOutput(output.to_path_buf()))?;
    let html = std::fs::read_to_string(found).map_err(OcrError::Spawn)?;
    Ok(parse_hocr(&html, Some(page_sizes))?)
}
