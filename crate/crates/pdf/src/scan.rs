//! Born-digital statistics: visible and hidden text length and image count.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::document::{parse_document, PdfDocument, PdfError};
use crate::interp::{page_events, PageEvents, Visibility};
use crate::object::ObjRef;

pub const MIN_PLAUSIBLE_YEAR: i32 = 1980;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    /// Characters shown with render modes 0, 1, 2, 4, 5 and 6.
    pub visible_text_len: u64,
    /// Characters shown with render mode 3 or with zero alpha.
    pub hidden_text_len: u64,
    /// Distinct image XObjects plus inline image occurrences.
    pub image_count: u64,
    pub page_count: usize,
    pub version: String,
    /// Creation year when plausible.
    pub creation_year: Option<i32>,
    /// Creation year as written, including implausible values.
    pub creation_year_raw: Option<i32>,
    pub creator: Option<String>,
    pub producer: Option<String>,
    pub creator_vendor: String,
    /// Displayed (rotation-applied) page sizes in points.
    pub page_sizes: Vec<(f64, f64)>,
    /// Glyphs whose code had no Unicode mapping.
    pub unmapped_glyphs: u64,
    pub recovered: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BornDigitalThresholds {
    /// Visible text must be strictly longer than this.
    pub min_visible_chars: u64,
    pub max_hidden_chars: u64,
    pub max_images: u64,
}

impl Default for BornDigitalThresholds {
    fn default() -> Self {
        BornDigitalThresholds {
            min_visible_chars: 100,
            max_hidden_chars: 0,
            max_images: 0,
        }
    }
}

/// More than 100 visible characters, no hidden text and no images.
pub fn classify_born_digital(report: &ScanReport) -> bool {
    classify_born_digital_with(report, &BornDigitalThresholds::default())
}

pub fn classify_born_digital_with(report: &ScanReport, t: &BornDigitalThresholds) -> bool {
    report.visible_text_len > t.min_visible_chars
        && report.hidden_text_len <= t.max_hidden_chars
        && report.image_count <= t.max_images
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CreationYear {
    Valid(i32),
    Invalid(i32),
}

impl CreationYear {
    pub fn raw(self) -> i32 {
        match self {
            CreationYear::Valid(y) | CreationYear::Invalid(y) => y,
        }
    }

    pub fn valid(self) -> Option<i32> {
        match self {
            CreationYear::Valid(y) => Some(y),
            CreationYear::Invalid(_) => None,
        }
    }
}

pub fn current_year() -> i32 {
    chrono::Utc::now().year()
}

/// Year of a `D:YYYYMMDDhhmmss+hh'mm'` date, accepting anything from a bare
/// `YYYY` on; years outside 1980..=current+1 come back `Invalid`.
pub fn parse_creation_date(raw: &str) -> Option<CreationYear> {
    parse_creation_date_until(raw, current_year() + 1)
}

pub fn parse_creation_date_until(raw: &str, max_year: i32) -> Option<CreationYear> {
    let s = raw.trim().trim_start_matches('\u{feff}');
    let s = s.strip_prefix("D:").unwrap_or(s).trim_start();
    let digits: String = s.chars().take_while(|c| c.is_ascii_digit()).collect();
    if digits.len() < 4 {
        return None;
    }
    let year: i32 = digits[..4].parse().ok()?;
    Some(if (MIN_PLAUSIBLE_YEAR..=max_year).contains(&year) {
        CreationYear::Valid(year)
    } else {
        CreationYear::Invalid(year)
    })
}

const VENDORS: &[(&str, &[&str])] = &[
    ("adobe", &["adobe", "acrobat", "indesign", "illustrator", "photoshop", "distiller", "pdfmaker", "framemaker"]),
    ("microsoft", &["microsoft", "word", "excel", "powerpoint", "publisher", "visio"]),
    ("libreoffice", &["libreoffice", "openoffice", "staroffice", "neooffice"]),
    ("ghostscript", &["ghostscript", "gpl ghostscript", "afpl"]),
    ("latex", &["latex", "pdftex", "xetex", "luatex", "dvipdf", "miktex", "tex live", "texlive"]),
    ("apple", &["quartz", "mac os x", "macos", "pages", "keynote"]),
    ("google", &["google", "skia"]),
    ("itext", &["itext"]),
    ("chromium", &["chromium", "chrome", "headlesschrome"]),
    ("wkhtmltopdf", &["wkhtmltopdf", "qt "]),
    ("foxit", &["foxit"]),
    ("nitro", &["nitro"]),
    ("pdfcreator", &["pdfcreator"]),
    ("reportlab", &["reportlab"]),
];

fn vendor_of(s: &str) -> Option<&'static str> {
    let lower = s.to_lowercase();
    VENDORS
        .iter()
        .find(|(_, keys)| keys.iter().any(|k| lower.contains(k)))
        .map(|(v, _)| *v)
}

/// Canonical tool vendor from the Creator and Producer strings.
pub fn normalize_creator(creator: &str, producer: &str) -> String {
    if let Some(v) = vendor_of(creator).or_else(|| vendor_of(producer)) {
        return v.to_string();
    }
    let source = if creator.trim().is_empty() { producer } else { creator };
    source
        .split_whitespace()
        .next()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .unwrap_or_default()
}

fn text_len(text: &Option<String>, code_len: u8, type3: bool) -> u64 {
    match text {
        Some(t) => t.chars().count() as u64,
        // Type3 glyphs without a mapping carry no text
        None if type3 => 0,
        None => code_len as u64,
    }
}

/// Interprets a page, turning a panic on malformed input into a warning.
pub(crate) fn guarded_page_events(doc: &PdfDocument, index: usize) -> Result<PageEvents, String> {
    let page = &doc.pages[index];
    catch_unwind(AssertUnwindSafe(|| page_events(doc, page))).map_err(|_| format!("page {index}: interpreter failure"))
}

pub fn scan(doc: &PdfDocument) -> ScanReport {
    let mut visible = 0u64;
    let mut hidden = 0u64;
    let mut images: BTreeSet<ObjRef> = BTreeSet::new();
    let mut inline = 0u64;
    let mut unmapped = 0u64;
    let mut warnings = doc.warnings.clone();
    for i in 0..doc.pages.len() {
        let ev = match guarded_page_events(doc, i) {
            Ok(ev) => ev,
            Err(w) => {
                warnings.push(w);
                continue;
            }
        };
        for g in &ev.glyphs {
            let n = text_len(&g.text, g.code_len, g.type3);
            if g.text.is_none() && !g.type3 {
                unmapped += 1;
            }
            match g.visibility {
                Visibility::Visible => visible += n,
                Visibility::Hidden => hidden += n,
                Visibility::ClipOnly => {}
            }
        }
        images.extend(ev.images.iter().copied());
        inline += ev.inline_images as u64;
        warnings.extend(ev.warnings.into_iter().map(|w| format!("page {i}: {w}")));
    }
    let year = doc.info.creation_date.as_deref().and_then(parse_creation_date);
    let creator = doc.info.creator.clone().filter(|s| !s.trim().is_empty());
    let producer = doc.info.producer.clone().filter(|s| !s.trim().is_empty());
    ScanReport {
        visible_text_len: visible,
        hidden_text_len: hidden,
        image_count: images.len() as u64 + inline,
        page_count: doc.pages.len(),
        version: doc.version.clone(),
        creation_year: year.and_then(CreationYear::valid),
        creation_year_raw: year.map(CreationYear::raw),
        creator_vendor: normalize_creator(creator.as_deref().unwrap_or(""), producer.as_deref().unwrap_or("")),
        creator,
        producer,
        page_sizes: doc.pages.iter().map(|p| p.effective_size()).collect(),
        unmapped_glyphs: unmapped,
        recovered: doc.recovered,
        warnings,
    }
}

/// Parses and scans in one step.
pub fn scan_bytes(bytes: &[u8]) -> Result<ScanReport, PdfError> {
    parse_document(bytes).map(|d| scan(&d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(visible: u64, hidden: u64, images: u64) -> ScanReport {
        ScanReport {
            visible_text_len: visible,
            hidden_text_len: hidden,
            image_count: images,
            page_count: 1,
            version: "1.4".into(),
            creation_year: None,
            creation_year_raw: None,
            creator: None,
            producer: None,
            creator_vendor: String::new(),
            page_sizes: vec![(595.0, 842.0)],
            unmapped_glyphs: 0,
            recovered: false,
            warnings: vec![],
        }
    }

    #[test]
    fn born_digital_examples() {
        assert!(classify_born_digital(&report(150, 0, 0)));
        assert!(!classify_born_digital(&report(150, 0, 1)));
        assert!(!classify_born_digital(&report(0, 0, 0)));
        assert!(!classify_born_digital(&report(100, 0, 0)));
        assert!(classify_born_digital(&report(101, 0, 0)));
        assert!(!classify_born_digital(&report(500, 1, 0)));
    }

    proptest! {
        #[test]
        fn threshold_predicate(v in 0u64..400, h in 0u64..3, i in 0u64..3) {
            let r = report(v, h, i);
            prop_assert_eq!(classify_born_digital(&r), v > 100 && h == 0 && i == 0);
            if classify_born_digital(&r) {
                prop_assert!(classify_born_digital(&report(v + 1, h, i)));
            }
        }
    }

    #[test]
    fn creation_dates() {
        assert_eq!(parse_creation_date_until("D:20210312094500+01'00'", 2030), Some(CreationYear::Valid(2021)));
        assert_eq!(parse_creation_date_until("D:1442", 2030), Some(CreationYear::Invalid(1442)));
        assert_eq!(parse_creation_date_until("2019", 2030), Some(CreationYear::Valid(2019)));
        assert_eq!(parse_creation_date_until("D:2099", 2030), Some(CreationYear::Invalid(2099)));
        assert_eq!(parse_creation_date_until("hello", 2030), None);
        assert_eq!(parse_creation_date_until("D:20", 2030), None);
        assert!(parse_creation_date("D:2021").unwrap().valid().is_some());
    }

    #[test]
    fn creators() {
        assert_eq!(normalize_creator("Microsoft® Word 2016", ""), "microsoft");
        assert_eq!(normalize_creator("", "Adobe PDF Library 15.0"), "adobe");
        assert_eq!(normalize_creator("", ""), "");
        assert_eq!(normalize_creator("Writer", "LibreOffice 7.3"), "libreoffice");
        assert_eq!(normalize_creator("LaTeX with hyperref", "pdfTeX-1.40.21"), "latex");
        assert_eq!(normalize_creator("Zeta Tool 3", ""), "zeta");
    }
}
