//! Per-language document counts along the pipeline.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use pdfcorpus_core::lang::LangCode;
use serde::{Deserialize, Serialize};

use crate::record::{DocumentRecord, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FunnelRow {
    pub found: u64,
    pub filtered: u64,
    pub domain_balanced: u64,
    pub language_balanced: u64,
    pub downloaded: u64,
    pub processed: u64,
}

impl FunnelRow {
    fn add(&mut self, o: &FunnelRow) {
        self.found += o.found;
        self.filtered += o.filtered;
        self.domain_balanced += o.domain_balanced;
        self.language_balanced += o.language_balanced;
        self.downloaded += o.downloaded;
        self.processed += o.processed;
    }

    pub fn columns(&self) -> [u64; 6] {
        [
            self.found,
            self.filtered,
            self.domain_balanced,
            self.language_balanced,
            self.downloaded,
            self.processed,
        ]
    }

    /// Each column is at most the one before it.
    pub fn is_monotone(&self) -> bool {
        self.columns().windows(2).all(|w| w[0] >= w[1])
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Funnel {
    pub rows: BTreeMap<LangCode, FunnelRow>,
}

fn percent(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// `1234567` → `1 234 567`.
fn grouped(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(' ');
        }
        out.push(c);
    }
    out
}

impl Funnel {
    pub fn total(&self) -> FunnelRow {
        let mut t = FunnelRow::default();
        for r in self.rows.values() {
            t.add(r);
        }
        t
    }

    /// Share of downloaded documents that were also processed.
    pub fn processing_rate(&self) -> f64 {
        let t = self.total();
        percent(t.processed, t.downloaded)
    }

    /// Fills the download and processing columns from final records.
    pub fn absorb_records(&mut self, records: &[DocumentRecord]) {
        for row in self.rows.values_mut() {
            row.downloaded = 0;
            row.processed = 0;
        }
        for r in records {
            let row = self.rows.entry(r.url_lang).or_default();
            if r.status.reached_download() {
                row.downloaded += 1;
            }
            if r.status == Status::Indexed {
                row.processed += 1;
            }
        }
    }

    pub fn render(&self) -> String {
        let header = [
            "",
            "URLs found",
            "Anti-spam filtered",
            "Domain balanced",
            "Language balanced",
            "Successfully downloaded",
            "Successfully processed",
        ];
        let mut lines: Vec<[String; 7]> = Vec::new();
        let row_cells = |label: String, r: &FunnelRow| -> [String; 7] {
            [
                label,
                grouped(r.found),
                grouped(r.filtered),
                grouped(r.domain_balanced),
                grouped(r.language_balanced),
                format!("{} ({:.2}%)", grouped(r.downloaded), percent(r.downloaded, r.language_balanced)),
                format!("{} ({:.2}%)", grouped(r.processed), percent(r.processed, r.language_balanced)),
            ]
        };
        for (lang, r) in &self.rows {
            lines.push(row_cells(lang.to_string(), r));
        }
        let total = row_cells("all".into(), &self.total());
        let mut widths = header.map(str::len);
        for l in lines.iter().chain(std::iter::once(&total)) {
            for (w, c) in widths.iter_mut().zip(l.iter()) {
                *w = (*w).max(c.chars().count());
            }
        }
        let rule: String = "-".repeat(widths.iter().sum::<usize>() + 3 * (widths.len() - 1));
        let fmt_row = |cells: &[String]| -> String {
            let mut s = String::new();
            for (i, (c, w)) in cells.iter().zip(widths.iter()).enumerate() {
                if i > 0 {
                    s.push_str(" | ");
                }
                if i == 0 {
                    let _ = write!(s, "{c:<w$}");
                } else {
                    let _ = write!(s, "{c:>w$}");
                }
            }
            s.trim_end().to_string()
        };
        let mut out = String::new();
        out.push_str(&fmt_row(&header.map(String::from)));
        out.push('\n');
        out.push_str(&rule);
        out.push('\n');
        for l in &lines {
            out.push_str(&fmt_row(l));
            out.push('\n');
        }
        out.push_str(&rule);
        out.push('\n');
        out.push_str(&fmt_row(&total));
        out.push('\n');
        let _ = writeln!(
            out,
            "Processing success rate of downloaded documents: {:.2}%",
            self.processing_rate()
        );
        out
    }
}

/// Final-status tally.
pub fn status_counts(records: &[DocumentRecord]) -> BTreeMap<Status, u64> {
    let mut m = BTreeMap::new();
    for r in records {
        *m.entry(r.status).or_insert(0) += 1;
    }
    m
}

/// Checks that `records` accounts for every selected URL exactly once, in
/// a terminal status, and that the funnel narrows monotonically.
pub fn check_conservation(selected: &[String], records: &[DocumentRecord], funnel: &Funnel) -> Vec<String> {
    let mut problems = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for r in records {
        *seen.entry(r.url.as_str()).or_default() += 1;
        if !r.status.is_terminal() {
            problems.push(format!("{}: non-terminal status {}", r.url, r.status.as_str()));
        }
        if r.status == Status::Indexed && !r.content_lang.is_some_and(|l| l != LangCode::Unknown) {
            problems.push(format!("{}: indexed without a content language", r.url));
        }
    }
    for url in selected {
        match seen.get(url.as_str()) {
            None => problems.push(format!("{url}: selected but missing")),
            Some(&n) if n > 1 => problems.push(format!("{url}: appears {n} times")),
            _ => {}
        }
    }
    if records.len() != selected.len() {
        problems.push(format!("{} records for {} selected URLs", records.len(), selected.len()));
    }
    let downloaded = records.iter().filter(|r| r.status.reached_download()).count();
    let parsed = records.iter().filter(|r| r.status.reached_parse()).count();
    let indexed = records.iter().filter(|r| r.status == Status::Indexed).count();
    if !(downloaded >= parsed && parsed >= indexed) {
        problems.push(format!("downloaded {downloaded} ≥ parsed {parsed} ≥ indexed {indexed} violated"));
    }
    for (lang, row) in &funnel.rows {
        if !row.is_monotone() {
            problems.push(format!("{lang}: funnel columns {:?} are not non-increasing", row.columns()));
        }
    }
    problems
}
