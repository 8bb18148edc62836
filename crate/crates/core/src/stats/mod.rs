//! Corpus-level distributions: creation years, PDF versions, creators, word
//! and line counts, page coverage, page formats and token heatmaps.
//!
//! Each document is summarized on its own ([`CorpusStats::from_document`])
//! and the partial results are merged; merging is commutative and all
//! counters are integers, so the sequential and parallel paths agree.

pub mod coverage;
pub mod format;
pub mod heatmap;
pub mod histogram;

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

pub use coverage::{page_coverage, union_area};
pub use format::{classify_page_format, FormatClass, InvalidDimensions, Orientation, Series};
pub use heatmap::{accumulate_heatmap, HeatmapGrid};
pub use histogram::{CategoryHistogram, Histogram};

use crate::layout::PageText;

pub const PDF_VERSIONS: [&str; 9] = ["1.0", "1.1", "1.2", "1.3", "1.4", "1.5", "1.6", "1.7", "2.0"];

/// What the statistics need to know about one document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DocumentFacts {
    pub creation_year: Option<i32>,
    pub pdf_version: Option<String>,
    /// Normalized tool vendor, e.g. `microsoft` or `adobe`.
    pub creator: Option<String>,
    pub pages: Vec<PageText>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StatsConfig {
    /// Creation years outside this range are treated as undefined.
    pub min_year: i32,
    pub max_year: i32,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            min_year: 1980,
            max_year: chrono::Utc::now().year() + 1,
        }
    }
}

pub fn is_plausible_year(year: i32, cfg: &StatsConfig) -> bool {
    (cfg.min_year..=cfg.max_year).contains(&year)
}

fn empty_year_histogram(cfg: &StatsConfig) -> Histogram {
    let edges: Vec<f64> = (cfg.min_year..=cfg.max_year + 1).map(f64::from).collect();
    Histogram::new(&edges)
}

/// One bucket per year; missing or implausible years are undefined.
pub fn year_histogram<I: IntoIterator<Item = Option<i32>>>(years: I, cfg: &StatsConfig) -> Histogram {
    let mut h = empty_year_histogram(cfg);
    for y in years {
        h.add(y.filter(|y| is_plausible_year(*y, cfg)).map(f64::from));
    }
    h
}

pub fn version_histogram<'a, I: IntoIterator<Item = Option<&'a str>>>(versions: I) -> CategoryHistogram {
    let mut h = CategoryHistogram::new(&PDF_VERSIONS);
    for v in versions {
        h.add(v);
    }
    h
}

fn empty_doc_words() -> Histogram {
    Histogram::new(&[
        0.0, 1.0, 50.0, 100.0, 250.0, 500.0, 1000.0, 2500.0, 5000.0, 10_000.0, 25_000.0, 50_000.0,
        100_000.0,
    ])
}

fn empty_page_words() -> Histogram {
    Histogram::uniform(0.0, 1500.0, 50.0)
}

fn empty_page_lines() -> Histogram {
    Histogram::uniform(0.0, 150.0, 5.0)
}

fn empty_coverage() -> Histogram {
    Histogram::uniform(0.0, 1.0, 0.05)
}

fn empty_aspect() -> Histogram {
    Histogram::uniform(0.0, 3.0, 0.1)
}

/// Per-document and per-page word count histograms.
pub fn word_count_stats(docs: &[Vec<PageText>]) -> (Histogram, Histogram) {
    let mut per_doc = empty_doc_words();
    let mut per_page = empty_page_words();
    for pages in docs {
        let mut words = 0usize;
        for p in pages {
            per_page.add_value(p.word_count() as f64);
            words += p.word_count();
        }
        per_doc.add_value(words as f64);
    }
    (per_doc, per_page)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: u64,
    pub pages: u64,
    pub years: Histogram,
    pub versions: CategoryHistogram,
    pub creators: BTreeMap<String, u64>,
    pub words_per_document: Histogram,
    pub words_per_page: Histogram,
    pub lines_per_page: Histogram,
    pub coverage: Histogram,
    /// Page width divided by height.
    pub aspect_ratio: Histogram,
    pub formats: BTreeMap<String, u64>,
    pub heatmap_vertical: HeatmapGrid,
    pub heatmap_horizontal: HeatmapGrid,
}

impl CorpusStats {
    pub fn new(cfg: &StatsConfig) -> CorpusStats {
        CorpusStats {
            documents: 0,
            pages: 0,
            years: empty_year_histogram(cfg),
            versions: CategoryHistogram::new(&PDF_VERSIONS),
            creators: BTreeMap::new(),
            words_per_document: empty_doc_words(),
            words_per_page: empty_page_words(),
            lines_per_page: empty_page_lines(),
            coverage: empty_coverage(),
            aspect_ratio: empty_aspect(),
            formats: BTreeMap::new(),
            heatmap_vertical: HeatmapGrid::for_orientation(Orientation::Vertical),
            heatmap_horizontal: HeatmapGrid::for_orientation(Orientation::Horizontal),
        }
    }

    pub fn from_document(doc: &DocumentFacts, cfg: &StatsConfig) -> CorpusStats {
        let mut s = CorpusStats::new(cfg);
        s.documents = 1;
        s.years
            .add(doc.creation_year.filter(|y| is_plausible_year(*y, cfg)).map(f64::from));
        s.versions.add(doc.pdf_version.as_deref());
        let creator = doc.creator.as_deref().map(str::trim).filter(|c| !c.is_empty());
        *s.creators.entry(creator.unwrap_or("").to_string()).or_default() += 1;

        let mut words = 0usize;
        for p in &doc.pages {
            s.pages += 1;
            words += p.word_count();
            s.words_per_page.add_value(p.word_count() as f64);
            s.lines_per_page.add_value(p.line_count as f64);
            match classify_page_format(p.width, p.height) {
                Ok(fc) => {
                    s.coverage.add_value(page_coverage(p, &p.media_box()));
                    s.aspect_ratio.add_value(p.width / p.height);
                    let key = format!("{}/{}", fc.series.as_str(), fc.orientation.as_str());
                    *s.formats.entry(key).or_default() += 1;
                    match fc.orientation {
                        Orientation::Vertical => s.heatmap_vertical.add_page(p),
                        Orientation::Horizontal => s.heatmap_horizontal.add_page(p),
                    };
                }
                Err(_) => {
                    s.coverage.add_undefined();
                    s.aspect_ratio.add_undefined();
                    *s.formats.entry("invalid".into()).or_default() += 1;
                }
            }
        }
        s.words_per_document.add_value(words as f64);
        s
    }

    pub fn merge(&mut self, other: &CorpusStats) {
        self.documents += other.documents;
        self.pages += other.pages;
        self.years.merge(&other.years);
        self.versions.merge(&other.versions);
        for (k, v) in &other.creators {
            *self.creators.entry(k.clone()).or_default() += v;
        }
        self.words_per_document.merge(&other.words_per_document);
        self.words_per_page.merge(&other.words_per_page);
        self.lines_per_page.merge(&other.lines_per_page);
        self.coverage.merge(&other.coverage);
        self.aspect_ratio.merge(&other.aspect_ratio);
        for (k, v) in &other.formats {
            *self.formats.entry(k.clone()).or_default() += v;
        }
        self.heatmap_vertical.merge(&other.heatmap_vertical);
        self.heatmap_horizontal.merge(&other.heatmap_horizontal);
    }

    /// Summarizes documents in parallel (when enabled) and merges the
    /// partial results in input order.
    pub fn collect(docs: &[DocumentFacts], cfg: &StatsConfig) -> CorpusStats {
        let parts = crate::par::map(docs, |d| CorpusStats::from_document(d, cfg));
        merge_in_order(parts, cfg)
    }

    pub fn collect_sequential(docs: &[DocumentFacts], cfg: &StatsConfig) -> CorpusStats {
        let parts = crate::par::map_sequential(docs, |d| CorpusStats::from_document(d, cfg));
        merge_in_order(parts, cfg)
    }

    pub fn histograms_consistent(&self) -> bool {
        self.years.is_consistent()
            && self.versions.is_consistent()
            && self.words_per_document.is_consistent()
            && self.words_per_page.is_consistent()
            && self.lines_per_page.is_consistent()
            && self.coverage.is_consistent()
            && self.aspect_ratio.is_consistent()
    }

    pub fn summary(&self) -> StatsSummary {
        let frac = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let below_17: u64 = PDF_VERSIONS[..7].iter().map(|v| self.versions.count(v)).sum();
        let vendor = |name: &str| self.creators.get(name).copied().unwrap_or(0);
        let fmt = |series: &str| {
            self.formats
                .iter()
                .filter(|(k, _)| k.starts_with(series))
                .map(|(_, n)| *n)
                .sum::<u64>()
        };
        StatsSummary {
            documents: self.documents,
            pages: self.pages,
            year_field_coverage: frac(self.years.defined(), self.years.total),
            versions_below_1_7: frac(below_17, self.versions.total),
            microsoft_share: frac(vendor("microsoft"), self.documents),
            adobe_share: frac(vendor("adobe"), self.documents),
            abc_series_share: frac(fmt("ABC_series/"), self.pages),
            letter_share: frac(fmt("LETTER/"), self.pages),
            aspect_within_0_4_to_2: self.aspect_ratio.fraction_within(0.4, 2.0),
            coverage_within_5_to_40: self.coverage.fraction_within(0.05, 0.40),
        }
    }

    /// Writes CSV histograms, PGM/CSV/JSON heatmaps and `summary.json`
    /// into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let w = |name: &str, body: String| std::fs::write(dir.join(name), body);
        w("creation_year.csv", self.years.to_csv())?;
        w("pdf_version.csv", self.versions.to_csv())?;
        w("words_per_document.csv", self.words_per_document.to_csv())?;
        w("words_per_page.csv", self.words_per_page.to_csv())?;
        w("lines_per_page.csv", self.lines_per_page.to_csv())?;
        w("page_coverage.csv", self.coverage.to_csv())?;
        w("aspect_ratio.csv", self.aspect_ratio.to_csv())?;
        w("page_format.csv", counts_csv("format", &self.formats))?;
        w("creator.csv", counts_csv("creator", &self.creators))?;
        for (name, grid) in [("vertical", &self.heatmap_vertical), ("horizontal", &self.heatmap_horizontal)] {
            w(&format!("heatmap_{name}.pgm"), grid.to_pgm())?;
            w(&format!("heatmap_{name}.csv"), grid.to_csv())?;
            w(&format!("heatmap_{name}.json"), grid.to_json())?;
        }
        let summary = serde_json::to_string_pretty(&self.summary()).expect("summary serializes");
        w("summary.json", summary + "\n")
    }
}

fn merge_in_order(parts: Vec<CorpusStats>, cfg: &StatsConfig) -> CorpusStats {
    parts.iter().fold(CorpusStats::new(cfg), |mut acc, p| {
        acc.merge(p);
        acc
    })
}

fn counts_csv(header: &str, counts: &BTreeMap<String, u64>) -> String {
    let mut s = format!("{header},count\n");
    for (k, v) in counts {
        let k = if k.contains([',', '"', '\n']) {
            format!("\"{}\"", k.replace('"', "\"\"").replace('\n', " "))
        } else {
            k.clone()
        };
        s.push_str(&format!("{k},{v}\n"));
    }
    s
}

/// Headline fractions reported alongside the histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub documents: u64,
    pub pages: u64,
    pub year_field_coverage: f64,
    pub versions_below_1_7: f64,
    pub microsoft_share: f64,
    pub adobe_share: f64,
    pub abc_series_share: f64,
    pub letter_share: f64,
    pub aspect_within_0_4_to_2: f64,
    pub coverage_within_5_to_40: f64,
}
