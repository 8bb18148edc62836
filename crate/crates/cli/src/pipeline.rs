//! Stage runners with checkpoint and resume.
//!
//! Stages run strictly in order; work inside a stage is spread over the
//! rayon pool (parsing, extraction, language ID) or the polite download
//! pool. A stage that finishes is recorded in the manifest and skipped on
//! the next `run`. Per-language stages also skip languages whose
//! checkpoint file already exists, so an interrupted stage resumes where
//! it stopped.

use std::collections::{BTreeMap, HashSet};
use std::io;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use pdfcorpus_core::cdx::{dedupe_by_url, is_pdf_record, open_cdx, CdxReader, CdxRecord};
use pdfcorpus_core::lang::LangCode;
use pdfcorpus_core::langid::{detect_language, mismatch_filter, MismatchDecision, ProfileSet};
use pdfcorpus_core::layout::{read_pages, write_pages, PageText};
use pdfcorpus_core::par;
use pdfcorpus_core::sampler::{balance, Candidate};
use pdfcorpus_core::stats::{CorpusStats, DocumentFacts};
use pdfcorpus_core::urlfilter::{detect_url_language, judge_domains, registrable_domain};
use pdfcorpus_fetch::pool::run_pool;
use pdfcorpus_fetch::store::{corpus_path, sha256_hex, write_atomic};
use pdfcorpus_fetch::{
    fetch_from_warc, fetch_original, validate_pdf_payload, FetchConfig, FetchResult, HttpRangeReader, LocalRangeReader,
    RangeReader, Source,
};
use pdfcorpus_pdf::extract::extract_tokens_with;
use pdfcorpus_pdf::scan::classify_born_digital_with;
use pdfcorpus_pdf::{parse_document, scan_bytes};
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Manifest, Stage, WorkDir};
use crate::config::{ConfigError, PipelineConfig, SourceMode};
use crate::record::{BadTransition, DocumentRecord, Status, TextSummary};
use crate::route::{route_document, run_ocr, Routing};
use crate::summary::{check_conservation, status_counts, Funnel};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("stage `{0}` has not completed in this work directory")]
    MissingCheckpoint(&'static str),
    #[error("the work directory holds results for different settings; use a fresh directory or --force")]
    ConfigChanged,
    #[error("the work directory was built from other inputs: {0:?}")]
    InputsChanged(Vec<String>),
    #[error("no CDX inputs given")]
    NoInputs,
    #[error(transparent)]
    Transition(#[from] BadTransition),
}

type Result<T, E = PipelineError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LinkCounts {
    pub lines: u64,
    pub malformed: u64,
    pub not_pdf: u64,
    pub duplicates: u64,
    pub kept: u64,
}

/// A PDF link with its grouping attributes, as kept by the spam filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkCandidate {
    pub domain: String,
    pub url_lang: LangCode,
    pub cdx: CdxRecord,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FilterCounts {
    pub found: BTreeMap<LangCode, u64>,
    pub filtered: BTreeMap<LangCode, u64>,
    /// Links whose URL maps to no configured language.
    pub unassigned: u64,
    pub spam_domains: Vec<String>,
    pub spam_urls: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BalanceCounts {
    pub domain_balanced: BTreeMap<LangCode, u64>,
    pub language_balanced: BTreeMap<LangCode, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub funnel: Funnel,
    pub statuses: BTreeMap<Status, u64>,
    /// Download and parse failures over selected documents.
    pub failure_ratio: f64,
    /// Conservation violations; empty when the run is consistent.
    pub problems: Vec<String>,
    pub completed: Vec<Stage>,
}

impl RunReport {
    pub fn exceeds(&self, max_failure_ratio: f64) -> bool {
        self.failure_ratio > max_failure_ratio
    }
}

pub struct Pipeline {
    cfg: PipelineConfig,
    work: WorkDir,
    manifest: Manifest,
    quiet: bool,
}

struct Fetched {
    sha256: String,
    size: u64,
    source: Source,
    truncated: bool,
    path: String,
    at: DateTime<Utc>,
}

fn io_err(e: impl std::fmt::Display) -> io::Error {
    io::Error::other(e.to_string())
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

impl Pipeline {
    /// Opens (or creates) a work directory for `cfg`. With `force`, results
    /// computed under other settings are discarded instead of refused.
    pub fn open(cfg: PipelineConfig, root: impl Into<PathBuf>, force: bool) -> Result<Pipeline> {
        cfg.validate()?;
        let work = WorkDir::new(root);
        std::fs::create_dir_all(work.root())?;
        let fingerprint = cfg.fingerprint();
        let manifest = match work.load_manifest()? {
            Some(m) if m.config_fingerprint == fingerprint => m,
            Some(_) if !force => return Err(PipelineError::ConfigChanged),
            _ => {
                work.clear_from(Stage::ExtractLinks)?;
                let m = Manifest {
                    config_fingerprint: fingerprint,
                    inputs: Vec::new(),
                    completed: Vec::new(),
                };
                work.save_manifest(&m)?;
                m
            }
        };
        Ok(Pipeline {
            cfg,
            work,
            manifest,
            quiet: false,
        })
    }

    pub fn quiet(mut self, quiet: bool) -> Pipeline {
        self.quiet = quiet;
        self
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn work(&self) -> &WorkDir {
        &self.work
    }

    pub fn completed(&self) -> &[Stage] {
        &self.manifest.completed
    }

    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn input_names(inputs: &[PathBuf]) -> Vec<String> {
        inputs.iter().map(|p| p.to_string_lossy().into_owned()).collect()
    }

    /// Runs every stage not yet completed, up to and including `stop_after`.
    pub fn run(&mut self, inputs: &[PathBuf], stop_after: Option<Stage>) -> Result<RunReport> {
        let inputs: Vec<PathBuf> = if inputs.is_empty() {
            self.manifest.inputs.iter().map(PathBuf::from).collect()
        } else {
            if self.manifest.completed.contains(&Stage::ExtractLinks)
                && self.manifest.inputs != Self::input_names(inputs)
            {
                return Err(PipelineError::InputsChanged(self.manifest.inputs.clone()));
            }
            inputs.to_vec()
        };
        for stage in Stage::ALL {
            if self.manifest.completed.contains(&stage) {
                self.note(format!("[{}] already complete", stage.name()));
            } else {
                self.execute(stage, &inputs, false)?;
            }
            if stop_after == Some(stage) {
                break;
            }
        }
        self.report()
    }

    /// Runs one stage from scratch, discarding it and everything after it.
    pub fn run_stage(&mut self, stage: Stage, inputs: &[PathBuf]) -> Result<RunReport> {
        self.execute(stage, inputs, true)?;
        self.report()
    }

    fn execute(&mut self, stage: Stage, inputs: &[PathBuf], fresh: bool) -> Result<()> {
        if let Some(prev) = stage.previous() {
            if !self.manifest.completed.contains(&prev) {
                return Err(PipelineError::MissingCheckpoint(prev.name()));
            }
        }
        let later = Stage::ALL.iter().copied().find(|s| *s > stage);
        if fresh {
            self.work.clear_from(stage)?;
        } else if let Some(next) = later {
            self.work.clear_from(next)?;
        }
        self.manifest.completed.retain(|s| *s < stage);
        if stage == Stage::ExtractLinks {
            if inputs.is_empty() {
                return Err(PipelineError::NoInputs);
            }
            self.manifest.inputs = Self::input_names(inputs);
        }
        self.work.save_manifest(&self.manifest)?;

        self.note(format!("[{}] running", stage.name()));
        match stage {
            Stage::ExtractLinks => self.extract_links(inputs)?,
            Stage::Filter => self.filter()?,
            Stage::Balance => self.balance()?,
            Stage::Download => self.download()?,
            Stage::Scan => self.scan()?,
            Stage::ExtractText => self.extract_text()?,
            Stage::DetectLang => self.detect_lang()?,
            Stage::Stats => self.stats()?,
        }
        self.manifest.completed.push(stage);
        self.work.save_manifest(&self.manifest)?;
        Ok(())
    }

    fn extract_links(&self, inputs: &[PathBuf]) -> Result<()> {
        let mut counts = LinkCounts::default();
        let mut pdfs = Vec::new();
        for path in inputs {
            let reader = open_cdx(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            for item in CdxReader::new(reader) {
                counts.lines += 1;
                match item {
                    Ok(r) if is_pdf_record(&r) => pdfs.push(r),
                    Ok(_) => counts.not_pdf += 1,
                    Err(pdfcorpus_core::cdx::CdxReadError::Io(e)) => return Err(e.into()),
                    Err(e) => {
                        counts.malformed += 1;
                        self.note(format!("  {}: {e}", path.display()));
                    }
                }
            }
        }
        let before = pdfs.len() as u64;
        let links: Vec<CdxRecord> = dedupe_by_url(pdfs).collect();
        counts.kept = links.len() as u64;
        counts.duplicates = before - counts.kept;
        self.work.write_jsonl(&self.work.stage_file(Stage::ExtractLinks, None), &links)?;
        self.work.write_json(&self.work.counts_file(Stage::ExtractLinks), &counts)?;
        self.note(format!(
            "  {} lines, {} PDF links kept, {} duplicates, {} malformed",
            counts.lines, counts.kept, counts.duplicates, counts.malformed
        ));
        Ok(())
    }

    fn filter(&self) -> Result<()> {
        let links: Vec<CdxRecord> = self.work.read_jsonl(&self.work.stage_file(Stage::ExtractLinks, None))?;
        let list = self.cfg.suffix_list()?;
        let map = self.cfg.lang_map();
        let verdicts = judge_domains(&links, &self.cfg.spam, &list);
        let spam: HashSet<&str> = verdicts
            .values()
            .filter(|v| v.is_spam)
            .map(|v| v.domain.as_str())
            .collect();
        let wanted: HashSet<LangCode> = self.cfg.languages.iter().copied().collect();

        let tagged = par::map(&links, |r| (registrable_domain(&r.url, &list), detect_url_language(&r.url, &map)));
        let mut counts = FilterCounts {
            spam_domains: spam.iter().map(|d| d.to_string()).collect(),
            ..FilterCounts::default()
        };
        counts.spam_domains.sort();
        for l in &self.cfg.languages {
            counts.found.insert(*l, 0);
            counts.filtered.insert(*l, 0);
        }
        let mut kept = Vec::new();
        for (cdx, (domain, url_lang)) in links.into_iter().zip(tagged) {
            let is_spam = spam.contains(domain.as_str());
            counts.spam_urls += is_spam as u64;
            if !wanted.contains(&url_lang) {
                counts.unassigned += 1;
                continue;
            }
            *counts.found.entry(url_lang).or_default() += 1;
            if is_spam {
                continue;
            }
            *counts.filtered.entry(url_lang).or_default() += 1;
            kept.push(LinkCandidate { domain, url_lang, cdx });
        }
        self.work.write_jsonl(&self.work.stage_file(Stage::Filter, None), &kept)?;
        self.work.write_json(&self.work.counts_file(Stage::Filter), &counts)?;
        self.note(format!(
            "  {} links kept, {} spam domains, {} links without a configured language",
            kept.len(),
            counts.spam_domains.len(),
            counts.unassigned
        ));
        Ok(())
    }

    fn balance(&self) -> Result<()> {
        let links: Vec<LinkCandidate> = self.work.read_jsonl(&self.work.stage_file(Stage::Filter, None))?;
        let candidates = links
            .into_iter()
            .map(|l| Candidate {
                domain: l.domain,
                lang: l.url_lang,
                item: l.cdx,
            })
            .collect();
        let outcome = balance(candidates, &self.cfg.balance);
        let at = self.cfg.now();
        let mut counts = BalanceCounts::default();
        let mut by_lang: BTreeMap<LangCode, Vec<DocumentRecord>> = BTreeMap::new();
        for c in &outcome.kept {
            by_lang
                .entry(c.lang)
                .or_default()
                .push(DocumentRecord::selected(&c.item, c.domain.clone(), c.lang, at));
        }
        for &lang in &self.cfg.languages {
            let records = by_lang.remove(&lang).unwrap_or_default();
            counts
                .domain_balanced
                .insert(lang, outcome.domain_balanced.get(&lang).copied().unwrap_or(0) as u64);
            counts.language_balanced.insert(lang, records.len() as u64);
            self.work.write_jsonl(&self.work.stage_file(Stage::Balance, Some(lang)), &records)?;
        }
        self.work.write_json(&self.work.counts_file(Stage::Balance), &counts)?;
        self.note(format!("  {} documents selected", outcome.kept.len()));
        Ok(())
    }

    /// Applies `f` to each language's records from the previous stage,
    /// skipping languages that already have a checkpoint.
    fn per_language<F>(&self, stage: Stage, f: F) -> Result<()>
    where
        F: Fn(LangCode, Vec<DocumentRecord>) -> Result<Vec<DocumentRecord>>,
    {
        let prev = stage.previous().expect("per-language stages follow another");
        for &lang in &self.cfg.languages {
            let out = self.work.stage_file(stage, Some(lang));
            if out.exists() {
                self.note(format!("  {lang}: checkpoint found"));
                continue;
            }
            let input: Vec<DocumentRecord> = self.work.read_jsonl(&self.work.stage_file(prev, Some(lang)))?;
            let n = input.len();
            let result = f(lang, input)?;
            self.work.write_jsonl(&out, &result)?;
            if n > 0 {
                self.note(format!("  {lang}: {n} documents"));
            }
        }
        Ok(())
    }

    fn range_reader(&self, fc: &FetchConfig) -> Box<dyn RangeReader> {
        let base = &self.cfg.fetch.warc_base;
        if base.starts_with("http://") || base.starts_with("https://") {
            Box::new(HttpRangeReader::new(base, fc))
        } else {
            Box::new(LocalRangeReader::new(base))
        }
    }

    fn fetch_one(
        &self,
        r: &DocumentRecord,
        lang: LangCode,
        fc: &FetchConfig,
        reader: Option<&dyn RangeReader>,
    ) -> io::Result<Result<Fetched, String>> {
        let checked = |res: Result<FetchResult, pdfcorpus_fetch::FetchError>| -> Result<FetchResult, String> {
            let f = res.map_err(|e| e.to_string())?;
            validate_pdf_payload(&f.bytes, f.truncated).map_err(|e| format!("not a PDF payload: {e}"))?;
            Ok(f)
        };
        let origin = || checked(fetch_original(&r.url, fc));
        let archive = || match reader {
            Some(rd) => checked(fetch_from_warc(rd, &r.archive.filename, r.archive.offset, r.archive.length, fc)),
            None => Err("no archive reader".to_string()),
        };
        let got = match self.cfg.fetch.source {
            SourceMode::Origin => origin(),
            SourceMode::Warc => archive(),
            SourceMode::OriginThenWarc => {
                origin().or_else(|e1| archive().map_err(|e2| format!("origin: {e1}; archive: {e2}")))
            }
        };
        let f = match got {
            Ok(f) => f,
            Err(e) => return Ok(Err(e)),
        };
        let rel = corpus_path(Path::new(""), lang.as_str(), &r.url);
        write_atomic(&self.work.root().join(&rel), &f.bytes)?;
        Ok(Ok(Fetched {
            sha256: sha256_hex(&f.bytes),
            size: f.bytes.len() as u64,
            source: f.source,
            truncated: f.truncated,
            path: rel.to_string_lossy().replace('\\', "/"),
            at: f.fetched_at,
        }))
    }

    fn download(&self) -> Result<()> {
        let fc = self.cfg.fetch_config();
        let reader = match self.cfg.fetch.source {
            SourceMode::Origin => None,
            _ => Some(self.range_reader(&fc)),
        };
        self.per_language(Stage::Download, |lang, records| {
            let at = self.cfg.now();
            let jobs = records.into_iter().map(|r| (r.domain.clone(), r)).collect();
            let results = run_pool(jobs, self.cfg.fetch.pool(), |r| {
                self.fetch_one(r, lang, &fc, reader.as_deref())
            });
            let mut out = Vec::with_capacity(results.len());
            for (mut r, res) in results {
                match res? {
                    Ok(f) => {
                        r.sha256 = Some(f.sha256);
                        r.size = Some(f.size);
                        r.source = Some(f.source);
                        r.truncated = f.truncated;
                        r.path = Some(f.path);
                        r.advance(Status::Downloaded, f.at)?;
                    }
                    Err(e) => r.fail(Status::DownloadFailed, e, at)?,
                }
                out.push(r);
            }
            Ok(out)
        })
    }

    fn payload(&self, r: &DocumentRecord) -> io::Result<Vec<u8>> {
        let rel = r.path.as_deref().ok_or_else(|| io_err(format!("{}: no payload path", r.url)))?;
        let p = self.work.join(rel);
        std::fs::read(&p).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display())))
    }

    fn scan_one(&self, r: &DocumentRecord, at: DateTime<Utc>) -> Result<DocumentRecord> {
        let mut r = r.clone();
        if r.status != Status::Downloaded {
            return Ok(r);
        }
        let bytes = self.payload(&r)?;
        match catch_unwind(AssertUnwindSafe(|| scan_bytes(&bytes))) {
            Ok(Ok(report)) => {
                let born = classify_born_digital_with(&report, &self.cfg.born_digital);
                r.scan = Some(report);
                r.advance(Status::Parsed, at)?;
                if born {
                    r.advance(Status::BornDigital, at)?;
                }
                r.route = Some(route_document(&r, &self.cfg.ocr).route());
            }
            Ok(Err(e)) => r.fail(Status::ParseFailed, e.to_string(), at)?,
            Err(p) => r.fail(Status::ParseFailed, format!("parser panicked: {}", panic_message(p)), at)?,
        }
        Ok(r)
    }

    fn scan(&self) -> Result<()> {
        self.per_language(Stage::Scan, |_, records| {
            let at = self.cfg.now();
            par::map(&records, |r| self.scan_one(r, at)).into_iter().collect()
        })
    }

    fn stem(r: &DocumentRecord) -> String {
        r.path
            .as_deref()
            .and_then(|p| Path::new(p).file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| sha256_hex(r.url.as_bytes()))
    }

    fn store_text(&self, lang: LangCode, r: &DocumentRecord, pages: &[PageText]) -> io::Result<TextSummary> {
        let rel = format!("text/{lang}/{}.jsonl", Self::stem(r));
        let mut buf = Vec::new();
        write_pages(&mut buf, pages)?;
        write_atomic(&self.work.join(&rel), &buf)?;
        Ok(TextSummary {
            path: rel,
            pages: pages.len(),
            words: pages.iter().map(|p| p.word_count()).sum(),
            lines: pages.iter().map(|p| p.line_count).sum(),
            chars: pages
                .iter()
                .flat_map(|p| &p.tokens)
                .map(|t| t.text.chars().count())
                .sum(),
        })
    }

    fn text_one(&self, lang: LangCode, r: &DocumentRecord, at: DateTime<Utc>) -> Result<DocumentRecord> {
        let mut r = r.clone();
        if !matches!(r.status, Status::BornDigital | Status::Parsed) {
            return Ok(r);
        }
        match route_document(&r, &self.cfg.ocr) {
            Routing::NativeExtraction => {
                let bytes = self.payload(&r)?;
                let extracted = catch_unwind(AssertUnwindSafe(|| {
                    parse_document(&bytes).map(|doc| extract_tokens_with(&doc, &self.cfg.extract).0)
                }));
                match extracted {
                    Ok(Ok(pages)) => r.text = Some(self.store_text(lang, &r, &pages)?),
                    Ok(Err(e)) => r.fail(Status::NoText, e.to_string(), at)?,
                    Err(p) => r.fail(Status::NoText, format!("extractor panicked: {}", panic_message(p)), at)?,
                }
            }
            Routing::ExternalOcr { lang: engine_lang } => {
                let input = self.work.join(r.path.as_deref().unwrap_or_default());
                let output = self.work.join(&format!("ocr/{lang}/{}", Self::stem(&r)));
                let sizes = r.scan.as_ref().map(|s| s.page_sizes.clone()).unwrap_or_default();
                match run_ocr(&self.cfg.ocr, &input, &engine_lang, &output, &sizes) {
                    Ok(pages) => r.text = Some(self.store_text(lang, &r, &pages)?),
                    Err(e) => r.fail(Status::NeedsOcr, e.to_string(), at)?,
                }
            }
        }
        Ok(r)
    }

    fn extract_text(&self) -> Result<()> {
        self.per_language(Stage::ExtractText, |lang, records| {
            let at = self.cfg.now();
            par::map(&records, |r| self.text_one(lang, r, at)).into_iter().collect()
        })
    }

    fn read_text(&self, summary: &TextSummary) -> io::Result<Vec<PageText>> {
        let p = self.work.join(&summary.path);
        let f = std::fs::File::open(&p).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display())))?;
        read_pages(io::BufReader::new(f))
    }

    fn lang_one(&self, r: &DocumentRecord, profiles: &ProfileSet, at: DateTime<Utc>) -> Result<DocumentRecord> {
        let mut r = r.clone();
        let Some(summary) = r.text.as_ref().filter(|_| matches!(r.status, Status::BornDigital | Status::Parsed)) else {
            return Ok(r);
        };
        let pages = self.read_text(summary)?;
        let text = pages.iter().map(PageText::text).collect::<Vec<_>>().join("\n");
        let verdict = detect_language(&text, profiles, &self.cfg.langid);
        r.content_lang = Some(verdict.lang);
        r.content_confidence = Some(verdict.confidence);
        r.multi_language_suspected = verdict.multi_language_suspected;
        if verdict.lang == LangCode::Unknown {
            r.advance(Status::NoText, at)?;
        } else if mismatch_filter(r.url_lang, &verdict, self.cfg.langid.confidence_threshold)
            == MismatchDecision::DropMismatch
        {
            r.advance(Status::LangMismatchDropped, at)?;
        } else {
            r.advance(Status::Indexed, at)?;
        }
        Ok(r)
    }

    fn detect_lang(&self) -> Result<()> {
        let pending = self
            .cfg
            .languages
            .iter()
            .any(|l| !self.work.stage_file(Stage::DetectLang, Some(*l)).exists());
        // training is skipped when every language resumes from a checkpoint
        let profiles = if pending { Some(self.cfg.profiles()?) } else { None };
        self.per_language(Stage::DetectLang, |_, records| {
            let at = self.cfg.now();
            let profiles = profiles.as_ref().expect("trained when a language is pending");
            par::map(&records, |r| self.lang_one(r, profiles, at)).into_iter().collect()
        })?;
        let records = self.stage_records(Stage::DetectLang)?;
        let index: Vec<&DocumentRecord> = records.iter().filter(|r| r.status == Status::Indexed).collect();
        self.work.write_jsonl(&self.work.records_file(), &records)?;
        self.work.write_jsonl(&self.work.index_file(), &index)?;
        self.note(format!("  {} of {} documents indexed", index.len(), records.len()));
        Ok(())
    }

    fn facts(&self, r: &DocumentRecord) -> io::Result<DocumentFacts> {
        let pages = match &r.text {
            Some(t) => self.read_text(t)?,
            None => Vec::new(),
        };
        let scan = r.scan.as_ref();
        Ok(DocumentFacts {
            creation_year: scan.and_then(|s| s.creation_year),
            pdf_version: scan.map(|s| s.version.clone()),
            creator: scan.map(|s| s.creator_vendor.clone()),
            pages,
        })
    }

    fn stats(&self) -> Result<()> {
        let index: Vec<DocumentRecord> = self.work.read_jsonl(&self.work.index_file())?;
        let mut total = CorpusStats::new(&self.cfg.stats);
        // bounded batches keep the page tokens of only a few documents in memory
        for batch in index.chunks(256) {
            let facts = par::map(batch, |r| self.facts(r))
                .into_iter()
                .collect::<io::Result<Vec<_>>>()?;
            total.merge(&CorpusStats::collect(&facts, &self.cfg.stats));
        }
        total.write_outputs(&self.work.join("stats"))?;
        self.note(format!("  statistics over {} documents, {} pages", total.documents, total.pages));
        Ok(())
    }

    /// All records of a per-language stage, in configured language order.
    pub fn stage_records(&self, stage: Stage) -> io::Result<Vec<DocumentRecord>> {
        let mut out = Vec::new();
        for &lang in &self.cfg.languages {
            out.extend(self.work.read_jsonl::<DocumentRecord>(&self.work.stage_file(stage, Some(lang)))?);
        }
        Ok(out)
    }

    /// Records from the most advanced completed per-language stage.
    pub fn latest_records(&self) -> io::Result<Vec<DocumentRecord>> {
        let last = Stage::ALL
            .iter()
            .rev()
            .copied()
            .filter(|s| s.per_language())
            .find(|s| self.manifest.completed.contains(s));
        match last {
            Some(s) => self.stage_records(s),
            None => Ok(Vec::new()),
        }
    }

    pub fn funnel(&self) -> io::Result<Funnel> {
        let mut funnel = Funnel::default();
        for &l in &self.cfg.languages {
            funnel.rows.insert(l, Default::default());
        }
        let fc = self.work.counts_file(Stage::Filter);
        if fc.exists() {
            let c: FilterCounts = self.work.read_json(&fc)?;
            for (l, row) in funnel.rows.iter_mut() {
                row.found = c.found.get(l).copied().unwrap_or(0);
                row.filtered = c.filtered.get(l).copied().unwrap_or(0);
            }
        }
        let bc = self.work.counts_file(Stage::Balance);
        if bc.exists() {
            let c: BalanceCounts = self.work.read_json(&bc)?;
            for (l, row) in funnel.rows.iter_mut() {
                row.domain_balanced = c.domain_balanced.get(l).copied().unwrap_or(0);
                row.language_balanced = c.language_balanced.get(l).copied().unwrap_or(0);
            }
        }
        funnel.absorb_records(&self.latest_records()?);
        Ok(funnel)
    }

    /// Tallies the current state and writes `summary.txt`.
    pub fn report(&self) -> Result<RunReport> {
        let funnel = self.funnel()?;
        let records = self.latest_records()?;
        let statuses = status_counts(&records);
        let failures = records.iter().filter(|r| r.status.is_failure()).count();
        let failure_ratio = if records.is_empty() {
            0.0
        } else {
            failures as f64 / records.len() as f64
        };
        let problems = if self.manifest.completed.contains(&Stage::DetectLang) {
            let selected: Vec<String> = self.stage_records(Stage::Balance)?.into_iter().map(|r| r.url).collect();
            check_conservation(&selected, &records, &funnel)
        } else {
            Vec::new()
        };
        let mut text = funnel.render();
        for (s, n) in &statuses {
            text.push_str(&format!("{:<22} {n}\n", s.as_str()));
        }
        write_atomic(&self.work.join("summary.txt"), text.as_bytes())?;
        Ok(RunReport {
            funnel,
            statuses,
            failure_ratio,
            problems,
            completed: self.manifest.completed.clone(),
        })
    }
}
