//! Pipeline configuration: file formats, defaults and validation.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{DateTime, Utc};
use pdfcorpus_core::lang::LangCode;
use pdfcorpus_core::langid::{LangIdConfig, ProfileSet};
use pdfcorpus_core::sampler::BalanceConfig;
use pdfcorpus_core::stats::StatsConfig;
use pdfcorpus_core::suffix::SuffixList;
use pdfcorpus_core::urlfilter::{LangMap, SpamConfig};
use pdfcorpus_fetch::pool::PoolConfig;
use pdfcorpus_fetch::FetchConfig;
use pdfcorpus_pdf::scan::BornDigitalThresholds;
use pdfcorpus_pdf::ExtractConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SourceMode {
    /// The URL as it is today.
    Origin,
    /// The archived capture named by the CDX record.
    Warc,
    /// The origin first, the archive when that fails.
    OriginThenWarc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FetchSettings {
    pub source: SourceMode,
    /// Base URL or local directory holding the WARC files.
    pub warc_base: String,
    pub concurrency: usize,
    /// Seconds between two requests to the same registrable domain.
    pub per_domain_interval: f64,
    pub http: FetchConfig,
}

impl Default for FetchSettings {
    fn default() -> Self {
        FetchSettings {
            source: SourceMode::OriginThenWarc,
            warc_base: "https://data.commoncrawl.org/".into(),
            concurrency: 8,
            per_domain_interval: 1.0,
            http: FetchConfig::default(),
        }
    }
}

impl FetchSettings {
    pub fn pool(&self) -> PoolConfig {
        PoolConfig {
            concurrency: self.concurrency,
            per_domain_interval: Duration::from_secs_f64(self.per_domain_interval.max(0.0)),
        }
    }
}

/// External OCR engine, run as `command` with `{input}`, `{lang}` and
/// `{output}` substituted. The engine must leave hOCR at `{output}` or
/// `{output}.hocr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OcrSettings {
    pub command: Option<String>,
    /// Engine language names; languages missing here are passed as-is.
    pub lang_names: BTreeMap<LangCode, String>,
    /// Passed as `{lang}` when the URL gave no language, asking the engine
    /// to detect it.
    pub auto_lang: String,
}

impl Default for OcrSettings {
    fn default() -> Self {
        let names = [
            (LangCode::Ar, "ara"),
            (LangCode::De, "deu"),
            (LangCode::En, "eng"),
            (LangCode::Es, "spa"),
            (LangCode::Fr, "fra"),
            (LangCode::It, "ita"),
            (LangCode::Ja, "jpn"),
            (LangCode::Nl, "nld"),
            (LangCode::Pl, "pol"),
            (LangCode::Pt, "por"),
            (LangCode::Ru, "rus"),
        ];
        OcrSettings {
            command: None,
            lang_names: names.iter().map(|(l, n)| (*l, n.to_string())).collect(),
            auto_lang: "osd".into(),
        }
    }
}

impl OcrSettings {
    pub fn engine_lang(&self, lang: LangCode) -> String {
        if !lang.is_corpus_language() {
            return self.auto_lang.clone();
        }
        self.lang_names
            .get(&lang)
            .cloned()
            .unwrap_or_else(|| lang.as_str().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub languages: Vec<LangCode>,
    pub balance: BalanceConfig,
    pub spam: SpamConfig,
    /// Extra TLD → language entries on top of the built-in table.
    pub url_languages: HashMap<String, LangCode>,
    /// Public suffix list file; the bundled snapshot when absent.
    pub suffix_list: Option<PathBuf>,
    pub fetch: FetchSettings,
    pub born_digital: BornDigitalThresholds,
    pub extract: ExtractConfig,
    pub langid: LangIdConfig,
    /// Saved profile bundle; profiles are trained from bundled text when absent.
    pub profiles: Option<PathBuf>,
    pub ocr: OcrSettings,
    pub stats: StatsConfig,
    /// Exit status 2 when download and parse failures exceed this share of
    /// the selected documents.
    pub max_failure_ratio: f64,
    /// Stamp every record with this instant instead of the wall clock.
    pub fixed_time: Option<DateTime<Utc>>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            languages: LangCode::CORPUS.to_vec(),
            balance: BalanceConfig::default(),
            spam: SpamConfig::default(),
            url_languages: HashMap::new(),
            suffix_list: None,
            fetch: FetchSettings::default(),
            born_digital: BornDigitalThresholds::default(),
            extract: ExtractConfig::default(),
            langid: LangIdConfig::default(),
            profiles: None,
            ocr: OcrSettings::default(),
            stats: StatsConfig::default(),
            max_failure_ratio: 0.25,
            fixed_time: None,
        }
    }
}

impl PipelineConfig {
    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<PipelineConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|reason| ConfigError::Parse {
            path: path.to_path_buf(),
            reason,
        })
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.fixed_time.unwrap_or_else(Utc::now)
    }

    pub fn fetch_config(&self) -> FetchConfig {
        let mut c = self.fetch.http.clone();
        if self.fixed_time.is_some() {
            c.fixed_time = self.fixed_time;
        }
        c
    }

    pub fn lang_map(&self) -> LangMap {
        LangMap::with_overrides(&self.url_languages)
    }

    pub fn suffix_list(&self) -> Result<SuffixList, ConfigError> {
        match &self.suffix_list {
            None => Ok(SuffixList::bundled().clone()),
            Some(p) => std::fs::read_to_string(p)
                .map(|t| SuffixList::parse(&t))
                .map_err(|source| ConfigError::Read { path: p.clone(), source }),
        }
    }

    /// Checks value ranges that serde cannot.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.languages.is_empty() {
            return bad("no languages configured".into());
        }
        if let Some(l) = self.languages.iter().find(|l| !l.is_corpus_language()) {
            return bad(format!("`{l}` is not a corpus language"));
        }
        if self.balance.max_per_language == 0 {
            return bad("max_per_language must be positive".into());
        }
        if self.balance.domain_caps.default == 0 || self.balance.domain_caps.overrides.values().any(|&c| c == 0) {
            return bad("domain caps must be positive".into());
        }
        if !(self.spam.ratio_threshold > 0.0 && self.spam.ratio_threshold <= 1.0) {
            return bad(format!("spam ratio threshold {} outside (0, 1]", self.spam.ratio_threshold));
        }
        if self.fetch.concurrency == 0 {
            return bad("concurrency must be at least 1".into());
        }
        if !self.fetch.per_domain_interval.is_finite() || self.fetch.per_domain_interval < 0.0 {
            return bad("per_domain_interval must be a non-negative number".into());
        }
        if !(0.0..=1.0).contains(&self.max_failure_ratio) {
            return bad("max_failure_ratio must lie in [0, 1]".into());
        }
        if !(self.langid.confidence_threshold > 0.0 && self.langid.confidence_threshold <= 1.0) {
            return bad("langid confidence threshold outside (0, 1]".into());
        }
        if let Some(cmd) = &self.ocr.command {
            for slot in ["{input}", "{output}"] {
                if !cmd.contains(slot) {
                    return bad(format!("ocr command lacks {slot}"));
                }
            }
        }
        if self.stats.min_year > self.stats.max_year {
            return bad("stats year range is empty".into());
        }
        Ok(())
    }

    /// Loads or trains the language profiles and checks that every
    /// configured language has one.
    pub fn profiles(&self) -> Result<ProfileSet, ConfigError> {
        let set = match &self.profiles {
            Some(p) => ProfileSet::load(p).map_err(|source| ConfigError::Read { path: p.clone(), source })?,
            None => ProfileSet::train_bundled(&self.langid).map_err(|e| ConfigError::Invalid(e.to_string()))?,
        };
        set.validate(&self.languages)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(set)
    }

    /// Stable digest of the settings that influence stage outputs.
    /// Concurrency, timeouts, retries and the OCR command may change
    /// between resumed runs.
    pub fn fingerprint(&self) -> String {
        let mut c = self.clone();
        let defaults = FetchSettings::default();
        c.fetch.concurrency = defaults.concurrency;
        c.fetch.per_domain_interval = defaults.per_domain_interval;
        c.fetch.http.timeout = defaults.http.timeout;
        c.fetch.http.max_retries = defaults.http.max_retries;
        c.fetch.http.backoff = defaults.http.backoff;
        c.fetch.http.user_agent = defaults.http.user_agent;
        c.ocr.command = None;
        // through Value so that hash-map fields serialize in sorted order
        let value = serde_json::to_value(&c).expect("config serializes");
        pdfcorpus_fetch::store::sha256_hex(value.to_string().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = PipelineConfig::default();
        c.validate().unwrap();
        assert_eq!(c.languages.len(), 11);
        assert_eq!(c.balance.max_per_language, 200_000);
    }

    #[test]
    fn toml_and_json_agree() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("c.toml");
        std::fs::write(
            &t,
            "languages = [\"pl\", \"de\"]\nmax_failure_ratio = 0.5\n[balance]\nseed = 7\n[fetch]\nsource = \"warc\"\nconcurrency = 2\n[fetch.http]\ntimeout = 5\n",
        )
        .unwrap();
        let j = dir.path().join("c.json");
        std::fs::write(
            &j,
            r#"{"languages":["pl","de"],"max_failure_ratio":0.5,"balance":{"seed":7},"fetch":{"source":"warc","concurrency":2,"http":{"timeout":5}}}"#,
        )
        .unwrap();
        let a = PipelineConfig::load(&t).unwrap();
        let b = PipelineConfig::load(&j).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.balance.seed, 7);
        assert_eq!(a.balance.max_per_language, 200_000);
        assert_eq!(a.fetch.source, SourceMode::Warc);
        assert_eq!(a.fetch.http.timeout, Duration::from_secs(5));
        assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn rejects_bad_values() {
        let c = PipelineConfig {
            languages: vec![LangCode::Unknown],
            ..PipelineConfig::default()
        };
        assert!(c.validate().is_err());
        let mut c = PipelineConfig::default();
        c.ocr.command = Some("tesseract {input}".into());
        assert!(c.validate().is_err());
        let mut c = PipelineConfig::default();
        c.fetch.concurrency = 0;
        assert!(c.validate().is_err());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.toml");
        std::fs::write(&p, "languages = 3").unwrap();
        assert!(matches!(PipelineConfig::load(&p), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn fingerprint_tracks_settings() {
        let a = PipelineConfig::default();
        let mut b = a.clone();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.fetch.concurrency = 1;
        b.fetch.http.max_retries = 9;
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.balance.seed = 1;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn engine_language_names() {
        let o = OcrSettings::default();
        assert_eq!(o.engine_lang(LangCode::Pl), "pol");
        assert_eq!(o.engine_lang(LangCode::Unknown), "osd");
    }
}
