//! Character n-gram language identification.
//!
//! Each language is a profile of additively smoothed log-probabilities for
//! character unigrams, bigrams and trigrams over normalized text. A text is
//! scored against every profile by its mean per-character log-likelihood
//! (the sum of the 1-, 2- and 3-gram log-probabilities ending at each
//! character, divided by the number of characters), so scores do not grow
//! with text length.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::lang::LangCode;

pub const PROFILE_FORMAT_VERSION: u32 = 1;
pub const MAX_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LangIdConfig {
    /// Additive smoothing constant.
    pub smoothing: f64,
    /// Chunk size, in bytes, for the multi-language check.
    pub chunk_bytes: usize,
    /// Minimum confidence for the mismatch filter to drop a document.
    pub confidence_threshold: f64,
    /// Texts with fewer alphabetic characters are `Unknown`.
    pub min_alphabetic: usize,
    /// Multiplier applied to scores before the softmax.
    pub softmax_scale: f64,
    pub min_training_chars: usize,
}

impl Default for LangIdConfig {
    fn default() -> Self {
        LangIdConfig {
            smoothing: 0.5,
            chunk_bytes: 1024,
            confidence_threshold: 0.8,
            min_alphabetic: 20,
            softmax_scale: 10.0,
            min_training_chars: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LangIdError {
    #[error("training text for `{lang}` has {chars} characters, need at least {min}")]
    UndersizedCorpus { lang: LangCode, chars: usize, min: usize },
    #[error("`{0}` is not a corpus language")]
    NotACorpusLanguage(LangCode),
    #[error("profile bundle version {found}, expected {expected}")]
    BundleVersion { found: u32, expected: u32 },
    #[error("profile bundle lacks a profile for `{0}`")]
    MissingProfile(LangCode),
}

/// Lowercases, replaces everything that is not a letter or combining mark
/// with a space, collapses runs of spaces and pads both ends with one
/// space so word boundaries show up in the n-grams.
pub fn normalize_text(text: &str) -> Vec<char> {
    let mut out = vec![' '];
    for c in text.chars().flat_map(char::to_lowercase) {
        let keep = c.is_alphabetic() || is_mark(c);
        let c = if keep { c } else { ' ' };
        if c == ' ' && out.last() == Some(&' ') {
            continue;
        }
        out.push(c);
    }
    if out.last() != Some(&' ') {
        out.push(' ');
    }
    out
}

fn is_mark(c: char) -> bool {
    // combining diacritics, Arabic harakat, Japanese voicing marks
    matches!(c as u32, 0x0300..=0x036F | 0x064B..=0x065F | 0x0670 | 0x3099..=0x309C)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramTable {
    pub n: usize,
    pub log_probs: BTreeMap<String, f64>,
    /// Log-probability mass reserved for any unseen n-gram.
    pub unseen: f64,
}

impl NgramTable {
    fn log_prob(&self, gram: &str) -> f64 {
        self.log_probs.get(gram).copied().unwrap_or(self.unseen)
    }

    /// ln(Σ exp(log p)) over seen n-grams plus the unseen bucket.
    pub fn log_total_mass(&self) -> f64 {
        let max = self
            .log_probs
            .values()
            .copied()
            .fold(self.unseen, f64::max);
        let sum: f64 = self
            .log_probs
            .values()
            .map(|lp| (lp - max).exp())
            .sum::<f64>()
            + (self.unseen - max).exp();
        max + sum.ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageProfile {
    pub lang: LangCode,
    pub trained_on: String,
    /// Tables for n = 1, 2, 3 in that order.
    pub orders: Vec<NgramTable>,
}

pub fn train_profile(
    text: &str,
    lang: LangCode,
    trained_on: &str,
    cfg: &LangIdConfig,
) -> Result<LanguageProfile, LangIdError> {
    if !lang.is_corpus_language() {
        return Err(LangIdError::NotACorpusLanguage(lang));
    }
    let chars = text.chars().count();
    if chars < cfg.min_training_chars {
        return Err(LangIdError::UndersizedCorpus {
            lang,
            chars,
            min: cfg.min_training_chars,
        });
    }
    let norm = normalize_text(text);
    let k = cfg.smoothing;
    let orders = (1..=MAX_ORDER)
        .map(|n| {
            let mut counts: BTreeMap<String, u64> = BTreeMap::new();
            for w in norm.windows(n) {
                *counts.entry(w.iter().collect()).or_default() += 1;
            }
            let total: u64 = counts.values().sum();
            let denom = total as f64 + k * (counts.len() as f64 + 1.0);
            NgramTable {
                n,
                unseen: (k / denom).ln(),
                log_probs: counts
                    .into_iter()
                    .map(|(g, c)| (g, ((c as f64 + k) / denom).ln()))
                    .collect(),
            }
        })
        .collect();
    Ok(LanguageProfile {
        lang,
        trained_on: trained_on.to_string(),
        orders,
    })
}

impl LanguageProfile {
    /// Mean per-character log-likelihood of already-normalized text.
    pub fn score_normalized(&self, chars: &[char]) -> f64 {
        if chars.is_empty() {
            return f64::NEG_INFINITY;
        }
        let mut buf = String::new();
        let mut total = 0.0;
        for i in 0..chars.len() {
            for table in &self.orders {
                let n = table.n;
                if i + 1 < n {
                    continue;
                }
                buf.clear();
                buf.extend(&chars[i + 1 - n..=i]);
                total += table.log_prob(&buf);
            }
        }
        total / chars.len() as f64
    }

    pub fn score(&self, text: &str) -> f64 {
        self.score_normalized(&normalize_text(text))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSet {
    pub version: u32,
    pub profiles: Vec<LanguageProfile>,
}

const BUNDLED_TRAINING: [(LangCode, &str); 11] = [
    (LangCode::Ar, include_str!("../data/langid/train/ar.txt")),
    (LangCode::De, include_str!("../data/langid/train/de.txt")),
    (LangCode::En, include_str!("../data/langid/train/en.txt")),
    (LangCode::Es, include_str!("../data/langid/train/es.txt")),
    (LangCode::Fr, include_str!("../data/langid/train/fr.txt")),
    (LangCode::It, include_str!("../data/langid/train/it.txt")),
    (LangCode::Ja, include_str!("../data/langid/train/ja.txt")),
    (LangCode::Nl, include_str!("../data/langid/train/nl.txt")),
    (LangCode::Pl, include_str!("../data/langid/train/pl.txt")),
    (LangCode::Pt, include_str!("../data/langid/train/pt.txt")),
    (LangCode::Ru, include_str!("../data/langid/train/ru.txt")),
];

/// Training text shipped with the crate for `lang`.
pub fn bundled_training_text(lang: LangCode) -> Option<&'static str> {
    BUNDLED_TRAINING
        .iter()
        .find(|(l, _)| *l == lang)
        .map(|(_, t)| *t)
}

impl ProfileSet {
    /// Trains all eleven profiles from the bundled text.
    pub fn train_bundled(cfg: &LangIdConfig) -> Result<ProfileSet, LangIdError> {
        let profiles = crate::par::map(&BUNDLED_TRAINING, |(lang, text)| {
            train_profile(text, *lang, &format!("bundled:{lang}"), cfg)
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        Ok(ProfileSet {
            version: PROFILE_FORMAT_VERSION,
            profiles,
        })
    }

    pub fn languages(&self) -> Vec<LangCode> {
        self.profiles.iter().map(|p| p.lang).collect()
    }

    /// Checks the bundle version and that every language in `required` has
    /// a profile.
    pub fn validate(&self, required: &[LangCode]) -> Result<(), LangIdError> {
        if self.version != PROFILE_FORMAT_VERSION {
            return Err(LangIdError::BundleVersion {
                found: self.version,
                expected: PROFILE_FORMAT_VERSION,
            });
        }
        for l in required {
            if !self.profiles.iter().any(|p| p.lang == *l) {
                return Err(LangIdError::MissingProfile(*l));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("profiles serialize")
    }

    pub fn from_json(s: &str) -> Result<ProfileSet, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn load(path: &Path) -> io::Result<ProfileSet> {
        let s = std::fs::read_to_string(path)?;
        ProfileSet::from_json(&s).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_json())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangVerdict {
    pub lang: LangCode,
    pub confidence: f64,
    pub multi_language_suspected: bool,
}

impl LangVerdict {
    pub fn unknown() -> LangVerdict {
        LangVerdict {
            lang: LangCode::Unknown,
            confidence: 0.0,
            multi_language_suspected: false,
        }
    }
}

/// Scores of `text` against every profile, in profile order.
pub fn score_all(text: &str, profiles: &ProfileSet) -> Vec<(LangCode, f64)> {
    let norm = normalize_text(text);
    profiles
        .profiles
        .iter()
        .map(|p| (p.lang, p.score_normalized(&norm)))
        .collect()
}

/// Argmax language and its softmax confidence.
fn best_of(scores: &[(LangCode, f64)], scale: f64) -> (LangCode, f64) {
    let mut best = (LangCode::Unknown, f64::NEG_INFINITY);
    for &(l, s) in scores {
        if s > best.1 || (s == best.1 && l < best.0) {
            best = (l, s);
        }
    }
    if !best.1.is_finite() {
        return (LangCode::Unknown, 0.0);
    }
    let denom: f64 = scores.iter().map(|(_, s)| (scale * (s - best.1)).exp()).sum();
    (best.0, 1.0 / denom)
}

fn alphabetic_count(text: &str) -> usize {
    text.chars().filter(|c| c.is_alphabetic()).count()
}

/// Splits on character boundaries into pieces of roughly `size` bytes,
/// preferring to cut at whitespace.
fn chunks(text: &str, size: usize) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while rest.len() > size {
        let mut cut = size;
        while !rest.is_char_boundary(cut) {
            cut -= 1;
        }
        if let Some(ws) = rest[..cut].rfind(char::is_whitespace) {
            if ws > size / 2 {
                cut = ws;
            }
        }
        if cut == 0 {
            cut = rest.chars().next().map_or(rest.len(), char::len_utf8);
        }
        out.push(&rest[..cut]);
        rest = &rest[cut..];
    }
    if !rest.is_empty() {
        out.push(rest);
    }
    out
}

/// Identifies the language of `text`.
///
/// Texts longer than one chunk are also classified chunk by chunk; when the
/// chunks disagree the verdict carries the majority chunk language and
/// `multi_language_suspected` is set.
pub fn detect_language(text: &str, profiles: &ProfileSet, cfg: &LangIdConfig) -> LangVerdict {
    if alphabetic_count(text) < cfg.min_alphabetic || profiles.profiles.is_empty() {
        return LangVerdict::unknown();
    }
    let scores = score_all(text, profiles);
    let (whole_lang, _) = best_of(&scores, cfg.softmax_scale);

    let pieces = chunks(text, cfg.chunk_bytes);
    let mut votes: BTreeMap<LangCode, usize> = BTreeMap::new();
    if pieces.len() > 1 {
        for piece in pieces {
            if alphabetic_count(piece) < cfg.min_alphabetic {
                continue;
            }
            let (l, _) = best_of(&score_all(piece, profiles), cfg.softmax_scale);
            *votes.entry(l).or_default() += 1;
        }
    }
    let multi = votes.len() > 1;
    let lang = if multi {
        let top = votes.values().copied().max().unwrap_or(0);
        if votes.get(&whole_lang) == Some(&top) {
            whole_lang
        } else {
            votes
                .iter()
                .find(|(_, c)| **c == top)
                .map(|(l, _)| *l)
                .unwrap_or(whole_lang)
        }
    } else {
        whole_lang
    };
    let confidence = {
        let target = scores.iter().find(|(l, _)| *l == lang).map(|(_, s)| *s);
        match target {
            Some(t) => {
                let denom: f64 = scores
                    .iter()
                    .map(|(_, s)| (cfg.softmax_scale * (s - t)).exp())
                    .sum();
                1.0 / denom
            }
            None => 0.0,
        }
    };
    LangVerdict {
        lang,
        confidence,
        multi_language_suspected: multi,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MismatchDecision {
    Keep,
    DropMismatch,
}

/// Drops a document when a confident content verdict contradicts the
/// language its URL (and hence its OCR model) was assigned.
pub fn mismatch_filter(url_lang: LangCode, verdict: &LangVerdict, threshold: f64) -> MismatchDecision {
    if url_lang != verdict.lang && verdict.lang != LangCode::Unknown && verdict.confidence >= threshold {
        MismatchDecision::DropMismatch
    } else {
        MismatchDecision::Keep
    }
}
