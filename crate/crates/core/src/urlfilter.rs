//! URL-level language guessing and spam-domain detection.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use url::{Host, Url};

use crate::cdx::CdxRecord;
use crate::lang::LangCode;
use crate::suffix::SuffixList;

/// TLD → language table. The defaults cover the country domains of the
/// corpus languages; English also absorbs the generic TLDs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LangMap(pub HashMap<String, LangCode>);

impl Default for LangMap {
    fn default() -> Self {
        let pairs: &[(&str, LangCode)] = &[
            ("pl", LangCode::Pl),
            ("de", LangCode::De),
            ("at", LangCode::De),
            ("fr", LangCode::Fr),
            ("it", LangCode::It),
            ("es", LangCode::Es),
            ("nl", LangCode::Nl),
            ("ru", LangCode::Ru),
            ("jp", LangCode::Ja),
            ("br", LangCode::Pt),
            ("pt", LangCode::Pt),
            ("ar", LangCode::Ar),
            ("sa", LangCode::Ar),
            ("eg", LangCode::Ar),
            ("uk", LangCode::En),
            ("us", LangCode::En),
            ("au", LangCode::En),
            ("com", LangCode::En),
            ("org", LangCode::En),
            ("net", LangCode::En),
            ("edu", LangCode::En),
            ("gov", LangCode::En),
        ];
        LangMap(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl LangMap {
    /// Default table with `overrides` applied on top.
    pub fn with_overrides(overrides: &HashMap<String, LangCode>) -> Self {
        let mut map = LangMap::default();
        for (tld, lang) in overrides {
            map.0
                .insert(tld.trim_start_matches('.').to_ascii_lowercase(), *lang);
        }
        map
    }

    pub fn lookup(&self, tld: &str) -> LangCode {
        self.0
            .get(&tld.to_ascii_lowercase())
            .copied()
            .unwrap_or(LangCode::Unknown)
    }
}

fn marker_language(value: &str) -> Option<LangCode> {
    let v = value.trim();
    let primary = v.split(['-', '_']).next().unwrap_or("");
    if primary.len() != 2 {
        return None;
    }
    LangCode::from_corpus_code(primary)
}

/// Preliminary language of a URL.
///
/// Explicit markers win over the TLD: a `lang=`/`language=` query value or a
/// `/xx/` directory segment naming one of the corpus languages. Otherwise
/// the TLD table decides; anything unmapped is `Unknown`.
pub fn detect_url_language(url: &str, map: &LangMap) -> LangCode {
    let Ok(parsed) = Url::parse(url) else {
        return LangCode::Unknown;
    };
    for (key, value) in parsed.query_pairs() {
        let key = key.to_ascii_lowercase();
        if key == "lang" || key == "language" {
            if let Some(l) = marker_language(&value) {
                return l;
            }
        }
    }
    if let Some(segments) = parsed.path_segments() {
        let segments: Vec<&str> = segments.collect();
        // only directory segments, i.e. `/xx/`, never the file name
        if segments.len() > 1 {
            for seg in &segments[..segments.len() - 1] {
                if seg.len() == 2 {
                    if let Some(l) = LangCode::from_corpus_code(seg) {
                        return l;
                    }
                }
            }
        }
    }
    match parsed.host() {
        Some(Host::Domain(host)) => {
            let host = host.trim_end_matches('.');
            let tld = host.rsplit('.').next().unwrap_or("");
            map.lookup(tld)
        }
        _ => LangCode::Unknown,
    }
}

/// Shape thresholds for a spam-looking file name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlugPattern {
    pub min_tokens: usize,
    pub min_len: usize,
}

impl Default for SlugPattern {
    fn default() -> Self {
        SlugPattern {
            min_tokens: 4,
            min_len: 30,
        }
    }
}

impl SlugPattern {
    pub fn matches(&self, name: &str) -> bool {
        if name.len() < self.min_len {
            return false;
        }
        let mut tokens = 0;
        for tok in name.split('-') {
            if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_lowercase()) {
                return false;
            }
            tokens += 1;
        }
        tokens >= self.min_tokens
    }
}

/// Final path segment with its extension removed.
fn file_stem(url: &Url) -> &str {
    let last = url
        .path_segments()
        .and_then(|mut s| s.next_back())
        .unwrap_or("");
    match last.rfind('.') {
        Some(i) => &last[..i],
        None => last,
    }
}

/// True when the file name is a long run of lowercase words joined by
/// hyphens. Only the path is inspected.
pub fn is_suspicious_url(url: &str, pattern: &SlugPattern) -> bool {
    match Url::parse(url) {
        Ok(u) => pattern.matches(file_stem(&u)),
        Err(_) => false,
    }
}

/// Registrable domain of a URL's host; IP hosts come back verbatim.
pub fn registrable_domain(url: &str, list: &SuffixList) -> String {
    match Url::parse(url) {
        Ok(u) => match u.host() {
            Some(Host::Domain(d)) => list.registrable_domain(d),
            Some(Host::Ipv4(ip)) => ip.to_string(),
            Some(Host::Ipv6(ip)) => ip.to_string(),
            None => String::new(),
        },
        Err(_) => String::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpamConfig {
    pub ratio_threshold: f64,
    pub min_domain_size: u64,
    pub pattern: SlugPattern,
}

impl Default for SpamConfig {
    fn default() -> Self {
        SpamConfig {
            ratio_threshold: 0.5,
            min_domain_size: 10,
            pattern: SlugPattern::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainVerdict {
    pub domain: String,
    pub url_count: u64,
    pub suspicious_count: u64,
    pub spam_ratio: f64,
    pub is_spam: bool,
}

impl DomainVerdict {
    fn from_counts(domain: String, url_count: u64, suspicious_count: u64, cfg: &SpamConfig) -> Self {
        let spam_ratio = if url_count == 0 {
            0.0
        } else {
            suspicious_count as f64 / url_count as f64
        };
        DomainVerdict {
            domain,
            url_count,
            suspicious_count,
            spam_ratio,
            is_spam: url_count >= cfg.min_domain_size && spam_ratio >= cfg.ratio_threshold,
        }
    }
}

/// First pass of spam filtering: tally suspicious URLs per registrable
/// domain and flag whole domains.
pub fn judge_domains<'a, I>(records: I, cfg: &SpamConfig, list: &SuffixList) -> BTreeMap<String, DomainVerdict>
where
    I: IntoIterator<Item = &'a CdxRecord>,
{
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for r in records {
        let entry = counts.entry(registrable_domain(&r.url, list)).or_default();
        entry.0 += 1;
        if is_suspicious_url(&r.url, &cfg.pattern) {
            entry.1 += 1;
        }
    }
    counts
        .into_iter()
        .map(|(d, (n, s))| (d.clone(), DomainVerdict::from_counts(d, n, s, cfg)))
        .collect()
}
