//! Reproducible balancing: a per-domain cap for every language, then a
//! global cap per language.
//!
//! "Random" selection is a keyed-hash order: each URL gets the key
//! `u64::from_be_bytes(SHA-256(seed as 8 little-endian bytes ‖ url)[..8])`
//! and the smallest keys win (ties broken by the URL string). The key
//! depends only on the seed and the URL, so the selected set does not
//! depend on input order, and a record kept at cap `c` is kept at `c + 1`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::lang::LangCode;
use crate::par;

/// Per-domain caps. Defaults: English 1, German 2, everything else 3.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainCaps {
    pub default: usize,
    pub overrides: HashMap<LangCode, usize>,
}

impl Default for DomainCaps {
    fn default() -> Self {
        let mut overrides = HashMap::new();
        overrides.insert(LangCode::En, 1);
        overrides.insert(LangCode::De, 2);
        DomainCaps {
            default: 3,
            overrides,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no domain cap for non-corpus language `{0}`")]
pub struct NotACorpusLanguage(pub LangCode);

impl DomainCaps {
    pub fn cap(&self, lang: LangCode) -> Result<usize, NotACorpusLanguage> {
        if !lang.is_corpus_language() {
            return Err(NotACorpusLanguage(lang));
        }
        Ok(self.overrides.get(&lang).copied().unwrap_or(self.default))
    }
}

/// Default per-domain cap for a language.
pub fn domain_cap(lang: LangCode) -> Result<usize, NotACorpusLanguage> {
    DomainCaps::default().cap(lang)
}

/// Selection key of a URL under a seed.
pub fn sample_key(seed: u64, url: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(url.as_bytes());
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(first)
}

/// Anything that can be sampled by URL.
pub trait Sampled {
    fn sample_url(&self) -> &str;
}

impl Sampled for crate::cdx::CdxRecord {
    fn sample_url(&self) -> &str {
        &self.url
    }
}

impl Sampled for String {
    fn sample_url(&self) -> &str {
        self
    }
}

/// The `k` items with the smallest keys, in key order.
pub fn smallest_by_key<T: Sampled + Clone>(items: &[T], k: usize, seed: u64) -> Vec<T> {
    let mut keyed: Vec<(u64, &T)> = items
        .iter()
        .map(|it| (sample_key(seed, it.sample_url()), it))
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.sample_url().cmp(b.1.sample_url())));
    keyed.into_iter().take(k).map(|(_, it)| it.clone()).collect()
}

/// Picks at most `domain_cap(lang)` records from one (domain, language)
/// group.
pub fn select_per_domain<T: Sampled + Clone>(
    records: &[T],
    lang: LangCode,
    seed: u64,
    caps: &DomainCaps,
) -> Result<Vec<T>, NotACorpusLanguage> {
    let cap = caps.cap(lang)?;
    Ok(smallest_by_key(records, cap, seed))
}

/// Global per-language cap; returns the input untouched when it already
/// fits.
pub fn cap_language<T: Sampled + Clone>(records: Vec<T>, max_docs: usize, seed: u64) -> Vec<T> {
    if records.len() <= max_docs {
        return records;
    }
    smallest_by_key(&records, max_docs, seed)
}

/// Input to [`balance`]: a URL with its grouping attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate<T> {
    pub domain: String,
    pub lang: LangCode,
    pub item: T,
}

impl<T: Sampled> Sampled for Candidate<T> {
    fn sample_url(&self) -> &str {
        self.item.sample_url()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    DomainCap,
    LanguageCap,
    NotACorpusLanguage,
}

#[derive(Debug, Clone)]
pub struct BalanceOutcome<T> {
    /// Survivors, sorted by (language, URL).
    pub kept: Vec<Candidate<T>>,
    /// Everything else with the stage that removed it, sorted by URL.
    pub dropped: Vec<(Candidate<T>, DropReason)>,
    /// Per-language count after the domain cap (before the language cap).
    pub domain_balanced: BTreeMap<LangCode, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BalanceConfig {
    pub seed: u64,
    pub max_per_language: usize,
    pub domain_caps: DomainCaps,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig {
            seed: 0,
            max_per_language: 200_000,
            domain_caps: DomainCaps::default(),
        }
    }
}

/// Domain balancing followed by language balancing.
pub fn balance<T>(candidates: Vec<Candidate<T>>, cfg: &BalanceConfig) -> BalanceOutcome<T>
where
    T: Sampled + Clone + Send + Sync,
{
    let mut groups: BTreeMap<(LangCode, String), Vec<Candidate<T>>> = BTreeMap::new();
    let mut dropped = Vec::new();
    for c in candidates {
        if !c.lang.is_corpus_language() {
            dropped.push((c, DropReason::NotACorpusLanguage));
            continue;
        }
        groups.entry((c.lang, c.domain.clone())).or_default().push(c);
    }

    let groups: Vec<_> = groups.into_iter().collect();
    let per_group = par::map(&groups, |((lang, _), members)| {
        let keep = select_per_domain(members, *lang, cfg.seed, &cfg.domain_caps)
            .expect("corpus language");
        let kept_urls: std::collections::HashSet<&str> =
            keep.iter().map(|c| c.sample_url()).collect();
        let lost: Vec<_> = members
            .iter()
            .filter(|c| !kept_urls.contains(c.sample_url()))
            .cloned()
            .collect();
        (keep, lost)
    });

    let mut by_lang: BTreeMap<LangCode, Vec<Candidate<T>>> = BTreeMap::new();
    for (keep, lost) in per_group {
        for c in keep {
            by_lang.entry(c.lang).or_default().push(c);
        }
        dropped.extend(lost.into_iter().map(|c| (c, DropReason::DomainCap)));
    }

    let domain_balanced = by_lang.iter().map(|(l, v)| (*l, v.len())).collect();
    let mut kept = Vec::new();
    for (_, pool) in by_lang {
        let survivors = cap_language(pool.clone(), cfg.max_per_language, cfg.seed);
        if survivors.len() < pool.len() {
            let kept_urls: std::collections::HashSet<&str> =
                survivors.iter().map(|c| c.sample_url()).collect();
            dropped.extend(
                pool.iter()
                    .filter(|c| !kept_urls.contains(c.sample_url()))
                    .cloned()
                    .map(|c| (c, DropReason::LanguageCap)),
            );
        }
        kept.extend(survivors);
    }
    kept.sort_by(|a, b| a.lang.cmp(&b.lang).then_with(|| a.sample_url().cmp(b.sample_url())));
    dropped.sort_by(|a, b| a.0.sample_url().cmp(b.0.sample_url()));
    BalanceOutcome {
        kept,
        dropped,
        domain_balanced,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn urls(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("https://example.pl/doc{i}.pdf")).collect()
    }

    #[test]
    fn caps_per_language() {
        assert_eq!(domain_cap(LangCode::En), Ok(1));
        assert_eq!(domain_cap(LangCode::De), Ok(2));
        assert_eq!(domain_cap(LangCode::Pl), Ok(3));
        for l in LangCode::CORPUS {
            assert!(domain_cap(l).unwrap() <= 3);
        }
        assert!(domain_cap(LangCode::Unknown).is_err());
        assert!(domain_cap(LangCode::Other).is_err());
    }

    #[test]
    fn select_examples() {
        let caps = DomainCaps::default();
        let ten = urls(10);
        let a = select_per_domain(&ten, LangCode::Pl, 42, &caps).unwrap();
        let b = select_per_domain(&ten, LangCode::Pl, 42, &caps).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a, b);
        let one = urls(1);
        assert_eq!(select_per_domain(&one, LangCode::En, 42, &caps).unwrap(), one);
    }

    #[test]
    fn seeds_change_the_english_survivor() {
        // oracle: enumerate the full hash order for both seeds
        let ten = urls(10);
        let argmin = |seed: u64| {
            ten.iter()
                .min_by_key(|u| (sample_key(seed, u), (*u).clone()))
                .unwrap()
                .clone()
        };
        let caps = DomainCaps::default();
        let s42 = select_per_domain(&ten, LangCode::En, 42, &caps).unwrap();
        let s43 = select_per_domain(&ten, LangCode::En, 43, &caps).unwrap();
        assert_eq!(s42, vec![argmin(42)]);
        assert_eq!(s43, vec![argmin(43)]);
        assert_ne!(s42, s43);
    }

    #[test]
    fn key_is_stable_across_platforms() {
        // SHA-256 of 8 zero bytes followed by "a", first 8 bytes big-endian
        let mut h = Sha256::new();
        h.update([0u8; 8]);
        h.update(b"a");
        let d = h.finalize();
        assert_eq!(sample_key(0, "a"), u64::from_be_bytes(d[..8].try_into().unwrap()));
        assert_eq!(sample_key(0, "a"), sample_key(0, "a"));
        assert_ne!(sample_key(0, "a"), sample_key(1, "a"));
    }

    #[test]
    fn language_cap_examples() {
        // large pools exercised at full size: 320,978 → 200,000; 13,142 unchanged
        let de: Vec<String> = (0..320_978).map(|i| format!("https://d{i}.de/x.pdf")).collect();
        assert_eq!(cap_language(de, 200_000, 7).len(), 200_000);
        let ar: Vec<String> = (0..13_142).map(|i| format!("https://d{i}.sa/x.pdf")).collect();
        let out = cap_language(ar.clone(), 200_000, 7);
        assert_eq!(out, ar);
        assert!(cap_language(Vec::<String>::new(), 10, 7).is_empty());
    }

    #[test]
    fn balance_applies_both_caps() {
        let mut cands = Vec::new();
        for d in 0..20 {
            for i in 0..5 {
                cands.push(Candidate {
                    domain: format!("site{d}.de"),
                    lang: LangCode::De,
                    item: format!("https://site{d}.de/{i}.pdf"),
                });
            }
        }
        cands.push(Candidate {
            domain: "x.xyz".into(),
            lang: LangCode::Unknown,
            item: "https://x.xyz/a.pdf".into(),
        });
        let cfg = BalanceConfig {
            seed: 1,
            max_per_language: 30,
            domain_caps: DomainCaps::default(),
        };
        let out = balance(cands, &cfg);
        assert_eq!(out.domain_balanced[&LangCode::De], 40);
        assert_eq!(out.kept.len(), 30);
        assert_eq!(out.dropped.len(), 101 - 30);
        let count = |r: DropReason| out.dropped.iter().filter(|(_, d)| *d == r).count();
        assert_eq!(count(DropReason::DomainCap), 60);
        assert_eq!(count(DropReason::LanguageCap), 10);
        assert_eq!(count(DropReason::NotACorpusLanguage), 1);
    }

    proptest! {
        #[test]
        fn prefix_monotone(n in 1usize..40, cap in 0usize..10, seed in any::<u64>()) {
            let items = urls(n);
            let small = smallest_by_key(&items, cap, seed);
            let large = smallest_by_key(&items, cap + 1, seed);
            prop_assert!(small.iter().all(|u| large.contains(u)));
            prop_assert_eq!(&large[..small.len()], &small[..]);
        }

        #[test]
        fn permutation_invariant(n in 1usize..40, seed in any::<u64>(), rot in 0usize..40) {
            let items = urls(n);
            let mut rotated = items.clone();
            rotated.rotate_left(rot % n);
            rotated.reverse();
            let caps = DomainCaps::default();
            prop_assert_eq!(
                select_per_domain(&items, LangCode::Fr, seed, &caps).unwrap(),
                select_per_domain(&rotated, LangCode::Fr, seed, &caps).unwrap()
            );
        }

        #[test]
        fn cap_language_never_grows(n in 0usize..60, max in 0usize..80, seed in any::<u64>()) {
            let items = urls(n);
            let out = cap_language(items.clone(), max, seed);
            prop_assert_eq!(out.len(), n.min(max));
            if n <= max {
                prop_assert_eq!(out, items);
            }
        }
    }
}
