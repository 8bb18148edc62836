//! Public-suffix lookup for grouping URLs by registrable domain.

use std::collections::HashSet;
use std::sync::OnceLock;

const BUNDLED: &str = include_str!("../data/public_suffix_snapshot.dat");

/// Rules in the Public Suffix List file format (normal, `*.` wildcard and
/// `!` exception rules).
#[derive(Debug, Clone, Default)]
pub struct SuffixList {
    rules: HashSet<String>,
    exceptions: HashSet<String>,
}

impl SuffixList {
    pub fn parse(text: &str) -> Self {
        let mut list = SuffixList::default();
        for line in text.lines() {
            let rule = line.split_whitespace().next().unwrap_or("");
            if rule.is_empty() || rule.starts_with("//") {
                continue;
            }
            let rule = rule.to_ascii_lowercase();
            match rule.strip_prefix('!') {
                Some(exc) => {
                    list.exceptions.insert(exc.to_string());
                }
                None => {
                    list.rules.insert(rule);
                }
            }
        }
        list
    }

    /// The snapshot compiled into the binary.
    pub fn bundled() -> &'static SuffixList {
        static LIST: OnceLock<SuffixList> = OnceLock::new();
        LIST.get_or_init(|| SuffixList::parse(BUNDLED))
    }

    /// Number of labels in the public suffix of `host` (at least 1; the
    /// implicit `*` rule applies when nothing matches).
    fn suffix_labels(&self, labels: &[&str]) -> usize {
        let n = labels.len();
        let mut best = 1;
        for k in 1..=n {
            let candidate = labels[n - k..].join(".");
            if self.exceptions.contains(&candidate) {
                return k - 1;
            }
            if self.rules.contains(&candidate) {
                best = best.max(k);
            }
            if k >= 2 {
                let wildcard = format!("*.{}", labels[n - k + 1..].join("."));
                if self.rules.contains(&wildcard) {
                    best = best.max(k);
                }
            }
        }
        best
    }

    /// Registrable domain (public suffix plus one label). A host that is
    /// itself a public suffix is returned unchanged.
    pub fn registrable_domain(&self, host: &str) -> String {
        let host = host.trim_end_matches('.').to_ascii_lowercase();
        let labels: Vec<&str> = host.split('.').filter(|l| !l.is_empty()).collect();
        if labels.is_empty() {
            return host;
        }
        let suffix = self.suffix_labels(&labels);
        if suffix >= labels.len() {
            return labels.join(".");
        }
        labels[labels.len() - suffix - 1..].join(".")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_rules() {
        let psl = SuffixList::bundled();
        assert_eq!(psl.registrable_domain("sub.example.org"), "example.org");
        assert_eq!(psl.registrable_domain("a.b.example.co.uk"), "example.co.uk");
        assert_eq!(psl.registrable_domain("www.um.warszawa.pl"), "warszawa.pl");
        assert_eq!(psl.registrable_domain("bip.um.waw.pl"), "um.waw.pl");
        assert_eq!(psl.registrable_domain("co.uk"), "co.uk");
        assert_eq!(psl.registrable_domain("EXAMPLE.COM."), "example.com");
        // unlisted TLD falls back to the implicit `*` rule
        assert_eq!(psl.registrable_domain("a.b.example.zz"), "example.zz");
    }

    #[test]
    fn wildcard_and_exception_rules() {
        let psl = SuffixList::parse("jp\n*.kobe.jp\n!city.kobe.jp\n");
        assert_eq!(psl.registrable_domain("www.foo.bar.kobe.jp"), "foo.bar.kobe.jp");
        assert_eq!(psl.registrable_domain("www.city.kobe.jp"), "city.kobe.jp");
        assert_eq!(psl.registrable_domain("example.jp"), "example.jp");
    }
}
