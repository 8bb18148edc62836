use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Language bucket used throughout the pipeline.
///
/// Only the eleven corpus languages are representable, plus two sentinels:
/// `Other` (a language outside the set) and `Unknown` (no decision possible).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LangCode {
    Ar,
    De,
    En,
    Es,
    Fr,
    It,
    Ja,
    Nl,
    Pl,
    Pt,
    Ru,
    Other,
    Unknown,
}

impl LangCode {
    /// The eleven corpus languages in alphabetical order of their codes.
    pub const CORPUS: [LangCode; 11] = [
        LangCode::Ar,
        LangCode::De,
        LangCode::En,
        LangCode::Es,
        LangCode::Fr,
        LangCode::It,
        LangCode::Ja,
        LangCode::Nl,
        LangCode::Pl,
        LangCode::Pt,
        LangCode::Ru,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LangCode::Ar => "ar",
            LangCode::De => "de",
            LangCode::En => "en",
            LangCode::Es => "es",
            LangCode::Fr => "fr",
            LangCode::It => "it",
            LangCode::Ja => "ja",
            LangCode::Nl => "nl",
            LangCode::Pl => "pl",
            LangCode::Pt => "pt",
            LangCode::Ru => "ru",
            LangCode::Other => "other",
            LangCode::Unknown => "unknown",
        }
    }

    /// True for the eleven real languages, false for the sentinels.
    pub fn is_corpus_language(self) -> bool {
        !matches!(self, LangCode::Other | LangCode::Unknown)
    }

    /// Parses one of the eleven two-letter codes only; sentinels are rejected.
    pub fn from_corpus_code(code: &str) -> Option<LangCode> {
        match code.parse::<LangCode>() {
            Ok(l) if l.is_corpus_language() => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for LangCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognized language code `{0}`")]
pub struct UnknownLangCode(pub String);

impl FromStr for LangCode {
    type Err = UnknownLangCode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Ok(match lower.as_str() {
            "ar" => LangCode::Ar,
            "de" => LangCode::De,
            "en" => LangCode::En,
            "es" => LangCode::Es,
            "fr" => LangCode::Fr,
            "it" => LangCode::It,
            "ja" | "jp" => LangCode::Ja,
            "nl" => LangCode::Nl,
            "pl" => LangCode::Pl,
            "pt" => LangCode::Pt,
            "ru" => LangCode::Ru,
            "other" => LangCode::Other,
            "unknown" => LangCode::Unknown,
            _ => return Err(UnknownLangCode(s.to_string())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_every_code() {
        for l in LangCode::CORPUS.iter().chain(&[LangCode::Other, LangCode::Unknown]) {
            assert_eq!(l.as_str().parse::<LangCode>().unwrap(), *l);
            let json = serde_json::to_string(l).unwrap();
            assert_eq!(json, format!("\"{}\"", l.as_str()));
        }
    }

    #[test]
    fn sentinels_are_not_corpus_languages() {
        assert_eq!(LangCode::CORPUS.len(), 11);
        assert!(!LangCode::Unknown.is_corpus_language());
        assert_eq!(LangCode::from_corpus_code("other"), None);
        assert_eq!(LangCode::from_corpus_code("PL"), Some(LangCode::Pl));
        assert!("xx".parse::<LangCode>().is_err());
    }
}
