//! Common Crawl CDX-J index ingest.
//!
//! A CDX-J line is a SURT key, a 14-digit capture timestamp and a JSON
//! object, separated by single spaces:
//!
//! ```text
//! org,example)/a.pdf 20220501120000 {"url":"https://example.org/a.pdf","mime":"application/pdf",...}
//! ```
//!
//! Values inside the JSON object are usually strings, even for numeric
//! fields (`"status":"200"`); both encodings are accepted.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CdxRecord {
    pub surt_key: String,
    pub timestamp: String,
    pub url: String,
    pub mime: String,
    pub http_status: u16,
    pub warc_filename: String,
    pub warc_offset: u64,
    pub warc_length: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_languages: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
}

/// Parses one CDX-J line.
pub fn parse_cdx_line(line: &str) -> Result<CdxRecord, ParseError> {
    let line = line.trim_end_matches(['\r', '\n']);
    let brace = line
        .find('{')
        .ok_or_else(|| ParseError::MalformedJson("no JSON object on line".into()))?;
    let (prefix, json) = line.split_at(brace);
    let obj: Map<String, Value> = match serde_json::from_str(json) {
        Ok(Value::Object(m)) => m,
        Ok(_) => return Err(ParseError::MalformedJson("payload is not an object".into())),
        Err(e) => return Err(ParseError::MalformedJson(e.to_string())),
    };

    let mut head = prefix.split_whitespace();
    let surt_key = head.next().unwrap_or_default().to_string();
    let timestamp = match head.next() {
        Some(t) => t.to_string(),
        None => string_field(&obj, "timestamp")?.unwrap_or_default(),
    };
    if timestamp.len() != 14 || !timestamp.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseError::InvalidField {
            field: "timestamp",
            reason: format!("expected 14 digits, got `{timestamp}`"),
        });
    }

    let url = string_field(&obj, "url")?.ok_or(ParseError::MissingField("url"))?;
    match url::Url::parse(&url) {
        Ok(u) if matches!(u.scheme(), "http" | "https") && u.host().is_some() => {}
        _ => {
            return Err(ParseError::InvalidField {
                field: "url",
                reason: format!("not an absolute http(s) URL: `{url}`"),
            })
        }
    }
    // minimal indexes leave out the type when it is unknown
    let mime = string_field(&obj, "mime")?.unwrap_or_default();
    let warc_filename =
        string_field(&obj, "filename")?.ok_or(ParseError::MissingField("filename"))?;
    let warc_offset = int_field(&obj, "offset")?.ok_or(ParseError::MissingField("offset"))?;
    let warc_length = int_field(&obj, "length")?.ok_or(ParseError::MissingField("length"))?;
    if warc_length == 0 {
        return Err(ParseError::InvalidField {
            field: "length",
            reason: "must be positive".into(),
        });
    }
    if warc_offset.checked_add(warc_length).is_none() {
        return Err(ParseError::InvalidField {
            field: "offset",
            reason: "offset + length overflows".into(),
        });
    }
    let http_status = match int_field(&obj, "status")? {
        Some(s) => u16::try_from(s).map_err(|_| ParseError::InvalidField {
            field: "status",
            reason: format!("{s} out of range"),
        })?,
        None => 0,
    };
    let declared_languages = string_field(&obj, "languages")?.map(|s| {
        s.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    });

    Ok(CdxRecord {
        surt_key,
        timestamp,
        url,
        mime,
        http_status,
        warc_filename,
        warc_offset,
        warc_length,
        declared_languages,
    })
}

fn string_field(obj: &Map<String, Value>, key: &'static str) -> Result<Option<String>, ParseError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(Value::Number(n)) => Ok(Some(n.to_string())),
        Some(other) => Err(ParseError::InvalidField {
            field: key,
            reason: format!("unexpected JSON type: {other}"),
        }),
    }
}

fn int_field(obj: &Map<String, Value>, key: &'static str) -> Result<Option<u64>, ParseError> {
    let invalid = |reason: String| ParseError::InvalidField { field: key, reason };
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => n
            .as_u64()
            .map(Some)
            .ok_or_else(|| invalid(format!("not a non-negative integer: {n}"))),
        Some(Value::String(s)) => s
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|e| invalid(format!("`{s}`: {e}"))),
        Some(other) => Err(invalid(format!("unexpected JSON type: {other}"))),
    }
}

/// Canonical CDX-J serialization; `parse_cdx_line` inverts it exactly.
pub fn to_cdx_line(r: &CdxRecord) -> String {
    let mut obj = Map::new();
    obj.insert("url".into(), Value::String(r.url.clone()));
    obj.insert("mime".into(), Value::String(r.mime.clone()));
    obj.insert("status".into(), Value::String(r.http_status.to_string()));
    obj.insert("filename".into(), Value::String(r.warc_filename.clone()));
    obj.insert("offset".into(), Value::String(r.warc_offset.to_string()));
    obj.insert("length".into(), Value::String(r.warc_length.to_string()));
    if let Some(langs) = &r.declared_languages {
        obj.insert("languages".into(), Value::String(langs.join(",")));
    }
    format!(
        "{} {} {}",
        r.surt_key,
        r.timestamp,
        Value::Object(obj)
    )
}

/// Lowercases the MIME type and strips any `;` parameters.
pub fn normalize_mime(mime: &str) -> String {
    mime.split(';').next().unwrap_or("").trim().to_ascii_lowercase()
}

pub fn is_pdf_record(r: &CdxRecord) -> bool {
    r.http_status == 200 && normalize_mime(&r.mime) == "application/pdf"
}

/// Keeps successful `application/pdf` captures only.
pub fn filter_pdf_records<I>(records: I) -> impl Iterator<Item = CdxRecord>
where
    I: IntoIterator<Item = CdxRecord>,
{
    records.into_iter().filter(is_pdf_record)
}

/// Keeps the first capture of every exact URL, preserving order.
pub fn dedupe_by_url<I>(records: I) -> impl Iterator<Item = CdxRecord>
where
    I: IntoIterator<Item = CdxRecord>,
{
    let mut seen = HashSet::new();
    records.into_iter().filter(move |r| seen.insert(r.url.clone()))
}

/// Opens a CDX file, transparently gunzipping when it starts with the gzip
/// magic bytes (the extension is not consulted).
pub fn open_cdx(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let file = File::open(path)?;
    open_cdx_reader(file)
}

pub fn open_cdx_reader<R: Read + Send + 'static>(reader: R) -> io::Result<Box<dyn BufRead + Send>> {
    let mut buf = BufReader::new(reader);
    let magic = buf.fill_buf()?;
    if magic.len() >= 2 && magic[0] == 0x1f && magic[1] == 0x8b {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(buf))))
    } else {
        Ok(Box::new(buf))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CdxReadError {
    #[error("line {line}: {source}")]
    Parse { line: u64, source: ParseError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Streams records out of a CDX reader, one line at a time. Blank lines
/// are skipped; each malformed line yields an error item without stopping
/// the stream.
pub struct CdxReader<R> {
    inner: R,
    line_no: u64,
    buf: String,
}

impl<R: BufRead> CdxReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            line_no: 0,
            buf: String::new(),
        }
    }
}

impl<R: BufRead> Iterator for CdxReader<R> {
    type Item = Result<CdxRecord, CdxReadError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.inner.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line_no += 1;
            if self.buf.trim().is_empty() {
                continue;
            }
            return Some(parse_cdx_line(&self.buf).map_err(|source| CdxReadError::Parse {
                line: self.line_no,
                source,
            }));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EXAMPLE: &str = r#"org,example)/a.pdf 20220501120000 {"url":"https://example.org/a.pdf","mime":"application/pdf","status":"200","filename":"crawl.warc.gz","offset":"12","length":"3456"}"#;

    fn rec(url: &str, mime: &str, status: u16) -> CdxRecord {
        CdxRecord {
            surt_key: "k".into(),
            timestamp: "20220501120000".into(),
            url: url.into(),
            mime: mime.into(),
            http_status: status,
            warc_filename: "f.warc.gz".into(),
            warc_offset: 0,
            warc_length: 10,
            declared_languages: None,
        }
    }

    #[test]
    fn parses_example_line() {
        let r = parse_cdx_line(EXAMPLE).unwrap();
        assert_eq!(r.url, "https://example.org/a.pdf");
        assert_eq!(r.mime, "application/pdf");
        assert_eq!(r.warc_offset, 12);
        assert_eq!(r.warc_length, 3456);
        assert_eq!(r.http_status, 200);
        assert_eq!(r.surt_key, "org,example)/a.pdf");
        assert_eq!(r.timestamp, "20220501120000");
    }

    #[test]
    fn rejects_line_without_json() {
        assert!(matches!(
            parse_cdx_line("bad line without json"),
            Err(ParseError::MalformedJson(_))
        ));
        assert!(matches!(
            parse_cdx_line("a 20220501120000 {\"url\": "),
            Err(ParseError::MalformedJson(_))
        ));
    }

    #[test]
    fn rejects_missing_required_fields() {
        for key in ["url", "filename", "offset", "length"] {
            let mut v: Value = serde_json::from_str(EXAMPLE.split_at(EXAMPLE.find('{').unwrap()).1).unwrap();
            v.as_object_mut().unwrap().remove(key);
            let line = format!("org,example)/a.pdf 20220501120000 {v}");
            assert!(
                matches!(parse_cdx_line(&line), Err(ParseError::MissingField(k)) if k == key),
                "{key}"
            );
        }
    }

    #[test]
    fn missing_mime_is_unknown_not_pdf() {
        let line = r#"com,example)/?example=1 20140103030321 {"url": "http://example.com?example=1", "length": "1043", "offset": "333", "filename": "example.warc.gz"}"#;
        let r = parse_cdx_line(line).unwrap();
        assert_eq!((r.mime.as_str(), r.http_status), ("", 0));
        assert!(!is_pdf_record(&r));
    }

    #[test]
    fn unknown_keys_are_ignored_and_numbers_accepted() {
        let line = r#"org,example)/a.pdf 20220501120000 {"url":"http://example.org/a.pdf","mime":"application/pdf","status":200,"filename":"x","offset":0,"length":5,"digest":"ABC","mime-detected":"application/pdf","languages":"pol,eng"}"#;
        let r = parse_cdx_line(line).unwrap();
        assert_eq!(r.warc_length, 5);
        assert_eq!(r.declared_languages, Some(vec!["pol".into(), "eng".into()]));
    }

    #[test]
    fn rejects_bad_invariants() {
        let zero_len = EXAMPLE.replace("\"3456\"", "\"0\"");
        assert!(matches!(parse_cdx_line(&zero_len), Err(ParseError::InvalidField { field: "length", .. })));
        let bad_ts = EXAMPLE.replace("20220501120000", "2022");
        assert!(matches!(parse_cdx_line(&bad_ts), Err(ParseError::InvalidField { field: "timestamp", .. })));
        let ftp = EXAMPLE.replace("https://example.org/a.pdf", "ftp://example.org/a.pdf");
        assert!(matches!(parse_cdx_line(&ftp), Err(ParseError::InvalidField { field: "url", .. })));
        let overflow = EXAMPLE.replace("\"12\"", &format!("\"{}\"", u64::MAX));
        assert!(parse_cdx_line(&overflow).is_err());
    }

    #[test]
    fn filter_keeps_only_ok_pdf() {
        let input = vec![
            rec("http://a/1", "application/pdf", 200),
            rec("http://a/2", "text/html", 200),
            rec("http://a/3", "application/PDF; charset=binary", 200),
            rec("http://a/4", "application/pdf", 404),
        ];
        let out: Vec<_> = filter_pdf_records(input).map(|r| r.url).collect();
        assert_eq!(out, vec!["http://a/1", "http://a/3"]);
    }

    #[test]
    fn dedupe_keeps_first_in_order() {
        let a = rec("http://a/", "application/pdf", 200);
        let b = rec("http://b/", "application/pdf", 200);
        let mut a2 = a.clone();
        a2.timestamp = "20230101000000".into();
        let out: Vec<_> = dedupe_by_url(vec![a.clone(), b.clone(), a2]).collect();
        assert_eq!(out, vec![a, b]);
        assert_eq!(dedupe_by_url(Vec::new()).count(), 0);
    }

    #[test]
    fn reader_detects_gzip_by_magic() {
        use flate2::write::GzEncoder;
        use std::io::Write;
        let text = format!("{EXAMPLE}\n\nnot a record\n{EXAMPLE}\n");
        let mut enc = GzEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(text.as_bytes()).unwrap();
        let gz = enc.finish().unwrap();
        for bytes in [gz, text.into_bytes()] {
            let reader = open_cdx_reader(io::Cursor::new(bytes)).unwrap();
            let items: Vec<_> = CdxReader::new(reader).collect();
            assert_eq!(items.len(), 3);
            assert!(items[0].is_ok() && items[2].is_ok());
            assert!(matches!(items[1], Err(CdxReadError::Parse { line: 3, .. })));
        }
    }

    fn arb_record() -> impl Strategy<Value = CdxRecord> {
        (
            "[a-z]{1,8},[a-z]{1,10}\\)/[a-z0-9/_.-]{0,20}",
            "[0-9]{14}",
            "(http|https)://[a-z]{1,10}\\.(com|pl|de|org)/[a-zA-Z0-9_-]{0,20}(\\.pdf)?",
            prop_oneof!["application/pdf", "text/html", "application/PDF; charset=x"],
            any::<u16>(),
            "[a-zA-Z0-9/_.-]{1,40}",
            0u64..u64::MAX / 2,
            1u64..u64::MAX / 2,
            proptest::option::of(proptest::collection::vec("[a-z]{3}", 1..3)),
        )
            .prop_map(|(surt_key, timestamp, url, mime, http_status, warc_filename, warc_offset, warc_length, declared_languages)| CdxRecord {
                surt_key,
                timestamp,
                url,
                mime: mime.to_string(),
                http_status,
                warc_filename,
                warc_offset,
                warc_length,
                declared_languages,
            })
    }

    proptest! {
        #[test]
        fn canonical_line_round_trips(r in arb_record()) {
            prop_assert_eq!(parse_cdx_line(&to_cdx_line(&r)).unwrap(), r);
        }

        #[test]
        fn filter_output_is_subset_with_pdf_mime(rs in proptest::collection::vec(arb_record(), 0..40)) {
            let out: Vec<_> = filter_pdf_records(rs.clone()).collect();
            for r in &out {
                prop_assert!(rs.contains(r));
                prop_assert_eq!(normalize_mime(&r.mime), "application/pdf");
            }
        }

        #[test]
        fn dedupe_is_idempotent(urls in proptest::collection::vec(0u8..10, 0..50)) {
            let rs: Vec<_> = urls.iter().map(|u| rec(&format!("http://h/{u}"), "application/pdf", 200)).collect();
            let once: Vec<_> = dedupe_by_url(rs).collect();
            let twice: Vec<_> = dedupe_by_url(once.clone()).collect();
            prop_assert_eq!(once, twice);
        }
    }
}
