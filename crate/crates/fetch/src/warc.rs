//! Single records from crawl archives, read by byte range.
//!
//! Each record of a `.warc.gz` file is its own gzip member, so the range
//! named by an index entry decompresses independently of the rest.

use std::fs::File;
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Component, Path, PathBuf};

use flate2::read::{GzDecoder, ZlibDecoder};
use flate2::write::GzEncoder;

use crate::{backoff_delay, map_ureq_error, FetchConfig, FetchError, FetchResult, Source, CRAWLER_TRUNCATION_BYTES};

pub trait RangeReader: Send + Sync {
    /// Exactly the bytes `[offset, offset + length)` of `filename`.
    fn read_range(&self, filename: &str, offset: u64, length: u64) -> Result<Vec<u8>, FetchError>;
}

/// Archives below a local directory.
#[derive(Debug, Clone)]
pub struct LocalRangeReader {
    root: PathBuf,
}

impl LocalRangeReader {
    pub fn new(root: impl Into<PathBuf>) -> LocalRangeReader {
        LocalRangeReader { root: root.into() }
    }
}

impl RangeReader for LocalRangeReader {
    fn read_range(&self, filename: &str, offset: u64, length: u64) -> Result<Vec<u8>, FetchError> {
        let rel = Path::new(filename);
        if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
            return Err(FetchError::InvalidUrl(filename.to_string()));
        }
        let io = |e: std::io::Error| FetchError::Io(e.to_string());
        let mut f = File::open(self.root.join(rel)).map_err(io)?;
        f.seek(SeekFrom::Start(offset)).map_err(io)?;
        let mut buf = Vec::with_capacity(length as usize);
        f.take(length).read_to_end(&mut buf).map_err(io)?;
        if (buf.len() as u64) < length {
            return Err(FetchError::BadWarcRecord(format!("range ends {} bytes past end of file", length - buf.len() as u64)));
        }
        Ok(buf)
    }
}

/// Archives served over HTTP(S) from `base_url`, read with range requests.
#[derive(Debug)]
pub struct HttpRangeReader {
    base_url: String,
    cfg: FetchConfig,
    agent: ureq::Agent,
}

impl HttpRangeReader {
    pub fn new(base_url: &str, cfg: &FetchConfig) -> HttpRangeReader {
        HttpRangeReader {
            base_url: base_url.trim_end_matches('/').to_string(),
            cfg: cfg.clone(),
            agent: cfg.agent(),
        }
    }

    fn attempt(&self, url: &str, offset: u64, length: u64) -> Result<Vec<u8>, FetchError> {
        let range = format!("bytes={}-{}", offset, offset + length - 1);
        let mut resp = self
            .agent
            .get(url)
            .header("Range", range.as_str())
            .header("Accept-Encoding", "identity")
            .call()
            .map_err(|e| map_ureq_error(e, length))?;
        match resp.status().as_u16() {
            206 => {}
            200 => return Err(FetchError::RangeUnsupported),
            s => return Err(FetchError::from_status(s)),
        }
        let body = resp
            .body_mut()
            .with_config()
            .limit(length + 1)
            .read_to_vec()
            .map_err(|e| match map_ureq_error(e, length) {
                FetchError::Oversize(_) => FetchError::RangeUnsupported,
                other => other,
            })?;
        match (body.len() as u64).cmp(&length) {
            std::cmp::Ordering::Equal => Ok(body),
            std::cmp::Ordering::Greater => Err(FetchError::RangeUnsupported),
            std::cmp::Ordering::Less => Err(FetchError::BadWarcRecord("short range response".into())),
        }
    }
}

impl RangeReader for HttpRangeReader {
    fn read_range(&self, filename: &str, offset: u64, length: u64) -> Result<Vec<u8>, FetchError> {
        if length == 0 {
            return Err(FetchError::BadWarcRecord("empty range".into()));
        }
        let url = format!("{}/{}", self.base_url, filename.trim_start_matches('/'));
        let mut tries = 0;
        loop {
            match self.attempt(&url, offset, length) {
                Err(e) if e.is_transient() && tries < self.cfg.max_retries => {
                    tries += 1;
                    std::thread::sleep(backoff_delay(&self.cfg, tries));
                }
                r => return r,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarcRecord {
    pub version: String,
    pub headers: Vec<(String, String)>,
    pub block: Vec<u8>,
}

fn header<'a>(headers: &'a [(String, String)], name: &str) -> Option<&'a str> {
    headers.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v.as_str())
}

impl WarcRecord {
    pub fn header(&self, name: &str) -> Option<&str> {
        header(&self.headers, name)
    }
}

/// Decompresses the first gzip member; uncompressed records pass through.
pub fn decompress_member(data: &[u8]) -> Result<Vec<u8>, FetchError> {
    if data.starts_with(b"WARC/") {
        return Ok(data.to_vec());
    }
    if !data.starts_with(&[0x1f, 0x8b]) {
        return Err(FetchError::BadGzip("missing gzip magic".into()));
    }
    let mut out = Vec::new();
    GzDecoder::new(data).read_to_end(&mut out).map_err(|e| FetchError::BadGzip(e.to_string()))?;
    Ok(out)
}

fn split_head(data: &[u8]) -> Option<(&[u8], &[u8])> {
    if let Some(i) = data.windows(4).position(|w| w == b"\r\n\r\n") {
        return Some((&data[..i], &data[i + 4..]));
    }
    data.windows(2).position(|w| w == b"\n\n").map(|i| (&data[..i], &data[i + 2..]))
}

fn parse_headers(head: &str) -> Vec<(String, String)> {
    head.lines()
        .filter_map(|l| l.split_once(':'))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

pub fn parse_record(data: &[u8]) -> Result<WarcRecord, FetchError> {
    let bad = |m: &str| FetchError::BadWarcRecord(m.to_string());
    let (head, rest) = split_head(data).ok_or_else(|| bad("no header terminator"))?;
    let head = String::from_utf8_lossy(head);
    let mut lines = head.lines();
    let version = lines.next().unwrap_or("").trim().to_string();
    if !version.starts_with("WARC/") {
        return Err(bad("missing WARC version line"));
    }
    let headers = parse_headers(&lines.collect::<Vec<_>>().join("\n"));
    let len: usize = header(&headers, "Content-Length")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("missing Content-Length"))?;
    if rest.len() < len {
        return Err(bad("block shorter than Content-Length"));
    }
    Ok(WarcRecord {
        version,
        headers,
        block: rest[..len].to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

fn dechunk(data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < data.len() {
        let Some(eol) = data[pos..].windows(2).position(|w| w == b"\r\n") else { break };
        let line = String::from_utf8_lossy(&data[pos..pos + eol]);
        let Ok(size) = usize::from_str_radix(line.split(';').next().unwrap_or("").trim(), 16) else { break };
        pos += eol + 2;
        if size == 0 {
            break;
        }
        let end = (pos + size).min(data.len());
        out.extend_from_slice(&data[pos..end]);
        pos = end + 2;
    }
    out
}

pub fn parse_http_response(block: &[u8]) -> Result<HttpResponse, FetchError> {
    let bad = |m: &str| FetchError::BadWarcRecord(m.to_string());
    let (head, body) = split_head(block).ok_or_else(|| bad("no HTTP header terminator"))?;
    let head = String::from_utf8_lossy(head);
    let mut lines = head.lines();
    let status_line = lines.next().unwrap_or("");
    let status: u16 = status_line
        .strip_prefix("HTTP/")
        .and_then(|s| s.split_whitespace().nth(1))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad HTTP status line"))?;
    let headers = parse_headers(&lines.collect::<Vec<_>>().join("\n"));
    let mut body = body.to_vec();
    if header(&headers, "Transfer-Encoding").is_some_and(|v| v.to_ascii_lowercase().contains("chunked")) {
        body = dechunk(&body);
    }
    match header(&headers, "Content-Encoding").map(|v| v.trim().to_ascii_lowercase()).as_deref() {
        Some("gzip") | Some("x-gzip") => {
            let mut out = Vec::new();
            GzDecoder::new(&body[..]).read_to_end(&mut out).map_err(|e| bad(&format!("content-encoding: {e}")))?;
            body = out;
        }
        Some("deflate") => {
            let mut out = Vec::new();
            ZlibDecoder::new(&body[..]).read_to_end(&mut out).map_err(|e| bad(&format!("content-encoding: {e}")))?;
            body = out;
        }
        _ => {}
    }
    Ok(HttpResponse { status, headers, body })
}

/// Payload of the record at `[offset, offset + length)` of `filename`.
pub fn fetch_from_warc(
    reader: &dyn RangeReader,
    filename: &str,
    offset: u64,
    length: u64,
    cfg: &FetchConfig,
) -> Result<FetchResult, FetchError> {
    let raw = reader.read_range(filename, offset, length)?;
    let record = parse_record(&decompress_member(&raw)?)?;
    let url = record.header("WARC-Target-URI").unwrap_or("").trim_matches(|c| c == '<' || c == '>').to_string();
    let (status, body) = match record.header("WARC-Type").unwrap_or("response") {
        "response" => {
            let resp = parse_http_response(&record.block)?;
            (resp.status, resp.body)
        }
        "resource" => (200, record.block.clone()),
        other => return Err(FetchError::BadWarcRecord(format!("unexpected record type {other}"))),
    };
    if !(200..300).contains(&status) {
        return Err(FetchError::from_status(status));
    }
    let truncated = record.header("WARC-Truncated").is_some() || body.len() == CRAWLER_TRUNCATION_BYTES;
    Ok(FetchResult {
        url,
        source: Source::Warc,
        bytes: body,
        truncated,
        http_status: status,
        fetched_at: cfg.now(),
    })
}

/// Builds `.warc.gz` files record by record.
#[derive(Debug, Default, Clone)]
pub struct WarcWriter {
    data: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordLocation {
    pub offset: u64,
    pub length: u64,
}

impl WarcWriter {
    pub fn new() -> WarcWriter {
        WarcWriter::default()
    }

    /// Appends a gzip-compressed `response` record holding an HTTP response.
    pub fn add_response(
        &mut self,
        url: &str,
        date: &str,
        http_headers: &[(&str, &str)],
        body: &[u8],
        truncated: Option<&str>,
    ) -> RecordLocation {
        let mut http = format!("HTTP/1.1 200 OK\r\nContent-Length: {}\r\n", body.len()).into_bytes();
        for (k, v) in http_headers {
            http.extend_from_slice(format!("{k}: {v}\r\n").as_bytes());
        }
        http.extend_from_slice(b"\r\n");
        http.extend_from_slice(body);
        self.add_raw_response(url, date, &http, truncated)
    }

    /// Appends a response record whose block is `http` verbatim.
    pub fn add_raw_response(&mut self, url: &str, date: &str, http: &[u8], truncated: Option<&str>) -> RecordLocation {
        let mut rec = format!(
            "WARC/1.0\r\nWARC-Type: response\r\nWARC-Target-URI: {url}\r\nWARC-Date: {date}\r\nContent-Type: application/http; msgtype=response\r\n"
        );
        if let Some(reason) = truncated {
            rec.push_str(&format!("WARC-Truncated: {reason}\r\n"));
        }
        rec.push_str(&format!("Content-Length: {}\r\n\r\n", http.len()));
        let mut raw = rec.into_bytes();
        raw.extend_from_slice(http);
        raw.extend_from_slice(b"\r\n\r\n");
        let mut gz = GzEncoder::new(Vec::new(), flate2::Compression::default());
        gz.write_all(&raw).expect("in-memory write");
        let member = gz.finish().expect("in-memory write");
        let loc = RecordLocation {
            offset: self.data.len() as u64,
            length: member.len() as u64,
        };
        self.data.extend_from_slice(&member);
        loc
    }

    pub fn bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }
}
