//! Local fixture corpora: PDFs packed into a gzip-member WARC plus a CDX-J
//! index pointing into it.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use pdfcorpus_cli::config::{PipelineConfig, SourceMode};
use pdfcorpus_core::cdx::{to_cdx_line, CdxRecord};
use pdfcorpus_core::lang::LangCode;
use pdfcorpus_fetch::warc::WarcWriter;
use pdfcorpus_pdf::writer::{text_document, PageSpec, PdfBuilder};

pub const WARC_NAME: &str = "crawl/segment-00000.warc.gz";
pub const FIXED_TIME: &str = "2024-03-01T12:00:00Z";

/// The same declaration in eleven languages, whitespace-normalized.
pub fn declaration(lang: LangCode) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data/langid/heldout")
        .join(format!("{lang}.txt"));
    let text = std::fs::read_to_string(&path).unwrap();
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// About `chars` characters of the declaration, cut at a word boundary.
pub fn excerpt(lang: LangCode, chars: usize) -> String {
    let text = declaration(lang);
    let mut out = String::new();
    for w in text.split(' ') {
        if out.chars().count() + w.chars().count() > chars {
            break;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(w);
    }
    if lang == LangCode::Ja {
        // no spaces to wrap at; break into 40-character lines
        let chars: Vec<char> = out.chars().collect();
        return chars.chunks(40).map(|c| c.iter().collect::<String>()).collect::<Vec<_>>().join("\n");
    }
    out
}

pub fn text_pdf(lang: LangCode, chars: usize, year: u32) -> Vec<u8> {
    text_document(&excerpt(lang, chars), 45)
        .info("Creator", "Microsoft Word")
        .info("CreationDate", &format!("D:{year}0102030405"))
        .build()
}

/// One full-page image, no text at all.
pub fn scanned_pdf() -> Vec<u8> {
    let mut b = PdfBuilder::new();
    let im = b.image();
    let mut p = PageSpec::a4();
    p.content.image(im, 0.0, 0.0, 595.0, 842.0);
    b.page(p);
    b.build()
}

pub fn surt(url: &str) -> String {
    let u = url::Url::parse(url).unwrap();
    let host = u.host_str().unwrap().trim_start_matches("www.");
    let mut labels: Vec<&str> = host.split('.').collect();
    labels.reverse();
    format!("{}){}", labels.join(","), u.path())
}

pub fn cdx_record(url: &str, mime: &str, status: u16, offset: u64, length: u64) -> CdxRecord {
    CdxRecord {
        surt_key: surt(url),
        timestamp: "20230301000000".into(),
        url: url.into(),
        mime: mime.into(),
        http_status: status,
        warc_filename: WARC_NAME.into(),
        warc_offset: offset,
        warc_length: length,
        declared_languages: None,
    }
}

#[derive(Debug, Clone)]
pub struct Doc {
    pub url: String,
    pub lang: LangCode,
    pub body: Vec<u8>,
}

pub struct Fixture {
    pub root: PathBuf,
    pub cdx: PathBuf,
    pub warc_dir: PathBuf,
    pub docs: Vec<Doc>,
}

/// Writes the WARC and the CDX below `root`. `noise` lines are appended to
/// the CDX verbatim.
pub fn write_fixture(root: &Path, docs: Vec<Doc>, noise: &[String]) -> Fixture {
    let mut warc = WarcWriter::new();
    let mut lines = Vec::new();
    for d in &docs {
        let loc = warc.add_response(&d.url, "2023-03-01T00:00:00Z", &[("Content-Type", "application/pdf")], &d.body, None);
        lines.push(to_cdx_line(&cdx_record(&d.url, "application/pdf", 200, loc.offset, loc.length)));
    }
    lines.extend(noise.iter().cloned());
    let warc_dir = root.join("warc");
    let warc_path = warc_dir.join(WARC_NAME);
    std::fs::create_dir_all(warc_path.parent().unwrap()).unwrap();
    std::fs::write(&warc_path, warc.bytes()).unwrap();
    let cdx = root.join("index.cdxj");
    std::fs::write(&cdx, lines.join("\n") + "\n").unwrap();
    Fixture {
        root: root.to_path_buf(),
        cdx,
        warc_dir,
        docs,
    }
}

pub const TEN: [(LangCode, &str); 10] = [
    (LangCode::De, "https://www.bundesamt.de/dokumente/jahresbericht.pdf"),
    (LangCode::En, "https://www.cityarchive.org/docs/annual_report.pdf"),
    (LangCode::Es, "https://www.ministerio.es/archivos/informe.pdf"),
    (LangCode::Fr, "https://www.mairie.fr/publications/rapport.pdf"),
    (LangCode::It, "https://www.comune.it/atti/relazione.pdf"),
    (LangCode::Ja, "https://www.shiyakusho.jp/files/houkoku.pdf"),
    (LangCode::Nl, "https://www.gemeente.nl/stukken/jaarverslag.pdf"),
    (LangCode::Pl, "https://www.urzad.pl/pliki/sprawozdanie.pdf"),
    (LangCode::Pt, "https://www.camara.pt/documentos/relatorio.pdf"),
    (LangCode::Ru, "https://www.gorod.ru/files/otchet.pdf"),
];

/// Ten born-digital documents, one per language, plus CDX lines that the
/// early stages must discard: a non-PDF capture, a failed capture, a
/// duplicate, a malformed line and a spam domain.
pub fn ten_document_fixture(root: &Path) -> Fixture {
    let docs: Vec<Doc> = TEN
        .iter()
        .enumerate()
        .map(|(i, (lang, url))| Doc {
            url: url.to_string(),
            lang: *lang,
            body: text_pdf(*lang, 1200, 2005 + i as u32),
        })
        .collect();
    let mut noise = vec![
        to_cdx_line(&cdx_record("https://www.mairie.fr/index.html", "text/html", 200, 0, 10)),
        to_cdx_line(&cdx_record("https://www.urzad.pl/brak.pdf", "application/pdf", 404, 0, 10)),
        "this line is not CDX".to_string(),
    ];
    let items = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliet", "kilo", "lima"];
    for item in items {
        let url = format!("https://cheap-deals.com/download-free-cheap-deal-{item}-now.pdf");
        noise.push(to_cdx_line(&cdx_record(&url, "application/pdf", 200, 0, 10)));
    }
    let f = write_fixture(root, docs, &noise);
    // a second capture of the first document
    let mut text = std::fs::read_to_string(&f.cdx).unwrap();
    let first = text.lines().next().unwrap().replace("20230301000000", "20230302000000");
    text.push_str(&first);
    text.push('\n');
    std::fs::write(&f.cdx, text).unwrap();
    f
}

pub fn warc_config(fixture: &Fixture) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.fetch.source = SourceMode::Warc;
    cfg.fetch.warc_base = fixture.warc_dir.to_string_lossy().into_owned();
    cfg.fetch.per_domain_interval = 0.0;
    cfg.fetch.concurrency = 4;
    cfg.fixed_time = Some(FIXED_TIME.parse().unwrap());
    cfg
}
