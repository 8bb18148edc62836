//! PDF parsing, born-digital scanning and positioned text extraction.

pub mod cmap;
pub mod content;
pub mod document;
pub mod encoding;
pub mod extract;
pub mod filters;
pub mod fixtures;
mod fontdata;
pub mod font;
pub mod interp;
pub mod lexer;
pub mod object;
pub mod scan;
pub mod writer;

pub use document::{parse_document, PdfDocument, PdfError};
pub use extract::{extract_tokens, ExtractConfig};
pub use scan::{classify_born_digital, normalize_creator, parse_creation_date, scan, scan_bytes, ScanReport};
