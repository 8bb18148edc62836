//! Fonts as far as text extraction needs them: code splitting, Unicode
//! mapping, advance widths and vertical extent.

use std::collections::HashMap;

use crate::cmap::CMap;
use crate::document::PdfDocument;
use crate::encoding::{base14, base14_name, glyph_name_text, BaseEncoding};
use crate::object::{Dict, Object};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FontKind {
    Simple,
    Type0,
    Type3,
}

#[derive(Debug, Clone)]
pub struct Font {
    pub base_font: String,
    pub kind: FontKind,
    /// Code to text for one-byte fonts, before ToUnicode.
    simple_text: Vec<Option<String>>,
    to_unicode: Option<CMap>,
    encoding_cmap: Option<CMap>,
    /// UCS-2 / UTF-16 predefined CMaps: the code is the character.
    codes_are_unicode: bool,
    /// Advance widths in glyph units, keyed by code (simple) or CID.
    widths: HashMap<u32, f64>,
    default_width: f64,
    /// Ascent and descent in glyph units (1/1000 em unless Type3).
    pub ascent: f64,
    pub descent: f64,
    /// Glyph space to text space scale (0.001 except for Type3).
    pub glyph_scale: f64,
    pub vertical: bool,
}

/// One decoded character code.
#[derive(Debug, Clone, PartialEq)]
pub struct Glyph {
    pub code: u32,
    pub code_len: u8,
    /// `None` when the code has no Unicode mapping.
    pub text: Option<String>,
    /// Advance in text space units per unit of font size.
    pub width: f64,
}

impl Glyph {
    /// Single-byte code 32 receives word spacing.
    pub fn is_word_space(&self) -> bool {
        self.code_len == 1 && self.code == 32
    }
}

impl Font {
    /// Fallback used when a font resource is missing or unreadable.
    pub fn fallback() -> Font {
        Font::from_base14_name("Helvetica")
    }

    fn from_base14_name(name: &str) -> Font {
        let b = base14(name).expect("base-14 font present");
        let enc = if name == "Symbol" || name == "ZapfDingbats" { b.builtin_encoding() } else { BaseEncoding::Standard };
        let table = enc.table();
        let mut widths = HashMap::new();
        for (code, g) in table.iter().enumerate() {
            if let Some(w) = b.width_of(g) {
                widths.insert(code as u32, w as f64);
            }
        }
        let (ascent, descent) = b.vertical_metrics();
        Font {
            base_font: name.to_string(),
            kind: FontKind::Simple,
            simple_text: table.iter().map(|g| glyph_name_text(g)).collect(),
            to_unicode: None,
            encoding_cmap: None,
            codes_are_unicode: false,
            widths,
            default_width: 0.0,
            ascent,
            descent,
            glyph_scale: 0.001,
            vertical: false,
        }
    }

    pub fn load(doc: &PdfDocument, dict: &Dict) -> Font {
        let subtype = dict.get("Subtype").and_then(Object::as_name).unwrap_or("Type1");
        let base_font = doc.get(dict, "BaseFont").and_then(|o| o.as_name().map(str::to_string)).unwrap_or_default();
        let to_unicode = doc.get(dict, "ToUnicode").and_then(|o| doc.stream_data(&o)).map(|(_, d)| CMap::parse(&d));
        match subtype {
            "Type0" => Font::load_type0(doc, dict, base_font, to_unicode),
            "Type3" => Font::load_simple(doc, dict, base_font, to_unicode, FontKind::Type3),
            _ => Font::load_simple(doc, dict, base_font, to_unicode, FontKind::Simple),
        }
    }

    fn load_simple(doc: &PdfDocument, dict: &Dict, base_font: String, to_unicode: Option<CMap>, kind: FontKind) -> Font {
        let std_name = if kind == FontKind::Simple { base14_name(&base_font) } else { None };
        let std = std_name.and_then(base14);
        let descriptor = doc.get(dict, "FontDescriptor").and_then(|o| o.as_dict().cloned());
        let flags = descriptor.as_ref().and_then(|d| d.get("Flags")).and_then(Object::as_i64).unwrap_or(0);
        let symbolic = flags & 4 != 0 && flags & 32 == 0;

        let default_enc = match std {
            Some(b) => b.builtin_encoding(),
            None => BaseEncoding::Standard,
        };
        let mut names: Vec<String> = match descriptor.as_ref().and_then(|d| embedded_type1_encoding(doc, d)) {
            Some(builtin) if std.is_none() => builtin,
            _ => default_enc.table().iter().map(|s| s.to_string()).collect(),
        };
        let mut has_encoding = false;
        match doc.get(dict, "Encoding") {
            Some(Object::Name(n)) => {
                if let Some(e) = BaseEncoding::from_name(&n) {
                    names = e.table().iter().map(|s| s.to_string()).collect();
                    has_encoding = true;
                }
            }
            Some(Object::Dict(e)) => {
                if let Some(b) = e.get("BaseEncoding").and_then(Object::as_name).and_then(BaseEncoding::from_name) {
                    names = b.table().iter().map(|s| s.to_string()).collect();
                }
                has_encoding = true;
                if let Some(diffs) = doc.get(&e, "Differences") {
                    let mut code = 0usize;
                    for item in diffs.as_array().unwrap_or(&[]) {
                        match item {
                            Object::Int(c) => code = (*c).clamp(0, 255) as usize,
                            Object::Name(n) => {
                                if code < 256 {
                                    names[code] = n.clone();
                                }
                                code += 1;
                            }
                            _ => {}
                        }
                    }
                }
            }
            _ => {}
        }
        let simple_text: Vec<Option<String>> = names
            .iter()
            .enumerate()
            .map(|(code, g)| {
                glyph_name_text(g).or_else(|| {
                    // symbolic fonts without an encoding often use plain codes
                    (symbolic && !has_encoding && (32..127).contains(&code)).then(|| (code as u8 as char).to_string())
                })
            })
            .collect();

        let mut widths = HashMap::new();
        let first = doc.get(dict, "FirstChar").and_then(|o| o.as_i64()).unwrap_or(0).max(0) as u32;
        if let Some(ws) = doc.get(dict, "Widths") {
            for (i, w) in ws.as_array().unwrap_or(&[]).iter().enumerate() {
                if let Some(v) = doc.resolve(w).as_f64() {
                    widths.insert(first + i as u32, v);
                }
            }
        }
        if let Some(b) = std {
            for (code, g) in names.iter().enumerate() {
                if let Some(w) = b.width_of(g) {
                    widths.entry(code as u32).or_insert(w as f64);
                }
            }
        }
        let missing = descriptor.as_ref().and_then(|d| d.get("MissingWidth")).and_then(Object::as_f64);
        let default_width = missing.unwrap_or(if widths.is_empty() { 500.0 } else { 0.0 });

        let (mut ascent, mut descent) = std.map(|b| b.vertical_metrics()).unwrap_or((750.0, -250.0));
        if let Some(d) = &descriptor {
            let a = d.get("Ascent").and_then(Object::as_f64).unwrap_or(0.0);
            let de = d.get("Descent").and_then(Object::as_f64).unwrap_or(0.0);
            if a > 0.0 {
                ascent = a;
            }
            if de != 0.0 {
                descent = -de.abs();
            }
        }
        let mut glyph_scale = 0.001;
        if kind == FontKind::Type3 {
            let m: Vec<f64> = doc
                .get(dict, "FontMatrix")
                .and_then(|o| o.as_array().map(|a| a.iter().filter_map(Object::as_f64).collect()))
                .unwrap_or_default();
            if m.len() == 6 && m[0] != 0.0 {
                glyph_scale = m[0].abs();
                // Type3 vertical extent from the glyph bounding box
                if let Some(bbox) = doc.get(dict, "FontBBox").and_then(|o| doc.rect(&o)) {
                    if bbox.height() > 0.0 {
                        ascent = bbox.y1 * m[3].abs() / glyph_scale;
                        descent = bbox.y0 * m[3].abs() / glyph_scale;
                    }
                }
            }
        }
        Font {
            base_font,
            kind,
            simple_text: if kind == FontKind::Type3 { vec![None; 256] } else { simple_text },
            to_unicode,
            encoding_cmap: None,
            codes_are_unicode: false,
            widths,
            default_width,
            ascent,
            descent,
            glyph_scale,
            vertical: false,
        }
    }

    fn load_type0(doc: &PdfDocument, dict: &Dict, base_font: String, to_unicode: Option<CMap>) -> Font {
        let mut encoding_cmap = None;
        let mut codes_are_unicode = false;
        let mut vertical = false;
        match doc.get(dict, "Encoding") {
            Some(Object::Name(n)) => {
                vertical = n.ends_with("-V");
                codes_are_unicode = n.contains("UCS2") || n.contains("UTF16");
            }
            Some(Object::Stream(s)) => {
                if let Ok(d) = crate::filters::decode_stream(&s.dict, &s.raw) {
                    encoding_cmap = Some(CMap::parse(&d));
                }
                vertical = s.dict.get("WMode").and_then(Object::as_i64) == Some(1);
            }
            _ => {}
        }
        let descendant = doc
            .get(dict, "DescendantFonts")
            .and_then(|o| o.as_array().and_then(|a| a.first().cloned()))
            .and_then(|o| doc.resolve_dict(&o))
            .unwrap_or_default();
        let default_width = doc.get(&descendant, "DW").and_then(|o| o.as_f64()).unwrap_or(1000.0);
        let mut widths = HashMap::new();
        if let Some(w) = doc.get(&descendant, "W") {
            let items: Vec<Object> = w.as_array().unwrap_or(&[]).iter().map(|o| doc.resolve(o)).collect();
            let mut i = 0;
            while i < items.len() {
                let Some(start) = items[i].as_i64() else { break };
                match items.get(i + 1) {
                    Some(Object::Array(ws)) => {
                        for (k, w) in ws.iter().enumerate() {
                            if let Some(v) = doc.resolve(w).as_f64() {
                                widths.insert(start.max(0) as u32 + k as u32, v);
                            }
                        }
                        i += 2;
                    }
                    Some(end) => {
                        let (Some(end), Some(v)) = (end.as_i64(), items.get(i + 2).and_then(Object::as_f64)) else { break };
                        if end >= start && end - start <= 65_535 {
                            for c in start..=end {
                                widths.insert(c.max(0) as u32, v);
                            }
                        }
                        i += 3;
                    }
                    None => break,
                }
            }
        }
        let descriptor = doc.get(&descendant, "FontDescriptor").and_then(|o| o.as_dict().cloned());
        let mut ascent = 880.0;
        let mut descent = -120.0;
        if let Some(d) = &descriptor {
            if let Some(a) = d.get("Ascent").and_then(Object::as_f64).filter(|a| *a > 0.0) {
                ascent = a;
            }
            if let Some(de) = d.get("Descent").and_then(Object::as_f64).filter(|d| *d != 0.0) {
                descent = -de.abs();
            }
        }
        Font {
            base_font,
            kind: FontKind::Type0,
            simple_text: Vec::new(),
            to_unicode,
            encoding_cmap,
            codes_are_unicode,
            widths,
            default_width,
            ascent,
            descent,
            glyph_scale: 0.001,
            vertical,
        }
    }

    pub fn decode(&self, bytes: &[u8]) -> Vec<Glyph> {
        let codes: Vec<(u8, u32)> = match self.kind {
            FontKind::Type0 => match (&self.encoding_cmap, &self.to_unicode) {
                (Some(c), _) if !c.codespaces.is_empty() => c.split_codes(bytes, 2),
                _ => CMap::default().split_codes(bytes, 2),
            },
            _ => bytes.iter().map(|b| (1u8, *b as u32)).collect(),
        };
        codes
            .into_iter()
            .map(|(len, code)| {
                let text = self.text_for(len, code);
                let key = match self.kind {
                    FontKind::Type0 => self
                        .encoding_cmap
                        .as_ref()
                        .and_then(|c| c.lookup_cid(len, code))
                        .unwrap_or(code),
                    _ => code,
                };
                let w = self.widths.get(&key).copied().unwrap_or(self.default_width);
                Glyph { code, code_len: len, text, width: w * self.glyph_scale }
            })
            .collect()
    }

    fn text_for(&self, len: u8, code: u32) -> Option<String> {
        if let Some(t) = self.to_unicode.as_ref().and_then(|c| c.lookup_unicode(len, code)) {
            return Some(t.to_string());
        }
        match self.kind {
            FontKind::Simple => self.simple_text.get(code as usize).cloned().flatten(),
            FontKind::Type0 if self.codes_are_unicode => char::from_u32(code).map(String::from),
            _ => None,
        }
    }
}

/// Built-in encoding of an embedded Type1 program, read from the
/// `dup <code> /<glyph> put` entries of its cleartext portion.
fn embedded_type1_encoding(doc: &PdfDocument, descriptor: &Dict) -> Option<Vec<String>> {
    let (_, data) = doc.stream_data(descriptor.get("FontFile")?)?;
    let end = crate::lexer::find(&data, b"eexec", 0).unwrap_or(data.len());
    let clear = &data[..end];
    let start = crate::lexer::find(clear, b"/Encoding", 0)?;
    if clear[start..].starts_with(b"/Encoding StandardEncoding") {
        return None;
    }
    let mut names: Vec<String> = BaseEncoding::Standard.table().iter().map(|_| String::new()).collect();
    let text = String::from_utf8_lossy(&clear[start..]);
    let mut words = text.split_ascii_whitespace().peekable();
    let mut found = false;
    while let Some(w) = words.next() {
        if w == "readonly" || (w == "def" && found) {
            break;
        }
        if w != "dup" {
            continue;
        }
        let code = words.next().and_then(|c| c.parse::<usize>().ok());
        let name = words.next().and_then(|n| n.strip_prefix('/'));
        if let (Some(code), Some(name)) = (code, name) {
            if code < 256 {
                names[code] = name.to_string();
                found = true;
            }
        }
    }
    found.then_some(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fallback_font_is_helvetica() {
        let f = Font::fallback();
        let g = f.decode(b"Hi ");
        assert_eq!(g[0].text.as_deref(), Some("H"));
        assert!((g[0].width - 0.722).abs() < 1e-12);
        assert!(g[2].is_word_space());
        assert_eq!((f.ascent, f.descent), (718.0, -207.0));
    }
}
