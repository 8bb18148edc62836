//! Minimal PDF writer for building test documents.
//!
//! Produces standard-conforming files with base-14 or Unicode (Type0,
//! Identity-H with a ToUnicode map) fonts, image XObjects shared between
//! pages, inline images, form XObjects, transparency states, page rotation,
//! compressed streams, cross-reference streams and object streams.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct FontId(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ImageId(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct FormId(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GStateId(usize);

#[derive(Debug, Clone)]
enum FontSpec {
    Base14(String),
    Unicode,
}

#[derive(Debug, Clone)]
enum Op {
    Raw(String),
    Text {
        font: FontId,
        size: f64,
        x: f64,
        y: f64,
        text: String,
        mode: u8,
    },
}

/// Operators for one content stream.
#[derive(Debug, Clone, Default)]
pub struct Content {
    ops: Vec<Op>,
}

impl Content {
    pub fn new() -> Content {
        Content::default()
    }

    /// Shows `text` with its baseline origin at (x, y).
    pub fn text(&mut self, font: FontId, size: f64, x: f64, y: f64, text: &str) -> &mut Self {
        self.text_mode(font, size, x, y, text, 0)
    }

    pub fn text_mode(&mut self, font: FontId, size: f64, x: f64, y: f64, text: &str, mode: u8) -> &mut Self {
        self.ops.push(Op::Text {
            font,
            size,
            x,
            y,
            text: text.to_string(),
            mode,
        });
        self
    }

    /// Appends operators verbatim.
    pub fn raw(&mut self, ops: &str) -> &mut Self {
        self.ops.push(Op::Raw(ops.to_string()));
        self
    }

    pub fn image(&mut self, image: ImageId, x: f64, y: f64, w: f64, h: f64) -> &mut Self {
        self.raw(&format!("q {w} 0 0 {h} {x} {y} cm /Im{} Do Q\n", image.0))
    }

    pub fn inline_image(&mut self, x: f64, y: f64, w: f64, h: f64) -> &mut Self {
        self.raw(&format!("q {w} 0 0 {h} {x} {y} cm\nBI /W 2 /H 2 /CS /G /BPC 8 ID \u{0}\u{7f}\u{7f}\u{0}\nEI Q\n"))
    }

    pub fn form(&mut self, form: FormId) -> &mut Self {
        self.raw(&format!("/Fm{} Do\n", form.0))
    }

    pub fn gstate(&mut self, gs: GStateId) -> &mut Self {
        self.raw(&format!("/GS{} gs\n", gs.0))
    }

    pub fn save(&mut self) -> &mut Self {
        self.raw("q\n")
    }

    pub fn restore(&mut self) -> &mut Self {
        self.raw("Q\n")
    }
}

#[derive(Debug, Clone)]
pub struct PageSpec {
    pub media_box: [f64; 4],
    pub rotation: u16,
    pub content: Content,
}

impl PageSpec {
    pub fn new(width: f64, height: f64) -> PageSpec {
        PageSpec {
            media_box: [0.0, 0.0, width, height],
            rotation: 0,
            content: Content::new(),
        }
    }

    pub fn a4() -> PageSpec {
        PageSpec::new(595.0, 842.0)
    }

    pub fn letter() -> PageSpec {
        PageSpec::new(612.0, 792.0)
    }

    pub fn rotated(mut self, rotation: u16) -> PageSpec {
        self.rotation = rotation;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XrefStyle {
    Table,
    Stream,
}

#[derive(Debug, Clone)]
pub struct PdfBuilder {
    pub version: String,
    pub compress: bool,
    pub xref: XrefStyle,
    /// Packs non-stream objects into an object stream; implies an xref stream.
    pub object_streams: bool,
    /// Adds a standard-security /Encrypt entry to the trailer.
    pub encrypt: bool,
    pub info: BTreeMap<String, String>,
    fonts: Vec<FontSpec>,
    images: usize,
    forms: Vec<Content>,
    gstates: Vec<(f64, f64)>,
    pages: Vec<PageSpec>,
}

impl Default for PdfBuilder {
    fn default() -> Self {
        PdfBuilder::new()
    }
}

/// CP1252 byte for a character, if it has one.
fn win_ansi(c: char) -> Option<u8> {
    const HIGH: [char; 32] = [
        '€', '\0', '‚', 'ƒ', '„', '…', '†', '‡', 'ˆ', '‰', 'Š', '‹', 'Œ', '\0', 'Ž', '\0', '\0', '‘', '’', '“', '”', '•', '–',
        '—', '˜', '™', 'š', '›', 'œ', '\0', 'ž', 'Ÿ',
    ];
    match c as u32 {
        0x20..=0x7e | 0xa0..=0xff => Some(c as u8),
        _ => HIGH.iter().position(|h| *h == c && c != '\0').map(|i| 0x80 + i as u8),
    }
}

pub fn win_ansi_encodable(text: &str) -> bool {
    text.chars().all(|c| win_ansi(c).is_some())
}

fn literal(bytes: &[u8]) -> String {
    let mut s = String::from("(");
    for &b in bytes {
        match b {
            b'(' | b')' | b'\\' => {
                s.push('\\');
                s.push(b as char);
            }
            0x20..=0x7e => s.push(b as char),
            _ => {
                let _ = write!(s, "\\{b:03o}");
            }
        }
    }
    s.push(')');
    s
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn deflate(data: &[u8]) -> Vec<u8> {
    let mut e = flate2::write::ZlibEncoder::new(Vec::new(), flate2::Compression::default());
    e.write_all(data).expect("in-memory write");
    e.finish().expect("in-memory write")
}

struct Objects {
    bodies: Vec<Option<Vec<u8>>>,
    streams: Vec<bool>,
}

impl Objects {
    fn reserve(&mut self) -> usize {
        self.bodies.push(None);
        self.streams.push(false);
        self.bodies.len()
    }

    fn set(&mut self, num: usize, body: Vec<u8>, stream: bool) {
        self.bodies[num - 1] = Some(body);
        self.streams[num - 1] = stream;
    }

    fn add(&mut self, body: Vec<u8>, stream: bool) -> usize {
        let n = self.reserve();
        self.set(n, body, stream);
        n
    }
}

fn stream_object(dict: &str, data: &[u8], compress: bool) -> Vec<u8> {
    let (data, filter) = if compress {
        (deflate(data), " /Filter /FlateDecode")
    } else {
        (data.to_vec(), "")
    };
    let mut out = format!("<< {dict}{filter} /Length {} >>\nstream\n", data.len()).into_bytes();
    out.extend_from_slice(&data);
    out.extend_from_slice(b"\nendstream");
    out
}

impl PdfBuilder {
    pub fn new() -> PdfBuilder {
        PdfBuilder {
            version: "1.7".into(),
            compress: false,
            xref: XrefStyle::Table,
            object_streams: false,
            encrypt: false,
            info: BTreeMap::new(),
            fonts: Vec::new(),
            images: 0,
            forms: Vec::new(),
            gstates: Vec::new(),
            pages: Vec::new(),
        }
    }

    pub fn version(mut self, v: &str) -> Self {
        self.version = v.into();
        self
    }

    pub fn compressed(mut self, on: bool) -> Self {
        self.compress = on;
        self
    }

    pub fn xref_style(mut self, style: XrefStyle) -> Self {
        self.xref = style;
        self
    }

    pub fn with_object_streams(mut self, on: bool) -> Self {
        self.object_streams = on;
        self
    }

    pub fn encrypted(mut self, on: bool) -> Self {
        self.encrypt = on;
        self
    }

    pub fn info(mut self, key: &str, value: &str) -> Self {
        self.info.insert(key.into(), value.into());
        self
    }

    /// A base-14 font with WinAnsiEncoding.
    pub fn base14_font(&mut self, name: &str) -> FontId {
        self.fonts.push(FontSpec::Base14(name.into()));
        FontId(self.fonts.len() - 1)
    }

    /// A composite font that can show any Unicode text.
    pub fn unicode_font(&mut self) -> FontId {
        self.fonts.push(FontSpec::Unicode);
        FontId(self.fonts.len() - 1)
    }

    /// A 2x2 greyscale image XObject.
    pub fn image(&mut self) -> ImageId {
        self.images += 1;
        ImageId(self.images - 1)
    }

    pub fn form(&mut self, content: Content) -> FormId {
        self.forms.push(content);
        FormId(self.forms.len() - 1)
    }

    pub fn alpha_state(&mut self, fill: f64, stroke: f64) -> GStateId {
        self.gstates.push((fill, stroke));
        GStateId(self.gstates.len() - 1)
    }

    pub fn page(&mut self, page: PageSpec) -> &mut Self {
        self.pages.push(page);
        self
    }

    pub fn page_count(&self) -> usize {
        self.pages.len()
    }

    fn render(&self, content: &Content, codes: &mut BTreeMap<char, u16>) -> Vec<u8> {
        let mut out = Vec::new();
        for op in &content.ops {
            match op {
                Op::Raw(s) => out.extend_from_slice(s.as_bytes()),
                Op::Text {
                    font,
                    size,
                    x,
                    y,
                    text,
                    mode,
                } => {
                    let shown = match &self.fonts[font.0] {
                        FontSpec::Base14(_) => {
                            let bytes: Vec<u8> = text.chars().map(|c| win_ansi(c).unwrap_or(b'?')).collect();
                            literal(&bytes)
                        }
                        FontSpec::Unicode => {
                            let mut hex = String::from("<");
                            for c in text.chars() {
                                let next = codes.len() as u16 + 1;
                                let code = *codes.entry(c).or_insert(next);
                                let _ = write!(hex, "{code:04X}");
                            }
                            hex.push('>');
                            hex
                        }
                    };
                    let _ = writeln!(
                        out,
                        "BT /F{} {} Tf {} Tr {} {} Td {} Tj ET",
                        font.0,
                        fmt_num(*size),
                        mode,
                        fmt_num(*x),
                        fmt_num(*y),
                        shown
                    );
                }
            }
        }
        out
    }

    fn resources(&self, font_refs: &[usize], image_refs: &[usize], form_refs: &[usize], gs_refs: &[usize]) -> String {
        let mut r = String::from("<<");
        let mut section = |key: &str, prefix: &str, refs: &[usize]| {
            if !refs.is_empty() {
                let _ = write!(r, " /{key} <<");
                for (i, n) in refs.iter().enumerate() {
                    let _ = write!(r, " /{prefix}{i} {n} 0 R");
                }
                r.push_str(" >>");
            }
        };
        section("Font", "F", font_refs);
        section("ExtGState", "GS", gs_refs);
        let mut xobjects: Vec<(String, usize)> = image_refs.iter().enumerate().map(|(i, n)| (format!("Im{i}"), *n)).collect();
        xobjects.extend(form_refs.iter().enumerate().map(|(i, n)| (format!("Fm{i}"), *n)));
        if !xobjects.is_empty() {
            r.push_str(" /XObject <<");
            for (name, n) in xobjects {
                let _ = write!(r, " /{name} {n} 0 R");
            }
            r.push_str(" >>");
        }
        r.push_str(" >>");
        r
    }

    pub fn build(&self) -> Vec<u8> {
        let mut objs = Objects {
            bodies: Vec::new(),
            streams: Vec::new(),
        };
        let catalog = objs.reserve();
        let pages_root = objs.reserve();
        let font_refs: Vec<usize> = self.fonts.iter().map(|_| objs.reserve()).collect();
        let image_refs: Vec<usize> = (0..self.images)
            .map(|_| {
                objs.add(
                    stream_object(
                        "/Type /XObject /Subtype /Image /Width 2 /Height 2 /ColorSpace /DeviceGray /BitsPerComponent 8",
                        &[0, 127, 127, 0],
                        false,
                    ),
                    true,
                )
            })
            .collect();
        let gs_refs: Vec<usize> = self
            .gstates
            .iter()
            .map(|(ca, sca)| objs.add(format!("<< /Type /ExtGState /ca {} /CA {} >>", fmt_num(*ca), fmt_num(*sca)).into_bytes(), false))
            .collect();

        let mut codes: BTreeMap<char, u16> = BTreeMap::new();
        let form_refs: Vec<usize> = self.forms.iter().map(|_| objs.reserve()).collect();
        let shared = self.resources(&font_refs, &image_refs, &[], &gs_refs);
        for (i, form) in self.forms.iter().enumerate() {
            let data = self.render(form, &mut codes);
            let dict = format!("/Type /XObject /Subtype /Form /BBox [0 0 10000 10000] /Resources {shared}");
            objs.set(form_refs[i], stream_object(&dict, &data, self.compress), true);
        }
        let page_resources = self.resources(&font_refs, &image_refs, &form_refs, &gs_refs);
        let mut kids = Vec::new();
        for page in &self.pages {
            let data = self.render(&page.content, &mut codes);
            let content = objs.add(stream_object("", &data, self.compress), true);
            let [a, b, c, d] = page.media_box.map(fmt_num);
            let rotate = if page.rotation != 0 { format!(" /Rotate {}", page.rotation) } else { String::new() };
            kids.push(objs.add(
                format!(
                    "<< /Type /Page /Parent {pages_root} 0 R /MediaBox [{a} {b} {c} {d}]{rotate} /Resources {page_resources} /Contents {content} 0 R >>"
                )
                .into_bytes(),
                false,
            ));
        }

        for (i, spec) in self.fonts.iter().enumerate() {
            let body = match spec {
                FontSpec::Base14(name) => {
                    let enc = if matches!(name.as_str(), "Symbol" | "ZapfDingbats") { "" } else { " /Encoding /WinAnsiEncoding" };
                    format!("<< /Type /Font /Subtype /Type1 /BaseFont /{name}{enc} >>")
                }
                FontSpec::Unicode => {
                    let cmap = objs.add(stream_object("", to_unicode_cmap(&codes).as_bytes(), self.compress), true);
                    let descriptor = objs.add(
                        b"<< /Type /FontDescriptor /FontName /UniSans /Flags 32 /FontBBox [0 -120 1000 880] /ItalicAngle 0 /Ascent 880 /Descent -120 /CapHeight 700 /StemV 80 >>".to_vec(),
                        false,
                    );
                    format!(
                        "<< /Type /Font /Subtype /Type0 /BaseFont /UniSans /Encoding /Identity-H /ToUnicode {cmap} 0 R /DescendantFonts [<< /Type /Font /Subtype /CIDFontType2 /BaseFont /UniSans /CIDSystemInfo << /Registry (Adobe) /Ordering (Identity) /Supplement 0 >> /DW 1000 /FontDescriptor {descriptor} 0 R >>] >>"
                    )
                }
            };
            objs.set(font_refs[i], body.into_bytes(), false);
        }

        let kids_list: Vec<String> = kids.iter().map(|k| format!("{k} 0 R")).collect();
        objs.set(
            pages_root,
            format!("<< /Type /Pages /Kids [{}] /Count {} >>", kids_list.join(" "), kids.len()).into_bytes(),
            false,
        );
        objs.set(catalog, format!("<< /Type /Catalog /Pages {pages_root} 0 R >>").into_bytes(), false);
        let info = (!self.info.is_empty()).then(|| {
            let mut d = String::from("<<");
            for (k, v) in &self.info {
                let _ = write!(d, " /{k} {}", literal(v.as_bytes()));
            }
            d.push_str(" >>");
            objs.add(d.into_bytes(), false)
        });
        let encrypt = self.encrypt.then(|| {
            objs.add(
                b"<< /Filter /Standard /V 2 /R 3 /Length 128 /P -3904 /O <00> /U <00> >>".to_vec(),
                false,
            )
        });
        self.serialize(objs, catalog, info, encrypt)
    }

    fn serialize(&self, mut objs: Objects, root: usize, info: Option<usize>, encrypt: Option<usize>) -> Vec<u8> {
        let mut out = format!("%PDF-{}\n%\u{e2}\u{e3}\u{cf}\u{d3}\n", self.version).into_bytes();
        let mut trailer_extra = format!(" /Root {root} 0 R");
        if let Some(i) = info {
            let _ = write!(trailer_extra, " /Info {i} 0 R");
        }
        if let Some(e) = encrypt {
            let _ = write!(trailer_extra, " /Encrypt {e} 0 R /ID [<00112233445566778899aabbccddeeff> <00112233445566778899aabbccddeeff>]");
        }

        let use_objstm = self.object_streams;
        // (kind, a, b): kind 1 = offset, kind 2 = (stream, index)
        let mut entries: BTreeMap<usize, (u8, usize, usize)> = BTreeMap::new();
        let packed: Vec<usize> = if use_objstm {
            (1..=objs.bodies.len())
                .filter(|n| !objs.streams[n - 1] && Some(*n) != encrypt)
                .collect()
        } else {
            Vec::new()
        };
        if !packed.is_empty() {
            let mut header = String::new();
            let mut body = Vec::new();
            for n in &packed {
                let _ = write!(header, "{n} {} ", body.len());
                body.extend_from_slice(objs.bodies[n - 1].as_ref().expect("object body"));
                body.push(b'\n');
            }
            let mut data = header.into_bytes();
            let first = data.len();
            data.extend_from_slice(&body);
            let stm = objs.add(
                stream_object(&format!("/Type /ObjStm /N {} /First {first}", packed.len()), &data, self.compress),
                true,
            );
            for (i, n) in packed.iter().enumerate() {
                entries.insert(*n, (2, stm, i));
            }
        }

        for n in 1..=objs.bodies.len() {
            if entries.contains_key(&n) {
                continue;
            }
            entries.insert(n, (1, out.len(), 0));
            let _ = writeln!(out, "{n} 0 obj");
            out.extend_from_slice(objs.bodies[n - 1].as_ref().expect("object body"));
            out.extend_from_slice(b"\nendobj\n");
        }

        if self.xref == XrefStyle::Table && !use_objstm {
            let start = out.len();
            let size = objs.bodies.len() + 1;
            let _ = write!(out, "xref\n0 {size}\n0000000000 65535 f \n");
            for n in 1..size {
                let _ = writeln!(out, "{:010} 00000 n ", entries[&n].1);
            }
            let _ = write!(out, "trailer\n<< /Size {size}{trailer_extra} >>\nstartxref\n{start}\n%%EOF\n");
        } else {
            let xref_num = objs.bodies.len() + 1;
            let start = out.len();
            entries.insert(xref_num, (1, start, 0));
            let size = xref_num + 1;
            let mut data = vec![0u8, 0, 0, 0, 0, 0xff, 0xff];
            for n in 1..size {
                let (kind, a, b) = entries[&n];
                data.push(kind);
                data.extend_from_slice(&(a as u32).to_be_bytes());
                data.extend_from_slice(&(b as u16).to_be_bytes());
            }
            let body = stream_object(&format!("/Type /XRef /Size {size} /W [1 4 2]{trailer_extra}"), &data, self.compress);
            let _ = writeln!(out, "{xref_num} 0 obj");
            out.extend_from_slice(&body);
            let _ = write!(out, "\nendobj\nstartxref\n{start}\n%%EOF\n");
        }
        out
    }
}

fn to_unicode_cmap(codes: &BTreeMap<char, u16>) -> String {
    let mut s = String::from(
        "/CIDInit /ProcSet findresource begin\n12 dict begin\nbegincmap\n/CMapName /UniSans-UTF16 def\n/CMapType 2 def\n1 begincodespacerange\n<0000> <FFFF>\nendcodespacerange\n",
    );
    let mut by_code: Vec<(u16, char)> = codes.iter().map(|(c, k)| (*k, *c)).collect();
    by_code.sort();
    for chunk in by_code.chunks(100) {
        let _ = writeln!(s, "{} beginbfchar", chunk.len());
        for (code, c) in chunk {
            let mut units = [0u16; 2];
            let hex: String = c.encode_utf16(&mut units).iter().map(|u| format!("{u:04X}")).collect();
            let _ = writeln!(s, "<{code:04X}> <{hex}>");
        }
        s.push_str("endbfchar\n");
    }
    s.push_str("endcmap\nCMapName currentdict /CMap defineresource pop\nend\nend\n");
    s
}

/// Flows `text` into lines of at most `chars_per_line` characters on A4
/// pages, using Helvetica when the text fits WinAnsiEncoding and a Unicode
/// font otherwise.
pub fn text_document(text: &str, chars_per_line: usize) -> PdfBuilder {
    let mut b = PdfBuilder::new();
    let font = if win_ansi_encodable(text) { b.base14_font("Helvetica") } else { b.unicode_font() };
    let size = 10.0;
    let mut lines: Vec<String> = Vec::new();
    for para in text.split('\n') {
        let mut line = String::new();
        for word in para.split_whitespace() {
            if !line.is_empty() && line.chars().count() + 1 + word.chars().count() > chars_per_line {
                lines.push(std::mem::take(&mut line));
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(word);
        }
        if !line.is_empty() {
            lines.push(line);
        }
    }
    let per_page = 50;
    for chunk in lines.chunks(per_page) {
        let mut page = PageSpec::a4();
        for (i, line) in chunk.iter().enumerate() {
            page.content.text(font, size, 56.0, 780.0 - 14.0 * i as f64, line);
        }
        b.page(page);
    }
    if b.page_count() == 0 {
        b.page(PageSpec::a4());
    }
    b
}
