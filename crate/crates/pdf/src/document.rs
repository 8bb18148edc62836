//! File structure: cross-reference data, object resolution, the page tree
//! and the document information dictionary.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap, HashSet};

use pdfcorpus_core::layout::Rect;

use crate::filters::decode_stream;
use crate::lexer::{find, rfind, Lexer, Parser, Token};
use crate::object::{decode_text_string, Dict, ObjRef, Object};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PdfError {
    #[error("document is encrypted")]
    Encrypted,
    #[error("unparseable document: {0}")]
    Unparseable(String),
    #[error("document has no pages")]
    NoPages,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum XrefEntry {
    InFile { offset: usize, gen: u16 },
    InStream { stream: u32, index: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Page {
    pub object: Option<ObjRef>,
    pub media_box: Rect,
    /// One of 0, 90, 180, 270.
    pub rotation: u16,
    pub resources: Dict,
    pub contents: Vec<Object>,
}

impl Page {
    /// Width and height as displayed, after applying the rotation.
    pub fn effective_size(&self) -> (f64, f64) {
        let (w, h) = (self.media_box.width(), self.media_box.height());
        if self.rotation % 180 == 90 {
            (h, w)
        } else {
            (w, h)
        }
    }
}

/// Raw strings from the document information dictionary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Info {
    pub creation_date: Option<String>,
    pub creator: Option<String>,
    pub producer: Option<String>,
    pub title: Option<String>,
}

pub struct PdfDocument {
    data: Vec<u8>,
    xref: HashMap<u32, XrefEntry>,
    pub trailer: Dict,
    pub version: String,
    pub pages: Vec<Page>,
    pub info: Info,
    pub warnings: Vec<String>,
    /// True when the cross-reference data had to be rebuilt by scanning.
    pub recovered: bool,
    object_streams: RefCell<HashMap<u32, HashMap<u32, Object>>>,
    resolving: RefCell<HashSet<u32>>,
}

const DEFAULT_MEDIA_BOX: Rect = Rect { x0: 0.0, y0: 0.0, x1: 612.0, y1: 792.0 };
const MAX_TREE_DEPTH: usize = 64;

impl std::fmt::Debug for PdfDocument {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PdfDocument")
            .field("version", &self.version)
            .field("pages", &self.pages.len())
            .field("recovered", &self.recovered)
            .finish()
    }
}

pub fn parse_document(bytes: &[u8]) -> Result<PdfDocument, PdfError> {
    let header_pos = find(&bytes[..bytes.len().min(1024)], b"%PDF-", 0)
        .ok_or_else(|| PdfError::Unparseable("no %PDF- header".into()))?;
    let version = header_version(&bytes[header_pos..]);
    let mut doc = PdfDocument {
        data: bytes.to_vec(),
        xref: HashMap::new(),
        trailer: Dict::new(),
        version,
        pages: Vec::new(),
        info: Info::default(),
        warnings: Vec::new(),
        recovered: false,
        object_streams: RefCell::new(HashMap::new()),
        resolving: RefCell::new(HashSet::new()),
    };

    let loaded = doc.load_xref(header_pos);
    let usable = loaded.is_ok() && doc.catalog().is_some();
    if !usable {
        if let Err(e) = loaded {
            doc.warnings.push(format!("cross-reference data unusable ({e}); scanning objects"));
        }
        doc.rebuild_xref();
        doc.recovered = true;
    }
    if doc.trailer.contains_key("Encrypt") {
        return Err(PdfError::Encrypted);
    }

    if let Some(v) = doc
        .catalog()
        .and_then(|c| c.get("Version").cloned())
        .and_then(|v| v.as_name().map(str::to_string))
    {
        if v.parse::<f64>().is_ok() && version_key(&v) > version_key(&doc.version) {
            doc.version = v;
        }
    }

    doc.pages = doc.collect_pages();
    if doc.pages.is_empty() && !doc.recovered {
        // a readable xref may still point at a broken page tree
        doc.rebuild_xref();
        doc.recovered = true;
        doc.pages = doc.collect_pages();
    }
    if doc.pages.is_empty() {
        return Err(PdfError::NoPages);
    }
    doc.info = doc.read_info();
    Ok(doc)
}

fn header_version(data: &[u8]) -> String {
    let rest = &data[5..data.len().min(16)];
    let v: String = rest
        .iter()
        .take_while(|b| b.is_ascii_digit() || **b == b'.')
        .map(|b| *b as char)
        .collect();
    if v.is_empty() {
        "1.0".into()
    } else {
        v
    }
}

fn version_key(v: &str) -> (u32, u32) {
    let mut it = v.split('.').map(|p| p.parse::<u32>().unwrap_or(0));
    (it.next().unwrap_or(0), it.next().unwrap_or(0))
}

impl PdfDocument {
    pub fn bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn page_count(&self) -> usize {
        self.pages.len()
    }

    pub fn object_count(&self) -> usize {
        self.xref.len()
    }

    fn load_xref(&mut self, header_pos: usize) -> Result<(), String> {
        let tail_start = self.data.len().saturating_sub(4096);
        let sx = rfind(&self.data[tail_start..], b"startxref")
            .map(|p| p + tail_start)
            .or_else(|| rfind(&self.data, b"startxref"))
            .ok_or("no startxref")?;
        let mut lex = Lexer::at(&self.data, sx + b"startxref".len());
        let offset = match lex.next_token() {
            Ok(Token::Int(o)) if o >= 0 => o as usize,
            _ => return Err("bad startxref offset".into()),
        };
        let mut seen = HashSet::new();
        let mut next = Some(offset);
        let mut first = true;
        while let Some(off) = next.take() {
            if !seen.insert(off) {
                break;
            }
            let (trailer, prev) = match self.read_xref_section(off) {
                Ok(r) => r,
                // offsets measured from the header when junk precedes it
                Err(_) if header_pos > 0 => self.read_xref_section(off + header_pos)?,
                Err(e) => return Err(e),
            };
            if first {
                self.trailer = trailer.clone();
                first = false;
            } else {
                for (k, v) in &trailer {
                    self.trailer.entry(k.clone()).or_insert_with(|| v.clone());
                }
            }
            if let Some(stm) = trailer.get("XRefStm").and_then(Object::as_i64) {
                if stm >= 0 && seen.insert(stm as usize) {
                    let _ = self.read_xref_section(stm as usize);
                }
            }
            next = prev;
        }
        if !self.trailer.contains_key("Root") {
            return Err("trailer lacks /Root".into());
        }
        Ok(())
    }

    /// Reads one xref table or stream; entries already known are kept.
    fn read_xref_section(&mut self, offset: usize) -> Result<(Dict, Option<usize>), String> {
        if offset >= self.data.len() {
            return Err(format!("xref offset {offset} beyond end of file"));
        }
        let mut lex = Lexer::at(&self.data, offset);
        lex.skip_whitespace();
        let prev_of = |d: &Dict| d.get("Prev").and_then(Object::as_i64).filter(|p| *p >= 0).map(|p| p as usize);
        if self.data[lex.pos..].starts_with(b"xref") {
            lex.pos += 4;
            let mut new_entries = Vec::new();
            loop {
                match lex.next_token() {
                    Ok(Token::Int(start)) => {
                        let count = match lex.next_token() {
                            Ok(Token::Int(c)) if c >= 0 => c as usize,
                            _ => return Err("bad xref subsection header".into()),
                        };
                        for i in 0..count {
                            let (off, gen, kind) = match (lex.next_token(), lex.next_token(), lex.next_token()) {
                                (Ok(Token::Int(o)), Ok(Token::Int(g)), Ok(Token::Keyword(k))) => (o, g, k),
                                _ => return Err("bad xref entry".into()),
                            };
                            if kind == b"n" && off > 0 {
                                let num = (start.max(0) as usize + i) as u32;
                                new_entries.push((num, XrefEntry::InFile { offset: off as usize, gen: gen.clamp(0, u16::MAX as i64) as u16 }));
                            }
                        }
                    }
                    Ok(Token::Keyword(k)) if k == b"trailer" => break,
                    _ => return Err("xref table without trailer".into()),
                }
            }
            let trailer = match Parser::at(&self.data, lex.pos).parse_object() {
                Ok(Object::Dict(d)) => d,
                _ => return Err("unreadable trailer".into()),
            };
            for (num, e) in new_entries {
                self.xref.entry(num).or_insert(e);
            }
            let prev = prev_of(&trailer);
            Ok((trailer, prev))
        } else {
            let no_len = |_: ObjRef| None;
            let (_, obj) = Parser::at(&self.data, lex.pos)
                .parse_indirect(&no_len)
                .map_err(|e| format!("xref stream: {e}"))?;
            let stream = obj.as_stream().ok_or("startxref does not point at an xref")?;
            if stream.dict.get("Type").and_then(Object::as_name) != Some("XRef") {
                return Err("object at startxref is not an xref stream".into());
            }
            self.absorb_xref_stream(&stream.dict, &stream.raw)?;
            let prev = prev_of(&stream.dict);
            Ok((stream.dict.clone(), prev))
        }
    }

    fn absorb_xref_stream(&mut self, dict: &Dict, raw: &[u8]) -> Result<(), String> {
        let data = decode_stream(dict, raw).map_err(|e| e.to_string())?;
        let w: Vec<usize> = dict
            .get("W")
            .and_then(Object::as_array)
            .ok_or("xref stream without /W")?
            .iter()
            .map(|o| o.as_i64().unwrap_or(0).clamp(0, 8) as usize)
            .collect();
        if w.len() != 3 {
            return Err("xref /W must have three entries".into());
        }
        let size = dict.get("Size").and_then(Object::as_i64).unwrap_or(0).max(0);
        let index: Vec<i64> = match dict.get("Index").and_then(Object::as_array) {
            Some(a) => a.iter().filter_map(Object::as_i64).collect(),
            None => vec![0, size],
        };
        let row = w.iter().sum::<usize>().max(1);
        let field = |bytes: &[u8]| bytes.iter().fold(0u64, |acc, b| acc << 8 | *b as u64);
        let mut rows = data.chunks_exact(row);
        for pair in index.chunks_exact(2) {
            let (start, count) = (pair[0].max(0) as u32, pair[1].max(0) as u32);
            for i in 0..count {
                let Some(r) = rows.next() else { return Ok(()) };
                let kind = if w[0] == 0 { 1 } else { field(&r[..w[0]]) };
                let f2 = field(&r[w[0]..w[0] + w[1]]);
                let f3 = field(&r[w[0] + w[1]..]);
                let entry = match kind {
                    1 => XrefEntry::InFile { offset: f2 as usize, gen: f3 as u16 },
                    2 => XrefEntry::InStream { stream: f2 as u32, index: f3 as u32 },
                    _ => continue,
                };
                self.xref.entry(start + i).or_insert(entry);
            }
        }
        Ok(())
    }

    /// Rebuilds the object index by scanning for `n g obj` headers. Later
    /// definitions win, as with incremental updates.
    fn rebuild_xref(&mut self) {
        self.xref.clear();
        self.object_streams.borrow_mut().clear();
        let data = &self.data;
        let mut trailers: Vec<Dict> = Vec::new();
        let mut pos = 0;
        while let Some(p) = find(data, b"obj", pos) {
            pos = p + 3;
            if data.get(p + 3).is_some_and(|b| !crate::lexer::is_whitespace(*b) && !crate::lexer::is_delimiter(*b)) {
                continue;
            }
            if let Some((num, gen, start)) = object_header_before(data, p) {
                self.xref.insert(num, XrefEntry::InFile { offset: start, gen });
            }
        }
        let mut pos = 0;
        while let Some(p) = find(data, b"trailer", pos) {
            pos = p + 7;
            if let Ok(Object::Dict(d)) = Parser::at(data, pos).parse_object() {
                trailers.push(d);
            }
        }
        // xref and object streams found by the scan
        let ids: Vec<(u32, usize)> = self
            .xref
            .iter()
            .filter_map(|(n, e)| match e {
                XrefEntry::InFile { offset, .. } => Some((*n, *offset)),
                _ => None,
            })
            .collect();
        let mut in_streams = Vec::new();
        for (num, offset) in ids {
            let no_len = |_: ObjRef| None;
            let Ok((_, Object::Stream(s))) = Parser::at(&self.data, offset).parse_indirect(&no_len) else { continue };
            match s.dict.get("Type").and_then(Object::as_name) {
                Some("XRef") => trailers.push(s.dict.clone()),
                Some("ObjStm") => {
                    if let Ok(objs) = parse_object_stream(&s.dict, &s.raw) {
                        for (i, (n, _)) in objs.iter().enumerate() {
                            in_streams.push((*n, num, i as u32));
                        }
                    }
                }
                _ => {}
            }
        }
        for (n, stream, index) in in_streams {
            self.xref.entry(n).or_insert(XrefEntry::InStream { stream, index });
        }
        let mut trailer = Dict::new();
        for t in trailers.iter().rev() {
            for (k, v) in t {
                if matches!(k.as_str(), "Root" | "Info" | "Encrypt" | "ID") {
                    trailer.entry(k.clone()).or_insert_with(|| v.clone());
                }
            }
        }
        let root_ok = trailer
            .get("Root")
            .map(|r| self.resolve(r))
            .is_some_and(|c| c.as_dict().is_some_and(|d| d.contains_key("Pages")));
        if !root_ok {
            trailer.remove("Root");
            let mut nums: Vec<u32> = self.xref.keys().copied().collect();
            nums.sort_unstable();
            for n in nums.into_iter().rev() {
                let r = ObjRef { num: n, gen: 0 };
                let o = self.resolve(&Object::Ref(r));
                if o.as_dict().and_then(|d| d.get("Type")).and_then(Object::as_name) == Some("Catalog") {
                    trailer.insert("Root".into(), Object::Ref(r));
                    break;
                }
            }
        }
        self.trailer = trailer;
    }

    /// Follows references (bounded) and returns the direct object.
    pub fn resolve(&self, obj: &Object) -> Object {
        let mut cur = obj.clone();
        for _ in 0..32 {
            match cur {
                Object::Ref(r) => cur = self.load(r),
                other => return other,
            }
        }
        Object::Null
    }

    pub fn resolve_dict(&self, obj: &Object) -> Option<Dict> {
        match self.resolve(obj) {
            Object::Dict(d) => Some(d),
            Object::Stream(s) => Some(s.dict),
            _ => None,
        }
    }

    /// Looks up `key` in `dict`, resolving a reference.
    pub fn get(&self, dict: &Dict, key: &str) -> Option<Object> {
        dict.get(key).map(|o| self.resolve(o)).filter(|o| *o != Object::Null)
    }

    fn load(&self, r: ObjRef) -> Object {
        if !self.resolving.borrow_mut().insert(r.num) {
            return Object::Null;
        }
        let out = match self.xref.get(&r.num) {
            Some(XrefEntry::InFile { offset, .. }) => {
                let lengths = |lr: ObjRef| self.resolve(&Object::Ref(lr)).as_i64();
                match Parser::at(&self.data, *offset).parse_indirect(&lengths) {
                    Ok((id, o)) if id.num == r.num => o,
                    _ => Object::Null,
                }
            }
            Some(XrefEntry::InStream { stream, .. }) => self.load_from_object_stream(*stream, r.num),
            None => Object::Null,
        };
        self.resolving.borrow_mut().remove(&r.num);
        out
    }

    fn load_from_object_stream(&self, stream: u32, num: u32) -> Object {
        if let Some(objs) = self.object_streams.borrow().get(&stream) {
            return objs.get(&num).cloned().unwrap_or(Object::Null);
        }
        let objs: HashMap<u32, Object> = match self.load(ObjRef { num: stream, gen: 0 }) {
            Object::Stream(s) => parse_object_stream(&s.dict, &s.raw).unwrap_or_default().into_iter().collect(),
            _ => HashMap::new(),
        };
        let out = objs.get(&num).cloned().unwrap_or(Object::Null);
        self.object_streams.borrow_mut().insert(stream, objs);
        out
    }

    pub fn catalog(&self) -> Option<Dict> {
        self.trailer.get("Root").and_then(|r| self.resolve_dict(r))
    }

    fn collect_pages(&mut self) -> Vec<Page> {
        let mut pages = Vec::new();
        let mut warnings = Vec::new();
        if let Some(root) = self.catalog().and_then(|c| c.get("Pages").cloned()) {
            let mut visited = HashSet::new();
            self.walk_pages(&root, &Inherited::default(), 0, &mut visited, &mut pages, &mut warnings);
        }
        if pages.is_empty() && self.recovered {
            // no usable tree: take page objects in object-number order
            let mut nums: Vec<u32> = self.xref.keys().copied().collect();
            nums.sort_unstable();
            for n in nums {
                let r = Object::Ref(ObjRef { num: n, gen: 0 });
                if let Some(d) = self.resolve_dict(&r) {
                    if d.get("Type").and_then(Object::as_name) == Some("Page") {
                        pages.push(self.make_page(Some(ObjRef { num: n, gen: 0 }), &d, &Inherited::default(), &mut warnings));
                    }
                }
            }
            if !pages.is_empty() {
                warnings.push("page tree unusable; pages taken from object scan".into());
            }
        }
        self.warnings.extend(warnings);
        pages
    }

    fn walk_pages(
        &self,
        node: &Object,
        inherited: &Inherited,
        depth: usize,
        visited: &mut HashSet<u32>,
        out: &mut Vec<Page>,
        warnings: &mut Vec<String>,
    ) {
        if depth > MAX_TREE_DEPTH {
            warnings.push("page tree too deep".into());
            return;
        }
        let id = node.as_ref();
        if let Some(r) = id {
            if !visited.insert(r.num) {
                warnings.push(format!("page tree cycle at {r}"));
                return;
            }
        }
        let Some(dict) = self.resolve_dict(node) else { return };
        let mut inh = inherited.clone();
        for key in ["Resources", "MediaBox", "CropBox", "Rotate"] {
            if let Some(v) = self.get(&dict, key) {
                inh.values.insert(key, v);
            }
        }
        let is_tree_node = dict.get("Type").and_then(Object::as_name) == Some("Pages")
            || (dict.contains_key("Kids") && dict.get("Type").and_then(Object::as_name) != Some("Page"));
        if is_tree_node {
            let kids = self.get(&dict, "Kids").and_then(|k| k.as_array().map(<[Object]>::to_vec)).unwrap_or_default();
            for kid in &kids {
                self.walk_pages(kid, &inh, depth + 1, visited, out, warnings);
            }
        } else {
            out.push(self.make_page(id, &dict, &inh, warnings));
        }
    }

    fn make_page(&self, id: Option<ObjRef>, dict: &Dict, inh: &Inherited, warnings: &mut Vec<String>) -> Page {
        let local = |k: &str| self.get(dict, k).or_else(|| inh.values.get(k).cloned());
        let media_box = match local("MediaBox").and_then(|o| self.rect(&o)) {
            Some(r) if r.width() > 0.0 && r.height() > 0.0 => r,
            _ => {
                warnings.push(format!("page {} lacks a usable media box; assuming 612x792", id.map_or("?".into(), |r| r.to_string())));
                DEFAULT_MEDIA_BOX
            }
        };
        let rotation = local("Rotate").and_then(|o| o.as_i64()).unwrap_or(0).rem_euclid(360);
        let rotation = (rotation / 90 * 90) as u16;
        let resources = local("Resources").and_then(|o| o.as_dict().cloned()).unwrap_or_default();
        let contents = match dict.get("Contents") {
            None => Vec::new(),
            Some(c) => match self.resolve(c) {
                Object::Array(a) => a,
                Object::Stream(_) => vec![c.clone()],
                _ => Vec::new(),
            },
        };
        Page { object: id, media_box, rotation, resources, contents }
    }

    pub fn rect(&self, o: &Object) -> Option<Rect> {
        let a = self.resolve(o);
        let v: Vec<f64> = a.as_array()?.iter().filter_map(|x| self.resolve(x).as_f64()).collect();
        (v.len() == 4).then(|| Rect::new(v[0], v[1], v[2], v[3]))
    }

    /// Decoded content stream of `page`, parts joined by newlines.
    pub fn page_content(&self, page: &Page) -> Result<Vec<u8>, String> {
        let mut out = Vec::new();
        let mut errors = Vec::new();
        for part in &page.contents {
            match self.resolve(part) {
                Object::Stream(s) => match decode_stream(&s.dict, &s.raw) {
                    Ok(bytes) => {
                        out.extend_from_slice(&bytes);
                        out.push(b'\n');
                    }
                    Err(e) => errors.push(e.to_string()),
                },
                Object::Null => errors.push("missing content stream".into()),
                _ => {}
            }
        }
        if out.is_empty() && !errors.is_empty() {
            return Err(errors.join("; "));
        }
        Ok(out)
    }

    /// Decoded bytes of a stream object.
    pub fn stream_data(&self, o: &Object) -> Option<(Dict, Vec<u8>)> {
        match self.resolve(o) {
            Object::Stream(s) => decode_stream(&s.dict, &s.raw).ok().map(|d| (s.dict, d)),
            _ => None,
        }
    }

    fn read_info(&self) -> Info {
        let Some(info) = self.trailer.get("Info").and_then(|i| self.resolve_dict(i)) else {
            return Info::default();
        };
        let text = |k: &str| {
            self.get(&info, k)
                .and_then(|o| o.as_str_bytes().map(decode_text_string))
                .map(|s| s.trim_matches('\0').to_string())
        };
        Info {
            creation_date: text("CreationDate"),
            creator: text("Creator"),
            producer: text("Producer"),
            title: text("Title"),
        }
    }
}

#[derive(Clone, Default)]
struct Inherited {
    values: BTreeMap<&'static str, Object>,
}

/// Finds `num gen` immediately before the `obj` keyword at `obj_pos`.
fn object_header_before(data: &[u8], obj_pos: usize) -> Option<(u32, u16, usize)> {
    let mut i = obj_pos;
    let skip_ws_back = |i: &mut usize| {
        while *i > 0 && crate::lexer::is_whitespace(data[*i - 1]) {
            *i -= 1;
        }
    };
    let digits_back = |i: &mut usize| -> Option<u64> {
        let end = *i;
        while *i > 0 && data[*i - 1].is_ascii_digit() && end - *i < 10 {
            *i -= 1;
        }
        if *i == end {
            return None;
        }
        std::str::from_utf8(&data[*i..end]).ok()?.parse().ok()
    };
    skip_ws_back(&mut i);
    if i == obj_pos {
        return None;
    }
    let gen = digits_back(&mut i)?;
    let before_gen = i;
    skip_ws_back(&mut i);
    if i == before_gen {
        return None;
    }
    let num = digits_back(&mut i)?;
    if i > 0 && !crate::lexer::is_whitespace(data[i - 1]) && !crate::lexer::is_delimiter(data[i - 1]) {
        return None;
    }
    if num > u32::MAX as u64 || gen > u16::MAX as u64 {
        return None;
    }
    Some((num as u32, gen as u16, i))
}

fn parse_object_stream(dict: &Dict, raw: &[u8]) -> Result<Vec<(u32, Object)>, String> {
    let data = decode_stream(dict, raw).map_err(|e| e.to_string())?;
    let n = dict.get("N").and_then(Object::as_i64).unwrap_or(0).max(0) as usize;
    let first = dict.get("First").and_then(Object::as_i64).unwrap_or(0).max(0) as usize;
    let mut lex = Lexer::new(&data);
    let mut header = Vec::with_capacity(n);
    for _ in 0..n {
        match (lex.next_token(), lex.next_token()) {
            (Ok(Token::Int(num)), Ok(Token::Int(off))) if num >= 0 && off >= 0 => header.push((num as u32, off as usize)),
            _ => break,
        }
    }
    let mut out = Vec::with_capacity(header.len());
    for (num, off) in header {
        if let Some(pos) = first.checked_add(off).filter(|p| *p < data.len()) {
            if let Ok(o) = Parser::at(&data, pos).parse_object() {
                out.push((num, o));
            }
        }
    }
    Ok(out)
}
