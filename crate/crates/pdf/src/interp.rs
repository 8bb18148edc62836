//! Content stream interpreter: tracks graphics and text state and reports
//! every shown glyph with its box in default user space, plus the images
//! the page draws.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use pdfcorpus_core::layout::Rect;

use crate::content::{parse_content, ContentItem};
use crate::document::{Page, PdfDocument};
use crate::font::{Font, FontKind};
use crate::object::{Dict, ObjRef, Object};

/// Row-vector affine matrix `[a b c d e f]`.
pub type Matrix = [f64; 6];

pub const IDENTITY: Matrix = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0];

/// `m` applied first, then `n`.
pub fn mul(m: &Matrix, n: &Matrix) -> Matrix {
    [
        m[0] * n[0] + m[1] * n[2],
        m[0] * n[1] + m[1] * n[3],
        m[2] * n[0] + m[3] * n[2],
        m[2] * n[1] + m[3] * n[3],
        m[4] * n[0] + m[5] * n[2] + n[4],
        m[4] * n[1] + m[5] * n[3] + n[5],
    ]
}

pub fn apply(m: &Matrix, x: f64, y: f64) -> (f64, f64) {
    (m[0] * x + m[2] * y + m[4], m[1] * x + m[3] * y + m[5])
}

const MAX_FORM_DEPTH: usize = 12;
const MAX_STATE_STACK: usize = 256;

/// How a glyph's render mode and alpha classify it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    Visible,
    /// Render mode 3, or a painting mode with zero alpha.
    Hidden,
    /// Render mode 7: adds to the clip path only.
    ClipOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlyphEvent {
    /// `None` when the code has no Unicode mapping.
    pub text: Option<String>,
    pub code_len: u8,
    pub bbox: Rect,
    /// Baseline start and end in user space.
    pub origin: (f64, f64),
    pub end: (f64, f64),
    /// Font size after all transforms.
    pub size: f64,
    pub visibility: Visibility,
    /// Font is Type3 (text only counts when mapped).
    pub type3: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PageEvents {
    pub glyphs: Vec<GlyphEvent>,
    /// Image XObjects drawn, by object reference.
    pub images: BTreeSet<ObjRef>,
    pub inline_images: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone)]
struct GState {
    ctm: Matrix,
    font: Option<Rc<Font>>,
    size: f64,
    char_spacing: f64,
    word_spacing: f64,
    h_scale: f64,
    leading: f64,
    rise: f64,
    render_mode: i64,
    fill_alpha: f64,
    stroke_alpha: f64,
}

impl GState {
    fn new(ctm: Matrix) -> GState {
        GState {
            ctm,
            font: None,
            size: 0.0,
            char_spacing: 0.0,
            word_spacing: 0.0,
            h_scale: 1.0,
            leading: 0.0,
            rise: 0.0,
            render_mode: 0,
            fill_alpha: 1.0,
            stroke_alpha: 1.0,
        }
    }

    fn visibility(&self) -> Visibility {
        let (fill, stroke) = (self.fill_alpha > 0.0, self.stroke_alpha > 0.0);
        match self.render_mode {
            3 => Visibility::Hidden,
            7 => Visibility::ClipOnly,
            0 | 4 if !fill => Visibility::Hidden,
            1 | 5 if !stroke => Visibility::Hidden,
            2 | 6 if !fill && !stroke => Visibility::Hidden,
            _ => Visibility::Visible,
        }
    }
}

pub struct Interpreter<'d> {
    doc: &'d PdfDocument,
    fonts: HashMap<ObjRef, Rc<Font>>,
    forms_active: HashSet<ObjRef>,
    events: PageEvents,
    fallback_font_warned: bool,
}

impl<'d> Interpreter<'d> {
    pub fn new(doc: &'d PdfDocument) -> Interpreter<'d> {
        Interpreter {
            doc,
            fonts: HashMap::new(),
            forms_active: HashSet::new(),
            events: PageEvents::default(),
            fallback_font_warned: false,
        }
    }

    /// Runs the page's content streams.
    pub fn run_page(mut self, page: &Page) -> PageEvents {
        match self.doc.page_content(page) {
            Ok(content) => {
                let mut gs = GState::new(IDENTITY);
                self.run(&content, &page.resources, &mut gs, 0);
            }
            Err(e) => self.events.warnings.push(format!("content stream: {e}")),
        }
        self.events
    }

    fn run(&mut self, content: &[u8], resources: &Dict, gs: &mut GState, depth: usize) {
        let (items, warnings) = parse_content(content);
        self.events.warnings.extend(warnings);
        let mut stack: Vec<GState> = Vec::new();
        let mut tm = IDENTITY;
        let mut tlm = IDENTITY;
        for item in items {
            let (op, args) = match item {
                ContentItem::InlineImage { .. } => {
                    self.events.inline_images += 1;
                    continue;
                }
                ContentItem::Op { operator, operands } => (operator, operands),
            };
            let num = |i: usize| args.get(i).and_then(Object::as_f64);
            match op.as_str() {
                "q" => {
                    if stack.len() < MAX_STATE_STACK {
                        stack.push(gs.clone());
                    }
                }
                "Q" => {
                    if let Some(s) = stack.pop() {
                        *gs = s;
                    }
                }
                "cm" => {
                    if let Some(m) = matrix_from(&args) {
                        gs.ctm = mul(&m, &gs.ctm);
                    }
                }
                "BT" => {
                    tm = IDENTITY;
                    tlm = IDENTITY;
                }
                "ET" => {}
                "Tf" => {
                    if let Some(name) = args.first().and_then(Object::as_name) {
                        gs.font = Some(self.font(resources, name));
                    }
                    gs.size = num(1).unwrap_or(gs.size);
                }
                "Tc" => gs.char_spacing = num(0).unwrap_or(0.0),
                "Tw" => gs.word_spacing = num(0).unwrap_or(0.0),
                "Tz" => gs.h_scale = num(0).unwrap_or(100.0) / 100.0,
                "TL" => gs.leading = num(0).unwrap_or(0.0),
                "Ts" => gs.rise = num(0).unwrap_or(0.0),
                "Tr" => gs.render_mode = args.first().and_then(Object::as_i64).unwrap_or(0),
                "Td" | "TD" => {
                    let (tx, ty) = (num(0).unwrap_or(0.0), num(1).unwrap_or(0.0));
                    if op == "TD" {
                        gs.leading = -ty;
                    }
                    tlm = mul(&[1.0, 0.0, 0.0, 1.0, tx, ty], &tlm);
                    tm = tlm;
                }
                "Tm" => {
                    if let Some(m) = matrix_from(&args) {
                        tlm = m;
                        tm = m;
                    }
                }
                "T*" => {
                    tlm = mul(&[1.0, 0.0, 0.0, 1.0, 0.0, -gs.leading], &tlm);
                    tm = tlm;
                }
                "Tj" | "'" | "\"" => {
                    if op == "\"" {
                        gs.word_spacing = num(0).unwrap_or(gs.word_spacing);
                        gs.char_spacing = num(1).unwrap_or(gs.char_spacing);
                    }
                    if op != "Tj" {
                        tlm = mul(&[1.0, 0.0, 0.0, 1.0, 0.0, -gs.leading], &tlm);
                        tm = tlm;
                    }
                    if let Some(s) = args.last().and_then(Object::as_str_bytes) {
                        self.show(s, gs, &mut tm);
                    }
                }
                "TJ" => {
                    for el in args.first().and_then(Object::as_array).unwrap_or(&[]) {
                        match el {
                            Object::Str(s) => self.show(s, gs, &mut tm),
                            o => {
                                if let Some(n) = o.as_f64() {
                                    let vertical = gs.font.as_ref().is_some_and(|f| f.vertical);
                                    let shift = -n / 1000.0 * gs.size;
                                    let t = if vertical { [1.0, 0.0, 0.0, 1.0, 0.0, shift] } else { [1.0, 0.0, 0.0, 1.0, shift * gs.h_scale, 0.0] };
                                    tm = mul(&t, &tm);
                                }
                            }
                        }
                    }
                }
                "gs" => {
                    if let Some(name) = args.first().and_then(Object::as_name) {
                        self.ext_gstate(resources, name, gs);
                    }
                }
                "Do" => {
                    if let Some(name) = args.first().and_then(Object::as_name) {
                        self.xobject(resources, name, gs, depth);
                    }
                }
                _ => {}
            }
        }
    }

    fn font(&mut self, resources: &Dict, name: &str) -> Rc<Font> {
        let entry = self
            .doc
            .get(resources, "Font")
            .and_then(|f| f.as_dict().cloned())
            .and_then(|fonts| fonts.get(name).cloned());
        match entry {
            Some(Object::Ref(r)) => {
                if let Some(f) = self.fonts.get(&r) {
                    return f.clone();
                }
                let font = match self.doc.resolve_dict(&Object::Ref(r)) {
                    Some(d) => Rc::new(Font::load(self.doc, &d)),
                    None => self.missing_font(name),
                };
                self.fonts.insert(r, font.clone());
                font
            }
            Some(Object::Dict(d)) => Rc::new(Font::load(self.doc, &d)),
            _ => self.missing_font(name),
        }
    }

    fn missing_font(&mut self, name: &str) -> Rc<Font> {
        if !self.fallback_font_warned {
            self.events.warnings.push(format!("font /{name} not found; using Helvetica metrics"));
            self.fallback_font_warned = true;
        }
        Rc::new(Font::fallback())
    }

    fn ext_gstate(&mut self, resources: &Dict, name: &str, gs: &mut GState) {
        let Some(d) = self
            .doc
            .get(resources, "ExtGState")
            .and_then(|e| e.as_dict().cloned())
            .and_then(|e| e.get(name).cloned())
            .and_then(|o| self.doc.resolve_dict(&o))
        else {
            return;
        };
        if let Some(a) = self.doc.get(&d, "ca").and_then(|o| o.as_f64()) {
            gs.fill_alpha = a;
        }
        if let Some(a) = self.doc.get(&d, "CA").and_then(|o| o.as_f64()) {
            gs.stroke_alpha = a;
        }
        if let Some(Object::Array(f)) = self.doc.get(&d, "Font") {
            if let (Some(Object::Ref(r)), Some(size)) = (f.first(), f.get(1).and_then(Object::as_f64)) {
                let font = match self.fonts.get(r) {
                    Some(font) => font.clone(),
                    None => {
                        let d = self.doc.resolve_dict(&Object::Ref(*r)).unwrap_or_default();
                        let font = Rc::new(Font::load(self.doc, &d));
                        self.fonts.insert(*r, font.clone());
                        font
                    }
                };
                gs.font = Some(font);
                gs.size = size;
            }
        }
    }

    fn xobject(&mut self, resources: &Dict, name: &str, gs: &GState, depth: usize) {
        let Some(entry) = self
            .doc
            .get(resources, "XObject")
            .and_then(|x| x.as_dict().cloned())
            .and_then(|x| x.get(name).cloned())
        else {
            self.events.warnings.push(format!("XObject /{name} not found"));
            return;
        };
        let Some(r) = entry.as_ref() else { return };
        let Object::Stream(stream) = self.doc.resolve(&entry) else { return };
        match stream.dict.get("Subtype").and_then(Object::as_name) {
            Some("Image") => {
                self.events.images.insert(r);
            }
            Some("Form") => {
                if depth >= MAX_FORM_DEPTH || !self.forms_active.insert(r) {
                    self.events.warnings.push(format!("form XObject {r} nested too deeply or recursive"));
                    return;
                }
                let content = match crate::filters::decode_stream(&stream.dict, &stream.raw) {
                    Ok(c) => c,
                    Err(e) => {
                        self.events.warnings.push(format!("form XObject {r}: {e}"));
                        self.forms_active.remove(&r);
                        return;
                    }
                };
                let form_resources = self
                    .doc
                    .get(&stream.dict, "Resources")
                    .and_then(|o| o.as_dict().cloned())
                    .unwrap_or_else(|| resources.clone());
                let mut inner = gs.clone();
                if let Some(m) = self.doc.get(&stream.dict, "Matrix").and_then(|o| matrix_from(o.as_array().unwrap_or(&[]))) {
                    inner.ctm = mul(&m, &inner.ctm);
                }
                self.run(&content, &form_resources, &mut inner, depth + 1);
                self.forms_active.remove(&r);
            }
            _ => {}
        }
    }

    fn show(&mut self, bytes: &[u8], gs: &GState, tm: &mut Matrix) {
        let font = match &gs.font {
            Some(f) => f.clone(),
            None => {
                
                self.missing_font("(none)")
            }
        };
        let visibility = gs.visibility();
        let fs = gs.size;
        for g in font.decode(bytes) {
            let trm = mul(&[fs * gs.h_scale, 0.0, 0.0, fs, 0.0, gs.rise], &mul(tm, &gs.ctm));
            let spacing = gs.char_spacing + if g.is_word_space() { gs.word_spacing } else { 0.0 };
            let (lo, hi) = (font.descent * font.glyph_scale, font.ascent * font.glyph_scale);
            let (bx0, bx1, by0, by1, advance);
            if font.vertical {
                // vertical writing: origin at the top centre, advance downwards
                (bx0, bx1, by0, by1) = (-0.5, 0.5, -1.0, 0.0);
                advance = -(fs + spacing);
            } else {
                (bx0, bx1, by0, by1) = (0.0, g.width, lo, hi);
                advance = (g.width * fs + spacing) * gs.h_scale;
            }
            let corners = [apply(&trm, bx0, by0), apply(&trm, bx1, by0), apply(&trm, bx0, by1), apply(&trm, bx1, by1)];
            let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (x, y) in corners {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
            let origin = apply(&trm, 0.0, 0.0);
            let end = if font.vertical { apply(&trm, 0.0, -1.0) } else { apply(&trm, g.width, 0.0) };
            let size = (trm[2] * trm[2] + trm[3] * trm[3]).sqrt();
            if x0.is_finite() && y0.is_finite() && x1.is_finite() && y1.is_finite() {
                self.events.glyphs.push(GlyphEvent {
                    text: g.text,
                    code_len: g.code_len,
                    bbox: Rect { x0, y0, x1, y1 },
                    origin,
                    end,
                    size,
                    visibility,
                    type3: font.kind == FontKind::Type3,
                });
            }
            let t = if font.vertical { [1.0, 0.0, 0.0, 1.0, 0.0, advance] } else { [1.0, 0.0, 0.0, 1.0, advance, 0.0] };
            *tm = mul(&t, tm);
        }
    }
}

fn matrix_from(args: &[Object]) -> Option<Matrix> {
    let v: Vec<f64> = args.iter().filter_map(Object::as_f64).collect();
    (v.len() == 6 && v.iter().all(|x| x.is_finite())).then(|| [v[0], v[1], v[2], v[3], v[4], v[5]])
}

/// Interprets one page.
pub fn page_events(doc: &PdfDocument, page: &Page) -> PageEvents {
    Interpreter::new(doc).run_page(page)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_order() {
        let translate = [1.0, 0.0, 0.0, 1.0, 10.0, 0.0];
        let scale = [2.0, 0.0, 0.0, 2.0, 0.0, 0.0];
        // translate then scale: (1,0) -> (11,0) -> (22,0)
        assert_eq!(apply(&mul(&translate, &scale), 1.0, 0.0), (22.0, 0.0));
        assert_eq!(apply(&mul(&scale, &translate), 1.0, 0.0), (12.0, 0.0));
    }

    #[test]
    fn visibility_rules() {
        let mut gs = GState::new(IDENTITY);
        for (mode, v) in [(0, Visibility::Visible), (3, Visibility::Hidden), (7, Visibility::ClipOnly), (6, Visibility::Visible)] {
            gs.render_mode = mode;
            assert_eq!(gs.visibility(), v);
        }
        gs.render_mode = 0;
        gs.fill_alpha = 0.0;
        assert_eq!(gs.visibility(), Visibility::Hidden);
        gs.render_mode = 1;
        assert_eq!(gs.visibility(), Visibility::Visible);
    }
}
