//! Word tokens with page coordinates, in reading order.

use pdfcorpus_core::layout::{PageText, Rect, Token};
use pdfcorpus_core::reading::{reading_order_with_lines, ReadingOrderConfig};
use serde::{Deserialize, Serialize};

use crate::document::{Page, PdfDocument};
use crate::interp::{GlyphEvent, Visibility};
use crate::scan::guarded_page_events;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractConfig {
    /// Gap along the baseline that starts a new word, in font sizes.
    pub word_gap: f64,
    /// Offset across the baseline that starts a new word, in font sizes.
    pub baseline_shift: f64,
    pub reading: ReadingOrderConfig,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            word_gap: 0.25,
            baseline_shift: 0.5,
            reading: ReadingOrderConfig::default(),
        }
    }
}

/// Maps a point in default user space to upright page space with the origin
/// at the bottom-left corner of the displayed page.
pub fn to_upright(page: &Page, x: f64, y: f64) -> (f64, f64) {
    let mb = page.media_box;
    let (w, h) = (mb.width(), mb.height());
    let (x, y) = (x - mb.x0, y - mb.y0);
    match page.rotation % 360 {
        90 => (y, w - x),
        180 => (w - x, h - y),
        270 => (h - y, x),
        _ => (x, y),
    }
}

fn upright_rect(page: &Page, r: &Rect) -> Rect {
    let (ax, ay) = to_upright(page, r.x0, r.y0);
    let (bx, by) = to_upright(page, r.x1, r.y1);
    Rect::new(ax, ay, bx, by)
}

struct WordBuilder<'c> {
    cfg: &'c ExtractConfig,
    page_index: usize,
    words: Vec<(String, Rect, bool)>,
    text: String,
    bbox: Option<Rect>,
    visible: bool,
    last: Option<(f64, f64, (f64, f64), f64)>,
}

impl WordBuilder<'_> {
    fn flush(&mut self) {
        if let Some(b) = self.bbox.take() {
            if !self.text.is_empty() {
                self.words.push((std::mem::take(&mut self.text), b, self.visible));
            }
        }
        self.text.clear();
    }

    fn breaks_before(&self, g: &GlyphEvent) -> bool {
        let Some((ex, ey, dir, size)) = self.last else {
            return true;
        };
        let (dx, dy) = (g.origin.0 - ex, g.origin.1 - ey);
        let along = dx * dir.0 + dy * dir.1;
        let across = (dx * dir.1 - dy * dir.0).abs();
        let size = size.max(1e-6);
        along > self.cfg.word_gap * size || along < -self.cfg.baseline_shift * size || across > self.cfg.baseline_shift * size
    }

    fn push(&mut self, g: &GlyphEvent) {
        let visible = g.visibility == Visibility::Visible;
        if self.bbox.is_some() && (visible != self.visible || self.breaks_before(g)) {
            self.flush();
        }
        let (dx, dy) = (g.end.0 - g.origin.0, g.end.1 - g.origin.1);
        let len = dx.hypot(dy);
        let dir = if len > 1e-9 { (dx / len, dy / len) } else { self.last.map_or((1.0, 0.0), |l| l.2) };
        self.last = Some((g.end.0, g.end.1, dir, g.size));

        let text = match (&g.text, g.type3) {
            (Some(t), _) => t.as_str(),
            (None, true) => "",
            (None, false) => "\u{FFFD}",
        };
        let parts = text.split(char::is_whitespace).peekable();
        let mut first = true;
        for part in parts {
            if !first {
                self.flush();
            }
            first = false;
            if !part.is_empty() {
                self.text.push_str(part);
                self.bbox = Some(self.bbox.map_or(g.bbox, |b| b.union(&g.bbox)));
                self.visible = visible;
            }
        }
        if text.ends_with(char::is_whitespace) {
            self.flush();
        }
    }
}

/// Groups glyphs into words in content-stream order, then maps them to
/// upright page space and clips them to the page.
pub fn tokens_from_glyphs(glyphs: &[GlyphEvent], page: &Page, page_index: usize, cfg: &ExtractConfig) -> Vec<Token> {
    let mut b = WordBuilder {
        cfg,
        page_index,
        words: Vec::new(),
        text: String::new(),
        bbox: None,
        visible: true,
        last: None,
    };
    for g in glyphs.iter().filter(|g| g.visibility != Visibility::ClipOnly) {
        b.push(g);
    }
    b.flush();
    let (w, h) = page.effective_size();
    let clip = Rect::new(0.0, 0.0, w, h);
    b.words
        .into_iter()
        .filter_map(|(text, bbox, visible)| {
            let mut r = upright_rect(page, &bbox);
            // Zero-width glyphs still occupy a position.
            if r.width() <= 0.0 {
                r.x1 = r.x0 + 1e-3;
            }
            if r.height() <= 0.0 {
                r.y1 = r.y0 + 1e-3;
            }
            r.intersect(&clip).map(|bbox| Token {
                text,
                page_index: b.page_index,
                bbox,
                visible,
            })
        })
        .collect()
}

pub fn extract_page(doc: &PdfDocument, page_index: usize, cfg: &ExtractConfig) -> (PageText, Vec<String>) {
    let page = &doc.pages[page_index];
    let (w, h) = page.effective_size();
    let mut text = PageText::empty(page_index, w, h);
    let events = match guarded_page_events(doc, page_index) {
        Ok(e) => e,
        Err(msg) => return (text, vec![msg]),
    };
    let tokens = tokens_from_glyphs(&events.glyphs, page, page_index, cfg);
    let (ordered, lines) = reading_order_with_lines(&tokens, &cfg.reading);
    text.tokens = ordered;
    text.line_count = lines;
    (text, events.warnings)
}

/// Number of text lines on an extracted page.
pub fn count_lines(page: &PageText) -> usize {
    pdfcorpus_core::reading::count_lines(&page.tokens)
}

/// Every page of the document, in page order.
pub fn extract_tokens(doc: &PdfDocument) -> Vec<PageText> {
    extract_tokens_with(doc, &ExtractConfig::default()).0
}

pub fn extract_tokens_with(doc: &PdfDocument, cfg: &ExtractConfig) -> (Vec<PageText>, Vec<String>) {
    let mut pages = Vec::with_capacity(doc.pages.len());
    let mut warnings = Vec::new();
    for i in 0..doc.pages.len() {
        let (p, w) = extract_page(doc, i, cfg);
        pages.push(p);
        warnings.extend(w.into_iter().map(|w| format!("page {i}: {w}")));
    }
    (pages, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::object::Dict;

    fn page(rotation: u16) -> Page {
        Page {
            object: None,
            media_box: Rect::new(0.0, 0.0, 600.0, 800.0),
            rotation,
            resources: Dict::new(),
            contents: vec![],
        }
    }

    #[test]
    fn rotation_maps_corners() {
        assert_eq!(to_upright(&page(0), 10.0, 20.0), (10.0, 20.0));
        assert_eq!(to_upright(&page(90), 10.0, 20.0), (20.0, 590.0));
        assert_eq!(to_upright(&page(180), 10.0, 20.0), (590.0, 780.0));
        assert_eq!(to_upright(&page(270), 10.0, 20.0), (780.0, 10.0));
    }

    fn glyph(c: &str, x: f64, y: f64, w: f64) -> GlyphEvent {
        GlyphEvent {
            text: Some(c.into()),
            code_len: 1,
            bbox: Rect::new(x, y - 2.0, x + w, y + 8.0),
            origin: (x, y),
            end: (x + w, y),
            size: 10.0,
            visibility: Visibility::Visible,
            type3: false,
        }
    }

    #[test]
    fn words_split_on_space_and_gap() {
        let g = vec![
            glyph("a", 10.0, 100.0, 5.0),
            glyph("b", 15.0, 100.0, 5.0),
            glyph(" ", 20.0, 100.0, 3.0),
            glyph("c", 23.0, 100.0, 5.0),
            glyph("d", 40.0, 100.0, 5.0),
            glyph("e", 45.0, 50.0, 5.0),
        ];
        let t = tokens_from_glyphs(&g, &page(0), 0, &ExtractConfig::default());
        let words: Vec<&str> = t.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(words, ["ab", "c", "d", "e"]);
        assert_eq!(t[0].bbox, Rect::new(10.0, 98.0, 20.0, 108.0));
    }

    #[test]
    fn clipped_outside() {
        let g = vec![glyph("x", -50.0, 100.0, 5.0), glyph("y", 590.0, 100.0, 30.0)];
        let t = tokens_from_glyphs(&g, &page(0), 0, &ExtractConfig::default());
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].bbox.x1, 600.0);
    }
}
