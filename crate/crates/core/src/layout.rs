//! Page-level token data shared by native extraction, hOCR import and the
//! statistics suite.
//!
//! On disk a document is JSON-lines, one object per page:
//!
//! ```text
//! {"page":0,"width":595.0,"height":842.0,"line_count":1,"tokens":[["Hello",72.0,697.5,100.7,708.6,true]]}
//! ```
//!
//! Coordinates are PDF points with the origin at the bottom-left of the
//! upright (rotation-normalized) page.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    /// Builds a rectangle from two corners in any order.
    pub fn new(xa: f64, ya: f64, xb: f64, yb: f64) -> Rect {
        Rect {
            x0: xa.min(xb),
            y0: ya.min(yb),
            x1: xa.max(xb),
            y1: ya.max(yb),
        }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.width() * self.height()
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.x1 > self.x0 && self.y1 > self.y0)
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        };
        (!r.is_empty()).then_some(r)
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    pub fn center_y(&self) -> f64 {
        (self.y0 + self.y1) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub page_index: usize,
    pub bbox: Rect,
    pub visible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageText {
    pub page_index: usize,
    pub width: f64,
    pub height: f64,
    pub tokens: Vec<Token>,
    pub line_count: usize,
}

impl PageText {
    pub fn empty(page_index: usize, width: f64, height: f64) -> PageText {
        PageText {
            page_index,
            width,
            height,
            tokens: Vec::new(),
            line_count: 0,
        }
    }

    pub fn media_box(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width, self.height)
    }

    pub fn word_count(&self) -> usize {
        self.tokens.len()
    }

    /// Space-joined token text in stored order.
    pub fn text(&self) -> String {
        let mut s = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(&t.text);
        }
        s
    }
}

type TokenRow = (String, f64, f64, f64, f64, bool);

#[derive(Serialize, Deserialize)]
struct PageLine {
    page: usize,
    width: f64,
    height: f64,
    line_count: usize,
    tokens: Vec<TokenRow>,
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

pub fn page_to_json(p: &PageText) -> String {
    let line = PageLine {
        page: p.page_index,
        width: p.width,
        height: p.height,
        line_count: p.line_count,
        tokens: p
            .tokens
            .iter()
            .map(|t| {
                (
                    t.text.clone(),
                    round3(t.bbox.x0),
                    round3(t.bbox.y0),
                    round3(t.bbox.x1),
                    round3(t.bbox.y1),
                    t.visible,
                )
            })
            .collect(),
    };
    serde_json::to_string(&line).expect("page serializes")
}

pub fn page_from_json(line: &str) -> Result<PageText, serde_json::Error> {
    let p: PageLine = serde_json::from_str(line)?;
    Ok(PageText {
        page_index: p.page,
        width: p.width,
        height: p.height,
        line_count: p.line_count,
        tokens: p
            .tokens
            .into_iter()
            .map(|(text, x0, y0, x1, y1, visible)| Token {
                text,
                page_index: p.page,
                bbox: Rect::new(x0, y0, x1, y1),
                visible,
            })
            .collect(),
    })
}

pub fn write_pages<W: Write>(mut w: W, pages: &[PageText]) -> io::Result<()> {
    for p in pages {
        writeln!(w, "{}", page_to_json(p))?;
    }
    Ok(())
}

pub fn read_pages<R: BufRead>(r: R) -> io::Result<Vec<PageText>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(page_from_json(&line).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HocrError {
    #[error("no ocr_page element found")]
    NoPages,
    #[error("ocr_page {0} has no usable bbox")]
    PageWithoutBbox(usize),
}

/// Reads hOCR (as produced by Tesseract) into pages.
///
/// hOCR boxes are pixel coordinates with a top-left origin. They are
/// flipped to a bottom-left origin and scaled to points: to `page_sizes`
/// when given (one `(width, height)` per page), otherwise by the
/// `scan_res` DPI in the page title, otherwise 1:1.
pub fn parse_hocr(html: &str, page_sizes: Option<&[(f64, f64)]>) -> Result<Vec<PageText>, HocrError> {
    struct PageCtx {
        px_w: f64,
        px_h: f64,
        sx: f64,
        sy: f64,
        page: PageText,
    }
    struct WordCtx {
        depth: usize,
        bbox: [f64; 4],
        text: String,
    }

    let mut pages: Vec<PageText> = Vec::new();
    let mut cur: Option<PageCtx> = None;
    let mut word: Option<WordCtx> = None;
    let mut depth = 0usize;
    let mut rest = html;

    let finish_word = |w: WordCtx, ctx: &mut PageCtx| {
        let text = decode_entities(&w.text);
        let parts: Vec<&str> = text.split_whitespace().collect();
        if parts.is_empty() {
            return;
        }
        let [x0, y0, x1, y1] = w.bbox;
        let total: usize = parts.iter().map(|p| p.chars().count()).sum();
        let mut offset = 0usize;
        for part in parts {
            let n = part.chars().count();
            let a = x0 + (x1 - x0) * offset as f64 / total as f64;
            let b = x0 + (x1 - x0) * (offset + n) as f64 / total as f64;
            offset += n;
            let bbox = Rect::new(
                a * ctx.sx,
                (ctx.px_h - y1) * ctx.sy,
                b * ctx.sx,
                (ctx.px_h - y0) * ctx.sy,
            );
            ctx.page.tokens.push(Token {
                text: part.to_string(),
                page_index: ctx.page.page_index,
                bbox,
                visible: true,
            });
        }
    };

    while let Some(lt) = rest.find('<') {
        if let Some(w) = word.as_mut() {
            w.text.push_str(&rest[..lt]);
        }
        rest = &rest[lt..];
        if rest.starts_with("<!--") {
            rest = rest.find("-->").map(|i| &rest[i + 3..]).unwrap_or("");
            continue;
        }
        let Some(gt) = rest.find('>') else { break };
        let tag = &rest[1..gt];
        rest = &rest[gt + 1..];
        if tag.starts_with('!') || tag.starts_with('?') {
            continue;
        }
        if let Some(_name) = tag.strip_prefix('/') {
            depth = depth.saturating_sub(1);
            if word.as_ref().is_some_and(|w| w.depth == depth) {
                let w = word.take().unwrap();
                if let Some(ctx) = cur.as_mut() {
                    finish_word(w, ctx);
                }
            }
            continue;
        }
        let name = tag
            .split(|c: char| c.is_whitespace() || c == '/')
            .next()
            .unwrap_or("")
            .to_ascii_lowercase();
        let self_closing = tag.ends_with('/')
            || matches!(name.as_str(), "br" | "meta" | "link" | "img" | "hr" | "input");
        let class = attr(tag, "class").unwrap_or_default();
        let title = attr(tag, "title").unwrap_or_default();
        let classes: Vec<&str> = class.split_whitespace().collect();

        if classes.contains(&"ocr_page") {
            if let Some(ctx) = cur.take() {
                pages.push(ctx.page);
            }
            let index = pages.len();
            let bbox = title_bbox(&title).ok_or(HocrError::PageWithoutBbox(index))?;
            let px_w = bbox[2] - bbox[0];
            let px_h = bbox[3] - bbox[1];
            if px_w <= 0.0 || px_h <= 0.0 {
                return Err(HocrError::PageWithoutBbox(index));
            }
            let (sx, sy) = match page_sizes.and_then(|s| s.get(index)) {
                Some(&(w, h)) => (w / px_w, h / px_h),
                None => match title_field(&title, "scan_res") {
                    Some(v) if v.len() >= 2 && v[0] > 0.0 && v[1] > 0.0 => (72.0 / v[0], 72.0 / v[1]),
                    _ => (1.0, 1.0),
                },
            };
            cur = Some(PageCtx {
                px_w,
                px_h,
                sx,
                sy,
                page: PageText::empty(index, px_w * sx, px_h * sy),
            });
        } else if classes.iter().any(|c| {
            matches!(*c, "ocr_line" | "ocrx_line" | "ocr_caption" | "ocr_header" | "ocr_textfloat")
        }) {
            if let Some(ctx) = cur.as_mut() {
                ctx.page.line_count += 1;
            }
        } else if classes.contains(&"ocrx_word") && !self_closing {
            if let Some(bbox) = title_bbox(&title) {
                word = Some(WordCtx {
                    depth,
                    bbox,
                    text: String::new(),
                });
            }
        }
        if !self_closing {
            depth += 1;
        }
    }
    if let Some(ctx) = cur.take() {
        let _ = ctx.px_w;
        pages.push(ctx.page);
    }
    if pages.is_empty() {
        return Err(HocrError::NoPages);
    }
    for p in &mut pages {
        p.line_count = p.line_count.min(p.tokens.len());
    }
    Ok(pages)
}

fn attr(tag: &str, name: &str) -> Option<String> {
    let mut search = tag;
    while let Some(pos) = search.find(name) {
        let before_ok = pos == 0
            || search[..pos]
                .chars()
                .next_back()
                .is_some_and(|c| c.is_whitespace());
        let after = search[pos + name.len()..].trim_start();
        if before_ok {
            if let Some(v) = after.strip_prefix('=') {
                let v = v.trim_start();
                let quote = v.chars().next()?;
                if quote == '"' || quote == '\'' {
                    let end = v[1..].find(quote)?;
                    return Some(v[1..1 + end].to_string());
                }
                let end = v.find(char::is_whitespace).unwrap_or(v.len());
                return Some(v[..end].to_string());
            }
        }
        search = &search[pos + name.len()..];
    }
    None
}

fn title_field(title: &str, key: &str) -> Option<Vec<f64>> {
    title.split(';').map(str::trim).find_map(|part| {
        let mut it = part.split_whitespace();
        (it.next() == Some(key)).then(|| it.filter_map(|v| v.parse().ok()).collect())
    })
}

fn title_bbox(title: &str) -> Option<[f64; 4]> {
    let v = title_field(title, "bbox")?;
    (v.len() == 4).then(|| [v[0], v[1], v[2], v[3]])
}

fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let Some(semi) = rest.find(';').filter(|&i| i <= 10) else {
            out.push('&');
            rest = &rest[1..];
            continue;
        };
        let ent = &rest[1..semi];
        let decoded = match ent {
            "amp" => Some('&'),
            "lt" => Some('<'),
            "gt" => Some('>'),
            "quot" => Some('"'),
            "apos" => Some('\''),
            "nbsp" => Some('\u{a0}'),
            _ => ent
                .strip_prefix("#x")
                .or_else(|| ent.strip_prefix("#X"))
                .and_then(|h| u32::from_str_radix(h, 16).ok())
                .or_else(|| ent.strip_prefix('#').and_then(|d| d.parse().ok()))
                .and_then(char::from_u32),
        };
        match decoded {
            Some(c) => {
                out.push(c);
                rest = &rest[semi + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const HOCR: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<html><head><meta name='ocr-system' content='tesseract'/></head><body>
<div class='ocr_page' id='page_1' title='image "a.png"; bbox 0 0 1000 2000; ppageno 0; scan_res 144 144'>
 <div class='ocr_carea' title="bbox 100 100 900 300">
  <p class='ocr_par'>
   <span class='ocr_line' title="bbox 100 100 900 140; baseline 0 -5">
    <span class='ocrx_word' title='bbox 100 100 300 140; x_wconf 95'>Zażółć</span>
    <span class='ocrx_word' title='bbox 320 100 500 140; x_wconf 95'><strong>R&amp;D</strong></span>
   </span>
   <span class='ocr_line' title="bbox 100 200 900 240">
    <span class='ocrx_word' title='bbox 100 200 400 240'>two words</span>
   </span>
  </p>
 </div>
</div>
<div class='ocr_page' title='bbox 0 0 500 500'></div>
</body></html>"#;

    #[test]
    fn hocr_words_lines_and_coordinates() {
        let pages = parse_hocr(HOCR, None).unwrap();
        assert_eq!(pages.len(), 2);
        let p = &pages[0];
        assert_eq!(p.line_count, 2);
        let words: Vec<&str> = p.tokens.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(words, ["Zażółć", "R&D", "two", "words"]);
        // 144 dpi → 0.5 pt per pixel, y flipped against the 2000 px height
        assert_eq!((p.width, p.height), (500.0, 1000.0));
        assert_eq!(p.tokens[0].bbox, Rect::new(50.0, 930.0, 150.0, 950.0));
        // split word boxes share the original box proportionally
        assert_eq!(p.tokens[2].bbox.x0, 50.0);
        assert_eq!(p.tokens[3].bbox.x1, 200.0);
        assert!(pages[1].tokens.is_empty());
    }

    #[test]
    fn hocr_explicit_page_sizes() {
        let pages = parse_hocr(HOCR, Some(&[(595.0, 842.0)])).unwrap();
        assert_eq!((pages[0].width, pages[0].height), (595.0, 842.0));
        assert_eq!((pages[1].width, pages[1].height), (500.0, 500.0));
    }

    #[test]
    fn hocr_without_pages_is_an_error() {
        assert_eq!(parse_hocr("<html></html>", None), Err(HocrError::NoPages));
    }

    #[test]
    fn page_json_round_trip() {
        let page = PageText {
            page_index: 3,
            width: 612.0,
            height: 792.0,
            line_count: 1,
            tokens: vec![Token {
                text: "Ünïcode".into(),
                page_index: 3,
                bbox: Rect::new(1.0, 2.0, 3.5, 4.25),
                visible: false,
            }],
        };
        let json = page_to_json(&page);
        assert!(json.starts_with(r#"{"page":3,"width":612.0,"height":792.0,"line_count":1,"tokens":[["Ünïcode",1.0,2.0,3.5,4.25,false]]"#));
        assert_eq!(page_from_json(&json).unwrap(), page);
    }

    #[test]
    fn rect_ops() {
        let a = Rect::new(2.0, 2.0, 0.0, 0.0);
        assert_eq!(a, Rect { x0: 0.0, y0: 0.0, x1: 2.0, y1: 2.0 });
        let b = Rect::new(1.0, 1.0, 3.0, 3.0);
        assert_eq!(a.intersect(&b).unwrap().area(), 1.0);
        assert!(a.intersect(&Rect::new(5.0, 5.0, 6.0, 6.0)).is_none());
        assert_eq!(a.union(&b).area(), 9.0);
    }
}
