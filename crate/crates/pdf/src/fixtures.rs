//! Generated documents with known ground truth.

use crate::writer::{Content, PageSpec, PdfBuilder, XrefStyle};

const WORDS: &[&str] = &[
    "river", "stone", "paper", "window", "garden", "letter", "market", "silver", "harbor", "meadow", "lantern", "orchard",
    "thunder", "candle", "valley", "compass", "mirror", "forest", "winter", "bridge",
];

/// Exactly `n` characters of space-separated words.
pub fn filler(n: usize, seed: usize) -> String {
    let mut s = String::new();
    let mut i = seed;
    while s.len() < n {
        if !s.is_empty() {
            s.push(' ');
        }
        s.push_str(WORDS[i % WORDS.len()]);
        i = (i * 7 + 3) % 1009;
    }
    s.truncate(n);
    if s.ends_with(' ') {
        s.pop();
        s.push('x');
    }
    s
}

/// Lines of roughly 60 characters totalling exactly `n` characters.
fn filler_lines(n: usize, seed: usize) -> Vec<String> {
    let text = filler(n, seed);
    let mut out = Vec::new();
    let mut rest = text.as_str();
    while rest.len() > 60 {
        let cut = rest[..60].rfind(' ').map(|i| i + 1).unwrap_or(60);
        out.push(rest[..cut].to_string());
        rest = &rest[cut..];
    }
    if !rest.is_empty() {
        out.push(rest.to_string());
    }
    out
}

fn text_block(c: &mut Content, font: crate::writer::FontId, lines: &[String], top: f64) {
    for (i, l) in lines.iter().enumerate() {
        c.text(font, 11.0, 72.0, top - 14.0 * i as f64, l);
    }
}

fn text_page(b: &mut PdfBuilder, chars: usize, seed: usize) -> PageSpec {
    let font = b.base14_font("Helvetica");
    let mut p = PageSpec::a4();
    text_block(&mut p.content, font, &filler_lines(chars, seed), 760.0);
    p
}

#[derive(Debug, Clone)]
pub struct LabeledPdf {
    pub name: String,
    pub bytes: Vec<u8>,
    pub born_digital: bool,
}

fn labeled(name: &str, b: PdfBuilder, born_digital: bool) -> LabeledPdf {
    LabeledPdf {
        name: name.into(),
        bytes: b.build(),
        born_digital,
    }
}

/// Thirty documents: ten text-only above the threshold, five text-only at
/// or below it, five with images, five with hidden text, five mixed.
pub fn born_digital_suite() -> Vec<LabeledPdf> {
    let mut out = Vec::new();

    // text-only, more than 100 characters
    for (i, &(chars, style)) in [
        (101usize, 0u8),
        (500, 1),
        (2000, 2),
        (800, 3),
        (300, 4),
        (150, 5),
        (1200, 6),
        (400, 7),
        (640, 8),
        (250, 9),
    ]
    .iter()
    .enumerate()
    {
        let mut b = PdfBuilder::new();
        match style {
            1 => b = b.compressed(true),
            2 => b = b.xref_style(XrefStyle::Stream).compressed(true),
            3 => b = b.with_object_streams(true).compressed(true),
            _ => {}
        }
        match style {
            7 => {
                let f = b.unicode_font();
                let mut p = PageSpec::a4();
                for (k, l) in filler_lines(chars, i).iter().enumerate() {
                    let l: String = l.chars().map(|c| if c == 'a' { 'ä' } else { c }).collect();
                    p.content.text(f, 11.0, 72.0, 760.0 - 14.0 * k as f64, &l);
                }
                b.page(p);
                out.push(labeled(&format!("text_{i:02}_unicode"), b, true));
                continue;
            }
            8 => {
                let p1 = text_page(&mut b, chars / 2, i);
                let p2 = text_page(&mut b, chars / 2, i + 1);
                b.page(p1);
                b.page(p2);
                out.push(labeled(&format!("text_{i:02}_two_pages"), b, true));
                continue;
            }
            _ => {}
        }
        let mut page = text_page(&mut b, chars, i);
        match style {
            4 => page = page.rotated(90),
            5 => {
                // a clipping-only text run counts neither way
                let f = b.base14_font("Times-Roman");
                page.content.text_mode(f, 11.0, 72.0, 100.0, "clip path text", 7);
            }
            6 => {
                let f = b.base14_font("Courier");
                page.content.text_mode(f, 11.0, 72.0, 100.0, "outlined heading", 2);
            }
            9 => {
                let f = b.base14_font("Helvetica");
                let gs = b.alpha_state(1.0, 1.0);
                page.content.gstate(gs);
                page.content.text_mode(f, 11.0, 72.0, 90.0, "stroked", 1);
            }
            _ => {}
        }
        b.page(page);
        out.push(labeled(&format!("text_{i:02}"), b, true));
    }

    // text-only, at most 100 characters
    for (i, chars) in [0usize, 20, 99, 100, 60].into_iter().enumerate() {
        let mut b = PdfBuilder::new();
        if i == 4 {
            // 60 + 40 across two pages
            let p1 = text_page(&mut b, 60, i);
            let p2 = text_page(&mut b, 40, i + 1);
            b.page(p1);
            b.page(p2);
        } else {
            let p = text_page(&mut b, chars, i);
            b.page(p);
        }
        out.push(labeled(&format!("short_{i:02}_{chars}"), b, false));
    }

    // images
    for i in 0..5 {
        let mut b = PdfBuilder::new();
        let mut p = text_page(&mut b, 400, 10 + i);
        match i {
            0 => {
                let im = b.image();
                p.content.image(im, 72.0, 100.0, 200.0, 150.0);
            }
            1 => {
                p.content.inline_image(72.0, 100.0, 50.0, 50.0);
            }
            2 => {
                let im = b.image();
                let mut form = Content::new();
                form.image(im, 0.0, 0.0, 100.0, 100.0);
                let f = b.form(form);
                p.content.form(f);
            }
            3 => {
                let im = b.image();
                p.content.image(im, 72.0, 100.0, 200.0, 150.0);
                let mut p2 = text_page(&mut b, 200, 20);
                p2.content.image(im, 72.0, 100.0, 200.0, 150.0);
                b.page(p.clone());
                p = p2;
            }
            _ => {
                // image-only scan page
                let im = b.image();
                p = PageSpec::a4();
                p.content.image(im, 0.0, 0.0, 595.0, 842.0);
            }
        }
        b.page(p);
        out.push(labeled(&format!("image_{i:02}"), b, false));
    }

    // hidden text
    for i in 0..5 {
        let mut b = PdfBuilder::new();
        let mut p = text_page(&mut b, 300, 30 + i);
        let f = b.base14_font("Helvetica");
        match i {
            0 => {
                p.content.text_mode(f, 11.0, 72.0, 80.0, "invisible words", 3);
            }
            1 => {
                let gs = b.alpha_state(0.0, 1.0);
                p.content.save().gstate(gs);
                p.content.text(f, 11.0, 72.0, 80.0, "transparent fill");
                p.content.restore();
            }
            2 => {
                let mut form = Content::new();
                form.text_mode(f, 11.0, 72.0, 80.0, "form layer", 3);
                let fm = b.form(form);
                p.content.form(fm);
            }
            3 => {
                let gs = b.alpha_state(1.0, 0.0);
                p.content.save().gstate(gs);
                p.content.text_mode(f, 11.0, 72.0, 80.0, "transparent stroke", 1);
                p.content.restore();
            }
            _ => {
                p = PageSpec::a4();
                let lines = filler_lines(600, 34);
                for (k, l) in lines.iter().enumerate() {
                    p.content.text_mode(f, 11.0, 72.0, 760.0 - 14.0 * k as f64, l, 3);
                }
            }
        }
        b.page(p);
        out.push(labeled(&format!("hidden_{i:02}"), b, false));
    }

    // mixed: scanned-with-OCR and combinations
    for i in 0..5 {
        let mut b = PdfBuilder::new();
        let f = b.base14_font("Helvetica");
        let im = b.image();
        let mut p = PageSpec::letter();
        let lines = filler_lines(500, 40 + i);
        match i {
            0 => {
                // classic OCR sandwich: page image under invisible text
                p.content.image(im, 0.0, 0.0, 612.0, 792.0);
                for (k, l) in lines.iter().enumerate() {
                    p.content.text_mode(f, 11.0, 72.0, 740.0 - 14.0 * k as f64, l, 3);
                }
            }
            1 => {
                for (k, l) in lines.iter().enumerate() {
                    p.content.text(f, 11.0, 72.0, 740.0 - 14.0 * k as f64, l);
                }
                p.content.text_mode(f, 11.0, 72.0, 80.0, "ocr", 3);
                p.content.inline_image(300.0, 80.0, 20.0, 20.0);
            }
            2 => {
                p.content.image(im, 0.0, 0.0, 612.0, 792.0);
                let gs = b.alpha_state(0.0, 0.0);
                p.content.save().gstate(gs);
                for (k, l) in lines.iter().enumerate() {
                    p.content.text(f, 11.0, 72.0, 740.0 - 14.0 * k as f64, l);
                }
                p.content.restore();
            }
            3 => {
                // born-digital first page, scanned second page
                for (k, l) in lines.iter().enumerate() {
                    p.content.text(f, 11.0, 72.0, 740.0 - 14.0 * k as f64, l);
                }
                let mut p2 = PageSpec::letter();
                p2.content.image(im, 0.0, 0.0, 612.0, 792.0);
                p2.content.text_mode(f, 11.0, 72.0, 700.0, "scanned page text", 3);
                b.page(p.clone());
                p = p2;
            }
            _ => {
                let mut form = Content::new();
                form.image(im, 0.0, 0.0, 612.0, 792.0);
                form.text_mode(f, 11.0, 72.0, 700.0, "layer", 3);
                let fm = b.form(form);
                for (k, l) in lines.iter().enumerate() {
                    p.content.text(f, 11.0, 72.0, 740.0 - 14.0 * k as f64, l);
                }
                p.content.form(fm);
            }
        }
        b.page(p);
        out.push(labeled(&format!("mixed_{i:02}"), b.compressed(i % 2 == 0), false));
    }
    out
}

/// One text line per entry, top to bottom, single column.
pub fn single_column(lines: &[&str]) -> PdfBuilder {
    let mut b = PdfBuilder::new();
    let f = b.base14_font("Helvetica");
    let mut p = PageSpec::letter();
    for (i, l) in lines.iter().enumerate() {
        p.content.text(f, 10.0, 72.0, 720.0 - 14.0 * i as f64, l);
    }
    b.page(p);
    b
}

/// Two columns of lines; the left column is drawn after the right one so
/// that stream order differs from reading order.
pub fn two_column(left: &[&str], right: &[&str]) -> PdfBuilder {
    let mut b = PdfBuilder::new();
    let f = b.base14_font("Helvetica");
    let mut p = PageSpec::letter();
    for (i, l) in right.iter().enumerate() {
        p.content.text(f, 10.0, 320.0, 720.0 - 14.0 * i as f64, l);
    }
    for (i, l) in left.iter().enumerate() {
        p.content.text(f, 10.0, 72.0, 720.0 - 14.0 * i as f64, l);
    }
    b.page(p);
    b
}
