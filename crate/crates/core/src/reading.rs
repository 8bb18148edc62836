//! Reading order by recursive XY-cut, then line grouping inside leaf blocks.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::layout::{Rect, Token};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReadingOrderConfig {
    /// Minimum gutter between columns, in median token heights.
    pub column_gap: f64,
    /// Minimum vertical gap between blocks, in median token heights.
    pub block_gap: f64,
    /// Tokens whose centre lies within this many median heights of a line's
    /// running mean centre join that line.
    pub line_tolerance: f64,
    /// Vertical cuts tried when no direct cut is wide enough.
    pub max_probe_cuts: usize,
}

impl Default for ReadingOrderConfig {
    fn default() -> Self {
        ReadingOrderConfig {
            column_gap: 1.0,
            block_gap: 1.0,
            line_tolerance: 0.5,
            max_probe_cuts: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    X,
    Y,
}

fn span(r: &Rect, axis: Axis) -> (f64, f64) {
    match axis {
        Axis::X => (r.x0, r.x1),
        Axis::Y => (r.y0, r.y1),
    }
}

/// Gaps in the projection of `tokens` onto `axis`, as (width, midpoint),
/// ordered by position.
fn gaps(tokens: &[Token], axis: Axis) -> Vec<(f64, f64)> {
    let mut spans: Vec<(f64, f64)> = tokens.iter().map(|t| span(&t.bbox, axis)).collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out = Vec::new();
    let mut reach = f64::NEG_INFINITY;
    for (lo, hi) in spans {
        if reach.is_finite() && lo > reach {
            out.push((lo - reach, (lo + reach) / 2.0));
        }
        reach = reach.max(hi);
    }
    out
}

fn widest(gaps: &[(f64, f64)], min: f64) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for &(w, m) in gaps {
        if w >= min && best.is_none_or(|(bw, _)| w > bw) {
            best = Some((w, m));
        }
    }
    best.map(|(_, m)| m)
}

fn split_at(tokens: Vec<Token>, axis: Axis, cut: f64) -> (Vec<Token>, Vec<Token>) {
    let (low, high): (Vec<Token>, Vec<Token>) = tokens.into_iter().partition(|t| span(&t.bbox, axis).1 <= cut);
    (low, high)
}

fn y_extent<'a>(tokens: impl Iterator<Item = &'a Token>) -> f64 {
    let (lo, hi) = tokens.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t.bbox.y0), hi.max(t.bbox.y1)));
    (hi - lo).max(0.0)
}

fn canonical_cmp(a: &Token, b: &Token) -> Ordering {
    b.bbox
        .y1
        .total_cmp(&a.bbox.y1)
        .then(a.bbox.x0.total_cmp(&b.bbox.x0))
        .then(b.bbox.y0.total_cmp(&a.bbox.y0))
        .then(a.bbox.x1.total_cmp(&b.bbox.x1))
        .then_with(|| a.text.cmp(&b.text))
        .then(a.visible.cmp(&b.visible))
        .then(a.page_index.cmp(&b.page_index))
}

fn median_height(tokens: &[Token]) -> f64 {
    let mut h: Vec<f64> = tokens.iter().map(|t| t.bbox.height()).filter(|h| *h > 0.0).collect();
    if h.is_empty() {
        return 1.0;
    }
    h.sort_by(f64::total_cmp);
    h[h.len() / 2]
}

fn is_rtl(c: char) -> bool {
    matches!(c as u32,
        0x0590..=0x05FF | 0x0600..=0x06FF | 0x0700..=0x074F | 0x0750..=0x077F
        | 0x0780..=0x07BF | 0x08A0..=0x08FF | 0xFB1D..=0xFDFF | 0xFE70..=0xFEFF)
}

/// True when more than half the letters on the line are right-to-left.
pub fn line_is_rtl(line: &[Token]) -> bool {
    let (mut rtl, mut total) = (0usize, 0usize);
    for c in line.iter().flat_map(|t| t.text.chars()).filter(|c| c.is_alphabetic()) {
        total += 1;
        rtl += is_rtl(c) as usize;
    }
    rtl * 2 > total
}

struct Cutter {
    cfg: ReadingOrderConfig,
    unit: f64,
    out: Vec<Token>,
    lines: usize,
}

impl Cutter {
    fn cut(&mut self, tokens: Vec<Token>) {
        if tokens.len() <= 1 {
            return self.leaf(tokens);
        }
        // A single line is never split into columns.
        let multi_line = y_extent(tokens.iter()) > 2.0 * self.unit;
        let xg = gaps(&tokens, Axis::X);
        if let Some(c) = widest(&xg, self.cfg.column_gap * self.unit).filter(|_| multi_line) {
            let (left, right) = split_at(tokens, Axis::X, c);
            self.cut(left);
            return self.cut(right);
        }
        let yg = gaps(&tokens, Axis::Y);
        if let Some(c) = widest(&yg, self.cfg.block_gap * self.unit) {
            let (bottom, top) = split_at(tokens, Axis::Y, c);
            self.cut(top);
            return self.cut(bottom);
        }
        // Columns under a full-width heading are separated from it only by
        // an ordinary line gap; probe such cuts for one exposing a gutter.
        let mut probes = yg.clone();
        probes.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
        let min_col = self.cfg.column_gap * self.unit;
        for &(_, c) in probes.iter().take(self.cfg.max_probe_cuts) {
            let (bottom, top): (Vec<&Token>, Vec<&Token>) = tokens.iter().partition(|t| t.bbox.y1 <= c);
            let exposes = |part: &[&Token]| {
                let owned: Vec<Token> = part.iter().map(|t| (*t).clone()).collect();
                y_extent(owned.iter()) > 2.0 * self.unit && widest(&gaps(&owned, Axis::X), min_col).is_some()
            };
            if exposes(&top) || exposes(&bottom) {
                let (bottom, top) = split_at(tokens, Axis::Y, c);
                self.cut(top);
                return self.cut(bottom);
            }
        }
        self.leaf(tokens)
    }

    fn leaf(&mut self, mut tokens: Vec<Token>) {
        if tokens.is_empty() {
            return;
        }
        tokens.sort_by(|a, b| {
            b.bbox
                .center_y()
                .total_cmp(&a.bbox.center_y())
                .then_with(|| canonical_cmp(a, b))
        });
        let tol = self.cfg.line_tolerance * self.unit;
        let mut lines: Vec<(f64, Vec<Token>)> = Vec::new();
        for t in tokens {
            let cy = t.bbox.center_y();
            match lines.last_mut() {
                Some((mean, line)) if (cy - *mean).abs() < tol => {
                    line.push(t);
                    *mean += (cy - *mean) / line.len() as f64;
                }
                _ => lines.push((cy, vec![t])),
            }
        }
        self.lines += lines.len();
        for (_, mut line) in lines {
            line.sort_by(|a, b| a.bbox.x0.total_cmp(&b.bbox.x0).then_with(|| canonical_cmp(a, b)));
            if line_is_rtl(&line) {
                line.reverse();
            }
            self.out.extend(line);
        }
    }
}

/// Tokens in reading order together with the number of text lines found.
pub fn reading_order_with_lines(tokens: &[Token], cfg: &ReadingOrderConfig) -> (Vec<Token>, usize) {
    let mut sorted = tokens.to_vec();
    sorted.sort_by(canonical_cmp);
    let mut cutter = Cutter {
        cfg: *cfg,
        unit: median_height(&sorted),
        out: Vec::with_capacity(sorted.len()),
        lines: 0,
    };
    cutter.cut(sorted);
    (cutter.out, cutter.lines)
}

pub fn reading_order(tokens: &[Token]) -> Vec<Token> {
    reading_order_with_lines(tokens, &ReadingOrderConfig::default()).0
}

pub fn count_lines(tokens: &[Token]) -> usize {
    reading_order_with_lines(tokens, &ReadingOrderConfig::default()).1
}
