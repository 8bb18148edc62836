//! Token-box density grids in normalized page coordinates.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::format::Orientation;
use crate::layout::PageText;

pub const SHORT_EDGE_CELLS: usize = 100;
pub const LONG_EDGE_CELLS: usize = 141;

/// Row-major grid; row 0 is the top of the page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<f64>,
    pub page_count: u64,
}

impl HeatmapGrid {
    pub fn new(width: usize, height: usize) -> HeatmapGrid {
        HeatmapGrid {
            width,
            height,
            cells: vec![0.0; width * height],
            page_count: 0,
        }
    }

    pub fn for_orientation(o: Orientation) -> HeatmapGrid {
        match o {
            Orientation::Vertical => HeatmapGrid::new(SHORT_EDGE_CELLS, LONG_EDGE_CELLS),
            Orientation::Horizontal => HeatmapGrid::new(LONG_EDGE_CELLS, SHORT_EDGE_CELLS),
        }
    }

    pub fn cell(&self, col: usize, row: usize) -> f64 {
        self.cells[row * self.width + col]
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// Adds every token box of `page`, clipped to the page and scaled to
    /// the unit square, spreading its area over the cells it overlaps.
    /// Returns the normalized area added.
    pub fn add_page(&mut self, page: &PageText) -> f64 {
        self.page_count += 1;
        let media = page.media_box();
        if media.is_empty() {
            return 0.0;
        }
        let (gw, gh) = (self.width as f64, self.height as f64);
        let cell_area = 1.0 / (gw * gh);
        let mut added = 0.0;
        for t in &page.tokens {
            let Some(b) = t.bbox.intersect(&media) else { continue };
            // grid units, y flipped so row 0 is the top edge
            let x0 = (b.x0 - media.x0) / media.width() * gw;
            let x1 = (b.x1 - media.x0) / media.width() * gw;
            let r0 = (media.y1 - b.y1) / media.height() * gh;
            let r1 = (media.y1 - b.y0) / media.height() * gh;
            let (c_lo, c_hi) = (x0.floor() as usize, (x1.ceil() as usize).min(self.width));
            let (r_lo, r_hi) = (r0.floor() as usize, (r1.ceil() as usize).min(self.height));
            for row in r_lo..r_hi {
                let dy = r1.min(row as f64 + 1.0) - r0.max(row as f64);
                if dy <= 0.0 {
                    continue;
                }
                for col in c_lo..c_hi {
                    let dx = x1.min(col as f64 + 1.0) - x0.max(col as f64);
                    if dx <= 0.0 {
                        continue;
                    }
                    let m = dx * dy * cell_area;
                    self.cells[row * self.width + col] += m;
                    added += m;
                }
            }
        }
        added
    }

    pub fn merge(&mut self, other: &HeatmapGrid) {
        assert_eq!((self.width, self.height), (other.width, other.height));
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a += b;
        }
        self.page_count += other.page_count;
    }

    /// Cells divided by the largest cell (all zero when empty).
    pub fn normalized(&self) -> Vec<f64> {
        let max = self.cells.iter().copied().fold(0.0, f64::max);
        if max <= 0.0 {
            return vec![0.0; self.cells.len()];
        }
        self.cells.iter().map(|c| c / max).collect()
    }

    /// Sum of each column, left to right.
    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.width)
            .map(|c| (0..self.height).map(|r| self.cell(c, r)).sum())
            .collect()
    }

    /// Plain PGM (P2), brighter meaning more token mass.
    pub fn to_pgm(&self) -> String {
        let norm = self.normalized();
        let mut s = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in norm.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|v| ((v * 255.0).round() as u8).to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Normalized values, one grid row per line.
    pub fn to_csv(&self) -> String {
        let norm = self.normalized();
        let mut s = String::new();
        for row in norm.chunks(self.width) {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{v:.6}");
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let norm = self.normalized();
        let rows: Vec<&[f64]> = norm.chunks(self.width).collect();
        serde_json::json!({
            "width": self.width,
            "height": self.height,
            "page_count": self.page_count,
            "total_mass": self.total_mass(),
            "normalized": rows,
        })
        .to_string()
    }
}

/// Accumulates `pages` into a fresh grid for `orientation`.
pub fn accumulate_heatmap<'a, I>(pages: I, orientation: Orientation) -> HeatmapGrid
where
    I: IntoIterator<Item = &'a PageText>,
{
    let mut grid = HeatmapGrid::for_orientation(orientation);
    for p in pages {
        grid.add_page(p);
    }
    grid
}
