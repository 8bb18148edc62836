//! Exact area of a union of axis-aligned rectangles.
//!
//! Sweep a vertical line over the x-coordinates of all box edges while a
//! segment tree over the compressed y-coordinates tracks how much of the
//! line is covered. Runs in O(n log n).

use crate::layout::{PageText, Rect};

struct CoverTree {
    ys: Vec<f64>,
    count: Vec<u32>,
    covered: Vec<f64>,
}

impl CoverTree {
    fn new(ys: Vec<f64>) -> CoverTree {
        let n = ys.len().saturating_sub(1).max(1);
        CoverTree {
            ys,
            count: vec![0; 4 * n],
            covered: vec![0.0; 4 * n],
        }
    }

    fn segments(&self) -> usize {
        self.ys.len() - 1
    }

    /// Adds `delta` to the cover count of elementary segments `[lo, hi)`.
    fn update(&mut self, node: usize, l: usize, r: usize, lo: usize, hi: usize, delta: i32) {
        if hi <= l || r <= lo {
            return;
        }
        if lo <= l && r <= hi {
            self.count[node] = self.count[node].wrapping_add_signed(delta);
        } else {
            let mid = (l + r) / 2;
            self.update(2 * node, l, mid, lo, hi, delta);
            self.update(2 * node + 1, mid, r, lo, hi, delta);
        }
        self.covered[node] = if self.count[node] > 0 {
            self.ys[r] - self.ys[l]
        } else if r - l == 1 {
            0.0
        } else {
            self.covered[2 * node] + self.covered[2 * node + 1]
        };
    }
}

/// Area of the union of `rects`. Empty rectangles contribute nothing.
pub fn union_area(rects: &[Rect]) -> f64 {
    let rects: Vec<&Rect> = rects.iter().filter(|r| !r.is_empty()).collect();
    if rects.is_empty() {
        return 0.0;
    }
    let mut ys: Vec<f64> = rects.iter().flat_map(|r| [r.y0, r.y1]).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let y_index = |y: f64| ys.partition_point(|v| *v < y);

    // (x, y-range, +1 open / -1 close); closes sort first at equal x
    let mut events: Vec<(f64, usize, usize, i32)> = Vec::with_capacity(rects.len() * 2);
    for r in &rects {
        let (a, b) = (y_index(r.y0), y_index(r.y1));
        events.push((r.x0, a, b, 1));
        events.push((r.x1, a, b, -1));
    }
    events.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.3.cmp(&q.3)));

    let mut tree = CoverTree::new(ys);
    let n = tree.segments();
    let mut area = 0.0;
    let mut last_x = events[0].0;
    for (x, a, b, delta) in events {
        area += tree.covered[1] * (x - last_x);
        last_x = x;
        tree.update(1, 0, n, a, b, delta);
    }
    area
}

/// Fraction of the page covered by the union of its token boxes, after
/// clipping each box to `media_box`.
pub fn page_coverage(page: &PageText, media_box: &Rect) -> f64 {
    let page_area = media_box.area();
    if page_area <= 0.0 {
        return 0.0;
    }
    let clipped: Vec<Rect> = page
        .tokens
        .iter()
        .filter_map(|t| t.bbox.intersect(media_box))
        .collect();
    (union_area(&clipped) / page_area).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::Token;
    use proptest::prelude::*;

    fn page_with(boxes: &[Rect], w: f64, h: f64) -> PageText {
        let mut p = PageText::empty(0, w, h);
        p.tokens = boxes
            .iter()
            .map(|b| Token { text: "x".into(), page_index: 0, bbox: *b, visible: true })
            .collect();
        p
    }

    /// Counts covered cells of an n×n grid by cell center.
    fn raster(boxes: &[Rect], w: f64, h: f64, n: usize) -> f64 {
        let mut hit = 0usize;
        for j in 0..n {
            let y = (j as f64 + 0.5) * h / n as f64;
            for i in 0..n {
                let x = (i as f64 + 0.5) * w / n as f64;
                if boxes.iter().any(|b| x >= b.x0 && x < b.x1 && y >= b.y0 && y < b.y1) {
                    hit += 1;
                }
            }
        }
        hit as f64 / (n * n) as f64
    }

    #[test]
    fn half_page() {
        let p = page_with(&[Rect::new(0.0, 0.0, 50.0, 100.0)], 100.0, 100.0);
        assert_eq!(page_coverage(&p, &p.media_box()), 0.5);
    }

    #[test]
    fn identical_boxes_count_once() {
        let b = Rect::new(0.0, 0.0, 30.0, 100.0);
        let p = page_with(&[b, b], 100.0, 100.0);
        assert!((page_coverage(&p, &p.media_box()) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn empty_page_is_zero() {
        let p = page_with(&[], 100.0, 100.0);
        assert_eq!(page_coverage(&p, &p.media_box()), 0.0);
    }

    #[test]
    fn clipping() {
        let p = page_with(&[Rect::new(-50.0, -50.0, 50.0, 50.0)], 100.0, 100.0);
        assert_eq!(page_coverage(&p, &p.media_box()), 0.25);
    }

    #[test]
    fn inclusion_exclusion_pair() {
        let a = Rect::new(0.0, 0.0, 4.0, 4.0);
        let b = Rect::new(2.0, 1.0, 6.0, 3.0);
        let inter = a.intersect(&b).unwrap().area();
        assert_eq!(union_area(&[a, b]), a.area() + b.area() - inter);
    }

    fn arb_box() -> impl Strategy<Value = Rect> {
        (0.0f64..100.0, 0.0f64..100.0, 0.5f64..40.0, 0.5f64..40.0)
            .prop_map(|(x, y, w, h)| Rect::new(x, y, (x + w).min(100.0), (y + h).min(100.0)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn agrees_with_rasterization(boxes in proptest::collection::vec(arb_box(), 0..50)) {
            let p = page_with(&boxes, 100.0, 100.0);
            let exact = page_coverage(&p, &p.media_box());
            let grid = raster(&boxes, 100.0, 100.0, 400);
            prop_assert!((exact - grid).abs() < 0.01, "{exact} vs {grid}");
        }

        #[test]
        fn bounded_and_scale_invariant(boxes in proptest::collection::vec(arb_box(), 0..30), k in 0.1f64..20.0) {
            let p = page_with(&boxes, 100.0, 100.0);
            let c = page_coverage(&p, &p.media_box());
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert_eq!(c == 0.0, boxes.iter().all(|b| b.is_empty()));
            let scaled: Vec<Rect> = boxes.iter().map(|b| Rect::new(b.x0 * k, b.y0 * k, b.x1 * k, b.y1 * k)).collect();
            let q = page_with(&scaled, 100.0 * k, 100.0 * k);
            prop_assert!((page_coverage(&q, &q.media_box()) - c).abs() < 1e-9);
        }

        #[test]
        fn order_independent(mut boxes in proptest::collection::vec(arb_box(), 0..30)) {
            let a = union_area(&boxes);
            boxes.reverse();
            prop_assert!((union_area(&boxes) - a).abs() < 1e-9);
        }
    }
}
