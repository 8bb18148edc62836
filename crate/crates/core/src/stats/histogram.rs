//! Bucketed and categorical histograms with an explicit undefined count.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Numeric histogram over `bucket_edges`.
///
/// Bucket `i` holds values in `[edges[i], edges[i + 1])`. The first and last
/// buckets are open-ended: smaller values land in bucket 0 and values at or
/// above the last edge land in the last bucket. NaN counts as undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bucket_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
    pub undefined_count: u64,
}

impl Histogram {
    /// Panics unless `edges` has at least two finite, strictly increasing
    /// values.
    pub fn new(edges: &[f64]) -> Histogram {
        assert!(edges.len() >= 2, "a histogram needs at least two edges");
        assert!(
            edges.iter().all(|e| e.is_finite()) && edges.windows(2).all(|w| w[0] < w[1]),
            "edges must be finite and strictly increasing"
        );
        Histogram {
            bucket_edges: edges.to_vec(),
            counts: vec![0; edges.len() - 1],
            total: 0,
            undefined_count: 0,
        }
    }

    /// Edges `start, start + step, …` up to and including `end`.
    pub fn uniform(start: f64, end: f64, step: f64) -> Histogram {
        let n = ((end - start) / step).round() as usize;
        let edges: Vec<f64> = (0..=n).map(|i| start + step * i as f64).collect();
        Histogram::new(&edges)
    }

    pub fn bucket_of(&self, v: f64) -> Option<usize> {
        if v.is_nan() {
            return None;
        }
        let edges = &self.bucket_edges;
        // first edge strictly greater than v, minus one
        let idx = edges.partition_point(|e| *e <= v);
        Some(idx.saturating_sub(1).min(self.counts.len() - 1))
    }

    pub fn add(&mut self, v: Option<f64>) {
        self.total += 1;
        match v.and_then(|v| self.bucket_of(v)) {
            Some(i) => self.counts[i] += 1,
            None => self.undefined_count += 1,
        }
    }

    pub fn add_value(&mut self, v: f64) {
        self.add(Some(v));
    }

    pub fn add_undefined(&mut self) {
        self.add(None);
    }

    pub fn defined(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_consistent(&self) -> bool {
        self.counts.len() + 1 == self.bucket_edges.len()
            && self.defined() + self.undefined_count == self.total
    }

    /// Adds `other` into `self`. Panics if the edges differ.
    pub fn merge(&mut self, other: &Histogram) {
        assert_eq!(self.bucket_edges, other.bucket_edges, "merging histograms with different edges");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self.undefined_count += other.undefined_count;
    }

    /// Fraction of defined values whose bucket lies inside `[lo, hi)`.
    pub fn fraction_within(&self, lo: f64, hi: f64) -> f64 {
        let defined = self.defined();
        if defined == 0 {
            return 0.0;
        }
        let edges = &self.bucket_edges;
        let inside: u64 = self
            .counts
            .iter()
            .enumerate()
            .filter(|(i, _)| edges[*i] >= lo && edges[i + 1] <= hi)
            .map(|(_, c)| *c)
            .sum();
        inside as f64 / defined as f64
    }

    /// `lower,upper,count` rows followed by an `undefined` row. The open
    /// ends are written as empty bounds.
    pub fn to_csv(&self) -> String {
        let edges = &self.bucket_edges;
        let last = self.counts.len() - 1;
        let mut s = String::from("lower,upper,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let lo = if i == 0 { String::new() } else { fmt_num(edges[i]) };
            let hi = if i == last { String::new() } else { fmt_num(edges[i + 1]) };
            let _ = writeln!(s, "{lo},{hi},{c}");
        }
        let _ = writeln!(s, "undefined,,{}", self.undefined_count);
        s
    }
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Histogram over a fixed list of labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryHistogram {
    pub categories: Vec<String>,
    pub counts: Vec<u64>,
    pub total: u64,
    pub undefined_count: u64,
}

impl CategoryHistogram {
    pub fn new<S: AsRef<str>>(categories: &[S]) -> CategoryHistogram {
        CategoryHistogram {
            categories: categories.iter().map(|c| c.as_ref().to_string()).collect(),
            counts: vec![0; categories.len()],
            total: 0,
            undefined_count: 0,
        }
    }

    pub fn add(&mut self, label: Option<&str>) {
        self.total += 1;
        match label.and_then(|l| self.categories.iter().position(|c| c == l)) {
            Some(i) => self.counts[i] += 1,
            None => self.undefined_count += 1,
        }
    }

    pub fn count(&self, label: &str) -> u64 {
        self.categories
            .iter()
            .position(|c| c == label)
            .map_or(0, |i| self.counts[i])
    }

    pub fn defined(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_consistent(&self) -> bool {
        self.counts.len() == self.categories.len()
            && self.defined() + self.undefined_count == self.total
    }

    pub fn merge(&mut self, other: &CategoryHistogram) {
        assert_eq!(self.categories, other.categories, "merging histograms with different categories");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self.undefined_count += other.undefined_count;
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("category,count\n");
        for (c, n) in self.categories.iter().zip(&self.counts) {
            let _ = writeln!(s, "{c},{n}");
        }
        let _ = writeln!(s, "undefined,{}", self.undefined_count);
        s
    }
}
