//! Page size classification by side ratio.

use serde::{Deserialize, Serialize};

pub const RATIO_TOLERANCE: f64 = 0.02;
/// 792 / 612, the US Letter ratio.
pub const LETTER_RATIO: f64 = 792.0 / 612.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Series {
    #[serde(rename = "ABC_series")]
    AbcSeries,
    #[serde(rename = "LETTER")]
    Letter,
    Other,
}

impl Series {
    pub fn as_str(self) -> &'static str {
        match self {
            Series::AbcSeries => "ABC_series",
            Series::Letter => "LETTER",
            Series::Other => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Vertical,
    Horizontal,
}

impl Orientation {
    /// Vertical when the page is at least as tall as it is wide.
    pub fn of(width: f64, height: f64) -> Orientation {
        if height >= width {
            Orientation::Vertical
        } else {
            Orientation::Horizontal
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Vertical => "vertical",
            Orientation::Horizontal => "horizontal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FormatClass {
    pub series: Series,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("page dimensions must be positive, got {width} x {height}")]
pub struct InvalidDimensions {
    pub width: f64,
    pub height: f64,
}

pub fn side_ratio(width: f64, height: f64) -> f64 {
    width.max(height) / width.min(height)
}

pub fn classify_page_format(width: f64, height: f64) -> Result<FormatClass, InvalidDimensions> {
    if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
        return Err(InvalidDimensions { width, height });
    }
    let r = side_ratio(width, height);
    let series = if (r - std::f64::consts::SQRT_2).abs() <= RATIO_TOLERANCE {
        Series::AbcSeries
    } else if (r - LETTER_RATIO).abs() <= RATIO_TOLERANCE {
        Series::Letter
    } else {
        Series::Other
    };
    Ok(FormatClass {
        series,
        orientation: Orientation::of(width, height),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_sizes() {
        let a4 = classify_page_format(595.0, 842.0).unwrap();
        assert_eq!(a4, FormatClass { series: Series::AbcSeries, orientation: Orientation::Vertical });
        let letter = classify_page_format(612.0, 792.0).unwrap();
        assert_eq!(letter.series, Series::Letter);
        let wide = classify_page_format(1000.0, 500.0).unwrap();
        assert_eq!(wide, FormatClass { series: Series::Other, orientation: Orientation::Horizontal });
        assert!(classify_page_format(0.0, 10.0).is_err());
        assert!(classify_page_format(-1.0, 10.0).is_err());
        assert!(classify_page_format(f64::NAN, 10.0).is_err());
    }

    proptest! {
        #[test]
        fn swapping_sides_keeps_series(w in 1.0f64..5000.0, h in 1.0f64..5000.0) {
            prop_assume!(w != h);
            let a = classify_page_format(w, h).unwrap();
            let b = classify_page_format(h, w).unwrap();
            prop_assert_eq!(a.series, b.series);
            prop_assert_ne!(a.orientation, b.orientation);
        }
    }
}
