//! Glyph names, simple-font base encodings and base-14 metrics.

use crate::fontdata::{self, Base14};

/// Unicode text for a glyph name: the Adobe glyph list, then the `uniXXXX`
/// and `uXXXX[XX]` conventions.
pub fn glyph_to_unicode(name: &str) -> Option<&'static str> {
    if name.is_empty() {
        return None;
    }
    fontdata::GLYPH_LIST
        .binary_search_by(|(g, _)| (*g).cmp(name))
        .ok()
        .map(|i| fontdata::GLYPH_LIST[i].1)
}

/// Like [`glyph_to_unicode`] but also decodes `uniXXXX…`, `uXXXX` and
/// suffixed names such as `a.sc` or `f_f`.
pub fn glyph_name_text(name: &str) -> Option<String> {
    if let Some(s) = glyph_to_unicode(name) {
        return Some(s.to_string());
    }
    let base = name.split('.').next().unwrap_or(name);
    if base.contains('_') {
        let parts: Option<String> = base.split('_').map(glyph_name_text).collect();
        return parts;
    }
    if let Some(hex) = base.strip_prefix("uni") {
        if hex.len() >= 4 && hex.len() % 4 == 0 {
            let units: Option<Vec<u16>> = hex
                .as_bytes()
                .chunks(4)
                .map(|c| u16::from_str_radix(std::str::from_utf8(c).ok()?, 16).ok())
                .collect();
            return units.and_then(|u| String::from_utf16(&u).ok());
        }
    }
    if let Some(hex) = base.strip_prefix('u') {
        if (4..=6).contains(&hex.len()) {
            return u32::from_str_radix(hex, 16).ok().and_then(char::from_u32).map(String::from);
        }
    }
    if base != name {
        return glyph_to_unicode(base).map(str::to_string);
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseEncoding {
    Standard,
    WinAnsi,
    MacRoman,
    MacExpert,
    Symbol,
    ZapfDingbats,
}

impl BaseEncoding {
    pub fn from_name(name: &str) -> Option<BaseEncoding> {
        match name {
            "StandardEncoding" => Some(BaseEncoding::Standard),
            "WinAnsiEncoding" => Some(BaseEncoding::WinAnsi),
            "MacRomanEncoding" => Some(BaseEncoding::MacRoman),
            "MacExpertEncoding" => Some(BaseEncoding::MacExpert),
            _ => None,
        }
    }

    pub fn table(self) -> &'static [&'static str; 256] {
        match self {
            BaseEncoding::Standard => &fontdata::STANDARD_ENCODING,
            BaseEncoding::WinAnsi => &fontdata::WIN_ANSI_ENCODING,
            BaseEncoding::MacRoman => &fontdata::MAC_ROMAN_ENCODING,
            BaseEncoding::MacExpert => &fontdata::MAC_EXPERT_ENCODING,
            BaseEncoding::Symbol => &fontdata::SYMBOL_ENCODING,
            BaseEncoding::ZapfDingbats => &fontdata::ZAPF_DINGBATS_ENCODING,
        }
    }
}

/// Canonical base-14 name for a font name, accepting common aliases and
/// subset prefixes such as `ABCDEF+Arial,Bold`.
pub fn base14_name(font_name: &str) -> Option<&'static str> {
    let name = match font_name.split_once('+') {
        Some((tag, rest)) if tag.len() == 6 && tag.bytes().all(|b| b.is_ascii_uppercase()) => rest,
        _ => font_name,
    };
    let lower = name.to_ascii_lowercase().replace([',', ' '], "-");
    let bold = lower.contains("bold");
    let italic = lower.contains("italic") || lower.contains("oblique");
    let family = if lower.starts_with("courier") {
        "Courier"
    } else if lower.starts_with("helvetica") || lower.starts_with("arial") {
        "Helvetica"
    } else if lower.starts_with("times") {
        "Times"
    } else if lower.starts_with("symbol") {
        return Some("Symbol");
    } else if lower.starts_with("zapfdingbats") {
        return Some("ZapfDingbats");
    } else {
        return None;
    };
    Some(match (family, bold, italic) {
        ("Courier", false, false) => "Courier",
        ("Courier", true, false) => "Courier-Bold",
        ("Courier", false, true) => "Courier-Oblique",
        ("Courier", true, true) => "Courier-BoldOblique",
        ("Helvetica", false, false) => "Helvetica",
        ("Helvetica", true, false) => "Helvetica-Bold",
        ("Helvetica", false, true) => "Helvetica-Oblique",
        ("Helvetica", true, true) => "Helvetica-BoldOblique",
        ("Times", false, false) => "Times-Roman",
        ("Times", true, false) => "Times-Bold",
        ("Times", false, true) => "Times-Italic",
        _ => "Times-BoldItalic",
    })
}

pub fn base14(name: &str) -> Option<&'static Base14> {
    fontdata::BASE14.iter().find(|f| f.name == name)
}

impl Base14 {
    pub fn width_of(&self, glyph: &str) -> Option<u16> {
        self.widths
            .binary_search_by(|(g, _)| (*g).cmp(glyph))
            .ok()
            .map(|i| self.widths[i].1)
    }

    /// Ascent and descent in 1/1000 em; fonts without them in the AFM
    /// tables get a generic box.
    pub fn vertical_metrics(&self) -> (f64, f64) {
        if self.ascent == 0 && self.descent == 0 {
            (800.0, -200.0)
        } else {
            (self.ascent as f64, self.descent as f64)
        }
    }

    pub fn builtin_encoding(&self) -> BaseEncoding {
        match self.name {
            "Symbol" => BaseEncoding::Symbol,
            "ZapfDingbats" => BaseEncoding::ZapfDingbats,
            _ => BaseEncoding::Standard,
        }
    }
}
