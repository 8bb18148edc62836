//! Content stream parsing into operator/operand lists.

use crate::lexer::{is_whitespace, LexError, Parser, Token};
use crate::object::{Dict, Object};

#[derive(Debug, Clone, PartialEq)]
pub enum ContentItem {
    Op { operator: String, operands: Vec<Object> },
    InlineImage { dict: Dict },
}

const MAX_OPERANDS: usize = 64;

/// Parses a content stream. Malformed fragments are skipped and reported.
pub fn parse_content(data: &[u8]) -> (Vec<ContentItem>, Vec<String>) {
    let mut items = Vec::new();
    let mut warnings = Vec::new();
    let mut p = Parser::new(data);
    let mut operands: Vec<Object> = Vec::new();
    loop {
        let tok = match p.lex.next_token() {
            Ok(t) => t,
            Err(LexError::Eof) => break,
            Err(e) => {
                warnings.push(e.to_string());
                p.lex.pos += 1;
                continue;
            }
        };
        match tok {
            Token::Keyword(k) => {
                let op = String::from_utf8_lossy(&k).into_owned();
                match op.as_str() {
                    "true" => operands.push(Object::Bool(true)),
                    "false" => operands.push(Object::Bool(false)),
                    "null" => operands.push(Object::Null),
                    "BI" => {
                        operands.clear();
                        match inline_image(&mut p) {
                            Some(dict) => items.push(ContentItem::InlineImage { dict }),
                            None => {
                                warnings.push("unterminated inline image".into());
                                break;
                            }
                        }
                    }
                    _ => items.push(ContentItem::Op { operator: op, operands: std::mem::take(&mut operands) }),
                }
            }
            Token::ArrayEnd | Token::DictEnd => warnings.push(format!("stray {tok:?}")),
            t => match p.object_from_token(t) {
                Ok(o) => {
                    if operands.len() < MAX_OPERANDS {
                        operands.push(o);
                    }
                }
                Err(e) => warnings.push(e.to_string()),
            },
        }
    }
    (items, warnings)
}

/// Reads the dictionary after `BI`, then skips the image data and `EI`.
fn inline_image(p: &mut Parser<'_>) -> Option<Dict> {
    let mut dict = Dict::new();
    loop {
        match p.lex.next_token().ok()? {
            Token::Keyword(k) if k == b"ID" => break,
            Token::Name(key) => {
                let t = p.lex.next_token().ok()?;
                let v = p.object_from_token(t).unwrap_or(Object::Null);
                dict.insert(key, v);
            }
            _ => {}
        }
    }
    let data = p.lex.data;
    let start = p.lex.pos + 1;
    if start > data.len() {
        return None;
    }
    // exact size when the data is unfiltered
    if dict.get("F").or_else(|| dict.get("Filter")).is_none() {
        if let Some(len) = raw_image_len(&dict) {
            let end = start + len;
            let mut i = end;
            while i < data.len() && is_whitespace(data[i]) {
                i += 1;
            }
            if data.get(i..i + 2) == Some(b"EI") {
                p.lex.pos = i + 2;
                return Some(dict);
            }
        }
    }
    let mut i = start;
    while i + 2 <= data.len() {
        if data[i] == b'E'
            && data[i + 1] == b'I'
            && (i == start || is_whitespace(data[i - 1]))
            && data.get(i + 2).is_none_or(|b| is_whitespace(*b))
        {
            p.lex.pos = i + 2;
            return Some(dict);
        }
        i += 1;
    }
    None
}

fn raw_image_len(d: &Dict) -> Option<usize> {
    let get = |a: &str, b: &str| d.get(a).or_else(|| d.get(b)).and_then(Object::as_i64);
    let w = get("W", "Width")? as usize;
    let h = get("H", "Height")? as usize;
    let mask = matches!(d.get("IM").or_else(|| d.get("ImageMask")), Some(Object::Bool(true)));
    let bpc = if mask { 1 } else { get("BPC", "BitsPerComponent").unwrap_or(8) as usize };
    let colors = match d.get("CS").or_else(|| d.get("ColorSpace")).and_then(Object::as_name) {
        _ if mask => 1,
        Some("G" | "DeviceGray" | "I" | "Indexed") => 1,
        Some("RGB" | "DeviceRGB") => 3,
        Some("CMYK" | "DeviceCMYK") => 4,
        _ => return None,
    };
    Some((w * colors * bpc).div_ceil(8) * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ops(items: &[ContentItem]) -> Vec<&str> {
        items
            .iter()
            .map(|i| match i {
                ContentItem::Op { operator, .. } => operator.as_str(),
                ContentItem::InlineImage { .. } => "<image>",
            })
            .collect()
    }

    #[test]
    fn operators_and_operands() {
        let (items, w) = parse_content(b"BT /F1 12 Tf 72 700 Td [(A) -250 (B)] TJ ET");
        assert!(w.is_empty());
        assert_eq!(ops(&items), vec!["BT", "Tf", "Td", "TJ", "ET"]);
        let ContentItem::Op { operands, .. } = &items[1] else { panic!() };
        assert_eq!(operands, &vec![Object::Name("F1".into()), Object::Int(12)]);
    }

    #[test]
    fn inline_images_are_skipped() {
        let mut src = b"q BI /W 2 /H 2 /CS /G /BPC 8 ID ".to_vec();
        src.extend_from_slice(&[b'E', b'I', 0, 0xFF]);
        src.extend_from_slice(b" EI Q BI /W 1 /H 1 /F /AHx ID 00> EI (x) Tj");
        let (items, w) = parse_content(&src);
        assert!(w.is_empty(), "{w:?}");
        assert_eq!(ops(&items), vec!["q", "<image>", "Q", "<image>", "Tj"]);
    }
}
