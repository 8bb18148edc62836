//! CMap parsing for ToUnicode maps and embedded CID encodings.

use std::collections::HashMap;

use crate::lexer::{LexError, Lexer, Token};

const MAX_RANGE: u32 = 1 << 16;
const MAX_ENTRIES: usize = 1 << 20;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CMap {
    /// (low, high) byte strings of equal length.
    pub codespaces: Vec<(Vec<u8>, Vec<u8>)>,
    /// (code length, code) to Unicode text.
    pub unicode: HashMap<(u8, u32), String>,
    cids: HashMap<(u8, u32), u32>,
    cid_ranges: Vec<(u8, u32, u32, u32)>,
}

#[derive(Debug, Clone)]
enum Operand {
    Str(Vec<u8>),
    Int(i64),
    Array(Vec<Vec<u8>>),
}

fn be(bytes: &[u8]) -> u32 {
    bytes.iter().take(4).fold(0u32, |acc, b| acc << 8 | *b as u32)
}

fn utf16_text(bytes: &[u8]) -> String {
    if bytes.len() == 1 {
        return (bytes[0] as char).to_string();
    }
    let units: Vec<u16> = bytes
        .chunks(2)
        .map(|c| u16::from_be_bytes([c[0], *c.get(1).unwrap_or(&0)]))
        .collect();
    String::from_utf16_lossy(&units)
}

/// Adds `delta` to the last UTF-16 unit of a bfrange destination.
fn offset_text(base: &[u8], delta: u32) -> String {
    let mut b = base.to_vec();
    let n = b.len();
    if n >= 2 {
        let last = u16::from_be_bytes([b[n - 2], b[n - 1]]).wrapping_add(delta as u16);
        b[n - 2..].copy_from_slice(&last.to_be_bytes());
    } else if let Some(x) = b.last_mut() {
        *x = x.wrapping_add(delta as u8);
    }
    utf16_text(&b)
}

impl CMap {
    pub fn parse(data: &[u8]) -> CMap {
        let mut cmap = CMap::default();
        let mut lex = Lexer::new(data);
        let mut ops: Vec<Operand> = Vec::new();
        let mut section: Option<Vec<u8>> = None;
        let mut array: Option<Vec<Vec<u8>>> = None;
        loop {
            let tok = match lex.next_token() {
                Ok(t) => t,
                Err(LexError::Eof) => break,
                Err(_) => {
                    lex.pos += 1;
                    continue;
                }
            };
            match tok {
                Token::ArrayStart => array = Some(Vec::new()),
                Token::ArrayEnd => {
                    if let Some(items) = array.take() {
                        ops.push(Operand::Array(items));
                    }
                }
                Token::Str(s) => match array.as_mut() {
                    Some(a) => a.push(s),
                    None => ops.push(Operand::Str(s)),
                },
                Token::Int(i) => ops.push(Operand::Int(i)),
                Token::Keyword(k) if k.starts_with(b"begin") && k.len() > 5 => {
                    section = Some(k[5..].to_vec());
                    ops.clear();
                }
                Token::Keyword(k) if k.starts_with(b"end") => {
                    if let Some(name) = section.take() {
                        cmap.apply_section(&name, &ops);
                        if cmap.unicode.len() + cmap.cids.len() > MAX_ENTRIES {
                            break;
                        }
                    }
                    ops.clear();
                }
                _ => {}
            }
        }
        cmap
    }

    fn apply_section(&mut self, name: &[u8], ops: &[Operand]) {
        use Operand::*;
        match name {
            b"codespacerange" => {
                for pair in ops.chunks_exact(2) {
                    if let (Str(lo), Str(hi)) = (&pair[0], &pair[1]) {
                        if lo.len() == hi.len() && (1..=4).contains(&lo.len()) {
                            self.codespaces.push((lo.clone(), hi.clone()));
                        }
                    }
                }
            }
            b"bfchar" => {
                for pair in ops.chunks_exact(2) {
                    if let (Str(src), Str(dst)) = (&pair[0], &pair[1]) {
                        self.unicode.insert((src.len() as u8, be(src)), utf16_text(dst));
                    }
                }
            }
            b"bfrange" => {
                for triple in ops.chunks_exact(3) {
                    let (Str(lo), Str(hi)) = (&triple[0], &triple[1]) else { continue };
                    let (len, a, b) = (lo.len() as u8, be(lo), be(hi));
                    if b < a || b - a > MAX_RANGE {
                        continue;
                    }
                    match &triple[2] {
                        Str(dst) => {
                            for (k, code) in (a..=b).enumerate() {
                                self.unicode.insert((len, code), offset_text(dst, k as u32));
                            }
                        }
                        Array(items) => {
                            for (code, d) in (a..=b).zip(items) {
                                self.unicode.insert((len, code), utf16_text(d));
                            }
                        }
                        Int(_) => {}
                    }
                }
            }
            b"cidchar" => {
                for pair in ops.chunks_exact(2) {
                    if let (Str(src), Int(cid)) = (&pair[0], &pair[1]) {
                        self.cids.insert((src.len() as u8, be(src)), (*cid).max(0) as u32);
                    }
                }
            }
            b"cidrange" => {
                for triple in ops.chunks_exact(3) {
                    if let (Str(lo), Str(hi), Int(cid)) = (&triple[0], &triple[1], &triple[2]) {
                        self.cid_ranges.push((lo.len() as u8, be(lo), be(hi), (*cid).max(0) as u32));
                    }
                }
            }
            _ => {}
        }
    }

    /// Splits `bytes` into codes using the codespace ranges; without any,
    /// codes are `default_len` bytes long.
    pub fn split_codes(&self, bytes: &[u8], default_len: usize) -> Vec<(u8, u32)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let mut len = 0;
            for (lo, hi) in &self.codespaces {
                let n = lo.len();
                if i + n <= bytes.len() && (0..n).all(|k| lo[k] <= bytes[i + k] && bytes[i + k] <= hi[k]) {
                    len = n;
                    break;
                }
            }
            if len == 0 {
                len = if self.codespaces.is_empty() { default_len } else { self.shortest_codespace() };
            }
            let len = len.clamp(1, bytes.len() - i);
            out.push((len as u8, be(&bytes[i..i + len])));
            i += len;
        }
        out
    }

    fn shortest_codespace(&self) -> usize {
        self.codespaces.iter().map(|(lo, _)| lo.len()).min().unwrap_or(1)
    }

    pub fn lookup_unicode(&self, len: u8, code: u32) -> Option<&str> {
        self.unicode.get(&(len, code)).map(String::as_str)
    }

    pub fn lookup_cid(&self, len: u8, code: u32) -> Option<u32> {
        if let Some(c) = self.cids.get(&(len, code)) {
            return Some(*c);
        }
        self.cid_ranges
            .iter()
            .find(|(l, lo, hi, _)| *l == len && (*lo..=*hi).contains(&code))
            .map(|(_, lo, _, start)| start + (code - lo))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &[u8] = b"/CIDInit /ProcSet findresource begin 12 dict begin begincmap
        1 begincodespacerange <0000> <FFFF> endcodespacerange
        2 beginbfchar <0003> <0020> <0011> <00660066> endbfchar
        2 beginbfrange <0024> <0026> <0041> <0030> <0031> [<0105> <0119>] endbfrange
        1 begincidrange <0000> <00FF> 100 endcidrange
        endcmap CMapName currentdict /CMap defineresource pop end end";

    #[test]
    fn parses_all_sections() {
        let c = CMap::parse(SAMPLE);
        assert_eq!(c.codespaces.len(), 1);
        assert_eq!(c.lookup_unicode(2, 3), Some(" "));
        assert_eq!(c.lookup_unicode(2, 0x11), Some("ff"));
        assert_eq!(c.lookup_unicode(2, 0x25), Some("B"));
        assert_eq!(c.lookup_unicode(2, 0x26), Some("C"));
        assert_eq!(c.lookup_unicode(2, 0x31), Some("ę"));
        assert_eq!(c.lookup_cid(2, 5), Some(105));
        assert_eq!(c.lookup_cid(2, 0x100), None);
    }

    #[test]
    fn splits_by_codespace() {
        let c = CMap::parse(b"begincodespacerange <00> <80> <8140> <FFFF> endcodespacerange");
        assert_eq!(c.split_codes(&[0x41, 0x81, 0x40, 0x42], 2), vec![(1, 0x41), (2, 0x8140), (1, 0x42)]);
        let empty = CMap::default();
        assert_eq!(empty.split_codes(&[0, 1, 2], 2), vec![(2, 1), (1, 2)]);
    }
}
