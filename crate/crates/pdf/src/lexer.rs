//! Tokenizer and object parser shared by file-level parsing and content
//! streams.

use crate::object::{Dict, ObjRef, Object, Stream};

const MAX_DEPTH: usize = 128;

pub fn is_whitespace(b: u8) -> bool {
    matches!(b, b'\0' | b'\t' | b'\n' | b'\x0c' | b'\r' | b' ')
}

pub fn is_delimiter(b: u8) -> bool {
    matches!(b, b'(' | b')' | b'<' | b'>' | b'[' | b']' | b'{' | b'}' | b'/' | b'%')
}

fn is_regular(b: u8) -> bool {
    !is_whitespace(b) && !is_delimiter(b)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Int(i64),
    Real(f64),
    Name(String),
    Str(Vec<u8>),
    ArrayStart,
    ArrayEnd,
    DictStart,
    DictEnd,
    /// Any other run of regular characters: operators and keywords.
    Keyword(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LexError {
    #[error("unexpected end of data")]
    Eof,
    #[error("unexpected {found} at offset {pos}")]
    Unexpected { found: String, pos: usize },
    #[error("objects nested too deeply at offset {0}")]
    TooDeep(usize),
}

#[derive(Clone)]
pub struct Lexer<'a> {
    pub data: &'a [u8],
    pub pos: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(data: &'a [u8]) -> Lexer<'a> {
        Lexer { data, pos: 0 }
    }

    pub fn at(data: &'a [u8], pos: usize) -> Lexer<'a> {
        Lexer { data, pos }
    }

    pub fn skip_whitespace(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if is_whitespace(b) {
                self.pos += 1;
            } else if b == b'%' {
                while self.pos < self.data.len() && !matches!(self.data[self.pos], b'\r' | b'\n') {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    pub fn peek_byte(&self) -> Option<u8> {
        self.data.get(self.pos).copied()
    }

    pub fn next_token(&mut self) -> Result<Token, LexError> {
        self.skip_whitespace();
        let Some(b) = self.peek_byte() else {
            return Err(LexError::Eof);
        };
        match b {
            b'[' => {
                self.pos += 1;
                Ok(Token::ArrayStart)
            }
            b']' => {
                self.pos += 1;
                Ok(Token::ArrayEnd)
            }
            b'<' if self.data.get(self.pos + 1) == Some(&b'<') => {
                self.pos += 2;
                Ok(Token::DictStart)
            }
            b'>' if self.data.get(self.pos + 1) == Some(&b'>') => {
                self.pos += 2;
                Ok(Token::DictEnd)
            }
            b'<' => Ok(Token::Str(self.hex_string())),
            b'(' => Ok(Token::Str(self.literal_string())),
            b'/' => Ok(Token::Name(self.name())),
            b'{' | b'}' | b')' | b'>' => {
                self.pos += 1;
                Ok(Token::Keyword(vec![b]))
            }
            _ => {
                let start = self.pos;
                while self.pos < self.data.len() && is_regular(self.data[self.pos]) {
                    self.pos += 1;
                }
                let word = &self.data[start..self.pos];
                Ok(parse_number(word).unwrap_or_else(|| Token::Keyword(word.to_vec())))
            }
        }
    }

    fn hex_string(&mut self) -> Vec<u8> {
        self.pos += 1;
        let mut out = Vec::new();
        let mut hi: Option<u8> = None;
        while let Some(b) = self.peek_byte() {
            self.pos += 1;
            if b == b'>' {
                break;
            }
            let Some(v) = (b as char).to_digit(16) else { continue };
            match hi.take() {
                Some(h) => out.push(h << 4 | v as u8),
                None => hi = Some(v as u8),
            }
        }
        if let Some(h) = hi {
            out.push(h << 4);
        }
        out
    }

    fn literal_string(&mut self) -> Vec<u8> {
        self.pos += 1;
        let mut out = Vec::new();
        let mut depth = 1usize;
        while let Some(b) = self.peek_byte() {
            self.pos += 1;
            match b {
                b'(' => {
                    depth += 1;
                    out.push(b);
                }
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                    out.push(b);
                }
                b'\\' => {
                    let Some(e) = self.peek_byte() else { break };
                    self.pos += 1;
                    match e {
                        b'n' => out.push(b'\n'),
                        b'r' => out.push(b'\r'),
                        b't' => out.push(b'\t'),
                        b'b' => out.push(0x08),
                        b'f' => out.push(0x0c),
                        b'0'..=b'7' => {
                            let mut v = (e - b'0') as u32;
                            for _ in 0..2 {
                                match self.peek_byte() {
                                    Some(d @ b'0'..=b'7') => {
                                        v = v * 8 + (d - b'0') as u32;
                                        self.pos += 1;
                                    }
                                    _ => break,
                                }
                            }
                            out.push(v as u8);
                        }
                        b'\r' => {
                            if self.peek_byte() == Some(b'\n') {
                                self.pos += 1;
                            }
                        }
                        b'\n' => {}
                        other => out.push(other),
                    }
                }
                b'\r' => {
                    if self.peek_byte() == Some(b'\n') {
                        self.pos += 1;
                    }
                    out.push(b'\n');
                }
                _ => out.push(b),
            }
        }
        out
    }

    fn name(&mut self) -> String {
        self.pos += 1;
        let mut out = Vec::new();
        while let Some(b) = self.peek_byte() {
            if !is_regular(b) {
                break;
            }
            self.pos += 1;
            if b == b'#' {
                let hex = self.data.get(self.pos..self.pos + 2);
                if let Some(v) = hex.and_then(|h| std::str::from_utf8(h).ok()).and_then(|h| u8::from_str_radix(h, 16).ok()) {
                    out.push(v);
                    self.pos += 2;
                    continue;
                }
            }
            out.push(b);
        }
        String::from_utf8_lossy(&out).into_owned()
    }
}

fn parse_number(word: &[u8]) -> Option<Token> {
    let first = *word.first()?;
    if !(first.is_ascii_digit() || matches!(first, b'+' | b'-' | b'.')) {
        return None;
    }
    let s = std::str::from_utf8(word).ok()?;
    // tolerate doubled signs such as "--5" seen in broken writers
    let trimmed = s.trim_start_matches(['+', '-']);
    let negative = s.len() - trimmed.len() > 0 && s.starts_with('-');
    if trimmed.is_empty() || !trimmed.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
        return None;
    }
    if trimmed.bytes().filter(|b| *b == b'.').count() > 1 {
        return None;
    }
    if !trimmed.contains('.') {
        let v: i64 = trimmed.parse().ok().or(Some(i64::MAX))?;
        return Some(Token::Int(if negative { -v } else { v }));
    }
    let v: f64 = if trimmed == "." { 0.0 } else { trimmed.parse().ok()? };
    Some(Token::Real(if negative { -v } else { v }))
}

/// Resolves an indirect `/Length` while parsing a stream.
pub type LengthResolver<'r> = &'r dyn Fn(ObjRef) -> Option<i64>;

pub struct Parser<'a> {
    pub lex: Lexer<'a>,
}

impl<'a> Parser<'a> {
    pub fn new(data: &'a [u8]) -> Parser<'a> {
        Parser { lex: Lexer::new(data) }
    }

    pub fn at(data: &'a [u8], pos: usize) -> Parser<'a> {
        Parser { lex: Lexer::at(data, pos) }
    }

    pub fn parse_object(&mut self) -> Result<Object, LexError> {
        let tok = self.lex.next_token()?;
        self.object_from(tok, 0)
    }

    /// Builds an object from an already-read token.
    pub fn object_from_token(&mut self, tok: Token) -> Result<Object, LexError> {
        self.object_from(tok, 0)
    }

    fn object_from(&mut self, tok: Token, depth: usize) -> Result<Object, LexError> {
        if depth > MAX_DEPTH {
            return Err(LexError::TooDeep(self.lex.pos));
        }
        match tok {
            Token::Int(i) => {
                // look ahead for `gen R`
                if i >= 0 && i <= u32::MAX as i64 {
                    let save = self.lex.pos;
                    if let Ok(Token::Int(g)) = self.lex.next_token() {
                        if let Ok(Token::Keyword(k)) = self.lex.next_token() {
                            if k == b"R" && (0..=u16::MAX as i64).contains(&g) {
                                return Ok(Object::Ref(ObjRef { num: i as u32, gen: g as u16 }));
                            }
                        }
                    }
                    self.lex.pos = save;
                }
                Ok(Object::Int(i))
            }
            Token::Real(r) => Ok(Object::Real(r)),
            Token::Name(n) => Ok(Object::Name(n)),
            Token::Str(s) => Ok(Object::Str(s)),
            Token::ArrayStart => {
                let mut items = Vec::new();
                loop {
                    let t = self.lex.next_token()?;
                    if t == Token::ArrayEnd {
                        break;
                    }
                    items.push(self.object_from(t, depth + 1)?);
                }
                Ok(Object::Array(items))
            }
            Token::DictStart => Ok(Object::Dict(self.dict_body(depth)?)),
            Token::Keyword(k) => match k.as_slice() {
                b"true" => Ok(Object::Bool(true)),
                b"false" => Ok(Object::Bool(false)),
                b"null" => Ok(Object::Null),
                _ => Err(LexError::Unexpected {
                    found: String::from_utf8_lossy(&k).into_owned(),
                    pos: self.lex.pos,
                }),
            },
            Token::ArrayEnd | Token::DictEnd => Err(LexError::Unexpected {
                found: format!("{tok:?}"),
                pos: self.lex.pos,
            }),
        }
    }

    fn dict_body(&mut self, depth: usize) -> Result<Dict, LexError> {
        let mut d = Dict::new();
        loop {
            match self.lex.next_token()? {
                Token::DictEnd => break,
                Token::Name(key) => {
                    let t = self.lex.next_token()?;
                    if t == Token::DictEnd {
                        // key without value; treat as null and stop
                        d.insert(key, Object::Null);
                        break;
                    }
                    let v = self.object_from(t, depth + 1)?;
                    d.insert(key, v);
                }
                // skip junk between entries
                _ => continue,
            }
        }
        Ok(d)
    }

    /// Parses `num gen obj <object> [stream…endstream] endobj` at the
    /// current position.
    pub fn parse_indirect(&mut self, lengths: LengthResolver<'_>) -> Result<(ObjRef, Object), LexError> {
        let num = match self.lex.next_token()? {
            Token::Int(n) if n >= 0 => n as u32,
            t => return Err(LexError::Unexpected { found: format!("{t:?}"), pos: self.lex.pos }),
        };
        let gen = match self.lex.next_token()? {
            Token::Int(g) if (0..=u16::MAX as i64).contains(&g) => g as u16,
            t => return Err(LexError::Unexpected { found: format!("{t:?}"), pos: self.lex.pos }),
        };
        match self.lex.next_token()? {
            Token::Keyword(k) if k == b"obj" => {}
            t => return Err(LexError::Unexpected { found: format!("{t:?}"), pos: self.lex.pos }),
        }
        let id = ObjRef { num, gen };
        let obj = match self.lex.next_token() {
            // `n g obj endobj` is an empty (null) object
            Ok(Token::Keyword(k)) if k == b"endobj" => return Ok((id, Object::Null)),
            Ok(t) => self.object_from(t, 0)?,
            Err(e) => return Err(e),
        };
        if let Object::Dict(dict) = &obj {
            let save = self.lex.pos;
            if let Ok(Token::Keyword(k)) = self.lex.next_token() {
                if k == b"stream" {
                    let raw = self.stream_body(dict, lengths);
                    return Ok((id, Object::Stream(Stream { dict: dict.clone(), raw })));
                }
            }
            self.lex.pos = save;
        }
        Ok((id, obj))
    }

    fn stream_body(&mut self, dict: &Dict, lengths: LengthResolver<'_>) -> Vec<u8> {
        let data = self.lex.data;
        let mut start = self.lex.pos;
        if data.get(start) == Some(&b'\r') {
            start += 1;
        }
        if data.get(start) == Some(&b'\n') {
            start += 1;
        }
        let declared = match dict.get("Length") {
            Some(Object::Int(n)) => Some(*n),
            Some(Object::Ref(r)) => lengths(*r),
            _ => None,
        };
        if let Some(len) = declared.filter(|n| *n >= 0).map(|n| n as usize) {
            if let Some(end) = start.checked_add(len).filter(|e| *e <= data.len()) {
                let mut l = Lexer::at(data, end);
                l.skip_whitespace();
                if data[l.pos..].starts_with(b"endstream") {
                    self.lex.pos = l.pos + b"endstream".len();
                    return data[start..end].to_vec();
                }
            }
        }
        // length missing or wrong: scan for the keyword
        let end = find(data, b"endstream", start).unwrap_or(data.len());
        let mut body_end = end;
        if body_end > start && data[body_end - 1] == b'\n' {
            body_end -= 1;
        }
        if body_end > start && data[body_end - 1] == b'\r' {
            body_end -= 1;
        }
        self.lex.pos = (end + b"endstream".len()).min(data.len());
        data[start..body_end].to_vec()
    }
}

pub fn find(hay: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    if from >= hay.len() || needle.is_empty() {
        return None;
    }
    hay[from..]
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| p + from)
}

pub fn rfind(hay: &[u8], needle: &[u8]) -> Option<usize> {
    if needle.len() > hay.len() {
        return None;
    }
    hay.windows(needle.len()).rposition(|w| w == needle)
}
