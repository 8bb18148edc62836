//! Stream decoding.

use std::io::Read;

use crate::object::{Dict, Object};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FilterError {
    #[error("unsupported filter /{0}")]
    Unsupported(String),
    #[error("corrupt /{filter} data: {reason}")]
    Corrupt { filter: String, reason: String },
}

/// Image codecs whose data is left encoded.
pub fn is_image_codec(name: &str) -> bool {
    matches!(name, "DCTDecode" | "DCT" | "JPXDecode" | "JBIG2Decode" | "CCITTFaxDecode" | "CCF")
}

/// Filter names and their parameter dictionaries, in application order.
pub fn filter_chain(dict: &Dict) -> Vec<(String, Option<Dict>)> {
    let names: Vec<String> = match dict.get("Filter").or_else(|| dict.get("F")) {
        Some(Object::Name(n)) => vec![n.clone()],
        Some(Object::Array(a)) => a.iter().filter_map(|o| o.as_name().map(str::to_string)).collect(),
        _ => Vec::new(),
    };
    let parms: Vec<Option<Dict>> = match dict.get("DecodeParms").or_else(|| dict.get("DP")) {
        Some(Object::Dict(d)) => vec![Some(d.clone())],
        Some(Object::Array(a)) => a.iter().map(|o| o.as_dict().cloned()).collect(),
        _ => Vec::new(),
    };
    names
        .into_iter()
        .enumerate()
        .map(|(i, n)| (n, parms.get(i).cloned().flatten()))
        .collect()
}

/// Applies the stream's filters. Stops before the first image codec and
/// returns the bytes decoded so far.
pub fn decode_stream(dict: &Dict, raw: &[u8]) -> Result<Vec<u8>, FilterError> {
    let mut data = raw.to_vec();
    for (name, parms) in filter_chain(dict) {
        if is_image_codec(&name) {
            break;
        }
        data = apply(&name, &data, parms.as_ref())?;
    }
    Ok(data)
}

pub fn apply(name: &str, data: &[u8], parms: Option<&Dict>) -> Result<Vec<u8>, FilterError> {
    let decoded = match name {
        "FlateDecode" | "Fl" => flate(data)?,
        "ASCIIHexDecode" | "AHx" => ascii_hex(data),
        "ASCII85Decode" | "A85" => ascii85(data)?,
        "LZWDecode" | "LZW" => {
            let early = parms.and_then(|p| p.get("EarlyChange")).and_then(Object::as_i64).unwrap_or(1);
            lzw(data, early != 0)?
        }
        "RunLengthDecode" | "RL" => run_length(data),
        other => return Err(FilterError::Unsupported(other.to_string())),
    };
    match name {
        "FlateDecode" | "Fl" | "LZWDecode" | "LZW" => predict(decoded, parms),
        _ => Ok(decoded),
    }
}

/// Inflates zlib data, keeping whatever decoded before any corruption.
/// Raw deflate without a zlib header is accepted too.
fn flate(data: &[u8]) -> Result<Vec<u8>, FilterError> {
    let mut out = Vec::new();
    let mut z = flate2::read::ZlibDecoder::new(data);
    match z.read_to_end(&mut out) {
        Ok(_) => Ok(out),
        Err(e) => {
            if !out.is_empty() {
                return Ok(out);
            }
            let mut raw_out = Vec::new();
            let mut d = flate2::read::DeflateDecoder::new(data);
            match d.read_to_end(&mut raw_out) {
                Ok(_) => Ok(raw_out),
                Err(_) if !raw_out.is_empty() => Ok(raw_out),
                Err(_) => Err(FilterError::Corrupt { filter: "FlateDecode".into(), reason: e.to_string() }),
            }
        }
    }
}

fn ascii_hex(data: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len() / 2);
    let mut hi: Option<u8> = None;
    for &b in data {
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

fn ascii85(data: &[u8]) -> Result<Vec<u8>, FilterError> {
    let corrupt = |reason: &str| FilterError::Corrupt { filter: "ASCII85Decode".into(), reason: reason.into() };
    let mut body = data;
    if body.starts_with(b"<~") {
        body = &body[2..];
    }
    let mut out = Vec::with_capacity(body.len() * 4 / 5);
    let mut group = [0u8; 5];
    let mut n = 0;
    for &b in body {
        match b {
            b'~' => break,
            b'z' if n == 0 => out.extend_from_slice(&[0, 0, 0, 0]),
            b'!'..=b'u' => {
                group[n] = b - b'!';
                n += 1;
                if n == 5 {
                    let v = group.iter().fold(0u64, |acc, d| acc * 85 + *d as u64);
                    if v > u32::MAX as u64 {
                        return Err(corrupt("group overflow"));
                    }
                    out.extend_from_slice(&(v as u32).to_be_bytes());
                    n = 0;
                }
            }
            b if crate::lexer::is_whitespace(b) => {}
            _ => return Err(corrupt("invalid character")),
        }
    }
    if n == 1 {
        return Err(corrupt("dangling final character"));
    }
    if n > 1 {
        for d in group.iter_mut().skip(n) {
            *d = 84;
        }
        let v = group.iter().fold(0u64, |acc, d| acc * 85 + *d as u64);
        out.extend_from_slice(&(v as u32).to_be_bytes()[..n - 1]);
    }
    Ok(out)
}

fn lzw(data: &[u8], early_change: bool) -> Result<Vec<u8>, FilterError> {
    let mut dec = if early_change {
        weezl::decode::Decoder::with_tiff_size_switch(weezl::BitOrder::Msb, 8)
    } else {
        weezl::decode::Decoder::new(weezl::BitOrder::Msb, 8)
    };
    let mut out = Vec::new();
    let r = dec.into_vec(&mut out).decode(data);
    match r.status {
        Ok(_) => Ok(out),
        Err(_) if !out.is_empty() => Ok(out),
        Err(e) => Err(FilterError::Corrupt { filter: "LZWDecode".into(), reason: e.to_string() }),
    }
}

fn run_length(data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < data.len() {
        let len = data[i];
        i += 1;
        match len {
            128 => break,
            0..=127 => {
                let end = (i + len as usize + 1).min(data.len());
                out.extend_from_slice(&data[i..end]);
                i = end;
            }
            _ => {
                if let Some(&b) = data.get(i) {
                    out.extend(std::iter::repeat_n(b, 257 - len as usize));
                }
                i += 1;
            }
        }
    }
    out
}

/// Undoes TIFF (2) and PNG (10–15) predictors.
fn predict(data: Vec<u8>, parms: Option<&Dict>) -> Result<Vec<u8>, FilterError> {
    let Some(p) = parms else { return Ok(data) };
    let get = |k: &str, d: i64| p.get(k).and_then(Object::as_i64).unwrap_or(d);
    let predictor = get("Predictor", 1);
    if predictor < 2 {
        return Ok(data);
    }
    let colors = get("Colors", 1).clamp(1, 32) as usize;
    let bpc = get("BitsPerComponent", 8).clamp(1, 16) as usize;
    let columns = get("Columns", 1).clamp(1, 1 << 20) as usize;
    let bpp = (colors * bpc).div_ceil(8).max(1);
    let row_len = (colors * bpc * columns).div_ceil(8);
    if predictor == 2 {
        if bpc != 8 {
            return Ok(data);
        }
        let mut out = data;
        for row in out.chunks_mut(row_len) {
            for i in bpp..row.len() {
                row[i] = row[i].wrapping_add(row[i - bpp]);
            }
        }
        return Ok(out);
    }
    let mut out = Vec::with_capacity(data.len());
    let mut prev = vec![0u8; row_len];
    for chunk in data.chunks(row_len + 1) {
        let kind = chunk[0];
        let mut row = chunk[1..].to_vec();
        row.resize(row_len, 0);
        for i in 0..row_len {
            let a = if i >= bpp { row[i - bpp] } else { 0 };
            let b = prev[i];
            let c = if i >= bpp { prev[i - bpp] } else { 0 };
            row[i] = match kind {
                0 => row[i],
                1 => row[i].wrapping_add(a),
                2 => row[i].wrapping_add(b),
                3 => row[i].wrapping_add(((a as u16 + b as u16) / 2) as u8),
                4 => row[i].wrapping_add(paeth(a, b, c)),
                _ => {
                    return Err(FilterError::Corrupt {
                        filter: "FlateDecode".into(),
                        reason: format!("unknown PNG row filter {kind}"),
                    })
                }
            };
        }
        let take = chunk.len() - 1;
        out.extend_from_slice(&row[..take.min(row_len)]);
        prev = row;
    }
    Ok(out)
}

fn paeth(a: u8, b: u8, c: u8) -> u8 {
    let p = a as i16 + b as i16 - c as i16;
    let (pa, pb, pc) = ((p - a as i16).abs(), (p - b as i16).abs(), (p - c as i16).abs());
    if pa <= pb && pa <= pc {
        a
    } else if pb <= pc {
        b
    } else {
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn zlib(data: &[u8]) -> Vec<u8> {
        let mut e = flate2::write::ZlibEncoder::new(Vec::new(), flate2::Compression::default());
        e.write_all(data).unwrap();
        e.finish().unwrap()
    }

    fn dict(pairs: &[(&str, Object)]) -> Dict {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn flate_round_trip_and_truncation() {
        let text: Vec<u8> = (0..400u32).flat_map(|i| format!("{} {} Td ({}) Tj\n", i * 7 % 613, i * 13 % 797, i * i).into_bytes()).collect();
        let z = zlib(&text);
        let d = dict(&[("Filter", Object::Name("FlateDecode".into()))]);
        assert_eq!(decode_stream(&d, &z).unwrap(), text);
        let partial = decode_stream(&d, &z[..z.len() / 2]).unwrap();
        assert!(text.starts_with(&partial) && !partial.is_empty());
    }

    #[test]
    fn ascii_hex_and_85() {
        assert_eq!(ascii_hex(b"48 65 6c 6C 6f>"), b"Hello");
        assert_eq!(ascii_hex(b"7"), vec![0x70]);
        // "Man " encodes to "9jqo^"
        assert_eq!(ascii85(b"<~9jqo^~>").unwrap(), b"Man ");
        assert_eq!(ascii85(b"z~>").unwrap(), vec![0; 4]);
        assert_eq!(ascii85(b"9jqo~>").unwrap(), b"Man");
        assert!(ascii85(b"9~>").is_err());
    }

    #[test]
    fn chained_filters() {
        let text = b"chained filter data";
        let z = zlib(text);
        let hex: String = z.iter().map(|b| format!("{b:02x}")).collect();
        let d = dict(&[(
            "Filter",
            Object::Array(vec![Object::Name("AHx".into()), Object::Name("Fl".into())]),
        )]);
        assert_eq!(decode_stream(&d, hex.as_bytes()).unwrap(), text);
    }

    #[test]
    fn lzw_matches_encoder() {
        let text = b"-----A---B-----A---B-----A---B".repeat(20);
        let enc = weezl::encode::Encoder::with_tiff_size_switch(weezl::BitOrder::Msb, 8)
            .encode(&text)
            .unwrap();
        assert_eq!(lzw(&enc, true).unwrap(), text);
        let enc = weezl::encode::Encoder::new(weezl::BitOrder::Msb, 8).encode(&text).unwrap();
        assert_eq!(lzw(&enc, false).unwrap(), text);
    }

    #[test]
    fn run_length_decoding() {
        // literal "abc", then 'z' repeated 4 times, then EOD
        assert_eq!(run_length(&[2, b'a', b'b', b'c', 253, b'z', 128]), b"abczzzz");
    }

    #[test]
    fn png_up_predictor() {
        // 2 rows of 3 columns, row 2 uses the Up filter
        let rows = [0u8, 1, 2, 3, 2, 1, 1, 1];
        let z = zlib(&rows);
        let parms = Object::Dict(dict(&[("Predictor", Object::Int(12)), ("Columns", Object::Int(3))]));
        let d = dict(&[("Filter", Object::Name("FlateDecode".into())), ("DecodeParms", parms)]);
        assert_eq!(decode_stream(&d, &z).unwrap(), vec![1, 2, 3, 2, 3, 4]);
    }

    #[test]
    fn image_codecs_stop_decoding() {
        let d = dict(&[("Filter", Object::Name("DCTDecode".into()))]);
        assert_eq!(decode_stream(&d, b"\xff\xd8jpeg").unwrap(), b"\xff\xd8jpeg");
        assert!(matches!(apply("Crypt", b"", None), Err(FilterError::Unsupported(_))));
    }
}
