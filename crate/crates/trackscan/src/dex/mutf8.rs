//! Modified UTF-8 (MUTF-8), the string encoding used by DEX files.
//!
//! MUTF-8 differs from standard UTF-8 in two ways: U+0000 is encoded as the
//! two-byte overlong sequence `0xC0 0x80` (so encoded strings never contain
//! a raw NUL byte), and characters outside the Basic Multilingual Plane are
//! encoded as a UTF-16 surrogate pair, each half as a separate 3-byte
//! sequence. Four-byte UTF-8 sequences never appear.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Mutf8Error {
    #[error("invalid byte 0x{byte:02x} at offset {offset}")]
    InvalidByte { offset: usize, byte: u8 },
    #[error("invalid continuation byte 0x{byte:02x} at offset {offset}")]
    InvalidContinuation { offset: usize, byte: u8 },
    #[error("unpaired surrogate 0x{unit:04x} at offset {offset}")]
    UnpairedSurrogate { offset: usize, unit: u16 },
    #[error("input ends inside a multi-byte sequence at offset {offset}")]
    UnexpectedEnd { offset: usize },
}

/// Decodes MUTF-8 bytes (without any trailing NUL terminator) into a string.
///
/// Sequences of one to three bytes decode as in UTF-8; `0xC0 0x80` decodes
/// to U+0000; a 3-byte high surrogate followed by a 3-byte low surrogate
/// combines into one supplementary character. A raw 0x00 byte, a 4-byte
/// UTF-8 lead, a bad continuation byte, or an unpaired surrogate is an
/// error.
pub fn decode_mutf8(bytes: &[u8]) -> Result<String, Mutf8Error> {
    // First pass: bytes -> UTF-16 code units, keeping the byte offset of
    // each unit for error reporting.
    let mut units: Vec<(u16, usize)> = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let b0 = bytes[i];
        let unit = if b0 == 0x00 {
            // NUL must be encoded as 0xC0 0x80; a raw zero byte is the
            // string terminator in DEX and never valid inside the data.
            return Err(Mutf8Error::InvalidByte { offset: i, byte: b0 });
        } else if b0 < 0x80 {
            let u = u16::from(b0);
            i += 1;
            u
        } else if b0 & 0xE0 == 0xC0 {
            let b1 = *bytes.get(i + 1).ok_or(Mutf8Error::UnexpectedEnd { offset: i })?;
            if b1 & 0xC0 != 0x80 {
                return Err(Mutf8Error::InvalidContinuation { offset: i + 1, byte: b1 });
            }
            let u = (u16::from(b0 & 0x1F) << 6) | u16::from(b1 & 0x3F);
            i += 2;
            u
        } else if b0 & 0xF0 == 0xE0 {
            if i + 2 >= bytes.len() {
                return Err(Mutf8Error::UnexpectedEnd { offset: i });
            }
            let (b1, b2) = (bytes[i + 1], bytes[i + 2]);
            if b1 & 0xC0 != 0x80 {
                return Err(Mutf8Error::InvalidContinuation { offset: i + 1, byte: b1 });
            }
            if b2 & 0xC0 != 0x80 {
                return Err(Mutf8Error::InvalidContinuation { offset: i + 2, byte: b2 });
            }
            let u = (u16::from(b0 & 0x0F) << 12)
                | (u16::from(b1 & 0x3F) << 6)
                | u16::from(b2 & 0x3F);
            i += 3;
            u
        } else {
            // 4-byte UTF-8 leads (0xF0..) and stray continuations (0x80..0xBF).
            return Err(Mutf8Error::InvalidByte { offset: i, byte: b0 });
        };
        units.push((unit, i));
    }

    // Second pass: combine surrogate pairs.
    let mut out = String::with_capacity(bytes.len());
    let mut iter = units.iter().peekable();
    while let Some(&(unit, end_offset)) = iter.next() {
        match unit {
            0xD800..=0xDBFF => {
                let Some(&&(low, _)) = iter.peek() else {
                    return Err(Mutf8Error::UnpairedSurrogate {
                        offset: end_offset.saturating_sub(3),
                        unit,
                    });
                };
                if !(0xDC00..=0xDFFF).contains(&low) {
                    return Err(Mutf8Error::UnpairedSurrogate {
                        offset: end_offset.saturating_sub(3),
                        unit,
                    });
                }
                iter.next();
                let code =
                    0x10000 + ((u32::from(unit) - 0xD800) << 10) + (u32::from(low) - 0xDC00);
                // In range by construction: 0x10000..=0x10FFFF, not a surrogate.
                out.push(char::from_u32(code).expect("combined surrogate pair is a valid char"));
            }
            0xDC00..=0xDFFF => {
                return Err(Mutf8Error::UnpairedSurrogate {
                    offset: end_offset.saturating_sub(3),
                    unit,
                });
            }
            _ => {
                // BMP unit; always a valid char outside the surrogate range.
                out.push(char::from_u32(u32::from(unit)).expect("BMP unit is a valid char"));
            }
        }
    }
    Ok(out)
}

/// Encodes a string as MUTF-8 (no trailing NUL appended).
pub fn encode_mutf8(s: &str) -> Vec<u8> {
    let mut out = Vec::with_capacity(s.len());
    for unit in s.encode_utf16() {
        match unit {
            0x0000 => out.extend_from_slice(&[0xC0, 0x80]),
            0x0001..=0x007F => out.push(unit as u8),
            0x0080..=0x07FF => {
                out.push(0xC0 | (unit >> 6) as u8);
                out.push(0x80 | (unit & 0x3F) as u8);
            }
            // BMP characters and surrogate halves alike take the 3-byte form;
            // encode_utf16 already split supplementary chars into pairs.
            _ => {
                out.push(0xE0 | (unit >> 12) as u8);
                out.push(0x80 | ((unit >> 6) & 0x3F) as u8);
                out.push(0x80 | (unit & 0x3F) as u8);
            }
        }
    }
    out
}
