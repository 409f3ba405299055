//! DEX bytecode parsing: header validation, string-pool extraction, and
//! hostname scanning (see [`scan`]).
//!
//! Only the pieces of the format needed for host extraction are modeled:
//! the 112-byte header and the `string_ids` table with its `string_data`
//! items (`ULEB128` UTF-16 length, MUTF-8 bytes, NUL terminator). Layout
//! per the published DEX specification; little-endian only.

pub mod mutf8;
pub mod scan;

pub use mutf8::{decode_mutf8, encode_mutf8, Mutf8Error};
pub use scan::{scan_hosts_raw, scan_hosts_structured, HostCandidate, ScanMode};

use thiserror::Error;

use crate::apk::DexBlob;

/// `endian_tag` value for little-endian DEX files (the only supported kind).
pub const ENDIAN_CONSTANT: u32 = 0x1234_5678;
/// `endian_tag` value of a byte-swapped DEX file; rejected.
pub const REVERSE_ENDIAN_CONSTANT: u32 = 0x7856_3412;
/// Size of the DEX header in bytes.
pub const HEADER_SIZE: usize = 112;

/// Parsed DEX header, reduced to the fields this crate consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DexHeader {
    /// Numeric format version from the magic (e.g. 35 for "035").
    pub version: u32,
    /// Adler-32 checksum field (read, not verified).
    pub checksum: u32,
    pub file_size: u32,
    pub header_size: u32,
    pub endian_tag: u32,
    pub string_ids_size: u32,
    pub string_ids_off: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DexError {
    #[error("not a DEX file (bad magic)")]
    BadMagic,
    #[error("unsupported endian tag 0x{0:08x} (only little-endian DEX is supported)")]
    BadEndianTag(u32),
    #[error("truncated header: {len} bytes, need {HEADER_SIZE}")]
    TruncatedHeader { len: usize },
    #[error("string_ids table [{off}, {off}+4×{size}) exceeds {limit} ({what})")]
    BoundsViolation { off: u32, size: u32, limit: u64, what: &'static str },
    #[error("string id {index} points at offset {offset}, beyond the file")]
    BadStringOffset { index: u32, offset: u32 },
    #[error("string id {index}: malformed ULEB128 length")]
    BadStringData { index: u32 },
    #[error("string id {index}: no NUL terminator before end of file")]
    MissingNulTerminator { index: u32 },
    #[error("string id {index}: {source}")]
    Mutf8DecodeError {
        index: u32,
        #[source]
        source: Mutf8Error,
    },
}

fn read_u32_le(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4-byte slice"))
}

/// Parses and validates the header of `blob`.
///
/// Checks the `dex\n<NNN>\0` magic, requires the little-endian tag (the
/// reversed tag is rejected rather than byte-swapped), and bounds-checks the
/// string id table against both the declared `file_size` and the actual blob
/// length.
pub fn parse_dex_header(blob: &DexBlob) -> Result<DexHeader, DexError> {
    let bytes = &blob.bytes;
    if bytes.len() < HEADER_SIZE {
        return Err(DexError::TruncatedHeader { len: bytes.len() });
    }
    if &bytes[0..4] != b"dex\n" || bytes[7] != 0 {
        return Err(DexError::BadMagic);
    }
    let digits = &bytes[4..7];
    if !digits.iter().all(u8::is_ascii_digit) {
        return Err(DexError::BadMagic);
    }
    let version = digits.iter().fold(0u32, |acc, d| acc * 10 + u32::from(d - b'0'));

    let endian_tag = read_u32_le(bytes, 40);
    if endian_tag != ENDIAN_CONSTANT {
        return Err(DexError::BadEndianTag(endian_tag));
    }

    let header = DexHeader {
        version,
        checksum: read_u32_le(bytes, 8),
        file_size: read_u32_le(bytes, 32),
        header_size: read_u32_le(bytes, 36),
        endian_tag,
        string_ids_size: read_u32_le(bytes, 56),
        string_ids_off: read_u32_le(bytes, 60),
    };

    let table_end =
        u64::from(header.string_ids_off) + 4 * u64::from(header.string_ids_size);
    if table_end > u64::from(header.file_size) {
        return Err(DexError::BoundsViolation {
            off: header.string_ids_off,
            size: header.string_ids_size,
            limit: u64::from(header.file_size),
            what: "declared file_size",
        });
    }
    if table_end > bytes.len() as u64 {
        return Err(DexError::BoundsViolation {
            off: header.string_ids_off,
            size: header.string_ids_size,
            limit: bytes.len() as u64,
            what: "actual blob length",
        });
    }
    Ok(header)
}

/// Reads a ULEB128 value at `pos`, advancing it. `None` on overflow (more
/// than 5 bytes) or end of input.
fn read_uleb128(bytes: &[u8], pos: &mut usize) -> Option<u32> {
    let mut result: u32 = 0;
    for i in 0..5 {
        let byte = *bytes.get(*pos)?;
        *pos += 1;
        result |= u32::from(byte & 0x7F) << (7 * i);
        if byte & 0x80 == 0 {
            return Some(result);
        }
    }
    None
}

/// Decodes the full string pool in `string_ids` table order.
///
/// Each `string_data` item is a ULEB128 UTF-16 length followed by MUTF-8
/// bytes and a NUL terminator. The declared length is compared against the
/// decoded string as a consistency check, but a mismatch only logs a
/// warning — real-world DEX files are occasionally sloppy here and the
/// scanner only consumes the text.
pub fn extract_string_pool(blob: &DexBlob) -> Result<Vec<String>, DexError> {
    let header = parse_dex_header(blob)?;
    let bytes = &blob.bytes;
    let mut pool = Vec::with_capacity(header.string_ids_size as usize);
    for index in 0..header.string_ids_size {
        let id_offset = header.string_ids_off as usize + 4 * index as usize;
        let data_offset = read_u32_le(bytes, id_offset);
        if data_offset as usize >= bytes.len() {
            return Err(DexError::BadStringOffset { index, offset: data_offset });
        }
        let mut pos = data_offset as usize;
        let declared_utf16_len =
            read_uleb128(bytes, &mut pos).ok_or(DexError::BadStringData { index })?;
        let terminator = bytes[pos..]
            .iter()
            .position(|&b| b == 0)
            .ok_or(DexError::MissingNulTerminator { index })?;
        let decoded = decode_mutf8(&bytes[pos..pos + terminator])
            .map_err(|source| DexError::Mutf8DecodeError { index, source })?;
        let actual = decoded.encode_utf16().count() as u32;
        if actual != declared_utf16_len {
            log::warn!(
                "{}: string {index} declares UTF-16 length {declared_utf16_len}, decoded {actual}",
                blob.entry_name
            );
        }
        pool.push(decoded);
    }
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimal in-module DEX builder: header + string_ids + string_data.
    /// (Integration tests use an independent builder; this one keeps unit
    /// tests self-contained.)
    fn build_dex(strings: &[&str]) -> DexBlob {
        let n = strings.len();
        let string_ids_off = HEADER_SIZE;
        let data_off = string_ids_off + 4 * n;
        let mut data = Vec::new();
        let mut offsets = Vec::new();
        for s in strings {
            offsets.push((data_off + data.len()) as u32);
            let utf16_len = s.encode_utf16().count() as u32;
            let mut len_bytes = Vec::new();
            let mut v = utf16_len;
            loop {
                let mut b = (v & 0x7F) as u8;
                v >>= 7;
                if v != 0 {
                    b |= 0x80;
                }
                len_bytes.push(b);
                if v == 0 {
                    break;
                }
            }
            data.extend_from_slice(&len_bytes);
            data.extend_from_slice(&encode_mutf8(s));
            data.push(0);
        }
        let file_size = (data_off + data.len()) as u32;
        let mut bytes = vec![0u8; HEADER_SIZE];
        bytes[0..8].copy_from_slice(b"dex\n035\0");
        bytes[8..12].copy_from_slice(&0xDEAD_BEEFu32.to_le_bytes()); // checksum: unverified
        bytes[32..36].copy_from_slice(&file_size.to_le_bytes());
        bytes[36..40].copy_from_slice(&(HEADER_SIZE as u32).to_le_bytes());
        bytes[40..44].copy_from_slice(&ENDIAN_CONSTANT.to_le_bytes());
        bytes[56..60].copy_from_slice(&(n as u32).to_le_bytes());
        bytes[60..64].copy_from_slice(&(string_ids_off as u32).to_le_bytes());
        for off in &offsets {
            bytes.extend_from_slice(&off.to_le_bytes());
        }
        bytes.extend_from_slice(&data);
        DexBlob { entry_name: "classes.dex".to_string(), bytes }
    }

    #[test]
    fn parses_minimal_header() {
        let blob = build_dex(&["a", "b"]);
        let header = parse_dex_header(&blob).unwrap();
        assert_eq!(header.version, 35);
        assert_eq!(header.checksum, 0xDEAD_BEEF);
        assert_eq!(header.file_size as usize, blob.bytes.len());
        assert_eq!(header.header_size as usize, HEADER_SIZE);
        assert_eq!(header.endian_tag, ENDIAN_CONSTANT);
        assert_eq!(header.string_ids_size, 2);
        assert_eq!(header.string_ids_off as usize, HEADER_SIZE);
    }

    #[test]
    fn zip_magic_is_bad_magic() {
        let mut bytes = vec![0u8; HEADER_SIZE];
        bytes[0..4].copy_from_slice(b"PK\x03\x04");
        let blob = DexBlob { entry_name: "x".into(), bytes };
        assert_eq!(parse_dex_header(&blob), Err(DexError::BadMagic));
    }

    #[test]
    fn non_digit_version_is_bad_magic() {
        let mut blob = build_dex(&[]);
        blob.bytes[4..7].copy_from_slice(b"abc");
        assert_eq!(parse_dex_header(&blob), Err(DexError::BadMagic));
    }

    #[test]
    fn short_blob_is_truncated() {
        let blob = DexBlob { entry_name: "x".into(), bytes: vec![0; 64] };
        assert_eq!(parse_dex_header(&blob), Err(DexError::TruncatedHeader { len: 64 }));
    }

    #[test]
    fn reverse_endian_is_rejected() {
        let mut blob = build_dex(&["a"]);
        blob.bytes[40..44].copy_from_slice(&REVERSE_ENDIAN_CONSTANT.to_le_bytes());
        assert_eq!(
            parse_dex_header(&blob),
            Err(DexError::BadEndianTag(REVERSE_ENDIAN_CONSTANT))
        );
    }

    #[test]
    fn string_table_past_file_size_is_bounds_violation() {
        let mut blob = build_dex(&["a"]);
        let huge = (blob.bytes.len() as u32 + 100).to_le_bytes();
        blob.bytes[60..64].copy_from_slice(&huge);
        assert!(matches!(
            parse_dex_header(&blob),
            Err(DexError::BoundsViolation { what: "declared file_size", .. })
        ));
    }

    #[test]
    fn string_table_past_blob_end_is_bounds_violation() {
        let mut blob = build_dex(&["a"]);
        // Claim a larger file_size so the declared-size check passes but the
        // actual-length check trips.
        let claimed = (blob.bytes.len() as u32 + 1000).to_le_bytes();
        blob.bytes[32..36].copy_from_slice(&claimed);
        let huge = (blob.bytes.len() as u32 + 100).to_le_bytes();
        blob.bytes[60..64].copy_from_slice(&huge);
        assert!(matches!(
            parse_dex_header(&blob),
            Err(DexError::BoundsViolation { what: "actual blob length", .. })
        ));
    }

    #[test]
    fn extracts_pool_in_table_order() {
        let strings = ["https://ads.example.com/v1", "hello", "", "日本語", "a\u{0}b"];
        let blob = build_dex(&strings);
        let pool = extract_string_pool(&blob).unwrap();
        assert_eq!(pool, strings);
    }

    #[test]
    fn empty_pool_is_ok() {
        let blob = build_dex(&[]);
        assert_eq!(extract_string_pool(&blob).unwrap(), Vec::<String>::new());
    }

    #[test]
    fn string_id_past_eof_is_bad_offset() {
        let mut blob = build_dex(&["a"]);
        let bad = (blob.bytes.len() as u32 + 5).to_le_bytes();
        let id_pos = HEADER_SIZE;
        blob.bytes[id_pos..id_pos + 4].copy_from_slice(&bad);
        assert!(matches!(
            extract_string_pool(&blob),
            Err(DexError::BadStringOffset { index: 0, .. })
        ));
    }

    #[test]
    fn missing_terminator_is_reported() {
        let mut blob = build_dex(&["abc"]);
        // Drop the trailing NUL.
        assert_eq!(blob.bytes.pop(), Some(0));
        let total_len = blob.bytes.len() as u32;
        blob.bytes[32..36].copy_from_slice(&total_len.to_le_bytes());
        assert!(matches!(
            extract_string_pool(&blob),
            Err(DexError::MissingNulTerminator { index: 0 })
        ));
    }

    #[test]
    fn invalid_mutf8_is_reported_with_index() {
        let mut blob = build_dex(&["ab"]);
        // Corrupt the first content byte with a stray continuation byte.
        let data_start = HEADER_SIZE + 4 + 1; // ids table + uleb length byte
        blob.bytes[data_start] = 0x80;
        assert!(matches!(
            extract_string_pool(&blob),
            Err(DexError::Mutf8DecodeError { index: 0, .. })
        ));
    }

    #[test]
    fn uleb128_decoding() {
        let cases: Vec<(Vec<u8>, u32)> = vec![
            (vec![0x00], 0),
            (vec![0x7F], 127),
            (vec![0x80, 0x01], 128),
            (vec![0xE5, 0x8E, 0x26], 624485),
        ];
        for (bytes, expected) in cases {
            let mut pos = 0;
            assert_eq!(read_uleb128(&bytes, &mut pos), Some(expected));
            assert_eq!(pos, bytes.len());
        }
        // Unterminated.
        let mut pos = 0;
        assert_eq!(read_uleb128(&[0x80], &mut pos), None);
        // Too long (overflow guard).
        let mut pos = 0;
        assert_eq!(read_uleb128(&[0x80, 0x80, 0x80, 0x80, 0x80, 0x01], &mut pos), None);
    }
}
