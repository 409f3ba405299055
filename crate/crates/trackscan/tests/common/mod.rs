//! Shared fixture builders for integration tests and benches.
//!
//! The DEX builder here is written from the format description, not from
//! the parser under test, so round-trips exercise two independent
//! implementations. Likewise the archive builder uses the `zip` crate
//! rather than this project's container reader.

#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};

/// ULEB128-encode a value (general form; the fixtures here stay short).
pub fn uleb128(mut value: u32) -> Vec<u8> {
    let mut out = Vec::new();
    loop {
        let byte = (value & 0x7F) as u8;
        value >>= 7;
        if value == 0 {
            out.push(byte);
            break;
        }
        out.push(byte | 0x80);
    }
    out
}

/// Builds a minimal valid DEX file (version 035) holding the given string
/// pool, returning the bytes plus, per string, the byte offset where its
/// encoded text starts (after the ULEB length prefix) — the offset a raw
/// byte scan should report for a match at the start of that string.
///
/// Keep fixture strings shorter than 45 UTF-16 units: longer pools put an
/// alphanumeric byte into the ULEB length prefix, which a raw byte scan
/// legitimately absorbs into an adjacent hostname run, and the fixtures
/// want pool text and raw text to line up exactly.
pub fn build_dex_with_offsets(strings: &[&str]) -> (Vec<u8>, Vec<usize>) {
    const HEADER_SIZE: u32 = 112;
    let string_ids_off = HEADER_SIZE;
    let string_ids_size = strings.len() as u32;
    let data_off = string_ids_off + 4 * string_ids_size;

    let mut data = Vec::new();
    let mut id_offsets = Vec::new();
    let mut text_offsets = Vec::new();
    for s in strings {
        id_offsets.push(data_off + data.len() as u32);
        let utf16_len = s.encode_utf16().count() as u32;
        data.extend_from_slice(&uleb128(utf16_len));
        text_offsets.push((data_off + data.len() as u32) as usize);
        data.extend_from_slice(&cesu8::to_java_cesu8(s));
        data.push(0);
    }

    let file_size = data_off + data.len() as u32;
    let mut dex = Vec::with_capacity(file_size as usize);
    dex.extend_from_slice(b"dex\n035\0");
    dex.extend_from_slice(&0xDEAD_BEEFu32.to_le_bytes()); // checksum (unverified)
    dex.extend_from_slice(&[0u8; 20]); // sha-1 signature (unverified)
    dex.extend_from_slice(&file_size.to_le_bytes());
    dex.extend_from_slice(&HEADER_SIZE.to_le_bytes());
    dex.extend_from_slice(&0x1234_5678u32.to_le_bytes()); // endian tag
    dex.extend_from_slice(&[0u8; 8]); // link_size, link_off
    dex.extend_from_slice(&0u32.to_le_bytes()); // map_off
    dex.extend_from_slice(&string_ids_size.to_le_bytes());
    dex.extend_from_slice(&string_ids_off.to_le_bytes());
    dex.extend_from_slice(&[0u8; 40]); // type/proto/field/method/class tables
    dex.extend_from_slice(&(data.len() as u32).to_le_bytes()); // data_size
    dex.extend_from_slice(&data_off.to_le_bytes());
    assert_eq!(dex.len(), HEADER_SIZE as usize);
    for off in &id_offsets {
        dex.extend_from_slice(&off.to_le_bytes());
    }
    dex.extend_from_slice(&data);
    (dex, text_offsets)
}

pub fn build_dex(strings: &[&str]) -> Vec<u8> {
    build_dex_with_offsets(strings).0
}

/// Writes an in-memory ZIP archive with the `zip` crate (deflate).
pub fn zip_bytes(entries: &[(&str, &[u8])]) -> Vec<u8> {
    let mut writer = zip::ZipWriter::new(std::io::Cursor::new(Vec::new()));
    for (name, bytes) in entries {
        writer
            .start_file(*name, zip::write::SimpleFileOptions::default())
            .unwrap();
        writer.write_all(bytes).unwrap();
    }
    writer.finish().unwrap().into_inner()
}

/// Writes an APK to disk whose classes.dex pool holds the given strings.
pub fn write_apk(path: &Path, pool: &[&str]) {
    let dex = build_dex(pool);
    let bytes = zip_bytes(&[("classes.dex", dex.as_slice())]);
    std::fs::write(path, bytes).unwrap();
}

/// Lays a seed knowledge base down in `dir` and returns the directory.
pub fn seed_kb_dir(dir: &Path) -> PathBuf {
    trackscan::kb::write_seed_bundle(dir).unwrap();
    dir.to_path_buf()
}
