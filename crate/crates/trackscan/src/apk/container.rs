//! Minimal ZIP container reader, driven by the end-of-central-directory
//! record as the format requires.
//!
//! Reading is deliberately lazy: opening an archive touches only the EOCD
//! window at the tail of the file and the central directory it points at.
//! Entry payloads (and even their local headers) are read only when an
//! entry is actually extracted — corpus scans list thousands of archives
//! but extract just the `classes*.dex` members.
//!
//! Supported: stored and deflate entries, ZIP32. Not supported: zip64,
//! multi-disk archives, encrypted entries. Central-directory sizes are
//! authoritative (local headers may carry zeros when the writer streamed
//! with data descriptors).

use std::io::{Read, Seek, SeekFrom};

use super::ApkError;

const EOCD_SIG: [u8; 4] = [0x50, 0x4B, 0x05, 0x06];
const CD_ENTRY_SIG: [u8; 4] = [0x50, 0x4B, 0x01, 0x02];
const LOCAL_HEADER_SIG: [u8; 4] = [0x50, 0x4B, 0x03, 0x04];

/// EOCD record length without the trailing comment.
const EOCD_LEN: u64 = 22;
/// Longest possible tail: EOCD plus a maximal (65535-byte) comment.
const MAX_EOCD_WINDOW: u64 = EOCD_LEN + u16::MAX as u64;

pub const METHOD_STORED: u16 = 0;
pub const METHOD_DEFLATE: u16 = 8;

/// One central-directory entry, as listed (nothing decompressed).
#[derive(Debug, Clone)]
pub struct RawEntry {
    pub name: String,
    pub method: u16,
    pub flags: u16,
    pub crc32: u32,
    pub compressed_size: u32,
    pub uncompressed_size: u32,
    pub local_header_offset: u32,
}

pub struct ZipReader<R> {
    reader: R,
    entries: Vec<RawEntry>,
}

impl<R> std::fmt::Debug for ZipReader<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ZipReader")
            .field("entries", &self.entries.len())
            .finish_non_exhaustive()
    }
}

fn u16_at(bytes: &[u8], offset: usize) -> u16 {
    u16::from_le_bytes([bytes[offset], bytes[offset + 1]])
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4-byte slice"))
}

impl<R: Read + Seek> ZipReader<R> {
    /// Opens an archive: locates the EOCD record and parses the central
    /// directory. Payload byte ranges are never touched here.
    pub fn open(mut reader: R) -> Result<ZipReader<R>, ApkError> {
        let file_len = reader.seek(SeekFrom::End(0))?;
        if file_len < EOCD_LEN {
            return Err(ApkError::NotAZipContainer);
        }

        // Grow the tail window only as needed: archives without a comment
        // (the overwhelmingly common case) resolve with a 22-byte read, so
        // opening never strays into entry data.
        let max_window = file_len.min(MAX_EOCD_WINDOW);
        let mut window_len = EOCD_LEN;
        let (eocd, eocd_pos) = loop {
            let start = file_len - window_len;
            reader.seek(SeekFrom::Start(start))?;
            let mut window = vec![0u8; window_len as usize];
            reader.read_exact(&mut window)?;
            if let Some(pos) = find_eocd(&window) {
                break (window[pos..pos + EOCD_LEN as usize].to_vec(), start + pos as u64);
            }
            if window_len == max_window {
                return Err(ApkError::NotAZipContainer);
            }
            window_len = (window_len * 64).min(max_window);
        };

        let disk_num = u16_at(&eocd, 4);
        let cd_disk = u16_at(&eocd, 6);
        let disk_entries = u16_at(&eocd, 8);
        let total_entries = u16_at(&eocd, 10);
        let cd_size = u32_at(&eocd, 12);
        let cd_offset = u32_at(&eocd, 16);

        if disk_num != 0 || cd_disk != 0 || disk_entries != total_entries {
            return Err(ApkError::Unsupported("multi-disk archive"));
        }
        if total_entries == u16::MAX || cd_size == u32::MAX || cd_offset == u32::MAX {
            return Err(ApkError::Unsupported("zip64 archive"));
        }
        if u64::from(cd_offset) + u64::from(cd_size) > eocd_pos {
            return Err(ApkError::TruncatedArchive(
                "central directory extends past its end record".to_string(),
            ));
        }

        reader.seek(SeekFrom::Start(u64::from(cd_offset)))?;
        let mut cd = vec![0u8; cd_size as usize];
        reader.read_exact(&mut cd).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                ApkError::TruncatedArchive("central directory cut short".to_string())
            } else {
                ApkError::Io(e)
            }
        })?;

        let entries = parse_central_directory(&cd, total_entries)?;
        Ok(ZipReader { reader, entries })
    }

    pub fn entries(&self) -> &[RawEntry] {
        &self.entries
    }

    /// Reads and decompresses the payload of entry `index`.
    pub fn read_entry(&mut self, index: usize) -> Result<Vec<u8>, ApkError> {
        let entry = self.entries[index].clone();
        if entry.flags & 0x0001 != 0 {
            return Err(ApkError::Unsupported("encrypted entry"));
        }

        self.reader.seek(SeekFrom::Start(u64::from(entry.local_header_offset)))?;
        let mut local = [0u8; 30];
        self.reader.read_exact(&mut local).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                ApkError::TruncatedArchive(format!("local header of `{}` cut short", entry.name))
            } else {
                ApkError::Io(e)
            }
        })?;
        if local[0..4] != LOCAL_HEADER_SIG {
            return Err(ApkError::TruncatedArchive(format!(
                "entry `{}` has a bad local header signature",
                entry.name
            )));
        }
        // Local name/extra lengths may differ from the central copies;
        // trust the local ones to find the data start.
        let name_len = u16_at(&local, 26);
        let extra_len = u16_at(&local, 28);
        self.reader.seek(SeekFrom::Current(i64::from(name_len) + i64::from(extra_len)))?;

        let mut compressed = vec![0u8; entry.compressed_size as usize];
        self.reader.read_exact(&mut compressed).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                ApkError::TruncatedArchive(format!("data of `{}` cut short", entry.name))
            } else {
                ApkError::Io(e)
            }
        })?;

        let data = match entry.method {
            METHOD_STORED => {
                if entry.compressed_size != entry.uncompressed_size {
                    return Err(ApkError::DecompressionError {
                        entry: entry.name.clone(),
                        detail: format!(
                            "stored entry size mismatch ({} compressed vs {} uncompressed)",
                            entry.compressed_size, entry.uncompressed_size
                        ),
                    });
                }
                compressed
            }
            METHOD_DEFLATE => {
                let mut out = Vec::with_capacity(entry.uncompressed_size as usize);
                flate2::read::DeflateDecoder::new(compressed.as_slice())
                    .read_to_end(&mut out)
                    .map_err(|e| ApkError::DecompressionError {
                        entry: entry.name.clone(),
                        detail: e.to_string(),
                    })?;
                out
            }
            other => {
                return Err(ApkError::UnsupportedCompressionMethod {
                    entry: entry.name.clone(),
                    method: other,
                })
            }
        };

        if data.len() as u64 != u64::from(entry.uncompressed_size) {
            return Err(ApkError::DecompressionError {
                entry: entry.name.clone(),
                detail: format!(
                    "decompressed to {} bytes, expected {}",
                    data.len(),
                    entry.uncompressed_size
                ),
            });
        }
        Ok(data)
    }
}

/// Finds the EOCD record in a tail window: the last signature whose comment
/// length exactly reaches the end of the file.
fn find_eocd(window: &[u8]) -> Option<usize> {
    if window.len() < EOCD_LEN as usize {
        return None;
    }
    for pos in (0..=window.len() - EOCD_LEN as usize).rev() {
        if window[pos..pos + 4] == EOCD_SIG {
            let comment_len = u16_at(window, pos + 20) as usize;
            if pos + EOCD_LEN as usize + comment_len == window.len() {
                return Some(pos);
            }
        }
    }
    None
}

fn parse_central_directory(cd: &[u8], total_entries: u16) -> Result<Vec<RawEntry>, ApkError> {
    let mut entries = Vec::with_capacity(total_entries as usize);
    let mut pos = 0usize;
    for _ in 0..total_entries {
        if pos + 46 > cd.len() {
            return Err(ApkError::TruncatedArchive(
                "central directory ends mid-entry".to_string(),
            ));
        }
        if cd[pos..pos + 4] != CD_ENTRY_SIG {
            return Err(ApkError::TruncatedArchive(
                "bad central directory entry signature".to_string(),
            ));
        }
        let flags = u16_at(cd, pos + 8);
        let method = u16_at(cd, pos + 10);
        let crc32 = u32_at(cd, pos + 16);
        let compressed_size = u32_at(cd, pos + 20);
        let uncompressed_size = u32_at(cd, pos + 24);
        let name_len = u16_at(cd, pos + 28) as usize;
        let extra_len = u16_at(cd, pos + 30) as usize;
        let comment_len = u16_at(cd, pos + 32) as usize;
        let local_header_offset = u32_at(cd, pos + 42);
        if pos + 46 + name_len > cd.len() {
            return Err(ApkError::TruncatedArchive(
                "central directory name field cut short".to_string(),
            ));
        }
        let name = String::from_utf8_lossy(&cd[pos + 46..pos + 46 + name_len]).into_owned();
        entries.push(RawEntry {
            name,
            method,
            flags,
            crc32,
            compressed_size,
            uncompressed_size,
            local_header_offset,
        });
        pos += 46 + name_len + extra_len + comment_len;
        if pos > cd.len() {
            return Err(ApkError::TruncatedArchive(
                "central directory entry overruns directory".to_string(),
            ));
        }
    }
    Ok(entries)
}
