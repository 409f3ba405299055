//! APK ingestion: open the ZIP container, list entries, extract DEX blobs
//! and parse permissions out of decoded manifest XML.
//!
//! An APK is an ordinary ZIP archive; everything this crate needs from it is
//! the `classes*.dex` members and (optionally) a decoded
//! `AndroidManifest.xml`. Binary AXML manifests are out of scope — only
//! plain-text XML is parsed.

pub mod container;

use std::fmt;
use std::fs::File;
use std::io::{BufReader, Read, Seek};
use std::path::{Path, PathBuf};

use quick_xml::events::Event;
use thiserror::Error;

use container::{RawEntry, ZipReader, METHOD_DEFLATE, METHOD_STORED};

#[derive(Debug, Error)]
pub enum ApkError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a ZIP container (no end-of-central-directory record)")]
    NotAZipContainer,
    #[error("truncated or corrupt archive: {0}")]
    TruncatedArchive(String),
    #[error("entry `{entry}` uses unsupported compression method {method}")]
    UnsupportedCompressionMethod { entry: String, method: u16 },
    #[error("entry `{entry}` failed to decompress: {detail}")]
    DecompressionError { entry: String, detail: String },
    #[error("entry `{0}` not found in archive")]
    EntryNotFound(String),
    #[error("malformed manifest XML: {0}")]
    MalformedXml(String),
    #[error("unsupported archive feature: {0}")]
    Unsupported(&'static str),
}

/// Compression method of an archive entry. Anything beyond stored/deflate
/// is listed as unsupported rather than failing the whole archive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompressionMethod {
    Stored,
    Deflate,
    Unsupported(u16),
}

impl CompressionMethod {
    fn from_raw(method: u16) -> CompressionMethod {
        match method {
            METHOD_STORED => CompressionMethod::Stored,
            METHOD_DEFLATE => CompressionMethod::Deflate,
            other => CompressionMethod::Unsupported(other),
        }
    }
}

impl fmt::Display for CompressionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompressionMethod::Stored => f.write_str("stored"),
            CompressionMethod::Deflate => f.write_str("deflate"),
            CompressionMethod::Unsupported(m) => write!(f, "unsupported({m})"),
        }
    }
}

/// One entry in the archive listing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApkEntry {
    pub name: String,
    pub compressed_size: u64,
    pub uncompressed_size: u64,
    pub method: CompressionMethod,
}

/// A raw DEX bytecode blob extracted from an APK.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DexBlob {
    /// Archive entry name, e.g. `classes.dex` or `classes2.dex`.
    pub entry_name: String,
    pub bytes: Vec<u8>,
}

/// An opened APK: the entry listing plus a lazy reader. Duplicate entry
/// names in the container are surfaced in the listing as-is; extraction by
/// name resolves to the last occurrence (with a warning).
pub struct ApkArchive<R> {
    source_path: PathBuf,
    entries: Vec<ApkEntry>,
    zip: ZipReader<R>,
}

impl<R> std::fmt::Debug for ApkArchive<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ApkArchive")
            .field("source_path", &self.source_path)
            .field("entries", &self.entries.len())
            .finish_non_exhaustive()
    }
}

/// Opens an APK file. Reads only the archive tail and the central
/// directory; no entry payload is touched until extraction.
pub fn open_apk(path: &Path) -> Result<ApkArchive<BufReader<File>>, ApkError> {
    let file = File::open(path)?;
    ApkArchive::from_reader(BufReader::new(file), path)
}

impl<R: Read + Seek> ApkArchive<R> {
    /// Opens an APK from any seekable reader; `source` labels it in errors
    /// and reports.
    pub fn from_reader(reader: R, source: &Path) -> Result<ApkArchive<R>, ApkError> {
        let zip = ZipReader::open(reader)?;
        let entries = zip
            .entries()
            .iter()
            .map(|e: &RawEntry| ApkEntry {
                name: e.name.clone(),
                compressed_size: u64::from(e.compressed_size),
                uncompressed_size: u64::from(e.uncompressed_size),
                method: CompressionMethod::from_raw(e.method),
            })
            .collect();
        Ok(ApkArchive { source_path: source.to_path_buf(), entries, zip })
    }

    pub fn source_path(&self) -> &Path {
        &self.source_path
    }

    /// Entry listing in central-directory order, duplicates included.
    pub fn entries(&self) -> &[ApkEntry] {
        &self.entries
    }

    /// Extracts an entry by name. With duplicate names, the last occurrence
    /// wins and a warning is logged.
    pub fn read_entry_by_name(&mut self, name: &str) -> Result<Vec<u8>, ApkError> {
        let matches: Vec<usize> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.name == name)
            .map(|(i, _)| i)
            .collect();
        let &index = matches.last().ok_or_else(|| ApkError::EntryNotFound(name.to_string()))?;
        if matches.len() > 1 {
            log::warn!(
                "{}: entry `{name}` appears {} times; extracting the last occurrence",
                self.source_path.display(),
                matches.len()
            );
        }
        self.zip.read_entry(index)
    }
}

/// Numeric sort key for multidex entry names: `classes.dex` sorts first,
/// then `classesN.dex` in ascending N. Non-dex names yield `None`.
fn dex_ordinal(name: &str) -> Option<u64> {
    let digits = name.strip_prefix("classes")?.strip_suffix(".dex")?;
    if digits.is_empty() {
        return Some(0); // bare classes.dex leads
    }
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    // classes2.dex is the conventional second file; saturate rather than
    // reject pathological digit strings.
    Some(digits.parse::<u64>().unwrap_or(u64::MAX).saturating_add(1))
}

/// Extracts all `classes[0-9]*.dex` entries, decompressed, ordered
/// `classes.dex` first and then by ascending number. Returns an empty list
/// when the archive has no DEX members (a valid, trackerless APK).
pub fn extract_dex_files<R: Read + Seek>(
    archive: &mut ApkArchive<R>,
) -> Result<Vec<DexBlob>, ApkError> {
    let mut names: Vec<(u64, String)> = archive
        .entries()
        .iter()
        .filter_map(|e| dex_ordinal(&e.name).map(|ord| (ord, e.name.clone())))
        .collect();
    names.sort();
    names.dedup(); // duplicate container names extract once (last occurrence)
    let mut blobs = Vec::with_capacity(names.len());
    for (_, name) in names {
        let bytes = archive.read_entry_by_name(&name)?;
        blobs.push(DexBlob { entry_name: name, bytes });
    }
    Ok(blobs)
}

/// Pulls the `android:name` values of all `uses-permission` elements out of
/// a decoded (plain-text) manifest, deduplicated, in document order of
/// first occurrence.
pub fn extract_manifest_permissions(manifest_xml: &str) -> Result<Vec<String>, ApkError> {
    let mut reader = quick_xml::Reader::from_str(manifest_xml);
    reader.config_mut().check_end_names = true;
    let mut permissions: Vec<String> = Vec::new();
    loop {
        match reader.read_event() {
            Ok(Event::Start(e)) | Ok(Event::Empty(e)) => {
                if e.name().as_ref() != b"uses-permission" {
                    continue;
                }
                for attr in e.attributes() {
                    let attr = attr.map_err(|err| ApkError::MalformedXml(err.to_string()))?;
                    if attr.key.as_ref() == b"android:name" {
                        let value = attr
                            .unescape_value()
                            .map_err(|err| ApkError::MalformedXml(err.to_string()))?
                            .into_owned();
                        if !permissions.contains(&value) {
                            permissions.push(value);
                        }
                    }
                }
            }
            Ok(Event::Eof) => break,
            Ok(_) => {}
            Err(err) => return Err(ApkError::MalformedXml(err.to_string())),
        }
    }
    Ok(permissions)
}
