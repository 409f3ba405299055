//! Hostname extraction from DEX content.
//!
//! Two modes cover two fidelity/robustness trade-offs:
//!
//! * [`scan_hosts_structured`] walks decoded string-pool entries. This is
//!   the default: it only sees real constants, so a length byte or stray
//!   binary can never glue two strings together.
//! * [`scan_hosts_raw`] runs the same grammar over the raw file bytes,
//!   header or no header — the compatibility mode matching a plain regex
//!   scan over bytecode. It sees everything the structured mode sees (pool
//!   bytes are a subrange of the file) plus hostname-shaped runs anywhere
//!   else.
//!
//! The grammar: one or more labels (`[a-z0-9]` optionally followed by
//! `[a-z0-9-]*[a-z0-9]`) each terminated by a dot, then an alphabetic TLD of
//! length ≥ 2; case-insensitive; matches longer than 253 bytes are
//! discarded. Extraction is deliberately permissive — `google.coming` is a
//! legitimate hostname shape and survives extraction; the matcher applies
//! the exclusion rule that finally rejects it.

use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::apk::DexBlob;

/// Maximum hostname length in bytes; longer matches are dropped.
pub const MAX_HOSTNAME_LEN: usize = 253;

static HOST_RE: LazyLock<regex::bytes::Regex> = LazyLock::new(|| {
    // (?i-u): ASCII-only case folding; the grammar is pure ASCII and the
    // haystack is raw bytes. Trailing punctuation ('/', ':', '?') simply
    // does not participate in the match, so schemes and paths fall away.
    regex::bytes::Regex::new(r"(?i-u)(?:[a-z0-9](?:[a-z0-9-]*[a-z0-9])?\.)+[a-z]{2,}")
        .expect("hostname grammar compiles")
});

/// Which extraction produced a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    StringPool,
    RawScan,
}

impl std::fmt::Display for ScanMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScanMode::StringPool => "string_pool",
            ScanMode::RawScan => "raw_scan",
        })
    }
}

/// A hostname-shaped string pulled out of app bytecode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostCandidate {
    /// The matched text, lowercased. No scheme, path, port or uppercase.
    pub text: String,
    /// Name of the DEX entry (or input file) the candidate came from.
    pub source_entry: String,
    /// Byte offset of the match: within the whole blob for
    /// [`ScanMode::RawScan`], within the containing pool string for
    /// [`ScanMode::StringPool`].
    pub source_offset: u64,
    pub mode: ScanMode,
}

fn push_matches(
    haystack: &[u8],
    source_entry: &str,
    mode: ScanMode,
    out: &mut Vec<HostCandidate>,
) {
    for m in HOST_RE.find_iter(haystack) {
        if m.len() > MAX_HOSTNAME_LEN {
            continue;
        }
        // The grammar only matches ASCII bytes, so this is always valid UTF-8.
        let text = String::from_utf8_lossy(m.as_bytes()).to_ascii_lowercase();
        out.push(HostCandidate {
            text,
            source_entry: source_entry.to_string(),
            source_offset: m.start() as u64,
            mode,
        });
    }
}

fn sort_candidates(candidates: &mut [HostCandidate]) {
    candidates.sort_by(|a, b| {
        (a.source_offset, a.text.as_str()).cmp(&(b.source_offset, b.text.as_str()))
    });
}

/// Extracts every maximal hostname-shaped substring from a set of decoded
/// strings (typically a DEX string pool). One candidate per occurrence;
/// output sorted by (source_offset, text).
pub fn scan_hosts_structured(strings: &[String], source_entry: &str) -> Vec<HostCandidate> {
    let mut out = Vec::new();
    for s in strings {
        push_matches(s.as_bytes(), source_entry, ScanMode::StringPool, &mut out);
    }
    sort_candidates(&mut out);
    out
}

/// Scans raw bytes for hostname-shaped ASCII runs. Needs no valid DEX
/// header — this is the compatibility path for arbitrary bytecode blobs.
/// Offsets are byte positions in the blob; output sorted by
/// (source_offset, text).
pub fn scan_hosts_raw(blob: &DexBlob) -> Vec<HostCandidate> {
    let mut out = Vec::new();
    push_matches(&blob.bytes, &blob.entry_name, ScanMode::RawScan, &mut out);
    sort_candidates(&mut out);
    out
}

/// Convenience: parse the string pool of a valid DEX blob and scan it.
pub fn scan_dex_structured(blob: &DexBlob) -> Result<Vec<HostCandidate>, super::DexError> {
    let pool = super::extract_string_pool(blob)?;
    Ok(scan_hosts_structured(&pool, &blob.entry_name))
}
