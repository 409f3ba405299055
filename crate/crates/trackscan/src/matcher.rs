//! Hostname normalization and tracker matching.
//!
//! Candidates coming out of the scanner are full hostnames, often with
//! subdomains (`ssl.google-analytics.com`). Tracker knowledge bases record
//! registrable domains (`google-analytics.com`). [`normalize_host`] bridges
//! the two by cutting a hostname down to its public suffix plus one label.
//!
//! [`match_candidate`] implements the substring rule used when matching a
//! known tracker domain against arbitrary extracted text: an occurrence
//! counts unless the character after it is a dot or a letter (so
//! `google.com/somepath` matches `google.com`, while `google.com.domain` and
//! `google.coming` do not). That right-boundary-only rule admits
//! `notgoogle.com`, so the default [`MatchMode::Strict`] additionally
//! requires the occurrence to start at a label boundary;
//! [`MatchMode::PaperCompat`] keeps the permissive behaviour.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dex::HostCandidate;
use crate::kb::TrackerKb;
use crate::suffix::SuffixList;

/// A hostname reduced to its registrable form: one label plus the public
/// suffix, lowercase.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizedDomain(String);

impl NormalizedDomain {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl std::fmt::Display for NormalizedDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NormalizedDomain {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchError {
    /// The hostname is itself a bare public suffix (`co.uk`): there is no
    /// registrable label to keep.
    #[error("`{0}` is a bare public suffix with no registrable domain")]
    NoRegistrableDomain(String),
}

/// How tracker domains are matched against extracted candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Require the matched domain to sit at a label boundary on the left as
    /// well (`notgoogle.com` does not match `google.com`).
    Strict,
    /// Right-boundary rule only, exactly as published: an occurrence is
    /// excluded only when followed by a dot or an alphabetic character.
    PaperCompat,
}

/// Cuts `raw` down to its registrable domain: the longest public suffix
/// found in `suffix_list` plus exactly one preceding label. When no listed
/// suffix matches, the final label is treated as the suffix. The input is
/// lowercased first; it is expected to be a dot-separated hostname.
pub fn normalize_host(raw: &str, suffix_list: &SuffixList) -> Result<NormalizedDomain, MatchError> {
    let host = raw.to_ascii_lowercase();
    let labels: Vec<&str> = host.split('.').collect();
    // Fall back to a one-label suffix (the TLD) when the list has no entry.
    let suffix_labels = suffix_list.longest_match_labels(&host).unwrap_or(1);
    if suffix_labels >= labels.len() {
        return Err(MatchError::NoRegistrableDomain(host));
    }
    let keep = suffix_labels + 1;
    let registrable = labels[labels.len() - keep..].join(".");
    Ok(NormalizedDomain(registrable))
}

/// Tests whether `tracker_domain` occurs in `candidate_text` under the
/// matching rule for `mode`. `tracker_domain` must be a normalized
/// (lowercase) domain; `candidate_text` may be any extracted string,
/// including one with a path attached. The comparison is case-insensitive.
pub fn match_candidate(tracker_domain: &str, candidate_text: &str, mode: MatchMode) -> bool {
    if tracker_domain.is_empty() {
        return false;
    }
    let text = candidate_text.to_ascii_lowercase();
    let needle = tracker_domain.to_ascii_lowercase();
    let bytes = text.as_bytes();
    let mut from = 0;
    while let Some(rel) = text[from..].find(&needle) {
        let start = from + rel;
        let end = start + needle.len();
        let right_ok = match bytes.get(end) {
            None => true,
            Some(&b) => b != b'.' && !b.is_ascii_alphabetic(),
        };
        let left_ok = match mode {
            MatchMode::PaperCompat => true,
            MatchMode::Strict => start == 0 || bytes[start - 1] == b'.',
        };
        if right_ok && left_ok {
            return true;
        }
        from = start + 1;
    }
    false
}

/// Per-app attribution result.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppProfile {
    pub app_id: String,
    /// Distinct registrable tracker domains found in the app.
    pub tracker_domains: BTreeSet<NormalizedDomain>,
    /// Companies owning those domains (subsidiary level).
    pub companies: BTreeSet<String>,
    /// Topmost owners of those companies.
    pub root_parents: BTreeSet<String>,
    /// Countries of the matched companies and every company above them in
    /// the ownership chain.
    pub countries: BTreeSet<String>,
    /// Permission names from the app manifest, in document order.
    pub permissions: Vec<String>,
    /// Raw number of host candidates examined (pre-deduplication).
    pub candidate_count: u64,
    /// Candidates that could not be reduced to a registrable domain
    /// (bare public suffixes).
    pub skipped_candidates: u64,
}

impl AppProfile {
    pub fn new(app_id: impl Into<String>) -> AppProfile {
        AppProfile { app_id: app_id.into(), ..AppProfile::default() }
    }
}

/// Matches every candidate against the KB and aggregates the result. In
/// [`MatchMode::Strict`] a candidate counts when its normalized form is a KB
/// domain; in [`MatchMode::PaperCompat`] a candidate counts when
/// [`match_candidate`] fires for any KB domain against the raw candidate
/// text. Companies, root parents and countries are deduplicated sets; the
/// country set covers each matched company and all of its ancestors.
///
/// Per-candidate failures are never fatal: candidates without a registrable
/// form are tallied in `skipped_candidates` and skipped.
pub fn profile_app(
    app_id: &str,
    candidates: &[HostCandidate],
    kb: &TrackerKb,
    suffix_list: &SuffixList,
    mode: MatchMode,
) -> AppProfile {
    let mut profile = AppProfile::new(app_id);
    profile.candidate_count = candidates.len() as u64;

    for candidate in candidates {
        match mode {
            MatchMode::Strict => match normalize_host(&candidate.text, suffix_list) {
                Ok(normalized) => {
                    if kb.resolve_company(normalized.as_str()).is_some() {
                        profile.tracker_domains.insert(normalized);
                    }
                }
                Err(MatchError::NoRegistrableDomain(_)) => profile.skipped_candidates += 1,
            },
            MatchMode::PaperCompat => {
                // The published rule matches KB domains as substrings of the
                // extracted text, so normalization of the candidate itself is
                // not part of the decision. Still tally unnormalizable
                // candidates to keep the counter meaningful across modes.
                if normalize_host(&candidate.text, suffix_list).is_err() {
                    profile.skipped_candidates += 1;
                }
                for domain in kb.domains().keys() {
                    if match_candidate(domain, &candidate.text, MatchMode::PaperCompat) {
                        profile.tracker_domains.insert(NormalizedDomain(domain.clone()));
                    }
                }
            }
        }
    }

    for domain in &profile.tracker_domains {
        let Some(company_id) = kb.resolve_company(domain.as_str()) else {
            continue; // unreachable for validated KBs; domains came from the KB
        };
        profile.companies.insert(company_id.to_string());
        if let Ok(root) = kb.root_parent(company_id) {
            profile.root_parents.insert(root.to_string());
        }
        for ancestor in kb.ancestry(company_id).unwrap_or_default() {
            profile.countries.insert(ancestor.country.clone());
        }
    }

    profile
}
