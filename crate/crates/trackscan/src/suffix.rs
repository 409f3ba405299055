//! Public-suffix list handling.
//!
//! A suffix list tells the matcher where the registrable part of a hostname
//! begins: for `a.b.foo.co.uk` with `co.uk` listed, the registrable domain is
//! `foo.co.uk`. We ship a snapshot subset of the public suffix list with the
//! seed knowledge base; users supply their own alongside their KB files.

use std::collections::BTreeSet;

/// An immutable set of public suffixes (`com`, `co.uk`, ...), stored
/// lowercase without leading dots.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SuffixList {
    suffixes: BTreeSet<String>,
}

impl SuffixList {
    /// Parses the one-suffix-per-line format: lines are trimmed, blank lines
    /// and `#` comments are skipped, entries are lowercased and any leading
    /// dot is dropped (so `.com` and `com` are the same entry).
    pub fn parse(text: &str) -> SuffixList {
        let mut suffixes = BTreeSet::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let entry = line.trim_start_matches('.').to_ascii_lowercase();
            if !entry.is_empty() {
                suffixes.insert(entry);
            }
        }
        SuffixList { suffixes }
    }

    /// Builds a list from pre-normalized entries (used by tests).
    pub fn from_entries<I, S>(entries: I) -> SuffixList
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SuffixList {
            suffixes: entries.into_iter().map(|s| s.into().to_ascii_lowercase()).collect(),
        }
    }

    pub fn contains(&self, suffix: &str) -> bool {
        self.suffixes.contains(suffix)
    }

    pub fn len(&self) -> usize {
        self.suffixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.suffixes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.suffixes.iter().map(|s| s.as_str())
    }

    /// Finds the longest listed suffix that terminates `host` at a label
    /// boundary, returning the number of labels it spans. `host` must be
    /// lowercase. Returns `None` when no listed suffix matches.
    ///
    /// "Longest" is measured in labels: for `x.ac.uk` with both `uk` and
    /// `ac.uk` listed, the match is `ac.uk` (2 labels).
    pub fn longest_match_labels(&self, host: &str) -> Option<usize> {
        let labels: Vec<&str> = host.split('.').collect();
        for start in 0..labels.len() {
            let candidate = labels[start..].join(".");
            if self.contains(&candidate) {
                return Some(labels.len() - start);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_skips_comments_and_blanks() {
        let list = SuffixList::parse("# a comment\n\ncom\n  net  \n.org\nCO.UK\n");
        assert_eq!(list.len(), 4);
        assert!(list.contains("com"));
        assert!(list.contains("net"));
        assert!(list.contains("org"));
        assert!(list.contains("co.uk"));
        assert!(!list.contains("# a comment"));
    }

    #[test]
    fn longest_match_prefers_more_labels() {
        let list = SuffixList::from_entries(["uk", "co.uk", "com"]);
        assert_eq!(list.longest_match_labels("foo.co.uk"), Some(2));
        assert_eq!(list.longest_match_labels("foo.uk"), Some(1));
        assert_eq!(list.longest_match_labels("example.com"), Some(1));
        assert_eq!(list.longest_match_labels("example.dev"), None);
    }

    #[test]
    fn whole_host_can_be_a_suffix() {
        let list = SuffixList::from_entries(["co.uk"]);
        assert_eq!(list.longest_match_labels("co.uk"), Some(2));
    }
}
