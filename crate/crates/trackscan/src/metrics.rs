//! Corpus statistics: descriptive distribution summaries, Gini
//! concentration, prevalence tables, genre grouping, and rank-distance
//! comparisons between prevalence orderings.
//!
//! Everything here is deterministic and auditable: percentages are always
//! recomputed from the integer counts carried alongside them, quantiles use
//! integer rational arithmetic, and sums that feed tolerance-sensitive
//! results (Gini) are compensated.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcher::AppProfile;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty input")]
    EmptyInput,
    #[error("values sum to zero; concentration is undefined")]
    ZeroMean,
    #[error("value at index {index} is negative or not finite")]
    NegativeValue { index: usize },
    #[error("duplicate ranking item `{0}`")]
    DuplicateItem(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("I/O error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Rounds to two decimal places — the precision every reported percentage
/// uses, applied once at computation so repeated serialization is
/// byte-identical.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Percentage of `count` out of `total`, rounded to two decimals.
pub fn percentage(count: u64, total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    round2(count as f64 * 100.0 / total as f64)
}

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

/// Five-point summary of a count distribution plus threshold tallies.
/// Counts are carried next to their percentages so any consumer can verify
/// `pct = 100 * count / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: u64,
    pub median: u64,
    pub q1: u64,
    pub q3: u64,
    pub threshold: u64,
    pub count_above_threshold: u64,
    /// Share of values strictly greater than `threshold`.
    pub pct_above_threshold: f64,
    pub count_zero: u64,
    pub pct_zero: f64,
}

/// Nearest-rank (lower) quantile index: `ceil(p * n) - 1` into the sorted
/// list, with p given as `num/den` and evaluated in integer arithmetic so
/// no float rounding can shift the rank.
fn quantile_index(n: usize, num: usize, den: usize) -> usize {
    (n * num + den - 1) / den - 1
}

/// Summarizes a list of per-app counts. The quantiles are nearest-rank
/// (lower) order statistics: actual values from the data, never
/// interpolated. `pct_above_threshold` counts values strictly greater than
/// `threshold`.
pub fn descriptive_stats(values: &[u64], threshold: u64) -> Result<DescriptiveStats, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let count_above_threshold = values.iter().filter(|&&v| v > threshold).count() as u64;
    let count_zero = values.iter().filter(|&&v| v == 0).count() as u64;
    Ok(DescriptiveStats {
        n: n as u64,
        median: sorted[quantile_index(n, 1, 2)],
        q1: sorted[quantile_index(n, 1, 4)],
        q3: sorted[quantile_index(n, 3, 4)],
        threshold,
        count_above_threshold,
        pct_above_threshold: percentage(count_above_threshold, n as u64),
        count_zero,
        pct_zero: percentage(count_zero, n as u64),
    })
}

// ---------------------------------------------------------------------------
// Gini coefficient
// ---------------------------------------------------------------------------

/// Compensated (Neumaier) summation: keeps the running error of each float
/// addition in a side term so long, mixed-magnitude sums stay accurate.
fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Gini coefficient of a non-negative distribution, via the sorted
/// formulation `G = Σ_i (2i - n - 1) x_(i) / (n Σ x)` (i is 1-based over
/// ascending values) — algebraically identical to the mean-absolute-
/// difference definition but O(n log n).
pub fn gini(values: &[f64]) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    for (index, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(MetricsError::NegativeValue { index });
        }
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    let total = neumaier_sum(sorted.iter().copied());
    if total == 0.0 {
        return Err(MetricsError::ZeroMean);
    }
    // A constant distribution has zero concentration by definition; return
    // the exact answer rather than a compensated near-zero.
    if sorted.first() == sorted.last() {
        return Ok(0.0);
    }
    let n = sorted.len() as f64;
    let weighted = neumaier_sum(
        sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| (2.0 * (i as f64 + 1.0) - n - 1.0) * x),
    );
    Ok(weighted / (n * total))
}

// ---------------------------------------------------------------------------
// Prevalence tables
// ---------------------------------------------------------------------------

/// Which attribution level a prevalence table aggregates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrevalenceLevel {
    Subsidiary,
    RootParent,
    Country,
}

impl std::fmt::Display for PrevalenceLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PrevalenceLevel::Subsidiary => f.write_str("subsidiary"),
            PrevalenceLevel::RootParent => f.write_str("root_parent"),
            PrevalenceLevel::Country => f.write_str("country"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceRow {
    pub entity: String,
    /// Number of apps in which the entity appears at least once.
    pub apps_present: u64,
    pub pct_apps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceTable {
    pub level: PrevalenceLevel,
    /// Denominator for every row's percentage.
    pub total_apps: u64,
    /// Sorted by apps_present descending, entity ascending — a strict
    /// refinement of "percentage descending" that stays stable when
    /// rounded percentages tie.
    pub rows: Vec<PrevalenceRow>,
}

/// Counts, for each entity at the requested level, how many apps reference
/// it at least once. An app contributes at most 1 per entity regardless of
/// how many of its domains resolve there, which is what makes a root
/// parent's reach always at least that of its widest subsidiary.
pub fn prevalence_table(
    profiles: &[AppProfile],
    level: PrevalenceLevel,
) -> Result<PrevalenceTable, MetricsError> {
    if profiles.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let total_apps = profiles.len() as u64;
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for profile in profiles {
        let entities: Box<dyn Iterator<Item = &str>> = match level {
            PrevalenceLevel::Subsidiary => Box::new(profile.companies.iter().map(String::as_str)),
            PrevalenceLevel::RootParent => {
                Box::new(profile.root_parents.iter().map(String::as_str))
            }
            PrevalenceLevel::Country => Box::new(profile.countries.iter().map(String::as_str)),
        };
        for entity in entities {
            *counts.entry(entity).or_insert(0) += 1;
        }
    }
    let mut rows: Vec<PrevalenceRow> = counts
        .into_iter()
        .map(|(entity, apps_present)| PrevalenceRow {
            entity: entity.to_string(),
            apps_present,
            pct_apps: percentage(apps_present, total_apps),
        })
        .collect();
    rows.sort_by(|a, b| {
        b.apps_present
            .cmp(&a.apps_present)
            .then_with(|| a.entity.cmp(&b.entity))
    });
    Ok(PrevalenceTable { level, total_apps, rows })
}

// ---------------------------------------------------------------------------
// Genre grouping
// ---------------------------------------------------------------------------

/// Store genre → super genre lookup. Store listings use dozens of
/// fine-grained genres (seventeen of them just for games); grouping them
/// into a handful of super genres is what makes per-genre comparison
/// readable.
#[derive(Debug, Clone, Default)]
pub struct GenreMap {
    map: BTreeMap<String, String>,
}

impl GenreMap {
    /// Parses `genre,super_genre` CSV (header required, `#` comments
    /// allowed).
    pub fn from_csv_str(text: &str) -> Result<GenreMap, MetricsError> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| MetricsError::Parse { line: 1, message: e.to_string() })?
            .clone();
        let genre_col = headers.iter().position(|h| h == "genre").ok_or(MetricsError::Parse {
            line: 1,
            message: "missing `genre` column".to_string(),
        })?;
        let super_col =
            headers.iter().position(|h| h == "super_genre").ok_or(MetricsError::Parse {
                line: 1,
                message: "missing `super_genre` column".to_string(),
            })?;
        let mut map = BTreeMap::new();
        for record in reader.records() {
            let record = record.map_err(|e| MetricsError::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let genre = record.get(genre_col).unwrap_or("").to_string();
            let super_genre = record.get(super_col).unwrap_or("").to_string();
            if genre.is_empty() || super_genre.is_empty() {
                return Err(MetricsError::Parse {
                    line,
                    message: "empty genre or super_genre".to_string(),
                });
            }
            map.insert(genre, super_genre);
        }
        Ok(GenreMap { map })
    }

    pub fn from_path(path: &Path) -> Result<GenreMap, MetricsError> {
        let text = std::fs::read_to_string(path).map_err(|source| MetricsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        GenreMap::from_csv_str(&text)
    }

    /// The built-in grouping shipped with the seed knowledge base.
    pub fn seed() -> GenreMap {
        GenreMap::from_csv_str(crate::kb::SEED_GENRES_CSV).expect("seed genre map parses")
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, genre: &str) -> Option<&str> {
        self.map.get(genre).map(String::as_str)
    }
}

/// Resolves a store genre to its super genre. A family-programme flag
/// overrides the genre entirely (family titles span many store genres);
/// genres missing from the map group under "Other" with a warning.
pub fn super_genre_map(genre: &str, family_flag: bool, map: &GenreMap) -> String {
    if family_flag {
        return "Family".to_string();
    }
    match map.get(genre) {
        Some(super_genre) => super_genre.to_string(),
        None => {
            log::warn!("genre `{genre}` is not in the super-genre map; grouping under Other");
            "Other".to_string()
        }
    }
}

// ---------------------------------------------------------------------------
// Rankings and Kendall distance
// ---------------------------------------------------------------------------

/// An ordered list of entity ids, best first, with no duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ranking {
    items: Vec<String>,
}

impl Ranking {
    pub fn new(items: Vec<String>) -> Result<Ranking, MetricsError> {
        let mut seen = BTreeSet::new();
        for item in &items {
            if !seen.insert(item.as_str()) {
                return Err(MetricsError::DuplicateItem(item.clone()));
            }
        }
        Ok(Ranking { items })
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Top-`top_k` entities of a prevalence table as a ranking. Table rows are
/// already ordered and unique, so this cannot fail.
pub fn ranking_from_prevalence(table: &PrevalenceTable, top_k: usize) -> Ranking {
    Ranking {
        items: table
            .rows
            .iter()
            .take(top_k)
            .map(|r| r.entity.clone())
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDistance {
    /// Number of discordant pairs over the common universe.
    pub raw_k: u64,
    /// raw_k scaled into [0, 1] by the pair count of the universe.
    pub normalized_k: f64,
    /// Size of the intersection the comparison was made over.
    pub universe_size: usize,
}

/// Merge-sort inversion count: the number of pairs out of ascending order.
fn count_inversions(seq: &[usize]) -> u64 {
    fn merge_count(arr: &mut [usize], buf: &mut [usize], lo: usize, hi: usize) -> u64 {
        if hi - lo <= 1 {
            return 0;
        }
        let mid = lo + (hi - lo) / 2;
        let mut inversions = merge_count(arr, buf, lo, mid) + merge_count(arr, buf, mid, hi);
        let (mut i, mut j, mut k) = (lo, mid, lo);
        while i < mid && j < hi {
            if arr[i] <= arr[j] {
                buf[k] = arr[i];
                i += 1;
            } else {
                buf[k] = arr[j];
                j += 1;
                inversions += (mid - i) as u64;
            }
            k += 1;
        }
        while i < mid {
            buf[k] = arr[i];
            i += 1;
            k += 1;
        }
        while j < hi {
            buf[k] = arr[j];
            j += 1;
            k += 1;
        }
        arr[lo..hi].copy_from_slice(&buf[lo..hi]);
        inversions
    }
    let mut arr = seq.to_vec();
    let mut buf = vec![0usize; arr.len()];
    merge_count(&mut arr, &mut buf, 0, seq.len())
}

/// Kendall-style distance between two rankings, restricted to their common
/// universe: the number of item pairs the two orders disagree on. With
/// fewer than two common items no pair exists to disagree on, so the
/// distance is zero (the small universe is reported, not treated as an
/// error). Identical orders give 0; exact reversal gives normalized 1.
pub fn kendall_distance(r1: &Ranking, r2: &Ranking) -> RankDistance {
    let set1: BTreeSet<&str> = r1.items.iter().map(String::as_str).collect();
    let set2: BTreeSet<&str> = r2.items.iter().map(String::as_str).collect();
    let universe: BTreeSet<&str> = set1.intersection(&set2).copied().collect();
    let m = universe.len();
    if m < 2 {
        return RankDistance { raw_k: 0, normalized_k: 0.0, universe_size: m };
    }
    // Position of each common item in r1's order...
    let pos1: BTreeMap<&str, usize> = r1
        .items
        .iter()
        .map(String::as_str)
        .filter(|item| universe.contains(item))
        .enumerate()
        .map(|(position, item)| (item, position))
        .collect();
    // ...read off in r2's order: discordant pairs are exactly the
    // inversions of this sequence.
    let sequence: Vec<usize> = r2
        .items
        .iter()
        .map(String::as_str)
        .filter(|item| universe.contains(item))
        .map(|item| pos1[item])
        .collect();
    let raw_k = count_inversions(&sequence);
    let max_pairs = (m as u64) * (m as u64 - 1) / 2;
    RankDistance {
        raw_k,
        normalized_k: raw_k as f64 / max_pairs as f64,
        universe_size: m,
    }
}

/// One genre's rank-distance summary: how far its tracker ordering sits
/// from the overall reference, and its summed distance to every other
/// genre (a centrality measure — small means typical).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenreDistanceRow {
    pub genre: String,
    pub universe_vs_reference: usize,
    pub k_vs_reference: f64,
    /// Sum of normalized distances to every other genre's ranking.
    pub k_total: f64,
}

/// Distances of each genre's ranking to a reference ranking plus the
/// pairwise total per genre. Rows come back sorted by genre name.
pub fn pairwise_genre_distances(
    rankings: &BTreeMap<String, Ranking>,
    reference: &Ranking,
) -> Vec<GenreDistanceRow> {
    rankings
        .iter()
        .map(|(genre, ranking)| {
            let vs_ref = kendall_distance(ranking, reference);
            let k_total = neumaier_sum(
                rankings
                    .iter()
                    .filter(|(other, _)| other.as_str() != genre.as_str())
                    .map(|(_, other_ranking)| kendall_distance(ranking, other_ranking).normalized_k),
            );
            GenreDistanceRow {
                genre: genre.clone(),
                universe_vs_reference: vs_ref.universe_size,
                k_vs_reference: vs_ref.normalized_k,
                k_total,
            }
        })
        .collect()
}

/// Full symmetric matrix of normalized distances between genre rankings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub genres: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

pub fn distance_matrix(rankings: &BTreeMap<String, Ranking>) -> DistanceMatrix {
    let genres: Vec<String> = rankings.keys().cloned().collect();
    let values = genres
        .iter()
        .map(|a| {
            genres
                .iter()
                .map(|b| {
                    if a == b {
                        0.0
                    } else {
                        kendall_distance(&rankings[a], &rankings[b]).normalized_k
                    }
                })
                .collect()
        })
        .collect();
    DistanceMatrix { genres, values }
}
