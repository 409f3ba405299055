//! Corpus pipeline: manifest parsing, per-app analysis, report assembly,
//! and artifact emission.
//!
//! A corpus manifest lists apps with either an APK on disk or a
//! pre-extracted host list. Analysis fans out across apps (in parallel by
//! default — each app is independent), failures are collected per app
//! rather than aborting the run, and the report is assembled from whatever
//! completed. Two runs over the same inputs produce byte-identical output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apk::{self, ApkError};
use crate::dex::scan::{scan_dex_structured, scan_hosts_raw, HostCandidate, ScanMode};
use crate::kb::TrackerKb;
use crate::matcher::{profile_app, AppProfile, MatchMode};
use crate::metrics::{
    descriptive_stats, distance_matrix, gini, pairwise_genre_distances, percentage,
    prevalence_table, ranking_from_prevalence, super_genre_map, DescriptiveStats, DistanceMatrix,
    GenreDistanceRow, GenreMap, PrevalenceLevel, PrevalenceTable, Ranking,
};
use crate::suffix::SuffixList;

/// Per-app host-count threshold used in the overall and per-genre
/// summaries: the share of apps referencing strictly more than this many
/// distinct tracker hosts.
pub const HOST_COUNT_THRESHOLD: u64 = 20;
/// Company-count threshold for the same summaries.
pub const COMPANY_COUNT_THRESHOLD: u64 = 10;
/// Country-count threshold: more than one jurisdiction.
pub const COUNTRY_COUNT_THRESHOLD: u64 = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("manifest {path} line {line}: {message}")]
    Manifest { path: String, line: usize, message: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("histogram bin width must be at least 1, got {0}")]
    InvalidBinWidth(u64),
    #[error("empty input")]
    EmptyInput,
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

/// One corpus manifest row. Exactly one of `apk_path` / `hosts_path` is
/// set: either the app ships as an APK to scan, or its host candidates
/// were extracted earlier and stored as a text file (one line per string,
/// `#` comments allowed).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub app_id: String,
    pub apk_path: Option<PathBuf>,
    pub hosts_path: Option<PathBuf>,
    pub genre: String,
    pub family_flag: bool,
    pub store: String,
}

fn parse_family_flag(raw: &str) -> Option<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" | "" => Some(false),
        _ => None,
    }
}

/// Parses a corpus manifest CSV with header
/// `app_id,apk_path,hosts_path,genre,family_flag,store`. Relative paths
/// resolve against the manifest's own directory, so a corpus directory can
/// be moved wholesale. App ids must be unique.
pub fn parse_manifest(path: &Path) -> Result<Vec<ManifestRow>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest_str(&text, base).map_err(|(line, message)| CorpusError::Manifest {
        path: path.display().to_string(),
        line,
        message,
    })
}

fn parse_manifest_str(text: &str, base: &Path) -> Result<Vec<ManifestRow>, (usize, String)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| (1, e.to_string()))?.clone();
    let col = |name: &str| -> Result<usize, (usize, String)> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| (1, format!("missing `{name}` column")))
    };
    let c_app = col("app_id")?;
    let c_apk = col("apk_path")?;
    let c_hosts = col("hosts_path")?;
    let c_genre = col("genre")?;
    let c_family = col("family_flag")?;
    let c_store = col("store")?;

    let resolve = |raw: &str| -> Option<PathBuf> {
        if raw.is_empty() {
            return None;
        }
        let p = Path::new(raw);
        Some(if p.is_absolute() { p.to_path_buf() } else { base.join(p) })
    };

    let mut rows = Vec::new();
    let mut seen_ids: BTreeMap<String, usize> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            (e.position().map_or(0, |p| p.line() as usize), e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");

        let app_id = field(c_app).to_string();
        if app_id.is_empty() {
            return Err((line, "empty app_id".to_string()));
        }
        if let Some(first) = seen_ids.insert(app_id.clone(), line) {
            return Err((line, format!("duplicate app_id `{app_id}` (first on line {first})")));
        }
        let apk_path = resolve(field(c_apk));
        let hosts_path = resolve(field(c_hosts));
        match (&apk_path, &hosts_path) {
            (Some(_), Some(_)) => {
                return Err((line, format!("app `{app_id}` sets both apk_path and hosts_path")))
            }
            (None, None) => {
                return Err((line, format!("app `{app_id}` sets neither apk_path nor hosts_path")))
            }
            _ => {}
        }
        let family_flag = parse_family_flag(field(c_family)).ok_or_else(|| {
            (line, format!("bad family_flag `{}` (use true/false/1/0/yes/no)", field(c_family)))
        })?;
        rows.push(ManifestRow {
            app_id,
            apk_path,
            hosts_path,
            genre: field(c_genre).to_string(),
            family_flag,
            store: field(c_store).to_string(),
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Per-app analysis
// ---------------------------------------------------------------------------

/// How a corpus run is configured. The defaults mirror the CLI: strict
/// matching, string-pool scanning, rankings over the top twenty roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusOptions {
    pub match_mode: MatchMode,
    pub scan_mode: ScanMode,
    pub ranking_top_k: usize,
}

impl Default for CorpusOptions {
    fn default() -> CorpusOptions {
        CorpusOptions {
            match_mode: MatchMode::Strict,
            scan_mode: ScanMode::StringPool,
            ranking_top_k: 20,
        }
    }
}

/// An app that failed during analysis. The corpus run carries on; the
/// failure is reported alongside the results.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppFailure {
    pub app_id: String,
    pub reason: String,
}

/// One successfully analyzed app: its manifest row plus the profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzedApp {
    pub row: ManifestRow,
    pub profile: AppProfile,
}

/// Outcome of a corpus analysis: profiles for the apps that worked,
/// per-app failures for the ones that did not, both in manifest order.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CorpusAnalysis {
    pub apps: Vec<AnalyzedApp>,
    pub failures: Vec<AppFailure>,
}

impl CorpusAnalysis {
    pub fn corpus_size(&self) -> u64 {
        (self.apps.len() + self.failures.len()) as u64
    }
}

fn candidates_from_hosts_file(path: &Path) -> Result<Vec<HostCandidate>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("reading hosts file {}: {e}", path.display()))?;
    let lines: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect();
    let label = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(crate::dex::scan::scan_hosts_structured(&lines, &label))
}

fn candidates_from_apk(
    path: &Path,
    scan_mode: ScanMode,
) -> Result<(Vec<HostCandidate>, Vec<String>), String> {
    let mut archive =
        apk::open_apk(path).map_err(|e| format!("opening {}: {e}", path.display()))?;
    let blobs = apk::extract_dex_files(&mut archive)
        .map_err(|e| format!("extracting dex from {}: {e}", path.display()))?;
    let mut candidates = Vec::new();
    for blob in &blobs {
        match scan_mode {
            ScanMode::StringPool => {
                let found = scan_dex_structured(blob)
                    .map_err(|e| format!("scanning {} in {}: {e}", blob.entry_name, path.display()))?;
                candidates.extend(found);
            }
            ScanMode::RawScan => candidates.extend(scan_hosts_raw(blob)),
        }
    }
    // Permissions are best-effort: most real APKs carry a binary-encoded
    // manifest this tool does not decode, so a parse failure costs only
    // the permissions list, never the scan.
    let permissions = match archive.read_entry_by_name("AndroidManifest.xml") {
        Ok(bytes) => match String::from_utf8(bytes) {
            Ok(xml) => match apk::extract_manifest_permissions(&xml) {
                Ok(perms) => perms,
                Err(e) => {
                    log::warn!("{}: manifest not parseable ({e}); permissions skipped", path.display());
                    Vec::new()
                }
            },
            Err(_) => {
                log::warn!(
                    "{}: manifest is not UTF-8 text (binary XML?); permissions skipped",
                    path.display()
                );
                Vec::new()
            }
        },
        Err(ApkError::EntryNotFound(_)) => Vec::new(),
        Err(e) => {
            log::warn!("{}: manifest unreadable ({e}); permissions skipped", path.display());
            Vec::new()
        }
    };
    Ok((candidates, permissions))
}

/// Opens an APK and collects its host candidates (per `scan_mode`) plus
/// whatever permissions a plain-text manifest yields. The error is a
/// human-readable reason, suitable for an [`AppFailure`].
pub fn scan_apk_file(
    path: &Path,
    scan_mode: ScanMode,
) -> Result<(Vec<HostCandidate>, Vec<String>), String> {
    candidates_from_apk(path, scan_mode)
}

fn analyze_row(
    row: &ManifestRow,
    kb: &TrackerKb,
    suffixes: &SuffixList,
    options: &CorpusOptions,
) -> Result<AppProfile, String> {
    let (candidates, permissions) = match (&row.apk_path, &row.hosts_path) {
        (Some(apk_path), None) => candidates_from_apk(apk_path, options.scan_mode)?,
        (None, Some(hosts_path)) => (candidates_from_hosts_file(hosts_path)?, Vec::new()),
        // parse_manifest enforces exactly one source per row.
        _ => return Err("row has no usable source".to_string()),
    };
    let mut profile = profile_app(&row.app_id, &candidates, kb, suffixes, options.match_mode);
    profile.permissions = permissions;
    Ok(profile)
}

fn assemble(rows: &[ManifestRow], results: Vec<Result<AppProfile, String>>) -> CorpusAnalysis {
    let mut analysis = CorpusAnalysis::default();
    for (row, result) in rows.iter().zip(results) {
        match result {
            Ok(profile) => analysis.apps.push(AnalyzedApp { row: row.clone(), profile }),
            Err(reason) => {
                log::warn!("app `{}` failed: {reason}", row.app_id);
                analysis.failures.push(AppFailure { app_id: row.app_id.clone(), reason });
            }
        }
    }
    analysis
}

/// Analyzes every manifest row. Apps are independent, so with the default
/// `parallel` feature the work fans out across cores; results come back in
/// manifest order either way. A failing app becomes an [`AppFailure`], not
/// an error for the run.
pub fn analyze_rows(
    rows: &[ManifestRow],
    kb: &TrackerKb,
    suffixes: &SuffixList,
    options: &CorpusOptions,
) -> CorpusAnalysis {
    #[cfg(feature = "parallel")]
    let results: Vec<Result<AppProfile, String>> = {
        use rayon::prelude::*;
        rows.par_iter()
            .map(|row| analyze_row(row, kb, suffixes, options))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<AppProfile, String>> = rows
        .iter()
        .map(|row| analyze_row(row, kb, suffixes, options))
        .collect();
    assemble(rows, results)
}

/// Single-threaded variant of [`analyze_rows`], always available. The
/// parallel path must produce identical output; the benches compare their
/// throughput.
pub fn analyze_rows_sequential(
    rows: &[ManifestRow],
    kb: &TrackerKb,
    suffixes: &SuffixList,
    options: &CorpusOptions,
) -> CorpusAnalysis {
    let results: Vec<Result<AppProfile, String>> = rows
        .iter()
        .map(|row| analyze_row(row, kb, suffixes, options))
        .collect();
    assemble(rows, results)
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Distribution summaries for one super genre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenreStats {
    pub super_genre: String,
    pub n_apps: u64,
    pub host_stats: DescriptiveStats,
    pub company_stats: DescriptiveStats,
}

/// The full corpus report. Statistical fields are `None` when undefined
/// (no analyzed apps, or a zero-sum distribution for the Gini) rather than
/// failing the run. Every percentage sits next to the counts it was
/// computed from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusReport {
    pub tool_version: String,
    pub kb_version: String,
    pub match_mode: MatchMode,
    pub scan_mode: ScanMode,
    pub ranking_top_k: usize,
    pub corpus_size: u64,
    pub analyzed_apps: u64,
    pub failed_apps: u64,
    pub failures: Vec<AppFailure>,
    /// Analyzed apps per store label.
    pub store_counts: BTreeMap<String, u64>,
    pub count_with_tracker: u64,
    pub pct_with_tracker: f64,
    pub overall_host_stats: Option<DescriptiveStats>,
    pub overall_company_stats: Option<DescriptiveStats>,
    pub overall_country_stats: Option<DescriptiveStats>,
    /// Concentration of distinct-tracker-host counts across apps.
    pub gini_hosts: Option<f64>,
    /// One entry per super genre present in the manifest, sorted by name.
    pub genres: Vec<GenreStats>,
    pub prevalence_subsidiary: Option<PrevalenceTable>,
    pub prevalence_root_parent: Option<PrevalenceTable>,
    pub prevalence_country: Option<PrevalenceTable>,
    pub genre_distances: Vec<GenreDistanceRow>,
    pub genre_distance_matrix: DistanceMatrix,
}

/// Assembles the corpus report from an analysis. Infallible by design:
/// undefined statistics become `None`, absent groups are simply absent.
pub fn build_report(
    analysis: &CorpusAnalysis,
    kb: &TrackerKb,
    genre_map: &GenreMap,
    options: &CorpusOptions,
) -> CorpusReport {
    let profiles: Vec<AppProfile> =
        analysis.apps.iter().map(|a| a.profile.clone()).collect();
    let host_counts: Vec<u64> =
        profiles.iter().map(|p| p.tracker_domains.len() as u64).collect();
    let company_counts: Vec<u64> = profiles.iter().map(|p| p.companies.len() as u64).collect();
    let country_counts: Vec<u64> = profiles.iter().map(|p| p.countries.len() as u64).collect();

    let count_with_tracker = host_counts.iter().filter(|&&c| c > 0).count() as u64;
    let analyzed_apps = profiles.len() as u64;

    let mut store_counts: BTreeMap<String, u64> = BTreeMap::new();
    for app in &analysis.apps {
        *store_counts.entry(app.row.store.clone()).or_insert(0) += 1;
    }

    // Group analyzed apps by super genre.
    let mut genre_groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (index, app) in analysis.apps.iter().enumerate() {
        let super_genre = super_genre_map(&app.row.genre, app.row.family_flag, genre_map);
        genre_groups.entry(super_genre).or_default().push(index);
    }
    let genres: Vec<GenreStats> = genre_groups
        .iter()
        .map(|(super_genre, indices)| {
            let hosts: Vec<u64> = indices.iter().map(|&i| host_counts[i]).collect();
            let companies: Vec<u64> = indices.iter().map(|&i| company_counts[i]).collect();
            GenreStats {
                super_genre: super_genre.clone(),
                n_apps: indices.len() as u64,
                host_stats: descriptive_stats(&hosts, HOST_COUNT_THRESHOLD)
                    .expect("genre group is never empty"),
                company_stats: descriptive_stats(&companies, COMPANY_COUNT_THRESHOLD)
                    .expect("genre group is never empty"),
            }
        })
        .collect();

    // Per-genre root-parent rankings, and the overall ranking as reference.
    let prevalence_root_parent = prevalence_table(&profiles, PrevalenceLevel::RootParent).ok();
    let reference = prevalence_root_parent
        .as_ref()
        .map(|t| ranking_from_prevalence(t, options.ranking_top_k))
        .unwrap_or_else(|| Ranking::new(Vec::new()).expect("empty ranking"));
    let rankings: BTreeMap<String, Ranking> = genre_groups
        .iter()
        .filter_map(|(super_genre, indices)| {
            let subset: Vec<AppProfile> =
                indices.iter().map(|&i| profiles[i].clone()).collect();
            prevalence_table(&subset, PrevalenceLevel::RootParent)
                .ok()
                .map(|t| (super_genre.clone(), ranking_from_prevalence(&t, options.ranking_top_k)))
        })
        .collect();

    CorpusReport {
        tool_version: crate::TOOL_VERSION.to_string(),
        kb_version: kb.version().to_string(),
        match_mode: options.match_mode,
        scan_mode: options.scan_mode,
        ranking_top_k: options.ranking_top_k,
        corpus_size: analysis.corpus_size(),
        analyzed_apps,
        failed_apps: analysis.failures.len() as u64,
        failures: analysis.failures.clone(),
        store_counts,
        count_with_tracker,
        pct_with_tracker: percentage(count_with_tracker, analyzed_apps),
        overall_host_stats: descriptive_stats(&host_counts, HOST_COUNT_THRESHOLD).ok(),
        overall_company_stats: descriptive_stats(&company_counts, COMPANY_COUNT_THRESHOLD).ok(),
        overall_country_stats: descriptive_stats(&country_counts, COUNTRY_COUNT_THRESHOLD).ok(),
        gini_hosts: gini(&host_counts.iter().map(|&c| c as f64).collect::<Vec<f64>>()).ok(),
        genres,
        prevalence_subsidiary: prevalence_table(&profiles, PrevalenceLevel::Subsidiary).ok(),
        prevalence_country: prevalence_table(&profiles, PrevalenceLevel::Country).ok(),
        prevalence_root_parent,
        genre_distances: pairwise_genre_distances(&rankings, &reference),
        genre_distance_matrix: distance_matrix(&rankings),
    }
}

// ---------------------------------------------------------------------------
// Histograms and file emission
// ---------------------------------------------------------------------------

/// One histogram bin: values in `lo..hi` (left-closed, right-open).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: u64,
    pub hi: u64,
    pub count: u64,
}

/// Bins counts into fixed-width, left-closed bins anchored at zero.
/// Empty bins are omitted, so bin counts always sum to the input length.
pub fn emit_histogram(values: &[u64], bin_width: u64) -> Result<Vec<HistogramBin>, CorpusError> {
    if bin_width < 1 {
        return Err(CorpusError::InvalidBinWidth(bin_width));
    }
    if values.is_empty() {
        return Err(CorpusError::EmptyInput);
    }
    let mut bins: BTreeMap<u64, u64> = BTreeMap::new();
    for &v in values {
        *bins.entry(v / bin_width).or_insert(0) += 1;
    }
    Ok(bins
        .into_iter()
        .map(|(index, count)| HistogramBin {
            lo: index * bin_width,
            hi: index * bin_width + bin_width,
            count,
        })
        .collect())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.display().to_string(), source }
}

fn write_csv<F>(path: &Path, header: &[&str], write_rows: F) -> Result<(), CorpusError>
where
    F: FnOnce(&mut csv::Writer<std::fs::File>) -> csv::Result<()>,
{
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CorpusError::Io { path: path.display().to_string(), source: e.into() })?;
    let result: csv::Result<()> = (|| {
        writer.write_record(header)?;
        write_rows(&mut writer)?;
        writer.flush()?;
        Ok(())
    })();
    result.map_err(|e| CorpusError::Io { path: path.display().to_string(), source: e.into() })
}

fn write_prevalence_csv(
    path: &Path,
    table: Option<&PrevalenceTable>,
) -> Result<(), CorpusError> {
    write_csv(path, &["entity", "apps_present", "pct_apps"], |w| {
        if let Some(table) = table {
            for row in &table.rows {
                w.write_record([
                    row.entity.as_str(),
                    &row.apps_present.to_string(),
                    &row.pct_apps.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

fn write_histogram_csv(path: &Path, values: &[u64]) -> Result<(), CorpusError> {
    let bins = match emit_histogram(values, 1) {
        Ok(bins) => bins,
        Err(CorpusError::EmptyInput) => Vec::new(),
        Err(e) => return Err(e),
    };
    write_csv(path, &["lo", "hi", "count"], |w| {
        for bin in &bins {
            w.write_record([
                bin.lo.to_string(),
                bin.hi.to_string(),
                bin.count.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Writes the report and its companion tables into `out_dir`:
/// `report.json`, per-app `profiles.jsonl`, three prevalence CSVs, genre
/// stats and distances, and unit-width histograms of the per-app counts.
/// Returns the paths written, in a fixed order.
pub fn emit_report_files(
    report: &CorpusReport,
    apps: &[AnalyzedApp],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CorpusError> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();

    let report_path = out_dir.join("report.json");
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(&report_path, json + "\n").map_err(io_err(&report_path))?;
    written.push(report_path);

    let profiles_path = out_dir.join("profiles.jsonl");
    let mut lines = String::new();
    for app in apps {
        lines.push_str(&serde_json::to_string(&app.profile).expect("profile serializes"));
        lines.push('\n');
    }
    std::fs::write(&profiles_path, lines).map_err(io_err(&profiles_path))?;
    written.push(profiles_path);

    for (file, table) in [
        ("table_prevalence_subsidiary.csv", report.prevalence_subsidiary.as_ref()),
        ("table_prevalence_root_parent.csv", report.prevalence_root_parent.as_ref()),
        ("table_prevalence_country.csv", report.prevalence_country.as_ref()),
    ] {
        let path = out_dir.join(file);
        write_prevalence_csv(&path, table)?;
        written.push(path);
    }

    let genre_stats_path = out_dir.join("table_genre_stats.csv");
    write_csv(
        &genre_stats_path,
        &[
            "super_genre",
            "n_apps",
            "host_median",
            "host_q1",
            "host_q3",
            "host_pct_above_threshold",
            "host_pct_zero",
            "company_median",
            "company_q1",
            "company_q3",
            "company_pct_above_threshold",
            "company_pct_zero",
        ],
        |w| {
            for g in &report.genres {
                w.write_record([
                    g.super_genre.clone(),
                    g.n_apps.to_string(),
                    g.host_stats.median.to_string(),
                    g.host_stats.q1.to_string(),
                    g.host_stats.q3.to_string(),
                    g.host_stats.pct_above_threshold.to_string(),
                    g.host_stats.pct_zero.to_string(),
                    g.company_stats.median.to_string(),
                    g.company_stats.q1.to_string(),
                    g.company_stats.q3.to_string(),
                    g.company_stats.pct_above_threshold.to_string(),
                    g.company_stats.pct_zero.to_string(),
                ])?;
            }
            Ok(())
        },
    )?;
    written.push(genre_stats_path);

    let distances_path = out_dir.join("table_genre_distances.csv");
    write_csv(
        &distances_path,
        &["genre", "universe_vs_reference", "k_vs_reference", "k_total"],
        |w| {
            for row in &report.genre_distances {
                w.write_record([
                    row.genre.clone(),
                    row.universe_vs_reference.to_string(),
                    row.k_vs_reference.to_string(),
                    row.k_total.to_string(),
                ])?;
            }
            Ok(())
        },
    )?;
    written.push(distances_path);

    let host_counts: Vec<u64> =
        apps.iter().map(|a| a.profile.tracker_domains.len() as u64).collect();
    let company_counts: Vec<u64> =
        apps.iter().map(|a| a.profile.companies.len() as u64).collect();
    let country_counts: Vec<u64> =
        apps.iter().map(|a| a.profile.countries.len() as u64).collect();
    for (file, values) in [
        ("histogram_hosts.csv", &host_counts),
        ("histogram_companies.csv", &company_counts),
        ("histogram_countries.csv", &country_counts),
    ] {
        let path = out_dir.join(file);
        write_histogram_csv(&path, values)?;
        written.push(path);
    }

    Ok(written)
}
