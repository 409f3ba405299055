//! The tracker knowledge base: domain → company mapping, the
//! parent-subsidiary ownership graph, and per-company country codes.
//!
//! A KB bundle is a directory of three UTF-8 files:
//!
//! * `domains.csv` — header `domain,company_id`; one row per registrable
//!   tracker domain.
//! * `companies.csv` — header `company_id,display_name,parent_id,country`;
//!   empty `parent_id` marks a root company, `country` is ISO 3166-1 alpha-2.
//! * `suffixes.txt` — public suffix snapshot, one per line (see
//!   [`crate::suffix`]).
//!
//! Either CSV may carry an optional `# version: <string>` comment line; the
//! first one found (domains first) becomes the KB version stamped into
//! reports. Loading is atomic: any validation violation fails the whole load,
//! so a [`TrackerKb`] value always satisfies its invariants.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcher::normalize_host;
use crate::suffix::SuffixList;

/// Embedded seed KB data, also available on disk under the crate's `seed/`
/// directory. The seed reproduces well-known ownership chains (for example
/// Flurry → Yahoo → Oath → Verizon and AdMobius → Lotame) so attribution
/// logic is exercisable out of the box.
pub const SEED_DOMAINS_CSV: &str = include_str!("../seed/domains.csv");
pub const SEED_COMPANIES_CSV: &str = include_str!("../seed/companies.csv");
pub const SEED_SUFFIXES: &str = include_str!("../seed/suffixes.txt");
/// Seed genre → super-genre mapping (consumed by [`crate::metrics::GenreMap`]).
pub const SEED_GENRES_CSV: &str = include_str!("../seed/genres.csv");

/// One company in the ownership graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Company {
    pub id: String,
    pub display_name: String,
    /// `None` for root companies.
    pub parent_id: Option<String>,
    /// ISO 3166-1 alpha-2 code of the company itself (not its root parent).
    pub country: String,
}

/// A validated tracker knowledge base. Values of this type always satisfy
/// the KB invariants: unique ids and domains, resolvable parents, acyclic
/// ownership, normalized domain keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackerKb {
    version: String,
    domains: BTreeMap<String, String>,
    companies: BTreeMap<String, Company>,
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    ParseError { path: String, line: u64, message: String },
    #[error("knowledge base is invalid: {}", format_violations(.0))]
    Invalid(Vec<KbViolation>),
    #[error("unknown company id `{0}`")]
    UnknownCompany(String),
    #[error("ownership cycle reached from company `{0}`")]
    OwnershipCycle(String),
}

fn format_violations(violations: &[KbViolation]) -> String {
    let summaries: Vec<String> = violations.iter().take(3).map(|v| v.to_string()).collect();
    let mut out = summaries.join("; ");
    if violations.len() > 3 {
        out.push_str(&format!(" (and {} more)", violations.len() - 3));
    }
    out
}

/// A single KB invariant violation. Violations are data (the `kb validate`
/// subcommand prints them); only [`load_kb`] treats them as fatal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KbViolation {
    /// A row references a company id that no companies row defines.
    UnknownCompanyReference { referenced: String, by: String },
    /// The same domain appears in more than one domains row.
    DuplicateDomain { domain: String },
    /// The same company id appears in more than one companies row.
    DuplicateCompanyId { company_id: String },
    /// Following parent links from this company never reaches a root.
    OwnershipCycle { company_id: String },
    /// The domain is not in normalized registrable form.
    UnnormalizedDomain { domain: String, expected: Option<String> },
    /// The country field is not a two-letter uppercase code.
    BadCountryCode { company_id: String, country: String },
}

impl fmt::Display for KbViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KbViolation::UnknownCompanyReference { referenced, by } => {
                write!(f, "unknown company `{referenced}` referenced by {by}")
            }
            KbViolation::DuplicateDomain { domain } => write!(f, "duplicate domain `{domain}`"),
            KbViolation::DuplicateCompanyId { company_id } => {
                write!(f, "duplicate company id `{company_id}`")
            }
            KbViolation::OwnershipCycle { company_id } => {
                write!(f, "ownership cycle reached from company `{company_id}`")
            }
            KbViolation::UnnormalizedDomain { domain, expected } => match expected {
                Some(e) => write!(f, "domain `{domain}` is not normalized (expected `{e}`)"),
                None => write!(f, "domain `{domain}` has no registrable form"),
            },
            KbViolation::BadCountryCode { company_id, country } => {
                write!(f, "company `{company_id}` has malformed country code `{country}`")
            }
        }
    }
}

/// Raw parsed KB rows, prior to validation. Produced by [`read_kb_rows`];
/// consumed by [`validate_rows`] and [`load_kb`].
#[derive(Debug, Clone)]
pub struct KbRows {
    pub version: String,
    pub domains: Vec<DomainRow>,
    pub companies: Vec<CompanyRow>,
}

#[derive(Debug, Clone)]
pub struct DomainRow {
    pub line: u64,
    pub domain: String,
    pub company_id: String,
}

#[derive(Debug, Clone)]
pub struct CompanyRow {
    pub line: u64,
    pub company: Company,
}

fn read_to_string(path: &Path) -> Result<String, KbError> {
    std::fs::read_to_string(path).map_err(|source| KbError::Io { path: path.to_path_buf(), source })
}

/// Extracts the value of the first `# version: ...` comment line, if any.
fn version_comment(text: &str) -> Option<String> {
    text.lines().filter_map(|line| {
        let line = line.trim();
        let rest = line.strip_prefix('#')?.trim_start();
        rest.strip_prefix("version:").map(|v| v.trim().to_string())
    }).next()
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn column_index(headers: &csv::StringRecord, name: &str, path: &str) -> Result<usize, KbError> {
    headers.iter().position(|h| h == name).ok_or_else(|| KbError::ParseError {
        path: path.to_string(),
        line: 1,
        message: format!("missing required column `{name}`"),
    })
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_domains_csv(text: &str, path: &str) -> Result<Vec<DomainRow>, KbError> {
    let mut reader = csv_reader(text);
    let headers = reader
        .headers()
        .map_err(|e| KbError::ParseError { path: path.to_string(), line: 1, message: e.to_string() })?
        .clone();
    let domain_col = column_index(&headers, "domain", path)?;
    let company_col = column_index(&headers, "company_id", path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| KbError::ParseError {
            path: path.to_string(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record_line(&record);
        let field = |idx: usize, name: &str| -> Result<String, KbError> {
            record.get(idx).map(str::to_string).ok_or_else(|| KbError::ParseError {
                path: path.to_string(),
                line,
                message: format!("missing `{name}` field"),
            })
        };
        let domain = field(domain_col, "domain")?;
        let company_id = field(company_col, "company_id")?;
        if domain.is_empty() || company_id.is_empty() {
            return Err(KbError::ParseError {
                path: path.to_string(),
                line,
                message: "domain and company_id must be non-empty".to_string(),
            });
        }
        rows.push(DomainRow { line, domain, company_id });
    }
    Ok(rows)
}

fn parse_companies_csv(text: &str, path: &str) -> Result<Vec<CompanyRow>, KbError> {
    let mut reader = csv_reader(text);
    let headers = reader
        .headers()
        .map_err(|e| KbError::ParseError { path: path.to_string(), line: 1, message: e.to_string() })?
        .clone();
    let id_col = column_index(&headers, "company_id", path)?;
    let name_col = column_index(&headers, "display_name", path)?;
    let parent_col = column_index(&headers, "parent_id", path)?;
    let country_col = column_index(&headers, "country", path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| KbError::ParseError {
            path: path.to_string(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record_line(&record);
        let get = |idx: usize, name: &str| -> Result<String, KbError> {
            record.get(idx).map(str::to_string).ok_or_else(|| KbError::ParseError {
                path: path.to_string(),
                line,
                message: format!("missing `{name}` field"),
            })
        };
        let id = get(id_col, "company_id")?;
        if id.is_empty() {
            return Err(KbError::ParseError {
                path: path.to_string(),
                line,
                message: "company_id must be non-empty".to_string(),
            });
        }
        let display_name = get(name_col, "display_name")?;
        let parent_raw = get(parent_col, "parent_id")?;
        let country = get(country_col, "country")?;
        let parent_id = if parent_raw.is_empty() { None } else { Some(parent_raw) };
        rows.push(CompanyRow { line, company: Company { id, display_name, parent_id, country } });
    }
    Ok(rows)
}

/// Parses both KB CSV texts into raw rows (no cross-row validation).
pub fn parse_kb_rows(
    domains_text: &str,
    domains_label: &str,
    companies_text: &str,
    companies_label: &str,
) -> Result<KbRows, KbError> {
    let version = version_comment(domains_text)
        .or_else(|| version_comment(companies_text))
        .unwrap_or_else(|| "unversioned".to_string());
    Ok(KbRows {
        version,
        domains: parse_domains_csv(domains_text, domains_label)?,
        companies: parse_companies_csv(companies_text, companies_label)?,
    })
}

/// Reads and parses the two KB CSV files.
pub fn read_kb_rows(domains_file: &Path, companies_file: &Path) -> Result<KbRows, KbError> {
    let domains_text = read_to_string(domains_file)?;
    let companies_text = read_to_string(companies_file)?;
    parse_kb_rows(
        &domains_text,
        &domains_file.display().to_string(),
        &companies_text,
        &companies_file.display().to_string(),
    )
}

fn country_code_ok(country: &str) -> bool {
    country.len() == 2 && country.bytes().all(|b| b.is_ascii_uppercase())
}

/// Checks every KB invariant over raw rows and returns all violations, in a
/// deterministic order (companies first, then domains, file order within).
pub fn validate_rows(rows: &KbRows, suffix_list: &SuffixList) -> Vec<KbViolation> {
    let mut violations = Vec::new();

    let mut company_ids = BTreeSet::new();
    for row in &rows.companies {
        if !company_ids.insert(row.company.id.clone()) {
            violations.push(KbViolation::DuplicateCompanyId { company_id: row.company.id.clone() });
        }
        if !country_code_ok(&row.company.country) {
            violations.push(KbViolation::BadCountryCode {
                company_id: row.company.id.clone(),
                country: row.company.country.clone(),
            });
        }
    }

    let parents: BTreeMap<&str, Option<&str>> = rows
        .companies
        .iter()
        .map(|r| (r.company.id.as_str(), r.company.parent_id.as_deref()))
        .collect();
    for row in &rows.companies {
        if let Some(parent) = row.company.parent_id.as_deref() {
            if !parents.contains_key(parent) {
                violations.push(KbViolation::UnknownCompanyReference {
                    referenced: parent.to_string(),
                    by: format!("company `{}`", row.company.id),
                });
            }
        }
    }
    // Cycle check: walk each company's parent chain; a chain that revisits a
    // node can never reach a root. Chains that dead-end on an unknown parent
    // were already reported above.
    for id in parents.keys() {
        let mut seen = BTreeSet::new();
        let mut current = *id;
        loop {
            if !seen.insert(current) {
                violations.push(KbViolation::OwnershipCycle { company_id: id.to_string() });
                break;
            }
            match parents.get(current) {
                Some(Some(parent)) if parents.contains_key(parent) => current = parent,
                _ => break,
            }
        }
    }

    let mut domains_seen = BTreeSet::new();
    for row in &rows.domains {
        if !domains_seen.insert(row.domain.clone()) {
            violations.push(KbViolation::DuplicateDomain { domain: row.domain.clone() });
        }
        if !parents.contains_key(row.company_id.as_str()) {
            violations.push(KbViolation::UnknownCompanyReference {
                referenced: row.company_id.clone(),
                by: format!("domain `{}`", row.domain),
            });
        }
        match normalize_host(&row.domain, suffix_list) {
            Ok(normalized) if normalized.as_str() == row.domain => {}
            Ok(normalized) => violations.push(KbViolation::UnnormalizedDomain {
                domain: row.domain.clone(),
                expected: Some(normalized.into_string()),
            }),
            Err(_) => violations.push(KbViolation::UnnormalizedDomain {
                domain: row.domain.clone(),
                expected: None,
            }),
        }
    }

    violations
}

/// Re-validates an already-built KB. Duplicate rows cannot survive map
/// construction, so this covers the reference, cycle, normalization and
/// country checks; it returns an empty list for any KB produced by
/// [`load_kb`].
pub fn validate_kb(kb: &TrackerKb, suffix_list: &SuffixList) -> Vec<KbViolation> {
    let rows = KbRows {
        version: kb.version.clone(),
        domains: kb
            .domains
            .iter()
            .map(|(d, c)| DomainRow { line: 0, domain: d.clone(), company_id: c.clone() })
            .collect(),
        companies: kb
            .companies
            .values()
            .map(|c| CompanyRow { line: 0, company: c.clone() })
            .collect(),
    };
    validate_rows(&rows, suffix_list)
}

/// Loads and validates a KB from its two CSV files. The suffix list is
/// needed to check that every domain row is already in registrable form.
/// Fails atomically: any violation means no KB value is produced.
pub fn load_kb(
    domains_file: &Path,
    companies_file: &Path,
    suffix_list: &SuffixList,
) -> Result<TrackerKb, KbError> {
    let rows = read_kb_rows(domains_file, companies_file)?;
    build_kb(rows, suffix_list)
}

/// Builds a validated KB from parsed rows.
pub fn build_kb(rows: KbRows, suffix_list: &SuffixList) -> Result<TrackerKb, KbError> {
    let violations = validate_rows(&rows, suffix_list);
    if !violations.is_empty() {
        return Err(KbError::Invalid(violations));
    }
    Ok(TrackerKb {
        version: rows.version,
        domains: rows.domains.into_iter().map(|r| (r.domain, r.company_id)).collect(),
        companies: rows.companies.into_iter().map(|r| (r.company.id.clone(), r.company)).collect(),
    })
}

/// Loads a KB bundle directory (`domains.csv`, `companies.csv`,
/// `suffixes.txt`), returning the KB together with its suffix list.
pub fn load_kb_dir(dir: &Path) -> Result<(TrackerKb, SuffixList), KbError> {
    let suffix_path = dir.join("suffixes.txt");
    let suffix_list = SuffixList::parse(&read_to_string(&suffix_path)?);
    let kb = load_kb(&dir.join("domains.csv"), &dir.join("companies.csv"), &suffix_list)?;
    Ok((kb, suffix_list))
}

/// Reads a KB bundle directory and reports violations without failing on
/// them. Structural problems (missing files, malformed CSV) are still hard
/// errors.
pub fn validate_kb_dir(dir: &Path) -> Result<Vec<KbViolation>, KbError> {
    let suffix_path = dir.join("suffixes.txt");
    let suffix_list = SuffixList::parse(&read_to_string(&suffix_path)?);
    let rows = read_kb_rows(&dir.join("domains.csv"), &dir.join("companies.csv"))?;
    Ok(validate_rows(&rows, &suffix_list))
}

/// Serializes a KB back to its two CSV files (sorted rows, version comment
/// first). `load_kb` on the written files reconstructs an identical KB.
pub fn write_kb(kb: &TrackerKb, domains_file: &Path, companies_file: &Path) -> Result<(), KbError> {
    let mut domains_text = format!("# version: {}\ndomain,company_id\n", kb.version);
    for (domain, company_id) in &kb.domains {
        domains_text.push_str(&format!("{domain},{company_id}\n"));
    }
    std::fs::write(domains_file, domains_text)
        .map_err(|source| KbError::Io { path: domains_file.to_path_buf(), source })?;

    let mut companies_text =
        format!("# version: {}\ncompany_id,display_name,parent_id,country\n", kb.version);
    for company in kb.companies.values() {
        // display_name may contain commas in user KBs; quote it per CSV rules.
        let name = if company.display_name.contains([',', '"', '\n']) {
            format!("\"{}\"", company.display_name.replace('"', "\"\""))
        } else {
            company.display_name.clone()
        };
        companies_text.push_str(&format!(
            "{},{},{},{}\n",
            company.id,
            name,
            company.parent_id.as_deref().unwrap_or(""),
            company.country
        ));
    }
    std::fs::write(companies_file, companies_text)
        .map_err(|source| KbError::Io { path: companies_file.to_path_buf(), source })
}

impl TrackerKb {
    pub fn version(&self) -> &str {
        &self.version
    }

    /// Domain → company-id map, sorted by domain.
    pub fn domains(&self) -> &BTreeMap<String, String> {
        &self.domains
    }

    /// Company-id → company map, sorted by id.
    pub fn companies(&self) -> &BTreeMap<String, Company> {
        &self.companies
    }

    pub fn company(&self, company_id: &str) -> Option<&Company> {
        self.companies.get(company_id)
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty() && self.companies.is_empty()
    }

    /// Looks up the company owning a normalized domain.
    pub fn resolve_company(&self, domain: &str) -> Option<&str> {
        self.domains.get(domain).map(String::as_str)
    }

    /// Follows parent links to the topmost owner. A parentless company is
    /// its own root parent.
    pub fn root_parent(&self, company_id: &str) -> Result<&str, KbError> {
        let mut seen = BTreeSet::new();
        let mut current = self
            .companies
            .get(company_id)
            .ok_or_else(|| KbError::UnknownCompany(company_id.to_string()))?;
        loop {
            if !seen.insert(current.id.as_str()) {
                // Unreachable for KBs built through validation; guards
                // against hand-assembled graphs.
                return Err(KbError::OwnershipCycle(company_id.to_string()));
            }
            match current.parent_id.as_deref() {
                None => return Ok(&current.id),
                Some(parent) => {
                    current = self
                        .companies
                        .get(parent)
                        .ok_or_else(|| KbError::UnknownCompany(parent.to_string()))?;
                }
            }
        }
    }

    /// The company's own country code (not its root parent's).
    pub fn company_country(&self, company_id: &str) -> Result<&str, KbError> {
        self.companies
            .get(company_id)
            .map(|c| c.country.as_str())
            .ok_or_else(|| KbError::UnknownCompany(company_id.to_string()))
    }

    /// The chain from the company itself up to its root parent, inclusive.
    pub fn ancestry(&self, company_id: &str) -> Result<Vec<&Company>, KbError> {
        let mut chain = Vec::new();
        let mut seen = BTreeSet::new();
        let mut current = self
            .companies
            .get(company_id)
            .ok_or_else(|| KbError::UnknownCompany(company_id.to_string()))?;
        loop {
            if !seen.insert(current.id.as_str()) {
                return Err(KbError::OwnershipCycle(company_id.to_string()));
            }
            chain.push(current);
            match current.parent_id.as_deref() {
                None => return Ok(chain),
                Some(parent) => {
                    current = self
                        .companies
                        .get(parent)
                        .ok_or_else(|| KbError::UnknownCompany(parent.to_string()))?;
                }
            }
        }
    }
}

/// Convenience constructor for tests and embedding: builds a KB from
/// in-memory rows, running the structural checks (references, cycles,
/// duplicates) but not domain normalization, which needs a suffix list.
#[derive(Debug, Default)]
pub struct TrackerKbBuilder {
    version: String,
    domains: Vec<(String, String)>,
    companies: Vec<Company>,
}

impl TrackerKbBuilder {
    pub fn new() -> TrackerKbBuilder {
        TrackerKbBuilder { version: "unversioned".to_string(), ..TrackerKbBuilder::default() }
    }

    pub fn version(mut self, version: &str) -> Self {
        self.version = version.to_string();
        self
    }

    pub fn company(
        mut self,
        id: &str,
        display_name: &str,
        parent_id: Option<&str>,
        country: &str,
    ) -> Self {
        self.companies.push(Company {
            id: id.to_string(),
            display_name: display_name.to_string(),
            parent_id: parent_id.map(str::to_string),
            country: country.to_string(),
        });
        self
    }

    pub fn domain(mut self, domain: &str, company_id: &str) -> Self {
        self.domains.push((domain.to_string(), company_id.to_string()));
        self
    }

    pub fn build(self) -> Result<TrackerKb, KbError> {
        let rows = KbRows {
            version: self.version,
            domains: self
                .domains
                .into_iter()
                .map(|(domain, company_id)| DomainRow { line: 0, domain, company_id })
                .collect(),
            companies: self
                .companies
                .into_iter()
                .map(|company| CompanyRow { line: 0, company })
                .collect(),
        };
        // Normalization violations are not checkable without a suffix list;
        // run the remaining checks.
        let violations: Vec<KbViolation> = validate_rows(&rows, &SuffixList::default())
            .into_iter()
            .filter(|v| !matches!(v, KbViolation::UnnormalizedDomain { .. }))
            .collect();
        if !violations.is_empty() {
            return Err(KbError::Invalid(violations));
        }
        Ok(TrackerKb {
            version: rows.version,
            domains: rows.domains.into_iter().map(|r| (r.domain, r.company_id)).collect(),
            companies: rows
                .companies
                .into_iter()
                .map(|r| (r.company.id.clone(), r.company))
                .collect(),
        })
    }
}

/// The embedded seed KB (fully validated).
pub fn seed_kb() -> Result<TrackerKb, KbError> {
    let rows = parse_kb_rows(
        SEED_DOMAINS_CSV,
        "seed/domains.csv",
        SEED_COMPANIES_CSV,
        "seed/companies.csv",
    )?;
    build_kb(rows, &seed_suffixes())
}

/// The embedded public-suffix snapshot shipped with the seed KB.
pub fn seed_suffixes() -> SuffixList {
    SuffixList::parse(SEED_SUFFIXES)
}

/// Writes the embedded seed bundle (KB files, suffix list, genre map) into a
/// directory, creating it if needed. Used by tests and `--seed` setups to
/// materialize a working `--kb` directory.
pub fn write_seed_bundle(dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("domains.csv"), SEED_DOMAINS_CSV)?;
    std::fs::write(dir.join("companies.csv"), SEED_COMPANIES_CSV)?;
    std::fs::write(dir.join("suffixes.txt"), SEED_SUFFIXES)?;
    std::fs::write(dir.join("genres.csv"), SEED_GENRES_CSV)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_kb_is_valid() {
        let kb = seed_kb().expect("seed KB must load");
        assert!(!kb.is_empty());
        assert_eq!(kb.version(), "seed-2018.1");
        assert!(validate_kb(&kb, &seed_suffixes()).is_empty());
    }

    #[test]
    fn seed_chains_match_known_ownership() {
        let kb = seed_kb().unwrap();
        assert_eq!(kb.resolve_company("admobi.us"), Some("admobius"));
        assert_eq!(kb.root_parent("admobius").unwrap(), "lotame");
        assert_eq!(kb.resolve_company("flurry.com"), Some("flurry"));
        assert_eq!(kb.root_parent("flurry").unwrap(), "verizon");
        let chain: Vec<&str> =
            kb.ancestry("flurry").unwrap().iter().map(|c| c.id.as_str()).collect();
        assert_eq!(chain, vec!["flurry", "yahoo", "oath", "verizon"]);
    }

    #[test]
    fn resolve_unknown_domain_is_none() {
        let kb = seed_kb().unwrap();
        assert_eq!(kb.resolve_company("example.com"), None);
    }

    #[test]
    fn company_country_is_own_not_roots() {
        let kb = seed_kb().unwrap();
        assert_eq!(kb.company_country("doubleclick").unwrap(), "US");
        assert_eq!(kb.company_country("flurry").unwrap(), "US");
        // AdColony is a US subsidiary of a Norwegian root.
        assert_eq!(kb.company_country("adcolony").unwrap(), "US");
        assert_eq!(kb.company_country("opera").unwrap(), "NO");
    }

    #[test]
    fn root_parent_is_idempotent_and_fixed_point() {
        let kb = seed_kb().unwrap();
        for id in kb.companies().keys() {
            let root = kb.root_parent(id).unwrap();
            assert_eq!(kb.root_parent(root).unwrap(), root);
        }
    }

    #[test]
    fn root_parent_unknown_company() {
        let kb = seed_kb().unwrap();
        assert!(matches!(kb.root_parent("nope"), Err(KbError::UnknownCompany(_))));
    }

    #[test]
    fn empty_kb_is_valid() {
        let rows = parse_kb_rows(
            "domain,company_id\n",
            "d",
            "company_id,display_name,parent_id,country\n",
            "c",
        )
        .unwrap();
        let kb = build_kb(rows, &SuffixList::default()).unwrap();
        assert!(kb.is_empty());
        assert_eq!(kb.version(), "unversioned");
    }

    #[test]
    fn two_cycle_is_rejected() {
        let err = TrackerKbBuilder::new()
            .company("a", "A", Some("b"), "US")
            .company("b", "B", Some("a"), "US")
            .build()
            .unwrap_err();
        match err {
            KbError::Invalid(violations) => {
                assert!(violations
                    .iter()
                    .any(|v| matches!(v, KbViolation::OwnershipCycle { .. })));
            }
            other => panic!("expected Invalid, got {other:?}"),
        }
    }

    #[test]
    fn self_parent_is_a_cycle() {
        let err = TrackerKbBuilder::new()
            .company("a", "A", Some("a"), "US")
            .build()
            .unwrap_err();
        assert!(matches!(err, KbError::Invalid(_)));
    }

    #[test]
    fn dangling_parent_is_reported() {
        let rows = parse_kb_rows(
            "domain,company_id\n",
            "d",
            "company_id,display_name,parent_id,country\na,A,ghost,US\n",
            "c",
        )
        .unwrap();
        let violations = validate_rows(&rows, &SuffixList::default());
        assert_eq!(
            violations,
            vec![KbViolation::UnknownCompanyReference {
                referenced: "ghost".to_string(),
                by: "company `a`".to_string(),
            }]
        );
    }

    #[test]
    fn unnormalized_domain_is_reported() {
        let suffixes = SuffixList::from_entries(["com"]);
        let rows = parse_kb_rows(
            "domain,company_id\nSub.Example.COM,a\n",
            "d",
            "company_id,display_name,parent_id,country\na,A,,US\n",
            "c",
        )
        .unwrap();
        let violations = validate_rows(&rows, &suffixes);
        assert_eq!(
            violations,
            vec![KbViolation::UnnormalizedDomain {
                domain: "Sub.Example.COM".to_string(),
                expected: Some("example.com".to_string()),
            }]
        );
    }

    #[test]
    fn bare_suffix_domain_is_reported() {
        let suffixes = SuffixList::from_entries(["com"]);
        let rows = parse_kb_rows(
            "domain,company_id\ncom,a\n",
            "d",
            "company_id,display_name,parent_id,country\na,A,,US\n",
            "c",
        )
        .unwrap();
        let violations = validate_rows(&rows, &suffixes);
        assert_eq!(
            violations,
            vec![KbViolation::UnnormalizedDomain { domain: "com".to_string(), expected: None }]
        );
    }

    #[test]
    fn duplicate_domain_is_reported_and_fatal_to_load() {
        let suffixes = SuffixList::from_entries(["com"]);
        let rows = parse_kb_rows(
            "domain,company_id\nx.com,a\nx.com,a\n",
            "d",
            "company_id,display_name,parent_id,country\na,A,,US\n",
            "c",
        )
        .unwrap();
        let violations = validate_rows(&rows, &suffixes);
        assert_eq!(
            violations,
            vec![KbViolation::DuplicateDomain { domain: "x.com".to_string() }]
        );
        assert!(matches!(build_kb(rows, &suffixes), Err(KbError::Invalid(_))));
    }

    #[test]
    fn bad_country_code_is_reported() {
        let rows = parse_kb_rows(
            "domain,company_id\n",
            "d",
            "company_id,display_name,parent_id,country\na,A,,usa\n",
            "c",
        )
        .unwrap();
        let violations = validate_rows(&rows, &SuffixList::default());
        assert_eq!(
            violations,
            vec![KbViolation::BadCountryCode {
                company_id: "a".to_string(),
                country: "usa".to_string(),
            }]
        );
    }

    #[test]
    fn missing_column_is_a_parse_error() {
        let err = parse_kb_rows(
            "host,company_id\nx.com,a\n",
            "domains.csv",
            "company_id,display_name,parent_id,country\n",
            "c",
        )
        .unwrap_err();
        match err {
            KbError::ParseError { path, message, .. } => {
                assert_eq!(path, "domains.csv");
                assert!(message.contains("domain"), "unexpected message: {message}");
            }
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn version_comment_is_optional_and_found_in_either_file() {
        let rows = parse_kb_rows(
            "domain,company_id\n",
            "d",
            "# version: 9.9\ncompany_id,display_name,parent_id,country\n",
            "c",
        )
        .unwrap();
        assert_eq!(rows.version, "9.9");
    }

    #[test]
    fn kb_round_trips_through_serialization() {
        let dir = tempfile::tempdir().unwrap();
        let kb = seed_kb().unwrap();
        let domains = dir.path().join("domains.csv");
        let companies = dir.path().join("companies.csv");
        write_kb(&kb, &domains, &companies).unwrap();
        let reloaded = load_kb(&domains, &companies, &seed_suffixes()).unwrap();
        assert_eq!(kb, reloaded);
    }

    #[test]
    fn load_kb_dir_reads_the_bundle() {
        let dir = tempfile::tempdir().unwrap();
        write_seed_bundle(dir.path()).unwrap();
        let (kb, suffixes) = load_kb_dir(dir.path()).unwrap();
        assert_eq!(kb, seed_kb().unwrap());
        assert!(!suffixes.is_empty());
        assert!(validate_kb_dir(dir.path()).unwrap().is_empty());
    }
}
