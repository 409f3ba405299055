//! Static detection of third-party tracker references in Android apps.
//!
//! The pipeline runs in three stages:
//!
//! 1. **Ingest** ([`apk`]) — open an APK (a ZIP container), list entries and
//!    pull out the `classes*.dex` bytecode blobs without touching anything
//!    else.
//! 2. **Scan** ([`dex`]) — walk the DEX string pool (or, in compatibility
//!    mode, the raw bytes) for hostname-shaped strings.
//! 3. **Attribute** ([`matcher`], [`kb`]) — normalize each candidate to its
//!    registrable domain and look it up in a tracker knowledge base mapping
//!    domains to companies, corporate owners and countries.
//!
//! On top of the per-app profiles, [`metrics`] provides distribution
//! statistics (quantiles, Gini coefficient), prevalence tables, genre
//! grouping and Kendall tau rank distances, and [`corpus`] aggregates a whole
//! manifest of apps into a deterministic [`corpus::CorpusReport`].
//!
//! The `trackscan` binary wires these together; see the crate README for CLI
//! usage.

pub mod apk;
pub mod corpus;
pub mod dex;
pub mod kb;
pub mod matcher;
pub mod metrics;
pub mod suffix;

/// Version stamped into reports so downstream diffs can tell tool upgrades
/// from data changes.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
