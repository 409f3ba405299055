//! trackscan CLI: single-APK scans, corpus runs, knowledge-base checks,
//! and ranking comparisons.
//!
//! Exit codes: 0 success, 1 validation or processing failure, 2 usage
//! error (malformed arguments).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use trackscan::corpus::{
    analyze_rows, build_report, emit_report_files, parse_manifest, scan_apk_file, CorpusOptions,
};
use trackscan::dex::scan::ScanMode;
use trackscan::kb;
use trackscan::matcher::{profile_app, MatchMode};
use trackscan::metrics::{kendall_distance, GenreMap, Ranking};

#[derive(Parser)]
#[command(
    name = "trackscan",
    version,
    about = "Static tracker-reference scanner for Android app corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan one APK and emit its tracker profile as JSON.
    Scan(ScanArgs),
    /// Analyze a corpus manifest and write a report directory.
    Corpus(CorpusArgs),
    /// Knowledge-base maintenance.
    #[command(subcommand)]
    Kb(KbCommand),
    /// Kendall distance between two ranking files (one id per line).
    Rankdist(RankdistArgs),
}

/// Where host candidates come from when scanning DEX bytecode.
#[derive(Debug, Clone, Copy, ValueEnum)]
enum CliScanMode {
    /// Decode the DEX string pool and scan its entries (precise offsets,
    /// rejects malformed files).
    Pool,
    /// Scan the raw bytes without parsing (tolerant of corrupt headers).
    Raw,
}

impl From<CliScanMode> for ScanMode {
    fn from(mode: CliScanMode) -> ScanMode {
        match mode {
            CliScanMode::Pool => ScanMode::StringPool,
            CliScanMode::Raw => ScanMode::RawScan,
        }
    }
}

fn match_mode(paper_compat: bool) -> MatchMode {
    if paper_compat {
        MatchMode::PaperCompat
    } else {
        MatchMode::Strict
    }
}

#[derive(Args)]
struct ScanArgs {
    /// APK file to scan.
    apk: PathBuf,
    /// Knowledge-base directory (domains.csv, companies.csv, suffixes.txt).
    #[arg(long, env = "TRACKSCAN_KB_DIR", value_name = "DIR")]
    kb: PathBuf,
    /// Use the looser compatibility match rule instead of strict
    /// registrable-domain matching.
    #[arg(long)]
    paper_compat: bool,
    #[arg(long, value_enum, default_value = "pool")]
    mode: CliScanMode,
    /// Output file (stdout when omitted).
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus manifest CSV
    /// (app_id,apk_path,hosts_path,genre,family_flag,store).
    manifest: PathBuf,
    /// Knowledge-base directory (domains.csv, companies.csv, suffixes.txt).
    #[arg(long, env = "TRACKSCAN_KB_DIR", value_name = "DIR")]
    kb: PathBuf,
    /// Genre → super-genre map CSV; the built-in grouping when omitted.
    #[arg(long, value_name = "FILE")]
    genres: Option<PathBuf>,
    /// Use the looser compatibility match rule instead of strict
    /// registrable-domain matching.
    #[arg(long)]
    paper_compat: bool,
    #[arg(long, value_enum, default_value = "pool")]
    mode: CliScanMode,
    /// How many top root parents each ranking keeps.
    #[arg(long, default_value_t = 20)]
    top_k: usize,
    /// Output directory for report.json and its companion tables.
    #[arg(short, long, value_name = "DIR")]
    output: PathBuf,
}

#[derive(Subcommand)]
enum KbCommand {
    /// Check a knowledge-base directory and list every violation found.
    Validate { dir: PathBuf },
    /// Write the built-in seed knowledge base into a directory.
    Seed { dir: PathBuf },
}

#[derive(Args)]
struct RankdistArgs {
    /// First ranking: one entity id per line, `#` comments allowed.
    ranking1: PathBuf,
    /// Second ranking, same format.
    ranking2: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scan(args) => cmd_scan(args),
        Command::Corpus(args) => cmd_corpus(args),
        Command::Kb(KbCommand::Validate { dir }) => cmd_kb_validate(&dir),
        Command::Kb(KbCommand::Seed { dir }) => cmd_kb_seed(&dir),
        Command::Rankdist(args) => cmd_rankdist(args),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn load_kb(dir: &Path) -> Result<(kb::TrackerKb, trackscan::suffix::SuffixList), String> {
    kb::load_kb_dir(dir).map_err(|e| format!("loading knowledge base from {}: {e}", dir.display()))
}

fn cmd_scan(args: ScanArgs) -> Result<ExitCode, String> {
    let (kb, suffixes) = load_kb(&args.kb)?;
    let (candidates, permissions) = scan_apk_file(&args.apk, args.mode.into())?;
    let app_id = args
        .apk
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| args.apk.display().to_string());
    let mut profile =
        profile_app(&app_id, &candidates, &kb, &suffixes, match_mode(args.paper_compat));
    profile.permissions = permissions;
    let json = serde_json::to_string_pretty(&profile).expect("profile serializes") + "\n";
    match args.output {
        Some(path) => std::fs::write(&path, json)
            .map_err(|e| format!("writing {}: {e}", path.display()))?,
        None => print!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_corpus(args: CorpusArgs) -> Result<ExitCode, String> {
    let (kb, suffixes) = load_kb(&args.kb)?;
    let genre_map = match &args.genres {
        Some(path) => GenreMap::from_path(path).map_err(|e| e.to_string())?,
        None => GenreMap::seed(),
    };
    let rows = parse_manifest(&args.manifest).map_err(|e| e.to_string())?;
    let options = CorpusOptions {
        match_mode: match_mode(args.paper_compat),
        scan_mode: args.mode.into(),
        ranking_top_k: args.top_k,
    };
    let analysis = analyze_rows(&rows, &kb, &suffixes, &options);
    let report = build_report(&analysis, &kb, &genre_map, &options);
    let written = emit_report_files(&report, &analysis.apps, &args.output)
        .map_err(|e| e.to_string())?;
    println!(
        "analyzed {} of {} apps ({} failed)",
        report.analyzed_apps, report.corpus_size, report.failed_apps
    );
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_kb_validate(dir: &Path) -> Result<ExitCode, String> {
    let violations = kb::validate_kb_dir(dir)
        .map_err(|e| format!("validating knowledge base in {}: {e}", dir.display()))?;
    for violation in &violations {
        println!("{violation}");
    }
    println!("{} violation(s)", violations.len());
    Ok(if violations.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_kb_seed(dir: &Path) -> Result<ExitCode, String> {
    kb::write_seed_bundle(dir)
        .map_err(|e| format!("writing seed knowledge base to {}: {e}", dir.display()))?;
    println!("wrote seed knowledge base to {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn read_ranking(path: &Path) -> Result<Ranking, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("reading {}: {e}", path.display()))?;
    let items: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(str::to_string)
        .collect();
    Ranking::new(items).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_rankdist(args: RankdistArgs) -> Result<ExitCode, String> {
    let r1 = read_ranking(&args.ranking1)?;
    let r2 = read_ranking(&args.ranking2)?;
    let distance = kendall_distance(&r1, &r2);
    println!("universe_size: {}", distance.universe_size);
    println!("raw_k: {}", distance.raw_k);
    println!("normalized_k: {}", distance.normalized_k);
    Ok(ExitCode::SUCCESS)
}
