//! End-to-end tests driving the compiled `trackscan` binary: exit codes,
//! stdout/stderr contracts, and determinism of emitted artifacts.

mod common;

use std::path::Path;
use std::process::{Command, Output};

fn trackscan() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_trackscan"));
    // Isolate from the invoking shell so every test states its own KB.
    cmd.env_remove("TRACKSCAN_KB_DIR");
    cmd
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

fn run_ok(cmd: &mut Command) -> Output {
    let output = cmd.output().expect("binary runs");
    assert!(
        output.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        output.status.code(),
        stdout_of(&output),
        stderr_of(&output)
    );
    output
}

// --- kb subcommands --------------------------------------------------------

#[test]
fn kb_seed_then_validate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let kb_dir = dir.path().join("kb");

    let seeded = run_ok(trackscan().args(["kb", "seed"]).arg(&kb_dir));
    assert!(stdout_of(&seeded).contains("wrote seed knowledge base"));
    for file in ["companies.csv", "domains.csv", "suffixes.txt"] {
        assert!(kb_dir.join(file).is_file(), "{file} missing after seed");
    }

    let validated = run_ok(trackscan().args(["kb", "validate"]).arg(&kb_dir));
    assert_eq!(stdout_of(&validated).trim(), "0 violation(s)");
}

#[test]
fn kb_validate_flags_broken_bundle_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let kb_dir = common::seed_kb_dir(dir.path());

    // Point a domain at a company that does not exist.
    let domains = kb_dir.join("domains.csv");
    let mut text = std::fs::read_to_string(&domains).unwrap();
    text.push_str("rogue-tracker.example,ghost_company\n");
    std::fs::write(&domains, text).unwrap();

    let output = trackscan().args(["kb", "validate"]).arg(&kb_dir).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("ghost_company"), "stdout was: {stdout}");
    assert!(!stdout.contains("0 violation(s)"));
}

// --- scan -------------------------------------------------------------------

fn sample_apk(dir: &Path) -> std::path::PathBuf {
    let apk = dir.join("sample.apk");
    common::write_apk(
        &apk,
        &[
            "Lcom/example/App;",
            "https://doubleclick.net/instream",
            "api.flurry.com/session",
            "no host here",
        ],
    );
    apk
}

#[test]
fn scan_emits_profile_json_named_after_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let kb_dir = common::seed_kb_dir(dir.path());
    let apk = sample_apk(dir.path());

    let output = run_ok(trackscan().arg("scan").arg(&apk).arg("--kb").arg(&kb_dir));
    let profile: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();

    assert_eq!(profile["app_id"], "sample");
    let domains: Vec<&str> = profile["tracker_domains"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    // api.flurry.com must be folded onto its registrable domain.
    assert_eq!(domains, vec!["doubleclick.net", "flurry.com"]);
    let roots: Vec<&str> = profile["root_parents"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(roots, vec!["alphabet", "verizon"]);

    // Same invocation, same bytes.
    let again = run_ok(trackscan().arg("scan").arg(&apk).arg("--kb").arg(&kb_dir));
    assert_eq!(output.stdout, again.stdout);
}

#[test]
fn scan_writes_output_file_and_honors_kb_env_var() {
    let dir = tempfile::tempdir().unwrap();
    let kb_dir = common::seed_kb_dir(dir.path());
    let apk = sample_apk(dir.path());
    let out = dir.path().join("profile.json");

    // --kb omitted: the directory comes from the environment instead.
    run_ok(trackscan()
        .arg("scan")
        .arg(&apk)
        .env("TRACKSCAN_KB_DIR", &kb_dir)
        .arg("--output")
        .arg(&out));

    let profile: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(profile["app_id"], "sample");

    // And stdout output matches the file byte for byte.
    let direct = run_ok(trackscan().arg("scan").arg(&apk).arg("--kb").arg(&kb_dir));
    assert_eq!(stdout_of(&direct), std::fs::read_to_string(&out).unwrap());
}

#[test]
fn scan_missing_apk_is_a_processing_failure() {
    let dir = tempfile::tempdir().unwrap();
    let kb_dir = common::seed_kb_dir(dir.path());

    let output = trackscan()
        .arg("scan")
        .arg(dir.path().join("nonexistent.apk"))
        .arg("--kb")
        .arg(&kb_dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_of(&output).starts_with("error: "));
}

// --- corpus -----------------------------------------------------------------

#[test]
fn corpus_run_writes_the_full_report_directory() {
    let dir = tempfile::tempdir().unwrap();
    let kb_dir = common::seed_kb_dir(dir.path());

    let hosts_dir = dir.path().join("hosts");
    std::fs::create_dir_all(&hosts_dir).unwrap();
    std::fs::write(hosts_dir.join("a.txt"), "doubleclick.net\nflurry.com\n").unwrap();
    std::fs::write(hosts_dir.join("b.txt"), "google-analytics.com\n").unwrap();
    std::fs::write(hosts_dir.join("c.txt"), "# nothing in this one\n").unwrap();
    let manifest = dir.path().join("manifest.csv");
    std::fs::write(
        &manifest,
        "app_id,apk_path,hosts_path,genre,family_flag,store\n\
         com.a,,hosts/a.txt,Arcade,0,play\n\
         com.b,,hosts/b.txt,Tools,1,play\n\
         com.c,,hosts/c.txt,Social,0,play\n",
    )
    .unwrap();

    let out1 = dir.path().join("out1");
    let output = run_ok(trackscan()
        .arg("corpus")
        .arg(&manifest)
        .arg("--kb")
        .arg(&kb_dir)
        .arg("--output")
        .arg(&out1));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("analyzed 3 of 3 apps (0 failed)"), "stdout: {stdout}");
    assert_eq!(stdout.matches("\nwrote ").count() + usize::from(stdout.starts_with("wrote ")), 10);

    for file in [
        "report.json",
        "profiles.jsonl",
        "table_prevalence_subsidiary.csv",
        "table_prevalence_root_parent.csv",
        "table_prevalence_country.csv",
        "table_genre_stats.csv",
        "table_genre_distances.csv",
        "histogram_hosts.csv",
        "histogram_companies.csv",
        "histogram_countries.csv",
    ] {
        assert!(out1.join(file).is_file(), "{file} missing from report directory");
    }

    // A second run into a fresh directory produces identical bytes.
    let out2 = dir.path().join("out2");
    run_ok(trackscan()
        .arg("corpus")
        .arg(&manifest)
        .arg("--kb")
        .arg(&kb_dir)
        .arg("--output")
        .arg(&out2));
    assert_eq!(
        std::fs::read(out1.join("report.json")).unwrap(),
        std::fs::read(out2.join("report.json")).unwrap()
    );
}

// --- rankdist ----------------------------------------------------------------

#[test]
fn rankdist_reports_reversal_as_maximal() {
    let dir = tempfile::tempdir().unwrap();
    let r1 = dir.path().join("r1.txt");
    let r2 = dir.path().join("r2.txt");
    std::fs::write(&r1, "# top roots\nalpha\nbeta\ngamma\ndelta\n").unwrap();
    std::fs::write(&r2, "delta\ngamma\nbeta\nalpha\n").unwrap();

    let output = run_ok(trackscan().arg("rankdist").arg(&r1).arg(&r2));
    assert_eq!(stdout_of(&output), "universe_size: 4\nraw_k: 6\nnormalized_k: 1\n");
}

#[test]
fn rankdist_rejects_duplicate_entries() {
    let dir = tempfile::tempdir().unwrap();
    let r1 = dir.path().join("r1.txt");
    let r2 = dir.path().join("r2.txt");
    std::fs::write(&r1, "alpha\nbeta\nalpha\n").unwrap();
    std::fs::write(&r2, "beta\nalpha\n").unwrap();

    let output = trackscan().arg("rankdist").arg(&r1).arg(&r2).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = stderr_of(&output);
    assert!(stderr.contains("alpha"), "stderr was: {stderr}");
}

// --- argument handling --------------------------------------------------------

#[test]
fn missing_arguments_are_usage_errors() {
    let no_args = trackscan().output().unwrap();
    assert_eq!(no_args.status.code(), Some(2));

    let no_output = trackscan().args(["corpus", "manifest.csv", "--kb", "kb"]).output().unwrap();
    assert_eq!(no_output.status.code(), Some(2), "corpus without --output must be rejected");
}
