mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;

use homenum::delay::DelayReport;
use homenum::oracle::brute_homs;
use homenum::structures::{generate_family, serialize_structure, Family, Structure};
use tempfile::TempDir;

use common::cli;

fn put(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn family(dir: &TempDir, f: Family, n: usize) -> (Structure, String) {
    let s = generate_family(f, n).unwrap();
    let path = put(dir, &format!("{}_{n}.struct", f.name()), &serialize_structure(&s));
    (s, path)
}

fn lines(text: &str) -> BTreeSet<String> {
    text.lines().map(str::to_string).collect()
}

#[test]
fn decide_and_solve() {
    let dir = TempDir::new().unwrap();
    let (_, k2) = family(&dir, Family::Clique, 2);
    let (_, k3) = family(&dir, Family::Clique, 3);
    let (_, c5) = family(&dir, Family::Cycle, 5);
    assert_eq!(cli(&["decide", &k3, &k2]), (0, "no\n".into(), String::new()));
    assert_eq!(cli(&["decide", &c5, &k3]).1, "yes\n");
    assert_eq!(cli(&["solve", &c5, &k2]).1, "no\n");
    // The least witness in lexicographic order of target values.
    assert_eq!(cli(&["solve", &k2, &k3]).1, "v0:v0 v1:v1\n");
}

#[test]
fn solve_with_a_decomposition_file() {
    let dir = TempDir::new().unwrap();
    let (_, p) = family(&dir, Family::Path, 2);
    let (_, k2) = family(&dir, Family::Clique, 2);
    let td = put(&dir, "p.td", "bag r - v0 v1\nbag s r v1 v2\n");
    assert_eq!(cli(&["decide", &p, &k2, "--td", &td]).1, "yes\n");
    let bad = put(&dir, "bad.td", "bag r - v0 v1\n");
    assert_ne!(cli(&["decide", &p, &k2, "--td", &bad]).0, 0);
}

#[test]
fn enum_matches_oracle_as_sets() {
    let dir = TempDir::new().unwrap();
    let (a, ap) = family(&dir, Family::Path, 4);
    let (b, bp) = family(&dir, Family::Clique, 3);
    let (code, out, _) = cli(&["enum", &ap, &bp]);
    assert_eq!(code, 0);
    let (_, oracle, _) = cli(&["oracle", &ap, &bp]);
    assert_eq!(out.lines().count(), lines(&out).len());
    assert_eq!(lines(&out), lines(&oracle));
    // Count from the library oracle, not from the CLI.
    assert_eq!(out.lines().count(), brute_homs(&a, &b).unwrap().len());
    for mode in [["--tw", "1"], ["--kcore", "2"]] {
        let (code, other, _) = cli(&["enum", &ap, &bp, mode[0], mode[1]]);
        assert_eq!(code, 0);
        assert_eq!(lines(&other), lines(&out));
    }
}

#[test]
fn enum_prints_no_when_empty() {
    let dir = TempDir::new().unwrap();
    let (_, k3) = family(&dir, Family::Clique, 3);
    let (_, k2) = family(&dir, Family::Clique, 2);
    assert_eq!(cli(&["enum", &k3, &k2, "--tw", "2"]), (0, "no\n".into(), String::new()));
}

#[test]
fn limit_truncates() {
    let dir = TempDir::new().unwrap();
    let (_, ap) = family(&dir, Family::Path, 4);
    let (_, bp) = family(&dir, Family::Clique, 3);
    let (code, out, _) = cli(&["enum", &ap, &bp, "--limit", "5"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 5);
    let (_, cq, _) = cli(&["cqe", &ap, &bp, "--project", "v0", "--k", "1", "--limit", "2"]);
    assert_eq!(cq.lines().count(), 2);
}

#[test]
fn kcore_output_feeds_enum() {
    let dir = TempDir::new().unwrap();
    let (_, ap) = family(&dir, Family::LoopPathOneEnd, 6);
    let (_, bp) = family(&dir, Family::LoopedClique, 3);
    let (code, text, _) = cli(&["kcore", &ap, "--k", "1"]);
    assert_eq!(code, 0);
    assert!(text.lines().any(|l| l.starts_with("# structure")));
    let seq = put(&dir, "a.seq", &text);
    let (code, via_file, _) = cli(&["enum", &ap, &bp, "--endoseq", &seq]);
    assert_eq!(code, 0);
    let (_, oracle, _) = cli(&["oracle", &ap, &bp]);
    assert_eq!(via_file.lines().count(), lines(&oracle).len());
    assert_eq!(lines(&via_file), lines(&oracle));
}

#[test]
fn cqe_format_and_order() {
    let dir = TempDir::new().unwrap();
    let (_, ap) = family(&dir, Family::Path, 2);
    let (_, bp) = family(&dir, Family::Clique, 2);
    let (code, out, _) = cli(&["cqe", &ap, &bp, "--project", "v2,v0", "--k", "1"]);
    assert_eq!(code, 0);
    assert_eq!(out, "v2:v0 v0:v0\nv2:v1 v0:v1\n");
    let (_, oracle, _) = cli(&["oracle", &ap, &bp, "--project", "v2,v0"]);
    assert_eq!(oracle, out);
}

#[test]
fn bench_reports_json() {
    let dir = TempDir::new().unwrap();
    let (_, bp) = family(&dir, Family::LoopedClique, 3);
    let (code, out, _) = cli(&["bench", "--family", "loop_path_one_end", "--n", "8", "--target", &bp, "--limit", "10"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let keys: BTreeSet<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, BTreeSet::from(["count", "first_ms", "max_gap_ms", "per_gap"]));
    let r: DelayReport = serde_json::from_value(v).unwrap();
    assert_eq!((r.count, r.per_gap.len()), (10, 9));
}

#[test]
fn gen_round_trips_through_files() {
    let (code, out, _) = cli(&["gen", "grid", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out, serialize_structure(&generate_family(Family::Grid, 2).unwrap()));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let (_, k4) = family(&dir, Family::Clique, 4);
    let (_, k3) = family(&dir, Family::Clique, 3);
    let (_, c20) = family(&dir, Family::Cycle, 20);
    let (_, pp) = family(&dir, Family::Path, 2);

    let broken = put(&dir, "broken.struct", "vocab\nrel E 2\nstructure x\nelem a\ntuple E a\nend\n");
    let (code, _, err) = cli(&["decide", &broken, &k3]);
    assert_eq!(code, 3);
    assert!(err.contains("broken.struct"), "{err}");

    assert_eq!(cli(&["decide", &k4, &k3, "--k", "1"]).0, 4);
    assert_eq!(cli(&["enum", &k4, &k3, "--tw", "2"]).0, 4);
    assert_eq!(cli(&["cqe", &k4, &k3, "--project", "v0", "--k", "2"]).0, 4);

    // Collapsing the edge v1 v2 is not an endomorphism of the path.
    let seq = put(&dir, "bad.seq", "width 1\nlevel 1 v1 v2\nmap 1 v0:v1 v1:v2 v2:v2\n");
    let (code, _, err) = cli(&["enum", &pp, &k3, "--endoseq", &seq]);
    assert_eq!(code, 5, "{err}");

    assert_eq!(cli(&["oracle", &c20, &k3]).0, 6);
    assert_eq!(cli(&["decide", &k4, &dir.path().join("missing").to_string_lossy()]).0, 1);
    assert_eq!(cli(&["enum", &k4, &k3, "--tw", "3", "--kcore", "1"]).0, 2);
    assert_eq!(cli(&["frobnicate"]).0, 2);
}

#[test]
fn binary_runs() {
    let dir = TempDir::new().unwrap();
    let (_, k3) = family(&dir, Family::Clique, 3);
    let (_, k2) = family(&dir, Family::Clique, 2);
    let bin = Path::new(env!("CARGO_BIN_EXE_homenum"));
    let out = Command::new(bin).args(["decide", &k3, &k2]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "no\n");
    let out = Command::new(bin).args(["enum", &k3, &k2, "--tw", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("width exceeded"));
}
