use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conic-embed"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gen(dir: &Path, cones: &str, labels: &str) {
    let o = run(
        dir,
        &["gen", "--cones", cones, "--labels", labels, "--m", "2", "--seed", "4", "--out", "P.json", "--sol-out", "S.json"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn example1_prints_unit_residual() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["example1", "--n", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("||Arw(x) Arw(s)||_inf    = 1\n"), "{}", stdout(&o));

    let o = run(d.path(), &["example1", "--n", "3", "--direction", "-0.6,0.8"]);
    assert!(o.status.success());
    let o = run(d.path(), &["example1", "--n", "2"]);
    assert!(!o.status.success());
}

#[test]
fn full_rank_on_boundary_fails() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), "3", "R");
    let o = run(
        d.path(),
        &["map", "--side", "dual", "--rank", "full", "--problem", "P.json", "--solution", "S.json", "--out", "M.json"],
    );
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("interior"));
}

#[test]
fn verify_flags_a_tampered_solution() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), "3,2", "B,N");
    let o = run(
        d.path(),
        &["map", "--side", "dual", "--rank", "simzhao", "--problem", "P.json", "--solution", "S.json", "--out", "M.json"],
    );
    assert!(o.status.success());
    // verify the original solution file against a mapped one from a different seed
    let other = tempfile::tempdir().unwrap();
    let o = run(
        other.path(),
        &["gen", "--cones", "3,2", "--labels", "B,N", "--m", "2", "--seed", "5", "--out", "P.json", "--sol-out", "S.json"],
    );
    assert!(o.status.success());
    std::fs::copy(other.path().join("S.json"), d.path().join("S_other.json")).unwrap();
    let o = run(
        d.path(),
        &["map", "--side", "dual", "--rank", "simzhao", "--problem", "P.json", "--solution", "S_other.json", "--out", "M2.json"],
    );
    assert!(o.status.success());
    let o = run(
        d.path(),
        &["verify", "--side", "dual", "--problem", "P.json", "--solution", "S_other.json", "--mapped", "M2.json"],
    );
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn classify_and_partition_report() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), "3,3,2", "B,T3,R");
    let o = run(d.path(), &["classify", "--problem", "P.json", "--solution", "S.json"]);
    assert_eq!(stdout(&o), "cone 0: B\ncone 1: T3\ncone 2: R\n");
    for side in ["dual", "primal"] {
        let o = run(
            d.path(),
            &["partition", "--side", side, "--problem", "P.json", "--solution", "S.json", "--rank", "simzhao", "--out", "bases.json"],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert!(text.starts_with("dim B = "), "{text}");
        assert!(std::fs::read_to_string(d.path().join("bases.json")).unwrap().contains("\"T\""));
    }
    let o = run(
        d.path(),
        &["partition", "--side", "dual", "--problem", "P.json", "--solution", "S.json", "--rank", "one"],
    );
    assert!(!o.status.success());
}

#[test]
fn tolerance_comes_from_the_environment() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), "3", "B");
    // a huge tolerance classifies everything as zero, which is inconsistent for B
    let o = Command::new(env!("CARGO_BIN_EXE_conic-embed"))
        .current_dir(d.path())
        .env("CONIC_EMBED_TOL", "10")
        .args(["classify", "--problem", "P.json", "--solution", "S.json"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(stdout(&o), "cone 0: T1\n");
}

#[test]
fn split_blocks_needs_block_diagonal_data() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), "3,2", "B,N");
    let o = run(
        d.path(),
        &["embed", "--side", "primal", "--in", "P.json", "--out", "E.json", "--sdpa", "e.dat-s", "--split-blocks"],
    );
    assert!(!o.status.success());
    let o = run(
        d.path(),
        &["embed", "--side", "dual", "--in", "P.json", "--out", "E.json", "--sdpa", "e.dat-s", "--split-blocks"],
    );
    assert!(o.status.success());
    let sdpa = std::fs::read_to_string(d.path().join("e.dat-s")).unwrap();
    assert_eq!(sdpa.lines().nth(1), Some("2"));
    assert_eq!(sdpa.lines().nth(2), Some("3 2"));
}
