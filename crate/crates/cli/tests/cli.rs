use std::io::Write;
use std::process::{Command, Output, Stdio};

const DECLS: &str = "\
# worked examples
tensor T rank=6 sym=3..6
tensor U rank=6
tensor A rank=2 asym=1..2
tensor M rank=2 sym=1..2
tensor R rank=4 gens=\"-(1,2); +(1,3)(2,4); -(3,4)\"
";

fn decls() -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(DECLS.as_bytes()).unwrap();
    f
}

fn tcanon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcanon"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn canon_prints_canonical_form() {
    let d = decls();
    let path = d.path().to_str().unwrap();
    for engine in ["fast", "baseline"] {
        let o = tcanon(&[
            "canon",
            "--decls",
            path,
            "--engine",
            engine,
            "T_{a b c d e f} U^{e d f c g h}",
        ]);
        assert!(o.status.success());
        assert_eq!(stdout(&o), "T_{a b c d e f} U^{c d e f g h}");
        let o = tcanon(&["canon", "--decls", path, "--engine", engine, "A_{1 1}"]);
        assert_eq!(stdout(&o), "0");
        let o = tcanon(&["canon", "--decls", path, "--engine", engine, "A_{2 1}"]);
        assert_eq!(stdout(&o), "-A_{1 2}");
    }
}

#[test]
fn unsymmetric_sorted_input_is_unchanged() {
    let d = decls();
    let o = tcanon(&[
        "canon",
        "--decls",
        d.path().to_str().unwrap(),
        "U_{a b c d e f}",
    ]);
    assert_eq!(stdout(&o), "U_{a b c d e f}");
}

#[test]
fn expression_from_stdin() {
    let d = decls();
    let mut child = Command::new(env!("CARGO_BIN_EXE_tcanon"))
        .args(["canon", "--decls", d.path().to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"M^{a b} A_{a b}\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(stdout(&o), "0");
}

#[test]
fn trace_reports_every_slot() {
    let d = decls();
    let o = tcanon(&[
        "canon",
        "--trace",
        "--decls",
        d.path().to_str().unwrap(),
        "R_{a b}^{a b}",
    ]);
    assert!(o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.lines().filter(|l| l.starts_with("slot ")).count(), 4);
}

#[test]
fn bad_input_fails_with_diagnostics() {
    let d = decls();
    let path = d.path().to_str().unwrap();
    for expr in ["T_{a b", "X_{a}", "A_{a b c}", "A_{a}^{b} M_{a}^{a}"] {
        let o = tcanon(&["canon", "--decls", path, expr]);
        assert!(!o.status.success(), "{expr} should fail");
        assert!(
            String::from_utf8_lossy(&o.stderr).contains("error"),
            "{expr}"
        );
    }
    let o = tcanon(&["canon", "--decls", "/nonexistent/decls.txt", "A_{1 2}"]);
    assert!(!o.status.success());
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let o = tcanon(&[
        "bench",
        "--families",
        "riemann,sym-frees",
        "--sizes",
        "1,2",
        "--trials",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        rows[0],
        "family,n,trial,seed,engine,is_zero,result_digest,elapsed_us,max_configs"
    );
    // 2 families x 2 sizes x 2 trials x 2 engines.
    assert_eq!(rows.len(), 1 + 16);
}

#[test]
fn bench_rejects_unknown_family() {
    let o = tcanon(&["bench", "--families", "nope"]);
    assert!(!o.status.success());
}

#[test]
fn oracle_check_passes() {
    let o = tcanon(&["oracle-check", "--max-slots", "8", "--trials", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("mismatches 0"));
}
