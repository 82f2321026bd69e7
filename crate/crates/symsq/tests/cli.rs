use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn symsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symsq"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env_remove("SYMSQ_CORPUS")
        .output()
        .unwrap()
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn quick_selftest_passes() {
    let out = symsq(&["selftest", "--quick"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["config"]["command"], "selftest");
    assert!(r["config"].get("jobs").is_none());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(symsq(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        symsq(&["kl", "--char", "nonsense:3", "--p", "5"]).status.code(),
        Some(1)
    );
    assert_eq!(
        symsq(&["rankin-check", "--form", "no-such-form"]).status.code(),
        Some(1)
    );
    assert_eq!(symsq(&["--help"]).status.code(), Some(0));
}

#[test]
fn failed_check_exits_two() {
    assert_eq!(symsq(&["base-change", "--n", "6", "--f", "4"]).status.code(), Some(1));
    // s = 2 puts 1 − s on a pole of the odd Γ-factor, so the residual is infinite
    let out = symsq(&["hecke-fe", "--char", "quad:-4", "--s", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["status"], "fail");
}

#[test]
fn ingest_verifies_checksums() {
    for label in ["11a", "14a", "15a"] {
        let path = corpus_dir().join(format!("{label}.json"));
        let out = symsq(&["ingest", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let r = report(&out);
        assert_eq!(r["result"]["checksum"]["sha256"], r["result"]["checksum"]["listed"]);
    }
    let dir = std::env::temp_dir().join(format!("symsq-ingest-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let text = std::fs::read_to_string(corpus_dir().join("11a.json")).unwrap();
    std::fs::write(dir.join("11a.json"), format!("{text}\n")).unwrap();
    std::fs::copy(corpus_dir().join("SHA256SUMS"), dir.join("SHA256SUMS")).unwrap();
    let out = symsq(&["ingest", dir.join("11a.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_and_output_path() {
    let dir = std::env::temp_dir().join(format!("symsq-config-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.toml");
    let out_path = dir.join("report.json");
    std::fs::write(
        &cfg,
        format!(
            "corpus_dir = {:?}\noutput = {:?}\n[budget]\npadic_digits = 12\nseries_terms = 10\n",
            corpus_dir().to_str().unwrap(),
            out_path.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = symsq(&[
        "--config",
        cfg.to_str().unwrap(),
        "trivial-zero",
        "--form",
        "11a",
        "--p",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["config"]["budget"]["padic_digits"], 12);
    assert_eq!(r["result"]["g"], 1);
    std::fs::write(&cfg, "unknown_key = 3\n").unwrap();
    assert_eq!(
        symsq(&["--config", cfg.to_str().unwrap(), "selftest", "--quick"])
            .status
            .code(),
        Some(1)
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn table_output_flattens_the_report() {
    let out = symsq(&["--table", "linvariant", "--curve", "11a", "--p", "11", "--digits", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text
        .lines()
        .any(|l| l.starts_with("result.tate.ord_q") && l.trim_end().ends_with('5')));
    assert!(text.lines().any(|l| l.starts_with("status") && l.contains("pass")));
}

#[test]
fn qexp_writes_theta_coefficients() {
    let out = symsq(&["qexp", "theta", "--char", "trivial", "--bound", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let coeffs = r["result"]["coeffs"].as_array().unwrap();
    let squares: Vec<u64> = coeffs.iter().map(|c| c[0].as_u64().unwrap()).collect();
    assert_eq!(squares, [0, 1, 4, 9, 16, 25]);
    assert!(coeffs[1..].iter().all(|c| c[1] == "2"));
}
