//! End-to-end tests of the dplda binary: round trips, output formats,
//! and the exit-code contract (0 ok, 2 usage, 3 degeneracy).

use std::path::Path;
use std::process::{Command, Output};

fn dplda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dplda"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn grab(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.to_string()))
        .unwrap_or_else(|| panic!("missing `{}` in:\n{}", key, text))
}

#[test]
fn synth_fit_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let truth = dir.path().join("truth.txt");
    let fitted = dir.path().join("fitted.txt");

    let out = dplda(&[
        "synth", "--k", "2", "--d", "8", "--alpha0", "1.0", "--docs", "4000",
        "--doc-len", "20", "--seed", "7",
        "--out", corpus.to_str().unwrap(),
        "--model-out", truth.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "synth failed: {}", stderr(&out));
    assert!(corpus.exists() && truth.exists());

    let out = dplda(&[
        "fit", "--input", corpus.to_str().unwrap(), "--k", "2", "--alpha0", "1.0",
        "--config", "none", "--out-model", fitted.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "fit failed: {}", stderr(&out));
    let diag = stdout(&out);
    assert!(diag.contains("singular_values="), "diagnostics missing: {}", diag);
    assert!(diag.contains("power_converged="));

    let out = dplda(&[
        "eval", "--model", fitted.to_str().unwrap(), "--truth", truth.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "eval failed: {}", stderr(&out));
    let text = stdout(&out);
    let mean: f64 = grab(&text, "mean_error=").parse().unwrap();
    // Non-private fit on 4000 documents recovers an easy model well.
    assert!(mean < 0.1, "mean_error={}", mean);

    let out = dplda(&[
        "eval", "--model", fitted.to_str().unwrap(), "--corpus", corpus.to_str().unwrap(),
        "--seed", "3",
    ]);
    assert!(out.status.success(), "eval --corpus failed: {}", stderr(&out));
    let text = stdout(&out);
    let ll: f64 = grab(&text, "dp_loglik=").parse().unwrap();
    assert!(ll.is_finite() && ll < 0.0, "dp_loglik={}", ll);
    let sigma: f64 = grab(&text, "noise_sigma=").parse().unwrap();
    assert!(sigma > 0.0);
    grab(&text, "floored_words=");
    // The evaluation spends exactly one charge.
    assert_eq!(text.lines().filter(|l| l.starts_with("charge")).count(), 1);
}

#[test]
fn private_fit_writes_ledger_with_exact_total() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let ledger = dir.path().join("ledger.csv");

    let out = dplda(&[
        "synth", "--k", "2", "--d", "6", "--alpha0", "1.0", "--docs", "500",
        "--doc-len", "12", "--seed", "1", "--out", corpus.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let out = dplda(&[
        "fit", "--input", corpus.to_str().unwrap(), "--k", "2", "--alpha0", "1.0",
        "--config", "1",
        "--eps-e3", "0.5", "--eps-e4", "0.25", "--eps-e8", "0.25",
        "--out-ledger", ledger.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "fit failed: {}", stderr(&out));

    let text = std::fs::read_to_string(&ledger).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "label,epsilon,delta");
    assert!(lines[1].starts_with("e3,0.5,"));
    assert!(lines[2].starts_with("e4,0.25,"));
    assert!(lines[3].starts_with("e8,0.25,"));
    // 0.5 + 0.25 + 0.25 is exact in binary, so the total prints as 1.
    let total: Vec<&str> = lines[4].split(',').collect();
    assert_eq!(total[0], "total");
    assert_eq!(total[1], "1");
}

#[test]
fn missing_budget_flag_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let out = dplda(&[
        "synth", "--k", "2", "--d", "5", "--alpha0", "1.0", "--docs", "50",
        "--doc-len", "10", "--out", corpus.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let out = dplda(&[
        "fit", "--input", corpus.to_str().unwrap(), "--k", "2", "--alpha0", "1.0",
        "--config", "1", "--eps-e3", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("eps-e4"), "stderr: {}", stderr(&out));
}

#[test]
fn unreadable_input_exits_2() {
    let out = dplda(&[
        "fit", "--input", "/nonexistent/corpus.txt", "--k", "2", "--alpha0", "1.0",
        "--config", "none",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn malformed_corpus_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("bad.txt");
    std::fs::write(&corpus, "docs=2 vocab=3\n1 2 3\n4 5\n").unwrap();
    let out = dplda(&[
        "fit", "--input", corpus.to_str().unwrap(), "--k", "2", "--alpha0", "1.0",
        "--config", "none",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn starved_calibration_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let out = dplda(&[
        "synth", "--k", "2", "--d", "6", "--alpha0", "1.0", "--docs", "40",
        "--doc-len", "10", "--out", corpus.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    // With 40 documents and eps1 = 0.01 the calibration shift dwarfs the
    // singular value, so the private lower bound collapses to zero.
    let out = dplda(&[
        "fit", "--input", corpus.to_str().unwrap(), "--k", "2", "--alpha0", "1.0",
        "--config", "2", "--eps1", "0.01", "--eps-e6", "0.4", "--eps-e8", "0.4",
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("error:"), "stderr: {}", stderr(&out));
}

#[test]
fn sweep_writes_csv_with_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("sweep.txt");
    let csv = dir.path().join("out.csv");
    std::fs::write(
        &spec,
        "synth_k=2\nsynth_d=5\nsynth_alpha0=1.0\nsynth_docs=200\nsynth_doc_len=10\n\
         eps_grid=0.5,1.0\nconfigs=1\nrepeats=1\nseed=11\n",
    )
    .unwrap();

    let out = dplda(&[
        "sweep", "--spec", spec.to_str().unwrap(), "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "sweep failed: {}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "config,composite_eps,split,repeat,mean_error,dp_loglik,wall_ms,status"
    );
    // 1 config x 1 split x 2 grid points x 1 repeat.
    assert_eq!(lines.len(), 3);
    for row in &lines[1..] {
        assert_eq!(row.split(',').count(), 8, "row: {}", row);
        assert!(row.starts_with("1,"), "row: {}", row);
    }
    assert!(stdout(&out).contains("best_split_config_1="));
}

#[test]
fn sweep_rejects_bad_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("sweep.txt");
    std::fs::write(&spec, "eps_grid=1.0\nnot_a_key=1\n").unwrap();
    let out = dplda(&[
        "sweep", "--spec", spec.to_str().unwrap(),
        "--out", dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn drop_short_notice_goes_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let out = dplda(&[
        "synth", "--k", "2", "--d", "5", "--alpha0", "1.0", "--docs", "400",
        "--doc-len", "10", "--seed", "5", "--out", corpus.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // Append a two-token document and bump the header count.
    let text = std::fs::read_to_string(&corpus).unwrap();
    let body = text.splitn(2, '\n').nth(1).unwrap();
    std::fs::write(&corpus, format!("401 5\n{}401 1 2\n", body)).unwrap();

    let out = dplda(&[
        "fit", "--input", corpus.to_str().unwrap(), "--k", "2", "--alpha0", "1.0",
        "--config", "none", "--drop-short",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("dropped 1 short documents"));
    assert!(!Path::new("model.txt").exists());
}
