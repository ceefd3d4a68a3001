use std::process::{Command, Output};

use qcaed::BinaryMatrix;

fn qcaed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcaed")).args(args).output().expect("run qcaed")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn simulate_without_code_is_a_usage_error() {
    let out = qcaed(&["simulate", "--decoder", "bp"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_code_is_a_usage_error() {
    let out = qcaed(&["simulate", "--code", "turbo_40", "--decoder", "bp"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ccsds_128_64"));
}

#[test]
fn bad_ensemble_size_is_a_runtime_error() {
    let out = qcaed(&["simulate", "--code", "ccsds_128_64", "--decoder", "aed", "--ensemble", "17", "--ebno", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn matrix_info_reports_dimensions() {
    let out = qcaed(&["matrix", "info", "--code", "wifi_648_540"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "N=648 K=540 Z=27 rank=108");

    let out = qcaed(&["matrix", "info", "--code", "nr5g_132_66"]);
    let text = stdout(&out);
    assert!(text.contains("K=66"), "{text}");
    assert!(text.contains("lifted_N=154 punctured=22"), "{text}");
}

#[test]
fn unbroken_matrix_is_equivariant_for_every_shift() {
    let out = qcaed(&["matrix", "equivariance", "--code", "ccsds_128_64"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("none: 16 of 16 shifts equivariant"), "{text}");
}

#[test]
fn undercomplete_break_writes_a_smaller_alist() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.alist");
    let out = qcaed(&[
        "matrix", "break", "--code", "nr5g_132_66", "--method", "undercomplete", "--params", "idx=0", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let h = BinaryMatrix::from_alist(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!((h.n_rows(), h.n_cols()), (87, 154));

    let out = qcaed(&["matrix", "equivariance", "--alist", path.to_str().unwrap(), "--z", "11"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("1 of 11 shifts equivariant: 0"), "{}", stdout(&out));
}

#[test]
fn recipe_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "code=nr5g_132_66\ndecoder=aed\nbreak_method=row-add\nbreak_params=src=0,dst=1\nensemble=11\nebno=1:0.5:3\n",
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let out = qcaed(&[
        "simulate", "--config", conf.to_str().unwrap(), "--min-errors", "5", "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "ebno_db,frames,block_errors,bit_errors,bler,ber,avg_iter,avg_max_iter,ci_low,ci_high");
    assert_eq!(lines.len(), 6);
    for (line, ebno) in lines[1..].iter().zip(["1.000", "1.500", "2.000", "2.500", "3.000"]) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 10);
        assert_eq!(fields[0], ebno);
        assert_eq!(fields[2], "5");
    }
}
