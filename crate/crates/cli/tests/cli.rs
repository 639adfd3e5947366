use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use projinv_core::simulate::sign_invariant_gaussian_sample;
use projinv_core::{Dataset, RngSeed};
use serde_json::Value;

fn projinv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projinv"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes `x.csv` with three correlated Gaussian columns a, b, c.
fn workspace(n: usize) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let x = sign_invariant_gaussian_sample(3, 0.4, n, &mut RngSeed(1).rng()).unwrap();
    let ds = Dataset {
        name: "x".into(),
        columns: vec!["a".into(), "b".into(), "c".into()],
        data: x.into_data(),
        provenance: String::new(),
        dropped_rows: 0,
    };
    ds.write_csv(fs::File::create(dir.path().join("x.csv")).unwrap()).unwrap();
    dir
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sign_exchangeable_procedure_a_has_three_rows() {
    let dir = workspace(200);
    let o = projinv(
        dir.path(),
        &["test", "--input", "x.csv", "--group", "sign-exchangeable", "--procedure", "a", "--alpha", "0.05"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["procedure"], "a");
    assert_eq!(report["per_generator"].as_array().unwrap().len(), 3);
    let table = stdout(&o);
    assert!(table.contains("diag(-1,1,...,1)"), "{table}");
    assert!(dir.path().join("report.manifest.json").exists());
}

#[test]
fn non_orthogonal_group_file_needs_procedure_b() {
    let dir = workspace(100);
    fs::write(
        dir.path().join("rot.json"),
        r#"{"dim": 3, "name": "shear", "generators": [[[1, 1, 0], [0, 1, 0], [0, 0, 1]]]}"#,
    )
    .unwrap();
    let o = projinv(dir.path(), &["test", "--input", "x.csv", "--group", "file:rot.json", "--procedure", "a"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("procedure (b)"), "{}", stderr(&o));
    let b = ["test", "--input", "x.csv", "--group", "file:rot.json", "--procedure", "b", "--bootstrap", "50"];
    let o = projinv(dir.path(), &b);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("plain bootstrap"), "{}", stderr(&o));
    let o = projinv(dir.path(), &[&b[..], &["--bootstrap-scheme", "plain"]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    // A conjugated transposition: order two, not orthogonal.
    fs::write(
        dir.path().join("conj.json"),
        r#"{"dim": 3, "name": "conj", "generators": [[[1, 0, 0], [1, -1, 0], [0, 0, 1]]]}"#,
    )
    .unwrap();
    let o = projinv(dir.path(), &["test", "--input", "x.csv", "--group", "file:conj.json", "--procedure", "a"]);
    assert_eq!(code(&o), 2);
    let o = projinv(
        dir.path(),
        &["test", "--input", "x.csv", "--group", "file:conj.json", "--procedure", "b", "--bootstrap", "50"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    let dir = workspace(50);
    assert_eq!(code(&projinv(dir.path(), &["test", "--input", "missing.csv"])), 3);
    assert_eq!(code(&projinv(dir.path(), &["test", "--input", "x.csv", "--columns", "zz"])), 3);
    assert_eq!(code(&projinv(dir.path(), &["test", "--input", "x.csv", "--group", "cyclic"])), 2);
    assert_eq!(code(&projinv(dir.path(), &["test", "--input", "x.csv", "--alpha", "1.5"])), 2);
    assert_eq!(code(&projinv(dir.path(), &["test", "--input", "x.csv", "--prefix-sizes", "80"])), 2);
    assert_eq!(code(&projinv(dir.path(), &["test", "--input", "x.csv", "--functional-grid", "2"])), 2);
    assert_eq!(code(&projinv(dir.path(), &["simulate"])), 2);
    assert_eq!(code(&projinv(dir.path(), &["--threads", "0", "group", "--group", "exchangeable", "--dim", "3"])), 2);
    assert_eq!(code(&projinv(dir.path(), &["--version"])), 0);
}

#[test]
fn perm_null_prefix_sweep() {
    let dir = workspace(120);
    let o = projinv(
        dir.path(),
        &[
            "test", "--input", "x.csv", "--procedure", "perm-null", "--replicates", "200", "--directions", "10",
            "--prefix-sizes", "40,120", "--out", "sweep.json", "--dump-directions", "dirs.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let reports = json(&dir.path().join("sweep.json"));
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["n"], 40);
    assert_eq!(reports[1]["n"], 120);
    assert_eq!(reports[1]["config"]["replicates"], 200);
    let dirs = fs::read_to_string(dir.path().join("dirs.csv")).unwrap();
    assert_eq!(dirs.lines().count(), 11);
    assert!(dirs.starts_with("index,kind,h1,h2,h3\n"));
    let manifest = json(&dir.path().join("sweep.manifest.json"));
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn functional_input_uses_lifted_group() {
    let dir = tempfile::tempdir().unwrap();
    let x = projinv_core::simulate::functional_sample(60, 0.0, 5, &mut RngSeed(2).rng()).unwrap();
    let ds = Dataset {
        name: "f".into(),
        columns: (0..15).map(|j| format!("v{j}")).collect(),
        data: x.into_data(),
        provenance: String::new(),
        dropped_rows: 0,
    };
    ds.write_csv(fs::File::create(dir.path().join("f.csv")).unwrap()).unwrap();
    let o = projinv(
        dir.path(),
        &["test", "--input", "f.csv", "--functional-grid", "5", "--bootstrap", "40", "--directions", "5"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["dim"], 15);
    assert_eq!(report["per_generator"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_single_replicate() {
    let dir = tempfile::tempdir().unwrap();
    let o = projinv(
        dir.path(),
        &[
            "simulate", "--scenario", "gauss", "--n", "100", "--directions", "5", "--bootstrap", "30",
            "--replicates", "1", "--params", "0,1", "--out", "curve.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("param,power,se,replicates,seed"));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert!(f[1] == "0" || f[1] == "1", "{line}");
        assert_eq!(f[2], "0");
        assert_eq!(f[3], "1");
    }
    assert!(dir.path().join("curve.manifest.json").exists());
    let o = projinv(dir.path(), &["simulate", "--scenario", "clayton-c1", "--params", "2.5", "--replicates", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn copula_index_matrix() {
    let dir = workspace(80);
    let o = projinv(dir.path(), &["copula-index", "--input", "x.csv", "--pairs", "all"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("symmetry.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], vec!["", "a", "b", "c"]);
    for (i, row) in rows.iter().enumerate().skip(1) {
        assert_eq!(row[i].parse::<f64>().unwrap(), 0.0);
        for (j, other) in rows.iter().enumerate().skip(1) {
            assert_eq!(row[j], other[i]);
        }
    }
    assert!(stdout(&o).contains("largest asymmetry"));
    assert_eq!(code(&projinv(dir.path(), &["copula-index", "--input", "x.csv", "--columns", "a"])), 2);
    assert_eq!(code(&projinv(dir.path(), &["copula-index", "--input", "x.csv", "--pairs", "a:b"])), 2);
}

#[test]
fn group_inspect_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = projinv(
        dir.path(),
        &["group", "--group", "sign-exchangeable", "--dim", "3", "--closure", "--export", "g.json"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("order 48"), "{}", stdout(&o));
    let o = projinv(dir.path(), &["group", "--group", "file:g.json", "--closure"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("order 48"));
    assert_eq!(code(&projinv(dir.path(), &["group", "--group", "exchangeable"])), 2);
    fs::write(dir.path().join("bad.json"), r#"{"dim": 2, "name": "z", "generators": [[1, 2, 2, 4]]}"#).unwrap();
    assert_eq!(code(&projinv(dir.path(), &["group", "--group", "file:bad.json"])), 2);
}

#[test]
fn headerless_positional_columns() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (0..60)
        .map(|i| format!("{} {} {} {}\n", i % 7, (i * 3) % 11, (i * 5) % 13, i % 2))
        .collect();
    fs::write(dir.path().join("sat.trn"), rows).unwrap();
    let o = projinv(
        dir.path(),
        &[
            "test", "--input", "sat.trn", "--delimiter", "space", "--no-header", "--columns", "1-3", "--procedure",
            "perm-null", "--replicates", "50", "--directions", "5",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&dir.path().join("report.json"))["dim"], 3);
}

#[test]
fn fetch_without_network_flag_downloads_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = projinv(dir.path(), &["fetch", "--dir", "data"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("sat.trn"));
    assert!(!dir.path().join("data").exists());
}
