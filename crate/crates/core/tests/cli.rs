use std::path::Path;
use std::process::{Command, Output};

fn sqd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqd")).args(args).output().expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

const POINTS: &str = r#"
[scan]
seed = 4

[[point]]
label = 2.6
integrals = "singlet.fcidump"
n_alpha = 3
n_beta = 3
spin = 0.0
shots = 20000
noise = { bit_flip_prob = 0.02 }
recovery = { n_batches = 2, n_iterations = 2 }
orbopt = { max_steps = 10 }

[[point]]
label = 2.6
integrals = "triplet.fcidump"
n_alpha = 4
n_beta = 2
spin = 1.0
shots = 20000
noise = { bit_flip_prob = 0.02 }
recovery = { n_batches = 2, n_iterations = 2 }
orbopt = { max_steps = 10 }
"#;

fn write_inputs(dir: &Path) -> std::path::PathBuf {
    for (name, na, nb) in [("singlet", "3", "3"), ("triplet", "4", "2")] {
        let out = sqd(&["write-model", "--length", "2.6", "--n-alpha", na, "--n-beta", nb, "--output", arg(&dir.join(format!("{name}.fcidump")))]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let config = dir.join("scan.toml");
    std::fs::write(&config, POINTS).unwrap();
    config
}

#[test]
fn scan_writes_csv_and_point_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_inputs(dir.path());
    let results = dir.path().join("results");
    let out = sqd(&["run-scan", "--config", arg(&config), "--oracle", "--threads", "2", "--output", arg(&results)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let scan = std::fs::read_to_string(results.join("scan.csv")).unwrap();
    let mut lines = scan.lines();
    assert_eq!(lines.next(), Some("label,e_triplet,e_singlet,gap,err_triplet,err_singlet,gap_oracle"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 2.6);
    assert!((row[3] - (row[2] - row[1])).abs() < 1e-9);
    assert!(row[4] >= -1e-9 && row[5] >= -1e-9);
    assert!(row[6] < 0.0);
    assert_eq!(String::from_utf8_lossy(&out.stdout), scan);

    let points = std::fs::read_to_string(results.join("points.csv")).unwrap();
    assert_eq!(points.lines().count(), 3);
    for sector in ["singlet_3a3b", "triplet_4a2b"] {
        assert!(results.join(format!("point_{sector}_2.6.json")).exists());
    }
}

#[test]
fn run_point_and_oracle_agree_on_the_reference() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_inputs(dir.path());
    let out = sqd(&["oracle", "--config", arg(&config)]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let oracle: f64 = text.lines().nth(2).unwrap().split(',').nth(2).unwrap().parse().unwrap();

    let results = dir.path().join("one");
    let out = sqd(&["run-point", "--config", arg(&config), "--sector", "triplet_4a2b", "--oracle", "--output", arg(&results)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let row = String::from_utf8_lossy(&out.stdout).lines().nth(1).unwrap().to_string();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[1], "triplet_4a2b");
    assert!((fields[4].parse::<f64>().unwrap() - oracle).abs() < 1e-10);

    let warm = results.join("point_triplet_4a2b_2.6.json");
    let out = sqd(&["run-point", "--config", arg(&config), "--sector", "triplet_4a2b", "--warm-start", arg(&warm), "--output", arg(&results)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn report_lists_leading_determinants() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_inputs(dir.path());
    let out = sqd(&["report", "--config", arg(&config), "--sector", "singlet_3a3b", "--top", "5", "--no-orbopt"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "rank,determinant,reference,test");
    assert_eq!(rows.len(), 6);
    assert!(rows[1].contains("α:111000|β:111000"));
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[[point]]\nlabel = 1.0\nmodel = 1.0\nn_alpha = 3\nn_beta = 3\nspin = 0.5\n").unwrap();
    assert_eq!(sqd(&["run-scan", "--config", arg(&bad)]).status.code(), Some(2));
    assert_eq!(sqd(&["run-scan", "--config", arg(&dir.path().join("missing.toml"))]).status.code(), Some(2));

    let config = write_inputs(dir.path());
    let out = sqd(&["run-point", "--config", arg(&config)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 points match"));
}

#[test]
fn tiny_dimension_limit_trips_the_resource_guard() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("guard.toml");
    std::fs::write(
        &config,
        "[[point]]\nlabel = 1.6\nmodel = 1.6\nn_alpha = 3\nn_beta = 3\nspin = 0.0\nshots = 5000\noptimize_orbitals = false\nrecovery = { n_batches = 1, n_iterations = 1, solver = { max_dimension = 2 } }\n",
    )
    .unwrap();
    assert_eq!(sqd(&["run-scan", "--config", arg(&config), "--output", arg(&dir.path().join("o"))]).status.code(), Some(4));
}
