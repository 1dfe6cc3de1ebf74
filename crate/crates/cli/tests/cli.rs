use std::fs;
use std::process::{Command, Output};

fn jumpstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jumpstat")).args(args).output().expect("run jumpstat")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn kv(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn rates_table_has_header_and_methods_agree() {
    let o = jumpstat(&["rates", "--r", "1.5", "--methods", "closed-form,projection"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("# jumpstat v"));
    assert!(text.contains("\nr,i,j,rate,method,rel_dev_independent\n"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 12);
    for k in 0..6 {
        let a: f64 = rows[k][3].parse().unwrap();
        let b: f64 = rows[k + 6][3].parse().unwrap();
        assert_eq!(rows[k][4], "closed-form");
        assert_eq!(rows[k + 6][4], "projection");
        assert!((a - b).abs() <= 1e-6 * a, "{a} vs {b}");
    }
}

#[test]
fn far_atoms_are_nearly_independent() {
    let o = jumpstat(&["rates", "--r", "10"]);
    for row in data_rows(&stdout(&o)) {
        let dev: f64 = row[5].parse().unwrap();
        assert!(dev < 1e-3, "{row:?}");
    }
    let o = jumpstat(&["rates", "--r", "1", "--independent"]);
    for row in data_rows(&stdout(&o)) {
        let dev: f64 = row[5].parse().unwrap();
        assert!(dev < 1e-14, "{row:?}");
    }
}

#[test]
fn operator_dump_is_sparse_triplets() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ops.txt");
    let o = jumpstat(&["rates", "--r", "2", "--atoms", "2", "--dump-operator", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# jumpstat v"));
    assert!(text.contains("# L0 dim=16"), "{}", &text[..200]);
    assert!(text.contains("# L1 dim=16"));
    let line = text.lines().find(|l| !l.starts_with('#')).unwrap();
    let fields: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(fields.len(), 4);
    assert!(fields[0].parse::<usize>().is_ok() && fields[2].parse::<f64>().is_ok());
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "rabi = 0.4\nr_min = 2.0\nr_max = 3.0\npoints = 3\ndetuning = 0.1\n").unwrap();
    let o = jumpstat(&["rates", "--config", path.to_str().unwrap(), "--rabi", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("# rabi = 0.5\n"));
    assert!(text.contains("# detuning = 0.1\n"));
    let rs: Vec<String> = data_rows(&text).iter().map(|r| r[0].clone()).collect();
    assert_eq!(rs.first().unwrap(), "2.000000");
    assert_eq!(rs.last().unwrap(), "3.000000");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "rabbi = 1.0\n").unwrap();
    for args in [
        vec!["rates", "--preset", "custom", "--a1", "1e-3"],
        vec!["rates", "--r-min", "-1"],
        vec!["sweep", "--points", "1"],
        vec!["rates", "--config", bad.to_str().unwrap()],
        vec!["rates", "--config", "/nonexistent/x.toml"],
        vec!["frobnicate"],
        vec!["simulate"],
        vec!["verify", "--only", "9"],
    ] {
        let o = jumpstat(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn custom_preset_runs_with_all_parameters() {
    let o = jumpstat(&[
        "rates",
        "--preset",
        "custom",
        "--scheme",
        "d-system",
        "--atoms",
        "2",
        "--a1",
        "1e-4",
        "--a2",
        "2e-4",
        "--rabi",
        "0.7",
        "--r",
        "0.8",
        "--methods",
        "projection,simplified",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 8);
    let up: f64 = rows[0][3].parse().unwrap();
    assert!((up - 2e-4).abs() < 1e-13);
}

#[test]
fn sweep_is_deterministic_and_writes_gnuplot_stub() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let gp = dir.path().join("s.gp");
    let args = ["sweep", "--points", "12", "--out", csv.to_str().unwrap(), "--gnuplot", gp.to_str().unwrap()];
    assert!(jumpstat(&args).status.success());
    let first = fs::read_to_string(&csv).unwrap();
    assert!(jumpstat(&args).status.success());
    assert_eq!(first, fs::read_to_string(&csv).unwrap());

    let header = first.lines().find(|l| !l.starts_with('#')).unwrap();
    let cols: Vec<&str> = header.split(',').collect();
    assert_eq!(cols[0], "r");
    for c in ["ndj_closed-form", "ndj_first-order", "ndj_independent", "ntj_closed-form", "ntj_independent"] {
        assert!(cols.contains(&c), "{c} missing from {header}");
    }
    let dev = cols.iter().position(|&c| c == "dev_ntj_closed-form").unwrap();
    let rows = data_rows(&first);
    assert_eq!(rows.len(), 12);
    for row in &rows {
        assert!(row[dev].parse::<f64>().unwrap() <= 0.05);
    }
    let script = fs::read_to_string(&gp).unwrap();
    assert!(script.contains("plot '") && script.contains(csv.to_str().unwrap()));
}

#[test]
fn simulate_fixture_matches_analytic_and_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("t.txt");
    let args = [
        "simulate",
        "--up",
        "1,1,1",
        "--down",
        "1,1,1",
        "--window",
        "0.01",
        "--seed",
        "7",
        "--transitions",
        "1e6",
        "--trajectory",
        traj.to_str().unwrap(),
    ];
    let a = jumpstat(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let text = stdout(&a);
    assert!(kv(&text, "transitions") >= 9e5);
    assert!(kv(&text, "z_double").abs() <= 3.0);
    assert!(kv(&text, "z_triple").abs() <= 3.0);
    assert_eq!(text, stdout(&jumpstat(&args)));

    let t = fs::read_to_string(&traj).unwrap();
    assert!(t.starts_with("# jumpstat v"));
    assert!(t.lines().any(|l| l == "time level"));
}

#[test]
fn simulate_warns_about_long_windows() {
    let o = jumpstat(&["simulate", "--up", "1,1,1", "--down", "1,1,1", "--window", "0.5", "--transitions", "1e4"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn simulate_model_from_config_section() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mc.toml");
    fs::write(&path, "window = 1e7\n[monte_carlo]\nseed = 5\ntransitions = 2e4\nstreams = 2\n").unwrap();
    let o = jumpstat(&["simulate", "--config", path.to_str().unwrap(), "--r", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("# monte_carlo = t_end None, transitions 20000, seed 5, streams 2"));
    assert!(kv(&text, "analytic_triple_rate") > 0.0);
}

#[test]
fn verify_reports_and_detects_faults() {
    let o = jumpstat(&["verify", "--only", "1,2,5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains(": PASS ")).count(), 3);

    let o = jumpstat(&["verify", "--only", "4", "--inject-fault", "first-order-sign"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("criterion 4: FAIL"));
}
