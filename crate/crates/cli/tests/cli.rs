use std::path::PathBuf;
use std::process::{Command, Output};

use onemirror::ParamSet;

fn onemirror(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onemirror"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn header_carries_version_and_parameter_echo() {
    let text = stdout(&onemirror(&["visibility-1d", "--set", "dp_over_p=0.05"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        format!("# onemirror {} verb=visibility-1d seed=1 sweep=none", env!("CARGO_PKG_VERSION"))
    );
    let echo = lines[1].strip_prefix("# params: ").unwrap();
    let set = ParamSet::from_echo(echo).unwrap();
    assert_eq!(set.dp_over_p, 0.05);
    assert_eq!(
        set.validate::<f64>().unwrap(),
        ParamSet {
            dp_over_p: 0.05,
            ..ParamSet::default()
        }
        .validate::<f64>()
        .unwrap()
    );
}

#[test]
fn visibility_sweep_reproduces_closed_form() {
    let text = stdout(&onemirror(&[
        "visibility-1d",
        "--set",
        "mass_target=2",
        "--sweep",
        "dp_over_p:0:0.2:21",
    ]));
    let rows = data_lines(&text);
    assert_eq!(rows[0], "dp_over_p,visibility_numeric,visibility_analytic");
    assert_eq!(rows.len(), 22);
    let set = ParamSet::default();
    let d = set.d_over_lambda * set.lambda_in;
    let p = std::f64::consts::TAU / set.lambda_in;
    for row in &rows[1..] {
        let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        let dp = v[0] * p;
        // (M - m) = 1 with m = 1
        let expected = (-d * d * dp * dp / 8.0).exp();
        assert!((v[2] - expected).abs() < 1e-12, "{row}");
    }
}

#[test]
fn angular_table_has_both_phases() {
    let text = stdout(&onemirror(&["angular"]));
    let rows = data_lines(&text);
    assert_eq!(rows[0], "theta_fin_deg,density_alpha0,density_alphapi");
    // 10° to 170° in quarter degrees, with 45° dropped
    assert_eq!(rows.len() - 1, 640);
    assert!(text.contains("# excluded_deg: 45\n"));
    assert!(rows[1].starts_with("10,"));
}

#[test]
fn json_mirrors_csv() {
    let csv = stdout(&onemirror(&["visibility-2d", "--sweep", "mass_ratio:0.5:1.5:3"]));
    let json = stdout(&onemirror(&["visibility-2d", "--sweep", "mass_ratio:0.5:1.5:3", "--format", "json"]));
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    let rows = value.as_array().unwrap();
    let csv_rows = data_lines(&csv);
    assert_eq!(rows.len(), csv_rows.len() - 1);
    let columns: Vec<&str> = csv_rows[0].split(',').collect();
    for (obj, line) in rows.iter().zip(&csv_rows[1..]) {
        let keys: Vec<&String> = obj.as_object().unwrap().keys().collect();
        assert_eq!(keys, columns);
        let first: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(obj["visibility"].as_f64().unwrap(), first);
    }
}

#[test]
fn config_file_and_output_file() {
    let config = scratch("equal.conf");
    std::fs::write(&config, "# equal masses\nmass_target = 1\ndp_over_p = 0.2 # wide\n").unwrap();
    let out = scratch("equal.csv");
    let status = onemirror(&[
        "visibility-1d",
        "--config",
        config.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let row: Vec<f64> = data_lines(&text)[1]
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert!(row[0] >= 1.0 - 1e-6);
    assert_eq!(row[1], 1.0);
}

#[test]
fn usage_errors_exit_two_with_one_line() {
    let cases: &[&[&str]] = &[
        &["no-such-verb"],
        &["angular", "--set", "colour=3"],
        &["angular", "--set", "mass_target=-1"],
        &["angular", "--set", "w_over_lambda=4"],
        &["visibility-2d", "--sweep", "alpha:0:1:1"],
        &["visibility-2d", "--sweep", "width:0:1:3"],
        &["oracle", "nonsense"],
        &["visibility-1d", "--format", "xml"],
    ];
    for args in cases {
        let out = onemirror(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(out.stdout.is_empty());
    }
    let config = scratch("bad.conf");
    std::fs::write(&config, "mass_probe = 1\nflavour = 2\n").unwrap();
    let out = onemirror(&["angular", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_one() {
    let out = onemirror(&["angular", "--theta-step", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("too coarse"));
    let out = onemirror(&["visibility-1d", "--output", "/nonexistent-dir/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn transfer_condition_matches_times() {
    let text = stdout(&onemirror(&["transfer-condition", "--set", "mass_target=0.3", "--theta-fin", "100"]));
    let rows = data_lines(&text);
    let v: Vec<f64> = rows[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((v[1] / v[2] - 1.0).abs() < 1e-14);
    assert!(v[4] > 0.0);
    assert!(v[5].abs() < 1e-8);
}

#[test]
fn oracle_suite_reports() {
    let text = stdout(&onemirror(&["oracle", "pstar"]));
    let rows = data_lines(&text);
    assert_eq!(rows[0], "name,value,reference,rel_err,samples,seed");
    assert_eq!(rows.len(), 4);
    for row in &rows[1..] {
        let rel: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!(rel < 1e-10, "{row}");
    }
}

#[test]
fn help_and_version_succeed() {
    assert!(onemirror(&["--help"]).status.success());
    let out = stdout(&onemirror(&["--version"]));
    assert!(out.contains(env!("CARGO_PKG_VERSION")));
}
