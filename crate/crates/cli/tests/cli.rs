use std::process::{Command, Output};

fn nfunc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nfunc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<csv::StringRecord> {
    let text = stdout(o);
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    rd.records().map(|r| r.unwrap()).collect()
}

fn csv_column(o: &Output, name: &str) -> Vec<String> {
    let text = stdout(o);
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let idx = rd
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == name)
        .unwrap();
    rd.records().map(|r| r.unwrap()[idx].to_string()).collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

fn json_lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn solve_examples() {
    let o = nfunc(&["solve", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("y = 0.2698741376"), "{}", stdout(&o));

    let o = nfunc(&["solve", "--", "-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("y = -0.5671432904"));

    let o = nfunc(&["solve", "X=-1"]);
    assert!(stdout(&o).contains("y = -0.5671432904"));

    let o = nfunc(&["solve", "0", "--format", "json"]);
    let v = json_lines(&o);
    assert_eq!(v[0]["y"], 0.0);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn negative_without_sentinel_is_usage_error() {
    assert_eq!(nfunc(&["solve", "-1"]).status.code(), Some(1));
    assert_eq!(nfunc(&["solve", "abc"]).status.code(), Some(1));
    assert_eq!(nfunc(&["solve", "1", "--tol", "-1"]).status.code(), Some(1));
    assert_eq!(
        nfunc(&["solve", "1", "--method", "3"]).status.code(),
        Some(1)
    );
    assert_eq!(nfunc(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn non_convergence_exit_code() {
    let o = nfunc(&["solve", "1", "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn general_examples() {
    let o = nfunc(&["general", "-p", "-5", "50", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_lines(&o);
    assert_eq!(v.len(), 2);
    assert!(close(v[0]["y"].as_f64().unwrap(), 0.6781759711, 1e-9));
    assert!(close(v[1]["y"].as_f64().unwrap(), 1.997684556, 1e-9));
    assert_eq!(v[0]["branch"], "lower");

    let o = nfunc(&["general", "-p", "0.5", "1", "--format", "csv"]);
    let y: f64 = csv_column(&o, "y")[0].parse().unwrap();
    assert!(close(y, 0.1077850239, 1e-9));

    let o = nfunc(&["general", "-p", "1/2", "1", "--format", "csv"]);
    let y2: f64 = csv_column(&o, "y")[0].parse().unwrap();
    assert_eq!(y, y2);

    let o = nfunc(&["general", "-p", "1", "10", "--format", "csv"]);
    let y: f64 = csv_column(&o, "y")[0].parse().unwrap();
    assert!(close(y, 0.885497672, 1e-9));

    let o = nfunc(&[
        "general", "-p", "-5", "50", "--branch", "upper", "--format", "csv",
    ]);
    assert_eq!(csv_rows(&o).len(), 1);
}

#[test]
fn missing_branch_exits_two_and_names_it() {
    let o = nfunc(&["general", "-p", "-1", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("lower") && err.contains("upper"), "{err}");
}

#[test]
fn general_negative_form() {
    let o = nfunc(&[
        "general", "-p", "10", "1e-10", "--form", "negative", "--y1", "0.09", "--format", "csv",
    ]);
    let y: f64 = csv_column(&o, "y")[0].parse().unwrap();
    assert!(close(y, 0.09127652716, 1e-9));
}

#[test]
fn transform_examples() {
    let o = nfunc(&["transform", "z-loglog", "p=1000", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let z: f64 = csv_column(&o, "z")[0].parse().unwrap();
    assert!(close(z, 543.4155969, 1e-9));

    let o = nfunc(&[
        "transform",
        "scaled",
        "a=1",
        "b=1",
        "p=10",
        "--format",
        "csv",
    ]);
    let z: f64 = csv_column(&o, "z")[0].parse().unwrap();
    assert!(close(z, 0.885497672, 1e-9));

    assert_eq!(nfunc(&["transform", "nope", "p=1"]).status.code(), Some(1));
    assert_eq!(
        nfunc(&["transform", "z-loglog", "p=-1"]).status.code(),
        Some(1)
    );
    assert_eq!(nfunc(&["transform", "z-loglog"]).status.code(), Some(1));
    assert!(stdout(&nfunc(&["transform", "list"])).contains("double-exp-power"));
}

#[test]
fn table_examples() {
    let o = nfunc(&["table", "3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let h = rd.headers().unwrap().clone();
    let col = |name: &str| h.iter().position(|c| c == name).unwrap();
    let row13: Vec<csv::StringRecord> = rd
        .records()
        .map(|r| r.unwrap())
        .filter(|r| &r[col("x")] == "13.0" && &r[col("cell")] == "y")
        .collect();
    let y: f64 = row13[0][col("computed")].parse().unwrap();
    assert!(close(y, 12.99997061, 1e-9));
    assert_eq!(&row13[0][col("flag")], "ok");

    let o = nfunc(&["table", "7"]);
    assert!(stdout(&o).contains("0.09127652716"));

    let o = nfunc(&["table", "1"]);
    assert!(stdout(&o).contains("0.2698741376"));

    assert_eq!(nfunc(&["table", "8"]).status.code(), Some(1));
}

#[test]
fn sweep_examples() {
    let o = nfunc(&[
        "sweep-init",
        "1000",
        "--method",
        "1",
        "2",
        "1e2",
        "1e7",
        "1e10",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let ys = csv_column(&o, "y");
    assert_eq!(ys.len(), 4);
    for y in ys {
        assert!((y.parse::<f64>().unwrap() - 1.84021218).abs() < 1e-7);
    }
    let dev: f64 = csv_column(&o, "max_deviation")[0].parse().unwrap();
    assert!(dev < 1e-12);

    let o = nfunc(&[
        "sweep-init",
        "100",
        "--method",
        "2",
        "2",
        "1e2",
        "1e8",
        "--format",
        "csv",
    ]);
    for y in csv_column(&o, "y") {
        assert!((y.parse::<f64>().unwrap() - 1.4440285).abs() < 1e-6);
    }

    let o = nfunc(&["sweep-init", "1", "--method", "2", "1.5", "--format", "csv"]);
    let y: f64 = csv_column(&o, "y")[0].parse().unwrap();
    assert!(close(y, 0.2698741376, 1e-9));

    assert_eq!(
        nfunc(&["sweep-init", "1", "--method", "3", "1.5"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn compare_newton_examples() {
    let o = nfunc(&[
        "compare-newton",
        "1000",
        "--method",
        "1",
        "2",
        "1e10",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_lines(&o);
    assert_eq!(v[0]["quadratic_status"], "converged");
    assert!(v[0]["quadratic_iterations"].as_u64().unwrap() <= 6);
    assert!((v[1]["quadratic_y"].as_f64().unwrap() - 1.84021218).abs() < 1e-7);

    let o = nfunc(&["compare-newton", "1", "2", "--format", "json"]);
    let v = json_lines(&o);
    assert!(close(
        v[0]["quadratic_y"].as_f64().unwrap(),
        0.2698741376,
        1e-9
    ));
    assert!(close(
        v[0]["newton_y"].as_f64().unwrap(),
        0.2698741376,
        1e-9
    ));
}

#[test]
fn plot_curve_is_monotone() {
    let o = nfunc(&["plot-data", "curve", "0", "3500", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let ys: Vec<f64> = csv_column(&o, "y")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(ys.len(), 100);
    assert!(ys.windows(2).all(|w| w[1] > w[0]));

    let o = nfunc(&["plot-data", "curve", "-10", "10", "21"]);
    let ys: Vec<f64> = csv_column(&o, "y")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(ys.windows(2).all(|w| w[1] > w[0]));

    assert_eq!(
        nfunc(&["plot-data", "curve", "1", "0", "5"]).status.code(),
        Some(1)
    );
}

#[test]
fn plot_traces() {
    let o = nfunc(&["plot-data", "trace", "1e-3", "--method", "1", "--z1", "2"]);
    let it: Vec<f64> = csv_column(&o, "iterate")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(it[0], 2.0);
    assert!(close(*it.last().unwrap(), 2.719281828, 1e-9));

    let o = nfunc(&["plot-data", "trace", "1", "--method", "3", "--y1", "0.5"]);
    let it: Vec<f64> = csv_column(&o, "iterate")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(it[0], 0.5);
    assert!(close(it[1], 0.5676084521, 1e-9));
    assert!(close(it[2], 0.5671432902, 1e-9));
}

#[test]
fn identities_pass() {
    let o = nfunc(&["identities", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_lines(&o);
    assert!(v.len() >= 14);
    assert!(v.iter().all(|r| r["pass"] == true));
}

#[test]
fn machine_output_round_trips_bit_identically() {
    for x in ["1", "1e-3", "12345.678", "X=-2.5", "7e19"] {
        let o = nfunc(&["solve", x, "--format", "csv"]);
        let row = &csv_rows(&o)[0];
        let (xv, yv) = (row[1].to_string(), row[7].to_string());
        let again = nfunc(&["solve", &format!("X={xv}"), "--format", "csv"]);
        assert_eq!(csv_rows(&again)[0][7].to_string(), yv);
        let parsed: f64 = yv.parse().unwrap();
        assert_eq!(
            parsed.to_string().parse::<f64>().unwrap().to_bits(),
            parsed.to_bits()
        );
    }
}

#[test]
fn machine_output_keeps_full_precision() {
    let o = nfunc(&["solve", "1", "--format", "json"]);
    let y = json_lines(&o)[0]["y"].as_f64().unwrap();
    let digits = format!("{y}").trim_start_matches("0.").len();
    assert!(digits >= 15, "{y}");
}
