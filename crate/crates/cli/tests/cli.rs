use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gperiod")).args(args).env_remove("GPERIOD_PREC").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

fn family_file(name: &str, coords: &[&str]) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("gperiod-{}-{name}.json", std::process::id()));
    let entries: Vec<_> = coords.iter().map(|g| serde_json::json!({ "g": g })).collect();
    std::fs::write(&path, serde_json::json!({ "n": coords.len(), "coords": entries }).to_string()).unwrap();
    path
}

#[test]
fn series_prints_exact_coefficients() {
    let o = run(&["series", "--family", "default", "--coord", "1", "--order", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["entries"][0][0][2], "9/64");
    assert_eq!(v["entries"][0][0][1], "1/4");
}

#[test]
fn series_order_zero_is_the_identity() {
    let o = run(&["series", "--coord", "2", "--order", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let e = &v["entries"];
    assert_eq!((e[0][0][0].as_str(), e[0][1][0].as_str()), (Some("1"), Some("0")));
    assert_eq!((e[1][0][0].as_str(), e[1][1][0].as_str()), (Some("0"), Some("1")));
}

#[test]
fn bad_coordinate_is_a_usage_error() {
    assert_eq!(run(&["series", "--coord", "7", "--order", "4"]).status.code(), Some(1));
    assert_eq!(run(&["series", "--coord", "0"]).status.code(), Some(1));
    assert_eq!(run(&["--prec", "32", "cm", "--class-number", "-23"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn trivial_check_passes_on_the_default_family() {
    let o = run(&["trivial-check", "--numeric-at", "1/3"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("PASS exact"));
    assert!(s.contains("PASS numeric"));
    assert!(s.contains("lambda = 1/3") && s.contains("rad = "));
}

#[test]
fn trivial_check_fixtures_fail_with_exit_2() {
    assert_eq!(run(&["trivial-check", "--fixture", "scaled-basis"]).status.code(), Some(2));
    assert_eq!(run(&["trivial-check", "--fixture", "swapped-cycles"]).status.code(), Some(2));
}

#[test]
fn relation_at_a_located_fiber_certifies() {
    let o = run(&["relation", "--point", "5/2 - 2*sqrt(2)"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["polynomial"]["homogeneous"], true);
    assert_eq!(v["degree_bound"]["holds"], true);
    assert!(v["places"].as_array().is_some_and(|p| !p.is_empty()));
    assert!(v["places"][0]["residual_rad"].is_string());
    assert_ne!(v["nontriviality"]["witness_coefficient"], "0");
}

#[test]
fn relation_at_a_non_cm_point_exits_2() {
    assert_eq!(run(&["relation", "--point", "1/3"]).status.code(), Some(2));
}

#[test]
fn relation_for_two_singular_coordinates_exits_3() {
    let path = family_file("two-singular", &["x", "2*x"]);
    let o = run(&["relation", "--family", path.to_str().unwrap(), "--point", "1/4"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn cm_commands() {
    let v = json(&run(&["cm", "--class-number", "-23"]));
    assert_eq!(v["h"], 3);
    let v = json(&run(&["cm", "--heegner", "200"]));
    let got: Vec<i64> = v["heegner"].as_array().unwrap().iter().map(|d| d.as_i64().unwrap()).collect();
    assert_eq!(got, vec![-3, -4, -7, -8, -11, -19, -43, -67, -163]);
}

#[test]
fn siegel_table_has_nine_class_number_one_fundamental_rows() {
    let o = run(&["siegel", "--max", "200", "--eps", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (fc, hc) = (col("fundamental"), col("h"));
    let n = lines.map(|l| l.split(',').collect::<Vec<_>>()).filter(|r| r[fc] == "true" && r[hc] == "1").count();
    assert_eq!(n, 9);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["relation", "--point", "5/2 - 2*sqrt(2)"][..],
        &["siegel", "--max", "500"][..],
        &["periods", "--lambda", "1/3"][..],
        &["radii", "--order", "60"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn precision_comes_from_the_environment() {
    let at = |bits: &str| {
        Command::new(env!("CARGO_BIN_EXE_gperiod"))
            .args(["periods", "--lambda", "1/3"])
            .env("GPERIOD_PREC", bits)
            .output()
            .unwrap()
    };
    let lo = at("64");
    let hi = at("512");
    assert_eq!(lo.status.code(), Some(0));
    assert_ne!(lo.stdout, hi.stdout);
    assert_eq!(hi.stdout, run(&["--prec", "512", "periods", "--lambda", "1/3"]).stdout);
    assert_eq!(at("16").status.code(), Some(1));
}

#[test]
fn numeric_outputs_are_balls() {
    let v = json(&run(&["periods", "--lambda", "1/3"]));
    fn check(v: &serde_json::Value) {
        match v {
            serde_json::Value::Number(_) => panic!("bare number in numeric output"),
            serde_json::Value::Array(a) => a.iter().for_each(check),
            serde_json::Value::Object(m) => {
                if m.contains_key("mid") {
                    assert!(m.contains_key("rad"));
                } else {
                    m.values().for_each(check);
                }
            }
            _ => {}
        }
    }
    check(&v);
}

#[test]
fn periods_on_a_cm_chart_report_the_adapted_factorization() {
    let o = run(&["periods", "--coord", "2", "--x", "1/64", "--order", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let a = &v["cm_adapted"];
    assert_eq!(a["basis"]["b_dr"], serde_json::json!([["1", "0"], ["-1/2", "1"]]));
    let bound: f64 = a["off_diagonal_bound"].as_str().unwrap().parse().unwrap();
    assert!(bound < 1e-25);
    assert!(run(&["periods", "--coord", "1", "--x", "1/64"]).status.code() == Some(0));
}
