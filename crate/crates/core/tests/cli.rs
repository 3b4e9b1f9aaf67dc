use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};
use urnweyl::parse_fraction;

fn urnweyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urnweyl"))
        .args(args)
        .env_remove("URNWEYL_FORMAT")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn counts(v: &Value, l: u64) -> Vec<(u64, String)> {
    v["result"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["l"] == l)
        .map(|r| {
            r["counts"]
                .as_array()
                .unwrap()
                .iter()
                .map(|c| {
                    (
                        c["k"].as_u64().unwrap(),
                        c["count"].as_str().unwrap().to_string(),
                    )
                })
                .collect()
        })
        .unwrap_or_default()
}

#[test]
fn normal_order_examples() {
    let out = urnweyl(&["normal-order", "D X"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        json_of(&out)["result"]["normal_form"],
        json!([{ "k": 1, "l": 1, "coeff": "1" }, { "k": 0, "l": 0, "coeff": "1" }])
    );

    let out = urnweyl(&["normal-order", ""]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["result"]["normal_form"], json!([]));

    let out = urnweyl(&["normal-order", "D^2 X^2"]);
    assert_eq!(
        json_of(&out)["result"]["normal_form"],
        json!([
            { "k": 2, "l": 2, "coeff": "1" },
            { "k": 1, "l": 1, "coeff": "4" },
            { "k": 0, "l": 0, "coeff": "2" },
        ])
    );
}

#[test]
fn histories_examples() {
    let v = json_of(&urnweyl(&["histories", "D X", "-n", "1", "-l", "3"]));
    assert_eq!(counts(&v, 3), vec![(3, "4".to_string())]);

    let v = json_of(&urnweyl(&["histories", "X", "-n", "5", "-l", "0"]));
    assert_eq!(counts(&v, 0), vec![(5, "1".to_string())]);

    let out = urnweyl(&["histories", "X D + X", "-n", "1", "-l", "2", "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(
        counts(&v, 2),
        vec![(2, "2".to_string()), (3, "1".to_string())]
    );
    assert_eq!(v["result"]["oracle"]["agreement"], true);
}

#[test]
fn probabilities_examples() {
    let out = urnweyl(&["probabilities", "X D + X", "-n", "1", "-l", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        json_of(&out)["result"]["probs"],
        json!([{ "k": 2, "p": "2/3" }, { "k": 3, "p": "1/3" }])
    );

    let out = urnweyl(&["probabilities", "X", "-n", "3", "-l", "1"]);
    assert_eq!(
        json_of(&out)["result"]["probs"],
        json!([{ "k": 4, "p": "1" }])
    );

    let out = urnweyl(&["probabilities", "D", "-n", "1", "-l", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_of(&out)["error"]["kind"], "domain_error");
}

#[test]
fn series_examples() {
    let v = json_of(&urnweyl(&["series", "X D", "-N", "2"]));
    let polys: Vec<&str> = v["result"]["b_terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["polynomial"].as_str().unwrap())
        .collect();
    assert_eq!(polys, ["1", "x y", "x^2 y^2 + x y"]);

    let out = urnweyl(&["series", "X D", "-N", "2", "--check-pde"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["result"]["residual_zero"], true);

    let v = json_of(&urnweyl(&["series", "", "-N", "3"]));
    let polys: Vec<&str> = v["result"]["b_terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["polynomial"].as_str().unwrap())
        .collect();
    assert_eq!(polys, ["1", "0", "0", "0"]);
}

#[test]
fn oscillator_examples() {
    for args in [
        ["-g", "0", "-N", "4"],
        ["-g", "1", "-N", "6"],
        ["-g", "1/2", "-N", "6"],
    ] {
        let mut argv = vec!["oscillator"];
        argv.extend_from_slice(&args);
        let out = urnweyl(&argv);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let v = json_of(&out);
        assert_eq!(v["result"]["match"], true, "{args:?}");
        assert_eq!(v["result"]["mismatches"], json!([]));
    }
}

#[test]
fn parse_errors_exit_two_with_position() {
    let out = urnweyl(&["normal-order", "X ^"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position 3"));

    let out = urnweyl(&["histories", "-2 X", "-n", "1", "-l", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("negative coefficient"));
}

#[test]
fn budget_exceeded_exits_five() {
    let out = urnweyl(&[
        "histories",
        "D X",
        "-n",
        "3",
        "-l",
        "6",
        "--oracle",
        "--budget",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(json_of(&out)["error"]["kind"], "budget_exceeded");
}

#[test]
fn stdin_expression() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_urnweyl"))
        .args(["normal-order", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"D X\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["result"]["polynomial"], "x y + 1");
}

#[test]
fn csv_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_urnweyl"))
        .args(["probabilities", "X D + X", "-n", "1", "-l", "2"])
        .env("URNWEYL_FORMAT", "csv")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "n,l,k,p\n1,2,2,2/3\n1,2,3,1/3\n"
    );
}

#[test]
fn output_is_deterministic() {
    let args = [
        "series",
        "X D + 1/2 X + 1/2 D",
        "-N",
        "4",
        "--dx",
        "5",
        "--dy",
        "5",
    ];
    let a = urnweyl(&args);
    let b = urnweyl(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

const NUMERIC_KEYS: [&str; 5] = ["coeff", "count", "p", "closed_form", "series"];

fn collect_numbers(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Array(a) => a.iter().for_each(|x| collect_numbers(x, out)),
        Value::Object(m) => {
            for (k, x) in m {
                match x.as_str() {
                    Some(s) if NUMERIC_KEYS.contains(&k.as_str()) => out.push(s.to_string()),
                    _ => collect_numbers(x, out),
                }
            }
        }
        _ => {}
    }
}

#[test]
fn numbers_are_reduced_fraction_strings() {
    let v = json_of(&urnweyl(&[
        "series",
        "X D + 1/2 X + 2/3 D",
        "-N",
        "3",
        "--dx",
        "4",
        "--dy",
        "4",
    ]));
    let mut nums = Vec::new();
    collect_numbers(&v["result"], &mut nums);
    assert!(nums.len() > 20);
    for s in &nums {
        let r = parse_fraction(s).unwrap();
        assert_eq!(&urnweyl::fraction_string(&r), s, "not canonical: {s}");
    }
}
