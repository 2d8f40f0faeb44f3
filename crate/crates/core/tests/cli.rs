use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn devport(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_devport"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn run_config(command: &str, file: &str) -> (i32, Value) {
    let path = configs().join(file);
    let out = devport(&[command, "--config", path.to_str().unwrap()]);
    (out.status.code().unwrap(), json(&out))
}

fn vec_of(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn every_shipped_config_runs() {
    let cases = [
        ("forward", "forward_mad.json"),
        ("forward", "forward_cvar.json"),
        ("forward", "forward_csv.json"),
        ("inverse", "inverse_mad.json"),
        ("selector", "selector_cvar.json"),
        ("steiner", "steiner_triangle.json"),
        ("alloc", "alloc_mad.json"),
        ("coop", "coop.json"),
        ("bl", "bl_override.json"),
        ("bl", "bl_views.json"),
    ];
    for (cmd, file) in cases {
        let (code, v) = run_config(cmd, file);
        assert_eq!(code, 0, "{cmd} {file}: {v}");
        assert_eq!(v["status"], "ok");
        assert_eq!(v["command"], cmd);
    }
}

#[test]
fn forward_mad_reproduces_reference_portfolio() {
    let (_, v) = run_config("forward", "forward_mad.json");
    let x = vec_of(&v["result"]["x"]);
    assert!((x[0] - 0.5).abs() < 1e-9 && (x[1] - 0.5).abs() < 1e-9);
    assert!((v["result"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn coop_reports_side_payment() {
    let (_, v) = run_config("coop", "coop.json");
    let c = v["result"]["side_payments"]["payments"][0].as_f64().unwrap();
    assert!((c + 1.0 / 15.0).abs() < 1e-9);
}

#[test]
fn steiner_from_vertices_flag() {
    let out = devport(&["steiner", "--vertices", "[[1.5,1,0.5],[1.3333333333333333,1.3333333333333333,0.3333333333333333]]"]);
    assert_eq!(out.status.code(), Some(0));
    let p = vec_of(&json(&out)["result"]["point"]);
    let want = [17.0 / 12.0, 7.0 / 6.0, 5.0 / 12.0];
    assert!(p.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-9), "{p:?}");
}

#[test]
fn golden_cases_and_alias() {
    for name in ["golden-cases", "paper-examples"] {
        let out = devport(&[name]);
        assert_eq!(out.status.code(), Some(0));
        let v = json(&out);
        assert_eq!(v["result"]["all_passed"], true);
        assert_eq!(v["result"]["cases"].as_array().unwrap().len(), 5);
    }
}

#[test]
fn output_is_deterministic() {
    let path = configs().join("selector_cvar.json");
    let a = devport(&["selector", "--config", path.to_str().unwrap()]);
    let b = devport(&["selector", "--config", path.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    let cube = "[[0,0,0],[1,0,0],[0,1,0],[0,0,1],[1,1,0],[1,0,1],[0,1,1],[1,1,1]]";
    let a = devport(&["steiner", "--vertices", cube, "--samples", "4096", "--seed", "7"]);
    let b = devport(&["steiner", "--vertices", cube, "--samples", "4096", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["result"]["method"], "monte_carlo");
}

#[test]
fn exit_codes_separate_bad_input_from_numerical_limits() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };

    let bad_schema = write("schema.json", r#"{"schema": 2}"#);
    let out = devport(&["forward", "--config", bad_schema.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["status"], "error");
    assert_eq!(v["error"]["validation"], true);

    let missing = dir.path().join("nope.json");
    assert_eq!(devport(&["forward", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(devport(&["no-such-command"]).status.code(), Some(1));

    let x: Vec<String> = (0..21).map(|i| i.to_string()).collect();
    let big = write(
        "big.json",
        &format!(r#"{{"schema":1,"measure":{{"kind":"mad"}},"x":[{}]}}"#, x.join(",")),
    );
    let out = devport(&["selector", "--config", big.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "too_many_scenarios");

    let stddev = write(
        "std.json",
        r#"{"schema":1,"space":{"uniform":3},"centered":[[-1,0,1],[0,-1,1]],"mu":[1,1],
            "measure":{"kind":"stddev"},"delta":1}"#,
    );
    let out = devport(&["forward", "--config", stddev.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "unsupported");
}
