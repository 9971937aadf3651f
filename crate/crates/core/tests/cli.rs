//! The `mtarget` binary: exit codes, config handling and report shape.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mtarget(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtarget")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn body(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(mtarget(&["mix", "--bogus", "1"]).status.code(), Some(2));
    assert_eq!(mtarget(&["mix"]).status.code(), Some(2));
    assert_eq!(mtarget(&["mix", "--chain", "nonexistent-file.json"]).status.code(), Some(2));
    // Monte Carlo without a seed
    assert_eq!(mtarget(&["hit", "--chain", "biased-cycle(5,3/4)", "--target", "0", "--runs", "100"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"command": {"mix": {"chain": "lazy-torus(4,1)", "speed": 3}}}"#);
    let out = mtarget(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
    let cfg = write(dir.path(), "top.json", r#"{"verbose": true, "command": {"mix": {}}}"#);
    assert_eq!(mtarget(&["--config", &cfg]).status.code(), Some(2));
}

#[test]
fn config_file_and_flags_merge_with_flags_winning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"command": {"mix": {"chain": "lazy-torus(8,1)", "epsilon": "1/4"}}}"#);
    let from_file = report(&mtarget(&["--config", &cfg]));
    let overridden = report(&mtarget(&["--config", &cfg, "mix", "--epsilon", "1/8"]));
    let direct = report(&mtarget(&["mix", "--chain", "lazy-torus(8,1)", "--epsilon", "1/8"]));
    assert_eq!(from_file["data"]["epsilon"], "1/4");
    assert_eq!(overridden["data"]["epsilon"], "1/8");
    assert_eq!(body(overridden), body(direct));
    let clash = mtarget(&["--config", &cfg, "hit"]);
    assert_eq!(clash.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_given_the_seed() {
    let args = ["hit", "--chain", "biased-cycle(6,3/4)", "--target", "0,3", "--runs", "5000", "--seed", "42"];
    let (a, b) = (mtarget(&args), mtarget(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(body(report(&a)), body(report(&b)));
    let c = report(&mtarget(&["hit", "--chain", "biased-cycle(6,3/4)", "--target", "0,3", "--runs", "5000", "--seed", "43"]));
    assert_ne!(body(report(&a))["data"], c["data"]);
}

#[test]
fn inequalities_carry_both_operands_as_exact_text() {
    let r = report(&mtarget(&["gnm", "cluster"]));
    for v in r["verdicts"].as_array().unwrap() {
        if v.get("relation").is_some() {
            assert!(v["lhs"].is_string() && v["rhs"].is_string(), "{v}");
        }
    }
    let accounting = r["verdicts"].as_array().unwrap().iter().find(|v| v["name"] == "tabulated accounting E[T] < h(m/2)").unwrap();
    assert_eq!(accounting["lhs"], "104/7");
    assert_eq!(accounting["rhs"], "16");
    assert_eq!(r["provenance"]["tool"], "moving-targets");
}

#[test]
fn antipode_report_lists_the_antipode_constant() {
    let out = mtarget(&["torus-check", "--mode", "theorem2", "--n", "4", "--d", "1", "--t", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let last = r["data"]["results"].as_array().unwrap().last().unwrap().clone();
    let antipode: Value = serde_json::json!(["2", "2", "2", "2", "2"]);
    assert!(last["maximizers"].as_array().unwrap().contains(&antipode), "{last}");
}

#[test]
fn counterexample_exit_code_follows_the_margin() {
    let out = mtarget(&["gnm", "counterexample", "--n", "2", "--m", "12", "--lazy"]);
    let r = report(&out);
    let margin_positive = r["data"]["pass"].as_bool().unwrap();
    assert_eq!(out.status.code(), Some(if margin_positive { 0 } else { 1 }));
    assert!(r["data"]["reference"]["trajectory"].as_str().unwrap().starts_with("5(1,1)"));
}

#[test]
fn float_reproduction_matches_exact_verdicts() {
    let exact = report(&mtarget(&["reproduce-paper"]));
    let float = report(&mtarget(&["reproduce-paper", "--mode", "float"]));
    let outcomes = |r: &Value| -> Vec<(String, String)> {
        r["verdicts"].as_array().unwrap().iter().map(|v| (v["name"].to_string(), v["outcome"].to_string())).collect()
    };
    assert_eq!(outcomes(&exact), outcomes(&float));
    let names: Vec<String> = outcomes(&exact).into_iter().map(|(n, _)| n).collect();
    for key in ["\"A1\"", "\"A2\"", "\"accounting E[T]\"", "\"h(6)\""] {
        assert!(names.iter().any(|n| n == key), "missing {key}");
    }
}

#[test]
fn csv_and_out_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = mtarget(&["sausage", "--d", "1", "--n", "0", "--t", "3", "--drift", "1", "--csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("command,name,outcome,lhs,relation,rhs,detail"));
    assert_eq!(lines.count(), 4);
    assert!(text.contains("sausage,d=1 n=0 t=2,pass,5/2,>=,15/8,"));
}

#[test]
fn edge_list_export() {
    let out = mtarget(&["gnm", "build", "--n", "2", "--m", "12"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 48 * 10 / 2);
    assert!(text.lines().all(|l| l.split(' ').count() == 3));
}

#[test]
fn chain_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(dir.path(), "c.json", r#"{"states": 2, "mode": "exact", "rows": [["1/2", "1/2"], ["1/3", "2/3"]]}"#);
    let r = report(&mtarget(&["hit", "--chain", &chain, "--target", "1", "--start", "0"]));
    assert_eq!(r["data"]["hitting"][0]["expected"], "2");
    let seq = write(dir.path(), "s.json", r#"{"prefix": [[0]], "tail": [1]}"#);
    // the start already sits in A_0
    let r = report(&mtarget(&["hit", "--chain", &chain, "--sequence", &seq, "--start", "0"]));
    assert_eq!(r["data"]["hitting"][0]["expected"], "0");
}
