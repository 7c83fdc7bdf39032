use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bkising"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bkising"))
        .args(args)
        .env("BKISING_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn log_abs(args: &[&str]) -> f64 {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    json(&out)["result"]["log_abs"].as_f64().unwrap()
}

#[test]
fn free_spins_closed_form() {
    let v = log_abs(&[
        "z", "--M", "2", "--N", "2", "--k1", "0", "--k2", "0", "--field", "zero", "--method",
        "closed",
    ]);
    assert!((v - 4.0 * std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn methods_agree() {
    let base = [
        "z", "--M", "4", "--N", "4", "--k1", "0.3", "--k2", "0.5", "--field",
    ];
    for field in ["zero", "ipi2"] {
        let vals: Vec<f64> = ["closed", "brute", "transfer", "mccoywu"]
            .iter()
            .map(|m| {
                let mut a = base.to_vec();
                a.extend([field, "--method", m]);
                log_abs(&a)
            })
            .collect();
        for v in &vals {
            assert!((v - vals[0]).abs() < 1e-10, "{field}: {vals:?}");
        }
    }
}

#[test]
fn vanishing_partition_function_has_sign_zero() {
    let out = run(&[
        "z", "--M", "2", "--N", "2", "--k1", "0", "--k2", "0", "--field", "ipi2",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["result"]["sign"], 0);
    assert!(v["result"]["log_abs"].is_null());
}

#[test]
fn envelope_fields() {
    let out = run(&["z", "--M", "2", "--N", "4", "--k1", "0.1", "--k2", "0.2"]);
    let v = json(&out);
    for key in [
        "tool",
        "version",
        "command",
        "config",
        "wall_time_s",
        "result",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["config"]["method"], "closed");
    assert_eq!(v["config"]["n"], 4);
}

#[test]
fn precondition_exit_codes() {
    let odd_rows = run(&[
        "z", "--M", "3", "--N", "2", "--k1", "0.2", "--k2", "0.2", "--field", "ipi2",
    ]);
    assert_eq!(odd_rows.status.code(), Some(2));
    assert!(json(&odd_rows)["message"].as_str().unwrap().contains("M=3"));
    let odd_cols = run(&["z", "--M", "2", "--N", "3", "--k1", "0.2", "--k2", "0.2"]);
    assert_eq!(odd_cols.status.code(), Some(2));
    let cap = run(&[
        "z", "--M", "5", "--N", "6", "--k1", "0.2", "--k2", "0.2", "--method", "brute",
    ]);
    assert_eq!(cap.status.code(), Some(2));
}

#[test]
fn verify_small_and_deterministic() {
    let a = run(&["verify", "--max-spins", "4"]);
    assert!(a.status.success());
    assert_eq!(json(&a)["result"]["passed"], true);

    let args = [
        "verify",
        "--max-spins",
        "12",
        "--trials",
        "3",
        "--seed",
        "9",
    ];
    let one = json(&run_with_threads(&args, "1"));
    let four = json(&run_with_threads(&args, "4"));
    assert_eq!(one["result"]["cases"], four["result"]["cases"]);
    let other = json(&run(&[
        "verify",
        "--max-spins",
        "12",
        "--trials",
        "3",
        "--seed",
        "10",
    ]));
    assert_eq!(other["result"]["passed"], true);
    assert_ne!(
        one["result"]["cases"][0]["k1"],
        other["result"]["cases"][0]["k1"]
    );
}

#[test]
fn zeros_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.csv");
    let out = run(&[
        "zeros",
        "--M",
        "4",
        "--N",
        "6",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("j,k,re,im,locus,residual"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 4 * 6);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 6);
        assert!(cols[5].parse::<f64>().unwrap() <= 1e-9);
    }
    assert!(!text.contains('\r'));
}

#[test]
fn zeros_json_schema() {
    let out = run(&[
        "zeros", "--M", "4", "--N", "4", "--field", "ipi2", "--format", "json",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    let zeros = v["result"]["zeros"].as_array().unwrap();
    assert_eq!(zeros.len(), v["result"]["count"].as_u64().unwrap() as usize);
    assert_eq!(v["result"]["variable"], "u");
    for z in zeros {
        let keys: Vec<&String> = z.as_object().unwrap().keys().collect();
        assert_eq!(keys, vec!["im", "j", "k", "locus", "re", "residual"]);
    }
    let fixed = run(&[
        "zeros", "--M", "2", "--N", "2", "--x2", "0.3+0.2i", "--format", "json",
    ]);
    assert!(fixed.status.success());
    assert_eq!(json(&fixed)["result"]["variable"], "x1");
    let bad = run(&["zeros", "--M", "2", "--N", "2", "--x2", "zz"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_io_error() {
    let out = run(&[
        "zeros",
        "--M",
        "2",
        "--N",
        "2",
        "--out",
        "/nonexistent-dir/z.csv",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn free_energy_report() {
    let out = run(&[
        "free-energy",
        "--k1",
        "0.4",
        "--k2",
        "0.5",
        "--resolution",
        "64",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    let r = &v["result"];
    assert!(r["estimated_error"].as_f64().unwrap() < 1e-10);
    assert!(r["axis_swap_residual"].as_f64().unwrap() < 1e-12);
    let d: Vec<f64> = r["finite_size"]["cauchy_differences"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]));
    let bad = run(&["free-energy", "--k1", "-0.4", "--k2", "0.5"]);
    assert_eq!(bad.status.code(), Some(2));
}
