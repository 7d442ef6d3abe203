use std::path::PathBuf;
use std::process::{Command, Output};

fn mop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mop")).args(args).env_remove("MOP_PRECISION_BITS").output().expect("runs")
}

fn json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("mop-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn solve_prints_zeros_and_residual() {
    let v = json(&mop(&["solve", "--n1", "3", "--n2", "2", "--alpha1", "0.5", "--alpha2", "-0.3"]));
    let z = v["zeros"].as_array().unwrap();
    assert_eq!(z.len(), 5);
    assert!(z.iter().all(|x| x.as_f64().unwrap() > 0.0));
    assert!(v["max_residual"].as_f64().unwrap() < 1e-40);
    assert_eq!(v["precision_bits"], 256);
}

#[test]
fn precision_flag_outranks_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_mop"))
        .args(["solve", "--n1", "2", "--n2", "1", "--precision-bits", "192"])
        .env("MOP_PRECISION_BITS", "320")
        .output()
        .unwrap();
    assert_eq!(json(&o)["precision_bits"], 192);
    let o = Command::new(env!("CARGO_BIN_EXE_mop")).args(["solve", "--n1", "2", "--n2", "1"]).env("MOP_PRECISION_BITS", "320").output().unwrap();
    assert_eq!(json(&o)["precision_bits"], 320);
}

#[test]
fn integer_alpha_difference_is_an_error() {
    let o = mop(&["solve", "--n1", "2", "--n2", "2", "--alpha1", "0.5", "--alpha2", "1.5"]);
    assert!(!o.status.success());
}

#[test]
fn curve_check_reports_the_preset() {
    let v = json(&mop(&["curve", "check"]));
    assert!((v["edges"][0]["at"].as_f64().unwrap() - 3.5650323971803).abs() < 1e-9);
    assert!((v["density_mass"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["sign_chart"]["pass"], true);
}

#[test]
fn outer_jumps_are_tiny() {
    let v = json(&mop(&["outer", "jumps"]));
    assert!(v["jumps"]["max_residual"].as_f64().unwrap() < 1e-20);
}

#[test]
fn local_match_over_a_sweep() {
    let v = json(&mop(&["local", "match", "--n-sweep", "8,16"]));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let u0 = |k: usize| rows[k]["matching_sup"]["U0"].as_f64().unwrap();
    assert!(u0(1) < 0.6 * u0(0));
}

#[test]
fn error_solve_writes_the_jump_dump() {
    let dir = scratch("err");
    let v = json(&mop(&["error", "solve", "--n", "8", "--out-dir", dir.to_str().unwrap()]));
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["probes"].as_array().unwrap().len(), 6);
    assert!(dir.join("jumps-8.json").exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn verify_with_a_config_file() {
    let dir = scratch("cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("exp.toml");
    std::fs::write(&cfg, format!("n_sweep = [8, 16, 32]\nout_dir = \"{}\"\n", dir.join("out").display())).unwrap();
    let o = mop(&["verify", "edges", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = std::fs::read_to_string(dir.join("out/edge-hard.csv")).unwrap();
    assert!(text.starts_with("experiment,n,probe,error,fit_p,fit_C,pass\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 3);
    assert!(dir.join("out/edge-soft.csv").exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn verify_output_is_deterministic() {
    let dir = scratch("det");
    let run = |sub: &str| {
        let out = dir.join(sub);
        let o = mop(&["verify", "outer", "--n-sweep", "8,16", "--out-dir", out.to_str().unwrap()]);
        assert!(o.status.code().is_some());
        std::fs::read(out.join("outer.json")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn failed_checks_give_a_nonzero_exit() {
    let dir = scratch("fail");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("strict.toml");
    std::fs::write(&cfg, format!("n_sweep = [8, 16]\nout_dir = \"{}\"\n[tolerances]\nouter_p = [1.5, 2.0]\n", dir.display())).unwrap();
    let o = mop(&["verify", "outer", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("outer FAIL"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bad_config_is_rejected() {
    let dir = scratch("bad");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "[probes]\nouter = [[0.1, 0.1]]\n").unwrap();
    let o = mop(&["verify", "outer", "--config", cfg.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("outer probe"));
    std::fs::remove_dir_all(dir).unwrap();
}
