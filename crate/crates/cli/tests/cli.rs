use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn modkernel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modkernel"))
        .args(args)
        .env_remove("MODKERNEL_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn haupt_level_one_is_j_minus_744() {
    let out = modkernel(&["haupt", "--level", "1", "--prec", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let coeffs: Vec<(i64, i64)> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| (row["r"].as_i64().unwrap(), row["a"].as_i64().unwrap()))
        .collect();
    assert_eq!(coeffs, [(-1, 1), (0, 0), (1, 196884), (2, 21493760), (3, 864299970)]);
}

#[test]
fn haupt_csv_and_text() {
    let out = modkernel(&["--format", "csv", "haupt", "--level", "2", "--prec", "3"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "r,a\n-1,1\n0,0\n1,276\n2,-2048\n");
    let out = modkernel(&["haupt", "--level", "3", "--prec", "2", "--format", "text"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("   1  54\n"));
}

#[test]
fn unsupported_level_lists_the_table() {
    let out = modkernel(&["haupt", "--level", "11"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.starts_with("error:"), "{msg}");
    assert!(msg.contains("11") && msg.contains("25"), "{msg}");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(modkernel(&["haupt", "--bogus"]).status.code(), Some(2));
    assert_eq!(modkernel(&["haupt", "--prec", "0"]).status.code(), Some(2));
    assert_eq!(modkernel(&["--threads", "0", "haupt"]).status.code(), Some(2));
    assert_eq!(modkernel(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(modkernel(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_reports_pass_with_stable_shape() {
    let out = modkernel(&["verify-borcherds", "--level", "1", "--box", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let compact: String = String::from_utf8(out.stdout).unwrap().split_whitespace().collect();
    assert_eq!(
        compact,
        r#"{"level":1,"box":[2,2],"pass":true,"checked":16,"max_discrepancy":"0","mismatches":[],"elapsed_ms":null,"exponent_source":"theorem"}"#
    );
}

#[test]
fn verify_mismatch_exits_one() {
    let out = modkernel(&["verify-borcherds", "--level", "1", "--box", "3", "--perturb", "1,1,1"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["pass"], false);
    assert!(!v["mismatches"].as_array().unwrap().is_empty());
}

#[test]
fn verify_several_levels_and_exponent_sources() {
    let out = modkernel(&["verify-borcherds", "--level", "1,7,13", "--box", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let levels: Vec<u64> = v.as_array().unwrap().iter().map(|r| r["level"].as_u64().unwrap()).collect();
    assert_eq!(levels, [1, 7, 13]);

    let theorem = modkernel(&["verify-borcherds", "--level", "2", "--box", "3"]);
    assert_eq!(theorem.status.code(), Some(1));
    let replicable = modkernel(&["verify-borcherds", "--level", "2", "--box", "3", "--exponents", "replicable"]);
    assert_eq!(replicable.status.code(), Some(0));
    assert_eq!(json(&replicable)["exponent_source"], "replicable");
}

#[test]
fn timing_fills_elapsed_ms() {
    let out = modkernel(&["--timing", "verify-borcherds", "--level", "1", "--box", "2"]);
    assert!(json(&out)["elapsed_ms"].is_u64());
}

#[test]
fn kloosterman_golden_value() {
    let out = modkernel(&["kloosterman", "1", "1", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    // units 2 and 3 pair with their inverses to 5 ≡ 0; 1 and 4 pair to ±2
    let want = 2.0 + 2.0 * (4.0 * std::f64::consts::PI / 5.0).cos();
    assert!((v["value"].as_f64().unwrap() - want).abs() < 1e-14);
    assert_eq!(v["term_count"], 4);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"value\": 3.8196601125010532e-1"), "{text}");
}

#[test]
fn kloosterman_rejects_zero_modulus() {
    assert_eq!(modkernel(&["kloosterman", "1", "1", "0"]).status.code(), Some(2));
}

#[test]
fn cache_is_written_read_and_survives_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let fresh = modkernel(&["--cache-dir", d, "kloosterman", "-3", "7", "20"]);
    assert_eq!(fresh.status.code(), Some(0));
    let path = dir.path().join("kloosterman-v1.txt");
    let cached = fs::read_to_string(&path).unwrap();
    assert!(cached.starts_with("KLOOSTERMAN-CACHE v1\n"));

    let again = modkernel(&["--cache-dir", d, "kloosterman", "-3", "7", "20"]);
    assert_eq!(again.stdout, fresh.stdout);
    assert!(again.stderr.is_empty());

    // a hit is served from the file, not recomputed
    let value_line = cached.lines().nth(1).unwrap();
    let planted = value_line.rsplit_once(' ').unwrap().0.to_string() + " 1.25e0\n";
    fs::write(&path, format!("KLOOSTERMAN-CACHE v1\n{planted}")).unwrap();
    let hit = modkernel(&["--cache-dir", d, "kloosterman", "-3", "7", "20"]);
    assert_eq!(json(&hit)["value"].as_f64(), Some(1.25));

    fs::write(&path, "KLOOSTERMAN-CACHE v9\n1 2 3 4\n").unwrap();
    let recovered = modkernel(&["--cache-dir", d, "kloosterman", "-3", "7", "20"]);
    assert_eq!(recovered.status.code(), Some(0));
    assert_eq!(recovered.stdout, fresh.stdout);
    assert!(stderr(&recovered).contains("warning: ignoring Kloosterman cache"), "{}", stderr(&recovered));
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_modkernel"))
        .args(["kloosterman", "2", "3", "11"])
        .env("MODKERNEL_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("kloosterman-v1.txt").exists());
}

#[test]
fn selberg_passes_and_reports_tolerance() {
    let out = modkernel(&["selberg", "--r", "6", "--rprime", "4", "--c", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert!(v["difference"].as_f64().unwrap() <= v["tolerance"].as_f64().unwrap());
    let strict = modkernel(&["selberg", "--r", "6", "--rprime", "4", "--c", "12", "--tol", "-1"]);
    assert_eq!(strict.status.code(), Some(2));
}

#[test]
fn eisenstein_exact_and_numeric() {
    let out = modkernel(&["eisenstein", "--level", "1", "--r", "1", "--exact"]);
    let v = json(&out);
    assert_eq!(v["value"], -24);
    assert_eq!(v["nonholo_coefficient"], -3);
    let out = modkernel(&["eisenstein", "--level", "2", "--r", "3", "--cmax", "400"]);
    let v = json(&out);
    let exact = json(&modkernel(&["eisenstein", "--level", "2", "--r", "3", "--exact"]))["value"].as_f64().unwrap();
    assert!((v["value"].as_f64().unwrap() - exact).abs() <= v["tail_bound"].as_f64().unwrap());
    assert_eq!(modkernel(&["eisenstein", "--level", "4", "--r", "1", "--cmax", "3"]).status.code(), Some(2));
}

#[test]
fn poincare_reports_value_and_bounds() {
    let out = modkernel(&["poincare", "--level", "1", "--rprime", "1", "--r", "1", "--cmax", "500"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let value = v["value"].as_f64().unwrap();
    assert!((value + 196884.0).abs() < 1e-2 * 196884.0, "{value}");
    assert!(v["tail_bound"].as_f64().unwrap() > 0.0);
    assert!(v["rounding_bound"].as_f64().unwrap() > 0.0);
    assert_eq!(v["elapsed_ms"], Value::Null);
    assert_eq!(modkernel(&["poincare", "--rprime", "0", "--r", "1"]).status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    for args in [
        &["poincare", "--level", "2", "--rprime", "-1", "--r", "2", "--cmax", "3000"][..],
        &["verify-borcherds", "--level", "1,2,7", "--box", "4", "--exponents", "replicable"][..],
    ] {
        let one = modkernel(&[&["--threads", "1"][..], args].concat());
        let many = modkernel(&[&["--threads", "8"][..], args].concat());
        assert!(!one.stdout.is_empty());
        assert_eq!(one.stdout, many.stdout, "{args:?}");
    }
}

#[test]
fn hecke_on_the_fixture() {
    let out = modkernel(&["hecke-apply", "--m", "2", "--prec", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "n,before,after\n0,0,0\n1,1,-2\n2,-2,4\n3,-1,2\n4,2,-4\n5,1,-2\n"
    );
}

#[test]
fn hecke_on_an_input_series() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    // E_4 = 1 + 240q + 2160q^2 + 6720q^3 + ..., an eigenform of every T(m)
    let e4 = r#"{"valuation":0,"precision":9,"coefficients":["1","240","2160","6720","17520","30240","60480","82560","140400"]}"#;
    fs::write(&path, e4).unwrap();
    let out = modkernel(&[
        "--format", "json", "hecke-apply", "--m", "2", "--prec", "4", "--weight", "4", "--level", "1",
        "--input", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    let after: Vec<i64> = v["coefficients"].as_array().unwrap().iter().map(|r| r["after"].as_i64().unwrap()).collect();
    // eigenvalue σ_3(2) = 9
    assert_eq!(after, [9, 2160, 19440, 60480]);

    fs::write(&path, "{not json").unwrap();
    let bad = modkernel(&["hecke-apply", "--m", "2", "--weight", "4", "--input", path.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn hecke_precision_shortfall_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    fs::write(&path, r#"{"valuation":1,"precision":3,"coefficients":["1","-2"]}"#).unwrap();
    let out = modkernel(&["hecke-apply", "--m", "5", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("precision"), "{}", stderr(&out));
}
