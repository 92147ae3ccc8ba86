use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SUBCOMMANDS: [&str; 13] = [
    "cf",
    "lnz",
    "density",
    "mellin",
    "sample",
    "stability-check",
    "attraction",
    "norm-constants",
    "indexes",
    "phi-grid",
    "ising",
    "b-of-t",
    "spectrum",
];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabmech"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn error_kind(o: &Output) -> String {
    let v: Value = serde_json::from_slice(&o.stderr).expect("JSON error payload");
    v["error"].as_str().unwrap().to_string()
}

#[test]
fn help_lists_formula_for_every_subcommand() {
    for sc in SUBCOMMANDS {
        let o = run(&[sc, "--help"]);
        assert!(o.status.success(), "{sc}");
        let text = stdout(&o);
        assert!(text.contains("Formula:"), "{sc} help lacks its formula");
    }
}

#[test]
fn gaussian_density_at_zero() {
    let o = run(&["density", "--alpha", "2", "--x", "0"]);
    assert!(o.status.success());
    let rows = csv_rows(&o);
    assert_eq!(rows[0], ["x", "density"]);
    let v: f64 = rows[1][1].parse().unwrap();
    assert!((v - 0.28209).abs() < 1e-5);
    assert!((v - 0.5 / std::f64::consts::PI.sqrt()).abs() < 1e-10);
}

#[test]
fn provenance_header_on_csv() {
    let o = run(&["--seed", "11", "mellin", "--alpha", "1", "--rho", "0.5", "--s-re", "1"]);
    let first = stdout(&o).lines().next().unwrap().to_string();
    assert!(first.starts_with("# stabmech "));
    assert!(first.contains("seed=11"));
    assert!(first.contains("config="));
    assert_eq!(csv_rows(&o)[0], ["s_re", "s_im", "M_re", "M_im"]);
    assert_eq!(csv_rows(&o)[1][2], "0.5");
}

#[test]
fn classical_indexes_are_exact() {
    let o = run(&["indexes", "--alpha1", "2", "--alpha2", "4/3", "--dim", "inf"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let idx = &v["indexes"];
    for (k, want) in [("alpha", "0"), ("beta", "1/2"), ("gamma", "1"), ("epsilon", "0"), ("delta", "3"), ("zeta", "-inf")] {
        assert_eq!(idx[k]["value"], want, "{k}");
    }
    assert_eq!(v["exact"], true);
    assert_eq!(v["provenance"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn experimental_preset_is_flagged_inexact() {
    let o = run(&["indexes", "--preset", "experimental"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["exact"], false);
    let ising = run(&["indexes", "--preset", "ising"]);
    let v: Value = serde_json::from_slice(&ising.stdout).unwrap();
    assert_eq!(v["indexes"]["beta"]["value"], "1/8");
    assert_eq!(v["indexes"]["delta"]["value"], "15");
}

#[test]
fn stability_check_example() {
    let o = run(&["stability-check", "--alpha", "1.5", "--beta", "0", "--n", "5", "--N", "100000", "--seed", "7"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &v["report"];
    assert!(r["ks"].as_f64().unwrap() < r["critical"].as_f64().unwrap());
    assert_eq!(v["passes"], true);
    assert_eq!(v["transition"]["class"], "second-order");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["density", "--bogus"],
        vec!["no-such-command"],
        vec!["indexes", "--alpha1", "x/y", "--alpha2", "4/3", "--dim", "3"],
        vec!["density", "--alpha", "1.5"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(error_kind(&o), "UsageError");
    }
}

#[test]
fn numerical_errors_exit_1_with_kind() {
    let cases: [(&[&str], &str); 4] = [
        (&["density", "--alpha", "3", "--x", "0"], "AlphaOutOfRange"),
        (&["indexes", "--alpha1", "2", "--alpha2", "1", "--dim", "3"], "DeltaPole"),
        (&["b-of-t", "--shape", "scalar", "--alpha", "1", "--t", "-1"], "NonPositiveT"),
        (&["mellin", "--alpha", "1", "--rho", "1.5", "--s-re", "1"], "InvalidSpec"),
    ];
    for (args, kind) in cases {
        let o = run(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert_eq!(error_kind(&o), kind);
    }
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.bin");
    let b = dir.path().join("b.bin");
    for p in [&a, &b] {
        let o = run(&["--seed", "5", "sample", "--alpha", "0.8", "--beta", "0.3", "--count", "70000", "--format", "bin", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let (ba, bb) = (read(&a), read(&b));
    assert_eq!(ba, bb);
    assert_eq!(ba.len(), 8 + 8 * 70000);
    assert_eq!(u64::from_le_bytes(ba[..8].try_into().unwrap()), 70000);
    let other = dir.path().join("c.bin");
    run(&["--seed", "6", "sample", "--alpha", "0.8", "--beta", "0.3", "--count", "70000", "--format", "bin", "--out", other.to_str().unwrap()]);
    assert_ne!(read(&other), ba);

    let grid = |name: &str| {
        let p = dir.path().join(name);
        let o = run(&["phi-grid", "--preset", "d3-rational", "--f-minus", "-1", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
        read(&p)
    };
    assert_eq!(grid("g1.csv"), grid("g2.csv"));
}

#[test]
fn atomic_output_leaves_only_targets() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.bin");
    run(&["sample", "--alpha", "1.2", "--count", "10", "--format", "bin", "--out", p.to_str().unwrap()]);
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["s.bin", "s.bin.provenance.json"]);
}

#[test]
fn sample_files_feed_stability_check() {
    let dir = tempfile::tempdir().unwrap();
    for (fmt, name) in [("bin", "s.bin"), ("text", "s.txt")] {
        let p = dir.path().join(name);
        run(&["--seed", "2", "sample", "--alpha", "1.5", "--count", "30000", "--format", fmt, "--out", p.to_str().unwrap()]);
        let o = run(&["stability-check", "--alpha", "1.5", "--n", "2", "--N", "10000", "--input", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["report"]["sample_size"], 10000);
        assert_eq!(v["passes"], true);
    }
}

#[test]
fn binary_and_text_samples_agree() {
    let dir = tempfile::tempdir().unwrap();
    let pb = dir.path().join("s.bin");
    let pt = dir.path().join("s.txt");
    run(&["sample", "--alpha", "0.7", "--count", "100", "--format", "bin", "--out", pb.to_str().unwrap()]);
    run(&["sample", "--alpha", "0.7", "--count", "100", "--format", "text", "--out", pt.to_str().unwrap()]);
    let bytes = read(&pb);
    let from_bin: Vec<f64> = bytes[8..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let text = String::from_utf8(read(&pt)).unwrap();
    let from_text: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(from_bin, from_text);
}

#[test]
fn b_of_t_quadrature_columns_agree() {
    let o = run(&["b-of-t", "--shape", "lower-triangular", "--alpha", "1", "--beta", "0.4", "--d", "1,-2", "--t", "0.5,3,7", "--quadrature"]);
    assert!(o.status.success());
    let rows = csv_rows(&o);
    assert_eq!(rows[0], ["t", "b1", "b2", "b1_quad", "b2_quad"]);
    for r in &rows[1..] {
        let v: Vec<f64> = r.iter().map(|s| s.parse().unwrap()).collect();
        assert!((v[1] - v[3]).abs() < 1e-9 * (1.0 + v[1].abs()));
        assert!((v[2] - v[4]).abs() < 1e-9 * (1.0 + v[2].abs()));
    }
}

#[test]
fn law_file_and_triple_file() {
    let dir = tempfile::tempdir().unwrap();
    let law = dir.path().join("law.json");
    std::fs::write(&law, r#"{"alpha":1.5,"c1":1.0,"c2":0.0,"a":0.5}"#).unwrap();
    let triple = dir.path().join("triple.json");
    std::fs::write(
        &triple,
        r#"{"a":[0.5],"R":[[0.0]],"M":{"kind":"stable","c1":1.0,"c2":0.0,"alpha":1.5}}"#,
    )
    .unwrap();
    let a = run(&["cf", "--law", law.to_str().unwrap(), "--y", "0.7"]);
    let b = run(&["cf", "--triple", triple.to_str().unwrap(), "--y", "0.7"]);
    assert!(a.status.success() && b.status.success());
    let ra: Vec<f64> = csv_rows(&a)[1].iter().map(|s| s.parse().unwrap()).collect();
    let rb: Vec<f64> = csv_rows(&b)[1].iter().map(|s| s.parse().unwrap()).collect();
    // the triple's location differs from the closed form's by the induced shift
    assert!((ra[1] - rb[1]).abs() < 1e-6, "{ra:?} {rb:?}");
}

#[test]
fn spectrum_rejects_small_eigenvalues() {
    let o = run(&["spectrum", "--matrix", "0.4,0,0,1"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valid"], false);
    assert!(v["moment_cutoff"].is_null());
}
