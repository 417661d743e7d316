use hgm_cli::cache::Cache;
use hgm_cli::{parse_primes, run};
use serde_json::{json, Value};
use std::process::Command;

fn hgm(args: &[&str]) -> hgm_cli::Output {
    let mut v = vec!["hgm"];
    v.extend_from_slice(args);
    run(v)
}

fn json_of(out: &hgm_cli::Output) -> Value {
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    serde_json::from_str(&out.stdout).expect("json on stdout")
}

fn row_primes(v: &Value) -> Vec<u64> {
    v["rows"].as_array().unwrap().iter().map(|r| r["q"].as_u64().unwrap()).collect()
}

#[test]
fn prime_grammar() {
    assert_eq!(parse_primes("5..30").unwrap(), vec![5, 7, 11, 13, 17, 19, 23, 29]);
    assert_eq!(parse_primes("13, 11,13").unwrap(), vec![11, 13]);
    assert!(parse_primes("9").is_err());
    assert!(parse_primes("30..5").is_err());
    assert!(parse_primes("24..28").is_err());
}

// Every odd prime is ≡ 1 mod 2 and t = 2 is bad only at 2, so all of 5..29 remain.
#[test]
fn trace_rows_n2() {
    let v = json_of(&hgm(&["trace", "--params", "1/2,1/2;1,1", "--t", "2", "--primes", "5..30"]));
    assert_eq!(row_primes(&v), vec![5, 7, 11, 13, 17, 19, 23, 29]);
    assert_eq!(v["params"], json!({"top": ["1/2", "1/2"], "bottom": ["1", "1"]}));
    assert!(v.get("skipped").is_none());
    // H_5 = a_5 of y² = x(x+1)(x+2).
    assert_eq!(v["rows"][0]["H"]["coeffs"], json!([-2]));
}

#[test]
fn trace_split_filter_and_skips() {
    let v = json_of(&hgm(&["trace", "--params", "1/3,2/3;1,1", "--t", "2", "--primes", "5..40", "--explain-skips"]));
    assert_eq!(row_primes(&v), vec![7, 13, 19, 31, 37]);
    let skipped: Vec<u64> = v["skipped"].as_array().unwrap().iter().map(|s| s["q"].as_u64().unwrap()).collect();
    assert_eq!(skipped, vec![5, 11, 17, 23, 29]);
}

#[test]
fn field_example() {
    let v = json_of(&hgm(&["field", "--params", "1/7,6/7;1,1"]));
    assert_eq!(v, json!({"N": 7, "H": [1, 6], "degree": 3, "totally_real": true}));
}

#[test]
fn verify_rational_exit_zero() {
    let out = hgm(&["verify-rational", "--family", "legendre", "--t", "2", "--primes", "5..199"]);
    let v = json_of(&out);
    assert_eq!(v["all_equal"], json!(true));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["trace", "--params", "1/2,1/2", "--t", "2", "--primes", "5..30"],
        vec!["trace", "--params", "1/2,1/2;1,1", "--t", "1", "--primes", "5..30"],
        vec!["trace", "--params", "1/2,1/2;1,1", "--t", "0", "--primes", "5..30"],
        vec!["trace", "--params", "1/7,6/7;1,1", "--t", "2", "--primes", "5..20"],
        vec!["frobnicate"],
        vec!["congruence", "--left", "1/2,1/2;1,1", "--right", "1/3,2/3;1,1", "--mod", "5", "--t", "2", "--primes", "5..50"],
        vec!["eliminate", "--instance", "1,1,2,5,5", "--params", "1/10,-1/10;1/5,-1/5", "--curve", "0,0,1,-1,0", "--ells", "13"],
    ] {
        let out = hgm(&args);
        assert_eq!(out.code, 1, "{:?}", args);
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(hgm(&["--help"]).code, 0);
    assert_eq!(hgm(&["--version"]).code, 0);
}

// Parameters that are not self-conjugate break the ω-eigenspace identity.
#[test]
fn mismatch_exits_two() {
    let out = hgm(&["verify-euler", "--params", "1/3,1/2;1,1", "--t", "2", "--primes", "11..101"]);
    assert_eq!(out.code, 2, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["all_equal"], json!(false));
    let out = hgm(&["hyperell", "--N", "4", "--t", "2", "--primes", "5..100", "--even"]);
    assert_eq!(out.code, 2);
}

#[test]
fn each_subcommand_succeeds() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["monodromy", "--params", "1/3,2/3;1,1"],
        vec!["s3", "--case", "12", "--params", "1/3,2/3;1,1", "--t", "2", "--primes", "5..60"],
        vec!["congruence", "--left", "1/10,-1/10;1/5,-1/5", "--right", "1/2,1/2;1,1", "--mod", "5", "--t", "2", "--primes", "11..200"],
        vec!["congruence", "--left", "1/5,2/5;3/5,4/5", "--eisenstein", "--mod", "5", "--t", "2", "--primes", "11..200"],
        vec!["conductor2", "--t", "-3/4"],
        vec!["hyperell", "--N", "5", "--t", "2", "--primes", "5..60"],
        vec!["hyperell", "--N", "10", "--t", "2", "--primes", "5..100", "--even"],
        vec!["verify-euler", "--params", "1/3,2/3;1,1", "--t", "1/3", "--primes", "5..60"],
    ];
    for args in cases {
        let out = hgm(&args);
        assert_eq!(out.code, 0, "{:?}: {}", args, out.stderr);
        let _: Value = serde_json::from_str(&out.stdout).unwrap();
    }
}

#[test]
fn eliminate_with_form_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = ["--instance", "1,1,2,5,5", "--params", "1/10,-1/10;1/5,-1/5"];
    let mut args = vec!["eliminate"];
    args.extend(inst);
    args.extend(["--curve", "0,0,1,-1,0", "--ells", "11,31,41"]);
    let a = hgm(&args);
    let v = json_of(&a);
    assert_eq!(v["aggregate"]["survives"], json!(false));
    let form = dir.path().join("f.json");
    std::fs::write(&form, r#"{"level": 20, "coefficients": [{"ell": 11, "a": {"level": 20, "coeffs": [1, 0, 0, 0, 0, 0, 0, 0]}}]}"#).unwrap();
    let mut args = vec!["eliminate"];
    args.extend(inst);
    let fp = form.to_str().unwrap();
    args.extend(["--form", fp, "--ells", "11"]);
    let out = hgm(&args);
    assert_eq!(out.code, 0, "{}", out.stderr);
    std::fs::write(&form, "{ \"level\": 20, ").unwrap();
    let out = hgm(&args);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("line"), "{}", out.stderr);
}

#[test]
fn csv_is_flat_projection_of_rows() {
    let base = ["trace", "--params", "1/2,1/2;1,1", "--t", "2", "--primes", "5..30"];
    let v = json_of(&hgm(&base));
    let mut args = base.to_vec();
    args.extend(["--format", "csv"]);
    let out = hgm(&args);
    assert_eq!(out.code, 0);
    let mut rd = csv::Reader::from_reader(out.stdout.as_bytes());
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, vec!["H", "T", "q", "weil_ok"]);
    let recs: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(recs.len(), v["rows"].as_array().unwrap().len());
    for (rec, row) in recs.iter().zip(v["rows"].as_array().unwrap()) {
        assert_eq!(rec[2], row["q"].to_string());
        let h: Value = serde_json::from_str(&rec[0]).unwrap();
        assert_eq!(h, row["H"]);
    }
    let out = hgm(&["field", "--params", "1/7,6/7;1,1", "--format", "csv"]);
    assert_eq!(out.stdout, "H,N,degree,totally_real\n\"[1,6]\",7,3,true\n");
}

#[test]
fn output_is_deterministic_across_jobs() {
    let base = ["s3", "--case", "23", "--params", "1/5,2/5;1,1", "--t", "3", "--primes", "5..150"];
    let reference = hgm(&base);
    for jobs in ["1", "3", "8"] {
        let mut args = base.to_vec();
        args.extend(["--jobs", jobs]);
        let out = hgm(&args);
        assert_eq!(out.stdout, reference.stdout);
        assert_eq!(out.code, reference.code);
    }
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("o.json");
    let out = hgm(&["field", "--params", "1/7,6/7;1,1", "--output", path.to_str().unwrap()]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["N"], json!(7));
}

#[test]
fn cache_hits_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let base = ["trace", "--params", "1/5,-1/5;1,1", "--t", "1/3", "--primes", "5..120", "--explain-skips"];
    let fresh = hgm(&base);
    let mut args = base.to_vec();
    args.extend(["--cache-dir", d]);
    let cold = hgm(&args);
    let warm = hgm(&args);
    assert_eq!(fresh.stdout, cold.stdout);
    assert_eq!(cold.stdout, warm.stdout);
    let files = walk(dir.path());
    assert_eq!(files.len(), parse_primes("5..120").unwrap().len());
    // Corrupt every entry; the next run recomputes, warns and repairs.
    for f in &files {
        std::fs::write(f, "{not json").unwrap();
    }
    let repaired = hgm(&args);
    assert_eq!(repaired.stdout, fresh.stdout);
    assert!(repaired.code == 0);
    for f in &files {
        let _: Value = serde_json::from_slice(&std::fs::read(f).unwrap()).unwrap();
    }
}

fn walk(p: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = vec![];
    for e in std::fs::read_dir(p).unwrap() {
        let e = e.unwrap().path();
        if e.is_dir() {
            out.extend(walk(&e));
        } else {
            out.push(e);
        }
    }
    out.sort();
    out
}

#[test]
fn cache_roundtrip_and_cold_miss() {
    let dir = tempfile::tempdir().unwrap();
    let c = Cache::new(dir.path());
    let k = Cache::key(&["trace", "1/2,1/2;1,1", "2", "5"]);
    assert_ne!(k, Cache::key(&["trace", "1/2,1/2;1,1", "25"]));
    assert!(c.get(&k).is_none());
    let v = json!({"q": 5, "H": {"level": 2, "coeffs": [-2]}});
    c.put(&k, &v).unwrap();
    assert_eq!(c.get(&k), Some(v.clone()));
    std::fs::write(c.path(&k), b"\x00garbage").unwrap();
    assert!(c.get(&k).is_none());
    assert_eq!(c.warnings().len(), 1);
    let got: Result<Value, ()> = c.get_or_compute(&["trace", "1/2,1/2;1,1", "2", "5"], || Ok(v.clone()));
    assert_eq!(got.unwrap(), v);
    assert_eq!(c.get(&k), Some(v));
}

#[test]
fn concurrent_writers_converge() {
    let dir = tempfile::tempdir().unwrap();
    let k = Cache::key(&["stress"]);
    let payload = json!({"rows": (0..2000).collect::<Vec<u32>>()});
    std::thread::scope(|s| {
        for _ in 0..8 {
            let d = dir.path().to_path_buf();
            let (k, p) = (k.clone(), payload.clone());
            s.spawn(move || {
                let c = Cache::new(d);
                for _ in 0..20 {
                    c.put(&k, &p).unwrap();
                    if let Some(v) = c.get(&k) {
                        assert_eq!(v, p);
                    }
                }
            });
        }
    });
    let files = walk(dir.path());
    assert_eq!(files.len(), 1, "{:?}", files);
    assert_eq!(Cache::new(dir.path()).get(&k), Some(payload));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_hgm");
    let st = Command::new(bin).args(["field", "--params", "1/7,6/7;1,1"]).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    let st = Command::new(bin).args(["field", "--params", "nope"]).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let st = Command::new(bin)
        .env("HGM_CACHE_DIR", dir.path())
        .args(["trace", "--params", "1/2,1/2;1,1", "--t", "2", "--primes", "5..13"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    assert_eq!(walk(dir.path()).len(), 4);
}
