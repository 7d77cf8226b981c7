use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn erw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_erw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = erw(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV document (metadata and header dropped).
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn meta<'a>(csv: &'a str, key: &str) -> Option<&'a str> {
    let prefix = format!("# {key}=");
    csv.lines().find_map(|l| l.strip_prefix(prefix.as_str()))
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("erw-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn coeffs_tables() {
    let fair = stdout(&["coeffs", "--p", "0.5", "--n", "3"]);
    let r = rows(&fair);
    assert_eq!(r.len(), 3);
    assert!(r.iter().all(|row| num(&row[2]) == 1.0));
    assert_eq!(num(&r[2][3]), 3.0);

    let crit = stdout(&["coeffs", "--p", "0.75", "--n", "3"]);
    assert!((num(&rows(&crit)[2][3]) - 1.7288889).abs() < 1e-7);
    assert_eq!(meta(&crit, "schema"), Some("1"));
    assert_eq!(meta(&crit, "cap"), Some("1000000"));
}

#[test]
fn validation_errors_exit_2() {
    let out = erw(&["coeffs", "--p", "1.5", "--n", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("[0, 1]"), "{err}");

    // Seed is mandatory for simulations.
    let out = erw(&["simulate", "--p", "0.3", "--n", "10", "--reps", "5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = erw(&[
        "diag", "ratio", "--p", "0.3", "--n", "50", "--x-grid", "0:1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exact_small_laws() {
    let two = rows(&stdout(&["exact", "--p", "0.75", "--q", "0.5", "--n", "2"]));
    let pmf: Vec<(i64, f64)> = two
        .iter()
        .map(|r| (r[0].parse().unwrap(), num(&r[1])))
        .collect();
    assert_eq!(pmf, vec![(-2, 0.375), (0, 0.25), (2, 0.375)]);

    let one = rows(&stdout(&["exact", "--p", "0.6", "--q", "0.5", "--n", "1"]));
    assert_eq!(one.len(), 2);
    assert_eq!((num(&one[0][1]), num(&one[1][1])), (0.5, 0.5));

    let m = stdout(&["exact", "--p", "0.75", "--n", "2", "--moments"]);
    assert_eq!(meta(&m, "result.variance"), Some("3.0"));
}

#[test]
fn exact_over_cap_is_resource_error() {
    let out = erw(&["exact", "--p", "0.6", "--n", "100000"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate", "--p", "1", "--q", "1", "--n", "50", "--reps", "10", "--seed", "1",
    ];
    let a = stdout(&args);
    assert_eq!(rows(&a), vec![vec!["50".to_string(), "10".to_string()]]);
    assert_eq!(meta(&a, "sampler"), Some("markov"));
    assert_eq!(a, stdout(&args));
}

#[test]
fn simulate_matches_exact_law() {
    let common = ["--p", "0.75", "--q", "0.5", "--n", "1000"];
    let ex = stdout(&[&["exact"][..], &common].concat());
    let sim = stdout(
        &[
            &["simulate"][..],
            &common,
            &["--reps", "100000", "--seed", "7"],
        ]
        .concat(),
    );
    let counts: Vec<(i64, f64)> = rows(&sim)
        .iter()
        .map(|r| (r[0].parse().unwrap(), num(&r[1]) / 1e5))
        .collect();
    let mut sup = 0.0f64;
    let mut emp = 0.0;
    let mut it = counts.iter().peekable();
    for r in rows(&ex) {
        let k: i64 = r[0].parse().unwrap();
        while let Some(&&(s, c)) = it.peek() {
            if s > k {
                break;
            }
            emp += c;
            it.next();
        }
        sup = sup.max((emp - num(&r[2])).abs());
    }
    assert!(sup <= 0.0062, "sup distance {sup}");
}

#[test]
fn emit_path_writes_replicate_zero() {
    let file = scratch("path.csv");
    let f = file.to_str().unwrap();
    stdout(&[
        "simulate",
        "--p",
        "0.4",
        "--n",
        "20",
        "--reps",
        "3",
        "--seed",
        "9",
        "--emit-path",
        f,
    ]);
    let text = std::fs::read_to_string(&file).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,X_k,S_k");
    assert_eq!(lines.len(), 21);
    assert!(lines[1].starts_with("1,"));
}

#[test]
fn ratio_curve_from_exact_law() {
    let out = stdout(&[
        "diag", "ratio", "--p", "0.2", "--q", "0.5", "--n", "10000", "--x-grid", "0:3:0.1",
        "--source", "exact",
    ]);
    let r = rows(&out);
    assert_eq!(r.len(), 31);
    for row in &r[..11] {
        assert!((num(&row[1]) - 1.0).abs() < 0.05, "{row:?}");
    }
    assert_eq!(meta(&out, "normalization"), Some("martingale"));
}

#[test]
fn ratio_with_nlogn_normalization() {
    let out = stdout(&[
        "diag",
        "ratio",
        "--p",
        "0.75",
        "--n",
        "400",
        "--x-grid",
        "1:1:1",
        "--normalization",
        "nlogn",
    ]);
    assert_eq!(meta(&out, "normalization"), Some("nlogn"));
    // Direct check: P(S_n >= √(n ln n)) / (1 - Φ(1)).
    let ex = stdout(&["exact", "--p", "0.75", "--n", "400"]);
    let threshold = (400f64 * 400f64.ln()).sqrt();
    let tail: f64 = rows(&ex)
        .iter()
        .filter(|r| r[0].parse::<f64>().unwrap() >= threshold)
        .map(|r| num(&r[1]))
        .sum();
    let ratio = num(&rows(&out)[0][1]);
    assert!((ratio - tail / 0.15865525393145707).abs() < 1e-9, "{ratio}");
}

#[test]
fn ratio_from_monte_carlo_needs_seed() {
    let base = [
        "diag", "ratio", "--p", "0.3", "--n", "200", "--x-grid", "0:1:0.5", "--source", "mc",
    ];
    assert_eq!(
        erw(&[&base[..], &["--reps", "100"]].concat()).status.code(),
        Some(2)
    );
    let out = stdout(&[&base[..], &["--reps", "2000", "--seed", "3"]].concat());
    assert_eq!(rows(&out).len(), 3);
    assert_eq!(meta(&out, "seed"), Some("3"));
}

#[test]
fn unsupported_regimes_exit_4() {
    assert_eq!(
        erw(&["diag", "llt", "--p", "0.5", "--n", "100"])
            .status
            .code(),
        Some(4)
    );
    let out = erw(&["diag", "ratio", "--p", "0.8", "--n", "100"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn besseen_llt_and_mdp_reports() {
    let b = stdout(&["diag", "besseen", "--p", "0.25", "--n-grid", "100,400"]);
    assert_eq!(rows(&b).len(), 2);
    assert!(meta(&b, "result.normalized_spread").is_some());

    let l = stdout(&["diag", "llt", "--p", "0.25", "--n", "1000"]);
    let factor = num(meta(&l, "result.lattice_factor").unwrap());
    assert!((factor - 2.0).abs() < 0.01);
    assert_eq!(meta(&l, "k_range"), Some("-44:44"));

    let s = stdout(&["diag", "llt", "--p", "0.25", "--n-grid", "100,1000"]);
    assert_eq!(rows(&s).len(), 2);

    let m = stdout(&["diag", "mdp", "--p", "0.25", "--n-grid", "100,10000"]);
    let v: Vec<f64> = rows(&m).iter().map(|r| num(&r[1])).collect();
    assert!((v[1] + 0.5).abs() < (v[0] + 0.5).abs());
}

#[test]
fn inference_commands() {
    let p = stdout(&[
        "infer", "p-lower", "--n", "10000", "--s", "400", "--kappa", "0.05",
    ]);
    assert!((num(&rows(&p)[0][4]) - 0.6899773).abs() < 1e-7);

    let neg = stdout(&[
        "infer", "p-lower", "--n", "10000", "--s", "-400", "--kappa", "0.05",
    ]);
    assert_eq!(rows(&neg)[0][4], rows(&p)[0][4]);

    let out = erw(&[
        "infer", "p-lower", "--n", "10000", "--s", "0", "--kappa", "0.05",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("undefined"));

    let iv = stdout(&[
        "infer", "position", "--p", "0.25", "--n", "10000", "--kappa", "0.05",
    ]);
    let r = &rows(&iv)[0];
    assert!((num(&r[5]) + 138.59).abs() < 0.01 && (num(&r[6]) - 138.59).abs() < 0.01);

    let cov = stdout(&[
        "infer", "coverage", "--p", "0.25", "--n", "400", "--kappa", "0.1,0.5", "--reps", "4000",
        "--seed", "2", "--exact",
    ]);
    let r = rows(&cov);
    assert_eq!(r.len(), 2);
    for row in &r {
        let (mc, ex) = (num(&row[3]), num(&row[8]));
        let sd = (ex * (1.0 - ex) / 4000.0).sqrt();
        assert!((mc - ex).abs() <= 4.0 * sd, "{row:?}");
    }
}

#[test]
fn json_envelope_echoes_configuration() {
    let out = stdout(&[
        "--format", "json", "simulate", "--p", "0.3", "--n", "30", "--reps", "50", "--seed", "4",
    ]);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["command"], "simulate");
    assert_eq!(doc["config"]["q"], 0.5);
    assert_eq!(doc["config"]["seed"], 4);
    assert_eq!(doc["data"]["summary"]["reps_done"], 50);
}

#[test]
fn config_file_and_out_flag() {
    let conf = scratch("run.conf");
    std::fs::write(&conf, "p = 0.25\nn = 8\nq = 0.3\nmoments = true\n").unwrap();
    let target = scratch("exact.csv");
    stdout(&[
        "exact",
        "--n",
        "4",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&target).unwrap();
    assert_eq!(meta(&text, "n"), Some("4"));
    assert_eq!(meta(&text, "q"), Some("0.3"));
    assert_eq!(meta(&text, "moments"), Some("true"));
    assert_eq!(rows(&text).len(), 5);

    std::fs::write(&conf, "bogus = 1\n").unwrap();
    let out = erw(&[
        "exact",
        "--p",
        "0.3",
        "--n",
        "4",
        "--config",
        conf.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
