use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dp_ecdf::{
    calibrate_null, parse_model, run_private_test, Dataset, MetricKind, NoiseKind, PrivacyBudget, TestKind, TestSpec,
};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dp-ecdf"))
        .args(args)
        .env_remove("DP_ECDF_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(stdout(out).trim()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn sample_text(n: usize, shift: f64) -> String {
    (0..n).map(|i| format!("{}\n", ((i * 37) % 101) as f64 / 25.0 - 2.0 + shift)).collect()
}

fn p(path: &str) -> &Path {
    Path::new(path)
}

#[test]
fn gof_run_is_deterministic_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "x.txt", &format!("value\n# comment\n{}", sample_text(60, 0.3)));
    let args = [
        "test", "gof", "--method", "ks", "--null", "normal:0,1", "--epsilon", "1", "--seed", "5", "--data", &data,
        "--mc-samples", "200",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("seed                 5"));
    assert!(String::from_utf8_lossy(&a.stderr).contains("epsilon"));
}

#[test]
fn seed_can_come_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "x.txt", &sample_text(30, 0.0));
    let out = Command::new(env!("CARGO_BIN_EXE_dp-ecdf"))
        .args(["test", "gof", "--method", "kuiper", "--null", "laplace:0,1", "--epsilon", "2"])
        .args(["--data", &data, "--mc-samples", "50", "--out", "json"])
        .env("DP_ECDF_SEED", "424242")
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"], 424242);
}

#[test]
fn sign_test_reports_raw_count() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "xy.csv", "x,y\n1,0\n2,3\n3,5\n");
    let v = json(&run(&[
        "test", "paired", "--method", "sign", "--epsilon", "1", "--seed", "1", "--data", &data, "--mc-samples", "20",
        "--out", "json",
    ]));
    assert_eq!(v["raw_statistic"], 1.0);
    assert_eq!(v["method"], "sign");
    assert_eq!(v["n"], 3);
    assert!(v["m"].is_null());
}

#[test]
fn two_sample_cvm_is_rejected() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.txt", &sample_text(20, 0.0));
    let out = run(&[
        "test", "two-sample", "--method", "cvm", "--epsilon", "1", "--seed", "1", "--data", &x, "--data2", &x,
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("ks and kuiper"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.txt", &sample_text(20, 0.0));
    let base = ["--epsilon", "1", "--seed", "1", "--data", x.as_str()];
    let cases: Vec<Vec<&str>> = vec![
        vec!["test", "gof", "--method", "ks"],
        vec!["test", "gof", "--method", "ks", "--null", "weibull:1,1"],
        vec!["test", "two-sample", "--method", "sign"],
        vec!["test", "two-sample", "--method", "ks"],
        vec!["test", "paired", "--method", "wilcoxon", "--noise", "tulap"],
        vec!["test", "gof", "--method", "mann-whitney", "--family", "normal"],
        vec!["test", "gof", "--method", "nope", "--null", "normal:0,1"],
    ];
    for case in cases {
        let mut args = case.clone();
        args.extend(base);
        assert_eq!(code(&run(&args)), 2, "{case:?}");
    }
    let eps0 = run(&["test", "gof", "--method", "ks", "--null", "normal:0,1", "--epsilon", "0", "--data", &x]);
    assert_eq!(code(&eps0), 2);
}

#[test]
fn data_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "1\n2\nnan\n");
    let uneven = write(&dir, "uneven.csv", "1,2\n3\n");
    let empty = write(&dir, "empty.txt", "# nothing\n");
    let gof = |d: &str| {
        run(&["test", "gof", "--method", "ks", "--null", "normal:0,1", "--epsilon", "1", "--seed", "1", "--data", d])
    };
    assert_eq!(code(&gof(&bad)), 3);
    assert_eq!(code(&gof(&empty)), 3);
    assert_eq!(code(&gof("/nonexistent/file")), 3);
    let paired = run(&["test", "paired", "--method", "ks", "--epsilon", "1", "--seed", "1", "--data", &uneven]);
    assert_eq!(code(&paired), 3);
}

#[test]
fn calibrate_writes_reproducible_tables() {
    let dir = TempDir::new().unwrap();
    let t1 = dir.path().join("t1.txt");
    let t2 = dir.path().join("t2.txt");
    for t in [&t1, &t2] {
        let out = run(&[
            "calibrate", "two-sample", "--method", "kuiper", "--epsilon", "0.5", "--n", "40", "--m", "25", "--seed",
            "3", "--mc-samples", "1", "--out", t.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = fs::read_to_string(&t1).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("# "));
    assert_eq!(fs::read(&t1).unwrap(), fs::read(&t2).unwrap());

    let missing_m = run(&[
        "calibrate", "two-sample", "--method", "ks", "--epsilon", "1", "--n", "10", "--out", t1.to_str().unwrap(),
    ]);
    assert_eq!(code(&missing_m), 2);
}

#[test]
fn mismatched_table_exits_4() {
    let dir = TempDir::new().unwrap();
    let table = dir.path().join("t.txt");
    let data = write(&dir, "x.txt", &sample_text(30, 0.0));
    let t = table.to_str().unwrap();
    assert_eq!(
        code(&run(&[
            "calibrate", "gof", "--method", "ks", "--null", "normal:0,1", "--epsilon", "1", "--n", "31", "--seed", "1",
            "--mc-samples", "10", "--out", t,
        ])),
        0
    );
    let wrong_n = run(&[
        "test", "gof", "--method", "ks", "--null", "normal:0,1", "--epsilon", "1", "--seed", "1", "--data", &data,
        "--table", t,
    ]);
    assert_eq!(code(&wrong_n), 4);
    let wrong_eps = run(&[
        "test", "gof", "--method", "ks", "--null", "normal:0,1", "--epsilon", "2", "--seed", "1", "--data", &data,
        "--table", t,
    ]);
    assert_eq!(code(&wrong_eps), 4);
    let garbage = write(&dir, "g.txt", "not a table\n");
    let bad = run(&[
        "test", "gof", "--method", "ks", "--null", "normal:0,1", "--epsilon", "1", "--seed", "1", "--data", &data,
        "--table", &garbage,
    ]);
    assert_eq!(code(&bad), 4);
}

#[test]
fn stored_table_matches_in_process_run() {
    let dir = TempDir::new().unwrap();
    let text = sample_text(45, 0.2);
    let data = write(&dir, "x.txt", &text);
    let table = dir.path().join("t.txt");
    let t = table.to_str().unwrap();
    let spec_args = ["--method", "ks", "--null", "normal:0,1", "--epsilon", "0.7", "--seed", "99"];

    let mut cal = vec!["calibrate", "gof", "--n", "45", "--mc-samples", "300", "--out", t];
    cal.extend(spec_args);
    assert_eq!(code(&run(&cal)), 0);

    let mut stored = vec!["test", "gof", "--data", &data, "--table", t, "--out", "json"];
    stored.extend(spec_args);
    let mut fresh = vec!["test", "gof", "--data", &data, "--mc-samples", "300", "--out", "json"];
    fresh.extend(spec_args);
    let a = json(&run(&stored));
    let b = json(&run(&fresh));
    assert_eq!(a, b);

    let x: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
    let spec = TestSpec::new(
        TestKind::GofKnown(parse_model("normal:0,1").unwrap()),
        MetricKind::Ks,
        PrivacyBudget::new(0.7).unwrap(),
        NoiseKind::Tulap,
    )
    .unwrap();
    let nt = calibrate_null(&spec, 45, None, 300, 99).unwrap();
    let r = run_private_test(&spec, &Dataset::one(x).unwrap(), &nt, 99).unwrap();
    assert_eq!(a["p_value"].as_f64().unwrap(), r.p_value);
    assert_eq!(a["privatized_statistic"].as_f64().unwrap(), r.privatized_statistic);
    assert!(p(t).exists());
}

#[test]
fn csv_output_has_a_header() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.txt", &sample_text(25, 0.0));
    let y = write(&dir, "y.txt", &sample_text(30, 1.0));
    let out = run(&[
        "test", "two-sample", "--method", "mann-whitney", "--epsilon", "1", "--seed", "8", "--data", &x, "--data2", &y,
        "--mc-samples", "50", "--out", "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("method,raw_statistic,"));
    assert!(lines.next().unwrap().starts_with("mann-whitney,"));
}

const SMALL_CONFIG: &str = r#"
trials = 20
mc_samples = 50
master_seed = 11
n_grid = [20, 40]
epsilon_grid = [1.0]
builtin = ["ts-location"]

[[scenario]]
name = "custom-paired"
design = "paired"
null = "normal:0,1"
alternative = "laplace:0.5,1"
tests = ["ks", "wilcoxon"]
"#;

#[test]
fn power_csv_is_thread_invariant() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "small.toml", SMALL_CONFIG);
    let one = run(&["power", "--config", &cfg, "--threads", "1"]);
    let two = run(&["power", "--config", &cfg, "--threads", "2"]);
    assert_eq!(code(&one), 0, "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, two.stdout);
    let text = stdout(&one);
    assert_eq!(text.lines().next().unwrap(), "scenario,test,metric,epsilon,n,power,trials,se");
    // ts-location has 5 tests, custom-paired 2, over 2 sample sizes.
    assert_eq!(text.lines().count(), 1 + 7 * 2);

    let file = dir.path().join("power.csv");
    assert_eq!(code(&run(&["power", "--config", &cfg, "--out", file.to_str().unwrap()])), 0);
    assert_eq!(fs::read(&file).unwrap(), one.stdout);
}

#[test]
fn bad_power_configs_exit_2() {
    let dir = TempDir::new().unwrap();
    let unknown_test = write(&dir, "a.toml", &SMALL_CONFIG.replace("\"wilcoxon\"", "\"mann-whitney\""));
    let unknown_key = write(&dir, "b.toml", &format!("colour = 1\n{SMALL_CONFIG}"));
    let unknown_builtin = write(&dir, "c.toml", &SMALL_CONFIG.replace("ts-location", "ts-nothing"));
    for cfg in [&unknown_test, &unknown_key, &unknown_builtin] {
        assert_eq!(code(&run(&["power", "--config", cfg])), 2, "{cfg}");
    }
    assert_eq!(code(&run(&["power", "--config", "/nonexistent.toml"])), 2);
    assert_eq!(code(&run(&["power", "--config", &unknown_key, "--threads", "0"])), 2);
    assert_eq!(code(&run(&["power"])), 2);
}

#[test]
fn lists_builtin_scenarios() {
    let out = run(&["power", "--list-scenarios"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().any(|l| l.starts_with("paired-exp")));
}

#[test]
fn shipped_configs_parse() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(configs).unwrap() {
        let path = entry.unwrap().path();
        dp_ecdf::ExperimentConfig::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn figure_config_emits_every_cell() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/paper_fig1.cfg");
    let config = dp_ecdf::ExperimentConfig::from_file(&cfg).unwrap();
    let out = run(&["power", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let cells: Vec<(String, String, f64, usize)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string(), f[3].parse().unwrap(), f[4].parse().unwrap())
        })
        .collect();
    for s in &config.scenarios {
        for t in &s.tests {
            for &e in &config.epsilon_grid {
                for &n in &config.n_grid {
                    assert!(
                        cells.iter().any(|c| c.0 == s.name && &c.1 == t && c.2 == e && c.3 == n),
                        "missing {} {t} {e} {n}",
                        s.name
                    );
                }
            }
        }
    }
}
