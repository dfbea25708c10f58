use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const GIG_PARAMS: &str = "lambda=0.5,omega=2";

fn qapprox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qapprox")).args(args).output().expect("qapprox runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qapprox-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gig_model(dir: &Path) -> PathBuf {
    let model = dir.join("gig.json");
    let out = qapprox(&["build", "--dist", "gig", "--params", GIG_PARAMS, "--eps", "1e-8", "--out", s(&model)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("setup_seconds:"));
    assert_eq!(stdout.lines().filter(|l| l.starts_with("region:")).count(), 5);
    model
}

#[test]
fn build_eval_verify() {
    let dir = scratch("bev");
    let model = gig_model(&dir);

    let out = qapprox(&["eval", "--model", s(&model), "--u", "0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("u,q"));
    let row = lines.next().unwrap();
    let q: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((q - 1.2432568216367281465).abs() < 1e-6, "{row}");
    assert!(row.split(',').nth(1).unwrap().contains("e0"));

    let out = qapprox(&["eval", "--model", s(&model), "--grid", "7"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let us: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(us.len(), 7);
    assert!(us.windows(2).all(|w| w[0] < w[1]) && us[0] > 0.0 && us[6] < 1.0);
    assert!((us[3] - 0.5).abs() < 1e-15);

    let csv = dir.join("v.csv");
    let out = qapprox(&["verify", "--model", s(&model), "--grid-size", "2000", "--out", s(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("u,q,abs_err"));
    assert!(text.lines().count() > 2000);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn verify_fails_on_tampered_model() {
    let dir = scratch("tamper");
    let model = gig_model(&dir);
    let text = std::fs::read_to_string(&model).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    json["scale"] = serde_json::json!(1.01);
    std::fs::write(&model, json.to_string()).unwrap();
    let out = qapprox(&["verify", "--model", s(&model), "--grid-size", "500", "--out", s(&dir.join("v.csv"))]);
    assert_eq!(out.status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sampling_is_deterministic() {
    let dir = scratch("sample");
    let model = gig_model(&dir);
    let (a, b, c) = (dir.join("a.csv"), dir.join("b.csv"), dir.join("c.csv"));
    for (p, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let out = qapprox(&["sample", "--model", s(&model), "-n", "1000", "--seed", seed, "--out", s(p)]);
        assert!(out.status.success());
    }
    let (ta, tb, tc) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), std::fs::read(&c).unwrap());
    assert_eq!(ta, tb);
    assert_ne!(ta, tc);
    let text = String::from_utf8(ta).unwrap();
    assert_eq!(text.lines().next(), Some("x"));
    assert_eq!(text.lines().count(), 1001);
    assert!(text.lines().skip(1).all(|l| l.parse::<f64>().unwrap() > 0.0));

    let empty = dir.join("empty.csv");
    let out = qapprox(&["sample", "--model", s(&model), "-n", "0", "--out", s(&empty)]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&empty).unwrap(), "x\n");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn oracle_prints_seventeen_digits() {
    let out = qapprox(&["oracle", "--dist", "vg", "--params", "lambda=2,alpha=3,beta=1", "--u", "0.3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let v: f64 = text.trim().parse().unwrap();
    assert!((v - 0.066889448908325266755).abs() < 1e-12);
    let mantissa = text.trim().split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn usage_errors_exit_with_two() {
    let out = qapprox(&["oracle", "--dist", "hyp", "--params", "alpha=1,beta=2", "--u", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("constraint |beta|<alpha violated"));

    let out = qapprox(&["oracle", "--dist", "gig", "--params", "lambda=0.5", "--u", "0.5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = qapprox(&["oracle", "--dist", "gig", "--params", GIG_PARAMS, "--u", "1.5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = qapprox(&["build", "--dist", "weibull", "--eps", "1e-8", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));

    let out = qapprox(&["eval", "--model", "/nonexistent/model.json", "--u", "0.5"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = scratch("usage");
    let model = gig_model(&dir);
    let out = qapprox(&["eval", "--model", s(&model), "--u", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qapprox(&["eval", "--model", s(&model), "--u", "0.5", "--grid", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}
