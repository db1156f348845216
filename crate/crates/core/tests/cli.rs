use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn latbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latbound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<csv::StringRecord> {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect()
}

fn header(text: &str) -> Vec<String> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).take(1).collect();
    body.split(',').map(str::to_owned).collect()
}

fn column(text: &str, name: &str) -> Vec<String> {
    let idx = header(text).iter().position(|h| h == name).unwrap();
    data_rows(text).iter().map(|r| r[idx].to_owned()).collect()
}

#[test]
fn two_body_example() {
    let o = latbound(&["two-body", "--dim", "1", "--mu", "-1", "--gamma", "1", "--k", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let e: f64 = column(&text, "energy")[0].parse().unwrap();
    assert!((e - (4.0 - 17f64.sqrt())).abs() < 1e-10, "{e}");
    assert!((e - -0.1231056256).abs() < 1e-10);
    assert_eq!(column(&text, "side")[0], "below-band");
    assert_eq!(column(&text, "status")[0], "ok");
    assert!(text.contains("# config.mu = -1"));
}

#[test]
fn zero_coupling_is_a_usage_error() {
    let o = latbound(&["two-body", "--dim", "1", "--mu", "0", "--gamma", "1", "--k", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mu != 0"));
    assert!(o.stdout.is_empty());
}

#[test]
fn bad_values_are_usage_errors() {
    for args in [
        &["two-body", "--mu", "1", "--gamma", "0", "--k", "0"][..],
        &["two-body", "--mu", "1", "--gamma", "1", "--dim", "3"][..],
        &["two-body", "--mu", "1", "--gamma", "1", "--dim", "2", "--k", "0"][..],
        &["two-body", "--mu", "1", "--format", "xml"][..],
        &["two-body", "--mu", "abc"][..],
    ] {
        assert_eq!(latbound(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn sweep_extremum_sits_at_zero() {
    for (mu, want_max) in [("1", true), ("-1", false)] {
        let o = latbound(&["two-body", "--dim", "1", "--mu", mu, "--gamma", "1", "--k-sweep", "64"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let ks: Vec<f64> = column(&text, "k1").iter().map(|s| s.parse().unwrap()).collect();
        let es: Vec<f64> = column(&text, "energy").iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(ks.len(), 64);
        let cmp = |&a: &usize, &b: &usize| es[a].total_cmp(&es[b]);
        let i = if want_max {
            (0..es.len()).max_by(cmp).unwrap()
        } else {
            (0..es.len()).min_by(cmp).unwrap()
        };
        assert_eq!(ks[i], 0.0, "mu = {mu}");
        assert!((es[i] - (4.0 + mu.parse::<f64>().unwrap() * 17f64.sqrt())).abs() < 1e-10);
        let key = if want_max { "# summary.argmax_k = 0\n" } else { "# summary.argmin_k = 0\n" };
        assert!(text.contains(key));
    }
}

#[test]
fn rerun_from_output_reproduces_it() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let run = |args: &[&str], out: &Path| {
        let mut v = args.to_vec();
        let out = out.to_str().unwrap();
        v.extend(["--out", out]);
        assert_eq!(latbound(&v).status.code(), Some(0));
    };
    run(
        &["two-body", "--dim", "1", "--mu", "-1.5", "--gamma", "2", "--k-sweep", "16", "--n", "128"],
        &a,
    );
    run(&["two-body", "--config", a.to_str().unwrap()], &b);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let aj = dir.path().join("a.json");
    let bj = dir.path().join("b.json");
    run(
        &["three-body", "--mu", "3", "--gamma", "3", "--K", "0,pi", "--n", "32", "--format", "json"],
        &aj,
    );
    run(&["three-body", "--config", aj.to_str().unwrap()], &bj);
    assert_eq!(std::fs::read(&aj).unwrap(), std::fs::read(&bj).unwrap());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# coupling\ndim = 1\nmu = -1\ngamma = 1\nk = pi\n").unwrap();
    let o = latbound(&["two-body", "--config", cfg.to_str().unwrap(), "--k", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(column(&text, "k1"), vec!["0.0"]);
    let e: f64 = column(&text, "energy")[0].parse().unwrap();
    assert!((e - (4.0 - 17f64.sqrt())).abs() < 1e-10);
}

#[test]
fn three_body_json() {
    let o = latbound(&[
        "three-body", "--dim", "1", "--mu", "3", "--gamma", "3", "--K", "0", "--n", "32", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["mu"], "3");
    let row = &v["results"][0];
    assert_eq!(row["status"], "ok");
    assert_eq!(row["side"], "above-top");
    let e = row["energy"].as_f64().unwrap();
    let tau = row["tau_t"].as_f64().unwrap();
    assert!(e > tau);
    assert!((e - 17.6406).abs() < 1e-3, "{e}");
}

#[test]
fn missing_trimer_flags_the_row() {
    let o = latbound(&["three-body", "--dim", "1", "--mu", "1", "--gamma", "1", "--K", "0", "--n", "32"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let status = &column(&text, "status")[0];
    assert!(status.starts_with("error:"), "{status}");
    assert!(column(&text, "detail")[0].contains("samples"));
    // the essential spectrum is still reported
    let tau: f64 = column(&text, "tau_t")[0].parse().unwrap();
    assert!((tau - 9.25).abs() < 1e-6);
}

#[test]
fn eigenfunction_samples_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.csv");
    let o = latbound(&[
        "three-body", "--mu", "-3", "--gamma", "3", "--K", "0", "--n", "32", "--eigenfunction",
        f.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&f).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 32 * 32);
}

#[test]
fn ess_spectrum_and_band() {
    let o = latbound(&["ess-spectrum", "--mu", "-1", "--gamma", "1", "--K", "pi", "--n", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let tau: f64 = column(&text, "tau_b")[0].parse().unwrap();
    assert!((tau - 2.75).abs() < 1e-8, "{tau}");

    let o = latbound(&["band", "--mu", "1", "--gamma", "1", "--n", "256"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let hi: f64 = column(&text, "hi")[0].parse().unwrap();
    let lo: f64 = column(&text, "lo")[0].parse().unwrap();
    assert!((hi - (4.0 + 17f64.sqrt())).abs() < 1e-8);
    assert!((lo - 5.0).abs() < 1e-8);
}

#[test]
fn sequential_matches_parallel() {
    let args = ["two-body", "--mu", "2", "--gamma", "1.5", "--k-sweep", "24", "--n", "128"];
    let par = stdout(&latbound(&args));
    let mut seq_args = args.to_vec();
    seq_args.push("--sequential");
    assert_eq!(par, stdout(&latbound(&seq_args)));
}

#[test]
fn verify_default_suite_passes() {
    let o = latbound(&["verify"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    let checks = column(&text, "check");
    for name in ["wrong-side", "bs-vs-dense", "ess-coverage", "pauli-dense", "decay-two-body"] {
        assert!(checks.iter().any(|c| c == name), "{name}");
    }
    assert!(column(&text, "status").iter().all(|s| s == "ok"));
}

#[test]
fn verify_two_dimensions() {
    let o = latbound(&["verify", "--dim", "2", "--n", "8", "--mu", "1"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    let notes = column(&text, "note");
    assert!(notes.iter().any(|n| n.starts_with("skipped")));
}

#[test]
fn verify_with_a_trimer_checks_the_eigenfunction() {
    let o = latbound(&["verify", "--mu", "3", "--gamma", "3", "--K", "0", "--n", "32"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    let checks = column(&text, "check");
    assert!(checks.iter().any(|c| c == "pauli-bound-state"));
    assert!(checks.iter().any(|c| c == "decay-bound-state"));
}
