use std::process::Command;

use afftrace_cli::{run_suite, CheckGroup, SuiteConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_afftrace"))
}

#[test]
fn impossible_dimensions_exit_with_usage_status() {
    let out = bin()
        .args(["verify", "--n", "3", "--p", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 < p < n"));
    let out = bin()
        .args(["verify", "--suite", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn constants_suite_streams_json_lines() {
    let start = std::time::Instant::now();
    let out = bin()
        .args(["verify", "--suite", "constants"])
        .env("AFFTRACE_WORKERS", "2")
        .output()
        .unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let (last, reports) = lines.split_last().unwrap();
    assert_eq!(last["summary"]["failed"], 0);
    assert_eq!(
        last["summary"]["total"].as_u64().unwrap() as usize,
        reports.len()
    );
    for r in reports {
        assert_eq!(r["pass"], true, "{r}");
        assert_eq!(r["inputs_digest"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn csv_output_to_file() {
    let dir = std::env::temp_dir().join(format!("afftrace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("appendix.csv");
    let status = bin()
        .args([
            "verify", "--suite", "appendix", "--n", "4", "--p", "2.5", "--format", "csv", "--out",
        ])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(reader.headers().unwrap().get(0), Some("check"));
    // the 15 grid pairs already contain (4, 2.5)
    assert_eq!(reader.records().count(), 15);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn constants_verb() {
    let out = bin()
        .args(["constants", "--n-range", "3..3", "--p", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((rows[0]["k_n"].as_f64().unwrap() - 0.564190).abs() < 1e-6);
    let out = bin()
        .args(["constants", "--n-range", "5..3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "[]");
    let out = bin()
        .args(["constants", "--n-range", "3..4", "--p", "3.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn body_verb_on_a_disc() {
    let dir = std::env::temp_dir().join(format!("afftrace-body-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("disc.json");
    // constant radii interpolate to the disc of radius 1.3 exactly
    let directions: Vec<[f64; 2]> = (0..12)
        .map(|k| (k as f64 * std::f64::consts::PI / 6.0).sin_cos())
        .map(|(s, c)| [c, s])
        .collect();
    let record =
        serde_json::json!({ "dimension": 2, "directions": directions, "radii": vec![1.3; 12] });
    std::fs::write(&path, record.to_string()).unwrap();
    let out = bin()
        .args(["body", "--op", "volume", "--in"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let area = v["volume"].as_f64().unwrap();
    assert!(
        (area / (std::f64::consts::PI * 1.69) - 1.0).abs() < 1e-6,
        "{area}"
    );
    for op in ["polar", "centroid"] {
        let out = bin()
            .args(["body", "--op", op, "--in"])
            .arg(&path)
            .output()
            .unwrap();
        assert!(out.status.success());
        let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(rec["dimension"], 2);
    }
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"dimension\": 2}").unwrap();
    assert_eq!(
        bin()
            .args(["body", "--op", "volume", "--in"])
            .arg(&bad)
            .status()
            .unwrap()
            .code(),
        Some(2)
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn selected_groups_are_reproducible_across_worker_counts() {
    let base = SuiteConfig {
        checks: vec![CheckGroup::Lemmas],
        extremals: 2,
        frames: 2,
        ..SuiteConfig::default()
    };
    let a = run_suite(&SuiteConfig {
        workers: Some(1),
        ..base.clone()
    })
    .unwrap();
    let b = run_suite(&SuiteConfig {
        workers: Some(3),
        ..base
    })
    .unwrap();
    assert!(a.summary.all_passed(), "{:?}", a.summary.failures);
    let strip = |o: &afftrace_cli::Outcome| {
        o.reports
            .iter()
            .map(|r| r.untimed().to_json())
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.summary.untimed(), b.summary.untimed());
}
