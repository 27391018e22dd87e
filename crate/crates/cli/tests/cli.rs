use std::fs;
use std::path::Path;
use std::process::Command;

fn ccalab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ccalab")).args(args).output().expect("spawn ccalab")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn quantiles_table_starts_at_upper_edge() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q");
    let o = ccalab(&[
        "quantiles", "--seed", "1", "--out", s(&out),
        "--override", "c1=0.4", "--override", "c2=0.2", "--override", "q=100",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 100);
    let first: f64 = rows[0].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(first, ccalab::SpectralModel::new(0.4, 0.2).unwrap().lambda_plus);
    assert!((first - 0.8319184).abs() < 1e-7);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn tw_edge_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "tw-edge".to_string(), "--seed".into(), "11".into(), "--out".into(), s(out).into(),
            "--override".into(), "n=80".into(), "--override".into(), "c1=0.3".into(),
            "--override".into(), "c2=0.2".into(), "--override".into(), "trials=30".into(),
            "--override".into(), "goe_trials=30".into(), "--override".into(), "n_goe=80".into(),
        ]
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let argv = args(out);
        let o = ccalab(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["results.csv", "results.json", "edge_samples.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    // and from the manifest, with a different thread count
    let c = dir.path().join("c");
    let o = ccalab(&["tw-edge", "--config", s(&a.join("manifest.json")), "--threads", "1", "--out", s(&c)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(a.join("results.csv")).unwrap(), fs::read(c.join("results.csv")).unwrap());
}

#[test]
fn validation_failure_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad");
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"seed": 3, "n": 100, "c1": 0.3, "c2": 0.2,
           "grid": {"e_min": 0.5, "e_max": 0.5, "e_points": 1, "eta_min": 0.0001, "eta_max": 0.5, "eta_points": 2}}"#,
    )
    .unwrap();
    let o = ccalab(&["local-law-sweep", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(err.contains("admissible spectral domain"), "{err}");
    assert!(!out.exists());

    let o = ccalab(&["spectrum", "--out", s(&out), "--override", "n=100", "--override", "c1=0.3", "--override", "c2=0.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    assert!(!out.exists());

    let o = ccalab(&["spectrum", "--seed", "1", "--out", s(&out), "--override", "n=100", "--override", "c1=0.6", "--override", "c2=0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("c1 + c2 < 1"));
}

#[test]
fn bundled_example_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let value = ccalab::harness::load_config_value(&path).unwrap();
        let cfg = ccalab::harness::parse_config(value).unwrap();
        assert!(cfg.validate().is_empty(), "{}: {:?}", path.display(), cfg.validate());
        seen += 1;
    }
    assert_eq!(seen, 6);
}
