use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bragg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bragg")).current_dir(dir).args(args).output().expect("spawn bragg")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn coords(comb_file: &str) -> Vec<f64> {
    comb_file
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split('\t').next().unwrap().parse::<bragg_core::QuadValue>().unwrap().to_f64())
        .collect()
}

#[test]
fn generate_fibonacci_has_stable_density() {
    let dir = tempfile::tempdir().unwrap();
    let o = bragg(dir.path(), &["generate", "--preset", "fibonacci", "--weight", "tent", "--interval", "0", "1000", "--out", "fib.txt"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("fib.txt")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# config_hash ")));
    let xs = coords(&text);
    let left = xs.iter().filter(|&&x| x < 500.0).count() as f64 / 500.0;
    let right = xs.iter().filter(|&&x| x >= 500.0).count() as f64 / 500.0;
    assert!((left - right).abs() <= 0.02 * right, "{left} vs {right}");
    // Model set density: vol(window) / |det| = τ / √5.
    let tau = (1.0 + 5f64.sqrt()) / 2.0;
    let rho = tau / 5f64.sqrt();
    assert!((xs.len() as f64 / 1000.0 - rho).abs() <= 0.02 * rho);
}

#[test]
fn verify_zroot2_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = bragg(dir.path(), &["verify", "--theorem", "all", "--preset", "zroot2", "--seed", "42", "--out", "v.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(doc["config_hash"].as_str().unwrap().len(), 64);
    let reports = doc["reports"].as_array().unwrap();
    assert!(!reports.is_empty());
    for r in reports {
        for key in ["theorem", "scenario", "seed", "checks", "pass", "runtime_ms"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
        assert!(r["runtime_ms"].is_null());
        assert_eq!(r["pass"], true);
    }
}

#[test]
fn diffract_on_empty_comb_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.txt"), "# window -10 10\n# m 0\n").unwrap();
    let o = bragg(dir.path(), &["diffract", "empty.txt", "--preset", "integer", "--out", "s.csv"]);
    assert_eq!(code(&o), 2);
    fs::write(dir.path().join("blank.txt"), "").unwrap();
    assert_eq!(code(&bragg(dir.path(), &["diffract", "blank.txt", "--out", "s.csv"])), 2);
}

#[test]
fn usage_and_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&bragg(dir.path(), &["frobnicate"])), 2);
    assert_eq!(code(&bragg(dir.path(), &["verify", "--theorem", "T9"])), 2);
    assert_eq!(code(&bragg(dir.path(), &["verify", "--set", "vanhove.sizes=400,200"])), 2);
    assert_eq!(code(&bragg(dir.path(), &["generate", "--preset", "penrose"])), 2);
    assert_eq!(code(&bragg(dir.path(), &["generate", "--set", "nonsense.key=1", "--preset", "zroot2"])), 2);
    assert_eq!(code(&bragg(dir.path(), &["generate"])), 2);
}

#[test]
fn pipeline_outputs_are_deterministic_and_hashed() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(
        p.join("run.cfg"),
        "# zroot2 with a narrower tent\nscheme.preset = zroot2\nscheme.weight.halfwidth = 0.8\nspectrum.window.hi = 6\n",
    )
    .unwrap();
    let steps: [&[&str]; 4] = [
        &["--config", "run.cfg", "generate", "--out", "c.txt"],
        &["--config", "run.cfg", "autocorr", "c.txt", "--radius", "5", "--out", "a.csv"],
        &["--config", "run.cfg", "diffract", "c.txt", "--out", "s.csv"],
        &["--config", "run.cfg", "decompose", "c.txt", "--out", "d.csv"],
    ];
    let mut first = Vec::new();
    for round in 0..2 {
        for step in steps {
            let o = bragg(p, step);
            assert_eq!(code(&o), 0, "{step:?}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let o = bragg(p, &["plot", "s.csv", "--out", "s.svg"]);
        assert_eq!(code(&o), 0);
        let files: Vec<String> =
            ["c.txt", "a.csv", "s.csv", "s.json", "d.csv", "s.svg"].iter().map(|f| fs::read_to_string(p.join(f)).unwrap()).collect();
        if round == 0 {
            first = files;
        } else {
            assert_eq!(first, files);
        }
    }
    for (name, text) in ["c.txt", "a.csv", "s.csv", "d.csv", "s.svg"].iter().zip([&first[0], &first[1], &first[2], &first[4], &first[5]]) {
        let headers = text.lines().take_while(|l| l.starts_with('#') || l.starts_with("<!--"));
        assert!(headers.into_iter().any(|l| l.contains("config_hash")), "{name} lacks a config hash header");
    }
    let json: serde_json::Value = serde_json::from_str(&first[3]).unwrap();
    assert!(json["config_hash"].is_string());
    assert!(first[2].lines().any(|l| l.contains(",bragg,")));
    assert!(first[5].contains("<svg"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("run.cfg"), "scheme.preset = zroot2\n").unwrap();
    let o = bragg(p, &["--config", "run.cfg", "generate", "--preset", "integer", "--interval", "-5", "5", "--out", "c.txt"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(p.join("c.txt")).unwrap();
    assert!(text.contains("# scheme.preset integer"));
    assert_eq!(coords(&text).len(), 11);
}

#[test]
fn grid_refinement_finds_integer_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&bragg(p, &["generate", "--preset", "integer", "--out", "z.txt"])), 0);
    let o = bragg(p, &["diffract", "z.txt", "--source", "grid", "--refine", "--set", "spectrum.window.hi=3.5", "--out", "s.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(p.join("s.csv")).unwrap();
    let peaks: Vec<f64> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && l.contains(",bragg,"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(peaks.len(), 4, "{peaks:?}");
    for (i, k) in peaks.iter().enumerate() {
        assert!((k - i as f64).abs() < 1e-6, "{peaks:?}");
    }
}
