//! Runner-level checks: byte-identical artifacts across thread counts for
//! every experiment kind (the reproducibility contract), plus a few
//! end-to-end artifact sanity checks.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_gibbslab")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn model_zfield(n: usize) -> String {
    let mut s = String::from("dimension = 1\nboundary = \"open\"\n");
    s.push_str(&format!("extent = [{n}]\n"));
    for i in 0..n {
        s.push_str(&format!("\n[[terms]]\nanchor = [{i}]\nradius = 0\npaulis = [\"Z\"]\n"));
    }
    s
}

fn model_mixed(n: usize) -> String {
    let mut s = String::from("dimension = 1\nboundary = \"open\"\n");
    s.push_str(&format!("extent = [{n}]\n"));
    for b in 0..n - 1 {
        s.push_str(&format!("\n[[terms]]\nanchor = [{b}]\nradius = 1\npaulis = [\"ZZ\"]\n"));
    }
    for i in 0..n {
        s.push_str(&format!("\n[[terms]]\nanchor = [{i}]\nradius = 0\npaulis = [\"X\"]\n"));
        s.push_str(&format!("\n[[terms]]\nanchor = [{i}]\nradius = 0\npaulis = [\"Z\"]\n"));
    }
    s
}

fn model_commuting4() -> String {
    let mut s = String::from("dimension = 1\nextent = [4]\nboundary = \"periodic\"\n");
    for i in 0..3 {
        s.push_str(&format!("\n[[terms]]\nanchor = [{i}]\nradius = 1\npaulis = [\"Z\", \"ZZ\"]\n"));
    }
    s.push_str("\n[[terms]]\nanchor = [3]\nradius = 1\npaulis = [\n    \"Z\",\n    { ops = \"ZZ\", offsets = [[0], [-3]] },\n]\n");
    s
}

fn model_classical_chain(n: usize) -> String {
    let mut s = String::from("dimension = 1\nboundary = \"open\"\nclassical = true\n");
    s.push_str(&format!("extent = [{n}]\n"));
    for b in 0..n - 1 {
        s.push_str(&format!("\n[[terms]]\nanchor = [{b}]\nradius = 1\npaulis = [\"ZZ\"]\n"));
    }
    for i in 0..n {
        s.push_str(&format!("\n[[terms]]\nanchor = [{i}]\nradius = 0\npaulis = [\"Z\"]\n"));
    }
    s
}

fn run(kind: &str, config: &Path, out: &Path, jobs: usize) {
    let status = Command::new(bin())
        .arg(kind)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--jobs")
        .arg(jobs.to_string())
        .status()
        .expect("spawning runner");
    assert!(status.success(), "{kind} failed (jobs = {jobs})");
}

fn snapshot_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut map = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name().to_string_lossy().into_owned();
        map.insert(name, std::fs::read(entry.path()).unwrap());
    }
    map
}

#[test]
fn acceptance_12_artifacts_are_byte_identical_across_jobs() {
    let tmp = std::env::temp_dir().join(format!("gibbslab-det-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    write(&tmp.join("zfield4.toml"), &model_zfield(4));
    write(&tmp.join("zfield6.toml"), &model_zfield(6));
    write(&tmp.join("mixed6.toml"), &model_mixed(6));
    write(&tmp.join("commute4.toml"), &model_commuting4());
    write(&tmp.join("classical6.toml"), &model_classical_chain(6));

    let configs: Vec<(&str, String)> = vec![
        (
            "tomography",
            "family = \"zfield4.toml\"\nbeta = 1.0\nseed = 5\n[params]\neta = 0.01\n".into(),
        ),
        (
            "learn-phase",
            "family = \"zfield4.toml\"\nbeta = 1.0\neps = 0.3\ndelta = 0.1\ndelta_prime = 0.1\nseed = 6\n[params]\ntest_points = 8\n".into(),
        ),
        (
            "shadows",
            "family = \"zfield4.toml\"\nbeta = 0.7\neps = 0.3\ndelta_prime = 0.1\nseed = 7\n[params]\ntrials = 20\nregion = [1]\nk0 = 1\n".into(),
        ),
        (
            "maxent",
            "family = \"commute4.toml\"\nbeta = 1.0\nseed = 8\n[params]\nreps = 2\neta = 0.01\n".into(),
        ),
        (
            "decay-scan",
            "family = \"mixed6.toml\"\nbeta = 0.4\nseed = 9\n[params]\nscan = \"indistinguishability\"\nradii = [0, 1, 2, 3]\nx = [-0.8, -0.8, -0.8, -0.8, -0.8, 0.9, 0.4, 0.9, 0.4, 0.9, 0.4, 0.9, 0.4, 0.9, 0.4, 0.9, 0.4]\n".into(),
        ),
        (
            "markov-scan",
            "family = \"zfield6.toml\"\nbeta = 0.6\nseed = 10\n[params]\nmax_shield = 2\n".into(),
        ),
        (
            "w1-report",
            "family = \"zfield4.toml\"\nbeta = 1.0\nseed = 11\n[params]\npairs = 4\n".into(),
        ),
        (
            "classical",
            "family = \"classical6.toml\"\nbeta = 1.0\nseed = 12\n[params]\ncoupling = -0.8\nbetas = [0.5, 2.0]\nregion = [0, 1]\n".into(),
        ),
    ];

    for (kind, body) in &configs {
        let cfg_path = tmp.join(format!("{kind}.toml"));
        write(&cfg_path, body);
        let out1 = tmp.join(format!("{kind}-jobs1"));
        let out2 = tmp.join(format!("{kind}-jobs2"));
        run(kind, &cfg_path, &out1, 1);
        run(kind, &cfg_path, &out2, 2);
        let a = snapshot_dir(&out1);
        let b = snapshot_dir(&out2);
        assert_eq!(
            a.keys().collect::<Vec<_>>(),
            b.keys().collect::<Vec<_>>(),
            "{kind}: artifact sets differ"
        );
        for (name, bytes) in &a {
            assert_eq!(bytes, &b[name], "{kind}: artifact {name} differs across --jobs");
        }
        assert!(a.contains_key("run.json"), "{kind}: missing run manifest");
    }
    println!("ACCEPTANCE 12 PASS: byte-identical artifacts across --jobs for all 8 experiments");
    std::fs::remove_dir_all(&tmp).ok();
}

#[test]
fn decay_scan_csv_column_is_monotone() {
    let tmp = std::env::temp_dir().join(format!("gibbslab-scan-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    write(&tmp.join("mixed6.toml"), &model_mixed(6));
    write(
        &tmp.join("scan.toml"),
        "family = \"mixed6.toml\"\nbeta = 0.4\nseed = 9\n[params]\nscan = \"indistinguishability\"\nradii = [0, 1, 2, 3]\nx = [-0.8, -0.8, -0.8, -0.8, -0.8, 0.9, 0.4, 0.9, 0.4, 0.9, 0.4, 0.9, 0.4, 0.9, 0.4, 0.9, 0.4]\n",
    );
    let out = tmp.join("out");
    run("decay-scan", &tmp.join("scan.toml"), &out, 2);
    let csv = std::fs::read_to_string(out.join("scan.csv")).unwrap();
    let values: Vec<f64> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("radius"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(values.len() >= 4);
    for w in values.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "column not non-increasing: {values:?}");
    }
    // Metadata discipline: every column carries a definition comment.
    assert!(csv.lines().filter(|l| l.starts_with("# column")).count() >= 3);
    std::fs::remove_dir_all(&tmp).ok();
}

#[test]
fn learn_phase_at_infinite_temperature_returns_trace_average() {
    let tmp = std::env::temp_dir().join(format!("gibbslab-b0-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    write(&tmp.join("zfield4.toml"), &model_zfield(4));
    write(
        &tmp.join("b0.toml"),
        "family = \"zfield4.toml\"\nbeta = 0.0\neps = 0.3\ndelta = 0.1\ndelta_prime = 0.1\nseed = 3\n[params]\ntest_points = 6\n",
    );
    let out = tmp.join("out");
    run("learn-phase", &tmp.join("b0.toml"), &out, 1);
    let csv = std::fs::read_to_string(out.join("estimates.csv")).unwrap();
    for line in csv.lines().filter(|l| !l.starts_with('#') && !l.starts_with("point")) {
        let f_hat: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        // tr[Z]/2^n = 0 regardless of the queried parameters.
        assert!(f_hat.abs() < 1e-12, "estimate {f_hat} should vanish at beta = 0");
    }
    std::fs::remove_dir_all(&tmp).ok();
}

#[test]
fn failures_produce_structured_error_records() {
    let tmp = std::env::temp_dir().join(format!("gibbslab-err-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    write(&tmp.join("zfield4.toml"), &model_zfield(4));
    // Classical experiment on a non-classical model must fail cleanly.
    write(&tmp.join("bad.toml"), "family = \"zfield4.toml\"\nbeta = 1.0\nseed = 1\n");
    let out = tmp.join("out");
    let status = Command::new(bin())
        .arg("classical")
        .arg("--config")
        .arg(tmp.join("bad.toml"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(!status.success());
    let record: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(record["kind"], "classical");
    assert!(record["error"].as_str().unwrap().contains("classical"));
    // No partial CSV alongside the error record.
    assert!(!out.join("classical.csv").exists());
    std::fs::remove_dir_all(&tmp).ok();
}
