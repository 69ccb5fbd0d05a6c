use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_locinfo"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn locinfo")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// Every file in `dir` except the manifest is listed in it, and nothing else.
fn assert_manifest_complete(dir: &Path) {
    let m = manifest(dir);
    let mut listed: Vec<String> = m["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["file"].as_str().unwrap().to_string())
        .collect();
    let mut present: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|f| f != "manifest.json")
        .collect();
    listed.sort();
    present.sort();
    assert_eq!(listed, present);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn beam_analytic_reports_jump_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["beam-analytic", "--rho", "0.25", "--grid", "400", "--out", "a"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("a");
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!((summary["jump_ratio"].as_f64().unwrap() - 9.0).abs() < 1e-12);
    let kernel = fs::read_to_string(out.join("kernel.csv")).unwrap();
    assert!(kernel.starts_with("# kernel rho="));
    assert_eq!(kernel.lines().count(), 401);
    let density = fs::read_to_string(out.join("density.csv")).unwrap();
    assert!(density.lines().nth(1).unwrap() == "s,density");
    assert_manifest_complete(&out);
    assert_eq!(manifest(&out)["command"], "beam-analytic");
}

#[test]
fn modes_from_kernel_csv() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run(tmp.path(), &["beam-analytic", "--grid", "60", "--out", "a"]).status.success());
    let o = run(tmp.path(), &["modes", "--input", "a/kernel.csv", "--k", "6", "--metric", "euclidean", "--out", "m"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("m/modes.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 61);
    assert!(rows.iter().all(|r| r.len() == 6));
    assert!(rows[0].windows(2).all(|w| w[0] >= w[1]));
    assert_manifest_complete(&tmp.path().join("m"));

    for metric in ["mass", "prior"] {
        let o = run(tmp.path(), &["modes", "--input", "a/kernel.csv", "--k", "3", "--metric", metric, "--out", metric]);
        assert!(o.status.success(), "{metric}: {}", stderr(&o));
    }
    let o = run(tmp.path(), &["modes", "--input", "a/kernel.csv", "--metric", "cosine", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("metric"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let runs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for t in &runs {
        let o = run(t.path(), &["fuse-benchmark", "--blocks", "hybrid", "--seed", "11", "--out", "f"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let o = run(t.path(), &["damage2d", "--grid", "5x21", "--k", "4", "--seed", "3", "--out", "d"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for sub in ["f", "d"] {
        let a = runs[0].path().join(sub);
        let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for n in names {
            let x = fs::read(a.join(&n)).unwrap();
            let y = fs::read(runs[1].path().join(sub).join(&n)).unwrap();
            assert!(x == y, "{sub}/{n:?} differs");
        }
    }
}

#[test]
fn fuse_benchmark_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    for (cfg, out) in [("fusion.toml", "t"), ("fusion.json", "j")] {
        let c = configs().join(cfg);
        let o = run(tmp.path(), &["fuse-benchmark", "--config", c.to_str().unwrap(), "--blocks", "static", "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let t = tmp.path().join("t");
    let rec = fs::read_to_string(t.join("reconstruction.csv")).unwrap();
    assert_eq!(rec.lines().next().unwrap(), "x,EI_true,EI_map,band_lo,band_hi");
    assert_eq!(rec.lines().count(), 21);
    for line in rec.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(v[3] <= v[2] && v[2] <= v[4]);
    }
    let conv: serde_json::Value = serde_json::from_str(&fs::read_to_string(t.join("convergence.json")).unwrap()).unwrap();
    assert_eq!(conv["blocks"], "static");
    assert!(conv["density_additivity_defect"].as_f64().unwrap() < 1e-12);
    assert_eq!(fs::read(t.join("reconstruction.csv")).unwrap(), fs::read(tmp.path().join("j/reconstruction.csv")).unwrap());
    let m = manifest(&t);
    assert_eq!(m["seed"], 7);
    assert!(m["config_path"].as_str().unwrap().ends_with("fusion.toml"));
    assert_manifest_complete(&t);
}

#[test]
fn damage2d_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let c = configs().join("damage2d_test.toml");
    let o = run(tmp.path(), &["damage2d", "--config", c.to_str().unwrap(), "--k", "8", "--seed", "2024", "--out", "d"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let d = tmp.path().join("d");
    for f in ["field_true.csv", "field_map.csv", "mode_01.csv", "mode_08.csv"] {
        let s = fs::read_to_string(d.join(f)).unwrap();
        assert_eq!(s.lines().next().unwrap(), "# field ny=9 nx=41", "{f}");
        assert_eq!(s.lines().count(), 10);
        assert!(s.lines().skip(1).all(|l| l.split(',').count() == 41));
    }
    let spectrum: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(spectrum["eigenvalues"].as_array().unwrap().len(), 8);
    assert!(spectrum["rank"].as_u64().unwrap() <= spectrum["n_obs"].as_u64().unwrap());
    assert!(spectrum["subspace_error_ratio"].as_f64().unwrap() <= 0.5);
    assert_manifest_complete(&d);
}

#[test]
fn weak_gain_and_schur_run() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["weak-gain", "--tau", "0.01", "--out", "w"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let w: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("w/weak_gain.json")).unwrap()).unwrap();
    let gains: Vec<f64> = w["candidates"].as_array().unwrap().iter().map(|c| c["gain"].as_f64().unwrap()).collect();
    assert!(gains.iter().all(|&g| g >= 0.0));
    // All excitations together gain at least as much as any single one.
    let all = *gains.last().unwrap();
    assert!(gains.iter().all(|&g| g <= all * (1.0 + 1e-12)));

    let o = run(tmp.path(), &["schur", "--out", "s"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("s/summary.json")).unwrap()).unwrap();
    assert!(s["trace_effective"].as_f64().unwrap() <= s["trace_marginal"].as_f64().unwrap());
    assert!(s["min_eig_loss"].as_f64().unwrap() >= -1e-10 * s["trace_marginal"].as_f64().unwrap());
    assert_manifest_complete(&tmp.path().join("s"));
}

#[test]
fn two_span_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["beam-two-span", "--rho", "0.25", "--grid", "41", "--out", "t"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("t/summary.json")).unwrap()).unwrap();
    assert_eq!(s["support_positions"].as_array().unwrap().len(), 3);
    assert!(s["symmetry_defect"].as_f64().unwrap() < 1e-12);
}

#[test]
fn shipped_configs_match_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: [(&str, &str, &[&str]); 4] = [
        ("beam-analytic", "beam_analytic.toml", &[]),
        ("beam-two-span", "two_span.toml", &[]),
        ("fuse-benchmark", "fusion.toml", &[]),
        ("damage2d", "damage2d.toml", &["--grid", "17x81"]),
    ];
    for (i, (cmd, cfg, extra)) in cases.iter().enumerate() {
        let path = configs().join(cfg);
        let (a, b) = (format!("a{i}"), format!("b{i}"));
        let common = ["--out"];
        // Compare config echoes only; the runs themselves are exercised elsewhere.
        let with: Vec<&str> = [*cmd, "--config", path.to_str().unwrap()].into_iter().chain(common).chain([a.as_str()]).collect();
        let without: Vec<&str> = [*cmd].into_iter().chain(common).chain([b.as_str()]).collect();
        if *cmd == "damage2d" {
            // The full-size run is covered by the acceptance suite.
            let text = fs::read_to_string(&path).unwrap();
            let small = text.replace("nx = 81", "nx = 21").replace("ny = 17", "ny = 5");
            let p = tmp.path().join("small.toml");
            fs::write(&p, small).unwrap();
            let o = run(tmp.path(), &["damage2d", "--config", p.to_str().unwrap(), "--out", &a]);
            assert!(o.status.success(), "{}", stderr(&o));
            let o = run(tmp.path(), &["damage2d", "--grid", "5x21", "--out", &b]);
            assert!(o.status.success(), "{}", stderr(&o));
            let _ = extra;
        } else {
            assert!(run(tmp.path(), &with).status.success(), "{cmd}");
            assert!(run(tmp.path(), &without).status.success(), "{cmd}");
        }
        let ma = manifest(&tmp.path().join(&a));
        let mb = manifest(&tmp.path().join(&b));
        assert_eq!(ma["config"], mb["config"], "{cfg}");
    }
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["beam-analytic", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--bogus"));

    let cases = [
        ("unknown.toml", "rho = 0.3\nfoo = 1\n", "beam-analytic", "foo"),
        ("type.toml", "[damage]\ncenter = \"x\"\n", "fuse-benchmark", "damage.center"),
        ("range.json", "{\"damage\": {\"center\": 0.2}}", "fuse-benchmark", "damage.center"),
        ("kappa.toml", "kappa = 0.0\n", "damage2d", "kappa"),
        ("rho.toml", "rho = 1.5\n", "beam-analytic", "rho"),
    ];
    for (name, text, cmd, key) in cases {
        let p = tmp.path().join(name);
        fs::write(&p, text).unwrap();
        let o = run(tmp.path(), &[cmd, "--config", p.to_str().unwrap(), "--out", "e"]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
        assert!(stderr(&o).contains(key), "{name}: {}", stderr(&o));
    }
    let o = run(tmp.path(), &["fuse-benchmark", "--blocks", "both", "--out", "e"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("blocks"));
    // No output directory is created for rejected configs.
    assert!(!tmp.path().join("e").exists());
}

#[test]
fn unwritable_output_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("file"), b"").unwrap();
    let o = run(tmp.path(), &["beam-analytic", "--grid", "10", "--out", "file/sub"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn help_exits_zero() {
    let o = bin().arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for cmd in ["beam-analytic", "beam-two-span", "fuse-benchmark", "damage2d", "modes", "weak-gain", "schur"] {
        assert!(text.contains(cmd), "{cmd}");
    }
}
