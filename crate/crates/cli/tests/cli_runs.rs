use std::path::{Path, PathBuf};
use std::process::Command;

use emission_cli::manifest::RunManifest;

const EXACT: &str = r#"
[system]
epsilon = "1 natural"
eta = "2.4 eps"
half_width = 300

[time]
stop = "4 tau_F"
points = 40

[spectrum]
time = "4 tau_F"
half_window = 200
"#;

const TWO_ATOM: &str = r#"
[system]
epsilon = "1 natural"
eta = "2.4 eps"
half_width = 200

[atoms]
delta1 = "1 gamma"
delta2 = "-1 gamma"
omega_d = "1 gamma"
initial = "10"

[time]
stop = "4 tau_F"
points = 20

[spectrum]
time = "4 tau_F"
"#;

const KICKS: &str = r#"
[system]
epsilon = "1 natural"
eta = "1 eps"
half_width = 400

[kicks]
phi = "90 deg"
period = "0.1 tau_F"
total = "3 tau_F"
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn emission(args: &[&str], env_cache: Option<&Path>) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_emission"));
    cmd.args(args).env_remove("EMISSION_CACHE_DIR");
    if let Some(c) = env_cache {
        cmd.env("EMISSION_CACHE_DIR", c);
    }
    cmd.output().unwrap()
}

fn run_ok(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> RunManifest {
    let mut args = vec![sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = emission(&args, None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = RunManifest::read(out).unwrap();
    m.verify(out).unwrap();
    m
}

fn bodies(dir: &Path, m: &RunManifest) -> Vec<Vec<u8>> {
    m.outputs.iter().map(|f| std::fs::read(dir.join(&f.name)).unwrap()).collect()
}

#[test]
fn exact1d_outputs_are_deterministic_and_checksummed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "e.toml", EXACT);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let ma = run_ok("exact1d", &cfg, &a, &["--threads", "1"]);
    let mb = run_ok("exact1d", &cfg, &b, &["--threads", "3"]);
    assert_eq!(bodies(&a, &ma), bodies(&b, &mb));
    let names: Vec<&str> = ma.outputs.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, ["population.csv", "spectrum.csv"]);
    assert_eq!(ma.experiment, "exact1d");
    assert_eq!(ma.config["system"]["eta"], "2.4 eps");
    let pop = std::fs::read_to_string(a.join("population.csv")).unwrap();
    assert!(pop.starts_with("# exact1d population\n# t [natural], t/tau_F [1], P_excited [1]"));
    assert_eq!(emission_cli::output::read_rows(&pop).unwrap().len(), 40);
}

#[test]
fn tampered_output_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "e.toml", EXACT);
    let out = tmp.path().join("o");
    let m = run_ok("exact1d", &cfg, &out, &[]);
    std::fs::write(out.join("spectrum.csv"), "# nothing\n").unwrap();
    assert!(m.verify(&out).is_err());
}

#[test]
fn config_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let cases = [
        ("exact1d", EXACT.replace("half_width = 300", "half_width = 0")),
        ("exact1d", EXACT.replace("\"2.4 eps\"", "\"2.4 furlongs\"")),
        ("exact1d", EXACT.replace("\"2.4 eps\"", "2.4")),
        ("exact1d", EXACT.replace("points", "npoints")),
        ("two-atom", TWO_ATOM.replace("\"10\"", "\"11\"")),
        ("kicks", KICKS.replace("90 deg", "90 tau_F")),
        ("exact1d", "this is not toml = = =".to_string()),
    ];
    for (i, (sub, text)) in cases.iter().enumerate() {
        let cfg = write_config(tmp.path(), &format!("c{i}.toml"), text);
        let o = emission(&[sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).contains("config error"), "case {i}");
    }
    assert!(!out.exists());
}

#[test]
fn mode_cap_refusal_reports_the_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "b.toml",
        "[box]\npreset = \"desk\"\nmax_modes = 100\n[time]\nstop = \"4 tau\"\npoints = 10\n",
    );
    let out = tmp.path().join("o");
    let o = emission(&["box3d", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    let count = emission_core::box3d::enumerate_modes(&emission_core::box3d::BoxSpec::desk()).unwrap().len();
    assert!(err.contains(&format!("holds {count} modes")), "{err}");
}

#[test]
fn missing_config_file_is_an_io_error() {
    let o = emission(&["exact1d", "--config", "/nonexistent/x.toml", "--out", "/tmp/unused"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn cache_round_trip_and_corruption_recovery() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "t.toml", TWO_ATOM);
    let cache = tmp.path().join("cache");
    let c = cache.to_str().unwrap();
    let (a, b, d) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("d"));
    let ma = run_ok("two-atom", &cfg, &a, &["--cache", c]);
    assert!(ma.cache.starts_with("stored"), "{}", ma.cache);
    let mb = run_ok("two-atom", &cfg, &b, &["--cache", c]);
    assert!(mb.cache.starts_with("hit"), "{}", mb.cache);
    assert_eq!(bodies(&a, &ma), bodies(&b, &mb));

    let files: Vec<PathBuf> = std::fs::read_dir(&cache).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 2);
    for f in &files {
        let mut bytes = std::fs::read(f).unwrap();
        assert_eq!(&bytes[..5], b"ADEC1");
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        std::fs::write(f, bytes).unwrap();
    }
    let args = ["two-atom", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()];
    let o = emission(&args, Some(&cache));
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("checksum mismatch"));
    let md = RunManifest::read(&d).unwrap();
    assert!(md.cache.starts_with("replaced"), "{}", md.cache);
    assert_eq!(bodies(&a, &ma), bodies(&d, &md));
}

#[test]
fn kicks_outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "k.toml", KICKS);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let ma = run_ok("kicks", &cfg, &a, &[]);
    let mb = run_ok("kicks", &cfg, &b, &["--threads", "2"]);
    assert_eq!(bodies(&a, &ma), bodies(&b, &mb));
    let names: Vec<&str> = ma.outputs.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, ["spectrum.csv", "predicted.csv", "population.csv"]);
    assert_eq!(ma.results["kicks"], 30);
}
