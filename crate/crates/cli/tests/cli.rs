use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use anyonpt_cli::{run, ExperimentConfig};

const BIN: &str = env!("CARGO_BIN_EXE_anyonpt");

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn golden(name: &str) -> ExperimentConfig {
    ExperimentConfig::from_path(&configs_dir().join(name)).unwrap()
}

fn anyonpt(args: &[&str], env_output: Option<&Path>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("ANYONPT_OUTPUT");
    if let Some(dir) = env_output {
        cmd.env("ANYONPT_OUTPUT", dir);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("experiment.toml");
    fs::write(&path, text).unwrap();
    path
}

fn entries(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = match fs::read_dir(dir) {
        Ok(rd) => rd.map(|e| e.unwrap().file_name().into_string().unwrap()).collect(),
        Err(_) => Vec::new(),
    };
    names.sort();
    names
}

#[test]
fn golden_configs_round_trip_through_toml() {
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let config = ExperimentConfig::from_path(&path).unwrap();
        config.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = ExperimentConfig::from_toml_str(&config.to_toml_string().unwrap()).unwrap();
        assert_eq!(config, again, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 10);
}

#[test]
fn runs_are_deterministic_across_thread_counts() {
    for name in [
        "null_spectrum.toml",
        "null_delocalize.toml",
        "null_amplify.toml",
        "null_scatter.toml",
        "null_lasermap.toml",
    ] {
        let config = golden(name);
        let serial = run(&config, 1).unwrap();
        let repeat = run(&config, 1).unwrap();
        let parallel = run(&config, 2).unwrap();
        let names: Vec<&str> = serial.names().collect();
        assert!(!names.is_empty());
        assert_eq!(names, parallel.names().collect::<Vec<_>>(), "{name}");
        for file in names {
            assert_eq!(serial.get(file), repeat.get(file), "{name}/{file}");
            assert_eq!(serial.get(file), parallel.get(file), "{name}/{file}");
        }
    }
}

#[test]
fn null_controls_behave() {
    let out = run(&golden("null_scatter.toml"), 1).unwrap();
    let text = String::from_utf8(out.get("scattering.csv").unwrap().to_vec()).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "transmitted_fraction").unwrap();
    for row in reader.records() {
        let transmitted: f64 = row.unwrap()[col].parse().unwrap();
        assert!(transmitted > 0.999, "{transmitted}");
    }

    let out = run(&golden("null_amplify.toml"), 1).unwrap();
    let g_t = out.names().find(|n| n.starts_with("g_t_")).unwrap();
    let text = String::from_utf8(out.get(g_t).unwrap().to_vec()).unwrap();
    for line in text.lines().skip(1) {
        let value: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((value - 1.0).abs() < 1e-6, "{line}");
    }
}

#[test]
fn binary_writes_outputs_and_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = configs_dir().join("null_lasermap.toml");
    let result = anyonpt(
        &["lasermap", "--config", config.to_str().unwrap(), "--output", out.to_str().unwrap()],
        None,
    );
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let names = entries(&out);
    assert!(names.contains(&"config.resolved.toml".to_string()), "{names:?}");
    assert!(names.contains(&"mapping.csv".to_string()), "{names:?}");
    assert!(names.iter().all(|n| !n.starts_with('.')));
    let resolved = ExperimentConfig::from_path(&out.join("config.resolved.toml")).unwrap();
    assert_eq!(resolved, golden("null_lasermap.toml"));
}

#[test]
fn environment_overrides_config_and_flag_overrides_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let (env_dir, flag_dir) = (tmp.path().join("env"), tmp.path().join("flag"));
    let config = configs_dir().join("null_lasermap.toml");
    let config = config.to_str().unwrap();

    let result = anyonpt(&["lasermap", "--config", config], Some(&env_dir));
    assert!(result.status.success());
    assert!(!entries(&env_dir).is_empty());

    let result = anyonpt(
        &["lasermap", "--config", config, "--output", flag_dir.to_str().unwrap()],
        Some(&tmp.path().join("unused")),
    );
    assert!(result.status.success());
    assert!(!entries(&flag_dir).is_empty());
    assert!(!tmp.path().join("unused").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out_arg = out.to_str().unwrap();

    let bad = write_config(tmp.path(), "experiment = \"lasermap\"\nunknown_key = 1\n");
    let result = anyonpt(&["lasermap", "--config", bad.to_str().unwrap(), "--output", out_arg], None);
    assert_eq!(result.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&result.stderr).is_empty());

    let config = configs_dir().join("null_lasermap.toml");
    let result = anyonpt(&["spectrum", "--config", config.to_str().unwrap(), "--output", out_arg], None);
    assert_eq!(result.status.code(), Some(2));

    let result = anyonpt(
        &["lasermap", "--config", config.to_str().unwrap(), "--output", out_arg, "--jobs", "0"],
        None,
    );
    assert_eq!(result.status.code(), Some(2));
    assert!(entries(&out).is_empty());
}

#[test]
fn numerical_failure_exits_with_three_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    // the packet is still on the barrier when the run stops
    let config = write_config(
        tmp.path(),
        r#"
experiment = "scatter"

[grid]
x_min = -100.0
x_max = 100.0
n_points = 1024

[potential]
kind = "barrier"
v0 = 3.0
delta = 0.0

[sweep]
phi = 0.0
v = 0.0

[propagator]
dt = 0.01
t_final = 12.0

[scatter]
d = -40.0
w = 5.0
k = 1.5
"#,
    );
    let result = anyonpt(
        &["scatter", "--config", config.to_str().unwrap(), "--output", out.to_str().unwrap()],
        None,
    );
    assert_eq!(result.status.code(), Some(3), "{}", String::from_utf8_lossy(&result.stderr));
    assert!(entries(&out).is_empty());
}

#[test]
fn unwritable_output_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "occupied").unwrap();
    let config = configs_dir().join("null_lasermap.toml");
    let result = anyonpt(
        &["lasermap", "--config", config.to_str().unwrap(), "--output", blocker.to_str().unwrap()],
        None,
    );
    assert_eq!(result.status.code(), Some(1));
    assert_eq!(fs::read_to_string(&blocker).unwrap(), "occupied");
}
