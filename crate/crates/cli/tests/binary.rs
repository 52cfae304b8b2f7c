use std::process::Command;

fn amrtriad() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_amrtriad"));
    // keep the caller's environment from leaking into the runs
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("AMRTRIAD_")) {
        cmd.env_remove(k);
    }
    cmd
}

fn run(cmd: &mut Command) -> (bool, String, String) {
    let out = cmd.output().unwrap();
    (
        out.status.success(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn validate_passes() {
    let (ok, stdout, _) = run(amrtriad().arg("validate"));
    assert!(ok, "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")), "{stdout}");
}

#[test]
fn thresholds_table() {
    let (ok, stdout, _) = run(amrtriad().arg("thresholds"));
    assert!(ok);
    assert_eq!(stdout.lines().count(), 22);
    assert!(stdout.contains("666666.6667"), "{stdout}");
}

#[test]
fn simulate_from_a_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "name = \"run\"\nengine = \"sde\"\nmodel.gamma = 0\nmodel.sigma = 1e-7\ninitial.R0 = 1\n").unwrap();
    let out = dir.path().join("out");
    let (ok, stdout, stderr) = run(amrtriad()
        .args(["simulate", "--seed", "9", "--threads", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("AMRTRIAD_GRID_T_END", "5"));
    assert!(ok, "{stderr}");
    assert!(stdout.contains("run_sde.csv"));
    let csv = std::fs::read_to_string(out.join("run_sde.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert!(last.starts_with("5.0000000000000000e0,"), "{last}");
    assert!(last.ends_with(",0,sde,9"), "{last}");
}

#[test]
fn errors_name_the_key_and_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "engine = \"ode\"\nmodel.gamma = 2\ninitial.R0 = 1\nensemble.n_paths = 5\n").unwrap();
    let (ok, _, stderr) = run(amrtriad().arg("simulate").arg("--config").arg(&cfg));
    assert!(!ok);
    assert!(stderr.contains("ensemble: ensembles need engine"), "{stderr}");

    std::fs::write(&cfg, "engine = \"ode\"\nmodel.gamma = 2\ninitial.R0 = 1\n").unwrap();
    let (ok, _, stderr) = run(amrtriad().arg("ensemble").arg("--config").arg(&cfg));
    assert!(!ok);
    assert!(stderr.contains("no ensemble"), "{stderr}");

    let (ok, _, stderr) = run(amrtriad()
        .arg("simulate")
        .arg("--config")
        .arg(&cfg)
        .env("AMRTRIAD_MODEL_GAMA", "1"));
    assert!(!ok);
    assert!(stderr.contains("AMRTRIAD_MODEL_GAMA: unknown key"), "{stderr}");

    let (ok, _, stderr) = run(amrtriad().args(["figure", "figure9"]));
    assert!(!ok);
    assert!(stderr.contains("unknown preset"), "{stderr}");
}

#[test]
fn figure_preset_writes_its_files() {
    let dir = tempfile::tempdir().unwrap();
    let (ok, _, stderr) = run(amrtriad().args(["figure", "figure4", "--out"]).arg(dir.path()));
    assert!(ok, "{stderr}");
    for f in [
        "figure4-extinction_fde.svg",
        "figure4-persistence_fde.svg",
        "figure4-extinction_fde_alpha0.5.csv",
        "figure4-persistence.report.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}
