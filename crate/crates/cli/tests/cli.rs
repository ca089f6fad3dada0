use std::path::Path;
use std::process::{Command, Output};

fn modshift(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_modshift"));
    cmd.args(args).env_remove("MODSHIFT_OUT");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn synth(dir: &Path) {
    let out = modshift(
        &[
            "synth",
            "--out",
            dir.to_str().unwrap(),
            "--users",
            "300",
            "--bridges",
            "5",
        ],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_then_run() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let config = tmp.path().join("config.toml");
    let out = modshift(&["validate", "--config", config.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    let out = modshift(&["run", "--config", config.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("earlydetect") && !stdout.contains("FAILED"));
    assert!(tmp.path().join("out/manifest.json").is_file());
    assert!(tmp.path().join("out/mpr.csv").is_file());
}

#[test]
fn subcommand_runs_its_dependencies_only() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let config = tmp.path().join("config.toml");
    let out = modshift(&["graph", "--config", config.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("out/growth.json").is_file());
    assert!(!tmp.path().join("out/mpr.csv").exists());
    assert!(!tmp.path().join("out/scored_words.csv").exists());
}

#[test]
fn output_directory_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let config = tmp.path().join("config.toml");
    let env_out = tmp.path().join("from_env");
    let out = modshift(
        &["ingest", "--config", config.to_str().unwrap()],
        &[("MODSHIFT_OUT", &env_out)],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(env_out.join("corpus_summary.json").is_file());

    let flag_out = tmp.path().join("from_flag");
    let out = modshift(
        &[
            "ingest",
            "--config",
            config.to_str().unwrap(),
            "--out",
            flag_out.to_str().unwrap(),
        ],
        &[("MODSHIFT_OUT", &env_out)],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(flag_out.join("corpus_summary.json").is_file());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let config = tmp.path().join("config.toml");
    let cfg = config.to_str().unwrap();

    std::fs::write(tmp.path().join("bad.toml"), "seed = 1\n").unwrap();
    let out = modshift(&["run", "--config", tmp.path().join("bad.toml").to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1));

    std::fs::rename(tmp.path().join("keywords.txt"), tmp.path().join("kw.bak")).unwrap();
    let out = modshift(&["validate", "--config", cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("keywords"));
    std::fs::rename(tmp.path().join("kw.bak"), tmp.path().join("keywords.txt")).unwrap();

    let blocker = tmp.path().join("not_a_dir");
    std::fs::write(&blocker, "").unwrap();
    let out = modshift(
        &["ingest", "--config", cfg, "--out", blocker.join("x").to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(3));

    let tweets = tmp.path().join("tweets.jsonl");
    let mut src = std::fs::read_to_string(&tweets).unwrap();
    src.push_str("{broken\n");
    std::fs::write(&tweets, src).unwrap();
    let out = modshift(&["ingest", "--config", cfg], &[]);
    assert_eq!(out.status.code(), Some(0));
    let out = modshift(&["ingest", "--config", cfg, "--strict"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAILED"));
}
