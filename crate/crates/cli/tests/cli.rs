use std::path::Path;
use std::process::{Command, Output};

use floq_cli::config::{emit, parse_config, Command as Cmd, Sources};
use proptest::prelude::*;

fn floq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floq"))
        .current_dir(dir)
        .env_remove(floq_cli::OUT_DIR_ENV)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn evolve_preset_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = floq(dir.path(), &["evolve", "--preset", "fig2a", "--out", "res"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("evolve fig2a [trajectory]"), "{stdout}");
    assert!(stdout.contains("checks=pass"), "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("res/fig2a/trajectory.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("t,"), "{header}");
    assert!(csv.lines().count() > 100);
    assert!(dir.path().join("res/fig2a/config.toml").exists());
    assert!(dir.path().join("res/fig2a/summary.toml").exists());
}

#[test]
fn environment_sets_default_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_floq"))
        .current_dir(dir.path())
        .env(floq_cli::OUT_DIR_ENV, "envout")
        .args(["analytic", "--preset", "fig2d"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("envout/fig2d/analytic.csv")).unwrap();
    assert_eq!(
        csv.lines().count(),
        1 + floq_cli::commands::ANALYTIC_SAMPLES
    );
}

#[test]
fn floquet_spectrum_has_one_row_per_mode_and_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = floq(
        dir.path(),
        &[
            "floquet",
            "--preset",
            "fig3c",
            "--out",
            ".",
            "--set",
            "sweep.points=5",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("fig3c/spectrum.csv")).unwrap();
    let mut rows = csv.lines();
    assert_eq!(rows.next(), Some("sweep_parameter,k,re_eps,im_eps"));
    assert_eq!(rows.count(), 5 * 3);
}

#[test]
fn config_file_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "name = \"short\"\nt_final = 5\n[lattice]\nn_sites = 3\ncoupling = 1\nloss = [0, 1, 0]\n",
    )
    .unwrap();
    let o = floq(
        dir.path(),
        &[
            "evolve",
            "--config",
            "run.toml",
            "--tf",
            "2",
            "--emit-amplitudes",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let echo = std::fs::read_to_string(dir.path().join("out/short/config.toml")).unwrap();
    assert!(echo.contains("t_final = 2.0"), "{echo}");
    let csv = std::fs::read_to_string(dir.path().join("out/short/trajectory.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("Re_c1"), "{csv:.200}");
}

#[test]
fn invalid_loss_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = floq(
        dir.path(),
        &[
            "evolve",
            "--preset",
            "fig2a",
            "--set",
            "lattice.loss=[0,-1,0]",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("negative"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "preset = \"fig2a\"\ncolour = 3\n",
    )
    .unwrap();
    let o = floq(dir.path(), &["evolve", "--config", "bad.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn drive_without_frequency_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("nofreq.toml"),
        "t_final = 5\n[lattice]\nn_sites = 3\ncoupling = 1\ndrive_left = 20\n",
    )
    .unwrap();
    let o = floq(dir.path(), &["evolve", "--config", "nofreq.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("frequency"), "{}", stderr(&o));
}

#[test]
fn command_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = floq(dir.path(), &["evolve", "--preset", "fig3a"]);
    assert_eq!(o.status.code(), Some(1));
    let o = floq(dir.path(), &["compare", "--preset", "fig7a"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn preset_list_prints_every_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = floq(dir.path(), &["preset-list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for name in floq_core::experiments::preset_names() {
        assert!(text
            .lines()
            .any(|l| l.split_whitespace().next() == Some(name)));
    }
}

fn preset_run(name: &str) -> (Cmd, &str) {
    use floq_core::experiments::{preset, OutputKind::*};
    let cmd = match preset(name).unwrap().output {
        Trajectory => Cmd::Evolve,
        Equilibrium => Cmd::Sweep,
        Spectrum | DarkMode | DarkLifetime => Cmd::Floquet,
        Comparison => Cmd::Compare,
    };
    (cmd, name)
}

proptest! {
    #[test]
    fn emitted_config_round_trips(
        idx in 0..floq_core::experiments::preset_names().len(),
        tf in 1.0f64..500.0,
        steps in 100usize..3000,
        drive in 0.0f64..80.0,
    ) {
        let (cmd, name) = preset_run(floq_core::experiments::preset_names()[idx]);
        let sources = Sources {
            preset: Some(name.into()),
            sets: vec![
                format!("t_final={tf:?}"),
                format!("steps_per_period={steps}"),
                format!("lattice.drive_right={drive:?}"),
                "lattice.frequency=20".into(),
            ],
            ..Sources::default()
        };
        let config = parse_config(cmd, &sources).unwrap();
        let again = parse_config(cmd, &Sources {
            config_text: Some(emit(&config)),
            ..Sources::default()
        }).unwrap();
        prop_assert_eq!(again, config);
    }
}
