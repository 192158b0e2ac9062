use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::process::Command;

use sawtooth_echo::ensemble::{classical_fidelity_at, sample_strip};
use sawtooth_echo::qecho::{quantum_fidelity_at, InitialCondition, MixtureFidelity};
use sawtooth_echo::MapParams;
use sawtooth_expcli::csv::{read_series, strip_timestamp};
use sawtooth_expcli::{
    emit_plot_script, plot_script, run, run_with_threads, ClassicalSetup, ExperimentConfig, FitConfig, Preset,
    QuantumSetup, RunError, RunRecord, SweepPoint, TimeGrid,
};

fn small_config(out_dir: &Path) -> ExperimentConfig {
    let sweep = [(256, 1e-2), (512, 1e-2), (512, 3e-3)]
        .into_iter()
        .map(|(n, eps)| SweepPoint::from(MapParams::new(1.0, 1, n, eps).unwrap()))
        .collect();
    ExperimentConfig {
        name: "small".into(),
        preset: None,
        sweep,
        classical: Some(ClassicalSetup {
            nu: TAU / 50.0,
            trajectories: 20_000,
            seed: 9,
        }),
        quantum: Some(QuantumSetup {
            initial: InitialCondition::MomentumMixture { nu: TAU / 50.0 },
            mixture: MixtureFidelity::StripReturn,
        }),
        t_max: 25,
        times: TimeGrid::Linear,
        fit: FitConfig::default(),
        fgr_constant: 2.2,
        out_dir: out_dir.to_path_buf(),
    }
}

#[test]
fn run_writes_reloadable_series() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(&dir.path().join("run"));
    let record = run(&config).unwrap();
    record.verify().unwrap();

    // Two distinct (K0, L, eps) classical runs, one quantum run per point.
    let ids: Vec<&str> = record.series.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids, ["c000", "c001", "q000", "q001", "q002"]);
    assert_eq!(record.entry("q001").unwrap().classical_ref.as_deref(), Some("c000"));
    assert_eq!(record.entry("q002").unwrap().classical_ref.as_deref(), Some("c001"));
    assert_eq!(record.regimes().len(), 3);
    assert!(record.entry("c000").unwrap().regime.is_none());

    // Reloaded values equal a direct recomputation bit for bit.
    let ens = sample_strip(TAU / 50.0, 20_000, 9, 1).unwrap();
    let times: Vec<u32> = (0..=25).collect();
    let direct_c = classical_fidelity_at(&ens, &config.sweep[0].params, &times).unwrap();
    assert_eq!(record.load_series("c000").unwrap(), direct_c);
    let init = InitialCondition::MomentumMixture { nu: TAU / 50.0 };
    let direct_q = quantum_fidelity_at(&init, &config.sweep[2].params, &times, MixtureFidelity::StripReturn).unwrap();
    let reloaded = record.load_series("q002").unwrap();
    assert_eq!(reloaded, direct_q);
    for (a, b) in reloaded.values.iter().zip(&direct_q.values) {
        assert_eq!(a.to_bits(), b.to_bits());
    }

    // The summary file reproduces the record.
    let loaded = RunRecord::load(&record.out_dir.join("summary.json")).unwrap();
    assert_eq!(loaded.series, record.series);
    assert_eq!(loaded.version, record.version);
}

fn csv_bodies(record: &RunRecord) -> Vec<String> {
    record
        .series
        .iter()
        .map(|e| strip_timestamp(&fs::read_to_string(record.csv_path(e)).unwrap()))
        .collect()
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let one = run_with_threads(&small_config(&dir.path().join("one")), 1).unwrap();
    let three = run_with_threads(&small_config(&dir.path().join("three")), 3).unwrap();
    assert_eq!(csv_bodies(&one), csv_bodies(&three));
    assert_eq!(one.version, three.version);
    assert_eq!(one.config_hash, three.config_hash);

    // Different seed, different classical series and artifact version.
    let mut other = small_config(&dir.path().join("other"));
    other.classical.as_mut().unwrap().seed = 10;
    let other = run(&other).unwrap();
    assert_ne!(other.version, one.version);
}

#[test]
fn empty_sweep_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let mut config = small_config(&out);
    config.sweep.clear();
    let err = run(&config).unwrap_err();
    assert!(
        matches!(&err, RunError::Config { path, .. } if path == "sweep"),
        "{err}"
    );
    assert!(!out.exists());
}

#[test]
fn plot_script_requires_series_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let record = run(&small_config(&dir.path().join("plot"))).unwrap();

    let script = plot_script(&record).unwrap();
    assert!(script.contains("log10 f"));
    assert!(script.contains("Gamma = 2.2 sigma^2"));
    for e in &record.series {
        assert!(script.contains(&e.csv));
    }
    let path = emit_plot_script(&record, None).unwrap();
    assert!(path.is_file());

    let mut empty = record.clone();
    empty.series.clear();
    assert!(plot_script(&empty).is_err());

    fs::remove_file(record.csv_path(&record.series[1])).unwrap();
    assert!(matches!(plot_script(&record), Err(RunError::Io { .. })));
    assert!(record.verify().is_err());
}

#[test]
fn power_law_runs_plot_log_log() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = Preset::Fig5.config().scaled(1.0 / 16.0).unwrap();
    // Just the classical part, briefly.
    config.quantum = None;
    config.sweep.truncate(1);
    config.classical.as_mut().unwrap().trajectories = 5_000;
    config.t_max = 200;
    config.out_dir = dir.path().join("fig5");
    let record = run(&config).unwrap();
    let fit = record.series[0].fit.expect("power-law fit");
    assert!(fit.rate < 0.0);
    let script = plot_script(&record).unwrap();
    assert!(script.contains("1/sqrt(D t)"));
    assert!(script.contains(r#"\"loglog\":true"#));
}

#[test]
fn csv_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let record = run(&small_config(&dir.path().join("rt"))).unwrap();
    for e in &record.series {
        let loaded = read_series(&record.csv_path(e)).unwrap();
        let text = sawtooth_expcli::csv::format_series(&e.id, &loaded.series, None);
        let again = sawtooth_expcli::csv::parse_series(&text).unwrap();
        assert_eq!(again.series, loaded.series);
    }
}

fn sawecho(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sawecho"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SAWECHO_THREADS")
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();

    let (code, out, _) = sawecho(&["presets", "list"], cwd);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.contains("caption ok")).count(), 5);

    let (code, out, _) = sawecho(&["classify", "--kick", "1", "--dim", "2048", "--eps", "0.01"], cwd);
    assert_eq!(code, 0);
    assert!(out.contains("lyapunov"), "{out}");

    let config = small_config(Path::new("cli_run")).to_toml_string().unwrap();
    fs::write(cwd.join("exp.toml"), &config).unwrap();
    let (code, out, err) = sawecho(&["run", "--config", "exp.toml", "--threads", "2", "--plot"], cwd);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("plot script"));
    assert!(cwd.join("cli_run/summary.json").is_file());

    let (code, out, _) = sawecho(&["fit", "cli_run/q000.csv", "--plateau", "off"], cwd);
    assert_eq!(code, 0);
    assert!(out.contains("\"rate\""));

    let (code, _, _) = sawecho(&["plot-script", "cli_run/summary.json"], cwd);
    assert_eq!(code, 0);

    // Invalid configuration: exit code 1.
    fs::write(cwd.join("bad.toml"), config.replace("N = 256", "N = 255")).unwrap();
    let (code, _, err) = sawecho(&["run", "--config", "bad.toml"], cwd);
    assert_eq!(code, 1);
    assert!(err.contains("sweep[0].N"), "{err}");
    let (code, _, _) = sawecho(&["run", "--preset", "fig7"], cwd);
    assert_eq!(code, 1);

    // Runtime failure: exit code 2.
    let (code, _, _) = sawecho(&["plot-script", "missing/summary.json"], cwd);
    assert_eq!(code, 2);
    let (code, _, _) = sawecho(&["fit", "missing.csv"], cwd);
    assert_eq!(code, 2);
}
