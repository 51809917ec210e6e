use std::process::Command as Proc;

use quasix_cli::output::csv_body;
use quasix_cli::{execute, run, Cell, Command, RunConfig, Table};

fn cfg(command: Command) -> RunConfig {
    RunConfig { command: Some(command), ..RunConfig::default() }
}

#[test]
fn spectrum_rows_cover_the_hilbert_space() {
    let c = RunConfig { model: Some("tfim".into()), params: Some("g=2".into()), sites: Some(8), ..cfg(Command::Spectrum) };
    let out = execute(&c).unwrap();
    assert_eq!(out.artifacts.tables[0].rows.len(), 256);
    assert!(out.csv[0].1.lines().any(|l| l == "p_index,p,alpha,energy"));
}

#[test]
fn filter_has_one_row_per_radius_and_trend_flag() {
    let c = RunConfig { sites: Some(8), momentum_index: Some(4), lmax: Some(5), ..cfg(Command::Filter) };
    let out = execute(&c).unwrap();
    let t = &out.artifacts.tables[0];
    assert_eq!(t.rows.len(), 5);
    assert_eq!(t.columns[..10], ["ell", "T", "q", "overlap", "norm", "seminorm", "F", "bound", "f", "DX"]);
    assert!(t.notes.iter().any(|(k, _)| k == "F_nondecreasing"));
    assert!(out.metadata["results"]["F_nondecreasing"].is_boolean());
    for key in ["mu", "s", "v_lr", "delta_e", "gap"] {
        assert!(out.metadata["constants"][key].is_f64(), "{key}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    for c in [
        RunConfig { sites: Some(6), ..cfg(Command::Spectrum) },
        RunConfig { lmax: Some(2), pgrid: Some(6), ..cfg(Command::Dispersion) },
        RunConfig { sites: Some(6), lmax: Some(2), ..cfg(Command::Filter) },
    ] {
        let a = execute(&c).unwrap();
        let b = execute(&c).unwrap();
        for ((_, x), (_, y)) in a.csv.iter().zip(&b.csv) {
            assert_eq!(csv_body(x), csv_body(y));
            assert_eq!(x, y);
        }
    }
}

#[test]
fn metadata_round_trip_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let c = RunConfig { sites: Some(6), p: Some(vec!["0.4pi".into()]), lmax: Some(2), out: Some(out.clone()), ..cfg(Command::Filter) };
    let first = run(&c).unwrap();
    let meta = std::fs::read_to_string(dir.path().join("run.json")).unwrap();
    let again = RunConfig::load(&dir.path().join("run.json")).unwrap();
    assert_eq!(again, RunConfig { out: None, meta: None, ..first.config.clone() });
    let second = execute(&again).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), second.csv[0].1);
    // momentum mapping is recorded: 0.4 pi on 6 sites lands on index 1
    let v: serde_json::Value = serde_json::from_str(&meta).unwrap();
    assert_eq!(v["momenta"][0]["index"], 1);
    assert!(v["wall_time_s"].is_f64());
}

#[test]
fn flags_win_over_config_file() {
    let file = RunConfig::from_toml("command = \"spectrum\"\nsites = 6\nmodel = \"tfim\"\nparams = \"g=1.5\"\n").unwrap();
    let merged = file.merged(&RunConfig { sites: Some(5), ..RunConfig::default() });
    assert_eq!(merged.sites, Some(5));
    assert_eq!(merged.params.as_deref(), Some("g=1.5"));
    assert!(RunConfig::from_toml("sites = 6\nbogus = 1\n").is_err());
}

#[test]
fn invalid_combinations_are_config_errors() {
    let bad = [
        RunConfig { model: Some("tfim".into()), ..cfg(Command::Dispersion) },
        RunConfig { momentum_index: Some(1), p: Some(vec!["pi".into()]), ..cfg(Command::Filter) },
        RunConfig { sites: Some(14), ..cfg(Command::Filter) },
        RunConfig { params: Some("h=1".into()), ..cfg(Command::Spectrum) },
        RunConfig { p: Some(vec!["pie".into()]), ..cfg(Command::Converge) },
        RunConfig { mu: Some(-1.0), ..cfg(Command::Lrcheck) },
        RunConfig::default(),
    ];
    for c in bad {
        let e = execute(&c).unwrap_err();
        assert_eq!(e.exit_code(), 1, "{c:?}: {e}");
    }
}

#[test]
fn non_finite_values_abort() {
    let mut t = Table::new("", &["x"]);
    t.push(vec![Cell::Num(f64::NAN)]);
    let e = t.check_finite().unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn binary_exit_codes_and_files() {
    let bin = env!("CARGO_BIN_EXE_quasix");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv.csv");
    let ok = Proc::new(bin)
        .args(["converge", "--p", "0.4pi,pi", "--lmax", "3", "--out"])
        .arg(&out)
        .env("QUASIX_THREADS", "1")
        .status()
        .unwrap();
    assert_eq!(ok.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# momentum: 0.4pi -> p = "));
    assert!(text.contains("p,ell,Emin,diff_to_next"));
    assert!(dir.path().join("conv.json").exists());
    let cfgerr = Proc::new(bin).args(["filter", "--model", "nope"]).output().unwrap();
    assert_eq!(cfgerr.status.code(), Some(1));
    let usage = Proc::new(bin).args(["spectrum", "--sites", "x"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(1));
    let threads = Proc::new(bin).args(["spectrum", "--sites", "4"]).env("QUASIX_THREADS", "zero").output().unwrap();
    assert_eq!(threads.status.code(), Some(1));
    // an operator that is numerically fine but a target with no isolation gap is still a run, not a crash
    let stdout = Proc::new(bin).args(["spectrum", "--sites", "4"]).output().unwrap();
    assert_eq!(stdout.status.code(), Some(0));
    assert_eq!(String::from_utf8(stdout.stdout).unwrap().lines().filter(|l| !l.starts_with('#')).count(), 17);
}

#[test]
fn lrcheck_and_spectralfn_tables() {
    let out = execute(&RunConfig { sites: Some(8), ..cfg(Command::Lrcheck) }).unwrap();
    assert_eq!(out.artifacts.tables[0].rows.len(), 9);
    assert_eq!(out.table("normbound").unwrap().rows.len(), 8);
    let s = execute(&RunConfig { sites: Some(6), omega_points: Some(101), ..cfg(Command::Spectralfn) }).unwrap();
    assert_eq!(s.artifacts.tables[0].rows.len(), 6 * 101);
    assert!(s.table("residues").is_some());
    let sv = s.artifacts.tables[0].column_f64("S").unwrap();
    assert!(sv.iter().all(|x| x.unwrap() >= -1e-12));
}
