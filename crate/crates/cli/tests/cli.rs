//! End-to-end runs of the `gs` binary against small configurations.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gs(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gs"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
        .lines()
        .map(str::to_owned)
        .collect()
}

/// Drops the trailing wall-time column, the one part of a table the
/// determinism contract excludes.
fn strip_wall(rows: &[String]) -> Vec<String> {
    rows.iter()
        .map(|row| row.rsplit_once(',').expect("csv row").0.to_owned())
        .collect()
}

/// `-d.dddddddddddddddde-d`: scientific notation, 17 significant digits.
fn is_sci17(token: &str) -> bool {
    let rest = token.strip_prefix('-').unwrap_or(token);
    let Some((mantissa, exponent)) = rest.split_once('e') else {
        return false;
    };
    let Some((lead, frac)) = mantissa.split_once('.') else {
        return false;
    };
    let exp_digits = exponent.strip_prefix('-').unwrap_or(exponent);
    lead.len() == 1
        && lead.bytes().all(|b| b.is_ascii_digit())
        && frac.len() == 16
        && frac.bytes().all(|b| b.is_ascii_digit())
        && !exp_digits.is_empty()
        && exp_digits.bytes().all(|b| b.is_ascii_digit())
}

fn field(row: &str, index: usize) -> f64 {
    row.split(',').nth(index).unwrap().parse().unwrap()
}

const HARMONIC_SOLVE: &str = r#"{
  "problem": {"type": "gpe", "L": 8.0, "cells_per_dim": 8, "order": 2,
              "kappa": 100.0, "potential": "harmonic", "p": 1},
  "solver": {"methods": ["newton_grassmann"]},
  "output": {"csv": "run.csv"}
}"#;

#[test]
fn solve_writes_the_advertised_history() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", HARMONIC_SOLVE);
    let out = gs(&["solve", "c.json"], dir.path());
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rows = lines(&dir.path().join("run.csv"));
    assert_eq!(rows[0], "iter,residual,energy,step,inner_iters,wall_time");
    assert!(rows.len() >= 2);
    let last = rows.last().unwrap();
    assert!(field(last, 1) <= 1e-8, "final residual too large: {last}");
    for (i, row) in rows[1..].iter().enumerate() {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0].parse::<usize>().unwrap(), i + 1);
        for idx in [1, 2, 3, 5] {
            assert!(is_sci17(cells[idx]), "column {idx} of {row:?}");
        }
        cells[4].parse::<usize>().unwrap();
    }
}

#[test]
fn linear_scf_stops_after_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
      "problem": {"type": "gpe", "L": 8.0, "cells_per_dim": 8, "order": 1,
                  "potential": "harmonic", "p": 2},
      "solver": {"methods": ["scf"]},
      "output": {"csv": "scf.csv"}
    }"#;
    write(dir.path(), "c.json", config);
    let out = gs(&["solve", "c.json"], dir.path());
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rows = lines(&dir.path().join("scf.csv"));
    // Without interaction the mean field is fixed, so one eigensolve ends it.
    assert_eq!(rows.len(), 2);
}

#[test]
fn a_bad_solver_name_leaves_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = HARMONIC_SOLVE.replace("newton_grassmann", "newton");
    write(dir.path(), "c.json", &config);
    let out = gs(&["solve", "c.json"], dir.path());
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown solver"));
    assert!(!dir.path().join("run.csv").exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = HARMONIC_SOLVE.replace("\"order\"", "\"orderr\"");
    write(dir.path(), "c.json", &config);
    let out = gs(&["solve", "c.json"], dir.path());
    assert_eq!(exit_code(&out), 1);
    assert!(!dir.path().join("run.csv").exists());
}

#[test]
fn missing_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = gs(&["solve", "nowhere.json"], dir.path());
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn compare_writes_per_solver_tables_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
      "problem": {"type": "gpe", "L": 8.0, "cells_per_dim": 8, "order": 1,
                  "kappa": 10.0, "potential": "harmonic", "p": 1},
      "solver": {"methods": ["newton_grassmann", "scf"]},
      "output": {"csv": "cmp.csv"}
    }"#;
    write(dir.path(), "c.json", config);
    let out = gs(&["compare", "c.json"], dir.path());
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("cmp_newton_grassmann.csv").exists());
    assert!(dir.path().join("cmp_scf.csv").exists());
    let summary = lines(&dir.path().join("cmp_summary.csv"));
    assert_eq!(
        summary[0],
        "solver,energy,final_residual,outer_iters,operator_applies,wall_time"
    );
    assert_eq!(summary.len(), 3);
    assert!(summary[1].starts_with("newton_grassmann,"));
    assert!(summary[2].starts_with("scf,"));
    let newton_energy = field(&summary[1], 1);
    let scf_energy = field(&summary[2], 1);
    assert!((newton_energy - scf_energy).abs() <= 1e-8);
    // The fixed-point iteration takes more outer steps than Newton.
    assert!(field(&summary[1], 3) <= field(&summary[2], 3));
}

#[test]
fn identical_seeds_reproduce_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
      "problem": {"type": "gpe", "L": 8.0, "cells_per_dim": 16, "order": 1,
                  "kappa": 1.0, "potential": "disorder", "epsilon": 0.25,
                  "seed": 3, "p": 1},
      "solver": {"methods": ["newton_grassmann", "newton_stiefel"]},
      "output": {"csv": "dis.csv"}
    }"#;
    write(dir.path(), "c.json", config);
    // Seed 11 via the flag, then via the config, then again with two
    // worker threads: all three must agree bit for bit.
    let with_flag = gs(&["compare", "c.json", "--output-dir", "a", "--seed", "11"], dir.path());
    assert_eq!(exit_code(&with_flag), 0);
    let reseeded = config.replace("\"seed\": 3", "\"seed\": 11");
    write(dir.path(), "c2.json", &reseeded);
    let from_config = gs(&["compare", "c2.json", "--output-dir", "b"], dir.path());
    assert_eq!(exit_code(&from_config), 0);
    let threaded = gs(
        &["compare", "c.json", "--output-dir", "t", "--seed", "11", "--threads", "2"],
        dir.path(),
    );
    assert_eq!(exit_code(&threaded), 0);
    for name in ["dis_newton_grassmann.csv", "dis_newton_stiefel.csv", "dis_summary.csv"] {
        let a = strip_wall(&lines(&dir.path().join("a").join(name)));
        let b = strip_wall(&lines(&dir.path().join("b").join(name)));
        let t = strip_wall(&lines(&dir.path().join("t").join(name)));
        assert_eq!(a, b, "{name} differs between flag and config seeding");
        assert_eq!(a, t, "{name} differs across thread counts");
    }
}

#[test]
fn compare_rejects_a_single_method() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", HARMONIC_SOLVE);
    let out = gs(&["compare", "c.json"], dir.path());
    assert_eq!(exit_code(&out), 1);
    assert!(!dir.path().join("run_summary.csv").exists());
}

#[test]
fn mesh_study_tabulates_ascending_levels() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
      "problem": {"type": "gpe", "L": 8.0, "cells_per_dim": [16, 4, 8], "order": 1,
                  "kappa": 10.0, "potential": "harmonic", "p": 1},
      "solver": {"methods": ["newton_grassmann"]},
      "output": {"csv": "mesh.csv"}
    }"#;
    write(dir.path(), "c.json", config);
    let out = gs(&["mesh-study", "c.json"], dir.path());
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rows = lines(&dir.path().join("mesh.csv"));
    assert_eq!(rows[0], "level,h,n_dofs,outer_iters,energy,energy_error_vs_finest");
    assert_eq!(rows.len(), 4);
    let levels: Vec<usize> = rows[1..].iter().map(|r| field(r, 0) as usize).collect();
    assert_eq!(levels, vec![4, 8, 16]);
    // h = 2 L / cells; interior Q1 nodes per direction are cells - 1.
    assert!((field(&rows[1], 1) - 4.0).abs() <= 1e-15);
    assert_eq!(field(&rows[1], 2) as usize, 9);
    assert_eq!(field(&rows[3], 5), 0.0);
    assert!(field(&rows[1], 5) > field(&rows[2], 5));
}

#[test]
fn mesh_study_rejects_a_scalar_level() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", HARMONIC_SOLVE);
    let out = gs(&["mesh-study", "c.json"], dir.path());
    assert_eq!(exit_code(&out), 1);
    assert!(!dir.path().join("run.csv").exists());
}

#[test]
fn ks_solve_emits_xyz_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
      "problem": {"type": "ks", "L": 4.0, "grid": [5, 5, 5], "p": 2,
        "atoms": [{"center": [-1.0, 0.0, 0.0], "depth": 3.0, "width": 0.8},
                  {"center": [1.0, 0.0, 0.0], "depth": 3.0, "width": 0.8}]},
      "solver": {"methods": ["newton_grassmann"]},
      "output": {"csv": "ks.csv", "field": "density.csv"}
    }"#;
    write(dir.path(), "c.json", config);
    let out = gs(&["solve", "c.json"], dir.path());
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let rows = lines(&dir.path().join("density.csv"));
    assert_eq!(rows[0], "x,y,z,value");
    assert_eq!(rows.len(), 1 + 125);
    for row in &rows[1..] {
        assert_eq!(row.split(',').count(), 4);
        assert!(field(row, 3) >= 0.0);
    }
}

#[test]
fn an_unconverged_run_still_flushes_its_history() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
      "problem": {"type": "gpe", "L": 8.0, "cells_per_dim": 8, "order": 1,
                  "kappa": 100.0, "potential": "harmonic", "p": 1},
      "solver": {"methods": ["rgd"], "max_outer": 5},
      "output": {"csv": "rgd.csv"}
    }"#;
    write(dir.path(), "c.json", config);
    let out = gs(&["solve", "c.json"], dir.path());
    assert_eq!(exit_code(&out), 2);
    let rows = lines(&dir.path().join("rgd.csv"));
    assert_eq!(rows.len(), 1 + 5);
}
