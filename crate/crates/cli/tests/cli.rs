use cldiag_core::residuals::TestFunction;
use cldiag_core::sweep::SweepReport;
use cldiag_core::synth::holder_field;
use cldiag_core::{snapshot, Grid};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cldiag(args: &[&str]) -> Output {
    cldiag_env(args, &[])
}

fn cldiag_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cldiag"));
    cmd.args(args).env("RUST_LOG", "error");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn shock_file(dir: &Path) -> PathBuf {
    let p = dir.join("shock.fld");
    let o = cldiag(&["synth", "shock", "--n", "256", "--nt", "16", "-o", path_str(&p)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    p
}

fn shear_file(dir: &Path, nt: &str) -> PathBuf {
    let p = dir.join("shear.fld");
    let o = cldiag(&["synth", "shear", "--n", "64", "--nt", nt, "-o", path_str(&p)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    p
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&cldiag(&["--help"])), 0);
    assert_eq!(code(&cldiag(&["--version"])), 0);
    assert_eq!(code(&cldiag(&[])), 1);
    assert_eq!(code(&cldiag(&["frobnicate"])), 1);
}

#[test]
fn check_compat_passes_for_comp_euler() {
    let o = cldiag(&["check-compat", "--system", "comp-euler", "--samples", "200", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["samples"], 200);
}

#[test]
fn impossible_compat_tolerance_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[tolerances]\ncompat_residual = 0.0\n");
    let o = cldiag(&["--config", path_str(&cfg), "check-compat", "--system", "incomp-mhd"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("compatibility residual"));
    assert!(o.stdout.len() > 2, "report is still written");
}

#[test]
fn error_kinds_exit_one_with_distinct_messages() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = cldiag(&["check-compat", "--system", "navier-stokes"]);
    let bad = dir.path().join("bad.fld");
    std::fs::write(&bad, b"not a snapshot at all").unwrap();
    let malformed = cldiag(&["structure", "-i", path_str(&bad)]);
    let shock = shock_file(dir.path());
    let coarse = cldiag(&["dissipation", "--system", "burgers", "-i", path_str(&shock), "--epsilons", "0.001"]);
    let outs = [&unknown, &malformed, &coarse];
    for o in outs {
        assert_eq!(code(o), 1);
    }
    assert!(stderr(&unknown).contains("unknown system"));
    assert!(stderr(&malformed).contains("malformed snapshot"));
    assert!(stderr(&coarse).contains("under-resolved"));
    let msgs: Vec<String> = outs.iter().map(|o| stderr(o)).collect();
    assert!(msgs[0] != msgs[1] && msgs[1] != msgs[2] && msgs[0] != msgs[2]);
}

#[test]
fn missing_input_and_bad_config_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = cldiag(&["structure", "-i", path_str(&dir.path().join("absent.fld"))]);
    assert_eq!(code(&o), 1);
    let cfg = write_config(dir.path(), "[sweep]\nepsilon = 0.1\n");
    let o = cldiag(&["--config", path_str(&cfg), "systems", "list"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("malformed config"));
    let o = cldiag_env(&["systems", "list"], &[("CLDIAG_THREADS", "zero")]);
    assert_eq!(code(&o), 1);
}

#[test]
fn systems_list_and_describe() {
    let o = cldiag(&["systems", "list"]);
    assert_eq!(code(&o), 0);
    let all = json(&o);
    assert_eq!(all.as_array().unwrap().len(), 7);
    let o = cldiag(&["systems", "describe", "comp-euler", "--k", "2"]);
    let v = json(&o);
    assert_eq!(v["n"], 3);
    assert_eq!(v["k"], 2);
    assert_eq!(v["state_names"].as_array().unwrap().len(), 3);
    assert_eq!(v["affine_rows"], serde_json::json!([0]));
    assert_eq!(v["state_domain"].as_array().unwrap().len(), 3);
}

#[test]
fn synth_holder_matches_library_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("noise.fld");
    let o = cldiag(&[
        "synth", "holder", "--n", "128", "--dims", "2", "--alpha", "0.3", "--components", "2", "--seed", "9",
        "-o", path_str(&p),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let read = snapshot::load(&p).unwrap();
    let g = Grid::unit_box(2, 128, &[true, true]).unwrap();
    let direct = holder_field(&g, 0.3, 2, 9, None).unwrap();
    assert_eq!(read, direct);
    let bytes = std::fs::read(&p).unwrap();
    let mut again = Vec::new();
    snapshot::write_snapshot(&mut again, &read).unwrap();
    assert_eq!(bytes, again);
}

#[test]
fn dissipation_on_shock_plateaus_at_two_thirds_of_weight() {
    let dir = tempfile::tempdir().unwrap();
    let shock = shock_file(dir.path());
    let o = cldiag(&["dissipation", "--system", "burgers", "-i", path_str(&shock), "--eps-sweep", "--kernel", "spatial"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let pts = SweepReport::points_from_csv(&stdout(&o)).unwrap();
    assert_eq!(pts.len(), 5);

    // psi averaged over time at the shock x = 1/2, between cells 127 and 128
    let field = snapshot::load(&shock).unwrap();
    let psi = TestFunction::default_for(field.grid()).unwrap();
    let m = 256;
    let weight = (0..16)
        .map(|t| 0.5 * (psi.values()[t * m + 127] + psi.values()[t * m + 128]))
        .sum::<f64>()
        / 16.0;
    let expected = 2.0 / 3.0 * weight;
    for (e, v) in pts {
        assert!((v - expected).abs() < 0.05 * expected, "eps {e}: {v} vs {expected}");
    }
}

#[test]
fn dissipation_json_and_density_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let shock = shock_file(dir.path());
    let dens = dir.path().join("d.fld");
    let o = cldiag(&[
        "dissipation", "--system", "burgers", "-i", path_str(&shock), "--kernel", "spatial", "--format", "json",
        "--density-output", path_str(&dens),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    for key in ["epsilons", "values", "exponent", "r2", "region_label", "companion", "weak"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["weak"]["accepted"], true);
    assert!(v["exponent"].as_f64().unwrap().abs() < 0.1);
    let d = snapshot::load(&dens).unwrap();
    assert_eq!(d.grid(), snapshot::load(&shock).unwrap().grid());
    // dissipation concentrates on the shock with a negative sign
    assert!(d.data().iter().any(|&x| x < 0.0));
    assert!(d.data().iter().all(|&x| x <= 1e-12));
}

#[test]
fn residual_threshold_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let shock = shock_file(dir.path());
    let cfg = write_config(dir.path(), "system = \"burgers\"\n[sweep]\nkernel = \"spatial\"\n[tolerances]\nresidual = 1e-3\n");
    let o = cldiag(&["--config", path_str(&cfg), "dissipation", "-i", path_str(&shock)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn reports_are_byte_stable_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let shock = shock_file(dir.path());
    let args = ["dissipation", "--system", "burgers", "-i", path_str(&shock), "--format", "json", "--kernel", "spatial"];
    let a = cldiag_env(&args, &[("CLDIAG_THREADS", "1")]);
    let b = cldiag_env(&args, &[("CLDIAG_THREADS", "4")]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn structure_csv_over_interior_region() {
    let dir = tempfile::tempdir().unwrap();
    let shear = shear_file(dir.path(), "0");
    let out = dir.path().join("s.csv");
    let o = cldiag(&[
        "structure", "-i", path_str(&shear), "--region-margin", "0.2", "--components", "0", "--epsilons",
        "0.0625,0.125,0.09375", "-o", path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("epsilon,value\n"));
    let pts = SweepReport::points_from_csv(&text).unwrap();
    let eps: Vec<f64> = pts.iter().map(|p| p.0).collect();
    assert_eq!(eps, vec![0.125, 0.09375, 0.0625]);
    assert!(pts.iter().all(|p| p.1 > 0.0));
    // a smooth profile is more regular at smaller scales
    assert!(pts[2].1 < pts[0].1);
}

#[test]
fn structure_without_margin_on_walls_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let shear = shear_file(dir.path(), "0");
    let o = cldiag(&["structure", "-i", path_str(&shear)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("boundary"));
}

#[test]
fn boundary_flux_and_balance_on_shear_flow() {
    let dir = tempfile::tempdir().unwrap();
    let shear = shear_file(dir.path(), "4");
    let cfg = write_config(dir.path(), "system = \"incomp-euler\"\n[tolerances]\nshell = 0.0\n");
    let o = cldiag(&["--config", path_str(&cfg), "boundary-flux", "-i", path_str(&shear), "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert!(v["values"].as_array().unwrap().iter().all(|x| x.as_f64() == Some(0.0)));

    let o = cldiag(&["balance", "--system", "incomp-euler", "-i", path_str(&shear), "--epsilon", "0.125"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    for key in ["times", "energy", "dEdt", "interior", "shell", "closure"] {
        assert_eq!(v[key].as_array().unwrap().len(), 4, "{key}");
    }
    let e: Vec<f64> = v["energy"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(e.iter().all(|x| (x - e[0]).abs() < 1e-12));
}

#[test]
fn shock_shell_flux_exceeds_tight_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let shock = shock_file(dir.path());
    let cfg = write_config(dir.path(), "[tolerances]\nshell = 1e-6\n");
    let o = cldiag(&[
        "--config", path_str(&cfg), "boundary-flux", "--system", "burgers", "-i", path_str(&shock),
        "--epsilons", "0.25,0.125,0.0625",
    ]);
    assert_eq!(code(&o), 2);
    let pts = SweepReport::points_from_csv(&stdout(&o)).unwrap();
    // q = u^3/3, so |q| = 1/3 on both walls; shells of width eps/4 in whole cells
    for (_, v) in pts {
        assert!((v - 1.0 / 6.0).abs() < 1e-12, "{v}");
    }
}

#[test]
fn shock_balance_closes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("shock.fld");
    let o = cldiag(&["synth", "shock", "--n", "1024", "--nt", "8", "-o", path_str(&p)]);
    assert_eq!(code(&o), 0);
    let o = cldiag(&["balance", "--system", "burgers", "-i", path_str(&p), "--epsilon", "0.125"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn scaling_fit_and_condition() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pts.csv");
    let mut text = String::from("epsilon,value\n");
    for e in [0.1, 0.05, 0.025, 0.0125, 0.00625] {
        text.push_str(&format!("{e:e},{:e}\n", 3.0 * f64::powf(e, 0.5)));
    }
    std::fs::write(&csv, text).unwrap();
    let o = cldiag(&["scaling", "fit", "-i", path_str(&csv), "--expect", "0.5", "--tolerance", "1e-9"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!((json(&o)["exponent"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let o = cldiag(&["scaling", "fit", "-i", path_str(&csv), "--expect", "-0.5", "--tolerance", "0.1"]);
    assert_eq!(code(&o), 2);

    let o = cldiag(&["scaling", "condition", "--alpha", "0.4", "--beta", "0.3", "--criterion", "inhom-euler"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["holds"], true);
    let o = cldiag(&["scaling", "condition", "--alpha", "0.4", "--beta", "0.3", "--criterion", "hall-mhd"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("unknown criterion"));
}
