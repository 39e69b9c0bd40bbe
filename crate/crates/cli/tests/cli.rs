use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use willmore_core::config::RunManifest;
use willmore_core::mesh::read_obj;

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_willmore-lab"))
        .current_dir(dir)
        .env_remove("WILLMORE_LAB_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Value of the first `key = value` line in `text`.
fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn generate_icosphere_writes_valid_obj() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["generate", "icosphere", "--r", "1", "--level", "3", "-o", "s.obj"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mesh = read_obj(dir.path().join("s.obj")).unwrap();
    assert_eq!(mesh.vertices.len(), 642);
    assert!(mesh.validate().is_ok());
    let manifest = RunManifest::parse(&fs::read_to_string(dir.path().join("generate.manifest")).unwrap()).unwrap();
    assert_eq!(manifest.command, "generate");
    assert_eq!(manifest.argument("spec"), Some("icosphere(r=1; center=0,0,0; level=3)"));
}

#[test]
fn generate_dante_has_k_components() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["generate", "dante", "--lambda", "4", "--k", "3", "-o", "d.obj"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "components"), 3.0);
}

#[test]
fn generate_dante_rejects_small_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["generate", "dante", "--lambda", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("requires lambda > 1"), "{}", stderr(&o));
}

#[test]
fn evaluate_examples() {
    let dir = tempfile::tempdir().unwrap();
    lab(dir.path(), &["generate", "icosphere", "--level", "3", "-o", "s.obj"]);
    let at1 = lab(dir.path(), &["evaluate", "s.obj", "--lambda", "1", "--domain", "ball(r=1)"]);
    assert!(at1.status.success());
    let out = stdout(&at1);
    assert!(field(&out, "w_lambda").abs() < 0.01 * 4.0 * PI);
    assert!(out.contains("confined = true"));
    let at0 = stdout(&lab(dir.path(), &["evaluate", "s.obj"]));
    assert_eq!(field(&at0, "w_lambda"), field(&at0, "willmore"));

    let t = lab(
        dir.path(),
        &["generate", "torus", "--major", "1.4142135623730951", "--minor", "1", "-o", "t.obj"],
    );
    assert!(t.status.success(), "{}", stderr(&t));
    let w = field(&stdout(&lab(dir.path(), &["evaluate", "t.obj"])), "willmore");
    assert!((w / (2.0 * PI * PI) - 1.0).abs() < 0.01, "torus W = {w}");
}

#[test]
fn evaluate_rejects_broken_obj() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.obj"), "v 0 0 zero\nf 1 2 3\n").unwrap();
    let o = lab(dir.path(), &["evaluate", "bad.obj"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    fs::write(dir.path().join("open.obj"), "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
    let o = lab(dir.path(), &["evaluate", "open.obj"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn minimize_perturbed_sphere_reaches_two_pi() {
    let dir = tempfile::tempdir().unwrap();
    let g = lab(dir.path(), &["--seed", "3", "generate", "icosphere", "--perturb", "0.05", "-o", "p.obj"]);
    assert!(g.status.success(), "{}", stderr(&g));
    let o = lab(dir.path(), &["minimize", "p.obj", "--lambda", "0.5", "--domain", "ball(r=1)"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let e = field(&stdout(&o), "w_lambda");
    assert!((e / (2.0 * PI) - 1.0).abs() < 0.03, "final {e}");
    assert!(read_obj(dir.path().join("final.obj")).unwrap().validate().is_ok());
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,wLambda"));
}

#[test]
fn minimize_without_weight_finds_round_sphere() {
    let dir = tempfile::tempdir().unwrap();
    lab(dir.path(), &["generate", "ellipsoid", "--a", "0.9", "--c", "0.6", "-o", "e.obj"]);
    let o = lab(dir.path(), &["minimize", "e.obj", "--lambda", "0", "--domain", "ball(r=1)"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let w = field(&stdout(&o), "willmore");
    assert!((w / (4.0 * PI) - 1.0).abs() < 0.02, "W = {w}");
}

#[test]
fn minimize_cylinder_in_cylinder_diverges() {
    let dir = tempfile::tempdir().unwrap();
    lab(
        dir.path(),
        &["generate", "capped-cylinder", "--r", "0.8", "--h", "1", "--segments", "24", "-o", "c.obj"],
    );
    let o = lab(dir.path(), &["minimize", "c.obj", "--lambda", "0.5", "--domain", "cylinder(axis=z; r=1)"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = fs::read_to_string(dir.path().join("minimize.manifest")).unwrap();
    let m = RunManifest::parse(&manifest).unwrap();
    assert!(m.terminations[0].1.starts_with("divergenceDetected"), "{manifest}");
}

#[test]
fn minimize_is_reproducible_from_its_manifest() {
    let dir = tempfile::tempdir().unwrap();
    lab(dir.path(), &["--seed", "11", "generate", "icosphere", "--level", "2", "--perturb", "0.05", "-o", "p.obj"]);
    let args = ["minimize", "p.obj", "--lambda", "0.75", "--domain", "ball(r=1)"];
    assert!(lab(dir.path(), &args).status.success());
    let first = fs::read(dir.path().join("trace.csv")).unwrap();
    let first_mesh = fs::read(dir.path().join("final.obj")).unwrap();
    fs::rename(dir.path().join("minimize.manifest"), dir.path().join("run.manifest")).unwrap();

    let mut rerun = vec!["--config", "run.manifest"];
    rerun.extend_from_slice(&args[..4]);
    let o = lab(dir.path(), &rerun);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(dir.path().join("trace.csv")).unwrap(), first);
    assert_eq!(fs::read(dir.path().join("final.obj")).unwrap(), first_mesh);

    let m = RunManifest::parse(&fs::read_to_string(dir.path().join("run.manifest")).unwrap()).unwrap();
    assert_eq!(RunManifest::parse(&m.to_text()).unwrap(), m);
    assert_eq!(m.argument("lambda"), Some("0.75"));
}

#[test]
fn minimize_needs_a_domain() {
    let dir = tempfile::tempdir().unwrap();
    lab(dir.path(), &["generate", "icosphere", "--level", "1", "-o", "s.obj"]);
    let o = lab(dir.path(), &["minimize", "s.obj", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = lab(dir.path(), &["minimize", "s.obj", "--lambda", "-1", "--domain", "ball(r=1)"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn single_lambda_sweep_reports_insufficient_points() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("lab.conf"),
        "[sweep]\ninitializer = icosphere(r=0.4; level=2)\n",
    )
    .unwrap();
    let o = lab(
        dir.path(),
        &["--config", "lab.conf", "sweep", "--domain", "ball(r=0.5)", "--lambdas", "1"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("insufficient points"));
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(table.starts_with(
        "lambda,best_energy,best_area,best_willmore,best_diameter,classification,initializer,seed,iterations"
    ));
    assert_eq!(table.lines().count(), 2);
    assert!(dir.path().join("sweep_plot.csv").exists());
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = lab(dir.path(), &["check"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let strict = lab(dir.path(), &["check", "--tolerance-scale", "0", "--samples", "2"]);
    assert_eq!(strict.status.code(), Some(3), "{}", stdout(&strict));
    fs::write(dir.path().join("empty.conf"), "[check]\npopulation = empty\n").unwrap();
    let empty = lab(dir.path(), &["--config", "empty.conf", "check"]);
    assert_eq!(empty.status.code(), Some(1));
    assert!(stderr(&empty).contains("population is empty"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lab(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(lab(dir.path(), &["--threads", "0", "check"]).status.code(), Some(1));
    fs::write(dir.path().join("bad.conf"), "[optimizer]\nmax_iterations = many\n").unwrap();
    let o = lab(dir.path(), &["--config", "bad.conf", "check"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"));
    assert_eq!(lab(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn thread_count_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_willmore-lab"))
        .current_dir(dir.path())
        .env("WILLMORE_LAB_THREADS", "3")
        .args(["generate", "icosphere", "--level", "1"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let m = RunManifest::parse(&fs::read_to_string(dir.path().join("generate.manifest")).unwrap()).unwrap();
    assert_eq!(m.threads, 3);
    assert!(dir.path().join("icosphere.obj").exists());
}
