use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;
use spectral_means::random_spd;
use spgm::MatrixFile;
use tempfile::TempDir;

fn spgm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spgm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spgm runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn diag_file(dir: &Path, name: &str, d: &[f64]) -> PathBuf {
    let n = d.len();
    let entries: Vec<String> = (0..n * n)
        .map(|k| if k / n == k % n { format!("[{},0]", d[k / n]) } else { "[0,0]".into() })
        .collect();
    write(dir, name, &format!("{{\"dim\":{n},\"entries\":[{}]}}", entries.join(",")))
}

fn structured(args: &[&str], dir: &Path) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "structured"]);
    let o = spgm(&full, dir);
    let v = serde_json::from_slice(&o.stdout).unwrap_or(Value::Null);
    (code(&o), v)
}

fn read_matrix(p: &Path) -> MatrixFile {
    MatrixFile::read(p).unwrap()
}

fn assert_diag(m: &MatrixFile, want: &[f64], tol: f64) {
    let n = want.len();
    assert_eq!(m.dim, n);
    for (k, [re, im]) in m.entries.iter().enumerate() {
        let w = if k / n == k % n { want[k / n] } else { 0.0 };
        assert!((re - w).abs() <= tol && im.abs() <= tol, "entry {k}: {re}+{im}i, want {w}");
    }
}

fn without_wall_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

#[test]
fn mean_f_of_commuting_diagonals() {
    let dir = TempDir::new().unwrap();
    let a = diag_file(dir.path(), "a.json", &[1.0, 4.0]);
    let b = diag_file(dir.path(), "b.json", &[9.0, 1.0]);
    let o = spgm(&["mean", "f", a.to_str().unwrap(), b.to_str().unwrap(), "--t", "0.5", "--out", "x.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_diag(&read_matrix(&dir.path().join("x.json")), &[3.0, 2.0], 1e-13);
}

#[test]
fn geometric_mean_at_zero_copies_first_input() {
    let dir = TempDir::new().unwrap();
    let o = spgm(&["gen", "--dim", "3", "--cond", "50", "--seed", "4", "--count", "2", "--out", "m.json"], dir.path());
    assert_eq!(code(&o), 0);
    let o = spgm(&["mean", "geometric", "m-0.json", "m-1.json", "--t", "0", "--out", "x.json"], dir.path());
    assert_eq!(code(&o), 0);
    let a = read_matrix(&dir.path().join("m-0.json"));
    let x = read_matrix(&dir.path().join("x.json"));
    for (p, q) in a.entries.iter().zip(&x.entries) {
        assert!((p[0] - q[0]).abs() <= 1e-12 && (p[1] - q[1]).abs() <= 1e-12);
    }
}

#[test]
fn renyi_without_z_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    diag_file(dir.path(), "a.json", &[1.0]);
    let o = spgm(&["mean", "renyi", "a.json", "a.json", "--t", "0.5"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--z"));
}

#[test]
fn malformed_and_non_spd_inputs_exit_two() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "bad.json", "{\"dim\":2,\"entries\":[[1,0]]}");
    write(dir.path(), "neg.json", "{\"dim\":1,\"entries\":[[-1,0]]}");
    write(dir.path(), "skew.json", "{\"dim\":2,\"entries\":[[1,0],[0.5,0],[0.4,0],[1,0]]}");
    for f in ["bad.json", "neg.json", "skew.json", "missing.json"] {
        let o = spgm(&["divergence", f, f, "--t", "0.5"], dir.path());
        assert_eq!(code(&o), 2, "{f}");
    }
}

#[test]
fn ill_conditioned_intermediate_exits_three() {
    let dir = TempDir::new().unwrap();
    diag_file(dir.path(), "a.json", &[1.0, 1e-11]);
    diag_file(dir.path(), "b.json", &[1e-11, 1.0]);
    let o = spgm(&["mean", "geometric", "a.json", "b.json", "--t", "0.5"], dir.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn divergence_of_scalars() {
    let dir = TempDir::new().unwrap();
    diag_file(dir.path(), "a.json", &[1.0]);
    diag_file(dir.path(), "b.json", &[4.0]);
    let (c, v) = structured(&["divergence", "a.json", "b.json", "--t", "0.5"], dir.path());
    assert_eq!(c, 0);
    assert_eq!(v["scalars"]["phi"].as_f64().unwrap(), 0.5);
    let (_, same) = structured(&["divergence", "b.json", "b.json", "--t", "0.3"], dir.path());
    assert_eq!(same["scalars"]["phi"].as_f64().unwrap(), 0.0);
}

#[test]
fn divergence_is_not_symmetric() {
    let dir = TempDir::new().unwrap();
    spgm(&["gen", "--dim", "3", "--seed", "8", "--count", "2", "--out", "m.json"], dir.path());
    let (_, ab) = structured(&["divergence", "m-0.json", "m-1.json", "--t", "0.3"], dir.path());
    let (_, ba) = structured(&["divergence", "m-1.json", "m-0.json", "--t", "0.3"], dir.path());
    let (x, y) = (ab["scalars"]["phi"].as_f64().unwrap(), ba["scalars"]["phi"].as_f64().unwrap());
    assert!(x > 0.0 && y > 0.0 && (x - y).abs() > 1e-6, "{x} {y}");
}

#[test]
fn barycenter_single_input_echoes() {
    let dir = TempDir::new().unwrap();
    spgm(&["gen", "--dim", "3", "--seed", "2", "--out", "a.json"], dir.path());
    let o = spgm(&["barycenter", "a.json", "--t", "0.4", "--out", "x.json"], dir.path());
    assert_eq!(code(&o), 0);
    let a = read_matrix(&dir.path().join("a.json"));
    let x = read_matrix(&dir.path().join("x.json"));
    for (p, q) in a.entries.iter().zip(&x.entries) {
        assert!((p[0] - q[0]).abs() <= 1e-8 && (p[1] - q[1]).abs() <= 1e-8);
    }
}

#[test]
fn barycenter_commuting_closed_form_with_check() {
    let dir = TempDir::new().unwrap();
    diag_file(dir.path(), "a.json", &[1.0]);
    diag_file(dir.path(), "b.json", &[9.0]);
    let (c, v) = structured(&["barycenter", "a.json", "b.json", "--t", "0.5", "--check", "--out", "x.json"], dir.path());
    assert_eq!(c, 0);
    assert_diag(&read_matrix(&dir.path().join("x.json")), &[4.0], 1e-8);
    assert_eq!(v["scalars"]["converged"], Value::Bool(true));
    assert_eq!(v["scalars"]["stationarity_holds"], Value::Bool(true));
    assert!(v["scalars"]["stationarity_residual"].as_f64().is_some());
}

#[test]
fn barycenter_weights_are_validated() {
    let dir = TempDir::new().unwrap();
    diag_file(dir.path(), "a.json", &[1.0]);
    diag_file(dir.path(), "b.json", &[9.0]);
    let run = |w: &str| spgm(&["barycenter", "a.json", "b.json", "--t", "0.5", "--weights", w], dir.path());
    assert_eq!(code(&run("0.5,0.6")), 2);
    assert_eq!(code(&run("-0.5,1.5")), 2);
    assert_eq!(code(&run("1.0")), 2);
    let o = run("0.5,0.5000001");
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("renormalized"));
}

#[test]
fn barycenter_iteration_budget_exits_four() {
    let dir = TempDir::new().unwrap();
    spgm(&["gen", "--dim", "4", "--cond", "100", "--seed", "3", "--count", "3", "--out", "m.json"], dir.path());
    let (c, v) = structured(&["barycenter", "m-0.json", "m-1.json", "m-2.json", "--t", "0.5", "--max-iters", "1"], dir.path());
    assert_eq!(c, 4);
    assert_eq!(v["scalars"]["converged"], Value::Bool(false));
    assert_eq!(v["scalars"]["stop_reason"], Value::String("max-iters-exceeded".into()));
}

#[test]
fn barycenter_rejects_endpoint_t() {
    let dir = TempDir::new().unwrap();
    diag_file(dir.path(), "a.json", &[1.0]);
    assert_eq!(code(&spgm(&["barycenter", "a.json", "--t", "1"], dir.path())), 2);
}

#[test]
fn gen_unit_matrix() {
    let dir = TempDir::new().unwrap();
    let o = spgm(&["gen", "--dim", "1", "--cond", "1", "--seed", "99"], dir.path());
    assert_eq!(code(&o), 0);
    let m = MatrixFile::parse(String::from_utf8_lossy(&o.stdout).trim()).unwrap();
    assert_eq!(m.dim, 1);
    assert!((m.entries[0][0] - 1.0).abs() <= 1e-15 && m.entries[0][1] == 0.0);
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = spgm(&["gen", "--dim", "4", "--cond", "1e3", "--seed", "17"], dir.path());
    let b = spgm(&["gen", "--dim", "4", "--cond", "1e3", "--seed", "17"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    let c = spgm(&["gen", "--dim", "4", "--cond", "1e3", "--seed", "18"], dir.path());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn gen_rejects_invalid_parameters() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&spgm(&["gen", "--dim", "0"], dir.path())), 2);
    assert_eq!(code(&spgm(&["gen", "--dim", "2", "--cond", "0.5"], dir.path())), 2);
}

#[test]
fn generated_files_feed_every_mean() {
    let dir = TempDir::new().unwrap();
    spgm(&["gen", "--dim", "3", "--cond", "100", "--seed", "5", "--count", "2", "--out", "m.json"], dir.path());
    for kind in ["arithmetic", "harmonic", "geometric", "spectral", "f", "wasserstein", "logeuclidean"] {
        let o = spgm(&["mean", kind, "m-0.json", "m-1.json", "--t", "0.3"], dir.path());
        assert_eq!(code(&o), 0, "{kind}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = spgm(&["mean", "renyi", "m-0.json", "m-1.json", "--t", "0.3", "--z", "0.8"], dir.path());
    assert_eq!(code(&o), 0);
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    spgm(&["gen", "--dim", "3", "--seed", "6", "--count", "3", "--out", "m.json"], dir.path());
    let args = ["barycenter", "m-0.json", "m-1.json", "m-2.json", "--t", "0.3", "--check"];
    let (_, a) = structured(&args, dir.path());
    let (_, b) = structured(&args, dir.path());
    assert_eq!(without_wall_time(a.clone()), without_wall_time(b));
    assert_eq!(a["inputs_digest"].as_str().unwrap().len(), 64);

    let vargs = ["verify", "--suite", "divergence", "--dims", "2", "--samples", "5", "--seed", "3"];
    let (_, a) = structured(&vargs, dir.path());
    let (_, b) = structured(&vargs, dir.path());
    assert_eq!(without_wall_time(a), without_wall_time(b));
}

#[test]
fn verify_rejects_zero_samples() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&spgm(&["verify", "--samples", "0"], dir.path())), 2);
    assert_eq!(code(&spgm(&["verify", "--dims", "0"], dir.path())), 2);
    assert_eq!(code(&spgm(&["verify", "--suite", "nope"], dir.path())), 2);
}

#[test]
fn corrupted_tolerance_fails_with_replay_bundle() {
    let dir = TempDir::new().unwrap();
    let o = spgm(
        &["verify", "--suite", "properties", "--dims", "2", "--samples", "3", "--tolerance-scale", "-1e6", "--out", "replay.json"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("FAIL") && text.contains("counterexample"));
    let bundles: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("replay.json")).unwrap()).unwrap();
    let first = &bundles.as_array().unwrap()[0];
    assert_eq!(first["seed"].as_u64(), Some(0));
    assert!(!first["inputs"].as_object().unwrap().is_empty());
    // the bundle inputs parse back as matrix files
    for m in first["inputs"].as_object().unwrap().values() {
        MatrixFile::parse(&m.to_string()).unwrap().to_hermitian().unwrap();
    }
}

#[test]
fn verify_small_run_passes() {
    let dir = TempDir::new().unwrap();
    let o = spgm(&["verify", "--suite", "all", "--dims", "2..4", "--samples", "50", "--seed", "7"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn matrix_files_round_trip(n in 1usize..=6, cond in 1.0f64..1e6, seed in any::<u64>()) {
        let m = MatrixFile::from_hermitian(random_spd(n, cond, seed).unwrap().as_hermitian());
        let back = MatrixFile::parse(&m.to_json()).unwrap();
        prop_assert_eq!(&back, &m);
        let again = MatrixFile::from_hermitian(&back.to_hermitian().unwrap());
        for (p, q) in again.entries.iter().zip(&m.entries) {
            prop_assert_eq!(p[0].to_bits(), q[0].to_bits());
            prop_assert_eq!(p[1].to_bits(), q[1].to_bits());
        }
    }
}
