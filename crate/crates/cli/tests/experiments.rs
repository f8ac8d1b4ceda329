use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srht_matmul::{approx_matmul, matmul_exact, spectral_norm, DenseMatrix};
use srht_matmul_cli::experiments::*;
use srht_matmul_cli::io::{load_matrix, save_matrix};
use srht_matmul_cli::{CliError, ExperimentConfig, Mode, Options};
use tempfile::TempDir;

fn cfg(mode: Mode, opts: Options) -> ExperimentConfig {
    ExperimentConfig::resolve(mode, &opts).unwrap()
}

fn gaussian(da: usize, m: usize) -> Options {
    Options {
        generator: Some("gaussian".into()),
        da: Some(da),
        m: Some(m),
        ..Default::default()
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn csv_bytes(run: &Theorem1Run) -> Vec<u8> {
    let mut buf = Vec::new();
    run.write_csv(&mut buf).unwrap();
    buf
}

#[test]
fn matrix_files_load_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let one = load_matrix(write(&dir, "one.txt", "1 1\n3.5\n")).unwrap();
    assert_eq!(one.data(), &[3.5]);
    let eye = load_matrix(write(&dir, "eye.txt", "2 2\n1 0\n0 1\n")).unwrap();
    assert_eq!(eye, DenseMatrix::identity(2).unwrap());

    let mut g = ChaCha8Rng::seed_from_u64(8);
    let m = DenseMatrix::from_fn(7, 5, |_, _| g.random_range(-1e3..1e3) * 10f64.powi(g.random_range(-20..20))).unwrap();
    let p = dir.path().join("m.txt");
    save_matrix(&m, &p).unwrap();
    assert_eq!(load_matrix(&p).unwrap(), m);

    assert!(matches!(
        load_matrix(write(&dir, "short.txt", "2 2\n1 0\n")),
        Err(CliError::Parse { .. })
    ));
    assert!(matches!(load_matrix(dir.path().join("missing")), Err(CliError::Io { .. })));
}

#[test]
fn theorem1_single_column_is_exact() {
    let run = run_verify_theorem1(&cfg(
        Mode::VerifyTheorem1,
        Options { trials: Some(1), n: Some(3), ..gaussian(4, 1) },
    ))
    .unwrap();
    let r = &run.records[0];
    assert_eq!(r.rel_spectral_error, 0.0);
    assert!(!r.exceeded);
    assert!(run.passed());
}

#[test]
fn theorem1_trials_match_the_library_pipeline() {
    let opts = Options { trials: Some(6), n: Some(40), seed: Some(500), db: Some(3), ..gaussian(5, 50) };
    let c = cfg(Mode::VerifyTheorem1, opts);
    let run = run_verify_theorem1(&c).unwrap();
    let (a, b) = (c.load_a().unwrap(), c.load_b().unwrap());
    let exact = matmul_exact(&a, &b).unwrap();
    let norm = |m: &DenseMatrix| spectral_norm(m, 1e-10, 10_000).unwrap();
    let scale = norm(&a) * norm(&b);
    for rec in &run.records {
        assert_eq!(rec.seed, 500 + rec.trial_index as u64);
        let (est, _) = approx_matmul(&a, &b, 40, rec.seed).unwrap();
        let err = norm(&est.sub(&exact).unwrap()) / scale;
        assert_eq!(err, rec.rel_spectral_error);
        assert_eq!(rec.exceeded, rec.rel_spectral_error > rec.bound_value);
    }
    let s = &run.summary;
    assert!(s.q50 <= s.q90 && s.q90 <= s.q99 && s.q99 <= s.max_error);
}

#[test]
fn theorem1_csv_is_deterministic_across_runs_and_threads() {
    let opts = Options { trials: Some(24), eps: Some(0.6), seed: Some(77), ..gaussian(6, 64) };
    let one = run_verify_theorem1(&cfg(Mode::VerifyTheorem1, opts.clone())).unwrap();
    let again = run_verify_theorem1(&cfg(Mode::VerifyTheorem1, opts.clone())).unwrap();
    let par = run_verify_theorem1(&cfg(Mode::VerifyTheorem1, Options { threads: Some(5), ..opts })).unwrap();
    assert_eq!(csv_bytes(&one), csv_bytes(&again));
    assert_eq!(csv_bytes(&one), csv_bytes(&par));
    let text = String::from_utf8(csv_bytes(&one)).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "trial_index,seed,rel_spectral_error,rel_frobenius_error,bound_value,exceeded,mu_observed"
    );
    assert_eq!(text.lines().count(), 25);
}

#[test]
fn theorem1_pass_rule() {
    let mut run = run_verify_theorem1(&cfg(
        Mode::VerifyTheorem1,
        Options { trials: Some(10), n: Some(8), ..gaussian(2, 8) },
    ))
    .unwrap();
    run.summary.exceed_fraction = 0.1;
    assert!(run.passed());
    run.summary.exceed_fraction = 0.2;
    assert!(!run.passed());
}

#[test]
fn theorem1_needs_a_sample_count() {
    let err = run_verify_theorem1(&cfg(Mode::VerifyTheorem1, gaussian(2, 8))).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn lemma2_tail_fractions_fall_with_t() {
    let opts = Options {
        generator: Some("spiky".into()),
        da: Some(6),
        m: Some(64),
        rank: Some(3),
        trials: Some(300),
        t_grid: Some("0.1,0.5,1,2,4".into()),
        ..Default::default()
    };
    let run = run_verify_lemma2(&cfg(Mode::VerifyLemma2, opts)).unwrap();
    for w in run.per_t.windows(2) {
        assert!(w[0].threshold < w[1].threshold);
        assert!(w[0].exceed_fraction >= w[1].exceed_fraction);
    }
    assert_eq!(run.records.len(), 300 * 5);
    assert!(run.passed());
}

#[test]
fn lemma2_coordinate_rows_flatten_exactly() {
    let opts = Options {
        generator: Some("coordinate".into()),
        da: Some(4),
        m: Some(64),
        trials: Some(20),
        ..Default::default()
    };
    let run = run_verify_lemma2(&cfg(Mode::VerifyLemma2, opts)).unwrap();
    assert_eq!(run.baseline_max_col_sqnorm, 1.0);
    for r in &run.records {
        assert!((r.max_col_sqnorm - 4.0 / 64.0).abs() < 1e-15);
    }
}

#[test]
fn lemma2_rejects_zero_input() {
    let dir = TempDir::new().unwrap();
    let z = write(&dir, "z.txt", "2 3\n0 0 0\n0 0 0\n");
    let err = run_verify_lemma2(&cfg(Mode::VerifyLemma2, Options { a: Some(z), ..Default::default() })).unwrap_err();
    assert!(matches!(err, CliError::Core(srht_matmul::Error::Domain(_))));
}

#[test]
fn coherence_of_a_coordinate_row() {
    let opts = Options {
        generator: Some("coordinate".into()),
        da: Some(1),
        m: Some(256),
        trials: Some(5),
        ..Default::default()
    };
    let run = run_coherence(&cfg(Mode::Coherence, opts.clone())).unwrap();
    assert_eq!(run.baseline.mu, 256.0);
    assert!(run.draws.iter().all(|d| d.mu == 1.0));

    let flat = run_coherence(&cfg(Mode::Coherence, Options { identity_rotation: true, ..opts })).unwrap();
    assert!(flat.draws.iter().all(|d| d.mu == flat.baseline.mu && d.k_a == flat.baseline.k_a));
}

#[test]
fn bound_reference_tuple() {
    let opts = Options { k: Some(1.0), m: Some(1024), n: Some(10_000), delta: Some(0.1), ..Default::default() };
    let run = run_bound(&cfg(Mode::Bound, opts)).unwrap();
    let (_, eps, _) = run.bound.unwrap();
    assert!((eps - 0.2263).abs() < 1e-4);
    assert!(format!("{run}").contains("2.2622733244"));
}

#[test]
fn sketch_single_column_is_exact() {
    let c = cfg(Mode::Sketch, Options { n: Some(4), seed: Some(3), db: Some(2), ..gaussian(3, 1) });
    let run = run_sketch(&c).unwrap();
    let exact = matmul_exact(&c.load_a().unwrap(), &c.load_b().unwrap()).unwrap();
    assert_eq!(run.estimate, exact);
}

#[test]
fn moments_single_column_passes() {
    let opts = Options { generator: Some("coordinate".into()), da: Some(1), m: Some(1), n: Some(2), ..Default::default() };
    let run = run_moments(&cfg(Mode::Moments, opts)).unwrap();
    assert!(run.checks.iter().all(|c| c.holds));
    assert!(run.passed());
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_srht-matmul"))
}

fn code(args: &[&str]) -> i32 {
    binary().args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn binary_exit_codes() {
    assert_eq!(code(&["bound", "--k", "1", "--m", "1024", "--n", "10000"]), 0);
    assert_eq!(code(&["bound", "--k", "1", "--m", "1024", "--n", "10000", "--delta", "0.5"]), 2);
    assert_eq!(code(&["verify-theorem1", "--gen", "nope", "--n", "3"]), 2);
    assert_eq!(code(&["sketch", "--a", "/definitely/missing.txt", "--n", "3"]), 3);
    assert_eq!(code(&["frobnicate"]), 2);
}

#[test]
fn binary_config_file_and_outputs() {
    let dir = TempDir::new().unwrap();
    let conf = write(&dir, "run.cfg", "gen = gaussian\nda = 3\nm = 16\nn = 5\ntrials = 4\n");
    let csv = dir.path().join("t.csv");
    let out = binary()
        .args(["verify-theorem1", "--config"])
        .arg(&conf)
        .args(["--trials", "3", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);

    let est = dir.path().join("est.txt");
    let out = binary()
        .args(["sketch", "--gen", "gaussian", "--da", "2", "--m", "1", "--n", "2", "--out"])
        .arg(&est)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("accumulation"));
    assert_eq!(load_matrix(Path::new(&est)).unwrap().shape(), (2, 2));
}
