use std::path::Path;
use std::process::Command;

use dictsense::cli::{dispatch, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use dictsense::dictionary::{read_matrix, write_matrix};
use dictsense::ensembles::{random_orthonormal, EnsembleKind, EnsembleSpec};
use dictsense::Matrix;

fn run(args: &[&str]) -> i32 {
    dispatch(std::iter::once("dictsense").chain(args.iter().copied()))
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dictsense"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn gen_happy_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "a.csmx");
    let code = run(&[
        "gen", "--kind", "gaussian", "--rows", "128", "--cols", "1024", "--seed", "7", "--out", &out,
    ]);
    assert_eq!(code, EXIT_OK);
    let a = read_matrix(&out).unwrap();
    assert_eq!(a.shape(), (128, 1024));
    assert_eq!(
        a,
        EnsembleSpec::new(EnsembleKind::Gaussian, 128, 1024, 7)
            .sample()
            .unwrap()
    );
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(
        run(&["gen", "--kind", "gaussian", "--rows", "2", "--cols", "2", "--bogus", "--out", "x"]),
        EXIT_USAGE
    );
    assert_eq!(run(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(
        run(&["gen", "--kind", "cauchy", "--rows", "2", "--cols", "2", "--out", "x"]),
        EXIT_USAGE
    );
    assert_eq!(run(&["experiment", "--preset", "nope", "--out", "x.csv"]), EXIT_USAGE);
    assert_eq!(run(&["--help"]), EXIT_OK);
}

#[test]
fn rank_mismatch_exits_two_and_names_both_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let q = random_orthonormal(6, 1).unwrap();
    let d = q
        .leading_cols(5)
        .matmul_t(&q.leading_cols(5))
        .hstack(&Matrix::zeros(6, 4));
    let a = EnsembleSpec::new(EnsembleKind::Gaussian, 6, 10, 2).sample().unwrap();
    write_matrix(dir.path().join("d.csmx"), &d).unwrap();
    write_matrix(dir.path().join("a.csmx"), &a).unwrap();
    let (dp, ap, g, h, rep) = (
        p(dir.path(), "d.csmx"),
        p(dir.path(), "a.csmx"),
        p(dir.path(), "g.csmx"),
        p(dir.path(), "h.csmx"),
        p(dir.path(), "rep.csv"),
    );
    let args = [
        "factorize",
        "--dict",
        &dp,
        "--a",
        &ap,
        "--method",
        "spectral",
        "--out-g",
        &g,
        "--out-h",
        &h,
        "--report",
        &rep,
    ];
    assert_eq!(run(&args), EXIT_NUMERICAL);
    let out = bin(&args);
    assert_eq!(out.status.code(), Some(EXIT_NUMERICAL));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("rank(D) = 5") && stderr.contains("rank(A) = 6"),
        "{stderr}"
    );
    assert!(!Path::new(&g).exists() && !Path::new(&h).exists());
}

#[test]
fn factorize_writes_outputs_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let (dp, ap) = (p(dir.path(), "d.csmx"), p(dir.path(), "a.csmx"));
    assert_eq!(
        run(&["dict", "--l", "16", "--n", "64", "--levels", "2", "--seed", "3", "--out", &dp]),
        EXIT_OK
    );
    assert_eq!(
        run(&[
            "gen",
            "--kind",
            "bernoulli",
            "--rows",
            "16",
            "--cols",
            "64",
            "--seed",
            "4",
            "--out",
            &ap
        ]),
        EXIT_OK
    );
    for method in ["spectral", "gram_schmidt"] {
        let (g, h, rep) = (
            p(dir.path(), "g.csv"),
            p(dir.path(), "h.csmx"),
            p(dir.path(), "rep.csv"),
        );
        let code = run(&[
            "factorize",
            "--dict",
            &dp,
            "--a",
            &ap,
            "--method",
            method,
            "--out-g",
            &g,
            "--out-h",
            &h,
            "--report",
            &rep,
        ]);
        assert_eq!(code, EXIT_OK, "{method}");
        let report = std::fs::read_to_string(&rep).unwrap();
        assert!(report.starts_with("method,rank,residual_rel"));
        assert!(report.lines().nth(1).unwrap().starts_with(method));
        let gm = dictsense::dictionary::load_matrix(&g).unwrap();
        let hm = read_matrix(&h).unwrap();
        assert_eq!((gm.shape(), hm.shape()), ((16, 16), (64, 64)));
    }
    // The wavelet dictionary is not tight.
    let code = run(&[
        "factorize",
        "--dict",
        &dp,
        "--a",
        &ap,
        "--method",
        "tight_frame",
        "--out-g",
        &p(dir.path(), "g2.csmx"),
        "--out-h",
        &p(dir.path(), "h2.csmx"),
    ]);
    assert_eq!(code, EXIT_NUMERICAL);
}

#[test]
fn io_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = p(dir.path(), "missing.csmx");
    let out = p(dir.path(), "x.csmx");
    assert_eq!(
        run(&[
            "factorize",
            "--dict",
            &missing,
            "--a",
            &missing,
            "--out-g",
            &out,
            "--out-h",
            &out
        ]),
        EXIT_IO
    );
    let bad = dir.path().join("bad.csmx");
    std::fs::write(&bad, b"CSMX\x01\x00\x00\x00\x02").unwrap();
    let bad = bad.to_string_lossy().into_owned();
    assert_eq!(
        run(&["probe", "rip", "--phi", &bad, "--k", "2", "--seed", "1"]),
        EXIT_IO
    );
    let nodir = p(dir.path(), "no/such/dir/out.csmx");
    assert_eq!(
        run(&["gen", "--kind", "gaussian", "--rows", "2", "--cols", "3", "--seed", "1", "--out", &nodir]),
        EXIT_IO
    );
}

#[test]
fn sense_and_recover_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (dp, ap, g, h) = (
        p(dir.path(), "d.csmx"),
        p(dir.path(), "a.csmx"),
        p(dir.path(), "g.csmx"),
        p(dir.path(), "h.csmx"),
    );
    assert_eq!(
        run(&["dict", "--l", "32", "--n", "96", "--levels", "2", "--seed", "5", "--out", &dp]),
        EXIT_OK
    );
    assert_eq!(
        run(&["gen", "--kind", "gaussian", "--rows", "32", "--cols", "96", "--seed", "6", "--out", &ap]),
        EXIT_OK
    );
    assert_eq!(
        run(&["factorize", "--dict", &dp, "--a", &ap, "--out-g", &g, "--out-h", &h]),
        EXIT_OK
    );

    // A 1-sparse coefficient vector synthesized through D.
    let d = read_matrix(&dp).unwrap();
    let mut x = vec![0.0; 96];
    x[40] = 0.75;
    let signal = Matrix::from_columns(32, &[d.mul_vec(&x)]);
    let sig = p(dir.path(), "signal.csv");
    dictsense::dictionary::write_csv(&sig, &signal).unwrap();

    let (s, z, xh) = (
        p(dir.path(), "s.csmx"),
        p(dir.path(), "z.csv"),
        p(dir.path(), "xhat.csv"),
    );
    assert_eq!(
        run(&[
            "sense",
            "--g",
            &g,
            "--m",
            "24",
            "--seed",
            "9",
            "--out",
            &s,
            "--signals",
            &sig,
            "--out-z",
            &z
        ]),
        EXIT_OK
    );
    assert_eq!(read_matrix(&s).unwrap().shape(), (24, 32));
    assert_eq!(
        run(&["recover", "--phi", &s, "--dict", &dp, "--z", &z, "--k", "1", "--out", &xh]),
        EXIT_OK
    );
    let got = dictsense::dictionary::read_csv(&xh).unwrap();
    assert_eq!(got.shape(), (96, 1));
    assert!((got[(40, 0)] - 0.75).abs() <= 1e-9);
    // k too large for the measurements without --relaxed
    assert_eq!(
        run(&["recover", "--phi", &s, "--dict", &dp, "--z", &z, "--k", "9", "--out", &xh]),
        EXIT_NUMERICAL
    );
    assert_eq!(
        run(&[
            "recover",
            "--phi",
            &s,
            "--dict",
            &dp,
            "--z",
            &z,
            "--k",
            "9",
            "--relaxed",
            "--out",
            &xh
        ]),
        EXIT_OK
    );
}

#[test]
fn experiment_is_deterministic_and_writes_svgs() {
    let dir = tempfile::tempdir().unwrap();
    let (c1, c2, svg) = (
        p(dir.path(), "c1.csv"),
        p(dir.path(), "c2.csv"),
        p(dir.path(), "curve.svg"),
    );
    let base = [
        "experiment",
        "--preset",
        "desk-wavelet-gaussian",
        "--trials",
        "20",
        "--grid-points",
        "3",
        "--seed",
        "5",
    ];
    let mut a1 = base.to_vec();
    a1.extend(["--out", &c1, "--svg", &svg, "--jobs", "1"]);
    let mut a2 = base.to_vec();
    a2.extend(["--out", &c2, "--jobs", "3"]);
    assert_eq!(run(&a1), EXIT_OK);
    assert_eq!(run(&a2), EXIT_OK);
    let t1 = std::fs::read(&c1).unwrap();
    assert_eq!(t1, std::fs::read(&c2).unwrap());
    assert_eq!(String::from_utf8(t1).unwrap().lines().count(), 1 + 2 * 3 * 3);
    for k in [4, 6, 8] {
        let f = dir.path().join(format!("curve-k{k}.svg"));
        assert!(std::fs::read_to_string(f).unwrap().contains("<polyline"));
    }
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    std::fs::write(&cfg, "# desk run\ntrials = 3\nk = 4\nratios = 0.25\nseed = 11\n").unwrap();
    let cfg = cfg.to_string_lossy().into_owned();
    let out = p(dir.path(), "c.csv");
    assert_eq!(run(&["experiment", "--config", &cfg, "--out", &out]), EXIT_OK);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(
        text.lines().nth(1).unwrap().starts_with("ours,4,64,0.250000,3,"),
        "{text}"
    );
    assert_eq!(
        run(&["experiment", "--config", &cfg, "--trials", "2", "--out", &out]),
        EXIT_OK
    );
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(
        text.lines().nth(1).unwrap().starts_with("ours,4,64,0.250000,2,"),
        "{text}"
    );

    std::fs::write(dir.path().join("bad.conf"), "trials 3\n").unwrap();
    assert_eq!(
        run(&["experiment", "--config", &p(dir.path(), "bad.conf"), "--out", &out]),
        EXIT_USAGE
    );
}

#[test]
fn stdout_output_and_generated_seed() {
    let out = bin(&[
        "gen",
        "--kind",
        "bernoulli",
        "--rows",
        "2",
        "--cols",
        "4",
        "--seed",
        "1",
        "--out",
        "-",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("[gen] seed=1"));

    let first = bin(&["gen", "--kind", "gaussian", "--rows", "3", "--cols", "5", "--out", "-"]);
    let stderr = String::from_utf8_lossy(&first.stderr).into_owned();
    let seed = stderr
        .split("generated seed ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .expect("seed printed")
        .to_string();
    let again = bin(&[
        "gen", "--kind", "gaussian", "--rows", "3", "--cols", "5", "--seed", &seed, "--out", "-",
    ]);
    assert_eq!(first.stdout, again.stdout);
}

#[test]
fn probes_report_csv() {
    let out = bin(&[
        "probe",
        "concentration",
        "--l",
        "32",
        "--n",
        "128",
        "--m",
        "16",
        "--vectors",
        "200",
        "--seed",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("samples,mean,max_deviation\n200,"));
}
