//! Command-line front end. `dispatch` returns the process exit code:
//! 0 success, 1 usage, 2 numerical or validation failure, 3 I/O.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, ExperimentConfig};
use crate::cosamp::{cosamp, RecoveryProblem, DEFAULT_HALT_TOL, DEFAULT_MAX_ITER};
use crate::dictionary::io::{format_csv, write_atomic};
use crate::dictionary::{frame_diagnostics, load_matrix, parseval_frame, save_matrix, wavelet_dictionary, WaveletSpec};
use crate::ensembles::{row_selector, EnsembleKind, EnsembleSpec};
use crate::error::Error;
use crate::factorize::{factor, validate, FactorMethod, FactorOptions};
use crate::linalg::{condition_number, inverse};
use crate::matrix::Matrix;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "dictsense",
    version,
    about = "RIP-preserving sensing matrices for sparsifying dictionaries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a random Gaussian or Bernoulli matrix.
    Gen(GenArgs),
    /// Build the wavelet dictionary.
    Dict(DictArgs),
    /// Factor D = G·A·H and write G, H and a validation report.
    Factorize(FactorizeArgs),
    /// Form the sensing matrix S = 𝓔G⁻¹ and optionally measure signals.
    Sense(SenseArgs),
    /// Recover sparse coefficients with CoSaMP.
    Recover(RecoverArgs),
    /// Run a recovery-probability experiment.
    Experiment(ExperimentArgs),
    /// Empirical isometry probes.
    Probe(ProbeArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    kind: EnsembleKind,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DictArgs {
    /// Signal length (rows).
    #[arg(long, default_value_t = 128)]
    l: usize,
    /// Number of atoms (columns).
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    levels: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Replace D by its canonical Parseval frame.
    #[arg(long)]
    parseval: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FactorizeArgs {
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    a: PathBuf,
    #[arg(long, default_value = "spectral")]
    method: FactorMethod,
    /// Relative rank tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    completion_seed: Option<u64>,
    /// Orthonormal O for the tight-frame construction.
    #[arg(long)]
    orientation: Option<PathBuf>,
    #[arg(long)]
    out_g: PathBuf,
    #[arg(long)]
    out_h: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Fail (exit 2) when a validation metric exceeds this.
    #[arg(long, default_value_t = 1e-8)]
    check_tol: f64,
}

#[derive(Debug, Args)]
struct SenseArgs {
    #[arg(long)]
    g: PathBuf,
    /// Number of measurements.
    #[arg(long)]
    m: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Signals as columns of an l×c matrix.
    #[arg(long, requires = "out_z")]
    signals: Option<PathBuf>,
    #[arg(long, requires = "signals")]
    out_z: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RecoverArgs {
    /// Measurement operator (m×n), or a sensing matrix (m×l) when --dict is given.
    #[arg(long)]
    phi: PathBuf,
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Measurements as columns of an m×c matrix.
    #[arg(long)]
    z: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_HALT_TOL)]
    halt_tol: f64,
    /// Allow 3k > m.
    #[arg(long)]
    relaxed: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    preset: Option<String>,
    /// key=value file; flags override it, it overrides the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `wavelet` or a dictionary file.
    #[arg(long)]
    dict: Option<String>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated sparsity levels.
    #[arg(long)]
    k: Option<String>,
    /// Comma-separated CS ratios.
    #[arg(long)]
    ratios: Option<String>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    halt_tol: Option<f64>,
    #[arg(long)]
    redraw_a: bool,
    #[arg(long)]
    parseval: bool,
    /// `signal` or `coefficient`.
    #[arg(long)]
    measurement: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Results CSV, `-` for standard output.
    #[arg(long)]
    out: PathBuf,
    /// SVG plot path (one file per k).
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProbeArgs {
    #[command(subcommand)]
    kind: ProbeKind,
}

#[derive(Debug, Subcommand)]
enum ProbeKind {
    /// Mean of ‖𝓔Ax‖²·(n/m) over random unit vectors.
    Concentration {
        #[arg(long, default_value = "gaussian")]
        ensemble: EnsembleKind,
        #[arg(long, default_value_t = 128)]
        l: usize,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        m: usize,
        #[arg(long, default_value_t = 5000)]
        vectors: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Empirical restricted-isometry deviation of an operator.
    Rip {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Format { .. } => EXIT_IO,
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult = std::result::Result<(), Failure>;

fn is_stdout(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn emit_text(path: &Path, text: &str) -> CliResult {
    if is_stdout(path) {
        io::stdout().lock().write_all(text.as_bytes())?;
    } else {
        write_atomic(path, text.as_bytes())?;
    }
    Ok(())
}

/// CSV text on standard output, otherwise CSMX or CSV by extension.
fn emit_matrix(path: &Path, m: &Matrix) -> CliResult {
    if is_stdout(path) {
        emit_text(path, &format_csv(m))
    } else {
        save_matrix(path, m).map_err(Failure::from)
    }
}

fn log(command: &str, lines: &[(&str, String)]) {
    for (k, v) in lines {
        eprintln!("[{command}] {k}={v}");
    }
}

fn resolve_seed(command: &str, seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = fresh_seed();
        eprintln!("[{command}] no --seed given; generated seed {s}");
        s
    })
}

fn fresh_seed() -> u64 {
    use std::collections::hash_map::RandomState;
    use std::hash::{BuildHasher, Hasher};
    let mut h = RandomState::new().build_hasher();
    h.write_u128(
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos()),
    );
    h.finish()
}

fn gen(a: GenArgs) -> CliResult {
    let seed = resolve_seed("gen", a.seed);
    log(
        "gen",
        &[
            ("kind", a.kind.name().into()),
            ("rows", a.rows.to_string()),
            ("cols", a.cols.to_string()),
            ("seed", seed.to_string()),
            ("out", a.out.display().to_string()),
        ],
    );
    let m = EnsembleSpec::new(a.kind, a.rows, a.cols, seed).sample()?;
    emit_matrix(&a.out, &m)
}

fn dict(a: DictArgs) -> CliResult {
    let seed = resolve_seed("dict", a.seed);
    log(
        "dict",
        &[
            ("l", a.l.to_string()),
            ("n", a.n.to_string()),
            ("levels", a.levels.to_string()),
            ("seed", seed.to_string()),
            ("parseval", a.parseval.to_string()),
            ("out", a.out.display().to_string()),
        ],
    );
    let mut d = wavelet_dictionary(&WaveletSpec::new(a.l, a.n, a.levels, seed))?;
    if a.parseval {
        d = parseval_frame(&d)?;
    }
    let diag = frame_diagnostics(&d)?;
    log(
        "dict",
        &[
            ("tight_frame_err", format!("{:e}", diag.tight_frame_err)),
            ("column_norm_max_dev", format!("{:e}", diag.column_norm_max_dev)),
            ("rank", diag.rank.to_string()),
        ],
    );
    emit_matrix(&a.out, &d)
}

fn factorize(a: FactorizeArgs) -> CliResult {
    log(
        "factorize",
        &[
            ("dict", a.dict.display().to_string()),
            ("a", a.a.display().to_string()),
            ("method", a.method.name().into()),
            ("tol", a.tol.map_or("default".into(), |t| t.to_string())),
            (
                "completion_seed",
                a.completion_seed.map_or("none".into(), |s| s.to_string()),
            ),
            (
                "orientation",
                a.orientation
                    .as_ref()
                    .map_or("identity".into(), |p| p.display().to_string()),
            ),
            ("check_tol", a.check_tol.to_string()),
        ],
    );
    let d = load_matrix(&a.dict)?;
    let am = load_matrix(&a.a)?;
    let opts = FactorOptions {
        tol: a.tol,
        completion_seed: a.completion_seed,
        orientation: a.orientation.as_ref().map(load_matrix).transpose()?,
    };
    let f = factor(a.method, &d, &am, &opts)?;
    let r = validate(&f, &d)?;
    let report = format!(
        "method,rank,residual_rel,h_orthonormality_err,g_condition_number,rank_d,rank_a\n{},{},{:e},{:e},{:e},{},{}\n",
        f.method.name(),
        f.rank,
        r.residual_rel,
        r.h_orthonormality_err,
        r.g_condition_number,
        r.rank_d,
        r.rank_a
    );
    eprint!("{report}");
    if let Some(path) = &a.report {
        emit_text(path, &report)?;
    }
    if !r.passes(a.check_tol) {
        return Err(Failure {
            code: EXIT_NUMERICAL,
            message: format!(
                "validation failed: residual {:e}, H orthonormality {:e} (tolerance {:e})",
                r.residual_rel, r.h_orthonormality_err, a.check_tol
            ),
        });
    }
    emit_matrix(&a.out_g, &f.g)?;
    emit_matrix(&a.out_h, &f.h)
}

fn sense(a: SenseArgs) -> CliResult {
    let seed = resolve_seed("sense", a.seed);
    log(
        "sense",
        &[
            ("g", a.g.display().to_string()),
            ("m", a.m.to_string()),
            ("seed", seed.to_string()),
        ],
    );
    let g = load_matrix(&a.g)?;
    let cond = condition_number(&g)?;
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::Numerical(format!("G is numerically singular (condition number {cond:e})")).into());
    }
    let e = row_selector(a.m, g.rows(), seed)?;
    let s = inverse(&g)?.select_rows(e.indices());
    log("sense", &[("rows", format!("{:?}", e.indices()))]);
    emit_matrix(&a.out, &s)?;
    if let (Some(signals), Some(out_z)) = (&a.signals, &a.out_z) {
        let x = load_matrix(signals)?;
        emit_matrix(out_z, &s.try_matmul(&x)?)?;
    }
    Ok(())
}

fn recover(a: RecoverArgs) -> CliResult {
    log(
        "recover",
        &[
            ("phi", a.phi.display().to_string()),
            (
                "dict",
                a.dict.as_ref().map_or("none".into(), |p| p.display().to_string()),
            ),
            ("z", a.z.display().to_string()),
            ("k", a.k.to_string()),
            ("max_iter", a.max_iter.to_string()),
            ("halt_tol", a.halt_tol.to_string()),
            ("relaxed", a.relaxed.to_string()),
        ],
    );
    let mut phi = load_matrix(&a.phi)?;
    if let Some(d) = &a.dict {
        phi = phi.try_matmul(&load_matrix(d)?)?;
    }
    let mut z = load_matrix(&a.z)?;
    if z.rows() != phi.rows() && z.cols() == phi.rows() {
        z = z.transpose();
    }
    let mut columns = Vec::with_capacity(z.cols());
    for c in 0..z.cols() {
        let zc = z.col(c);
        let mut p = RecoveryProblem::new(&phi, &zc, a.k)
            .with_max_iter(a.max_iter)
            .with_halt_tol(a.halt_tol);
        p.allow_underdetermined = a.relaxed;
        let out = cosamp(&p)?;
        log(
            "recover",
            &[(
                "column",
                format!(
                    "{c} iterations={} residual={:e} converged={} min_norm={}",
                    out.iterations, out.final_residual, out.converged, out.min_norm_used
                ),
            )],
        );
        columns.push(out.x_hat);
    }
    emit_matrix(&a.out, &Matrix::from_columns(phi.cols(), &columns))
}

fn read_config_file(path: &Path, config: &mut ExperimentConfig) -> std::result::Result<bool, Failure> {
    let text = fs::read_to_string(path)?;
    let mut seed_set = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        config
            .set(k.trim(), v.trim())
            .map_err(|e| usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
        seed_set |= k.trim() == "seed";
    }
    Ok(seed_set)
}

fn experiment(a: ExperimentArgs) -> CliResult {
    let mut config = match &a.preset {
        Some(p) => ExperimentConfig::preset(p).map_err(|e| usage(e.to_string()))?,
        None => ExperimentConfig::default(),
    };
    let mut seed_set = false;
    if let Some(path) = &a.config {
        seed_set = read_config_file(path, &mut config)?;
    }
    let flags: [(&str, Option<String>); 15] = [
        ("dict", a.dict.clone()),
        ("levels", a.levels.map(|v| v.to_string())),
        ("ensemble", a.ensemble.clone()),
        ("method", a.method.clone()),
        ("l", a.l.map(|v| v.to_string())),
        ("n", a.n.map(|v| v.to_string())),
        ("k", a.k.clone()),
        ("ratios", a.ratios.clone()),
        ("grid_points", a.grid_points.map(|v| v.to_string())),
        ("trials", a.trials.map(|v| v.to_string())),
        ("seed", a.seed.map(|v| v.to_string())),
        ("max_iter", a.max_iter.map(|v| v.to_string())),
        ("halt_tol", a.halt_tol.map(|v| v.to_string())),
        ("redraw_a", a.redraw_a.then(|| "true".into())),
        ("parseval", a.parseval.then(|| "true".into())),
    ];
    for (key, value) in flags.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k, v))) {
        config
            .set(key, value)
            .map_err(|e| usage(format!("--{}: {e}", key.replace('_', "-"))))?;
    }
    if let Some(m) = &a.measurement {
        config.set("measurement", m).map_err(|e| usage(e.to_string()))?;
    }
    if !seed_set && a.seed.is_none() {
        config.base_seed = resolve_seed("experiment", None);
    }
    config.validate().map_err(|e| usage(e.to_string()))?;

    let jobs = a.jobs.unwrap_or(0);
    let mut lines: Vec<(&str, String)> = vec![("preset", a.preset.clone().unwrap_or_else(|| "none".into()))];
    let described = config.describe();
    for l in described.lines() {
        if let Some((k, v)) = l.split_once('=') {
            lines.push((k, v.to_string()));
        }
    }
    lines.push(("jobs", if jobs == 0 { "all".into() } else { jobs.to_string() }));
    lines.push(("out", a.out.display().to_string()));
    log("experiment", &lines);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| usage(format!("--jobs: {e}")))?;
    let result = pool.install(|| bench::run_curve(&config))?;
    log(
        "experiment",
        &[
            ("wall_time_s", format!("{:.3}", result.wall_time.as_secs_f64())),
            ("max_embedding_gap", format!("{:e}", result.max_embedding_gap)),
            (
                "max_probability_gap",
                result.max_gap().map_or("n/a".into(), |g| format!("{g:.6}")),
            ),
        ],
    );
    for (k, lo, hi) in result.monotonicity_flags() {
        eprintln!("[experiment] note: benchmark probability drops between m={lo} and m={hi} at k={k}");
    }
    if result.max_embedding_gap > 1e-8 {
        eprintln!(
            "[experiment] warning: embedding gap {:e} exceeds 1e-8",
            result.max_embedding_gap
        );
    }
    emit_text(&a.out, &bench::curve_csv(&result))?;
    if let Some(svg) = &a.svg {
        for p in bench::write_svgs(&result, svg)? {
            eprintln!("[experiment] wrote {}", p.display());
        }
    }
    Ok(())
}

fn probe(a: ProbeArgs) -> CliResult {
    match a.kind {
        ProbeKind::Concentration {
            ensemble,
            l,
            n,
            m,
            vectors,
            seed,
            out,
        } => {
            let seed = resolve_seed("probe", seed);
            log(
                "probe",
                &[
                    ("kind", "concentration".into()),
                    ("ensemble", ensemble.name().into()),
                    ("l", l.to_string()),
                    ("n", n.to_string()),
                    ("m", m.to_string()),
                    ("vectors", vectors.to_string()),
                    ("seed", seed.to_string()),
                ],
            );
            let s = bench::concentration_probe(&EnsembleSpec::new(ensemble, l, n, seed), m, vectors, seed)?;
            emit_text(
                &out,
                &format!(
                    "samples,mean,max_deviation\n{},{:.6},{:.6}\n",
                    s.samples, s.mean, s.max_deviation
                ),
            )
        }
        ProbeKind::Rip {
            phi,
            k,
            samples,
            seed,
            out,
        } => {
            let seed = resolve_seed("probe", seed);
            log(
                "probe",
                &[
                    ("kind", "rip".into()),
                    ("phi", phi.display().to_string()),
                    ("k", k.to_string()),
                    ("samples", samples.to_string()),
                    ("seed", seed.to_string()),
                ],
            );
            let r = bench::rip_probe(&load_matrix(&phi)?, k, samples, seed)?;
            emit_text(
                &out,
                &format!(
                    "k,samples,delta_hat,ratio_mean\n{},{},{:.6},{:.6}\n",
                    r.k, r.samples, r.delta_hat, r.ratio_mean
                ),
            )
        }
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            eprint!("{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Dict(a) => dict(a),
        Command::Factorize(a) => factorize(a),
        Command::Sense(a) => sense(a),
        Command::Recover(a) => recover(a),
        Command::Experiment(a) => experiment(a),
        Command::Probe(a) => probe(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
