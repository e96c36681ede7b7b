//! Monte-Carlo recovery experiments and empirical isometry probes.

mod config;
mod probe;
mod report;

pub use config::{DictSource, ExperimentConfig, MeasurementModel, PRESETS};
pub use probe::{concentration_probe, concentration_probe_matrix, rip_probe, ConcentrationSummary, RipProbeResult};
pub use report::{curve_csv, curve_svg, svg_paths, write_csv, write_svgs, CSV_HEADER};

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::cosamp::{cosamp, recovery_success, RecoveryProblem};
use crate::dictionary::{load_matrix, parseval_frame, wavelet_dictionary, WaveletSpec};
use crate::ensembles::{derive_seed, row_selector, sparse_vector, tags, EnsembleSpec, RowSelector};
use crate::error::{Error, Result};
use crate::factorize::{embedding_gap, factor, sensing_matrix, FactorOptions, Factorization};
use crate::matrix::Matrix;

/// Fraction of trials on which the two sides of `SD = 𝓔AH` are compared.
pub const SPOT_CHECK_EVERY: usize = 100;

/// Builds the experiment's dictionary (before any Parseval normalization).
pub fn build_dictionary(config: &ExperimentConfig) -> Result<Matrix> {
    let d = match &config.dict_source {
        DictSource::Wavelet { levels } => wavelet_dictionary(&WaveletSpec::new(
            config.l,
            config.n,
            *levels,
            derive_seed(config.base_seed, 0, tags::DICTIONARY),
        ))?,
        DictSource::File(Some(path)) => load_matrix(path)?,
        DictSource::File(None) => return Err(Error::param("dictionary file required")),
    };
    if d.shape() != (config.l, config.n) {
        return Err(Error::dim(format!(
            "dictionary is {}x{}, config expects {}x{}",
            d.rows(),
            d.cols(),
            config.l,
            config.n
        )));
    }
    Ok(d)
}

/// `A` and its factorization against `D`, plus the operators both
/// formulations select rows from.
#[derive(Debug, Clone)]
pub struct Instance {
    pub a: Matrix,
    pub factorization: Factorization,
    /// `G⁻¹D` (= `AH`).
    pub embedded: Matrix,
}

impl Instance {
    pub fn new(config: &ExperimentConfig, d: &Matrix, index: u64) -> Result<Self> {
        let seed = derive_seed(config.base_seed, index, tags::ENSEMBLE);
        let a = EnsembleSpec::new(config.ensemble_kind, config.l, config.n, seed).sample()?;
        let factorization = factor(config.factor_method, d, &a, &FactorOptions::default())?;
        // Rejects a numerically singular G once, up front.
        sensing_matrix(&factorization, &RowSelector::full(config.l))?;
        let embedded = factorization.embedded_dictionary(d);
        Ok(Instance {
            a,
            factorization,
            embedded,
        })
    }
}

/// Everything fixed across the trials of a curve.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    /// Dictionary actually factored (Parseval-normalized when requested).
    pub d: Matrix,
    /// Shared instance; `None` when `A` is redrawn per trial.
    pub instance: Option<Instance>,
}

impl Experiment {
    pub fn prepare(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let mut d = build_dictionary(config)?;
        if config.parseval {
            d = parseval_frame(&d)?;
        }
        let instance = if config.redraw_a {
            None
        } else {
            Some(Instance::new(config, &d, 0)?)
        };
        Ok(Experiment {
            config: config.clone(),
            d,
            instance,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
    Error,
}

impl Outcome {
    fn from_result(r: Result<bool>) -> Self {
        match r {
            Ok(true) => Outcome::Success,
            Ok(false) => Outcome::Failure,
            Err(_) => Outcome::Error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub ours: Outcome,
    pub benchmark: Outcome,
    /// `‖SD − 𝓔AH‖_F/‖D‖_F` when this trial was spot-checked.
    pub embedding_gap: Option<f64>,
}

fn solve(config: &ExperimentConfig, phi: &Matrix, z: &[f64], k: usize, x: &[f64]) -> Result<bool> {
    let problem = RecoveryProblem::new(phi, z, k)
        .with_max_iter(config.max_iter)
        .with_halt_tol(config.halt_tol)
        .relaxed();
    let out = cosamp(&problem)?;
    Ok(recovery_success(&out.x_hat, x, x.len()))
}

/// One trial at sparsity `k` with `m` measurements. The sparse vector and
/// selector seeds depend only on `(base_seed, trial_index)`, so every point
/// of a curve reuses the same draws.
pub fn run_trial(exp: &Experiment, k: usize, m: usize, trial_index: usize) -> Result<TrialOutcome> {
    let config = &exp.config;
    if k > m || m > config.l || m == 0 {
        return Err(Error::param(format!(
            "trial needs k <= m <= l, got k={k}, m={m}, l={}",
            config.l
        )));
    }
    let t = trial_index as u64;
    let x = sparse_vector(config.n, k, derive_seed(config.base_seed, t, tags::SPARSE_VECTOR))?.to_dense();
    let e = row_selector(m, config.l, derive_seed(config.base_seed, t, tags::SELECTOR))?;

    let redrawn;
    let inst = match &exp.instance {
        Some(i) => i,
        None => {
            redrawn = Instance::new(config, &exp.d, t + 1);
            match &redrawn {
                Ok(i) => i,
                Err(_) => {
                    return Ok(TrialOutcome {
                        ours: Outcome::Error,
                        benchmark: Outcome::Error,
                        embedding_gap: None,
                    })
                }
            }
        }
    };

    let bench_phi = inst.a.select_rows(e.indices());
    let z_coef = bench_phi.mul_vec(&x);
    let ours_phi = inst.embedded.select_rows(e.indices());
    let z_ours = match config.measurement {
        MeasurementModel::Signal => {
            let signal = exp.d.mul_vec(&x);
            inst.factorization.g_inv.select_rows(e.indices()).mul_vec(&signal)
        }
        MeasurementModel::Coefficient => z_coef.clone(),
    };

    let embedding_gap = if trial_index.is_multiple_of(SPOT_CHECK_EVERY) {
        embedding_gap(&inst.factorization, &exp.d, &e).ok()
    } else {
        None
    };
    Ok(TrialOutcome {
        ours: Outcome::from_result(solve(config, &ours_phi, &z_ours, k, &x)),
        benchmark: Outcome::from_result(solve(config, &bench_phi, &z_coef, k, &x)),
        embedding_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MethodTally {
    pub trials_run: usize,
    pub successes: usize,
    pub errors: usize,
}

impl MethodTally {
    fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Success => {
                self.trials_run += 1;
                self.successes += 1;
            }
            Outcome::Failure => self.trials_run += 1,
            Outcome::Error => self.errors += 1,
        }
    }

    /// Success frequency over non-error trials; `None` when no trial ran.
    pub fn probability(&self) -> Option<f64> {
        (self.trials_run > 0).then(|| self.successes as f64 / self.trials_run as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub k: usize,
    pub m: usize,
    pub cs_ratio: f64,
    pub ours: MethodTally,
    pub benchmark: MethodTally,
    /// Trials not run because `k > m`.
    pub skipped: usize,
}

impl PointResult {
    /// `|p_ours − p_benchmark|` when both are defined.
    pub fn gap(&self) -> Option<f64> {
        Some((self.ours.probability()? - self.benchmark.probability()?).abs())
    }
}

#[derive(Debug, Clone)]
pub struct CurveResult {
    pub config: ExperimentConfig,
    pub points: Vec<PointResult>,
    /// Largest spot-checked `‖SD − 𝓔AH‖_F/‖D‖_F`.
    pub max_embedding_gap: f64,
    pub wall_time: Duration,
}

impl CurveResult {
    /// Largest `|p_ours − p_benchmark|` over points where both are defined.
    pub fn max_gap(&self) -> Option<f64> {
        self.points.iter().filter_map(PointResult::gap).reduce(f64::max)
    }

    /// Adjacent grid points where the benchmark probability drops by more
    /// than a two-sided 99% binomial band, as `(k, m_low, m_high)`.
    pub fn monotonicity_flags(&self) -> Vec<(usize, usize, usize)> {
        let mut flags = Vec::new();
        for pair in self.points.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.k != b.k {
                continue;
            }
            if let (Some(p), Some(q)) = (a.benchmark.probability(), b.benchmark.probability()) {
                let var = p * (1.0 - p) / a.benchmark.trials_run as f64 + q * (1.0 - q) / b.benchmark.trials_run as f64;
                if p - q > 2.576 * var.sqrt() {
                    flags.push((a.k, a.m, b.m));
                }
            }
        }
        flags
    }
}

pub fn run_curve(config: &ExperimentConfig) -> Result<CurveResult> {
    let exp = Experiment::prepare(config)?;
    run_prepared(&exp)
}

/// Runs every `(k, ρ)` point; trials execute in parallel and are reduced in
/// trial order.
pub fn run_prepared(exp: &Experiment) -> Result<CurveResult> {
    let start = Instant::now();
    let config = &exp.config;
    let mut points = Vec::new();
    let mut max_embedding_gap = 0.0f64;
    for &k in &config.k_list {
        for ratio in config.ratios_for(k) {
            let m = config.measurements_for(ratio);
            let mut point = PointResult {
                k,
                m,
                cs_ratio: ratio,
                ours: MethodTally::default(),
                benchmark: MethodTally::default(),
                skipped: 0,
            };
            if k > m {
                point.skipped = config.trials;
                points.push(point);
                continue;
            }
            let outcomes: Vec<Result<TrialOutcome>> = (0..config.trials)
                .into_par_iter()
                .map(|t| run_trial(exp, k, m, t))
                .collect();
            for o in outcomes {
                let o = o?;
                point.ours.add(o.ours);
                point.benchmark.add(o.benchmark);
                if let Some(g) = o.embedding_gap {
                    max_embedding_gap = max_embedding_gap.max(g);
                }
            }
            points.push(point);
        }
    }
    Ok(CurveResult {
        config: config.clone(),
        points,
        max_embedding_gap,
        wall_time: start.elapsed(),
    })
}
