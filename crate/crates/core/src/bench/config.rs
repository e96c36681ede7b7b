use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::cosamp::{DEFAULT_HALT_TOL, DEFAULT_MAX_ITER};
use crate::ensembles::EnsembleKind;
use crate::error::{Error, Result};
use crate::factorize::FactorMethod;

pub const PRESETS: [&str; 8] = [
    "desk-wavelet-gaussian",
    "desk-wavelet-bernoulli",
    "paper-wavelet-gaussian",
    "paper-wavelet-bernoulli",
    "paper-ksvd-gaussian",
    "paper-ksvd-bernoulli",
    "paper-pksvd-gaussian",
    "paper-pksvd-bernoulli",
];

/// Where the sparsifying dictionary comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DictSource {
    /// Built-in wavelet dictionary with this many levels.
    Wavelet { levels: usize },
    /// Matrix file (CSMX or CSV); `None` until a path is supplied.
    File(Option<PathBuf>),
}

impl fmt::Display for DictSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DictSource::Wavelet { .. } => write!(f, "wavelet"),
            DictSource::File(Some(p)) => write!(f, "{}", p.display()),
            DictSource::File(None) => write!(f, "<required>"),
        }
    }
}

/// What "ours" measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementModel {
    /// `z = 𝓔G⁻¹(Dx)`: the sensing matrix applied to the signal `Dx`.
    Signal,
    /// `z = 𝓔Ax`, shared verbatim with the benchmark.
    Coefficient,
}

impl MeasurementModel {
    pub fn name(self) -> &'static str {
        match self {
            MeasurementModel::Signal => "signal",
            MeasurementModel::Coefficient => "coefficient",
        }
    }
}

impl FromStr for MeasurementModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signal" => Ok(MeasurementModel::Signal),
            "coefficient" => Ok(MeasurementModel::Coefficient),
            other => Err(Error::param(format!("unknown measurement model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dict_source: DictSource,
    pub ensemble_kind: EnsembleKind,
    pub factor_method: FactorMethod,
    pub l: usize,
    pub n: usize,
    pub k_list: Vec<usize>,
    /// Explicit ratio grid; when empty each `k` gets `grid_points` ratios
    /// evenly spaced over `[(k + 2)/n, l/n]`.
    pub cs_ratios: Vec<f64>,
    pub grid_points: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub max_iter: usize,
    pub halt_tol: f64,
    /// Draw a fresh `A` (and factorization) for every trial.
    pub redraw_a: bool,
    /// Replace `D` by its canonical Parseval frame before factoring.
    pub parseval: bool,
    pub measurement: MeasurementModel,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dict_source: DictSource::Wavelet { levels: 3 },
            ensemble_kind: EnsembleKind::Gaussian,
            factor_method: FactorMethod::Spectral,
            l: 64,
            n: 256,
            k_list: vec![4, 6, 8],
            cs_ratios: Vec::new(),
            grid_points: 10,
            trials: 200,
            base_seed: 0,
            max_iter: DEFAULT_MAX_ITER,
            halt_tol: DEFAULT_HALT_TOL,
            redraw_a: false,
            parseval: false,
            measurement: MeasurementModel::Signal,
        }
    }
}

fn parse_list<T: FromStr>(value: &str, key: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::param(format!("{key}: cannot parse '{}'", s.trim())))
        })
        .collect()
}

fn parse_one<T: FromStr>(value: &str, key: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::param(format!("{key}: cannot parse '{}'", value.trim())))
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let (scale, dict, ensemble) = {
            let parts: Vec<&str> = name.split('-').collect();
            match parts.as_slice() {
                [s @ ("desk" | "paper"), d @ ("wavelet" | "ksvd" | "pksvd"), e]
                    if !(s == &"desk" && d != &"wavelet") =>
                {
                    (*s, *d, e.parse::<EnsembleKind>()?)
                }
                _ => {
                    return Err(Error::param(format!(
                        "unknown preset '{name}'; known: {}",
                        PRESETS.join(", ")
                    )))
                }
            }
        };
        let mut c = ExperimentConfig {
            ensemble_kind: ensemble,
            ..Default::default()
        };
        if scale == "paper" {
            c.l = 128;
            c.n = 1024;
            c.k_list = vec![10, 12, 14];
            c.trials = 2000;
            c.dict_source = DictSource::Wavelet { levels: 5 };
        }
        match dict {
            "ksvd" => c.dict_source = DictSource::File(None),
            "pksvd" => {
                c.dict_source = DictSource::File(None);
                c.factor_method = FactorMethod::TightFrame;
            }
            _ => {}
        }
        Ok(c)
    }

    /// Sets one `key=value` option, the shared vocabulary of flags and
    /// config files.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dict" => {
                self.dict_source = if value == "wavelet" {
                    DictSource::Wavelet {
                        levels: self.levels().unwrap_or(3),
                    }
                } else {
                    DictSource::File(Some(PathBuf::from(value)))
                }
            }
            "levels" => {
                let levels = parse_one(value, key)?;
                match &mut self.dict_source {
                    DictSource::Wavelet { levels: l } => *l = levels,
                    DictSource::File(_) => return Err(Error::param("levels applies only to the wavelet dictionary")),
                }
            }
            "ensemble" | "kind" => self.ensemble_kind = value.trim().parse()?,
            "method" => self.factor_method = value.trim().parse()?,
            "l" => self.l = parse_one(value, key)?,
            "n" => self.n = parse_one(value, key)?,
            "k" => self.k_list = parse_list(value, key)?,
            "ratios" => self.cs_ratios = parse_list(value, key)?,
            "grid_points" => self.grid_points = parse_one(value, key)?,
            "trials" => self.trials = parse_one(value, key)?,
            "seed" => self.base_seed = parse_one(value, key)?,
            "max_iter" => self.max_iter = parse_one(value, key)?,
            "halt_tol" => self.halt_tol = parse_one(value, key)?,
            "redraw_a" => self.redraw_a = parse_one(value, key)?,
            "parseval" => self.parseval = parse_one(value, key)?,
            "measurement" => self.measurement = value.trim().parse()?,
            other => return Err(Error::param(format!("unknown experiment option '{other}'"))),
        }
        Ok(())
    }

    fn levels(&self) -> Option<usize> {
        match self.dict_source {
            DictSource::Wavelet { levels } => Some(levels),
            DictSource::File(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || self.l > self.n {
            return Err(Error::param(format!(
                "need 1 <= l <= n, got l={}, n={}",
                self.l, self.n
            )));
        }
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return Err(Error::param("k list must be nonempty with positive entries"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be positive"));
        }
        if self.cs_ratios.is_empty() && self.grid_points == 0 {
            return Err(Error::param("grid_points must be positive"));
        }
        let top = self.l as f64 / self.n as f64;
        if let Some(r) = self.cs_ratios.iter().find(|&&r| !(r > 0.0 && r <= top + 1e-12)) {
            return Err(Error::param(format!("cs ratio {r} outside (0, {top}]")));
        }
        if self.max_iter == 0 || !(self.halt_tol >= 0.0 && self.halt_tol.is_finite()) {
            return Err(Error::param("solver needs max_iter > 0 and a finite halt_tol >= 0"));
        }
        if self.dict_source == DictSource::File(None) {
            return Err(Error::param("this preset needs a dictionary file (dict=<path>)"));
        }
        Ok(())
    }

    /// CS ratios run for sparsity `k`.
    pub fn ratios_for(&self, k: usize) -> Vec<f64> {
        if !self.cs_ratios.is_empty() {
            return self.cs_ratios.clone();
        }
        let lo = (k + 2) as f64 / self.n as f64;
        let hi = self.l as f64 / self.n as f64;
        let p = self.grid_points;
        if p == 1 {
            return vec![hi];
        }
        (0..p).map(|i| lo + (hi - lo) * i as f64 / (p - 1) as f64).collect()
    }

    /// `m = round(ρ·n)` clamped to `[1, l]`.
    pub fn measurements_for(&self, ratio: f64) -> usize {
        ((ratio * self.n as f64).round() as usize).clamp(1, self.l)
    }

    /// Every resolved option as `key=value` lines, in a fixed order.
    pub fn describe(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut lines = vec![format!("dict={}", self.dict_source)];
        if let Some(levels) = self.levels() {
            lines.push(format!("levels={levels}"));
        }
        lines.extend([
            format!("ensemble={}", self.ensemble_kind.name()),
            format!("method={}", self.factor_method.name()),
            format!("l={}", self.l),
            format!("n={}", self.n),
            format!("k={}", join(self.k_list.iter().map(|k| k.to_string()).collect())),
            format!(
                "ratios={}",
                join(self.cs_ratios.iter().map(|r| r.to_string()).collect())
            ),
            format!("grid_points={}", self.grid_points),
            format!("trials={}", self.trials),
            format!("seed={}", self.base_seed),
            format!("max_iter={}", self.max_iter),
            format!("halt_tol={}", self.halt_tol),
            format!("redraw_a={}", self.redraw_a),
            format!("parseval={}", self.parseval),
            format!("measurement={}", self.measurement.name()),
        ]);
        lines.join("\n")
    }
}
