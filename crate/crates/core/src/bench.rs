//! Study harness: runs a solver over a list of accuracies and seeds, scores
//! every run against a reference eigenvalue, fits log-log slopes, and renders
//! CSV or JSON. Also hosts the calibration cache and the statevector
//! validation matrix used by the command-line front end.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classical::{
    reference_eigenvalue, solve_randomized, solve_worst_case, Constants, ReferenceValue,
    SolveResult,
};
use crate::error::{Error, Result};
use crate::jpstate::{
    calibrate_n0, coarse_state, replicate_state, Calibration, TARGET_PROBABILITY,
};
use crate::potential::{catalog, Potential};
use crate::qkernel::{pe_distribution, pe_statevector, PhaseSpectrum, DEFAULT_GAMMA};
use crate::qsolvers::{default_calibration, run_bit_query, run_power_query, PowerQueryPlan};
use crate::tridiag::{discretize, dot, eigendecompose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Worst,
    Randomized,
    Power,
    Bitquery,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Worst => "worst",
            Self::Randomized => "randomized",
            Self::Power => "power",
            Self::Bitquery => "bitquery",
        }
    }

    pub fn is_seeded(&self) -> bool {
        !matches!(self, Self::Worst)
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "worst" => Ok(Self::Worst),
            "randomized" => Ok(Self::Randomized),
            "power" => Ok(Self::Power),
            "bitquery" => Ok(Self::Bitquery),
            _ => Err(Error::Config(format!(
                "unknown solver {s:?} (expected worst, randomized, power or bitquery)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Config(format!(
                "unknown format {s:?} (expected csv or json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub solver: SolverKind,
    pub potential: String,
    pub eps_list: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Overrides of [`Constants`] by name (`C_w`, `C_m`, ...).
    pub constants: BTreeMap<String, f64>,
    pub repetitions: u32,
}

impl StudyConfig {
    pub fn new(
        solver: SolverKind,
        potential: impl Into<String>,
        eps_list: Vec<f64>,
        seeds: Vec<u64>,
    ) -> Self {
        Self {
            solver,
            potential: potential.into(),
            eps_list,
            seeds,
            constants: BTreeMap::new(),
            repetitions: 1,
        }
    }

    pub fn resolved_constants(&self) -> Result<Constants> {
        let mut c = Constants::default();
        for (k, v) in &self.constants {
            c.set(k, *v)?;
        }
        Ok(c)
    }

    /// Checks the configuration and parses the potential.
    pub fn validate(&self) -> Result<(Potential, Constants)> {
        let q = Potential::parse(&self.potential)?;
        if self.eps_list.is_empty() {
            return Err(Error::Config("eps list is empty".into()));
        }
        if let Some(e) = self.eps_list.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::Config(format!("eps {e} outside (0, 1)")));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("eps list must be strictly decreasing".into()));
        }
        if self.solver.is_seeded() && self.seeds.is_empty() {
            return Err(Error::Config(format!(
                "solver {} needs at least one seed",
                self.solver.as_str()
            )));
        }
        if self.repetitions.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "repetitions must be odd, got {}",
                self.repetitions
            )));
        }
        if self.repetitions != 1 && self.solver != SolverKind::Power {
            return Err(Error::Config(
                "repetitions apply to the power solver only".into(),
            ));
        }
        Ok((q, self.resolved_constants()?))
    }
}

/// Parses `"a,b,c"` or `"a..b"` (half-open) into seeds.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let bad = |e: std::num::ParseIntError| Error::Config(format!("bad seed list {s:?}: {e}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (
            a.trim().parse::<u64>().map_err(bad)?,
            b.trim().parse::<u64>().map_err(bad)?,
        );
        if b < a {
            return Err(Error::Config(format!("empty seed range {s:?}")));
        }
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(bad))
        .collect()
}

pub fn parse_eps_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad eps {t:?}: {e}")))
        })
        .collect()
}

/// Parses a repeatable `name=value` override.
pub fn parse_constant(s: &str) -> Result<(String, f64)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("constant override {s:?} is not name=value")))?;
    let v = v
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Config(format!("bad value in {s:?}: {e}")))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub solver: SolverKind,
    pub potential: String,
    pub eps: f64,
    pub seed: Option<u64>,
    pub estimate: f64,
    pub lambda_ref: f64,
    pub abs_error: f64,
    pub function_values: u64,
    pub bit_queries: u64,
    pub power_queries: u64,
    pub qubits: u64,
    pub repetitions: u64,
    pub success_prob: Option<f64>,
    pub success_method: String,
}

pub const CSV_COLUMNS: [&str; 14] = [
    "solver",
    "potential",
    "eps",
    "seed",
    "estimate",
    "lambda_ref",
    "abs_error",
    "function_values",
    "bit_queries",
    "power_queries",
    "qubits",
    "repetitions",
    "success_prob",
    "success_method",
];

/// Least-squares fit of `ln y = slope ln x + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub quantity: String,
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    Some((slope, my - slope * mx))
}

/// Per-accuracy aggregate over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsSummary {
    pub eps: f64,
    pub runs: usize,
    pub rmse: f64,
    pub max_abs_error: f64,
    /// Fraction of runs with `abs_error <= eps`.
    pub success_fraction: f64,
    pub mean_function_values: f64,
    pub mean_bit_queries: f64,
    pub mean_power_queries: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub constants: BTreeMap<String, f64>,
    pub cache_key: String,
    pub reference: ReferenceValue,
    pub calibration: Option<Calibration>,
    pub rows: Vec<StudyRow>,
    pub summary: Vec<EpsSummary>,
    pub fits: Vec<SlopeFit>,
}

/// Hex SHA-256 over the corpus spec strings and the constants.
pub fn cache_key(corpus: &[String], constants: &Constants) -> String {
    let mut h = Sha256::new();
    for s in corpus {
        h.update(s.as_bytes());
        h.update(b"\n");
    }
    for (k, v) in constants.to_map() {
        h.update(format!("{k}={:e}\n", v).as_bytes());
    }
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn catalog_labels() -> Vec<String> {
    catalog().iter().map(|q| q.label().to_string()).collect()
}

fn row_from(
    config: &StudyConfig,
    eps: f64,
    seed: Option<u64>,
    r: &SolveResult,
    lambda_ref: f64,
    success: (Option<f64>, &str),
) -> StudyRow {
    StudyRow {
        solver: config.solver,
        potential: config.potential.clone(),
        eps,
        seed,
        estimate: r.estimate,
        lambda_ref,
        abs_error: (r.estimate - lambda_ref).abs(),
        function_values: r.resources.function_values,
        bit_queries: r.resources.bit_queries,
        power_queries: r.resources.power_queries,
        qubits: r.resources.qubits,
        repetitions: r.resources.repetitions,
        success_prob: success.0,
        success_method: success.1.to_string(),
    }
}

fn indicator(r: &SolveResult, lambda_ref: f64, eps: f64) -> Option<f64> {
    Some(if (r.estimate - lambda_ref).abs() <= eps {
        1.0
    } else {
        0.0
    })
}

/// Runs the study with the built-in calibration for the power solver.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    let calibration = if config.solver == SolverKind::Power {
        Some(default_calibration()?)
    } else {
        None
    };
    run_study_with(config, calibration)
}

/// Runs the study; `calibration` supplies `n0` for the power solver.
pub fn run_study_with(
    config: &StudyConfig,
    calibration: Option<Calibration>,
) -> Result<StudyReport> {
    let (q, c) = config.validate()?;
    let reference = reference_eigenvalue(&q);
    let lref = reference.lambda_ref;
    let calibration = match (config.solver, calibration) {
        (SolverKind::Power, None) => Some(default_calibration()?),
        (SolverKind::Power, cal) => cal,
        _ => None,
    };

    let jobs: Vec<(f64, Option<u64>)> = config
        .eps_list
        .iter()
        .flat_map(|&eps| {
            if config.solver.is_seeded() {
                config
                    .seeds
                    .iter()
                    .map(|&s| (eps, Some(s)))
                    .collect::<Vec<_>>()
            } else {
                vec![(eps, None)]
            }
        })
        .collect();

    let rows: Vec<StudyRow> = jobs
        .into_par_iter()
        .map(|(eps, seed)| -> Result<StudyRow> {
            let s = seed.unwrap_or(0);
            Ok(match config.solver {
                SolverKind::Worst => {
                    let r = solve_worst_case(&q, eps, &c)?;
                    row_from(
                        config,
                        eps,
                        None,
                        &r,
                        lref,
                        (indicator(&r, lref, eps), "deterministic"),
                    )
                }
                SolverKind::Randomized => {
                    let r = solve_randomized(&q, eps, s, &c)?;
                    row_from(
                        config,
                        eps,
                        seed,
                        &r,
                        lref,
                        (indicator(&r, lref, eps), "indicator"),
                    )
                }
                SolverKind::Bitquery => {
                    let r = run_bit_query(&q, eps, s, &c)?.result;
                    row_from(
                        config,
                        eps,
                        seed,
                        &r,
                        lref,
                        (indicator(&r, lref, eps), "indicator"),
                    )
                }
                SolverKind::Power => {
                    let n0 = calibration
                        .map(|c| c.n0)
                        .expect("power studies carry a calibration");
                    let plan = PowerQueryPlan::new(eps, n0)?;
                    let run = run_power_query(&q, &plan, s, config.repetitions)?;
                    let p = run.analysis.median_success_probability(config.repetitions);
                    row_from(config, eps, seed, &run.result, lref, (Some(p), "exact"))
                }
            })
        })
        .collect::<Result<_>>()?;

    let summary: Vec<EpsSummary> = config
        .eps_list
        .iter()
        .map(|&eps| {
            let sel: Vec<&StudyRow> = rows.iter().filter(|r| r.eps == eps).collect();
            let k = sel.len() as f64;
            let mean = |f: &dyn Fn(&StudyRow) -> f64| sel.iter().map(|r| f(r)).sum::<f64>() / k;
            EpsSummary {
                eps,
                runs: sel.len(),
                rmse: mean(&|r| r.abs_error * r.abs_error).sqrt(),
                max_abs_error: sel.iter().map(|r| r.abs_error).fold(0.0, f64::max),
                success_fraction: mean(&|r| if r.abs_error <= eps { 1.0 } else { 0.0 }),
                mean_function_values: mean(&|r| r.function_values as f64),
                mean_bit_queries: mean(&|r| r.bit_queries as f64),
                mean_power_queries: mean(&|r| r.power_queries as f64),
            }
        })
        .collect();

    let xs: Vec<f64> = summary.iter().map(|s| s.eps).collect();
    type Series = (&'static str, fn(&EpsSummary) -> f64);
    let series: [Series; 5] = [
        ("function_values", |s| s.mean_function_values),
        ("bit_queries", |s| s.mean_bit_queries),
        ("power_queries", |s| s.mean_power_queries),
        ("rmse", |s| s.rmse),
        ("max_abs_error", |s| s.max_abs_error),
    ];
    let fits = series
        .iter()
        .filter_map(|(name, f)| {
            let ys: Vec<f64> = summary.iter().map(f).collect();
            loglog_fit(&xs, &ys).map(|(slope, intercept)| SlopeFit {
                quantity: name.to_string(),
                slope,
                intercept,
                points: ys.iter().filter(|y| **y > 0.0).count(),
            })
        })
        .collect();

    Ok(StudyReport {
        config: config.clone(),
        constants: c.to_map(),
        cache_key: cache_key(&catalog_labels(), &c),
        reference,
        calibration,
        rows,
        summary,
        fits,
    })
}

/// Seventeen significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(report: &StudyReport) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in &report.rows {
        let fields = [
            r.solver.as_str().to_string(),
            csv_field(&r.potential),
            fmt_float(r.eps),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            fmt_float(r.estimate),
            fmt_float(r.lambda_ref),
            fmt_float(r.abs_error),
            r.function_values.to_string(),
            r.bit_queries.to_string(),
            r.power_queries.to_string(),
            r.qubits.to_string(),
            r.repetitions.to_string(),
            r.success_prob.map(fmt_float).unwrap_or_default(),
            r.success_method.clone(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(report: &StudyReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn render(report: &StudyReport, format: Format) -> Result<String> {
    if report.rows.is_empty() {
        return Err(Error::Config("report has no rows".into()));
    }
    match format {
        Format::Csv => Ok(to_csv(report)),
        Format::Json => to_json(report),
    }
}

/// Writes the rendered report to `path`.
pub fn render_output(report: &StudyReport, format: Format, path: &Path) -> Result<()> {
    let text = render(report, format)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Calibration cache file name, stored beside the outputs.
pub const CACHE_FILE: &str = "sleig-calibration.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRecord {
    pub key: String,
    pub corpus: Vec<String>,
    pub calibration: Calibration,
}

pub fn cache_path_for(output: Option<&Path>) -> PathBuf {
    output
        .and_then(Path::parent)
        .filter(|p| !p.as_os_str().is_empty())
        .map(|p| p.join(CACHE_FILE))
        .unwrap_or_else(|| PathBuf::from(CACHE_FILE))
}

/// Plain `key=value` lines: `key`, `corpus` (`;`-separated), `c_hat`, `n0`.
pub fn write_calibration_cache(path: &Path, rec: &CalibrationRecord) -> Result<()> {
    let text = format!(
        "key={}\ncorpus={}\nc_hat={}\nn0={}\n",
        rec.key,
        rec.corpus.join(";"),
        fmt_float(rec.calibration.c_hat),
        rec.calibration.n0
    );
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a cache file; `None` if missing, malformed or keyed differently.
pub fn read_calibration_cache(path: &Path, key: &str) -> Option<CalibrationRecord> {
    let text = std::fs::read_to_string(path).ok()?;
    let map: BTreeMap<&str, &str> = text.lines().filter_map(|l| l.split_once('=')).collect();
    if *map.get("key")? != key {
        return None;
    }
    Some(CalibrationRecord {
        key: key.to_string(),
        corpus: map.get("corpus")?.split(';').map(str::to_string).collect(),
        calibration: Calibration {
            c_hat: map.get("c_hat")?.parse().ok()?,
            n0: map.get("n0")?.parse().ok()?,
        },
    })
}

/// Calibrates over `corpus`, reusing `cache` when its key matches.
pub fn calibrate_cached(
    corpus: &[String],
    constants: &Constants,
    cache: Option<&Path>,
) -> Result<(CalibrationRecord, bool)> {
    let key = cache_key(corpus, constants);
    if let Some(rec) = cache.and_then(|p| read_calibration_cache(p, &key)) {
        return Ok((rec, true));
    }
    let pots: Vec<Potential> = corpus
        .iter()
        .map(|s| Potential::parse(s))
        .collect::<Result<_>>()?;
    let rec = CalibrationRecord {
        key,
        corpus: corpus.to_vec(),
        calibration: calibrate_n0(&pots, TARGET_PROBABILITY)?,
    };
    if let Some(p) = cache {
        write_calibration_cache(p, &rec)?;
    }
    Ok((rec, false))
}

/// One entry of the statevector-vs-analytic cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationCase {
    pub m: u32,
    pub n: usize,
    pub potential: String,
    pub total_variation: f64,
    pub state_norm: f64,
}

pub const VALIDATION_POTENTIALS: [&str; 3] = ["constant:0", "constant:0.5", "poly:0,1"];

/// Runs phase estimation both ways on a replicated coarse state for every
/// `m <= 5`, `n in {4, 8}` and potential of [`VALIDATION_POTENTIALS`].
pub fn run_validation() -> Result<Vec<ValidationCase>> {
    let mut cases = Vec::new();
    for spec in VALIDATION_POTENTIALS {
        let q = Potential::parse(spec)?;
        for n in [4usize, 8] {
            let t = discretize(&q, n);
            let init = replicate_state(&coarse_state(&q, n / 2)?, 1).vector;
            let sd = eigendecompose(&t)?;
            let overlaps: Vec<f64> = sd.vectors.iter().map(|v| dot(v, &init)).collect();
            let total = overlaps.iter().map(|d| d * d).sum::<f64>().sqrt();
            let overlaps: Vec<f64> = overlaps.iter().map(|d| d / total).collect();
            let spectrum = PhaseSpectrum::from_eigenvalues(&sd.values, &overlaps, DEFAULT_GAMMA)?;
            for m in 1..=5 {
                let (sv, brute) = pe_statevector(&t, &init, m, DEFAULT_GAMMA)?;
                let analytic = pe_distribution(&spectrum, m)?;
                cases.push(ValidationCase {
                    m,
                    n,
                    potential: spec.to_string(),
                    total_variation: brute.total_variation(&analytic),
                    state_norm: sv.norm(),
                });
            }
        }
    }
    Ok(cases)
}
