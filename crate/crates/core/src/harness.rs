//! Experiment plumbing: flat `key = value` configs, batch runs writing one
//! trajectory CSV per trial, step-size sweeps, certificate report files and
//! trajectory replay.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::certifiers::{audit_chetaev, run_certifier, CertificateReport, Verdict, CERTIFIERS};
use crate::dynamics::{run_batch, Outcome, StepRecord, Trajectory, TrialSettings};
use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::par::Execution;
use crate::problem::ProblemOracle;
use crate::problems::{MatrixSource, ProblemSpec};

/// Environment variable naming a config file.
pub const CONFIG_ENV: &str = "SUBGRAD_CONFIG";
/// Trajectory CSVs list coordinates up to this dimension.
pub const MAX_LISTED_COORDINATES: usize = 16;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_VIOLATION: u8 = 4;
pub const EXIT_DATA: u8 = 5;

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::UnknownProblem(_)
        | Error::UnknownCertifier(_)
        | Error::InvalidArgument(_)
        | Error::Construction(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        Error::Matrix { .. } | Error::MalformedCsv { .. } | Error::ProblemMismatch { .. } => {
            EXIT_DATA
        }
        _ => 1,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub trials: usize,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub rel_init_radius: f64,
    /// `None` uses the problem's neighborhood radius.
    pub eps_escape: Option<f64>,
    pub max_iters: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// List every coordinate in trajectory CSVs, even above
    /// [`MAX_LISTED_COORDINATES`]. Needed to replay large problems.
    pub full_coordinates: bool,
    /// Grid points of a step-size sweep.
    pub alpha_steps: usize,
    /// Samples per certifier.
    pub samples: usize,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

impl ExperimentConfig {
    /// Defaults for a problem: the published ReLU setup, and step ranges scaled
    /// to the other problems.
    pub fn for_problem(problem: ProblemSpec) -> Self {
        let (alpha_lo, alpha_hi, eps_escape) = match problem {
            ProblemSpec::ReluL1 | ProblemSpec::Quadratic { .. } => (0.05, 0.15, Some(0.5)),
            ProblemSpec::Rpca { .. } => (0.001, 0.01, None),
            ProblemSpec::AbsControl => (1e-5, 1e-4, Some(0.5)),
            ProblemSpec::VerdierFail => (1e-3, 1e-2, Some(0.25)),
        };
        ExperimentConfig {
            problem,
            trials: 5,
            alpha_lo,
            alpha_hi,
            rel_init_radius: 1e-3,
            eps_escape,
            max_iters: 100_000,
            seed: 42,
            out_dir: PathBuf::from("out"),
            full_coordinates: false,
            alpha_steps: 5,
            samples: 10_000,
        }
    }

    /// Parses a flat config. `problem` is required and may appear anywhere;
    /// other keys override its defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs: Vec<(&str, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if pairs.iter().any(|(k, _)| *k == key) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}`",
                    i + 1
                )));
            }
            pairs.push((key, value));
        }
        let problem = pairs
            .iter()
            .find(|(k, _)| *k == "problem")
            .ok_or_else(|| Error::Config("missing `problem`".into()))?
            .1;
        let mut cfg = ExperimentConfig::for_problem(ProblemSpec::from_id(problem)?);
        for (key, value) in pairs.into_iter().filter(|(k, _)| *k != "problem") {
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        ExperimentConfig::parse(&fs::read_to_string(path)?)
    }

    /// Sets one key. Problem parameters must match the configured problem.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let wrong_problem = |key: &str, id: &str| {
            Error::Config(format!("`{key}` does not apply to problem `{id}`"))
        };
        match key {
            "trials" => self.trials = parse_value(key, value)?,
            "alpha_lo" => self.alpha_lo = parse_value(key, value)?,
            "alpha_hi" => self.alpha_hi = parse_value(key, value)?,
            "init_rel_radius" => self.rel_init_radius = parse_value(key, value)?,
            "escape_radius" => self.eps_escape = Some(parse_value(key, value)?),
            "max_iters" => self.max_iters = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "full_coordinates" => self.full_coordinates = parse_value(key, value)?,
            "alpha_steps" => self.alpha_steps = parse_value(key, value)?,
            "samples" => self.samples = parse_value(key, value)?,
            "matrix" | "rank" | "rows" | "cols" | "matrix_seed" => {
                let id = self.problem.id();
                let ProblemSpec::Rpca { source, rank } = &mut self.problem else {
                    return Err(wrong_problem(key, id));
                };
                match (key, source) {
                    ("matrix", source) => *source = MatrixSource::Csv(PathBuf::from(value)),
                    ("rank", _) => *rank = parse_value(key, value)?,
                    ("rows", MatrixSource::Synthetic { rows, .. }) => {
                        *rows = parse_value(key, value)?
                    }
                    ("cols", MatrixSource::Synthetic { cols, .. }) => {
                        *cols = parse_value(key, value)?
                    }
                    ("matrix_seed", MatrixSource::Synthetic { seed, .. }) => {
                        *seed = parse_value(key, value)?
                    }
                    _ => {
                        return Err(Error::Config(format!(
                            "`{key}` does not apply to a CSV matrix"
                        )))
                    }
                }
            }
            "dim" => match &mut self.problem {
                ProblemSpec::Quadratic { dim } => *dim = parse_value(key, value)?,
                other => return Err(wrong_problem(key, other.id())),
            },
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Trial settings for the built problem, with the escape radius resolved.
    pub fn trial_settings(&self, p: &dyn ProblemOracle) -> Result<TrialSettings> {
        let settings = TrialSettings {
            trials: self.trials,
            alpha_lo: self.alpha_lo,
            alpha_hi: self.alpha_hi,
            rel_init_radius: self.rel_init_radius,
            eps_escape: self.eps_escape.unwrap_or_else(|| p.neighborhood_radius()),
            max_iters: self.max_iters,
            seed: self.seed,
        };
        settings.validate()?;
        let scale = p.reference_point().norm();
        let init_radius = if scale > 0.0 {
            self.rel_init_radius * scale
        } else {
            self.rel_init_radius
        };
        if init_radius > settings.eps_escape {
            return Err(Error::Config(format!(
                "initial ball radius {init_radius} exceeds escape radius {}",
                settings.eps_escape
            )));
        }
        Ok(settings)
    }
}

fn csv_header(dim: usize, listed: bool) -> String {
    let mut h = String::from("k,alpha,f,C,dS,escaped");
    if listed {
        for i in 0..dim {
            let _ = write!(h, ",x{i}");
        }
    } else {
        h.push_str(",norm_x_minus_xstar");
    }
    h
}

/// Renders a trajectory with shortest round-trip floats.
pub fn trajectory_csv(p: &dyn ProblemOracle, traj: &Trajectory, full_coordinates: bool) -> String {
    let listed = full_coordinates || traj.dim <= MAX_LISTED_COORDINATES;
    let mut out = csv_header(traj.dim, listed);
    out.push('\n');
    for r in &traj.records {
        let escaped = u8::from(p.distance_to_reference(&r.x) > traj.eps_escape);
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            r.k, r.alpha, r.f, r.chetaev, r.dist_s, escaped
        );
        if listed {
            for v in r.x.as_slice() {
                let _ = write!(out, ",{v}");
            }
        } else {
            let _ = write!(out, ",{}", p.distance_to_reference(&r.x));
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub k: usize,
    pub alpha: f64,
    pub f: f64,
    pub chetaev: f64,
    pub dist_s: f64,
    pub escaped: bool,
    /// Present when coordinates were listed.
    pub x: Option<DenseVector>,
    pub norm_x_minus_xstar: Option<f64>,
}

/// Parses a trajectory CSV as written by [`trajectory_csv`].
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRow>> {
    let malformed = |line: usize, reason: String| Error::MalformedCsv { line, reason };
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| malformed(1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 7 || cols[..6] != ["k", "alpha", "f", "C", "dS", "escaped"] {
        return Err(malformed(1, format!("unexpected header `{header}`")));
    }
    let listed = cols[6] != "norm_x_minus_xstar";
    if listed
        && cols[6..]
            .iter()
            .enumerate()
            .any(|(i, c)| *c != format!("x{i}"))
    {
        return Err(malformed(
            1,
            format!("unexpected coordinate columns in `{header}`"),
        ));
    }
    if !listed && cols.len() != 7 {
        return Err(malformed(1, format!("unexpected header `{header}`")));
    }

    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(malformed(
                lineno,
                format!("expected {} fields, found {}", cols.len(), fields.len()),
            ));
        }
        let num = |j: usize| -> Result<f64> {
            let v: f64 = fields[j]
                .trim()
                .parse()
                .map_err(|_| malformed(lineno, format!("`{}` is not a number", fields[j])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(malformed(
                    lineno,
                    format!("non-finite value in column `{}`", cols[j]),
                ))
            }
        };
        let k: usize = fields[0]
            .parse()
            .map_err(|_| malformed(lineno, format!("bad step index `{}`", fields[0])))?;
        if k != i {
            return Err(malformed(lineno, format!("step index {k} out of sequence")));
        }
        let escaped = match fields[5] {
            "0" => false,
            "1" => true,
            other => return Err(malformed(lineno, format!("bad escaped flag `{other}`"))),
        };
        let (x, norm) = if listed {
            let coords = (6..fields.len()).map(num).collect::<Result<Vec<f64>>>()?;
            (Some(DenseVector::new(coords)?), None)
        } else {
            (None, Some(num(6)?))
        };
        rows.push(TrajectoryRow {
            k,
            alpha: num(1)?,
            f: num(2)?,
            chetaev: num(3)?,
            dist_s: num(4)?,
            escaped,
            x,
            norm_x_minus_xstar: norm,
        });
    }
    if rows.is_empty() {
        return Err(malformed(2, "no data rows".into()));
    }
    Ok(rows)
}

/// Per-trial line of a run summary.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSummary {
    pub trial: usize,
    pub alpha: f64,
    pub init_radius: f64,
    /// Outcome label, or `blowup` for a non-finite iterate.
    pub outcome: String,
    pub escape_iter: Option<usize>,
    pub steps: usize,
    pub final_chetaev: f64,
    pub final_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub problem: String,
    pub trials: Vec<TrialSummary>,
}

impl SweepSummary {
    pub fn escaped(&self) -> usize {
        self.trials
            .iter()
            .filter(|t| t.escape_iter.is_some())
            .count()
    }

    pub fn escape_fraction(&self) -> f64 {
        self.escaped() as f64 / self.trials.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("trial,alpha,init_radius,outcome,escape_iter,steps,final_C,final_dist\n");
        for t in &self.trials {
            let esc = t.escape_iter.map(|k| k.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                t.trial,
                t.alpha,
                t.init_radius,
                t.outcome,
                esc,
                t.steps,
                t.final_chetaev,
                t.final_distance
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        format!(
            "problem = {}\ntrials = {}\nescaped = {}\nescape_fraction = {}\n",
            self.problem,
            self.trials.len(),
            self.escaped(),
            self.escape_fraction()
        )
    }
}

fn summarize(
    p: &dyn ProblemOracle,
    trial: usize,
    init_radius: f64,
    traj: &Trajectory,
    blowup: bool,
) -> TrialSummary {
    let last = traj.last();
    TrialSummary {
        trial,
        alpha: traj.alpha,
        init_radius,
        outcome: if blowup {
            "blowup".into()
        } else {
            traj.outcome.label().into()
        },
        escape_iter: match traj.outcome {
            Outcome::Escaped(k) if !blowup => Some(k),
            _ => None,
        },
        steps: traj.records.len() - 1,
        final_chetaev: last.chetaev,
        final_distance: p.distance_to_reference(&last.x),
    }
}

/// Runs `trials` independent trials, writing `trial_<idx>.csv` for each and
/// `summary.csv` / `summary.txt` once all have finished.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<SweepSummary> {
    let p = cfg.problem.build()?;
    let settings = cfg.trial_settings(p.as_ref())?;
    fs::create_dir_all(&cfg.out_dir)?;
    let results = run_batch(p.as_ref(), &settings, exec, |o| -> Result<TrialSummary> {
        let (traj, blowup) = match o.result {
            Ok(t) => (t, false),
            Err(Error::NumericalBlowup { trajectory }) => (*trajectory, true),
            Err(e) => return Err(e),
        };
        let path = cfg.out_dir.join(format!("trial_{}.csv", o.index));
        fs::write(
            path,
            trajectory_csv(p.as_ref(), &traj, cfg.full_coordinates),
        )?;
        Ok(summarize(p.as_ref(), o.index, o.init.radius, &traj, blowup))
    });
    let summary = SweepSummary {
        problem: p.name().to_string(),
        trials: results.into_iter().collect::<Result<_>>()?,
    };
    fs::write(cfg.out_dir.join("summary.csv"), summary.to_csv())?;
    fs::write(cfg.out_dir.join("summary.txt"), summary.to_text())?;
    Ok(summary)
}

/// Escape statistics at one grid step size.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub alpha: f64,
    pub trials: usize,
    pub escaped: usize,
    pub mean_escape_iter: Option<f64>,
}

/// Evenly spaced step sizes from `alpha_lo` to `alpha_hi`.
pub fn alpha_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n)
            .map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Runs `trials` trials at each grid step size with shared initial-point
/// streams, and writes `sweep.csv`.
pub fn sweep(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<SweepPoint>> {
    if cfg.alpha_steps == 0 {
        return Err(Error::Config("alpha_steps must be >= 1".into()));
    }
    let p = cfg.problem.build()?;
    let base = cfg.trial_settings(p.as_ref())?;
    let mut points = Vec::new();
    for alpha in alpha_grid(cfg.alpha_lo, cfg.alpha_hi, cfg.alpha_steps) {
        let settings = TrialSettings {
            alpha_lo: alpha,
            alpha_hi: alpha,
            ..base.clone()
        };
        let outcomes = run_batch(p.as_ref(), &settings, exec, |o| match o.result {
            Ok(t) => Ok(t.outcome),
            Err(Error::NumericalBlowup { .. }) => Ok(Outcome::MaxIters),
            Err(e) => Err(e),
        })
        .into_iter()
        .collect::<Result<Vec<Outcome>>>()?;
        let iters: Vec<usize> = outcomes
            .iter()
            .filter_map(|o| match o {
                Outcome::Escaped(k) => Some(*k),
                _ => None,
            })
            .collect();
        points.push(SweepPoint {
            alpha,
            trials: outcomes.len(),
            escaped: iters.len(),
            mean_escape_iter: (!iters.is_empty())
                .then(|| iters.iter().sum::<usize>() as f64 / iters.len() as f64),
        });
    }
    fs::create_dir_all(&cfg.out_dir)?;
    let mut out = String::from("alpha,trials,escaped,escape_fraction,mean_escape_iter\n");
    for pt in &points {
        let mean = pt
            .mean_escape_iter
            .map(|m| m.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            pt.alpha,
            pt.trials,
            pt.escaped,
            pt.escaped as f64 / pt.trials as f64,
            mean
        );
    }
    fs::write(cfg.out_dir.join("sweep.csv"), out)?;
    Ok(points)
}

/// Writes `<dir>/<certifier>.txt`.
pub fn write_report(dir: &Path, report: &CertificateReport) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.txt", report.certifier));
    fs::write(&path, report.to_text())?;
    Ok(path)
}

/// Runs the named certifiers with the config's sample count and seed and
/// writes one report file per certifier. Names are checked before any runs.
pub fn certify(
    cfg: &ExperimentConfig,
    names: &[String],
    exec: Execution,
) -> Result<Vec<CertificateReport>> {
    if let Some(bad) = names.iter().find(|n| !CERTIFIERS.contains(&n.as_str())) {
        return Err(Error::UnknownCertifier(bad.clone()));
    }
    let p = cfg.problem.build()?;
    let mut reports = Vec::new();
    for name in names {
        let report = run_certifier(name, p.as_ref(), cfg.samples, cfg.seed, exec)?;
        write_report(&cfg.out_dir, &report)?;
        reports.push(report);
    }
    Ok(reports)
}

/// Re-verifies a trajectory CSV against `p`: every row's `f`, `C` and `dS`
/// must match the oracle bit for bit, every step must satisfy
/// `x_{k+1} = x_k − α·v(x_k)` exactly, and the Chetaev audit must not fail.
/// The reported step is the first row that disagrees.
pub fn replay(p: &dyn ProblemOracle, text: &str) -> Result<CertificateReport> {
    let rows = parse_trajectory_csv(text)?;
    let xs: Vec<&DenseVector> = rows
        .iter()
        .map(|r| r.x.as_ref())
        .collect::<Option<_>>()
        .ok_or_else(|| Error::MalformedCsv {
            line: 1,
            reason: "trajectory lists no coordinates; rerun with full coordinates".into(),
        })?;
    if xs[0].len() != p.dim() {
        return Err(Error::ProblemMismatch {
            expected: format!("{} (dim {})", p.name(), p.dim()),
            found: format!("trajectory of dim {}", xs[0].len()),
        });
    }
    let alpha = rows[0].alpha;
    if let Some(r) = rows.iter().find(|r| r.alpha != alpha) {
        return Err(Error::MalformedCsv {
            line: r.k + 2,
            reason: "step size changes along the trajectory".into(),
        });
    }

    let records: Vec<StepRecord> = rows
        .iter()
        .zip(&xs)
        .map(|(r, x)| StepRecord {
            k: r.k,
            x: (*x).clone(),
            f: p.objective(x),
            chetaev: p.chetaev(x),
            dist_s: p.dist_s(x),
            v: p.subgradient(x),
            alpha,
        })
        .collect();
    let consistent: Vec<bool> = rows
        .iter()
        .zip(&records)
        .map(|(r, rec)| r.f == rec.f && r.chetaev == rec.chetaev && r.dist_s == rec.dist_s)
        .collect();
    if consistent.iter().all(|c| !c) {
        return Err(Error::ProblemMismatch {
            expected: p.name().to_string(),
            found: "a trajectory whose logged values match no row".into(),
        });
    }

    let mut first_bad = None;
    let mut max_update_error: f64 = 0.0;
    for (j, rec) in records.iter().enumerate() {
        let mut bad = !consistent[j];
        if j > 0 {
            let prev = &records[j - 1];
            let predicted = prev.x.sub_scaled(alpha, &prev.v)?;
            let err = predicted.sub(&rec.x)?.max_abs();
            max_update_error = max_update_error.max(err);
            bad |= err != 0.0;
        }
        if bad && first_bad.is_none() {
            first_bad = Some(j);
        }
    }

    let last = rows.last().expect("non-empty");
    let traj = Trajectory {
        problem: p.name().to_string(),
        dim: p.dim(),
        alpha,
        eps_escape: f64::INFINITY,
        outcome: if last.escaped {
            Outcome::Escaped(last.k)
        } else {
            Outcome::MaxIters
        },
        records,
    };
    let chetaev = audit_chetaev(p, &traj)?;

    let mut report = CertificateReport {
        certifier: "replay".into(),
        problem: p.name().into(),
        samples: rows.len(),
        statistic_name: "max_update_error".into(),
        statistic: max_update_error,
        witness: Vec::new(),
        verdict: Verdict::Satisfied {
            constant: 0.0,
            exponent: None,
        },
        details: Vec::new(),
    };
    report.push_detail("chetaev_verdict", chetaev.verdict.label());
    report.push_detail("chetaev_min_slack", chetaev.statistic);
    if let Some(j) = first_bad {
        report.witness.push(("x".into(), traj.records[j].x.clone()));
        report.verdict = Verdict::Violated { step: Some(j) };
    } else if let Verdict::Violated { step } = chetaev.verdict {
        report.push_detail("failed_check", "chetaev");
        report.verdict = Verdict::Violated { step };
    }
    Ok(report)
}

pub fn replay_file(p: &dyn ProblemOracle, path: impl AsRef<Path>) -> Result<CertificateReport> {
    replay(p, &fs::read_to_string(path)?)
}
