//! Metric θ-subregularity of `∂f` at `(x*, 0)`: `d(x, S) ≤ c·d(0, ∂f(x))^θ`.
//!
//! `d(0, ∂f(x))` is approximated by the norm of the oracle's selection. Off
//! the nonsmooth locus the selection is the unique gradient, so the proxy is
//! exact there.

use crate::error::Result;
use crate::linalg::DenseVector;
use crate::par::Execution;
use crate::problem::{on_sphere, ProblemOracle};

use super::{nested_samples, require_samples, CertificateReport, Verdict};

/// Number of geometrically spaced radii `ρ_U·2⁻ʲ`.
const LEVELS: usize = 24;
/// A log-log slope of `‖v‖` against `d(x,S)` below this is read as "no decay".
const FLAT_SLOPE: f64 = 0.05;
/// Multiplicative slack allowed when checking a fitted power law.
const FIT_SLACK: f64 = 1.05;

#[derive(Clone, Debug, PartialEq)]
pub struct SubregularitySample {
    pub x: DenseVector,
    pub dist: f64,
    pub grad_norm: f64,
}

/// `d(x, S) / ‖v(x)‖`.
pub fn subregularity_ratio(p: &dyn ProblemOracle, x: &DenseVector) -> f64 {
    p.dist_s(x) / p.subgradient(x).norm()
}

pub fn certify_subregularity(
    p: &dyn ProblemOracle,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<CertificateReport> {
    require_samples(n_samples, 100)?;
    let rho = p.neighborhood_radius();
    let samples = nested_samples(n_samples, seed, exec, |i, rng| {
        let radius = rho * 0.5f64.powi((i % LEVELS) as i32);
        let x = on_sphere(p.reference_point(), radius, rng);
        SubregularitySample {
            dist: p.dist_s(&x),
            grad_norm: p.subgradient(&x).norm(),
            x,
        }
    });
    let mut report = subregularity_from_samples(p.name(), &samples);
    report.samples = n_samples;
    Ok(report)
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx = xs.iter().fold(0.0, |acc, x| acc + (x - mx) * (x - mx));
    let sxy = xs
        .iter()
        .zip(ys)
        .fold(0.0, |acc, (x, y)| acc + (x - mx) * (y - my));
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Verdict from precomputed samples. Samples with `d(x,S) = 0` are ignored.
pub fn subregularity_from_samples(
    problem: &str,
    samples: &[SubregularitySample],
) -> CertificateReport {
    let mut report = CertificateReport {
        certifier: "subregularity".into(),
        problem: problem.into(),
        samples: samples.len(),
        statistic_name: "max_dist_over_grad_norm".into(),
        statistic: f64::NAN,
        witness: Vec::new(),
        verdict: Verdict::Inconclusive {
            reason: "every sample lies on S".into(),
        },
        details: Vec::new(),
    };
    report.push_detail(
        "proxy",
        "norm of the oracle selection stands in for d(0, ∂f(x))",
    );

    let off_s: Vec<&SubregularitySample> = samples.iter().filter(|s| s.dist > 0.0).collect();
    report.push_detail("off_s_samples", off_s.len());
    if off_s.is_empty() {
        return report;
    }

    if let Some(zero) = off_s.iter().find(|s| s.grad_norm == 0.0) {
        report.statistic = f64::INFINITY;
        report.witness.push(("x".into(), zero.x.clone()));
        report.verdict = Verdict::Violated { step: None };
        report.push_detail("reason", "zero selection off S");
        return report;
    }

    let worst = off_s
        .iter()
        .max_by(|a, b| (a.dist / a.grad_norm).total_cmp(&(b.dist / b.grad_norm)))
        .expect("non-empty");
    report.statistic = worst.dist / worst.grad_norm;
    report.witness.push(("x".into(), worst.x.clone()));

    let min_grad = off_s
        .iter()
        .map(|s| s.grad_norm)
        .fold(f64::INFINITY, f64::min);
    let max_dist = off_s.iter().map(|s| s.dist).fold(0.0, f64::max);
    report.push_detail("min_grad_norm", min_grad);
    report.push_detail("max_dist", max_dist);

    let log_d: Vec<f64> = off_s.iter().map(|s| s.dist.ln()).collect();
    let log_v: Vec<f64> = off_s.iter().map(|s| s.grad_norm.ln()).collect();
    let decay = least_squares_slope(&log_d, &log_v).map_or(0.0, |(s, _)| s);
    report.push_detail("grad_norm_decay_slope", decay);

    if decay.abs() < FLAT_SLOPE {
        report.verdict = Verdict::BoundedBelowRegime {
            c2: max_dist / min_grad,
            min_grad_norm: min_grad,
        };
        return report;
    }

    match least_squares_slope(&log_v, &log_d) {
        Some((theta, intercept)) => {
            let c = intercept.exp();
            let envelope = off_s
                .iter()
                .all(|s| s.dist <= FIT_SLACK * c * s.grad_norm.powf(theta));
            report.push_detail("fitted_theta", theta);
            report.push_detail("fitted_c", c);
            report.verdict = if envelope {
                Verdict::Satisfied {
                    constant: c,
                    exponent: Some(theta),
                }
            } else {
                Verdict::Inconclusive {
                    reason: "fitted power law does not envelope the samples".into(),
                }
            };
        }
        None => {
            report.verdict = Verdict::Inconclusive {
                reason: "no spread in selection norms".into(),
            };
        }
    }
    report
}
