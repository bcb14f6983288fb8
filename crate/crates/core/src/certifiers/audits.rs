//! Step-by-step audits of a recorded trajectory. Only steps with both
//! endpoints in `U∖S` are checked; the hypotheses are local.

use crate::dynamics::{StepRecord, Trajectory};
use crate::error::{Error, Result};
use crate::problem::ProblemOracle;

use super::{CertificateReport, Verdict};

fn check_problem(p: &dyn ProblemOracle, traj: &Trajectory) -> Result<()> {
    if traj.problem != p.name() || traj.dim != p.dim() {
        return Err(Error::ProblemMismatch {
            expected: format!("{} (dim {})", p.name(), p.dim()),
            found: format!("{} (dim {})", traj.problem, traj.dim),
        });
    }
    Ok(())
}

fn in_u_off_s(p: &dyn ProblemOracle, r: &StepRecord) -> bool {
    p.in_neighborhood(&r.x) && p.dist_s(&r.x) > 0.0
}

fn empty_report(
    certifier: &str,
    p: &dyn ProblemOracle,
    traj: &Trajectory,
    statistic_name: &str,
) -> CertificateReport {
    CertificateReport {
        certifier: certifier.into(),
        problem: p.name().into(),
        samples: traj.records.len().saturating_sub(1),
        statistic_name: statistic_name.into(),
        statistic: f64::NAN,
        witness: Vec::new(),
        verdict: Verdict::Inconclusive {
            reason: "no steps inside U∖S".into(),
        },
        details: Vec::new(),
    }
}

/// Checks `C(x_{k+1}) − C(x_k) ≥ c₁·d(x_k,S)^θ₁` at every step inside `U∖S`,
/// with tolerance `1e-9·(1 + |C(x_k)|)`. The statistic is the smallest
/// slack `ΔC − c₁·d^θ₁`.
pub fn audit_chetaev(p: &dyn ProblemOracle, traj: &Trajectory) -> Result<CertificateReport> {
    check_problem(p, traj)?;
    let mut report = empty_report("chetaev", p, traj, "min_increment_slack");
    let (Some(theta1), Some(c1)) = (p.theta1(), p.c1(traj.alpha)) else {
        report.verdict = Verdict::Inconclusive {
            reason: "problem declares no Chetaev increment bound".into(),
        };
        return Ok(report);
    };
    report.push_detail("theta1", theta1);
    report.push_detail("c1", c1);

    let (mut checked, mut skipped) = (0usize, 0usize);
    let mut first_failure = None;
    let mut worst: Option<(f64, &StepRecord)> = None;
    for (a, b) in traj.steps() {
        if !(in_u_off_s(p, a) && in_u_off_s(p, b)) {
            skipped += 1;
            continue;
        }
        checked += 1;
        let ca = p.chetaev(&a.x);
        let increment = p.chetaev(&b.x) - ca;
        let slack = increment - c1 * p.dist_s(&a.x).powf(theta1);
        if slack < -1e-9 * (1.0 + ca.abs()) && first_failure.is_none() {
            first_failure = Some(a.k);
        }
        if worst.is_none_or(|(w, _)| slack < w) {
            worst = Some((slack, a));
        }
    }
    report.push_detail("checked_steps", checked);
    report.push_detail("skipped_steps", skipped);
    let Some((slack, at)) = worst else {
        return Ok(report);
    };
    report.statistic = slack;
    report.witness.push(("x".into(), at.x.clone()));
    report
        .witness
        .push(("x_next".into(), traj.records[at.k + 1].x.clone()));
    report.verdict = match first_failure {
        Some(k) => Verdict::Violated { step: Some(k) },
        None => Verdict::Satisfied {
            constant: c1,
            exponent: Some(theta1),
        },
    };
    Ok(report)
}

/// Checks `d(x_{k+1},S) ≥ d(x_k,S)` at steps inside `U` with
/// `0 < d(x_k,S) ≤ threshold`. The statistic is the largest threshold for
/// which the property holds on this trajectory: the smallest `d(x_k,S)` among
/// all in-`U` steps that move toward `S`, or `+∞` if none does.
pub fn audit_distance_monotonicity(
    p: &dyn ProblemOracle,
    traj: &Trajectory,
    threshold: f64,
) -> Result<CertificateReport> {
    check_problem(p, traj)?;
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let mut report = empty_report("distance-monotonicity", p, traj, "largest_valid_threshold");
    report.push_detail("threshold", threshold);

    let mut checked = 0usize;
    let mut first_failure = None;
    let mut tightest: Option<(f64, &StepRecord)> = None;
    for (a, b) in traj.steps() {
        if !(p.in_neighborhood(&a.x) && p.in_neighborhood(&b.x)) {
            continue;
        }
        let (da, db) = (p.dist_s(&a.x), p.dist_s(&b.x));
        if da == 0.0 {
            continue;
        }
        if db < da && tightest.is_none_or(|(d, _)| da < d) {
            tightest = Some((da, a));
        }
        if da <= threshold {
            checked += 1;
            if db < da && first_failure.is_none() {
                first_failure = Some(a.k);
            }
        }
    }
    report.push_detail("checked_steps", checked);
    report.statistic = tightest.map_or(f64::INFINITY, |(d, _)| d);
    if let Some((_, at)) = tightest {
        report.witness.push(("x".into(), at.x.clone()));
        report
            .witness
            .push(("x_next".into(), traj.records[at.k + 1].x.clone()));
    }
    report.verdict = match first_failure {
        Some(k) => Verdict::Violated { step: Some(k) },
        None => Verdict::Satisfied {
            constant: threshold,
            exponent: None,
        },
    };
    Ok(report)
}

/// Checks `‖x_k − P_S(x_{k+1})‖ / d(x_k,S) ≤ 1 + α·c₃` at steps inside
/// `U∖S`, taking the projection's Lipschitz constant as 1 (orthogonal
/// projection onto an affine `S`).
pub fn audit_projection_ratio(
    p: &dyn ProblemOracle,
    traj: &Trajectory,
    c3: f64,
) -> Result<CertificateReport> {
    check_problem(p, traj)?;
    let mut report = empty_report("projection-ratio", p, traj, "max_projection_ratio");
    let bound = 1.0 + traj.alpha * c3;
    report.push_detail("bound", bound);
    report.push_detail("lipschitz_constant", 1.0);

    let mut first_failure = None;
    let mut worst: Option<(f64, &StepRecord)> = None;
    for (a, b) in traj.steps() {
        if !(in_u_off_s(p, a) && p.in_neighborhood(&b.x)) {
            continue;
        }
        let ratio = a.x.distance(&p.project_s(&b.x)).expect("same dimension") / p.dist_s(&a.x);
        if ratio > bound * (1.0 + 1e-9) && first_failure.is_none() {
            first_failure = Some(a.k);
        }
        if worst.is_none_or(|(w, _)| ratio > w) {
            worst = Some((ratio, a));
        }
    }
    let Some((ratio, at)) = worst else {
        return Ok(report);
    };
    report.statistic = ratio;
    report.witness.push(("x".into(), at.x.clone()));
    report
        .witness
        .push(("x_next".into(), traj.records[at.k + 1].x.clone()));
    report.verdict = match first_failure {
        Some(k) => Verdict::Violated { step: Some(k) },
        None => Verdict::Satisfied {
            constant: bound,
            exponent: None,
        },
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::run;
    use crate::linalg::DenseVector;
    use crate::problems::{AbsControlProblem, ReluL1Problem};

    fn relu_traj() -> Trajectory {
        let x0 = DenseVector::new(vec![1.0, 1.0, 1e-3]).unwrap();
        run(&ReluL1Problem::new(), &x0, 0.1, 10.0, 500).unwrap()
    }

    #[test]
    fn relu_chetaev_equality() {
        let p = ReluL1Problem::new();
        let r = audit_chetaev(&p, &relu_traj()).unwrap();
        assert!(r.verdict.is_satisfied(), "{:?}", r.verdict);
        assert!(r.statistic.abs() <= 1e-12);
        assert!(r.detail("skipped_steps").unwrap() != "0");
    }

    #[test]
    fn relu_distance_monotone_below_quarter_alpha() {
        let p = ReluL1Problem::new();
        let t = relu_traj();
        let r = audit_distance_monotonicity(&p, &t, 0.1 / 4.0).unwrap();
        assert!(r.verdict.is_satisfied());
        assert!(r.statistic > 0.025);
        let wide = audit_distance_monotonicity(&p, &t, 1.0).unwrap();
        assert!(wide.verdict.is_violated());
    }

    #[test]
    fn relu_projection_ratio_within_bound() {
        let p = ReluL1Problem::new();
        let r = audit_projection_ratio(&p, &relu_traj(), 5f64.sqrt()).unwrap();
        assert!(r.verdict.is_satisfied(), "{:?}", r.verdict);
    }

    #[test]
    fn stalled_trajectory_is_vacuous() {
        let p = ReluL1Problem::new();
        let t = run(
            &p,
            &DenseVector::new(vec![1.0, 1.0, 0.0]).unwrap(),
            0.1,
            0.5,
            10,
        )
        .unwrap();
        let r = audit_distance_monotonicity(&p, &t, 0.025).unwrap();
        assert!(r.verdict.is_satisfied());
        assert_eq!(r.detail("checked_steps"), Some("0"));
    }

    #[test]
    fn mismatched_problem_is_rejected() {
        let t = relu_traj();
        assert!(matches!(
            audit_chetaev(&AbsControlProblem::new(), &t),
            Err(Error::ProblemMismatch { .. })
        ));
    }

    #[test]
    fn control_has_no_chetaev_claim() {
        let p = AbsControlProblem::new();
        let t = run(
            &p,
            &DenseVector::new(vec![0.01, 0.02]).unwrap(),
            1e-3,
            0.5,
            100,
        )
        .unwrap();
        assert!(matches!(
            audit_chetaev(&p, &t).unwrap().verdict,
            Verdict::Inconclusive { .. }
        ));
    }
}
