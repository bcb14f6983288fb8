use crate::error::Result;
use crate::linalg::DenseVector;
use crate::par::Execution;
use crate::problem::ProblemOracle;

use super::{nested_samples, require_samples, CertificateReport, Verdict};

/// `f(x) − f(x*)`.
pub fn local_min_gap(p: &dyn ProblemOracle, x: &DenseVector) -> f64 {
    p.objective(x) - p.objective(p.reference_point())
}

/// Samples admissible perturbations of `x*` and checks `f(x) ≥ f(x*) − 1e-12`.
/// Also evaluates the problem's lower witness, if any, to report whether `x*`
/// is spurious.
pub fn probe_local_min(
    p: &dyn ProblemOracle,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<CertificateReport> {
    require_samples(n_samples, 1000)?;
    let samples = nested_samples(n_samples, seed, exec, |_, rng| {
        let x = p.sample_admissible(rng);
        (local_min_gap(p, &x), x)
    });
    let (gap, x) = samples
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least 1000 samples");

    let f_ref = p.objective(p.reference_point());
    let mut report = CertificateReport {
        certifier: "local-min".into(),
        problem: p.name().into(),
        samples: n_samples,
        statistic_name: "min_objective_gap".into(),
        statistic: gap,
        witness: vec![("x".into(), x)],
        verdict: if gap >= -1e-12 {
            Verdict::Satisfied {
                constant: gap,
                exponent: None,
            }
        } else {
            Verdict::Violated { step: None }
        },
        details: Vec::new(),
    };
    report.push_detail("reference_objective", f_ref);
    match p.lower_witness() {
        Some(w) => {
            let f_w = p.objective(&w);
            report.push_detail("witness_objective", f_w);
            report.push_detail("spurious", f_w < f_ref);
            report.witness.push(("lower".into(), w));
        }
        None => report.push_detail("spurious", false),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::problems::{AbsControlProblem, ReluL1Problem, RpcaL1Problem};

    #[test]
    fn relu_is_spurious_local_min() {
        let r = probe_local_min(&ReluL1Problem::new(), 1000, 1, Execution::Sequential).unwrap();
        assert!(r.verdict.is_satisfied());
        assert_eq!(r.detail("spurious"), Some("true"));
        assert_eq!(r.detail("witness_objective"), Some("0"));
    }

    #[test]
    fn small_rpca_witness() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, -3.0]]).unwrap();
        let p = RpcaL1Problem::build_spurious_min(m, 1).unwrap();
        let r = probe_local_min(&p, 1000, 1, Execution::Sequential).unwrap();
        assert!(r.verdict.is_satisfied());
        assert_eq!(r.detail("witness_objective"), Some("2"));
        assert_eq!(r.detail("reference_objective"), Some("5"));
    }

    #[test]
    fn abs_control_is_not_spurious() {
        let r = probe_local_min(&AbsControlProblem::new(), 1000, 1, Execution::Sequential).unwrap();
        assert!(r.verdict.is_satisfied());
        assert_eq!(r.detail("spurious"), Some("false"));
    }
}
