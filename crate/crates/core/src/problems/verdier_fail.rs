//! `f(x₁, x₂) = max{−x₁² + 2x₂, |x₂|}` along `S = ℝ × {0}`: `f` vanishes on
//! `S` near the origin, yet subgradients just above `S` keep a tangential
//! component `−2x₁` while their distance to `S` can be as small as `x₁²`, so
//! no Lipschitz bound of Verdier type holds at the origin.

use crate::linalg::DenseVector;
use crate::problem::{ProblemOracle, ProblemPoint};

/// Selection: gradient of the active branch, ties go to `−x₁² + 2x₂`, and
/// `sign(0) = 0` on the `|x₂|` branch.
pub fn verdier_fail_subgradient(x: &[f64]) -> [f64; 2] {
    let (x1, x2) = (x[0], x[1]);
    let smooth = -x1 * x1 + 2.0 * x2;
    if smooth >= x2.abs() {
        [-2.0 * x1, 2.0]
    } else if x2 > 0.0 {
        [0.0, 1.0]
    } else if x2 < 0.0 {
        [0.0, -1.0]
    } else {
        [0.0, 0.0]
    }
}

#[derive(Clone, Debug)]
pub struct VerdierFailProblem {
    xstar: DenseVector,
}

impl VerdierFailProblem {
    pub fn new() -> Self {
        VerdierFailProblem {
            xstar: DenseVector::zeros(2),
        }
    }
}

impl Default for VerdierFailProblem {
    fn default() -> Self {
        Self::new()
    }
}

impl ProblemOracle for VerdierFailProblem {
    fn name(&self) -> &str {
        "verdier-fail"
    }

    fn dim(&self) -> usize {
        2
    }

    fn reference_point(&self) -> &ProblemPoint {
        &self.xstar
    }

    fn neighborhood_radius(&self) -> f64 {
        0.5
    }

    fn objective(&self, x: &ProblemPoint) -> f64 {
        let (x1, x2) = (x[0], x[1]);
        (-x1 * x1 + 2.0 * x2).max(x2.abs())
    }

    fn subgradient(&self, x: &ProblemPoint) -> DenseVector {
        DenseVector::from_raw(verdier_fail_subgradient(x.as_slice()).to_vec())
    }

    fn dist_s(&self, x: &ProblemPoint) -> f64 {
        x[1].abs()
    }

    fn project_s(&self, x: &ProblemPoint) -> ProblemPoint {
        DenseVector::from_raw(vec![x[0], 0.0])
    }

    fn tangent_project(&self, _y: &ProblemPoint, v: &DenseVector) -> DenseVector {
        DenseVector::from_raw(vec![v[0], 0.0])
    }

    fn riemannian_grad(&self, _y: &ProblemPoint) -> DenseVector {
        DenseVector::zeros(2)
    }

    fn chetaev(&self, x: &ProblemPoint) -> f64 {
        -self.objective(x)
    }

    fn theta1(&self) -> Option<f64> {
        None
    }

    fn c1(&self, _alpha: f64) -> Option<f64> {
        None
    }

    fn near_nonsmooth_locus(&self, x: &ProblemPoint, h: f64) -> bool {
        let (x1, x2) = (x[0], x[1]);
        let gap = (-x1 * x1 + 2.0 * x2) - x2.abs();
        x2.abs() <= 2.0 * h || gap.abs() <= 8.0 * h * (1.0 + x1.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::validate_subgradient;

    #[test]
    fn selection_examples() {
        assert_eq!(verdier_fail_subgradient(&[0.1, 0.02]), [-0.2, 2.0]);
        assert_eq!(verdier_fail_subgradient(&[1.0, -1.0]), [0.0, -1.0]);
        assert_eq!(verdier_fail_subgradient(&[0.0, 0.0]), [0.0, 2.0]);
    }

    #[test]
    fn vanishes_on_s() {
        let p = VerdierFailProblem::new();
        for i in 0..=200 {
            let x1 = -1.0 + i as f64 / 100.0;
            assert_eq!(p.objective(&DenseVector::new(vec![x1, 0.0]).unwrap()), 0.0);
        }
    }

    #[test]
    fn audit_off_locus() {
        let p = VerdierFailProblem::new();
        for x in [[0.1, 0.02], [0.3, -0.1], [0.05, 0.3]] {
            let x = DenseVector::new(x.to_vec()).unwrap();
            assert!(validate_subgradient(&p, &x, 1e-6).discrepancy().unwrap() <= 1e-6);
        }
    }
}
