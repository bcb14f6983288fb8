//! Problems whose reference point is a strict (hence stable) minimum. They
//! make no instability claim: `theta1`/`c1` are `None`, and the Chetaev slot
//! holds `f(x*) − f(x)`.

use crate::linalg::DenseVector;
use crate::problem::{ProblemOracle, ProblemPoint};

/// `f(x) = ‖x‖₁` on ℝ², minimized at the origin.
#[derive(Clone, Debug)]
pub struct AbsControlProblem {
    xstar: DenseVector,
}

impl AbsControlProblem {
    pub fn new() -> Self {
        AbsControlProblem {
            xstar: DenseVector::zeros(2),
        }
    }
}

impl Default for AbsControlProblem {
    fn default() -> Self {
        Self::new()
    }
}

fn sign0(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl ProblemOracle for AbsControlProblem {
    fn name(&self) -> &str {
        "abs-control"
    }

    fn dim(&self) -> usize {
        2
    }

    fn reference_point(&self) -> &ProblemPoint {
        &self.xstar
    }

    fn neighborhood_radius(&self) -> f64 {
        1.0
    }

    fn objective(&self, x: &ProblemPoint) -> f64 {
        x.l1_norm()
    }

    fn subgradient(&self, x: &ProblemPoint) -> DenseVector {
        DenseVector::from_raw(x.as_slice().iter().map(|&t| sign0(t)).collect())
    }

    fn dist_s(&self, x: &ProblemPoint) -> f64 {
        x.norm()
    }

    fn project_s(&self, _x: &ProblemPoint) -> ProblemPoint {
        DenseVector::zeros(2)
    }

    fn tangent_project(&self, _y: &ProblemPoint, _v: &DenseVector) -> DenseVector {
        DenseVector::zeros(2)
    }

    fn riemannian_grad(&self, _y: &ProblemPoint) -> DenseVector {
        DenseVector::zeros(2)
    }

    fn chetaev(&self, x: &ProblemPoint) -> f64 {
        -x.l1_norm()
    }

    fn theta1(&self) -> Option<f64> {
        None
    }

    fn c1(&self, _alpha: f64) -> Option<f64> {
        None
    }

    fn near_nonsmooth_locus(&self, x: &ProblemPoint, h: f64) -> bool {
        x.as_slice().iter().any(|t| t.abs() <= 2.0 * h)
    }
}

/// `f(x) = ½‖x‖²`: a smooth baseline for the oracle audits.
#[derive(Clone, Debug)]
pub struct QuadraticProblem {
    xstar: DenseVector,
}

impl QuadraticProblem {
    pub fn new(dim: usize) -> Self {
        QuadraticProblem {
            xstar: DenseVector::zeros(dim),
        }
    }
}

impl ProblemOracle for QuadraticProblem {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.xstar.len()
    }

    fn reference_point(&self) -> &ProblemPoint {
        &self.xstar
    }

    fn neighborhood_radius(&self) -> f64 {
        1.0
    }

    fn objective(&self, x: &ProblemPoint) -> f64 {
        0.5 * x.norm().powi(2)
    }

    fn subgradient(&self, x: &ProblemPoint) -> DenseVector {
        x.clone()
    }

    fn dist_s(&self, x: &ProblemPoint) -> f64 {
        x.norm()
    }

    fn project_s(&self, _x: &ProblemPoint) -> ProblemPoint {
        DenseVector::zeros(self.dim())
    }

    fn tangent_project(&self, _y: &ProblemPoint, _v: &DenseVector) -> DenseVector {
        DenseVector::zeros(self.dim())
    }

    fn riemannian_grad(&self, _y: &ProblemPoint) -> DenseVector {
        DenseVector::zeros(self.dim())
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

    fn near_nonsmooth_locus(&self, _x: &ProblemPoint, _h: f64) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{uniform_in_ball, validate_subgradient};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_audit_is_exact() {
        let p = QuadraticProblem::new(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let x = uniform_in_ball(p.reference_point(), 1.0, &mut rng);
            assert!(validate_subgradient(&p, &x, 1e-6).discrepancy().unwrap() <= 1e-6);
        }
    }

    #[test]
    fn abs_control_selection() {
        let p = AbsControlProblem::new();
        let x = DenseVector::new(vec![0.3, -0.2]).unwrap();
        assert_eq!(p.subgradient(&x).as_slice(), &[1.0, -1.0]);
        assert_eq!(p.subgradient(p.reference_point()).as_slice(), &[0.0, 0.0]);
        assert!(validate_subgradient(&p, &x, 1e-6).discrepancy().unwrap() <= 1e-9);
        let on_axis = DenseVector::new(vec![0.0, 0.5]).unwrap();
        assert!(validate_subgradient(&p, &on_axis, 1e-6)
            .discrepancy()
            .is_none());
    }
}
