//! Three-parameter ReLU network with ℓ1 loss:
//! `f(x) = |x₃·max(x₂,0) − 1| + |x₃·max(x₁+x₂,0)|`, spurious local minimum at
//! `(1, 1, 0)`.
//!
//! Inside `U = B((1,1,0), 1/4)` we have `x₁, x₂ ≥ 3/4` and `x₂x₃ < 1`, so
//! `f = 1 + x₂(|x₃| − x₃) + x₁|x₃|` and the critical set is `{x₃ = 0}`.

use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::problem::{ProblemOracle, ProblemPoint};

pub const RELU_NEIGHBORHOOD_RADIUS: f64 = 0.25;

fn sign0(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn relu(t: f64) -> f64 {
    t.max(0.0)
}

pub fn relu_objective(x: &[f64]) -> f64 {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    (x3 * relu(x2) - 1.0).abs() + (x3 * relu(x1 + x2)).abs()
}

/// Gradient of the local representation, valid inside `U`. On `S` the zero
/// vector is returned, which is a valid Clarke selection at critical points.
pub fn relu_subgradient_local(x: &DenseVector) -> Result<DenseVector> {
    let distance = x.distance(&reference())?;
    if distance > RELU_NEIGHBORHOOD_RADIUS {
        return Err(Error::OutOfNeighborhood {
            distance,
            radius: RELU_NEIGHBORHOOD_RADIUS,
        });
    }
    Ok(local_gradient(x.as_slice()))
}

fn local_gradient(x: &[f64]) -> DenseVector {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    let g = if x3 > 0.0 {
        vec![x3, 0.0, x1]
    } else if x3 < 0.0 {
        vec![-x3, -2.0 * x3, -2.0 * x2 - x1]
    } else {
        vec![0.0, 0.0, 0.0]
    };
    DenseVector::from_raw(g)
}

/// Chain-rule selection of the global formula with `sign(0) = 0` and
/// `max(·,0)' = 0` at the kink. Used once the iterates leave `U`.
fn global_gradient(x: &[f64]) -> DenseVector {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    let sa = sign0(x3 * relu(x2) - 1.0);
    let sb = sign0(x3 * relu(x1 + x2));
    let h2 = if x2 > 0.0 { 1.0 } else { 0.0 };
    let h12 = if x1 + x2 > 0.0 { 1.0 } else { 0.0 };
    DenseVector::from_raw(vec![
        sb * x3 * h12,
        sa * x3 * h2 + sb * x3 * h12,
        sa * relu(x2) + sb * relu(x1 + x2),
    ])
}

fn reference() -> DenseVector {
    DenseVector::from_raw(vec![1.0, 1.0, 0.0])
}

#[derive(Clone, Debug)]
pub struct ReluL1Problem {
    xstar: DenseVector,
}

impl ReluL1Problem {
    pub fn new() -> Self {
        ReluL1Problem { xstar: reference() }
    }
}

impl Default for ReluL1Problem {
    fn default() -> Self {
        Self::new()
    }
}

impl ProblemOracle for ReluL1Problem {
    fn name(&self) -> &str {
        "relu-l1"
    }

    fn dim(&self) -> usize {
        3
    }

    fn reference_point(&self) -> &ProblemPoint {
        &self.xstar
    }

    fn neighborhood_radius(&self) -> f64 {
        RELU_NEIGHBORHOOD_RADIUS
    }

    fn objective(&self, x: &ProblemPoint) -> f64 {
        relu_objective(x.as_slice())
    }

    fn subgradient(&self, x: &ProblemPoint) -> DenseVector {
        if self.in_neighborhood(x) {
            local_gradient(x.as_slice())
        } else {
            global_gradient(x.as_slice())
        }
    }

    fn dist_s(&self, x: &ProblemPoint) -> f64 {
        x[2].abs()
    }

    fn project_s(&self, x: &ProblemPoint) -> ProblemPoint {
        DenseVector::from_raw(vec![x[0], x[1], 0.0])
    }

    fn tangent_project(&self, _y: &ProblemPoint, v: &DenseVector) -> DenseVector {
        DenseVector::from_raw(vec![v[0], v[1], 0.0])
    }

    fn riemannian_grad(&self, _y: &ProblemPoint) -> DenseVector {
        DenseVector::zeros(3)
    }

    fn chetaev(&self, x: &ProblemPoint) -> f64 {
        1.0 - x[0]
    }

    fn theta1(&self) -> Option<f64> {
        Some(1.0)
    }

    fn c1(&self, alpha: f64) -> Option<f64> {
        Some(alpha)
    }

    fn near_nonsmooth_locus(&self, x: &ProblemPoint, h: f64) -> bool {
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        let margin = 4.0 * h;
        x3.abs() <= margin
            || x2.abs() <= margin
            || (x1 + x2).abs() <= 2.0 * margin
            || (x3 * relu(x2) - 1.0).abs() <= margin * (1.0 + x2.abs() + x3.abs())
    }

    fn lower_witness(&self) -> Option<ProblemPoint> {
        Some(DenseVector::from_raw(vec![-1.0, 1.0, 1.0]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{uniform_in_ball, validate_subgradient};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DenseVector {
        DenseVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn objective_examples() {
        assert_eq!(relu_objective(&[1.0, 1.0, 0.0]), 1.0);
        assert_eq!(relu_objective(&[-1.0, 1.0, 1.0]), 0.0);
        assert!((relu_objective(&[1.0, 1.0, 0.1]) - 1.1).abs() < 1e-15);
    }

    #[test]
    fn local_subgradient_examples() {
        assert_eq!(
            relu_subgradient_local(&v(&[1.0, 1.0, 0.1])).unwrap(),
            v(&[0.1, 0.0, 1.0])
        );
        assert_eq!(
            relu_subgradient_local(&v(&[1.0, 1.0, -0.1])).unwrap(),
            v(&[0.1, 0.2, -3.0])
        );
        assert_eq!(
            relu_subgradient_local(&v(&[1.0, 1.0, 0.0])).unwrap(),
            v(&[0.0, 0.0, 0.0])
        );
        assert!(matches!(
            relu_subgradient_local(&v(&[1.5, 1.0, 0.0])),
            Err(Error::OutOfNeighborhood { .. })
        ));
    }

    #[test]
    fn geometry_examples() {
        let p = ReluL1Problem::new();
        assert_eq!(p.dist_s(&v(&[1.0, 1.0, -0.2])), 0.2);
        assert_eq!(p.chetaev(&v(&[1.0, 1.0, 0.0])), 0.0);
        assert_eq!(
            p.tangent_project(&v(&[1.0, 1.0, 0.0]), &v(&[0.1, 0.2, -3.0])),
            v(&[0.1, 0.2, 0.0])
        );
        assert_eq!(p.dist_s(p.reference_point()), 0.0);
    }

    #[test]
    fn finite_difference_audit_example() {
        let p = ReluL1Problem::new();
        let d = validate_subgradient(&p, &v(&[1.0, 1.0, 0.1]), 1e-6)
            .discrepancy()
            .unwrap();
        assert!(d <= 1e-6, "discrepancy {d}");
        assert!(validate_subgradient(&p, &v(&[1.0, 1.0, 0.0]), 1e-6)
            .discrepancy()
            .is_none());
    }

    #[test]
    fn global_selection_matches_finite_differences_outside_u() {
        let p = ReluL1Problem::new();
        for x in [
            [0.3, 0.2, 0.4],
            [2.0, -0.5, 0.7],
            [-1.0, 1.2, 1.5],
            [0.5, 0.6, -0.8],
        ] {
            let x = v(&x);
            assert!(!p.in_neighborhood(&x));
            let d = validate_subgradient(&p, &x, 1e-6).discrepancy().unwrap();
            assert!(d <= 1e-6, "discrepancy {d} at {x:?}");
        }
    }

    #[test]
    fn local_form_and_minimality_on_random_points() {
        let p = ReluL1Problem::new();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x = uniform_in_ball(p.reference_point(), RELU_NEIGHBORHOOD_RADIUS, &mut rng);
            let (x1, x2, x3) = (x[0], x[1], x[2]);
            let local = 1.0 + x2 * (x3.abs() - x3) + x1 * x3.abs();
            let f = p.objective(&x);
            assert!((f - local).abs() <= 1e-12);
            assert!(f >= 1.0 - 1e-12);
            if x3 != 0.0 {
                assert!(f > 1.0);
            }
        }
        let on_s = v(&[1.1, 0.9, 0.0]);
        assert_eq!(p.objective(&on_s), 1.0);
    }

    #[test]
    fn verdier_bound_on_random_pairs() {
        let p = ReluL1Problem::new();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let x = uniform_in_ball(p.reference_point(), RELU_NEIGHBORHOOD_RADIUS, &mut rng);
            let y = p.project_s(&uniform_in_ball(p.reference_point(), 0.2, &mut rng));
            let t = p.tangent_project(&y, &p.subgradient(&x));
            let x3 = x[2];
            let lhs = t.norm().powi(2);
            assert!((lhs - (x3 * x3 + (x3.abs() - x3).powi(2))).abs() <= 1e-14);
            assert!(lhs <= 5.0 * x.distance(&y).unwrap().powi(2) * (1.0 + 1e-12));
        }
    }
}
