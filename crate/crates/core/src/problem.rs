//! The contract every nonsmooth problem exposes to the dynamics engine and
//! the certifiers.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::DenseVector;

/// A point in the ambient space of a problem. Matrix-valued problems flatten
/// their factors row-major, first factor first.
pub type ProblemPoint = DenseVector;

/// A locally Lipschitz objective together with the local geometry of its
/// critical set `S` around a candidate local minimum `x*`.
///
/// The geometric capabilities (`dist_s`, `project_s`, `tangent_project`,
/// `riemannian_grad`) are only required to be correct inside the ball
/// `U = B(x*, ρ_U)`. All methods are deterministic.
pub trait ProblemOracle: Send + Sync {
    /// Stable identifier, used in trajectory logs and reports.
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// The candidate (spurious) local minimum `x*`.
    fn reference_point(&self) -> &ProblemPoint;

    /// Radius of the ball used as the neighborhood `U` of `x*`.
    fn neighborhood_radius(&self) -> f64;

    fn objective(&self, x: &ProblemPoint) -> f64;

    /// One element of the Clarke subdifferential, chosen by a fixed rule.
    fn subgradient(&self, x: &ProblemPoint) -> DenseVector;

    fn dist_s(&self, x: &ProblemPoint) -> f64;

    fn project_s(&self, x: &ProblemPoint) -> ProblemPoint;

    /// Orthogonal projection of `v` onto the tangent space of `S` at `y`.
    fn tangent_project(&self, y: &ProblemPoint, v: &DenseVector) -> DenseVector;

    /// Riemannian gradient of `f` along `S` at `y ∈ S`.
    fn riemannian_grad(&self, y: &ProblemPoint) -> DenseVector;

    /// Chetaev function value.
    fn chetaev(&self, x: &ProblemPoint) -> f64;

    /// Declared exponent θ₁ of the Chetaev increment bound, `None` when the
    /// problem makes no instability claim.
    fn theta1(&self) -> Option<f64>;

    /// Declared coefficient c₁ for step size `alpha`.
    fn c1(&self, alpha: f64) -> Option<f64>;

    /// True if the central-difference stencil of half-width `h` around `x`
    /// may cross a point where `f` is not differentiable.
    fn near_nonsmooth_locus(&self, x: &ProblemPoint, h: f64) -> bool;

    /// A point with strictly lower objective than `x*`, if one is known.
    fn lower_witness(&self) -> Option<ProblemPoint> {
        None
    }

    /// Samples a point of the admissible perturbation ball around `x*` used
    /// when probing local minimality. Defaults to uniform in `U`.
    fn sample_admissible(&self, rng: &mut dyn rand::RngCore) -> ProblemPoint {
        uniform_in_ball(self.reference_point(), self.neighborhood_radius(), rng)
    }

    fn distance_to_reference(&self, x: &ProblemPoint) -> f64 {
        x.distance(self.reference_point())
            .expect("point dimension matches problem")
    }

    fn in_neighborhood(&self, x: &ProblemPoint) -> bool {
        self.distance_to_reference(x) <= self.neighborhood_radius()
    }
}

/// Outcome of the finite-difference audit of a subgradient oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SubgradientAudit {
    /// Max coordinate discrepancy between central differences and the oracle.
    Discrepancy(f64),
    /// The stencil touches the nonsmooth locus; no verdict.
    Skipped,
}

impl SubgradientAudit {
    pub fn discrepancy(self) -> Option<f64> {
        match self {
            SubgradientAudit::Discrepancy(d) => Some(d),
            SubgradientAudit::Skipped => None,
        }
    }
}

/// Compares the oracle's subgradient with central differences of the
/// objective at a point where `f` is differentiable.
pub fn validate_subgradient(p: &dyn ProblemOracle, x: &ProblemPoint, h: f64) -> SubgradientAudit {
    assert!(h > 0.0, "finite-difference step must be positive");
    if p.near_nonsmooth_locus(x, h) {
        return SubgradientAudit::Skipped;
    }
    let v = p.subgradient(x);
    let mut coords = x.as_slice().to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..coords.len() {
        let xi = coords[i];
        coords[i] = xi + h;
        let fp = p.objective(&DenseVector::from_raw(coords.clone()));
        coords[i] = xi - h;
        let fm = p.objective(&DenseVector::from_raw(coords.clone()));
        coords[i] = xi;
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((fd - v[i]).abs());
    }
    SubgradientAudit::Discrepancy(worst)
}

/// True iff `v` matches the oracle's selection at `x` within `tol` in every
/// coordinate.
pub fn membership_check(
    p: &dyn ProblemOracle,
    x: &ProblemPoint,
    v: &DenseVector,
    tol: f64,
) -> bool {
    let w = p.subgradient(x);
    w.len() == v.len()
        && w.as_slice()
            .iter()
            .zip(v.as_slice())
            .all(|(a, b)| (a - b).abs() <= tol)
}

/// Uniform direction on the unit sphere of dimension `n - 1`.
pub fn unit_direction(n: usize, rng: &mut (impl Rng + ?Sized)) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = g.iter().fold(0.0, |acc, v| acc + v * v).sqrt();
        if norm > 1e-300 {
            return g.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// `center + radius·u` with `u` uniform on the unit sphere.
pub fn on_sphere(center: &DenseVector, radius: f64, rng: &mut (impl Rng + ?Sized)) -> DenseVector {
    let u = unit_direction(center.len(), rng);
    DenseVector::from_raw(
        center
            .as_slice()
            .iter()
            .zip(u)
            .map(|(c, d)| c + radius * d)
            .collect(),
    )
}

/// Uniform point in the closed ball `B(center, radius)`.
pub fn uniform_in_ball(
    center: &DenseVector,
    radius: f64,
    rng: &mut (impl Rng + ?Sized),
) -> DenseVector {
    let n = center.len();
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / n as f64);
    on_sphere(center, r, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ball_samples_are_contained() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = DenseVector::new(vec![1.0, -2.0, 0.5]).unwrap();
        for _ in 0..1000 {
            let x = uniform_in_ball(&c, 0.1, &mut rng);
            assert!(x.distance(&c).unwrap() <= 0.1 * (1.0 + 1e-12));
        }
        let x = on_sphere(&c, 0.25, &mut rng);
        assert!((x.distance(&c).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_radius_ball_is_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = DenseVector::new(vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(uniform_in_ball(&c, 0.0, &mut rng), c);
    }
}
