//! Robust PCA with ℓ1 loss, `f(X, Y) = ‖XYᵀ − M‖₁`, around the spurious
//! local minimum `(X*, 0)` that exists whenever `M` has `r` zero rows.
//!
//! Points flatten as `X` (m×r, row-major) followed by `Y` (n×r, row-major).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::problem::{ProblemOracle, ProblemPoint};

/// Synthetic entries are rounded to this grid so ℓ1 sums of a few hundred
/// entries are exact in `f64`.
const SYNTHETIC_GRID: f64 = 1.0 / 65536.0;

/// `‖XYᵀ − M‖₁`.
pub fn rpca_objective(x: &DenseMatrix, y: &DenseMatrix, m: &DenseMatrix) -> Result<f64> {
    Ok(x.matmul_transpose(y)?.sub(m)?.l1_norm())
}

/// Subgradient `(ΛY, ΛᵀX)` with `Λ = sign(XYᵀ − M)`, `tie` at zeros.
/// Returns `Λ` as the third component.
pub fn rpca_subgradient(
    x: &DenseMatrix,
    y: &DenseMatrix,
    m: &DenseMatrix,
    tie: f64,
) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix)> {
    let lambda = x.matmul_transpose(y)?.sub(m)?.sign_matrix(tie)?;
    let gx = lambda.matmul(y)?;
    let gy = lambda.transpose_matmul(x)?;
    Ok((gx, gy, lambda))
}

/// An `rows × cols` matrix whose first `zero_rows` rows vanish and whose
/// other entries are uniform in `[-amplitude, amplitude]`, seeded.
pub fn synthetic_zero_row_matrix(
    rows: usize,
    cols: usize,
    zero_rows: usize,
    amplitude: f64,
    seed: u64,
) -> Result<DenseMatrix> {
    if zero_rows >= rows || cols == 0 {
        return Err(Error::InvalidArgument(format!(
            "need zero_rows < rows and cols > 0, got {zero_rows}, {rows}x{cols}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DenseMatrix::zeros(rows, cols);
    for i in zero_rows..rows {
        for j in 0..cols {
            let u: f64 = rng.random_range(-amplitude..=amplitude);
            m.set(i, j, (u / SYNTHETIC_GRID).round() * SYNTHETIC_GRID);
        }
    }
    if m.is_zero() {
        m.set(rows - 1, 0, amplitude);
    }
    Ok(m)
}

#[derive(Clone, Debug)]
pub struct RpcaL1Problem {
    data: DenseMatrix,
    rank: usize,
    /// Indices of the zero rows carrying the identity block of `X*`.
    pivot_rows: Vec<usize>,
    xstar_factor: DenseMatrix,
    xstar: DenseVector,
    xstar_fro_sq: f64,
    radius: f64,
    transposed: bool,
    c1_factor: f64,
}

impl RpcaL1Problem {
    /// Builds the spurious local minimum `X* = [I_r ; 0]` (identity on the
    /// first `r` zero rows of `M`), `Y* = 0`. If `M` has fewer than `r` zero
    /// rows but at least `r` zero columns, the problem is built on `Mᵀ` and
    /// [`RpcaL1Problem::transposed`] reports it.
    pub fn build_spurious_min(m: DenseMatrix, rank: usize) -> Result<Self> {
        if m.is_zero() {
            return Err(Error::Construction("M must be nonzero".into()));
        }
        if rank == 0 || rank >= m.rows().min(m.cols()) {
            return Err(Error::Construction(format!(
                "rank {rank} must satisfy 1 <= r < min(m, n) = {}",
                m.rows().min(m.cols())
            )));
        }
        let zero_rows = |a: &DenseMatrix| -> Vec<usize> {
            (0..a.rows())
                .filter(|&i| a.row(i).iter().all(|&v| v == 0.0))
                .collect()
        };
        let (data, rows, transposed) = {
            let rows = zero_rows(&m);
            if rows.len() >= rank {
                (m, rows, false)
            } else {
                let t = m.transpose();
                let cols = zero_rows(&t);
                if cols.len() < rank {
                    return Err(Error::Construction(format!(
                        "M has {} zero rows and {} zero columns, need {rank}",
                        rows.len(),
                        cols.len()
                    )));
                }
                (t, cols, true)
            }
        };
        let pivot_rows: Vec<usize> = rows.into_iter().take(rank).collect();
        let (mrows, ncols) = data.shape();
        let mut xstar_factor = DenseMatrix::zeros(mrows, rank);
        for (k, &i) in pivot_rows.iter().enumerate() {
            xstar_factor.set(i, k, 1.0);
        }
        let top = DenseMatrix::from_raw(
            rank,
            rank,
            pivot_rows
                .iter()
                .flat_map(|&i| xstar_factor.row(i).to_vec())
                .collect(),
        );
        if top.determinant()?.abs() <= 1e-12 {
            return Err(Error::Construction("top block of X* is singular".into()));
        }

        // ‖H‖∞ ≤ c/(2m) with c = 1 for an identity block.
        let radius = (1.0 / (2.0 * mrows as f64)).min(0.1);

        // Lower bound on ‖ΛᵀX‖_F² − ‖ΛY‖_F² over U∖S:
        // ‖Λ̂ᵀX̂‖ ≥ σ_min(X̂) ≥ 1 − ρ, ‖Λ̃ᵀX̃‖ ≤ √((m−r)n)·ρ, ‖ΛY‖ ≤ √(mn)·ρ.
        let lead = 1.0 - radius - (((mrows - rank) * ncols) as f64).sqrt() * radius;
        let c1_factor = (lead.max(0.0).powi(2) - (mrows * ncols) as f64 * radius * radius).max(0.0);

        let mut coords = xstar_factor.as_slice().to_vec();
        coords.extend(std::iter::repeat_n(0.0, ncols * rank));
        let xstar_fro_sq = xstar_factor.frobenius_norm_sq();
        Ok(RpcaL1Problem {
            data,
            rank,
            pivot_rows,
            xstar_factor,
            xstar: DenseVector::from_raw(coords),
            xstar_fro_sq,
            radius,
            transposed,
            c1_factor,
        })
    }

    /// The data matrix as used internally (transposed if [`Self::transposed`]).
    pub fn data(&self) -> &DenseMatrix {
        &self.data
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn transposed(&self) -> bool {
        self.transposed
    }

    pub fn pivot_rows(&self) -> &[usize] {
        &self.pivot_rows
    }

    pub fn xstar_factor(&self) -> &DenseMatrix {
        &self.xstar_factor
    }

    /// `c₁ / α²`, the lower bound on the Chetaev increment factor in `U∖S`.
    pub fn c1_factor(&self) -> f64 {
        self.c1_factor
    }

    pub fn split(&self, x: &ProblemPoint) -> (DenseMatrix, DenseMatrix) {
        let (m, n) = self.data.shape();
        let r = self.rank;
        let s = x.as_slice();
        assert_eq!(s.len(), (m + n) * r, "point dimension");
        (
            DenseMatrix::from_raw(m, r, s[..m * r].to_vec()),
            DenseMatrix::from_raw(n, r, s[m * r..].to_vec()),
        )
    }

    pub fn join(&self, x: &DenseMatrix, y: &DenseMatrix) -> ProblemPoint {
        let mut coords = x.as_slice().to_vec();
        coords.extend_from_slice(y.as_slice());
        DenseVector::from_raw(coords)
    }

    /// The `Λ` used by the subgradient selection at `x`.
    pub fn sign_pattern(&self, x: &ProblemPoint) -> DenseMatrix {
        let (xf, yf) = self.split(x);
        rpca_subgradient(&xf, &yf, &self.data, 0.0)
            .expect("shapes fixed at construction")
            .2
    }

    /// `α²(‖ΛᵀX‖_F² − ‖ΛY‖_F²)`, the exact Chetaev increment of one step.
    pub fn predicted_increment(&self, x: &ProblemPoint, alpha: f64) -> f64 {
        let (xf, yf) = self.split(x);
        let (gx, gy, _) =
            rpca_subgradient(&xf, &yf, &self.data, 0.0).expect("shapes fixed at construction");
        alpha * alpha * (gy.frobenius_norm_sq() - gx.frobenius_norm_sq())
    }
}

impl ProblemOracle for RpcaL1Problem {
    fn name(&self) -> &str {
        "rpca"
    }

    fn dim(&self) -> usize {
        (self.data.rows() + self.data.cols()) * self.rank
    }

    fn reference_point(&self) -> &ProblemPoint {
        &self.xstar
    }

    fn neighborhood_radius(&self) -> f64 {
        self.radius
    }

    fn objective(&self, x: &ProblemPoint) -> f64 {
        let (xf, yf) = self.split(x);
        rpca_objective(&xf, &yf, &self.data).expect("shapes fixed at construction")
    }

    fn subgradient(&self, x: &ProblemPoint) -> DenseVector {
        let (xf, yf) = self.split(x);
        let (gx, gy, _) =
            rpca_subgradient(&xf, &yf, &self.data, 0.0).expect("shapes fixed at construction");
        self.join(&gx, &gy)
    }

    fn dist_s(&self, x: &ProblemPoint) -> f64 {
        let (_, yf) = self.split(x);
        yf.frobenius_norm()
    }

    fn project_s(&self, x: &ProblemPoint) -> ProblemPoint {
        let split = self.data.rows() * self.rank;
        let mut coords = x.as_slice().to_vec();
        coords[split..].iter_mut().for_each(|c| *c = 0.0);
        DenseVector::from_raw(coords)
    }

    /// `S` is the affine subspace `{Y = 0}`: its tangent space keeps the `X` block.
    fn tangent_project(&self, _y: &ProblemPoint, v: &DenseVector) -> DenseVector {
        self.project_s(v)
    }

    fn riemannian_grad(&self, _y: &ProblemPoint) -> DenseVector {
        DenseVector::zeros(self.dim())
    }

    fn chetaev(&self, x: &ProblemPoint) -> f64 {
        let (xf, yf) = self.split(x);
        // ‖Y*‖_F = 0
        self.xstar_fro_sq + yf.frobenius_norm_sq() - xf.frobenius_norm_sq()
    }

    fn theta1(&self) -> Option<f64> {
        Some(0.0)
    }

    fn c1(&self, alpha: f64) -> Option<f64> {
        Some(alpha * alpha * self.c1_factor)
    }

    fn near_nonsmooth_locus(&self, x: &ProblemPoint, h: f64) -> bool {
        let (xf, yf) = self.split(x);
        let residual = xf.matmul_transpose(&yf).and_then(|p| p.sub(&self.data));
        let Ok(residual) = residual else { return true };
        let margin = 4.0 * h * (1.0 + xf.max_abs().max(yf.max_abs()));
        residual.as_slice().iter().any(|r| r.abs() <= margin)
    }

    /// Rank-one factors of the matrix keeping only the largest-magnitude
    /// entry of `M`, so `f = ‖M‖₁ − max|M_ij|`.
    fn lower_witness(&self) -> Option<ProblemPoint> {
        let (m, n) = self.data.shape();
        let (mut bi, mut bj, mut best) = (0, 0, 0.0);
        for i in 0..m {
            for j in 0..n {
                let a = self.data.get(i, j).abs();
                if a > best {
                    (bi, bj, best) = (i, j, a);
                }
            }
        }
        let mut xf = DenseMatrix::zeros(m, self.rank);
        let mut yf = DenseMatrix::zeros(n, self.rank);
        xf.set(bi, 0, self.data.get(bi, bj));
        yf.set(bj, 0, 1.0);
        Some(self.join(&xf, &yf))
    }
}
