//! Built-in problem oracles and a small registry keyed by problem id.

mod control;
mod relu;
mod rpca;
mod verdier_fail;

use std::path::PathBuf;

pub use control::{AbsControlProblem, QuadraticProblem};
pub use relu::{relu_objective, relu_subgradient_local, ReluL1Problem, RELU_NEIGHBORHOOD_RADIUS};
pub use rpca::{rpca_objective, rpca_subgradient, synthetic_zero_row_matrix, RpcaL1Problem};
pub use verdier_fail::{verdier_fail_subgradient, VerdierFailProblem};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::problem::ProblemOracle;

/// Entry amplitude of synthetic robust-PCA data matrices.
pub const SYNTHETIC_AMPLITUDE: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub enum MatrixSource {
    Csv(PathBuf),
    /// Seeded uniform entries with the first `rank` rows zeroed.
    Synthetic {
        rows: usize,
        cols: usize,
        seed: u64,
    },
}

impl Default for MatrixSource {
    fn default() -> Self {
        MatrixSource::Synthetic {
            rows: 8,
            cols: 6,
            seed: 2023,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    ReluL1,
    Rpca { source: MatrixSource, rank: usize },
    AbsControl,
    VerdierFail,
    Quadratic { dim: usize },
}

impl ProblemSpec {
    pub const IDS: [&'static str; 5] = [
        "relu-l1",
        "rpca",
        "abs-control",
        "verdier-fail",
        "quadratic",
    ];

    /// Parses a problem id with default parameters.
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "relu-l1" | "relu" => Ok(ProblemSpec::ReluL1),
            "rpca" => Ok(ProblemSpec::Rpca {
                source: MatrixSource::default(),
                rank: 2,
            }),
            "abs-control" => Ok(ProblemSpec::AbsControl),
            "verdier-fail" => Ok(ProblemSpec::VerdierFail),
            "quadratic" => Ok(ProblemSpec::Quadratic { dim: 2 }),
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            ProblemSpec::ReluL1 => "relu-l1",
            ProblemSpec::Rpca { .. } => "rpca",
            ProblemSpec::AbsControl => "abs-control",
            ProblemSpec::VerdierFail => "verdier-fail",
            ProblemSpec::Quadratic { .. } => "quadratic",
        }
    }

    pub fn build(&self) -> Result<Box<dyn ProblemOracle>> {
        Ok(match self {
            ProblemSpec::ReluL1 => Box::new(ReluL1Problem::new()),
            ProblemSpec::Rpca { source, rank } => Box::new(self::build_rpca(source, *rank)?),
            ProblemSpec::AbsControl => Box::new(AbsControlProblem::new()),
            ProblemSpec::VerdierFail => Box::new(VerdierFailProblem::new()),
            ProblemSpec::Quadratic { dim } => Box::new(QuadraticProblem::new(*dim)),
        })
    }
}

pub fn build_rpca(source: &MatrixSource, rank: usize) -> Result<RpcaL1Problem> {
    let m = match source {
        MatrixSource::Csv(path) => DenseMatrix::read_csv(path).map_err(|e| Error::Matrix {
            path: path.clone(),
            source: Box::new(e),
        })?,
        MatrixSource::Synthetic { rows, cols, seed } => {
            synthetic_zero_row_matrix(*rows, *cols, rank, SYNTHETIC_AMPLITUDE, *seed)?
        }
    };
    RpcaL1Problem::build_spurious_min(m, rank)
}
