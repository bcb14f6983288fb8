//! Numerical audits of the hypotheses behind instability of a local minimum:
//! Chetaev increments along trajectories, metric subregularity of the
//! subdifferential, the Verdier condition, distance monotonicity, and local
//! minimality with a spurious witness.
//!
//! Sample-based certifiers draw from nested streams: sample `i` depends only
//! on `(seed, i)`, so a run with `2n` samples contains the `n`-sample run.

mod audits;
mod local_min;
mod report;
mod subregularity;
mod verdier;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use audits::{audit_chetaev, audit_distance_monotonicity, audit_projection_ratio};
pub use local_min::{local_min_gap, probe_local_min};
pub use report::{CertificateReport, Verdict};
pub use subregularity::{
    certify_subregularity, subregularity_from_samples, subregularity_ratio, SubregularitySample,
};
pub use verdier::{
    certify_verdier, verdier_ratio, verdier_samples, VerdierSample, VERDIER_DECADES,
};

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};

const BATCH: usize = 256;

/// Stream ids above this are reserved for certifiers, keeping them disjoint
/// from per-trial streams.
const CERTIFIER_STREAM_BASE: u64 = 1 << 40;

/// Draws `n` samples in batches of `BATCH`, batch `b` using its own ChaCha8
/// stream. Sample `i` is a function of `(seed, i)` only.
pub(crate) fn nested_samples<T, F>(n: usize, seed: u64, exec: Execution, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync + Send,
{
    let batches = n.div_ceil(BATCH);
    map_indexed(batches, exec, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(CERTIFIER_STREAM_BASE + b as u64);
        let end = ((b + 1) * BATCH).min(n);
        (b * BATCH..end)
            .map(|i| draw(i, &mut rng))
            .collect::<Vec<T>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

pub(crate) fn require_samples(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidArgument(format!(
            "need at least {min} samples, got {n}"
        )));
    }
    Ok(())
}

/// Certifier names accepted by [`run_certifier`].
pub const CERTIFIERS: [&str; 3] = ["subregularity", "verdier", "local-min"];

/// Runs a sample-based certifier by name.
pub fn run_certifier(
    name: &str,
    p: &dyn crate::problem::ProblemOracle,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<CertificateReport> {
    match name {
        "subregularity" => certify_subregularity(p, n_samples, seed, exec),
        "verdier" => certify_verdier(p, n_samples, seed, exec),
        "local-min" => probe_local_min(p, n_samples, seed, exec),
        other => Err(Error::UnknownCertifier(other.to_string())),
    }
}
