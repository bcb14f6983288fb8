//! Constant-step subgradient iteration `x_{k+1} = x_k − α·v_k`, with
//! per-step logging and escape/stall detection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::par::{map_indexed, Execution};
use crate::problem::{uniform_in_ball, ProblemOracle, ProblemPoint};

/// One logged iterate. `v` is the selection taken at `x`; for the last record
/// of a trajectory it is computed but not applied.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    pub x: ProblemPoint,
    pub f: f64,
    pub chetaev: f64,
    pub dist_s: f64,
    pub v: DenseVector,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Iterate `k` left the closed escape ball.
    Escaped(usize),
    MaxIters,
    /// Iterate `k` landed exactly on `S` inside `U`.
    StalledOnS(usize),
}

impl Outcome {
    pub fn escaped(self) -> bool {
        matches!(self, Outcome::Escaped(_))
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Escaped(_) => "escaped",
            Outcome::MaxIters => "max_iters",
            Outcome::StalledOnS(_) => "stalled_on_s",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub problem: String,
    pub dim: usize,
    pub alpha: f64,
    pub eps_escape: f64,
    pub records: Vec<StepRecord>,
    pub outcome: Outcome,
}

impl Trajectory {
    pub fn last(&self) -> &StepRecord {
        self.records.last().expect("trajectories are non-empty")
    }

    /// Consecutive record pairs `(x_k, x_{k+1})`.
    pub fn steps(&self) -> impl Iterator<Item = (&StepRecord, &StepRecord)> {
        self.records.iter().zip(self.records.iter().skip(1))
    }
}

fn record(
    p: &dyn ProblemOracle,
    k: usize,
    x: ProblemPoint,
    v: DenseVector,
    alpha: f64,
) -> StepRecord {
    StepRecord {
        k,
        f: p.objective(&x),
        chetaev: p.chetaev(&x),
        dist_s: p.dist_s(&x),
        v,
        x,
        alpha,
    }
}

/// Runs the constant-step subgradient method from `x0` until an iterate
/// leaves `B(x*, eps_escape)`, lands exactly on `S` inside `U`, or
/// `max_iters` steps have been taken.
pub fn run(
    p: &dyn ProblemOracle,
    x0: &ProblemPoint,
    alpha: f64,
    eps_escape: f64,
    max_iters: usize,
) -> Result<Trajectory> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {alpha}"
        )));
    }
    if eps_escape.is_nan() || eps_escape <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "escape radius must be positive, got {eps_escape}"
        )));
    }
    if x0.len() != p.dim() {
        return Err(Error::Shape {
            op: "run",
            left: (x0.len(), 1),
            right: (p.dim(), 1),
        });
    }
    if p.distance_to_reference(x0) > eps_escape {
        return Err(Error::InvalidArgument(
            "initial point lies outside the escape ball".into(),
        ));
    }

    let mut traj = Trajectory {
        problem: p.name().to_string(),
        dim: p.dim(),
        alpha,
        eps_escape,
        records: Vec::new(),
        outcome: Outcome::MaxIters,
    };
    let mut x = x0.clone();
    for k in 0.. {
        let v = p.subgradient(&x);
        let escaped = p.distance_to_reference(&x) > eps_escape;
        let stalled = !escaped && p.in_neighborhood(&x) && p.dist_s(&x) == 0.0;
        let done = if escaped {
            Some(Outcome::Escaped(k))
        } else if stalled {
            Some(Outcome::StalledOnS(k))
        } else if k == max_iters {
            Some(Outcome::MaxIters)
        } else {
            None
        };
        let next = match done {
            None => Some(x.sub_scaled(alpha, &v)?),
            Some(_) => None,
        };
        traj.records.push(record(p, k, x, v, alpha));
        if let Some(outcome) = done {
            traj.outcome = outcome;
            break;
        }
        let next = next.expect("step taken when not done");
        if !next.is_finite() {
            return Err(Error::NumericalBlowup {
                trajectory: Box::new(traj),
            });
        }
        x = next;
    }
    Ok(traj)
}

/// An initial point together with the radius of the ball it was drawn from.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialSample {
    pub point: ProblemPoint,
    pub radius: f64,
    /// `false` when `‖x*‖ = 0` and the radius was taken as absolute.
    pub relative: bool,
}

/// Uniform point in the ball of radius `rel_radius·‖x*‖` around `x*`. When
/// `x* = 0` the radius is used as an absolute radius and flagged.
pub fn sample_initial(p: &dyn ProblemOracle, rel_radius: f64, rng: &mut impl Rng) -> InitialSample {
    let scale = p.reference_point().norm();
    let (radius, relative) = if scale > 0.0 {
        (rel_radius * scale, true)
    } else {
        (rel_radius, false)
    };
    InitialSample {
        point: uniform_in_ball(p.reference_point(), radius, rng),
        radius,
        relative,
    }
}

/// Uniform step size in `[lo, hi]`.
pub fn sample_alpha(lo: f64, hi: f64, rng: &mut impl Rng) -> f64 {
    assert!(lo > 0.0 && lo <= hi, "need 0 < lo <= hi, got [{lo}, {hi}]");
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Per-trial random stream: ChaCha8 keyed by the master seed, stream id =
/// trial index. Streams are independent of how trials are scheduled.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Shared settings of a batch of independent trials.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSettings {
    pub trials: usize,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub rel_init_radius: f64,
    pub eps_escape: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl TrialSettings {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if !(self.alpha_lo > 0.0 && self.alpha_lo <= self.alpha_hi && self.alpha_hi.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 < alpha_lo <= alpha_hi, got [{}, {}]",
                self.alpha_lo, self.alpha_hi
            )));
        }
        if !(self.rel_init_radius > 0.0 && self.rel_init_radius.is_finite()) {
            return Err(Error::Config("init radius must be positive".into()));
        }
        if self.eps_escape.is_nan() || self.eps_escape <= 0.0 {
            return Err(Error::Config("escape radius must be positive".into()));
        }
        Ok(())
    }
}

pub struct TrialOutput {
    pub index: usize,
    pub alpha: f64,
    pub init: InitialSample,
    pub result: Result<Trajectory>,
}

/// Draws the step size and initial point of trial `index`, then runs it.
pub fn run_trial(p: &dyn ProblemOracle, settings: &TrialSettings, index: usize) -> TrialOutput {
    let mut rng = trial_rng(settings.seed, index);
    let alpha = sample_alpha(settings.alpha_lo, settings.alpha_hi, &mut rng);
    let init = sample_initial(p, settings.rel_init_radius, &mut rng);
    let result = run(
        p,
        &init.point,
        alpha,
        settings.eps_escape,
        settings.max_iters,
    );
    TrialOutput {
        index,
        alpha,
        init,
        result,
    }
}

/// Runs every trial and reduces each to `T` as soon as it finishes, so at
/// most one trajectory per worker is alive at a time. Output is in trial
/// order regardless of `exec`.
pub fn run_batch<T, F>(
    p: &dyn ProblemOracle,
    settings: &TrialSettings,
    exec: Execution,
    reduce: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(TrialOutput) -> T + Sync + Send,
{
    map_indexed(settings.trials, exec, |i| reduce(run_trial(p, settings, i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{AbsControlProblem, ReluL1Problem};

    fn v(x: &[f64]) -> DenseVector {
        DenseVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn relu_escapes() {
        let p = ReluL1Problem::new();
        let t = run(&p, &v(&[1.0, 1.0, 0.001]), 0.1, 0.5, 100_000).unwrap();
        assert!(t.outcome.escaped());
        assert!(p.distance_to_reference(&t.last().x) > 0.5);
    }

    #[test]
    fn abs_control_stays() {
        let p = AbsControlProblem::new();
        let t = run(&p, &v(&[0.001, 0.001]), 1e-4, 0.5, 10_000).unwrap();
        assert_eq!(t.outcome, Outcome::MaxIters);
        assert_eq!(t.records.len(), 10_001);
        for r in &t.records {
            assert!(r.x.norm() <= 0.001 * 2f64.sqrt() + 2e-4);
        }
    }

    #[test]
    fn relu_stalls_on_s() {
        let p = ReluL1Problem::new();
        let t = run(&p, &v(&[1.0, 1.0, 0.0]), 0.1, 0.5, 100).unwrap();
        assert_eq!(t.outcome, Outcome::StalledOnS(0));
        assert_eq!(t.records.len(), 1);
    }

    #[test]
    fn update_is_exact_and_replayable() {
        let p = ReluL1Problem::new();
        let x0 = v(&[1.0, 1.0, 0.001]);
        let t = run(&p, &x0, 0.1, 0.5, 1000).unwrap();
        for (a, b) in t.steps() {
            let expect = a.x.sub_scaled(a.alpha, &a.v).unwrap();
            assert_eq!(expect, b.x);
        }
        assert_eq!(t, run(&p, &x0, 0.1, 0.5, 1000).unwrap());
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = ReluL1Problem::new();
        assert!(run(&p, &v(&[1.0, 1.0, 0.0]), 0.0, 0.5, 10).is_err());
        assert!(run(&p, &v(&[1.0, 1.0, 0.0]), 0.1, 0.0, 10).is_err());
        assert!(run(&p, &v(&[2.0, 1.0, 0.0]), 0.1, 0.5, 10).is_err());
        assert!(run(&p, &v(&[1.0, 1.0]), 0.1, 0.5, 10).is_err());
    }

    #[test]
    fn sampling_examples() {
        let p = ReluL1Problem::new();
        let mut rng = trial_rng(1, 0);
        for _ in 0..200 {
            let s = sample_initial(&p, 1e-3, &mut rng);
            assert!(s.relative);
            assert!(p.distance_to_reference(&s.point) <= 2f64.sqrt() * 1e-3 * (1.0 + 1e-12));
            let a = sample_alpha(0.05, 0.15, &mut rng);
            assert!((0.05..=0.15).contains(&a));
            let a = sample_alpha(0.000025, 0.000075, &mut rng);
            assert!((0.000025..=0.000075).contains(&a));
        }
        assert_eq!(sample_alpha(0.07, 0.07, &mut rng), 0.07);
        assert_eq!(
            sample_initial(&p, 0.0, &mut rng).point,
            *p.reference_point()
        );
        let s = sample_initial(&AbsControlProblem::new(), 1e-3, &mut rng);
        assert!(!s.relative);
        assert!(s.point.norm() <= 1e-3);
    }

    #[test]
    fn batch_is_schedule_independent() {
        let p = ReluL1Problem::new();
        let settings = TrialSettings {
            trials: 16,
            alpha_lo: 0.05,
            alpha_hi: 0.15,
            rel_init_radius: 1e-3,
            eps_escape: 0.5,
            max_iters: 10_000,
            seed: 42,
        };
        let summarize = |o: TrialOutput| {
            let t = o.result.unwrap();
            (o.alpha.to_bits(), t.outcome, t.last().x.clone())
        };
        let seq = run_batch(&p, &settings, Execution::Sequential, summarize);
        let par = run_batch(&p, &settings, Execution::Parallel, summarize);
        assert_eq!(seq, par);
    }
}
