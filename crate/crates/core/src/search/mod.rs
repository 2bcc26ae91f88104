//! Exact-design construction.
//!
//! All algorithms share one loop: starting from a nonsingular design, visit
//! the runs in order and replace a run (point exchange) or one coordinate
//! of a run (coordinate exchange) whenever the determinant ratio `d` of the
//! best replacement exceeds the critical value. Passes repeat while any
//! exchange was made, up to `max_iterations`. The replacement is searched
//! either over a discrete candidate set or over the continuous region with
//! Nelder-Mead.
//!
//! Independent tries are dispatched through a [`TryExecutor`], so callers
//! with threads can run them concurrently. Each try draws from its own
//! random stream derived from `(seed, try_index)`, which makes the set of
//! outcomes independent of scheduling.

mod cluster;
mod engine;
mod multiphase;

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use cluster::{cluster_quasi_replicates, on_grid, Cluster, ClosestDistances};
pub use engine::{random_initial_design, DrawFrom, MAX_START_ATTEMPTS};
pub use multiphase::{multiphase, snap_clusters, MultiphaseConfig, MultiphaseResult, Phase2Mode};

use crate::design::{CandidateSet, Design, DesignRegion, PriorTheta};
use crate::model::Model;
use crate::optim::NmOptions;
use crate::Error;

/// Settings shared by all exchange algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Number of independent tries.
    pub tries: usize,
    /// An exchange is made only if its determinant ratio exceeds this.
    pub critical_value: f64,
    pub seed: u64,
    /// Cap on full passes over the design per try.
    pub max_iterations: usize,
    /// Additional Nelder-Mead starting points (continuous algorithms).
    pub extra_starts: Vec<Vec<f64>>,
    pub nm: NmOptions,
}

impl SearchConfig {
    pub fn new(tries: usize, critical_value: f64, seed: u64) -> Self {
        Self {
            tries,
            critical_value,
            seed,
            max_iterations: 30,
            extra_starts: Vec::new(),
            nm: NmOptions::default(),
        }
    }

    pub fn with_extra_starts(mut self, starts: Vec<Vec<f64>>) -> Self {
        self.extra_starts = starts;
        self
    }

    pub fn validate(&self, region: &DesignRegion) -> Result<(), Error> {
        if self.tries == 0 {
            return Err(Error::Config("tries must be at least 1".into()));
        }
        if !(self.critical_value > 1.0) || !self.critical_value.is_finite() {
            return Err(Error::Config(alloc::format!("critical value {} must exceed 1", self.critical_value)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if let Some(s) = self.extra_starts.iter().find(|s| !region.contains(s)) {
            return Err(Error::Config(alloc::format!("extra start {s:?} lies outside the region")));
        }
        self.nm.validate().map_err(|e| Error::Config(alloc::format!("{e}")))
    }

    /// Random stream of one try.
    pub fn try_rng(&self, try_index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(try_index as u64);
        rng
    }
}

/// The model, prior, region and run count of one design problem.
#[derive(Clone, Copy)]
pub struct Problem<'a> {
    pub model: &'a dyn Model,
    pub theta: &'a PriorTheta,
    pub region: &'a DesignRegion,
    pub n: usize,
}

impl<'a> Problem<'a> {
    pub fn new(model: &'a dyn Model, theta: &'a PriorTheta, region: &'a DesignRegion, n: usize) -> Result<Self, Error> {
        if model.n_factors() != region.dim() {
            return Err(Error::Dimension(alloc::format!(
                "model has {} factors, region has {}",
                model.n_factors(),
                region.dim()
            )));
        }
        if theta.len() != model.n_params() {
            return Err(Error::Dimension(alloc::format!(
                "prior has {} values, model has {} parameters",
                theta.len(),
                model.n_params()
            )));
        }
        if n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        Ok(Self { model, theta, region, n })
    }

    pub fn phi(&self, design: &Design) -> Result<f64, Error> {
        crate::criterion::phi(self.model, design, self.theta)
    }
}

/// How the replacement for a run (or coordinate) is chosen.
#[derive(Debug, Clone, Copy)]
pub enum Exchange<'a> {
    /// Best point of a discrete candidate set.
    DiscretePoint(&'a [Vec<f64>]),
    /// Best level from the factor's candidate list.
    DiscreteCoordinate(&'a [Vec<f64>]),
    /// Nelder-Mead over the region.
    ContinuousPoint,
    /// One-dimensional Nelder-Mead over the factor's range.
    ContinuousCoordinate,
}

/// Record of one try.
#[derive(Debug, Clone, PartialEq)]
pub struct TryTrace {
    pub try_index: usize,
    /// Full passes over the design, including the final pass without an
    /// exchange.
    pub iterations: usize,
    /// φ of the start, then after every accepted exchange.
    pub phi_trajectory: Vec<f64>,
    pub final_phi: f64,
}

impl TryTrace {
    pub fn exchanges(&self) -> usize {
        self.phi_trajectory.len().saturating_sub(1)
    }

    pub fn start_phi(&self) -> f64 {
        self.phi_trajectory[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TryOutcome {
    pub design: Design,
    pub trace: TryTrace,
}

/// A try that was abandoned (no nonsingular start, or the information
/// matrix became singular).
#[derive(Debug, Clone, PartialEq)]
pub struct TryFailure {
    pub try_index: usize,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: Design,
    pub best_phi: f64,
    pub best_try: usize,
    /// Successful tries in try order.
    pub outcomes: Vec<TryOutcome>,
    pub failures: Vec<TryFailure>,
}

impl SearchResult {
    /// Collects try results; the best design is the one with the largest
    /// φ, earliest try on ties.
    pub fn from_tries(results: Vec<Result<TryOutcome, TryFailure>>) -> Result<Self, Error> {
        let mut outcomes = Vec::new();
        let mut failures = Vec::new();
        for r in results {
            match r {
                Ok(o) => outcomes.push(o),
                Err(f) => failures.push(f),
            }
        }
        let best = outcomes
            .iter()
            .enumerate()
            .fold(None::<(usize, f64)>, |acc, (i, o)| match acc {
                Some((_, phi)) if o.trace.final_phi <= phi => acc,
                _ => Some((i, o.trace.final_phi)),
            })
            .map(|(i, _)| i)
            .ok_or(Error::AllTriesFailed)?;
        Ok(Self {
            best: outcomes[best].design.clone(),
            best_phi: outcomes[best].trace.final_phi,
            best_try: outcomes[best].trace.try_index,
            outcomes,
            failures,
        })
    }

    pub fn mean_iterations(&self) -> f64 {
        let n = self.outcomes.len().max(1) as f64;
        self.outcomes.iter().map(|o| o.trace.iterations as f64).sum::<f64>() / n
    }

    pub fn mean_phi(&self) -> f64 {
        let n = self.outcomes.len().max(1) as f64;
        self.outcomes.iter().map(|o| o.trace.final_phi).sum::<f64>() / n
    }

    /// The `k` largest final φ values, descending.
    pub fn top_phis(&self, k: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.outcomes.iter().map(|o| o.trace.final_phi).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v.truncate(k);
        v
    }

    /// Final designs with duplicates (same multiset of runs) removed, in
    /// try order.
    pub fn distinct_designs(&self) -> Vec<&Design> {
        let mut seen: Vec<Vec<Vec<f64>>> = Vec::new();
        let mut out = Vec::new();
        for o in &self.outcomes {
            let key = o.design.sorted_rows();
            if !seen.contains(&key) {
                seen.push(key);
                out.push(&o.design);
            }
        }
        out
    }
}

/// Runs independent tries, possibly concurrently. Results must come back
/// in index order.
pub trait TryExecutor {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Runs tries one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl TryExecutor for Sequential {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..count).map(job).collect()
    }
}

fn run_random_tries<E: TryExecutor>(
    problem: &Problem<'_>,
    exchange: Exchange<'_>,
    draw: DrawFrom<'_>,
    config: &SearchConfig,
    exec: &E,
) -> Result<SearchResult, Error> {
    config.validate(problem.region)?;
    let results = exec.map(config.tries, |t| {
        let mut rng = config.try_rng(t);
        random_initial_design(problem, draw, &mut rng)
            .and_then(|start| engine::improve(problem, exchange, start, config, t))
            .map_err(|error| TryFailure { try_index: t, error })
    });
    SearchResult::from_tries(results)
}

/// Point exchange over a discrete candidate set.
pub fn discrete_pea<E: TryExecutor>(
    problem: &Problem<'_>,
    omega: &CandidateSet,
    config: &SearchConfig,
    exec: &E,
) -> Result<SearchResult, Error> {
    let CandidateSet::Points(points) = omega else {
        return Err(Error::Config("point exchange needs a point candidate set".into()));
    };
    run_random_tries(problem, Exchange::DiscretePoint(points), DrawFrom::Candidates(omega), config, exec)
}

/// Coordinate exchange over per-factor candidate levels.
pub fn discrete_cea<E: TryExecutor>(
    problem: &Problem<'_>,
    levels: &CandidateSet,
    config: &SearchConfig,
    exec: &E,
) -> Result<SearchResult, Error> {
    let CandidateSet::PerFactor(ls) = levels else {
        return Err(Error::Config("coordinate exchange needs per-factor levels".into()));
    };
    run_random_tries(problem, Exchange::DiscreteCoordinate(ls), DrawFrom::Candidates(levels), config, exec)
}

/// Point exchange with the replacement found by Nelder-Mead over the
/// region, started from the current run and `config.extra_starts`.
pub fn continuous_pea<E: TryExecutor>(problem: &Problem<'_>, config: &SearchConfig, exec: &E) -> Result<SearchResult, Error> {
    run_random_tries(problem, Exchange::ContinuousPoint, DrawFrom::Region, config, exec)
}

/// Coordinate exchange with one-dimensional Nelder-Mead per coordinate.
pub fn continuous_cea<E: TryExecutor>(problem: &Problem<'_>, config: &SearchConfig, exec: &E) -> Result<SearchResult, Error> {
    run_random_tries(problem, Exchange::ContinuousCoordinate, DrawFrom::Region, config, exec)
}

/// Improves each of the given starting designs once (no random starts).
/// `config.tries` is ignored; try `i` starts from `starts[i]`.
pub fn improve_from<E: TryExecutor>(
    problem: &Problem<'_>,
    exchange: Exchange<'_>,
    starts: &[Design],
    config: &SearchConfig,
    exec: &E,
) -> Result<SearchResult, Error> {
    SearchConfig { tries: starts.len().max(1), ..config.clone() }.validate(problem.region)?;
    let results = exec.map(starts.len(), |t| {
        engine::improve(problem, exchange, starts[t].clone(), config, t).map_err(|error| TryFailure { try_index: t, error })
    });
    SearchResult::from_tries(results)
}

/// Name of an algorithm variant, as used on the command line.
pub fn algorithm_names() -> [&'static str; 4] {
    ["discrete-pea", "discrete-cea", "continuous-pea", "continuous-cea"]
}
