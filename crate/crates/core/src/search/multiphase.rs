use alloc::vec::Vec;

use super::cluster::{cluster_quasi_replicates, grid_candidates, Cluster, ClosestDistances};
use super::{discrete_pea, engine, improve_from, Exchange, Problem, SearchConfig, SearchResult, TryExecutor, TryOutcome};
use crate::criterion::{log_det, model_matrix_rows};
use crate::design::{CandidateSet, Design};
use crate::Error;

/// Continuous algorithm used in the second phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase2Mode {
    Pea,
    Cea,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiphaseConfig {
    /// Random tries of the coarse discrete search.
    pub phase1: SearchConfig,
    /// Critical value, iteration cap and extra starts of the continuous
    /// refinement; `tries` and `seed` are unused.
    pub phase2: SearchConfig,
    pub mode: Phase2Mode,
    pub closest: ClosestDistances,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiphaseResult {
    pub phase1: SearchResult,
    /// Distinct Phase-1 designs used as Phase-2 starts.
    pub phase1_distinct: usize,
    pub phase2: SearchResult,
    /// Quasi-replicate clusters of the Phase-2 best design, with their
    /// snapped levels.
    pub clusters: Vec<Cluster>,
    pub snapped: Design,
    pub snapped_phi: f64,
    /// Discrete exchange over the distinct snapped points.
    pub reallocation: TryOutcome,
    pub design: Design,
    pub phi: f64,
}

fn phi_rows(problem: &Problem<'_>, rows: &[Vec<f64>]) -> f64 {
    model_matrix_rows(problem.model, rows, problem.theta.values()).map_or(f64::NEG_INFINITY, |f| log_det(&f))
}

/// Moves every cluster onto the closest-distance grid, one factor at a
/// time and cluster by cluster, choosing for each the grid level that
/// maximizes φ of the current design. Returns the snapped design and the
/// clusters with their chosen levels.
pub fn snap_clusters(
    problem: &Problem<'_>,
    design: &Design,
    closest: &ClosestDistances,
) -> Result<(Design, Vec<Cluster>), Error> {
    let mut clusters = cluster_quasi_replicates(design, closest);
    let mut rows = design.rows().to_vec();
    for (k, f) in problem.region.factors().iter().enumerate() {
        for cl in clusters.iter_mut() {
            let (xmin, xmax) = cl
                .members
                .iter()
                .map(|&i| rows[i][k])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            let cands = grid_candidates(xmin, xmax, closest.get(k), f.lo, f.hi);
            let mut best: Option<(f64, f64)> = None;
            for &x in &cands {
                for &i in &cl.members {
                    rows[i][k] = x;
                }
                let phi = phi_rows(problem, &rows);
                if best.is_none_or(|(_, b)| phi > b) {
                    best = Some((x, phi));
                }
            }
            // An empty candidate list means no grid level fits inside the
            // range; the nearest bound is used instead.
            let level = best.map_or_else(|| if xmin - f.lo < f.hi - xmax { f.lo } else { f.hi }, |(x, _)| x);
            for &i in &cl.members {
                rows[i][k] = level;
            }
            cl.levels[k] = level;
        }
    }
    Ok((Design::new(rows, problem.region.clone())?, clusters))
}

/// Coarse discrete search, continuous refinement from every distinct
/// coarse solution, then snapping of quasi-replicates to the
/// closest-distance grid and a final discrete exchange among the snapped
/// points.
pub fn multiphase<E: TryExecutor>(
    problem: &Problem<'_>,
    omega: &CandidateSet,
    config: &MultiphaseConfig,
    exec: &E,
) -> Result<MultiphaseResult, Error> {
    config.phase2.validate(problem.region)?;
    if config.closest.values().len() != problem.region.dim() {
        return Err(Error::Dimension(alloc::format!(
            "{} closest distances for {} factors",
            config.closest.values().len(),
            problem.region.dim()
        )));
    }

    let phase1 = discrete_pea(problem, omega, &config.phase1, exec)?;
    let starts: Vec<Design> = phase1.distinct_designs().into_iter().cloned().collect();

    let exchange = match config.mode {
        Phase2Mode::Pea => Exchange::ContinuousPoint,
        Phase2Mode::Cea => Exchange::ContinuousCoordinate,
    };
    let phase2 = improve_from(problem, exchange, &starts, &config.phase2, exec)?;

    let (snapped, clusters) = snap_clusters(problem, &phase2.best, &config.closest)?;
    let snapped_phi = problem.phi(&snapped)?;

    let support: Vec<Vec<f64>> = snapped.support().into_iter().map(|(p, _)| p).collect();
    let realloc_config = SearchConfig { tries: 1, ..config.phase2.clone() };
    let reallocation = engine::improve(problem, Exchange::DiscretePoint(&support), snapped.clone(), &realloc_config, 0)?;
    let design = reallocation.design.clone();
    let phi = reallocation.trace.final_phi;

    Ok(MultiphaseResult {
        phase1_distinct: starts.len(),
        phase1,
        phase2,
        clusters,
        snapped,
        snapped_phi,
        reallocation,
        design,
        phi,
    })
}
