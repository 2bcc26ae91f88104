use alloc::vec;
use alloc::vec::Vec;

use crate::design::{lex_cmp, Design, DesignError, DesignRegion};

/// Relative slack on comparisons against a closest distance, so that
/// values printed on the grid compare as intended.
const REL_SLACK: f64 = 1e-9;

/// Per-factor resolution of feasible levels: two levels closer than this
/// cannot be told apart in the laboratory.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosestDistances(Vec<f64>);

impl ClosestDistances {
    /// Each distance must lie in `(0, width)` of its factor.
    pub fn new(values: Vec<f64>, region: &DesignRegion) -> Result<Self, DesignError> {
        if values.len() != region.dim() {
            return Err(DesignError::RowWidth { run: 0, got: values.len(), expected: region.dim() });
        }
        for (f, &c) in region.factors().iter().zip(&values) {
            if !(c > 0.0 && c < f.width()) {
                return Err(DesignError::BadClosest { name: f.name.clone(), value: c, width: f.width() });
            }
        }
        Ok(Self(values))
    }

    /// Distances declared on the region's factors, if all are present.
    pub fn from_region(region: &DesignRegion) -> Option<Self> {
        region.closest_distances().map(Self)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }
}

/// A group of quasi-replicate runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Run indices, ascending.
    pub members: Vec<usize>,
    /// Per-factor level shared by all members. Before snapping this is the
    /// smallest member coordinate.
    pub levels: Vec<f64>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn within(a: &[f64], b: &[f64], closest: &ClosestDistances) -> bool {
    a.iter()
        .zip(b)
        .zip(closest.values())
        .all(|((x, y), c)| libm::fabs(x - y) < c * (1.0 - REL_SLACK))
}

/// Single-linkage grouping of runs whose coordinates all differ by less
/// than the closest distances. Levels exactly one closest distance apart
/// are distinguishable, so neighbouring grid levels stay separate.
/// Clusters are ordered by their per-factor minimum coordinates.
pub fn cluster_quasi_replicates(design: &Design, closest: &ClosestDistances) -> Vec<Cluster> {
    let rows = design.rows();
    let n = rows.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if within(&rows[i], &rows[j], closest) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(c) => {
                let cl = &mut clusters[c];
                cl.members.push(i);
                for (l, x) in cl.levels.iter_mut().zip(&rows[i]) {
                    *l = l.min(*x);
                }
            }
            None => {
                root_of[r] = Some(clusters.len());
                clusters.push(Cluster { members: vec![i], levels: rows[i].clone() });
            }
        }
    }
    clusters.sort_by(|a, b| lex_cmp(&a.levels, &b.levels).then(a.members[0].cmp(&b.members[0])));
    clusters
}

/// The `m`-th multiple of `c`, computed as `m / (1/c)` when `1/c` is an
/// integer so that decimal grids come out exact.
pub(crate) fn grid_value(m: f64, c: f64) -> f64 {
    let inv = 1.0 / c;
    let r = libm::round(inv);
    if r >= 1.0 && libm::fabs(inv - r) <= REL_SLACK * r {
        m / r
    } else {
        m * c
    }
}

/// Whether `x` is a multiple of `c` up to rounding.
pub fn on_grid(x: f64, c: f64) -> bool {
    let q = x / c;
    libm::fabs(q - libm::round(q)) <= REL_SLACK * q.abs().max(1.0)
}

/// Multiples of `c` covering `[xmin, xmax]` extended outward to the grid,
/// kept only where they fall inside `[lo, hi]`.
pub(crate) fn grid_candidates(xmin: f64, xmax: f64, c: f64, lo: f64, hi: f64) -> Vec<f64> {
    let m0 = libm::floor(xmin / c + REL_SLACK);
    let m1 = libm::ceil(xmax / c - REL_SLACK);
    let slack = REL_SLACK * (hi - lo);
    let mut out = Vec::new();
    let mut m = m0;
    while m <= m1 {
        let x = grid_value(m, c);
        if x >= lo - slack && x <= hi + slack {
            out.push(x.clamp(lo, hi));
        }
        m += 1.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Factor;

    fn region() -> DesignRegion {
        DesignRegion::new(vec![Factor::new("R", 1.5, 6.0), Factor::new("C", 1.0, 4.0), Factor::new("T", 70.0, 90.0)])
            .unwrap()
    }

    #[test]
    fn validation() {
        let r = region();
        assert!(ClosestDistances::new(vec![0.1, 0.1, 1.0], &r).is_ok());
        assert!(ClosestDistances::new(vec![0.0, 0.1, 1.0], &r).is_err());
        assert!(ClosestDistances::new(vec![0.1, 3.0, 1.0], &r).is_err());
        assert!(ClosestDistances::new(vec![0.1, 0.1], &r).is_err());
    }

    #[test]
    fn worked_grid() {
        assert_eq!(grid_candidates(3.4081, 3.4102, 0.01, 1.5, 6.0), vec![3.40, 3.41, 3.42]);
        assert_eq!(grid_candidates(1.5, 1.5, 0.1, 1.5, 6.0), vec![1.5]);
        assert_eq!(grid_candidates(5.97, 6.0, 0.1, 1.5, 6.0), vec![5.9, 6.0]);
        assert_eq!(grid_candidates(0.62, 0.63, 0.005, 0.625, 62.5), vec![0.625, 0.63]);
    }

    #[test]
    fn grid_membership() {
        assert!(on_grid(3.41, 0.01));
        assert!(on_grid(0.625, 0.005));
        assert!(!on_grid(3.4081, 0.01));
    }
}
