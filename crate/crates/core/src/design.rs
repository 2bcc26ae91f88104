//! Experimental regions, exact designs, priors and candidate sets.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DesignError {
    #[error("factor `{name}`: lower bound {lo} is not below upper bound {hi}")]
    EmptyRange { name: String, lo: f64, hi: f64 },
    #[error("factor `{name}`: closest distance {value} must lie in (0, {width})")]
    BadClosest { name: String, value: f64, width: f64 },
    #[error("duplicate factor name `{0}`")]
    DuplicateFactor(String),
    #[error("region has no factors")]
    NoFactors,
    #[error("design has no runs")]
    NoRuns,
    #[error("run {run} has {got} coordinates, expected {expected}")]
    RowWidth { run: usize, got: usize, expected: usize },
    #[error("run {run}, factor `{factor}`: level {value} outside [{lo}, {hi}]")]
    OutOfRegion { run: usize, factor: String, value: f64, lo: f64, hi: f64 },
    #[error("prior has {got} values, model expects {expected}")]
    PriorLength { got: usize, expected: usize },
    #[error("prior entry {0} is not finite")]
    PriorNotFinite(usize),
    #[error("candidate set is empty")]
    EmptyCandidates,
}

/// One controllable factor of the experiment, in natural units.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    /// Smallest distinguishable spacing between two levels.
    pub closest: Option<f64>,
}

impl Factor {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), lo, hi, closest: None }
    }

    pub fn with_closest(mut self, closest: f64) -> Self {
        self.closest = Some(closest);
        self
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// The cuboid experimental region.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignRegion {
    factors: Vec<Factor>,
}

impl DesignRegion {
    pub fn new(factors: Vec<Factor>) -> Result<Self, DesignError> {
        if factors.is_empty() {
            return Err(DesignError::NoFactors);
        }
        for (i, f) in factors.iter().enumerate() {
            if !(f.lo < f.hi) {
                return Err(DesignError::EmptyRange { name: f.name.clone(), lo: f.lo, hi: f.hi });
            }
            if let Some(c) = f.closest {
                if !(c > 0.0 && c < f.width()) {
                    return Err(DesignError::BadClosest {
                        name: f.name.clone(),
                        value: c,
                        width: f.width(),
                    });
                }
            }
            if factors[..i].iter().any(|g| g.name == f.name) {
                return Err(DesignError::DuplicateFactor(f.name.clone()));
            }
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.name.as_str())
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.factors.iter().map(|f| (f.lo, f.hi)).collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim() && self.factors.iter().zip(point).all(|(f, &x)| f.contains(x))
    }

    /// Per-factor closest distances, if every factor has one.
    pub fn closest_distances(&self) -> Option<Vec<f64>> {
        self.factors.iter().map(|f| f.closest).collect()
    }

    /// Replaces all closest distances.
    pub fn with_closest(&self, closest: &[f64]) -> Result<Self, DesignError> {
        let factors = self
            .factors
            .iter()
            .zip(closest)
            .map(|(f, &c)| f.clone().with_closest(c))
            .collect();
        Self::new(factors)
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.factors.iter().map(|f| rng.gen_range(f.lo..=f.hi)).collect()
    }

    fn check_row(&self, run: usize, row: &[f64]) -> Result<(), DesignError> {
        if row.len() != self.dim() {
            return Err(DesignError::RowWidth { run, got: row.len(), expected: self.dim() });
        }
        for (f, &x) in self.factors.iter().zip(row) {
            if !f.contains(x) {
                return Err(DesignError::OutOfRegion {
                    run,
                    factor: f.name.clone(),
                    value: x,
                    lo: f.lo,
                    hi: f.hi,
                });
            }
        }
        Ok(())
    }
}

/// An exact design: `n` runs, each a point of the region. Replicates are
/// repeated rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    rows: Vec<Vec<f64>>,
    region: DesignRegion,
}

impl Design {
    pub fn new(rows: Vec<Vec<f64>>, region: DesignRegion) -> Result<Self, DesignError> {
        if rows.is_empty() {
            return Err(DesignError::NoRuns);
        }
        for (i, r) in rows.iter().enumerate() {
            region.check_row(i, r)?;
        }
        Ok(Self { rows, region })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<f64>> {
        self.rows
    }

    pub fn region(&self) -> &DesignRegion {
        &self.region
    }

    pub fn n_runs(&self) -> usize {
        self.rows.len()
    }

    /// Distinct points with their replicate counts, in first-occurrence
    /// order.
    pub fn support(&self) -> Vec<(Vec<f64>, usize)> {
        let mut out: Vec<(Vec<f64>, usize)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|(p, _)| p == r) {
                Some((_, c)) => *c += 1,
                None => out.push((r.clone(), 1)),
            }
        }
        out
    }

    pub fn distinct_points(&self) -> usize {
        self.support().len()
    }

    /// Rows sorted lexicographically; two designs are the same multiset of
    /// runs iff their sorted rows are equal.
    pub fn sorted_rows(&self) -> Vec<Vec<f64>> {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| lex_cmp(a, b));
        rows
    }

    pub fn same_runs_as(&self, other: &Design) -> bool {
        self.sorted_rows() == other.sorted_rows()
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            for (k, x) in r.iter().enumerate() {
                if k > 0 {
                    f.write_str("  ")?;
                }
                write!(f, "{x:>10.4}")?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

/// Parameter values at which a nonlinear model is linearized.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorTheta(Vec<f64>);

impl PriorTheta {
    pub fn new(values: Vec<f64>, n_params: usize) -> Result<Self, DesignError> {
        if values.len() != n_params {
            return Err(DesignError::PriorLength { got: values.len(), expected: n_params });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(DesignError::PriorNotFinite(i));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for PriorTheta {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Discrete candidates for exchange algorithms: whole points for point
/// exchange, or one level list per factor for coordinate exchange.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateSet {
    Points(Vec<Vec<f64>>),
    PerFactor(Vec<Vec<f64>>),
}

impl CandidateSet {
    /// Deduplicated point candidates, checked against `region`.
    pub fn points(points: Vec<Vec<f64>>, region: &DesignRegion) -> Result<Self, DesignError> {
        let mut uniq: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for (i, p) in points.into_iter().enumerate() {
            region.check_row(i, &p)?;
            if !uniq.contains(&p) {
                uniq.push(p);
            }
        }
        if uniq.is_empty() {
            return Err(DesignError::EmptyCandidates);
        }
        Ok(Self::Points(uniq))
    }

    /// Per-factor level lists, sorted and deduplicated.
    pub fn per_factor(levels: Vec<Vec<f64>>, region: &DesignRegion) -> Result<Self, DesignError> {
        if levels.len() != region.dim() {
            return Err(DesignError::RowWidth { run: 0, got: levels.len(), expected: region.dim() });
        }
        let mut out = Vec::with_capacity(levels.len());
        for (f, mut ls) in region.factors().iter().zip(levels) {
            if ls.is_empty() {
                return Err(DesignError::EmptyCandidates);
            }
            if let Some(&x) = ls.iter().find(|&&x| !f.contains(x)) {
                return Err(DesignError::OutOfRegion {
                    run: 0,
                    factor: f.name.clone(),
                    value: x,
                    lo: f.lo,
                    hi: f.hi,
                });
            }
            ls.sort_by(f64::total_cmp);
            ls.dedup();
            out.push(ls);
        }
        Ok(Self::PerFactor(out))
    }

    /// Full factorial grid of per-factor levels, first factor varying
    /// slowest.
    pub fn grid(levels: &[Vec<f64>], region: &DesignRegion) -> Result<Self, DesignError> {
        let CandidateSet::PerFactor(levels) = Self::per_factor(levels.to_vec(), region)? else {
            unreachable!()
        };
        let mut pts: Vec<Vec<f64>> = alloc::vec![Vec::new()];
        for ls in &levels {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    ls.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        Ok(Self::Points(pts))
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Points(p) => p.len(),
            Self::PerFactor(l) => l.iter().map(Vec::len).product(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit() -> DesignRegion {
        DesignRegion::new(vec![Factor::new("a", 0.0, 1.0), Factor::new("b", -1.0, 1.0)]).unwrap()
    }

    #[test]
    fn region_rejects_bad_factors() {
        assert!(matches!(
            DesignRegion::new(vec![Factor::new("a", 1.0, 1.0)]),
            Err(DesignError::EmptyRange { .. })
        ));
        assert!(matches!(
            DesignRegion::new(vec![Factor::new("a", 0.0, 1.0).with_closest(1.0)]),
            Err(DesignError::BadClosest { .. })
        ));
        assert!(matches!(
            DesignRegion::new(vec![Factor::new("a", 0.0, 1.0), Factor::new("a", 0.0, 2.0)]),
            Err(DesignError::DuplicateFactor(_))
        ));
    }

    #[test]
    fn design_rows_must_be_inside() {
        let err = Design::new(vec![vec![0.5, 0.0], vec![1.5, 0.0]], unit()).unwrap_err();
        assert!(matches!(err, DesignError::OutOfRegion { run: 1, .. }));
        assert!(matches!(Design::new(vec![], unit()), Err(DesignError::NoRuns)));
    }

    #[test]
    fn support_counts_replicates() {
        let d = Design::new(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0]], unit()).unwrap();
        assert_eq!(d.support(), vec![(vec![0.0, 0.0], 2), (vec![1.0, 1.0], 1)]);
    }

    #[test]
    fn grid_is_full_factorial() {
        let g = CandidateSet::grid(&[vec![0.0, 1.0, 0.5], vec![-1.0, 1.0, 1.0]], &unit()).unwrap();
        assert_eq!(g.len(), 6);
        let CandidateSet::Points(p) = g else { panic!() };
        assert_eq!(p[0], vec![0.0, -1.0]);
        assert_eq!(p[5], vec![1.0, 1.0]);
    }
}
