//! Standard response-surface designs used as benchmarks.
//!
//! Levels are stored exactly as tabulated (the spherical design's axial
//! levels to four decimals), in run order.

use alloc::vec::Vec;

use crate::design::{Design, DesignRegion};
use crate::presets;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardKind {
    FaceCentredCcd,
    SphericalCcd,
    BoxBehnken,
}

impl StandardKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "face_centred_ccd" | "face-centred-ccd" | "fccd" => Some(Self::FaceCentredCcd),
            "spherical_ccd" | "spherical-ccd" | "sccd" => Some(Self::SphericalCcd),
            "box_behnken" | "box-behnken" | "bbd" => Some(Self::BoxBehnken),
            _ => None,
        }
    }
}

/// Which worked experiment a standard design belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// Stirred-reactor yield experiment (factors R, C, T; 24 runs).
    Reactor,
    /// Enzymatic depolymerisation experiment (factors S, E, P; 18 runs).
    Enzyme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no {kind:?} design is defined for the {experiment:?} experiment")]
pub struct UnsupportedDesign {
    pub kind: StandardKind,
    pub experiment: Experiment,
}

/// 24-run face-centred CCD: doubled axial points, four centre points.
pub const REACTOR_FACE_CCD: [[f64; 3]; 24] = [
    [1.5, 1.0, 70.0],
    [1.5, 1.0, 90.0],
    [1.5, 2.0, 80.0],
    [1.5, 2.0, 80.0],
    [1.5, 4.0, 70.0],
    [1.5, 4.0, 90.0],
    [3.0, 1.0, 80.0],
    [3.0, 1.0, 80.0],
    [3.0, 2.0, 70.0],
    [3.0, 2.0, 70.0],
    [3.0, 2.0, 80.0],
    [3.0, 2.0, 80.0],
    [3.0, 2.0, 80.0],
    [3.0, 2.0, 80.0],
    [3.0, 2.0, 90.0],
    [3.0, 2.0, 90.0],
    [3.0, 4.0, 80.0],
    [3.0, 4.0, 80.0],
    [6.0, 1.0, 70.0],
    [6.0, 1.0, 90.0],
    [6.0, 2.0, 80.0],
    [6.0, 2.0, 80.0],
    [6.0, 4.0, 70.0],
    [6.0, 4.0, 90.0],
];

/// 24-run spherical CCD of radius √2 inside the cuboid region.
pub const REACTOR_SPHERICAL_CCD: [[f64; 3]; 24] = [
    [1.5, 2.0, 80.0],
    [1.5, 2.0, 80.0],
    [1.8376, 1.2251, 72.9289],
    [1.8376, 1.2251, 87.0711],
    [1.8376, 3.2651, 72.9289],
    [1.8376, 3.2651, 87.0711],
    [3.0, 1.0, 80.0],
    [3.0, 1.0, 80.0],
    [3.0, 2.0, 70.0],
    [3.0, 2.0, 70.0],
    [3.0, 2.0, 80.0],
    [3.0, 2.0, 80.0],
    [3.0, 2.0, 80.0],
    [3.0, 2.0, 80.0],
    [3.0, 2.0, 90.0],
    [3.0, 2.0, 90.0],
    [3.0, 4.0, 80.0],
    [3.0, 4.0, 80.0],
    [4.8976, 1.2251, 72.9289],
    [4.8976, 1.2251, 87.0711],
    [4.8976, 3.2651, 72.9289],
    [4.8976, 3.2651, 87.0711],
    [6.0, 2.0, 80.0],
    [6.0, 2.0, 80.0],
];

/// 24-run Box-Behnken design with extra edge replicates and four centre points.
pub const REACTOR_BOX_BEHNKEN: [[f64; 3]; 24] = [
    [1.5, 1.0, 80.0],
    [1.5, 1.0, 80.0],
    [1.5, 2.0, 70.0],
    [1.5, 2.0, 90.0],
    [1.5, 4.0, 80.0],
    [1.5, 4.0, 80.0],
    [3.0, 1.0, 70.0],
    [3.0, 1.0, 70.0],
    [3.0, 1.0, 90.0],
    [3.0, 1.0, 90.0],
    [3.0, 2.0, 80.0],
    [3.0, 2.0, 80.0],
    [3.0, 2.0, 80.0],
    [3.0, 2.0, 80.0],
    [3.0, 4.0, 70.0],
    [3.0, 4.0, 70.0],
    [3.0, 4.0, 90.0],
    [3.0, 4.0, 90.0],
    [6.0, 1.0, 80.0],
    [6.0, 1.0, 80.0],
    [6.0, 2.0, 70.0],
    [6.0, 2.0, 90.0],
    [6.0, 4.0, 80.0],
    [6.0, 4.0, 80.0],
];

/// 18-run face-centred CCD of the enzyme experiment, in run order.
pub const ENZYME_FACE_CCD: [[f64; 3]; 18] = [
    [5.0, 6.25, 300.0],
    [5.0, 6.25, 200.0],
    [5.0, 62.5, 300.0],
    [5.0, 6.25, 300.0],
    [5.0, 6.25, 300.0],
    [5.0, 0.625, 300.0],
    [2.5, 62.5, 400.0],
    [7.5, 6.25, 300.0],
    [5.0, 6.25, 400.0],
    [7.5, 0.625, 200.0],
    [2.5, 0.625, 200.0],
    [5.0, 6.25, 300.0],
    [7.5, 62.5, 400.0],
    [2.5, 6.25, 300.0],
    [2.5, 0.625, 400.0],
    [7.5, 0.625, 400.0],
    [7.5, 62.5, 200.0],
    [2.5, 62.5, 200.0],
];

fn to_design(rows: &[[f64; 3]], region: DesignRegion) -> Design {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    Design::new(rows, region).expect("tabulated design lies inside its region")
}

pub fn standard_design(kind: StandardKind, experiment: Experiment) -> Result<Design, UnsupportedDesign> {
    use Experiment::*;
    use StandardKind::*;
    match (kind, experiment) {
        (FaceCentredCcd, Reactor) => Ok(to_design(&REACTOR_FACE_CCD, presets::reactor_region())),
        (SphericalCcd, Reactor) => Ok(to_design(&REACTOR_SPHERICAL_CCD, presets::reactor_region())),
        (BoxBehnken, Reactor) => Ok(to_design(&REACTOR_BOX_BEHNKEN, presets::reactor_region())),
        (FaceCentredCcd, Enzyme) => Ok(to_design(&ENZYME_FACE_CCD, presets::enzyme_region())),
        (kind, experiment) => Err(UnsupportedDesign { kind, experiment }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_counts_and_first_rows() {
        let d = standard_design(StandardKind::FaceCentredCcd, Experiment::Reactor).unwrap();
        assert_eq!(d.n_runs(), 24);
        assert_eq!(d.rows()[0], [1.5, 1.0, 70.0]);
        assert_eq!(d.rows()[1], [1.5, 1.0, 90.0]);
        let s = standard_design(StandardKind::SphericalCcd, Experiment::Reactor).unwrap();
        assert!(s.rows().iter().any(|r| r[..] == [1.8376, 1.2251, 72.9289]));
        let e = standard_design(StandardKind::FaceCentredCcd, Experiment::Enzyme).unwrap();
        assert_eq!(e.n_runs(), 18);
        assert_eq!(e.rows()[0], [5.0, 6.25, 300.0]);
    }

    #[test]
    fn centre_replicates() {
        for kind in [StandardKind::FaceCentredCcd, StandardKind::SphericalCcd, StandardKind::BoxBehnken] {
            let d = standard_design(kind, Experiment::Reactor).unwrap();
            let centre = d.rows().iter().filter(|r| r[..] == [3.0, 2.0, 80.0]).count();
            assert_eq!(centre, 4, "{kind:?}");
        }
    }

    #[test]
    fn enzyme_supports_only_face_centred() {
        assert!(standard_design(StandardKind::BoxBehnken, Experiment::Enzyme).is_err());
        assert!(standard_design(StandardKind::SphericalCcd, Experiment::Enzyme).is_err());
    }
}
