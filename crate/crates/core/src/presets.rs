//! Settings of the two worked experiments: regions, priors, coarse level
//! grids, extra Nelder-Mead starts and level resolutions.

use alloc::vec;
use alloc::vec::Vec;

use crate::design::{DesignRegion, Factor};

/// Flow rate R ∈ [1.5, 6], catalyst C ∈ [1, 4], temperature T ∈ [70, 90].
pub fn reactor_region() -> DesignRegion {
    DesignRegion::new(vec![
        Factor::new("R", 1.5, 6.0),
        Factor::new("C", 1.0, 4.0),
        Factor::new("T", 70.0, 90.0),
    ])
    .unwrap()
}

/// Least-squares estimates `(θ0, θ0', θ1, θ1', θ2, θ2')` of the reaction model.
pub const REACTOR_PRIOR: [f64; 6] = [5.90, 1.15, 0.53, -0.01, 15475.0, 7489.0];

/// Levels of the reference face-centred CCD.
pub fn reactor_levels() -> Vec<Vec<f64>> {
    vec![vec![1.5, 3.0, 6.0], vec![1.0, 2.0, 4.0], vec![70.0, 80.0, 90.0]]
}

/// Level resolution used to snap refined designs: 0.1 for R and C, 1 °C for T.
pub const REACTOR_CLOSEST: [f64; 3] = [0.1, 0.1, 1.0];

/// Substrate S ∈ [2.5, 7.5], enzyme E ∈ [0.625, 62.5], pressure P ∈ [200, 400].
pub fn enzyme_region() -> DesignRegion {
    DesignRegion::new(vec![
        Factor::new("S", 2.5, 7.5),
        Factor::new("E", 0.625, 62.5),
        Factor::new("P", 200.0, 400.0),
    ])
    .unwrap()
}

/// Least-squares estimates `(a0, …, a5)` of the hybrid model.
pub const ENZYME_PRIOR: [f64; 6] = [0.4340, 1.3140, -0.1059, -0.8224, 0.4105, -2.0633];

/// Levels of the 18-run reference CCD.
pub fn enzyme_levels() -> Vec<Vec<f64>> {
    vec![vec![2.5, 5.0, 7.5], vec![0.625, 6.25, 62.5], vec![200.0, 300.0, 400.0]]
}

/// Level resolution: 0.01 for S, 0.005 for E, 0.1 kPa for P.
pub const ENZYME_CLOSEST: [f64; 3] = [0.01, 0.005, 0.1];

/// The 2³ cube halfway between the centre and the faces of the enzyme
/// region (in coded units), used as extra starts for continuous exchange.
pub fn enzyme_extra_starts() -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(8);
    for s in [3.75, 6.25] {
        for e in [1.9764, 19.764] {
            for p in [250.0, 350.0] {
                out.push(vec![s, e, p]);
            }
        }
    }
    out
}
