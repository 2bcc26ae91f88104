//! JSON model specifications, regions, priors and run specifications.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ldod_core::builtin::{enzyme_quadratic, reactor_quadratic, ExpQuadratic, Hybrid, Mechanistic, Saturation};
use ldod_core::expr::ExprModel;
use ldod_core::{presets, DesignRegion, Factor, Model};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

/// Names accepted by `{"builtin": name}`.
pub const BUILTIN_NAMES: [&str; 6] =
    ["mechanistic", "hybrid", "reactor_quadratic", "enzyme_quadratic", "saturation", "exp_quadratic"];

/// A model given by name or by expression source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ModelSpec {
    Builtin { builtin: String },
    Expr { expr: String, params: Vec<String>, factors: Vec<String> },
}

impl ModelSpec {
    pub fn build(&self) -> Result<Box<dyn Model>> {
        match self {
            Self::Builtin { builtin } => build_builtin(builtin),
            Self::Expr { expr, params, factors } => {
                let p: Vec<&str> = params.iter().map(String::as_str).collect();
                let f: Vec<&str> = factors.iter().map(String::as_str).collect();
                let m = ExprModel::parse(expr, &p, &f).map_err(|e| CliError::validation(format!("model expression: {e}")))?;
                Ok(Box::new(m))
            }
        }
    }

    /// Settings of the worked experiment a built-in model belongs to.
    pub fn defaults(&self) -> Option<Defaults> {
        match self {
            Self::Builtin { builtin } => Defaults::for_builtin(builtin),
            Self::Expr { .. } => None,
        }
    }
}

fn build_builtin(name: &str) -> Result<Box<dyn Model>> {
    Ok(match name {
        "mechanistic" => Box::new(Mechanistic),
        "hybrid" => Box::new(Hybrid),
        "reactor_quadratic" => Box::new(reactor_quadratic()),
        "enzyme_quadratic" => Box::new(enzyme_quadratic()),
        "saturation" => Box::new(Saturation),
        "exp_quadratic" => Box::new(ExpQuadratic),
        other => {
            return Err(CliError::validation(format!(
                "unknown built-in model `{other}`; valid names: {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    })
}

/// Region, prior, candidate levels, closest distances and run count that
/// a built-in model uses when none are given.
#[derive(Debug, Clone, PartialEq)]
pub struct Defaults {
    pub region: DesignRegion,
    pub prior: Vec<f64>,
    pub levels: Vec<Vec<f64>>,
    pub closest: Vec<f64>,
    pub n: usize,
}

impl Defaults {
    pub fn for_builtin(name: &str) -> Option<Self> {
        let reactor = |prior: Vec<f64>| Self {
            region: presets::reactor_region(),
            prior,
            levels: presets::reactor_levels(),
            closest: presets::REACTOR_CLOSEST.to_vec(),
            n: 24,
        };
        let enzyme = |prior: Vec<f64>| Self {
            region: presets::enzyme_region(),
            prior,
            levels: presets::enzyme_levels(),
            closest: presets::ENZYME_CLOSEST.to_vec(),
            n: 18,
        };
        // The quadratics are linear in their parameters, so any prior
        // gives the same information matrix.
        match name {
            "mechanistic" => Some(reactor(presets::REACTOR_PRIOR.to_vec())),
            "hybrid" => Some(enzyme(presets::ENZYME_PRIOR.to_vec())),
            "reactor_quadratic" => Some(reactor(vec![1.0; 10])),
            "enzyme_quadratic" => Some(enzyme(vec![1.0; 10])),
            _ => None,
        }
    }
}

/// One factor of a region as written in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closest: Option<f64>,
}

pub fn region_from_specs(specs: &[FactorSpec]) -> Result<DesignRegion> {
    let factors = specs
        .iter()
        .map(|f| {
            let base = Factor::new(f.name.clone(), f.lo, f.hi);
            match f.closest {
                Some(c) => base.with_closest(c),
                None => base,
            }
        })
        .collect();
    Ok(DesignRegion::new(factors)?)
}

pub fn region_to_specs(region: &DesignRegion) -> Vec<FactorSpec> {
    region
        .factors()
        .iter()
        .map(|f| FactorSpec { name: f.name.clone(), lo: f.lo, hi: f.hi, closest: f.closest })
        .collect()
}

fn looks_like_json(arg: &str) -> bool {
    matches!(arg.trim_start().chars().next(), Some('{' | '['))
}

/// Parses `arg` as inline JSON if it starts with `{` or `[`, otherwise
/// reads it as a JSON file.
pub fn load_json<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    if looks_like_json(arg) {
        serde_json::from_str(arg).map_err(|e| CliError::validation(format!("{what}: {e}")))
    } else {
        read_json_file(Path::new(arg), what)
    }
}

pub fn read_json_file<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::validation(format!("{what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("{what} {}, line {}: {e}", path.display(), e.line())))
}

/// `--model`: a built-in name, inline JSON, or a JSON file.
pub fn parse_model_arg(arg: &str) -> Result<ModelSpec> {
    if BUILTIN_NAMES.contains(&arg) {
        return Ok(ModelSpec::Builtin { builtin: arg.to_string() });
    }
    if looks_like_json(arg) || Path::new(arg).is_file() {
        return load_json(arg, "model spec");
    }
    Err(CliError::validation(format!(
        "`{arg}` is neither a built-in model ({}) nor a model spec file",
        BUILTIN_NAMES.join(", ")
    )))
}

fn parse_list(arg: &str, what: &str) -> Result<Vec<f64>> {
    arg.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::validation(format!("{what}: `{}` is not a finite number", s.trim())))
        })
        .collect()
}

/// A prior file: a bare array or an object with a `theta` array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriorFile {
    Bare(Vec<f64>),
    Named { theta: Vec<f64> },
}

impl PriorFile {
    pub fn into_values(self) -> Vec<f64> {
        match self {
            Self::Bare(v) | Self::Named { theta: v } => v,
        }
    }
}

/// `--prior` and similar: comma-separated numbers, inline JSON, or a JSON
/// file.
pub fn parse_prior_arg(arg: &str) -> Result<Vec<f64>> {
    if looks_like_json(arg) || Path::new(arg).is_file() {
        return load_json::<PriorFile>(arg, "prior").map(PriorFile::into_values);
    }
    parse_list(arg, "prior")
}

/// `--closest`: comma-separated distances, one per factor.
pub fn parse_closest_arg(arg: &str) -> Result<Vec<f64>> {
    parse_list(arg, "closest distances")
}

/// `--region`: `name=lo:hi[:closest],...`, inline JSON, or a JSON file.
pub fn parse_region_arg(arg: &str) -> Result<DesignRegion> {
    if looks_like_json(arg) || Path::new(arg).is_file() {
        let specs: Vec<FactorSpec> = load_json(arg, "region")?;
        return region_from_specs(&specs);
    }
    let specs = arg
        .split(',')
        .map(|part| {
            let bad = || CliError::validation(format!("region: `{part}` is not of the form name=lo:hi[:closest]"));
            let (name, range) = part.trim().split_once('=').ok_or_else(bad)?;
            let nums = parse_list(&range.replace(':', ","), "region").map_err(|_| bad())?;
            match nums[..] {
                [lo, hi] => Ok(FactorSpec { name: name.trim().to_string(), lo, hi, closest: None }),
                [lo, hi, c] => Ok(FactorSpec { name: name.trim().to_string(), lo, hi, closest: Some(c) }),
                _ => Err(bad()),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    region_from_specs(&specs)
}

/// Exchange algorithm variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    DiscretePea,
    DiscreteCea,
    ContinuousPea,
    ContinuousCea,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::DiscretePea => "discrete-pea",
            Self::DiscreteCea => "discrete-cea",
            Self::ContinuousPea => "continuous-pea",
            Self::ContinuousCea => "continuous-cea",
        }
    }
}

impl FromStr for Algorithm {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete-pea" => Ok(Self::DiscretePea),
            "discrete-cea" => Ok(Self::DiscreteCea),
            "continuous-pea" => Ok(Self::ContinuousPea),
            "continuous-cea" => Ok(Self::ContinuousCea),
            _ => Err(CliError::validation(format!(
                "unknown algorithm `{s}`; valid options: {}",
                ldod_core::search::algorithm_names().join(", ")
            ))),
        }
    }
}

/// Settings of a search or multiphase run, as stored in a JSON file.
/// Every field may be overridden on the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// `search` or `multiphase`; checked against the subcommand.
    pub command: Option<String>,
    pub model: Option<ModelSpec>,
    pub region: Option<Vec<FactorSpec>>,
    pub prior: Option<Vec<f64>>,
    pub n: Option<usize>,
    pub algorithm: Option<String>,
    /// Per-factor candidate levels. Point exchange uses their full grid.
    pub levels: Option<Vec<Vec<f64>>>,
    /// Explicit candidate points for discrete point exchange.
    pub candidates: Option<Vec<Vec<f64>>>,
    pub extra_starts: Option<Vec<Vec<f64>>>,
    pub closest: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub tries: Option<usize>,
    /// Critical value; in a multiphase run, that of the first phase.
    pub critical: Option<f64>,
    pub phase2_critical: Option<f64>,
    /// `pea` or `cea`.
    pub phase2: Option<String>,
    pub max_iterations: Option<usize>,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

impl RunSpec {
    pub fn load(path: &Path) -> Result<Self> {
        read_json_file(path, "run spec")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_specs() {
        let m = parse_model_arg("hybrid").unwrap().build().unwrap();
        assert_eq!(m.n_params(), 6);
        let spec = parse_model_arg(r#"{"expr": "k*x", "params": ["k"], "factors": ["x"]}"#).unwrap();
        assert_eq!(spec.build().unwrap().factor_names(), ["x"]);
        assert!(parse_model_arg("nope").is_err());
        assert!(parse_model_arg(r#"{"builtin": "nope"}"#).unwrap().build().is_err());
        assert!(parse_model_arg(r#"{"expr": "k*", "params": ["k"], "factors": ["x"]}"#).unwrap().build().is_err());
    }

    #[test]
    fn regions_and_priors() {
        let r = parse_region_arg("R=1.5:6:0.1, C=1:4").unwrap();
        assert_eq!(r.dim(), 2);
        assert_eq!(r.factors()[0].closest, Some(0.1));
        assert!(parse_region_arg("R=6:1.5").is_err());
        assert!(parse_region_arg("R1.5:6").is_err());
        let j = parse_region_arg(r#"[{"name": "x", "lo": 0, "hi": 1}]"#).unwrap();
        assert_eq!(j.names().collect::<Vec<_>>(), ["x"]);
        assert_eq!(parse_prior_arg("1, 2.5,-3e2").unwrap(), [1.0, 2.5, -300.0]);
        assert_eq!(parse_prior_arg(r#"{"theta": [1, 2]}"#).unwrap(), [1.0, 2.0]);
        assert!(parse_prior_arg("1,x").is_err());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for name in ldod_core::search::algorithm_names() {
            assert_eq!(name.parse::<Algorithm>().unwrap().name(), name);
        }
        let e = "simplex".parse::<Algorithm>().unwrap_err();
        assert!(e.to_string().contains("discrete-pea, discrete-cea"));
    }

    #[test]
    fn run_spec_rejects_unknown_fields() {
        assert!(serde_json::from_str::<RunSpec>(r#"{"tries": 3}"#).is_ok());
        assert!(serde_json::from_str::<RunSpec>(r#"{"trys": 3}"#).is_err());
    }
}
