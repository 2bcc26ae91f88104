//! Command-line definitions and command implementations.

use std::fmt::Write as _;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ldod_core::criterion::{phi, relative_efficiency};
use ldod_core::optim::{nls_fit, sse, NlsError, NlsOptions};
use ldod_core::search::{
    continuous_cea, continuous_pea, discrete_cea, discrete_pea, multiphase, ClosestDistances, MultiphaseConfig,
    MultiphaseResult, Phase2Mode, Problem, SearchConfig, SearchResult,
};
use ldod_core::standard::{standard_design, Experiment, StandardKind};
use ldod_core::{CandidateSet, Design, DesignRegion, Factor, Model, PriorTheta};
use serde_json::{json, Value};

use crate::csvio;
use crate::exec::Threaded;
use crate::exit;
use crate::spec::{self, Algorithm, Defaults, ModelSpec, RunSpec};
use crate::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "ldod", version, about = "Locally D-optimal exact designs for nonlinear regression models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Print a machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Maximum number of tries run concurrently (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<NonZeroUsize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the local D-criterion of a design.
    Eval(EvalArgs),
    /// Search for a locally D-optimal design with an exchange algorithm.
    Search(SearchArgs),
    /// Three-phase search that ends on a grid of distinguishable levels.
    Multiphase(MultiphaseArgs),
    /// Fit a model to data by nonlinear least squares.
    Fit(FitArgs),
    /// Relative D-efficiency of design A with respect to design B.
    Efficiency(EfficiencyArgs),
    /// Print a standard response-surface design of a worked experiment.
    StandardDesign(StandardArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Built-in model name, inline model JSON, or a model JSON file.
    #[arg(long)]
    pub model: Option<String>,
    /// Prior parameter values: comma-separated, inline JSON, or a JSON file.
    #[arg(long, allow_hyphen_values = true)]
    pub prior: Option<String>,
    /// Region as `name=lo:hi[:closest],...`, inline JSON, or a JSON file.
    #[arg(long)]
    pub region: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Design CSV.
    pub design: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    /// Design A CSV.
    pub design_a: PathBuf,
    /// Design B CSV (the reference).
    pub design_b: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Run specification JSON; flags override its fields.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of runs.
    #[arg(long)]
    pub n: Option<usize>,
    /// Candidate levels per factor: `1.5,3,6;1,2,4;70,80,90`.
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long)]
    pub tries: Option<usize>,
    /// Critical value an exchange ratio must exceed.
    #[arg(long)]
    pub critical: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Write the best design to this CSV file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the per-try trace to this JSON file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// One of discrete-pea, discrete-cea, continuous-pea, continuous-cea.
    #[arg(long)]
    pub algorithm: Option<String>,
}

#[derive(Debug, Args)]
pub struct MultiphaseArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Closest distinguishable distance per factor, comma-separated.
    #[arg(long)]
    pub closest: Option<String>,
    /// Critical value of the continuous phase.
    #[arg(long)]
    pub phase2_critical: Option<f64>,
    /// Continuous algorithm of the second phase.
    #[arg(long, value_enum)]
    pub phase2: Option<Phase2Arg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Phase2Arg {
    Pea,
    Cea,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Transform {
    None,
    /// `y / (100 − y)` for responses in percent.
    PercentOdds,
    Log,
}

impl Transform {
    fn apply(self, y: f64) -> f64 {
        match self {
            Self::None => y,
            Self::PercentOdds => y / (100.0 - y),
            Self::Log => y.ln(),
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Data CSV: factor columns plus one response column.
    pub data: PathBuf,
    /// Built-in model name, inline model JSON, or a model JSON file.
    #[arg(long)]
    pub model: String,
    /// Initial parameter values (default: the built-in prior).
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
    /// Transformation applied to the response before fitting.
    #[arg(long, value_enum, default_value = "none")]
    pub transform: Transform,
    /// Response column name (default: the only non-factor column).
    #[arg(long)]
    pub response: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the estimates as a prior JSON file.
    #[arg(long)]
    pub prior_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StandardArgs {
    /// face_centred_ccd, spherical_ccd or box_behnken.
    #[arg(long)]
    pub kind: String,
    /// Worked experiment: 1 (reactor) or 2 (enzyme).
    #[arg(long)]
    pub example: u8,
    /// Write the design to this CSV file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a command prints and the exit code it ends with.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub code: u8,
}

impl Outcome {
    fn ok(text: String, json: Value) -> Self {
        Self { text, json, code: exit::OK }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let exec = cli.threads.map_or_else(Threaded::available, Threaded::new);
    match &cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Search(a) => cmd_search(a, &exec),
        Command::Multiphase(a) => cmd_multiphase(a, &exec),
        Command::Fit(a) => cmd_fit(a),
        Command::Efficiency(a) => cmd_efficiency(a),
        Command::StandardDesign(a) => cmd_standard(a),
    }
}

/// JSON number, or `"-inf"`/`"inf"`/`"nan"` for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn design_json(design: &Design) -> Value {
    json!({
        "factors": design.region().names().collect::<Vec<_>>(),
        "rows": design.rows(),
    })
}

fn support_json(design: &Design) -> Value {
    design
        .support()
        .into_iter()
        .map(|(point, reps)| json!({ "point": point, "replicates": reps }))
        .collect()
}

fn replicate_counts(design: &Design) -> Vec<usize> {
    design.support().into_iter().map(|s| s.1).collect()
}

fn support_table(design: &Design) -> String {
    let mut s = String::new();
    for name in design.region().names() {
        let _ = write!(s, "{name:>12}");
    }
    let _ = writeln!(s, "{:>6}", "reps");
    for (point, reps) in design.support() {
        for x in point {
            let _ = write!(s, "{:>12}", x);
        }
        let _ = writeln!(s, "{reps:>6}");
    }
    s
}

fn model_label(spec: &ModelSpec) -> String {
    match spec {
        ModelSpec::Builtin { builtin } => builtin.clone(),
        ModelSpec::Expr { expr, .. } => expr.clone(),
    }
}

fn check_names(model: &dyn Model, region: &DesignRegion) -> Result<()> {
    let names: Vec<&str> = region.names().collect();
    if model.factor_names() != names {
        return Err(CliError::validation(format!(
            "region factors {names:?} do not match the model factors {:?}",
            model.factor_names()
        )));
    }
    Ok(())
}

fn prior_for(model: &dyn Model, values: Vec<f64>) -> Result<PriorTheta> {
    Ok(PriorTheta::new(values, model.n_params())?)
}

/// Model, prior and optional region from the shared flags.
struct Evaluation {
    label: String,
    model: Box<dyn Model>,
    prior: PriorTheta,
    region: Option<DesignRegion>,
}

fn evaluation(args: &ModelArgs) -> Result<Evaluation> {
    let spec = spec::parse_model_arg(args.model.as_deref().ok_or_else(|| CliError::validation("--model is required"))?)?;
    let model = spec.build()?;
    let defaults = spec.defaults();
    let prior = match (&args.prior, &defaults) {
        (Some(p), _) => spec::parse_prior_arg(p)?,
        (None, Some(d)) => d.prior.clone(),
        (None, None) => return Err(CliError::validation("--prior is required for this model")),
    };
    let region = match (&args.region, &defaults) {
        (Some(r), _) => Some(spec::parse_region_arg(r)?),
        (None, Some(d)) => Some(d.region.clone()),
        (None, None) => None,
    };
    if let Some(r) = &region {
        check_names(model.as_ref(), r)?;
    }
    let prior = prior_for(model.as_ref(), prior)?;
    Ok(Evaluation { label: model_label(&spec), model, prior, region })
}

/// A region spanning the design's own range, for evaluating designs of
/// models without a declared region.
fn bounding_region(path: &Path, names: &[String]) -> Result<DesignRegion> {
    let origin = path.display().to_string();
    let table = csvio::read_table_file(path)?;
    let rows = csvio::design_rows(&table, &origin)?;
    let factors = names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                let x = r.get(k).copied().unwrap_or(0.0);
                (lo.min(x), hi.max(x))
            });
            if lo < hi {
                Factor::new(name.clone(), lo, hi)
            } else {
                Factor::new(name.clone(), lo - 1.0, lo + 1.0)
            }
        })
        .collect();
    Ok(DesignRegion::new(factors)?)
}

fn load_design(ev: &Evaluation, path: &Path) -> Result<Design> {
    let region = match &ev.region {
        Some(r) => r.clone(),
        None => bounding_region(path, &ev.model.factor_names())?,
    };
    csvio::read_design_file(path, &region)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<Outcome> {
    let ev = evaluation(&args.model)?;
    let design = load_design(&ev, &args.design)?;
    let value = phi(ev.model.as_ref(), &design, &ev.prior)?;
    let (n, p) = (design.n_runs(), ev.model.n_params());
    let mut text = String::new();
    let _ = writeln!(text, "design    {}", args.design.display());
    let _ = writeln!(text, "model     {}", ev.label);
    let _ = writeln!(text, "n         {n}");
    let _ = writeln!(text, "p         {p}");
    let _ = writeln!(text, "phi       {value:.4}");
    let _ = writeln!(text, "det       {:e}", value.exp());
    let _ = writeln!(text, "distinct  {}", design.distinct_points());
    text.push_str(&support_table(&design));
    let json = json!({
        "design": args.design.display().to_string(),
        "model": ev.label,
        "n": n,
        "p": p,
        "phi": num(value),
        "det": num(value.exp()),
        "distinct_points": design.distinct_points(),
        "support": support_json(&design),
    });
    let code = if value == f64::NEG_INFINITY { exit::SINGULAR } else { exit::OK };
    Ok(Outcome { text, json, code })
}

pub fn cmd_efficiency(args: &EfficiencyArgs) -> Result<Outcome> {
    let ev = evaluation(&args.model)?;
    let a = load_design(&ev, &args.design_a)?;
    let b = load_design(&ev, &args.design_b)?;
    let pa = phi(ev.model.as_ref(), &a, &ev.prior)?;
    let pb = phi(ev.model.as_ref(), &b, &ev.prior)?;
    let p = ev.model.n_params();
    let eff = relative_efficiency(pa, pb, p);
    let mut text = String::new();
    let _ = writeln!(text, "phi_A       {pa:.4}  ({})", args.design_a.display());
    let _ = writeln!(text, "phi_B       {pb:.4}  ({})", args.design_b.display());
    let _ = writeln!(text, "p           {p}");
    let _ = writeln!(text, "efficiency  {eff:.2}%");
    let json = json!({
        "design_a": args.design_a.display().to_string(),
        "design_b": args.design_b.display().to_string(),
        "phi_a": num(pa),
        "phi_b": num(pb),
        "p": p,
        "efficiency_percent": num(eff),
    });
    let singular = pa == f64::NEG_INFINITY || pb == f64::NEG_INFINITY;
    Ok(Outcome { text, json, code: if singular { exit::SINGULAR } else { exit::OK } })
}

pub fn cmd_standard(args: &StandardArgs) -> Result<Outcome> {
    let kind = StandardKind::parse(&args.kind).ok_or_else(|| {
        CliError::validation(format!(
            "unknown design kind `{}`; valid options: face_centred_ccd, spherical_ccd, box_behnken",
            args.kind
        ))
    })?;
    let experiment = match args.example {
        1 => Experiment::Reactor,
        2 => Experiment::Enzyme,
        e => return Err(CliError::validation(format!("unknown example {e}; valid options: 1, 2"))),
    };
    let design = standard_design(kind, experiment).map_err(|e| CliError::validation(e.to_string()))?;
    let text = match &args.out {
        Some(path) => {
            csvio::write_design_file(path, &design)?;
            format!("wrote {} runs to {}\n", design.n_runs(), path.display())
        }
        None => csvio::design_to_string(&design),
    };
    Ok(Outcome::ok(text, json!({ "kind": args.kind, "example": args.example, "design": design_json(&design) })))
}

pub fn cmd_fit(args: &FitArgs) -> Result<Outcome> {
    let spec = spec::parse_model_arg(&args.model)?;
    let model = spec.build()?;
    let init = match (&args.init, spec.defaults()) {
        (Some(s), _) => spec::parse_prior_arg(s)?,
        (None, Some(d)) => d.prior,
        (None, None) => return Err(CliError::validation("--init is required for this model")),
    };
    let data = csvio::read_data_file(&args.data, &model.factor_names(), args.response.as_deref())?;
    let transform = args.transform;
    let t = move |y: f64| transform.apply(y);
    let opts = NlsOptions { seed: args.seed, ..NlsOptions::default() };
    let fit = nls_fit(model.as_ref(), &data.points, &init, Some(&t), &opts).map_err(|e| match e {
        NlsError::AllStartsFailed => CliError::Failure(e.to_string()),
        e => CliError::validation(format!("{}: {e}", args.data.display())),
    })?;
    let points: Vec<Vec<f64>> = data.points.iter().map(|d| d.0.clone()).collect();
    let ys: Vec<f64> = data.points.iter().map(|d| t(d.1)).collect();
    let sse_init = sse(model.as_ref(), &points, &ys, &init).map_or(f64::NAN, |v| v);
    let names = model.param_names();
    if let Some(path) = &args.prior_out {
        let body = serde_json::to_string_pretty(&json!({ "theta": fit.theta_hat }))
            .expect("finite estimates serialize");
        std::fs::write(path, body + "\n").map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    }
    let mut text = String::new();
    let _ = writeln!(text, "model       {}", model_label(&spec));
    let _ = writeln!(text, "rows        {} used, {} without response", data.points.len(), data.dropped);
    for (name, v) in names.iter().zip(&fit.theta_hat) {
        let _ = writeln!(text, "{name:<12}{v:.6}");
    }
    let _ = writeln!(text, "sse         {:.7}", fit.sse);
    let _ = writeln!(text, "sse_init    {sse_init:.7}");
    let _ = writeln!(text, "evals       {}", fit.evals);
    let _ = writeln!(text, "converged   {}", fit.converged);
    let json = json!({
        "model": model_label(&spec),
        "response": data.response,
        "rows": data.points.len(),
        "dropped": data.dropped,
        "params": names,
        "theta_hat": fit.theta_hat,
        "sse": num(fit.sse),
        "sse_init": num(sse_init),
        "evals": fit.evals,
        "converged": fit.converged,
    });
    let code = if fit.converged { exit::OK } else { exit::NON_CONVERGENCE };
    Ok(Outcome { text, json, code })
}

/// Settings of a search or multiphase run after merging the spec file,
/// the flags and the built-in defaults.
struct Resolved {
    label: String,
    model: Box<dyn Model>,
    region: DesignRegion,
    prior: PriorTheta,
    n: usize,
    levels: Option<Vec<Vec<f64>>>,
    candidates: Option<Vec<Vec<f64>>>,
    closest: Option<Vec<f64>>,
    config: SearchConfig,
    out: Option<PathBuf>,
    trace: Option<PathBuf>,
}

fn parse_levels(arg: &str) -> Result<Vec<Vec<f64>>> {
    arg.split(';').map(spec::parse_closest_arg).collect::<Result<_>>().map_err(|e| {
        CliError::validation(format!("levels: {e}"))
    })
}

fn load_run_spec(args: &RunArgs, command: &str) -> Result<RunSpec> {
    let Some(path) = &args.spec else { return Ok(RunSpec::default()) };
    let spec = RunSpec::load(path)?;
    if let Some(c) = &spec.command {
        if c != command {
            return Err(CliError::validation(format!(
                "{} is a `{c}` spec, not a `{command}` spec",
                path.display()
            )));
        }
    }
    Ok(spec)
}

fn resolve(args: &RunArgs, spec: &RunSpec, default_critical: f64) -> Result<Resolved> {
    let model_spec = match (&args.model.model, &spec.model) {
        (Some(m), _) => spec::parse_model_arg(m)?,
        (None, Some(m)) => m.clone(),
        (None, None) => return Err(CliError::validation("no model given (--model or the spec's `model`)")),
    };
    let model = model_spec.build()?;
    let defaults: Option<Defaults> = model_spec.defaults();
    let region = match (&args.model.region, &spec.region, &defaults) {
        (Some(r), _, _) => spec::parse_region_arg(r)?,
        (None, Some(r), _) => spec::region_from_specs(r)?,
        (None, None, Some(d)) => d.region.clone(),
        _ => return Err(CliError::validation("no region given (--region or the spec's `region`)")),
    };
    check_names(model.as_ref(), &region)?;
    let prior = match (&args.model.prior, &spec.prior, &defaults) {
        (Some(p), _, _) => spec::parse_prior_arg(p)?,
        (None, Some(p), _) => p.clone(),
        (None, None, Some(d)) => d.prior.clone(),
        _ => return Err(CliError::validation("no prior given (--prior or the spec's `prior`)")),
    };
    let prior = prior_for(model.as_ref(), prior)?;
    let n = args
        .n
        .or(spec.n)
        .or(defaults.as_ref().map(|d| d.n))
        .ok_or_else(|| CliError::validation("no run count given (--n or the spec's `n`)"))?;
    let levels = match &args.levels {
        Some(l) => Some(parse_levels(l)?),
        None => spec.levels.clone().or_else(|| defaults.as_ref().map(|d| d.levels.clone())),
    };
    let closest = spec
        .closest
        .clone()
        .or_else(|| region.closest_distances())
        .or_else(|| defaults.as_ref().map(|d| d.closest.clone()));
    let mut config = SearchConfig::new(
        args.tries.or(spec.tries).unwrap_or(100),
        args.critical.or(spec.critical).unwrap_or(default_critical),
        args.seed.or(spec.seed).unwrap_or(0),
    );
    if let Some(m) = args.max_iterations.or(spec.max_iterations) {
        config.max_iterations = m;
    }
    config.extra_starts = spec.extra_starts.clone().unwrap_or_default();
    config.validate(&region)?;
    Ok(Resolved {
        label: model_label(&model_spec),
        model,
        region,
        prior,
        n,
        levels,
        candidates: spec.candidates.clone(),
        closest,
        config,
        out: args.out.clone().or_else(|| spec.out.clone()),
        trace: args.trace.clone().or_else(|| spec.trace.clone()),
    })
}

/// Point candidates: explicit points if given, else the grid of levels.
fn point_candidates(r: &Resolved) -> Result<CandidateSet> {
    match (&r.candidates, &r.levels) {
        (Some(points), _) => Ok(CandidateSet::points(points.clone(), &r.region)?),
        (None, Some(levels)) => Ok(CandidateSet::grid(levels, &r.region)?),
        (None, None) => Err(CliError::validation("discrete point exchange needs candidate levels or points")),
    }
}

fn trace_json(result: &SearchResult) -> Value {
    json!({
        "tries": result.outcomes.iter().map(|o| json!({
            "try": o.trace.try_index,
            "iterations": o.trace.iterations,
            "exchanges": o.trace.exchanges(),
            "start_phi": num(o.trace.start_phi()),
            "final_phi": num(o.trace.final_phi),
            "trajectory": o.trace.phi_trajectory.iter().map(|v| num(*v)).collect::<Vec<_>>(),
            "design": o.design.rows(),
        })).collect::<Vec<_>>(),
        "failures": result.failures.iter().map(|f| json!({
            "try": f.try_index,
            "error": f.error.to_string(),
        })).collect::<Vec<_>>(),
    })
}

fn write_json_file(path: &Path, value: &Value) -> Result<()> {
    let body = serde_json::to_string_pretty(value).expect("JSON values serialize");
    std::fs::write(path, body + "\n").map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

fn write_outputs(r: &Resolved, design: &Design, trace: Value) -> Result<()> {
    if let Some(path) = &r.out {
        csvio::write_design_file(path, design)?;
    }
    if let Some(path) = &r.trace {
        write_json_file(path, &trace)?;
    }
    Ok(())
}

pub fn cmd_search(args: &SearchArgs, exec: &Threaded) -> Result<Outcome> {
    let spec = load_run_spec(&args.run, "search")?;
    let algorithm: Algorithm = args
        .algorithm
        .as_deref()
        .or(spec.algorithm.as_deref())
        .ok_or_else(|| {
            CliError::validation(format!(
                "no algorithm given; valid options: {}",
                ldod_core::search::algorithm_names().join(", ")
            ))
        })?
        .parse()?;
    let r = resolve(&args.run, &spec, 1.0001)?;
    let problem = Problem::new(r.model.as_ref(), &r.prior, &r.region, r.n)?;
    let result = match algorithm {
        Algorithm::DiscretePea => discrete_pea(&problem, &point_candidates(&r)?, &r.config, exec)?,
        Algorithm::DiscreteCea => {
            let levels =
                r.levels.clone().ok_or_else(|| CliError::validation("discrete coordinate exchange needs candidate levels"))?;
            discrete_cea(&problem, &CandidateSet::per_factor(levels, &r.region)?, &r.config, exec)?
        }
        Algorithm::ContinuousPea => continuous_pea(&problem, &r.config, exec)?,
        Algorithm::ContinuousCea => continuous_cea(&problem, &r.config, exec)?,
    };
    write_outputs(&r, &result.best, trace_json(&result))?;

    let top = result.top_phis(3);
    let mut text = String::new();
    let _ = writeln!(text, "model            {}", r.label);
    let _ = writeln!(text, "algorithm        {}", algorithm.name());
    let _ = writeln!(
        text,
        "tries            {} ({} failed), seed {}, critical {}",
        r.config.tries,
        result.failures.len(),
        r.config.seed,
        r.config.critical_value
    );
    let _ = writeln!(text, "best phi         {:.4} (try {})", result.best_phi, result.best_try);
    let _ = writeln!(text, "best three       {}", top.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", "));
    let _ = writeln!(text, "mean phi         {:.4}", result.mean_phi());
    let _ = writeln!(text, "mean iterations  {:.2}", result.mean_iterations());
    let _ = writeln!(text, "distinct points  {}", result.best.distinct_points());
    text.push_str(&support_table(&result.best));
    let json = json!({
        "model": r.label,
        "algorithm": algorithm.name(),
        "n": r.n,
        "tries": r.config.tries,
        "failed_tries": result.failures.len(),
        "seed": r.config.seed,
        "critical": r.config.critical_value,
        "best_phi": num(result.best_phi),
        "best_try": result.best_try,
        "best_three": top.iter().map(|v| num(*v)).collect::<Vec<_>>(),
        "mean_phi": num(result.mean_phi()),
        "mean_iterations": result.mean_iterations(),
        "distinct_points": result.best.distinct_points(),
        "replicates": replicate_counts(&result.best),
        "support": support_json(&result.best),
        "design": design_json(&result.best),
    });
    Ok(Outcome::ok(text, json))
}

fn multiphase_json(r: &Resolved, mr: &MultiphaseResult, mode: Phase2Mode, phase2_critical: f64) -> Value {
    json!({
        "model": r.label,
        "n": r.n,
        "seed": r.config.seed,
        "phase1": {
            "tries": r.config.tries,
            "failed_tries": mr.phase1.failures.len(),
            "critical": r.config.critical_value,
            "best_phi": num(mr.phase1.best_phi),
            "mean_iterations": mr.phase1.mean_iterations(),
            "distinct_designs": mr.phase1_distinct,
        },
        "phase2": {
            "mode": match mode { Phase2Mode::Pea => "pea", Phase2Mode::Cea => "cea" },
            "critical": phase2_critical,
            "starts": mr.phase2.outcomes.len() + mr.phase2.failures.len(),
            "best_phi": num(mr.phase2.best_phi),
            "mean_phi": num(mr.phase2.mean_phi()),
            "mean_iterations": mr.phase2.mean_iterations(),
        },
        "phase3": {
            "clusters": mr.clusters.len(),
            "snapped_phi": num(mr.snapped_phi),
            "reallocation_iterations": mr.reallocation.trace.iterations,
        },
        "phi": num(mr.phi),
        "distinct_points": mr.design.distinct_points(),
        "replicates": replicate_counts(&mr.design),
        "support": support_json(&mr.design),
        "design": design_json(&mr.design),
    })
}

pub fn cmd_multiphase(args: &MultiphaseArgs, exec: &Threaded) -> Result<Outcome> {
    let spec = load_run_spec(&args.run, "multiphase")?;
    let mut r = resolve(&args.run, &spec, 1.1)?;
    if let Some(c) = &args.closest {
        r.closest = Some(spec::parse_closest_arg(c)?);
    }
    let closest = r
        .closest
        .clone()
        .ok_or_else(|| CliError::validation("multiphase needs closest distances for every factor (--closest)"))?;
    let closest = ClosestDistances::new(closest, &r.region)?;
    let mode = match args.phase2 {
        Some(Phase2Arg::Pea) => Phase2Mode::Pea,
        Some(Phase2Arg::Cea) => Phase2Mode::Cea,
        None => match spec.phase2.as_deref() {
            None | Some("pea") => Phase2Mode::Pea,
            Some("cea") => Phase2Mode::Cea,
            Some(o) => return Err(CliError::validation(format!("unknown phase2 `{o}`; valid options: pea, cea"))),
        },
    };
    let phase2_critical = args.phase2_critical.or(spec.phase2_critical).unwrap_or(1.0001);
    let mut phase2 = SearchConfig::new(1, phase2_critical, r.config.seed);
    phase2.max_iterations = r.config.max_iterations;
    phase2.extra_starts = r.config.extra_starts.clone();
    let config = MultiphaseConfig { phase1: r.config.clone(), phase2, mode, closest };
    let problem = Problem::new(r.model.as_ref(), &r.prior, &r.region, r.n)?;
    let omega = point_candidates(&r)?;
    let mr = multiphase(&problem, &omega, &config, exec)?;
    let trace = json!({ "phase1": trace_json(&mr.phase1), "phase2": trace_json(&mr.phase2) });
    write_outputs(&r, &mr.design, trace)?;

    let mut text = String::new();
    let _ = writeln!(text, "model                 {}", r.label);
    let _ = writeln!(
        text,
        "phase 1               {} tries, critical {}, best phi {:.4}, {} distinct designs",
        r.config.tries, r.config.critical_value, mr.phase1.best_phi, mr.phase1_distinct
    );
    let _ = writeln!(
        text,
        "phase 2               critical {}, best phi {:.4}, mean phi {:.4}",
        phase2_critical,
        mr.phase2.best_phi,
        mr.phase2.mean_phi()
    );
    let _ = writeln!(text, "phase 3               {} clusters, snapped phi {:.4}", mr.clusters.len(), mr.snapped_phi);
    let _ = writeln!(text, "final phi             {:.4}", mr.phi);
    let _ = writeln!(text, "distinct points       {}", mr.design.distinct_points());
    text.push_str(&support_table(&mr.design));
    Ok(Outcome::ok(text, multiphase_json(&r, &mr, mode, phase2_critical)))
}
