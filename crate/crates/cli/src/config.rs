//! Flags shared by every command and the resolved run configuration.

use clap::Args;
use serde::Serialize;

use ricci_core::curvature::{SamplingPlan, DEFAULT_ALPHA};
use ricci_core::distribution::DEFAULT_BINS;
use ricci_core::kernel::Sigma;

use crate::error::CliError;

fn probability(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is not in [0, 1]"))
    }
}

fn open_unit(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("{x} is not in (0, 1)"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{x} must be positive"))
    }
}

fn at_least<const MIN: usize>(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= MIN => Ok(n),
        _ => Err(format!("`{s}` is not an integer >= {MIN}")),
    }
}

fn sigma(s: &str) -> Result<SigmaArg, String> {
    if s == "auto" {
        Ok(SigmaArg::Auto)
    } else {
        positive(s).map(SigmaArg::Fixed)
    }
}

fn workers(s: &str) -> Result<Workers, String> {
    if s == "auto" {
        return Ok(Workers::Auto);
    }
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(Workers::Count(n)),
        _ => Err(format!("`{s}` is neither `auto` nor a positive integer")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaArg {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Workers {
    Auto,
    Count(usize),
}

// Both serialize as the string "auto" or the bare number.
impl Serialize for SigmaArg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SigmaArg::Auto => s.serialize_str("auto"),
            SigmaArg::Fixed(x) => s.serialize_f64(*x),
        }
    }
}

impl Serialize for Workers {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Workers::Auto => s.serialize_str("auto"),
            Workers::Count(n) => s.serialize_u64(*n as u64),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Mass kept on each endpoint by the neighborhood measure.
    #[arg(long, global = true, default_value_t = DEFAULT_ALPHA, value_parser = probability)]
    pub alpha: f64,
    /// Histogram bins over [-1, 1].
    #[arg(long, global = true, default_value_t = DEFAULT_BINS, value_parser = at_least::<1>)]
    pub bins: usize,
    /// Histogram dimension: 1 (edges) or 2 (adjacent edge pairs). Defaults
    /// to 2, or 1 when sampling.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dims: Option<u8>,
    /// RBF bandwidth, or `auto` for the median pairwise distance.
    #[arg(long, global = true, default_value = "auto", value_parser = sigma)]
    pub sigma: SigmaArg,
    /// Sampling accuracy; requires --delta.
    #[arg(long, global = true, value_parser = open_unit)]
    pub epsilon: Option<f64>,
    /// Sampling failure probability; requires --epsilon.
    #[arg(long, global = true, value_parser = open_unit)]
    pub delta: Option<f64>,
    /// Constant in the sample size bound.
    #[arg(long = "constant-c", global = true, default_value_t = 1.0, value_parser = positive)]
    pub constant_c: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Cross-validation folds.
    #[arg(long, global = true, default_value_t = 10, value_parser = at_least::<2>)]
    pub folds: usize,
    /// Neighbors for k-NN.
    #[arg(long = "k", global = true, default_value_t = 1, value_parser = at_least::<1>)]
    pub k_neighbors: usize,
    /// Worker threads, or `auto`.
    #[arg(long, global = true, default_value = "auto", value_parser = workers)]
    pub workers: Workers,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long = "config-dump", global = true)]
    pub config_dump: bool,
}

/// Every setting a run depends on, after defaults are applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub bins: usize,
    pub feature_dims: u8,
    pub sigma: SigmaArg,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub constant_c: f64,
    pub seed: u64,
    pub folds: usize,
    pub k_neighbors: usize,
    pub worker_count: Workers,
    #[serde(skip)]
    pub dims_explicit: bool,
}

impl RunConfig {
    pub fn resolve(g: &GlobalArgs) -> Result<Self, CliError> {
        if g.epsilon.is_some() != g.delta.is_some() {
            return Err(CliError::Usage("--epsilon and --delta must be given together".into()));
        }
        let sampling = g.epsilon.is_some();
        if sampling && g.dims == Some(2) {
            return Err(CliError::Usage(
                "sampled curvature only supports 1D histograms; drop --dims 2 or the sampling flags".into(),
            ));
        }
        Ok(Self {
            alpha: g.alpha,
            bins: g.bins,
            feature_dims: g.dims.unwrap_or(if sampling { 1 } else { 2 }),
            sigma: g.sigma,
            epsilon: g.epsilon,
            delta: g.delta,
            constant_c: g.constant_c,
            seed: g.seed,
            folds: g.folds,
            k_neighbors: g.k_neighbors,
            worker_count: g.workers,
            dims_explicit: g.dims.is_some(),
        })
    }

    pub fn sampling_plan(&self) -> Result<Option<SamplingPlan>, CliError> {
        match (self.epsilon, self.delta) {
            (Some(e), Some(d)) => Ok(Some(SamplingPlan::new(e, d, self.constant_c)?)),
            _ => Ok(None),
        }
    }

    pub fn sigma(&self) -> Sigma {
        match self.sigma {
            SigmaArg::Auto => Sigma::Auto,
            SigmaArg::Fixed(s) => Sigma::Fixed(s),
        }
    }
}
