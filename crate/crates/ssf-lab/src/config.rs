//! Run configuration: a single JSON document per invocation, schema-checked
//! by serde (unknown keys rejected) and then semantically validated against
//! the chosen subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use ssf_core::potential::PotentialSpec;
use ssf_core::ssf::{DomainSpec, Method};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Compute,
    Converge,
    Cesaro,
    KernelCheck,
    Selfcheck,
}

impl Experiment {
    pub fn tag(&self) -> &'static str {
        match self {
            Experiment::Compute => "compute",
            Experiment::Converge => "converge",
            Experiment::Cesaro => "cesaro",
            Experiment::KernelCheck => "kernel-check",
            Experiment::Selfcheck => "selfcheck",
        }
    }
}

/// λ grid: either an evenly spaced span or an explicit list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    Span(SpanGrid),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl LambdaGrid {
    pub fn to_grid(&self) -> Result<Vec<f64>, CliError> {
        match self {
            LambdaGrid::Span(s) => {
                if !s.min.is_finite() || !s.max.is_finite() {
                    return Err(CliError::field("lambda_grid", "min and max must be finite"));
                }
                if s.points < 2 {
                    return Err(CliError::field("lambda_grid", "a span needs at least 2 points"));
                }
                if s.min >= s.max {
                    return Err(CliError::field("lambda_grid", "min must be below max"));
                }
                let n = s.points;
                Ok((0..n)
                    .map(|i| s.min + (s.max - s.min) * i as f64 / (n - 1) as f64)
                    .collect())
            }
            LambdaGrid::List(xs) => {
                if xs.is_empty() {
                    return Err(CliError::field("lambda_grid", "explicit list is empty"));
                }
                if xs.iter().any(|x| !x.is_finite()) {
                    return Err(CliError::field("lambda_grid", "values must be finite"));
                }
                if xs.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(CliError::field(
                        "lambda_grid",
                        "values must be strictly increasing",
                    ));
                }
                Ok(xs.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub pipeline: Option<Method>,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub domain_sequence: Option<Vec<DomainSpec>>,
    #[serde(default)]
    pub lambda_grid: Option<LambdaGrid>,
    #[serde(default)]
    pub eps_schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub out_csv: Option<PathBuf>,
    #[serde(default)]
    pub out_report: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| {
            CliError::Validation(format!(
                "config {}: line {} column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        cfg.potential
            .validate()
            .map_err(|e| CliError::field("potential", &e.to_string()))?;
        if let Some(eps) = &cfg.eps_schedule {
            if eps.is_empty() {
                return Err(CliError::field("eps_schedule", "must not be empty"));
            }
            if eps.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
                return Err(CliError::field(
                    "eps_schedule",
                    "entries must be positive and finite",
                ));
            }
        }
        Ok(cfg)
    }

    /// The experiment the config asks for must be the one the subcommand
    /// runs; a mismatch is a config error, not a silent override.
    pub fn expect_experiment(&self, want: Experiment) -> Result<(), CliError> {
        if self.experiment != want {
            return Err(CliError::field(
                "experiment",
                &format!(
                    "config says \"{}\" but the subcommand runs \"{}\"",
                    self.experiment.tag(),
                    want.tag()
                ),
            ));
        }
        Ok(())
    }

    pub fn require_lambda_grid(&self) -> Result<Vec<f64>, CliError> {
        match &self.lambda_grid {
            Some(g) => g.to_grid(),
            None => Err(CliError::field("lambda_grid", "required for this experiment")),
        }
    }

    pub fn require_domain_sequence(&self) -> Result<&[DomainSpec], CliError> {
        match self.domain_sequence.as_deref() {
            Some(seq) if seq.len() >= 2 => Ok(seq),
            Some(_) => Err(CliError::field(
                "domain_sequence",
                "needs at least two nested domains",
            )),
            None => Err(CliError::field(
                "domain_sequence",
                "required for this experiment",
            )),
        }
    }
}
