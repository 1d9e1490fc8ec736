//! Report documents. Key order is fixed by struct declaration order and
//! floats go through serde_json's shortest round-trip encoder, so reruns of
//! the same config are byte-identical and the files diff cleanly.
//!
//! Every quantitative row carries an `eq` tag naming the identity or limit
//! statement it instantiates, so a report is readable on its own.

use serde::Serialize;
use ssf_core::convergence::ConvergenceReport;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct Versions {
    pub ssf_lab: &'static str,
    pub ssf_core: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Tolerance {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct Row {
    pub section: String,
    pub eq: &'static str,
    pub domain_size: f64,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Serialize)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub rows: Vec<Row>,
    pub verdicts: Vec<Verdict>,
    pub experiment: &'static str,
    pub potential: String,
    pub pipeline: Option<&'static str>,
    pub tolerances: Vec<Tolerance>,
    pub notes: Vec<String>,
    pub versions: Versions,
}

impl Report {
    pub fn new(experiment: &'static str, potential: String) -> Self {
        Report {
            rows: Vec::new(),
            verdicts: Vec::new(),
            experiment,
            potential,
            pipeline: None,
            tolerances: Vec::new(),
            notes: Vec::new(),
            versions: Versions {
                ssf_lab: env!("CARGO_PKG_VERSION"),
                ssf_core: ssf_core::VERSION,
            },
        }
    }

    pub fn verdict(&mut self, check: impl Into<String>, pass: bool) {
        self.verdicts.push(Verdict {
            check: check.into(),
            pass,
        });
    }

    pub fn tolerance(&mut self, name: &'static str, value: f64) {
        self.tolerances.push(Tolerance { name, value });
    }

    /// Flatten a convergence report into tagged rows plus one trend verdict
    /// per section.
    pub fn absorb(&mut self, rep: &ConvergenceReport, eq_of: impl Fn(&str) -> &'static str) {
        for sec in &rep.sections {
            let eq = eq_of(&sec.label);
            for r in &sec.rows {
                self.rows.push(Row {
                    section: sec.label.clone(),
                    eq,
                    domain_size: r.domain_size,
                    value: r.value,
                    error: r.error,
                });
            }
            self.verdict(
                format!("{}: errors nonincreasing", sec.label),
                sec.monotone_trend,
            );
        }
        for n in &rep.notes {
            self.notes.push(n.clone());
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Validation(format!("report serialization: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}
