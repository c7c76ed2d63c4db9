//! Numerical checks of the qualitative properties of computed solutions, and
//! the nonexistence probe for kernels decaying no faster than `r^{-2}`.

mod audit;
mod c7;
mod energy;
mod integrated;
mod pohozaev;
mod probe;
mod pullback;
mod segments;
mod suite;

use serde::{Deserialize, Serialize};

pub use audit::{audit_trajectory, AuditOptions};
pub use c7::extremum_bound_c7;
pub use energy::{energy_identity_check, EnergyCheck};
pub use integrated::{integrated_identity_check, step_residual_check};
pub use pohozaev::{pohozaev_identity_check, pohozaev_segments, PohozaevResult};
pub use probe::{growth_term, growth_term_quadrature, nonexistence_probe, growth_fit, GrowthFit, PROBE_HEADER, ProbeOptions, ProbeOutcome, ProbeReport, ProbeRow};
pub use suite::{property_suite, SuiteOptions};
pub use pullback::{c1_solution_check, C1Check, Pullback, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Measured quantity; `null` when skipped.
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: &str, status: Status, value: f64, bound: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            status,
            value: Some(value),
            bound: Some(bound),
            tolerance: Some(tolerance),
            detail: None,
        }
    }

    pub fn skip(name: &str, why: &str) -> Self {
        Self {
            name: name.into(),
            status: Status::Skip,
            value: None,
            bound: None,
            tolerance: None,
            detail: Some(why.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub checks: Vec<Check>,
}

impl PropertyReport {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: PropertyReport) {
        self.checks.extend(other.checks);
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail).collect()
    }
}
