//! Run configuration: a TOML file with `[problem]`, `[nonlinearity]`,
//! `[solver]`, `[scan]` and `[probe]` sections. Missing sections and keys take
//! the canonical defaults.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ivp::Controls;
use crate::nonlinearity::NonlinearitySpec;
use crate::shooting::Tolerances;
use crate::transform::ProblemParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub rtol: f64,
    pub atol: f64,
    pub tol_a: f64,
    pub tol_b: f64,
    /// Startup endpoint; absent means `10⁻⁴·min(T, 1)`.
    pub eps_init: Option<f64>,
    pub max_zeros: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = Controls::default();
        let t = Tolerances::default();
        Self {
            rtol: c.rtol,
            atol: c.atol,
            tol_a: t.tol_a,
            tol_b: t.tol_b,
            eps_init: None,
            max_zeros: c.max_zeros,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub a_min: f64,
    pub a_max: f64,
    pub points: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            a_min: 1.0,
            a_max: 1e4,
            points: 41,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub b_min: f64,
    pub b_max: f64,
    pub points: usize,
    /// Horizon; absent means `10³·R`.
    pub r_far: Option<f64>,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self {
            b_min: 1e-2,
            b_max: 1e2,
            points: 20,
            r_far: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemParams,
    pub nonlinearity: NonlinearitySpec,
    pub solver: SolverSection,
    pub scan: ScanSection,
    pub probe: ProbeSection,
}

fn positive(errs: &mut Vec<String>, key: &str, x: f64) {
    if !(x.is_finite() && x > 0.0) {
        errs.push(format!("{key}: must be > 0, got {x}"));
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(vec![e.message().to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml(&text)
    }

    /// Every violated constraint, in one error.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if let Err(v) = self.problem.validate() {
            errs.extend(v.into_iter().map(|(k, why)| format!("problem.{k}: {why}")));
        }
        if let Err(v) = self.nonlinearity.validate() {
            errs.extend(v.into_iter().map(|(k, why)| format!("nonlinearity.{k}: {why}")));
        }
        let s = &self.solver;
        positive(&mut errs, "solver.rtol", s.rtol);
        positive(&mut errs, "solver.atol", s.atol);
        positive(&mut errs, "solver.tol_a", s.tol_a);
        positive(&mut errs, "solver.tol_b", s.tol_b);
        if let Some(e) = s.eps_init {
            positive(&mut errs, "solver.eps_init", e);
        }
        if s.max_zeros == 0 {
            errs.push("solver.max_zeros: must be >= 1".into());
        }
        let sc = &self.scan;
        positive(&mut errs, "scan.a_min", sc.a_min);
        if !(sc.a_max > sc.a_min) {
            errs.push(format!("scan.a_max: must exceed a_min, got {}", sc.a_max));
        }
        if sc.points < 2 {
            errs.push(format!("scan.points: must be >= 2, got {}", sc.points));
        }
        let p = &self.probe;
        positive(&mut errs, "probe.b_min", p.b_min);
        if !(p.b_max >= p.b_min) {
            errs.push(format!("probe.b_max: must be >= b_min, got {}", p.b_max));
        }
        if p.points == 0 {
            errs.push("probe.points: must be >= 1".into());
        }
        if let Some(r) = p.r_far {
            if !(r > self.problem.r) {
                errs.push(format!("probe.r_far: must exceed R = {}, got {r}", self.problem.r));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn controls(&self) -> Controls {
        Controls {
            rtol: self.solver.rtol,
            atol: self.solver.atol,
            max_zeros: self.solver.max_zeros,
            eps: self.solver.eps_init,
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            tol_a: self.solver.tol_a,
            tol_b: self.solver.tol_b,
        }
    }

    pub fn r_far(&self) -> f64 {
        self.probe.r_far.unwrap_or(1e3 * self.problem.r)
    }
}
