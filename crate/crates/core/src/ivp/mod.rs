//! The singular initial value problem
//! `v'' + h(t) f(v) + v/t^{2-δ} = 0`, `v(0) = 0`, `v'(0) = a`.

pub mod crossing;
pub mod dopri;
pub mod hermite;
pub mod path;
pub mod startup;
pub mod system;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::nonlinearity::Nonlinearity;
use crate::transform::{fmt17, TransformedProblem};

pub use path::{propagate, Extremum, Node, Path, StepControls, ZeroCrossing};
pub use startup::{contraction_bound, picard_startup, Startup};
pub use system::{RadialSystem, SecondOrderSystem, TransformedSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Controls {
    pub rtol: f64,
    pub atol: f64,
    pub max_zeros: usize,
    /// Initial startup endpoint; `None` means `10⁻⁴·min(T, 1)`.
    pub eps: Option<f64>,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_zeros: 64,
            eps: None,
        }
    }
}

impl Controls {
    pub fn halved(&self) -> Self {
        Self {
            rtol: self.rtol / 2.0,
            atol: self.atol / 2.0,
            ..*self
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub a: f64,
    pub eps: f64,
    pub t_end: f64,
    pub startup_contraction: f64,
    /// Absent for trajectories rebuilt from samples.
    pub startup: Option<Startup>,
    pub path: Path,
}

/// JSON sidecar of a trajectory dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub a: f64,
    pub eps: f64,
    pub zeros: Vec<ZeroCrossing>,
    pub extrema: Vec<Extremum>,
    pub max_abs_v: f64,
    pub max_abs_dv: f64,
    pub startup_contraction: f64,
}

pub const TRAJECTORY_HEADER: &str = "t,v,dv_dt";

/// Startup on `[0, ε]`, then adaptive stepping to `T`.
pub fn integrate(
    tp: &TransformedProblem,
    nl: &dyn Nonlinearity,
    a: f64,
    controls: &Controls,
) -> Result<Trajectory> {
    let eps0 = controls.eps.unwrap_or(1e-4 * tp.t_end.min(1.0));
    let startup = picard_startup(tp, nl, a, eps0)?;
    let sys = TransformedSystem { tp: *tp, nl };
    let ctl = StepControls {
        rtol: controls.rtol,
        atol: controls.atol,
        max_zeros: controls.max_zeros,
        h_init: Some(startup.eps),
        blowup: f64::INFINITY,
    };
    let path = propagate(&sys, startup.eps, startup.v_eps, startup.dv_eps, tp.t_end, &ctl)?;
    Ok(Trajectory {
        a,
        eps: startup.eps,
        t_end: tp.t_end,
        startup_contraction: startup.contraction,
        startup: Some(startup),
        path,
    })
}

impl Trajectory {
    /// Dense trajectory through samples `(t, v, v')` on `[t₀, T]`, e.g. a
    /// profile read back from disk. `a` is taken as `v'(t₀)`.
    pub fn from_samples(
        tp: &TransformedProblem,
        nl: &dyn Nonlinearity,
        samples: &[(f64, f64, f64)],
    ) -> Result<Trajectory> {
        let sys = TransformedSystem { tp: *tp, nl };
        let path = Path::from_samples(&sys, samples)?;
        let (t0, _, dv0) = samples[0];
        Ok(Trajectory {
            a: dv0,
            eps: t0,
            t_end: samples.last().expect("nonempty").0,
            startup_contraction: f64::NAN,
            startup: None,
            path,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.path.nodes
    }

    pub fn zeros(&self) -> &[ZeroCrossing] {
        &self.path.zeros
    }

    pub fn extrema(&self) -> &[Extremum] {
        &self.path.extrema
    }

    /// `(v, v')` anywhere on `[0, T]`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        if let (true, Some(s)) = (t <= self.eps, &self.startup) {
            s.eval(t)
        } else {
            let (v, dv, _) = self.path.eval(t);
            (v, dv)
        }
    }

    pub fn v_end(&self) -> f64 {
        self.path.nodes.last().expect("nonempty").v
    }

    pub fn max_abs_v(&self) -> f64 {
        self.path.max_abs_v()
    }

    pub fn max_abs_dv(&self) -> f64 {
        self.path.max_abs_dv().max(self.a)
    }

    pub fn summary(&self) -> TrajectorySummary {
        TrajectorySummary {
            a: self.a,
            eps: self.eps,
            zeros: self.path.zeros.clone(),
            extrema: self.path.extrema.clone(),
            max_abs_v: self.max_abs_v(),
            max_abs_dv: self.max_abs_dv(),
            startup_contraction: self.startup_contraction,
        }
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{TRAJECTORY_HEADER}")?;
        for n in &self.path.nodes {
            writeln!(w, "{},{},{}", fmt17(n.t), fmt17(n.v), fmt17(n.dv))?;
        }
        Ok(())
    }
}

/// Interior zeros on `(0, T)`; a zero sitting at `T` itself is not counted.
pub fn count_zeros(traj: &Trajectory) -> usize {
    let zeros = traj.zeros();
    let n = zeros.len();
    let Some(last) = zeros.last() else {
        return 0;
    };
    let at_end = traj.v_end().abs() <= 1e-12 * traj.max_abs_v().max(1.0)
        && (traj.t_end - last.t).abs() <= 1e-9 * traj.t_end.max(1.0);
    if at_end {
        n - 1
    } else {
        n
    }
}
