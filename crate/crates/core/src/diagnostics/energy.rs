use serde::{Deserialize, Serialize};

use crate::ivp::Trajectory;
use crate::nonlinearity::Nonlinearity;
use crate::transform::TransformedProblem;

/// Steps narrower than this fraction of their abscissa are skipped: the
/// difference quotient there is dominated by rounding.
pub(crate) const FD_MIN_WIDTH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCheck {
    /// Max over step midpoints of `|DQ - Q'| / scale`.
    pub max_residual: f64,
    /// Largest decrease of `Q` between consecutive nodes with `v v' ≤ 0`,
    /// relative to `max |Q|` (0 when monotone).
    pub max_decrease: f64,
    pub samples: usize,
}

/// `Q = v'²/(2h) + F(v)` against `Q' = -v'² h'/(2h²) - v v'/(h t^{2-δ})`,
/// comparing Richardson-extrapolated central differences of `Q` on the
/// dense output at step midpoints with the closed form. The discrepancy, less
/// the rounding bound `8ε|Q|/s` of the difference quotient, is measured
/// relative to the sum of term magnitudes.
/// Segments bridged by a crossing expansion are skipped.
pub fn energy_identity_check(
    traj: &Trajectory,
    tp: &TransformedProblem,
    nl: &dyn Nonlinearity,
) -> EnergyCheck {
    let q = |t: f64| {
        let (v, dv, _) = traj.path.eval(t);
        0.5 * dv * dv / tp.h(t) + nl.primitive(v)
    };
    let nodes = traj.nodes();
    let mut max_residual = 0.0_f64;
    let mut samples = 0;
    for (i, w) in nodes.windows(2).enumerate() {
        if traj.path.crossings[i].is_some() {
            continue;
        }
        let (a, b) = (w[0].t, w[1].t);
        if b - a < FD_MIN_WIDTH * b.abs() {
            continue;
        }
        let m = 0.5 * (a + b);
        let s = 0.02 * (b - a);
        let d = |s: f64| (q(m + s) - q(m - s)) / (2.0 * s);
        let fd = (4.0 * d(0.5 * s) - d(s)) / 3.0;
        let (v, dv, d2v) = traj.path.eval(m);
        let (h, dh) = (tp.h(m), tp.dh(m));
        let lin = v * dv / (h * m.powf(2.0 - tp.delta));
        let damp = dv * dv * dh / (2.0 * h * h);
        let exact = -damp - lin;
        let noise = 8.0 * f64::EPSILON * q(m).abs() / s;
        let scale = (dv * d2v / h).abs() + (nl.f(v) * dv).abs() + damp.abs() + lin.abs();
        if scale > 0.0 {
            max_residual = max_residual.max(((fd - exact).abs() - noise).max(0.0) / scale);
            samples += 1;
        }
    }
    let qs: Vec<f64> = nodes.iter().map(|n| 0.5 * n.dv * n.dv / tp.h(n.t) + nl.primitive(n.v)).collect();
    let qmax = qs.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut max_decrease = 0.0_f64;
    for i in 0..nodes.len().saturating_sub(1) {
        let (n0, n1) = (&nodes[i], &nodes[i + 1]);
        if traj.path.crossings[i].is_none() && n0.v * n0.dv <= 0.0 && n1.v * n1.dv <= 0.0 {
            max_decrease = max_decrease.max((qs[i] - qs[i + 1]) / qmax);
        }
    }
    EnergyCheck {
        max_residual,
        max_decrease,
        samples,
    }
}
