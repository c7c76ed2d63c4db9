use serde::{Deserialize, Serialize};

use super::segments::integrate_split;
use crate::error::{Error, Result};
use crate::ivp::Trajectory;
use crate::nonlinearity::Nonlinearity;
use crate::quadrature::{graded_trapezoid, GaussRule};
use crate::transform::TransformedProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevResult {
    pub z: f64,
    pub m: f64,
    pub v_m: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `|LHS - RHS| / max(1, |RHS|)` with graded Gauss quadrature.
    pub residual: f64,
    /// Same with a graded trapezoid rule, as an independent scheme.
    pub trapezoid_residual: f64,
    /// `|v(M)| > γ`, outside the case the identity is used for.
    pub above_gamma: bool,
}

/// Adjacent `(z, M)` pairs: a zero (or `t = 0`) followed by the next
/// extremum with no zero in between.
pub fn pohozaev_segments(traj: &Trajectory) -> Vec<(f64, f64)> {
    let mut starts = vec![0.0];
    starts.extend(traj.zeros().iter().map(|z| z.t));
    let mut out = Vec::new();
    for (k, &z) in starts.iter().enumerate() {
        let next_zero = starts.get(k + 1).copied().unwrap_or(f64::INFINITY);
        if let Some(e) = traj.extrema().iter().find(|e| e.t > z && e.t < next_zero) {
            out.push((z, e.t));
        }
    }
    out
}

/// Multiplying the equation by `(s - z)` and integrating over `[z, M]`:
///
/// ```text
/// ∫(s-z) h g₁(|v|) + ∫(s-z) |v|/s^{2-δ} = ∫(s-z) h c₋ |v|^{-q} + |v(M)|.
/// ```
///
/// Returns `Ok(None)` (skip) when `|v(M)| > γ` unless `force` is set.
pub fn pohozaev_identity_check(
    traj: &Trajectory,
    tp: &TransformedProblem,
    nl: &dyn Nonlinearity,
    z: f64,
    m: f64,
    gamma: f64,
    force: bool,
) -> Result<Option<PohozaevResult>> {
    if !pohozaev_segments(traj).iter().any(|&(a, b)| a == z && b == m) {
        return Err(Error::Domain(format!(
            "(z, M) = ({z}, {m}) is not an adjacent zero/extremum pair"
        )));
    }
    if z == 0.0 && traj.startup.is_none() {
        return Err(Error::Domain("segment from t = 0 needs the startup solution".into()));
    }
    let v_m = traj.eval(m).0;
    let above_gamma = v_m.abs() > gamma;
    if above_gamma && !force {
        return Ok(None);
    }
    let q = nl.singular_exponent();
    let c = nl.singular_coefficient();
    let delta = tp.delta;
    let abs_v = |s: f64| traj.eval(s).0.abs();
    let lhs_f = |s: f64| {
        let v = abs_v(s);
        (s - z) * (tp.h(s) * nl.regular(v) + v * s.powf(delta - 2.0))
    };
    let rhs_f = |s: f64| {
        let v = abs_v(s);
        if v == 0.0 {
            0.0
        } else {
            (s - z) * tp.h(s) * c * v.powf(-q)
        }
    };
    let rule = GaussRule::new(20);
    let mut breaks = vec![z];
    if traj.eps > z && traj.eps < m {
        breaks.push(traj.eps);
    }
    let lhs = integrate_split(&rule, &mut { lhs_f }, z, m, &breaks);
    let rhs = integrate_split(&rule, &mut { rhs_f }, z, m, &breaks) + v_m.abs();
    let trap = graded_trapezoid(&mut |s| lhs_f(s) - rhs_f(s), z, m, true, 4000, 2.0 / (1.0 - q))
        - v_m.abs();
    let scale = rhs.abs().max(1.0);
    Ok(Some(PohozaevResult {
        z,
        m,
        v_m,
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / scale,
        trapezoid_residual: trap.abs() / scale,
        above_gamma,
    }))
}
