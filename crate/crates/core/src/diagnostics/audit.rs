use serde::{Deserialize, Serialize};

use super::{Check, PropertyReport, Status};
use crate::ivp::Trajectory;
use crate::nonlinearity::Nonlinearity;

const C7_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    /// Lower bound for `|v|` at extrema.
    pub c7: f64,
    /// Positive zero of `F`.
    pub gamma: f64,
    /// `R > R₀` is known, so extrema must exceed `γ`.
    pub r_above_r0: bool,
    /// Relative threshold for transversal zeros.
    pub slope_tol: f64,
}

impl AuditOptions {
    pub fn new(c7: f64, gamma: f64) -> Self {
        Self {
            c7,
            gamma,
            r_above_r0: false,
            slope_tol: 1e-6,
        }
    }
}

/// Boundedness, finite zero set, extremum bounds and transversality.
pub fn audit_trajectory(traj: &Trajectory, nl: &dyn Nonlinearity, opts: &AuditOptions) -> PropertyReport {
    let mut rep = PropertyReport::default();
    let max_v = traj.max_abs_v();
    let bounded = max_v.is_finite() && !traj.path.blew_up;
    rep.push(Check::new("bounded", Status::from_bool(bounded), max_v, f64::INFINITY, 0.0));

    let nz = traj.zeros().len() as f64;
    let finite = traj.zeros().iter().all(|z| z.t.is_finite() && z.t > 0.0 && z.t <= traj.t_end);
    rep.push(Check::new("finite_zero_count", Status::from_bool(finite), nz, f64::INFINITY, 0.0));

    let min_ext = traj.extrema().iter().map(|e| e.v.abs()).fold(f64::INFINITY, f64::min);
    let singular = nl.is_singular();
    if !singular {
        rep.push(Check::skip("extrema_ge_c7", "nonlinearity is not singular"));
        rep.push(Check::skip("extrema_gt_gamma", "nonlinearity is not singular"));
    } else if traj.extrema().is_empty() {
        rep.push(Check::skip("extrema_ge_c7", "no interior extrema"));
        rep.push(Check::skip("extrema_gt_gamma", "no interior extrema"));
    } else {
        rep.push(Check::new(
            "extrema_ge_c7",
            Status::from_bool(min_ext >= opts.c7 - C7_SLACK),
            min_ext,
            opts.c7,
            C7_SLACK,
        ));
        if opts.r_above_r0 {
            rep.push(Check::new(
                "extrema_gt_gamma",
                Status::from_bool(min_ext > opts.gamma),
                min_ext,
                opts.gamma,
                0.0,
            ));
        } else {
            rep.push(Check::skip("extrema_gt_gamma", "R > R0 not established"));
        }
    }

    let thresh = opts.slope_tol * traj.max_abs_dv().max(1.0);
    let min_slope = traj.zeros().iter().map(|z| z.slope.abs()).fold(f64::INFINITY, f64::min);
    if traj.zeros().is_empty() {
        rep.push(Check::skip("transversality", "no zeros"));
    } else {
        rep.push(Check::new(
            "transversality",
            Status::from_bool(min_slope > thresh),
            min_slope,
            thresh,
            opts.slope_tol,
        ));
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::extremum_bound_c7;
    use crate::ivp::{integrate, Controls};
    use crate::nonlinearity::NonlinearitySpec;
    use crate::transform::ProblemParams;

    fn setup() -> (Trajectory, AuditOptions) {
        let nl = NonlinearitySpec::canonical();
        let p = ProblemParams::canonical(2.0);
        let k = nl.derive_constants();
        let tr = integrate(&p.transformed(), &nl, 300.0, &Controls::default()).unwrap();
        (tr, AuditOptions::new(extremum_bound_c7(&p, &nl, &k), k.gamma))
    }

    #[test]
    fn canonical_trajectory_passes() {
        let (tr, mut o) = setup();
        o.r_above_r0 = true;
        let rep = audit_trajectory(&tr, &NonlinearitySpec::canonical(), &o);
        assert!(rep.all_passed(), "{rep:?}");
        assert_eq!(rep.get("transversality").unwrap().status, Status::Pass);
    }

    #[test]
    fn flattened_zero_fails_transversality() {
        let (mut tr, o) = setup();
        tr.path.zeros[0].slope = 0.0;
        let rep = audit_trajectory(&tr, &NonlinearitySpec::canonical(), &o);
        assert_eq!(rep.get("transversality").unwrap().status, Status::Fail);
    }

    #[test]
    fn gamma_check_skipped_without_flag() {
        let (tr, o) = setup();
        let rep = audit_trajectory(&tr, &NonlinearitySpec::canonical(), &o);
        assert_eq!(rep.get("extrema_gt_gamma").unwrap().status, Status::Skip);
    }
}
