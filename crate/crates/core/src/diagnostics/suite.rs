use serde::{Deserialize, Serialize};

use super::{
    audit_trajectory, c1_solution_check, energy_identity_check, extremum_bound_c7, integrated_identity_check,
    pohozaev_identity_check, pohozaev_segments, step_residual_check, AuditOptions, Check, PropertyReport, Pullback,
    Status,
};
use crate::ivp::{Controls, Trajectory};
use crate::nonlinearity::{constants_numeric, Nonlinearity};
use crate::transform::ProblemParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// `R > R₀` is known, so extrema must exceed `γ`.
    pub r_above_r0: bool,
    /// Evaluate the zero-to-extremum identity even when `|v(M)| > γ`.
    pub force_pohozaev: bool,
    pub energy_tol: f64,
    pub monotone_slack: f64,
    pub integrated_tol: f64,
    pub pohozaev_tol: f64,
    pub c1_tol: f64,
    pub controls: Controls,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            r_above_r0: false,
            force_pohozaev: false,
            energy_tol: 1e-6,
            monotone_slack: 1e-10,
            integrated_tol: 1e-8,
            pohozaev_tol: 1e-4,
            c1_tol: 1e-6,
            controls: Controls::default(),
        }
    }
}

/// Every trajectory-level check in one report.
pub fn property_suite(
    traj: &Trajectory,
    params: &ProblemParams,
    nl: &dyn Nonlinearity,
    opts: &SuiteOptions,
) -> crate::Result<PropertyReport> {
    let tp = params.transformed();
    let k = constants_numeric(nl)?;
    let mut audit = AuditOptions::new(extremum_bound_c7(params, nl, &k), k.gamma);
    audit.r_above_r0 = opts.r_above_r0;
    let mut rep = audit_trajectory(traj, nl, &audit);

    let e = energy_identity_check(traj, &tp, nl);
    rep.push(Check::new(
        "energy_identity",
        Status::from_bool(e.max_residual < opts.energy_tol),
        e.max_residual,
        0.0,
        opts.energy_tol,
    ));
    rep.push(Check::new(
        "energy_monotone",
        Status::from_bool(e.max_decrease <= opts.monotone_slack),
        e.max_decrease,
        0.0,
        opts.monotone_slack,
    ));
    rep.push(integrated_identity_check(traj, &tp, nl, opts.integrated_tol));
    rep.push(step_residual_check(traj, &tp, nl, &opts.controls));

    for (i, (z, m)) in pohozaev_segments(traj).into_iter().enumerate() {
        let name = format!("zero_extremum_identity_{i}");
        if z == 0.0 && traj.startup.is_none() {
            rep.push(Check::skip(&name, "segment from t = 0 needs startup data"));
            continue;
        }
        match pohozaev_identity_check(traj, &tp, nl, z, m, k.gamma, opts.force_pohozaev)? {
            None => rep.push(Check::skip(&name, "|v(M)| > gamma")),
            Some(p) => {
                let worst = p.residual.max(p.trapezoid_residual);
                rep.push(
                    Check::new(&name, Status::from_bool(worst < opts.pohozaev_tol), worst, 0.0, opts.pohozaev_tol)
                        .with_detail(format!(
                            "z = {:e}, M = {:e}, v(M) = {:e}, gauss = {:e}, trapezoid = {:e}{}",
                            p.z,
                            p.m,
                            p.v_m,
                            p.residual,
                            p.trapezoid_residual,
                            if p.above_gamma { ", forced above gamma" } else { "" }
                        )),
                );
            }
        }
    }

    if nl.is_singular() {
        let c1 = c1_solution_check(&Pullback { traj, params: *params }, params, nl);
        rep.extend(c1.report(opts.c1_tol));
    } else {
        rep.push(Check::skip("c1_identity", "nonlinearity is not singular"));
    }
    Ok(rep)
}
