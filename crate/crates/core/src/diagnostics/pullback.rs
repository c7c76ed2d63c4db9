use serde::{Deserialize, Serialize};

use super::segments::integrate_split;
use super::{Check, PropertyReport, Status};
use crate::ivp::Trajectory;
use crate::nonlinearity::Nonlinearity;
use crate::quadrature::GaussRule;
use crate::transform::ProblemParams;

const CHECKPOINTS: usize = 10;
/// Outer end of the checked range, as a multiple of `R`.
const MAX_SPAN: f64 = 1e6;

/// A solution in the original radial variable.
pub trait RadialProfile {
    /// `[R, r_max]`.
    fn range(&self) -> (f64, f64);
    /// `(u, u')` at `r`.
    fn eval(&self, r: f64) -> (f64, f64);
    /// Zeros of `u`, ascending.
    fn zeros(&self) -> Vec<f64>;
}

/// The pullback `u(r) = v(r^{2-N})` of a trajectory.
pub struct Pullback<'a> {
    pub traj: &'a Trajectory,
    pub params: ProblemParams,
}

impl RadialProfile for Pullback<'_> {
    fn range(&self) -> (f64, f64) {
        (self.params.r, self.params.to_r(self.traj.eps))
    }

    fn eval(&self, r: f64) -> (f64, f64) {
        let n = self.params.n as f64;
        let t = r.powf(2.0 - n).min(self.traj.t_end);
        let (v, dv) = self.traj.eval(t);
        (v, (2.0 - n) * r.powf(1.0 - n) * dv)
    }

    fn zeros(&self) -> Vec<f64> {
        let mut z: Vec<f64> = self.traj.zeros().iter().map(|z| self.params.to_r(z.t)).collect();
        z.sort_by(f64::total_cmp);
        z
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Check {
    /// `max_k |LHS(r_k) - C| / |C|` with `C = R^{N-1} u'(R)`.
    pub residual: f64,
    pub checkpoints: Vec<f64>,
    /// `∫_R^{r_max} |u|^{-q}`.
    pub singular_integral: f64,
    pub r_max: f64,
}

impl C1Check {
    pub fn report(&self, tol: f64) -> PropertyReport {
        let mut r = PropertyReport::default();
        r.push(Check::new(
            "c1_identity",
            Status::from_bool(self.residual < tol),
            self.residual,
            0.0,
            tol,
        ));
        r.push(Check::new(
            "c1_singular_integrable",
            Status::from_bool(self.singular_integral.is_finite()),
            self.singular_integral,
            f64::INFINITY,
            0.0,
        ));
        r
    }
}

/// `r^{N-1} u' + ∫_R^r s^{N-1} K f(u) + (N-2)² ∫_R^r u / s^{3-N+(N-2)δ}`
/// must equal `R^{N-1} u'(R)`; checked at ten geometric checkpoints.
pub fn c1_solution_check(
    profile: &dyn RadialProfile,
    params: &ProblemParams,
    nl: &dyn Nonlinearity,
) -> C1Check {
    let n = params.n as f64;
    let (r0, r_end) = profile.range();
    let r_max = r_end.min(MAX_SPAN * r0);
    // `u(R) = 0` on boundary solutions: grade toward `R` as well.
    let mut zeros = vec![r0];
    zeros.extend(profile.zeros());
    let rule = GaussRule::new(20);
    let c = r0.powf(n - 1.0) * profile.eval(r0).1;
    let pot = (n - 2.0).powi(2);
    let pot_exp = n - 3.0 - (n - 2.0) * params.delta;
    let q = nl.singular_exponent();
    let mut nonlinear = |s: f64| {
        let u = profile.eval(s).0;
        if u == 0.0 {
            0.0
        } else {
            s.powf(n - 1.0) * params.kernel(s) * nl.f(u)
        }
    };
    let mut linear = |s: f64| pot * profile.eval(s).0 * s.powf(pot_exp);
    let at_zero = |s: f64| zeros.iter().any(|z| (s - z).abs() <= 4.0 * f64::EPSILON * z.abs());
    let mut singular = |s: f64| {
        let u = profile.eval(s).0;
        if u == 0.0 && at_zero(s) {
            0.0
        } else {
            u.abs().powf(-q)
        }
    };
    let checkpoints: Vec<f64> = (1..=CHECKPOINTS)
        .map(|k| r0 * (r_max / r0).powf(k as f64 / CHECKPOINTS as f64))
        .collect();
    let (mut i_nl, mut i_lin, mut i_sing) = (0.0, 0.0, 0.0);
    let mut prev = r0;
    let mut residual = 0.0_f64;
    for &r in &checkpoints {
        i_nl += integrate_split(&rule, &mut nonlinear, prev, r, &zeros);
        i_lin += integrate_split(&rule, &mut linear, prev, r, &zeros);
        i_sing += integrate_split(&rule, &mut singular, prev, r, &zeros);
        prev = r;
        let lhs = r.powf(n - 1.0) * profile.eval(r).1 + i_nl + i_lin;
        let denom = if c != 0.0 { c.abs() } else { 1.0 };
        residual = residual.max((lhs - c).abs() / denom);
    }
    C1Check {
        residual,
        checkpoints,
        singular_integral: i_sing,
        r_max,
    }
}
