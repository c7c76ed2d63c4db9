use super::segments::integrate_split;
use super::{Check, Status};
use crate::ivp::path::dense_unit;
use crate::ivp::{Controls, SecondOrderSystem, Trajectory, TransformedSystem};
use crate::nonlinearity::Nonlinearity;
use crate::quadrature::GaussRule;
use crate::transform::TransformedProblem;

const CHECKPOINTS: usize = 10;

/// `v'(t) - a + ∫₀ᵗ h f(v) + ∫₀ᵗ x^{δ-2} v` at ten checkpoints, relative to
/// the sum of the magnitudes of its terms. The integrals over `[0, ε]` come
/// from the startup representation.
pub fn integrated_identity_check(
    traj: &Trajectory,
    tp: &TransformedProblem,
    nl: &dyn Nonlinearity,
    tol: f64,
) -> Check {
    const NAME: &str = "integrated_form_identity";
    let Some(startup) = &traj.startup else {
        return Check::skip(NAME, "no startup data (trajectory rebuilt from samples)");
    };
    let parts = startup.term_integrals(traj.eps);
    let mut i_f = parts[0].0 + parts[1].0;
    let mut i_lin = parts[2].0;
    let rule = GaussRule::new(20);
    // `v(T) = 0` on boundary solutions: grade toward `T` as well.
    let mut zeros: Vec<f64> = traj.zeros().iter().map(|z| z.t).collect();
    zeros.push(traj.t_end);
    let mut hf = |s: f64| {
        let v = traj.path.eval(s).0;
        if v == 0.0 {
            0.0
        } else {
            tp.h(s) * nl.f(v)
        }
    };
    let mut lin = |s: f64| traj.path.eval(s).0 * s.powf(tp.delta - 2.0);
    let mut prev = traj.eps;
    let mut worst = 0.0_f64;
    for k in 1..=CHECKPOINTS {
        let t = traj.eps + (traj.t_end - traj.eps) * k as f64 / CHECKPOINTS as f64;
        i_f += integrate_split(&rule, &mut hf, prev, t, &zeros);
        i_lin += integrate_split(&rule, &mut lin, prev, t, &zeros);
        prev = t;
        let dv = traj.eval(t).1;
        let res = dv - traj.a + i_f + i_lin;
        let scale = dv.abs() + traj.a + i_f.abs() + i_lin.abs();
        worst = worst.max(res.abs() / scale);
    }
    Check::new(NAME, Status::from_bool(worst < tol), worst, 0.0, tol)
}

/// Dense `v''` against the equation at step midpoints, in units of the
/// stepper's dense acceptance bound
/// `5·(atol + rtol·max(|v|, |v'|))·max(1, |v''|)` plus abscissa rounding;
/// passes at or below 2, i.e. within `10·tol·max(1, |v''|)`.
pub fn step_residual_check(
    traj: &Trajectory,
    tp: &TransformedProblem,
    nl: &dyn Nonlinearity,
    controls: &Controls,
) -> Check {
    let sys = TransformedSystem { tp: *tp, nl };
    let mut worst = 0.0_f64;
    for (i, w) in traj.nodes().windows(2).enumerate() {
        if traj.path.crossings[i].is_some() {
            continue;
        }
        let m = 0.5 * (w[0].t + w[1].t);
        let (v, dv, d2v) = traj.path.eval(m);
        let exact = sys.accel(m, v, dv);
        let unit = dense_unit(&w[0], &w[1], m, v, dv, exact, controls.atol, controls.rtol);
        worst = worst.max((d2v - exact).abs() / unit);
    }
    Check::new("step_residual", Status::from_bool(worst <= 2.0), worst, 2.0, 0.0)
}
