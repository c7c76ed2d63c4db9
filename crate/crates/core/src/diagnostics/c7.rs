use crate::nonlinearity::{max_abs_regular, Nonlinearity, NonlinearityConstants};
use crate::transform::ProblemParams;

/// Lower bound `C₇` for `|v(M)|` at every extremum `M` of `v_a`.
pub fn extremum_bound_c7(
    params: &ProblemParams,
    nl: &dyn Nonlinearity,
    constants: &NonlinearityConstants,
) -> f64 {
    let delta = params.delta;
    let q = nl.singular_exponent();
    let gamma = constants.gamma;
    let tp = params.transformed();
    let t_end = tp.t_end;
    let td = t_end.powf(delta);
    let b0 = delta.powf(1.0 / delta).min((td + delta).powf(1.0 / delta) - t_end);
    let g = max_abs_regular(nl, gamma);
    let middle = (g + 2.0 * td * gamma / (delta * b0 * b0 * tp.h(t_end))).powf(-1.0 / q);
    gamma.min(middle).min(g.powf(-1.0 / q))
}
