//! Dormand–Prince 5(4) step for the first-order form `(y, y')' = (y', y'')`.

use super::system::SecondOrderSystem;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub y: f64,
    pub dy: f64,
    /// Scaled error norm; the step is acceptable when `<= 1`.
    pub err: f64,
}

/// One trial step of signed size `h` from `(x, y, dy)`. Returns `None` when a
/// stage evaluation is not finite.
pub fn step(
    sys: &dyn SecondOrderSystem,
    x: f64,
    y: f64,
    dy: f64,
    h: f64,
    rtol: f64,
    atol: f64,
) -> Option<Step> {
    let mut ky = [0.0; 7];
    let mut kd = [0.0; 7];
    for s in 0..7 {
        let (mut ys, mut ds) = (y, dy);
        for j in 0..s {
            ys += h * A[s][j] * ky[j];
            ds += h * A[s][j] * kd[j];
        }
        ky[s] = ds;
        kd[s] = sys.accel(x + C[s] * h, ys, ds);
        if !kd[s].is_finite() {
            return None;
        }
    }
    // FSAL: the last stage is evaluated at the 5th-order solution.
    let (mut yn, mut dn) = (y, dy);
    for s in 0..6 {
        yn += h * A[6][s] * ky[s];
        dn += h * A[6][s] * kd[s];
    }
    let (mut ey, mut ed) = (0.0, 0.0);
    for s in 0..7 {
        ey += h * E[s] * ky[s];
        ed += h * E[s] * kd[s];
    }
    let sy = atol + rtol * y.abs().max(yn.abs());
    let sd = atol + rtol * dy.abs().max(dn.abs());
    let err = (ey / sy).abs().max((ed / sd).abs());
    if !(yn.is_finite() && dn.is_finite() && err.is_finite()) {
        return None;
    }
    Some(Step { y: yn, dy: dn, err })
}

/// Standard step-size factor with safety 0.9, bounded to `[0.2, 5]`.
pub fn factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}
