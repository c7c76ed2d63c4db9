//! Two-point Hermite interpolation matching `y, y', y'', y'''` at both ends
//! (degree 7).

/// Values `[y, y', y'', y''']` at one end of a segment.
pub type Jet = [f64; 4];

/// `(y, y', y'')` at `x0 + θ·h`, `θ ∈ [0, 1]`.
pub fn eval(left: &Jet, right: &Jet, h: f64, theta: f64) -> (f64, f64, f64) {
    let coeffs = coefficients(left, right, h);
    let z = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
    let (mut p, mut dp, mut d2p) = (coeffs[7], 0.0, 0.0);
    for k in (0..7).rev() {
        let d = theta - z[k];
        d2p = d2p * d + 2.0 * dp;
        dp = dp * d + p;
        p = p * d + coeffs[k];
    }
    (p, dp / h, d2p / (h * h))
}

/// Newton coefficients on the node sequence `0,0,0,0,1,1,1,1` in the scaled
/// variable `θ`.
fn coefficients(left: &Jet, right: &Jet, h: f64) -> [f64; 8] {
    let scale = |j: &Jet| [j[0], h * j[1], h * h * j[2] / 2.0, h * h * h * j[3] / 6.0];
    let (l, r) = (scale(left), scale(right));
    // dd[i] holds f[z_i, ..., z_{i+k}] for the current order k.
    let mut dd = [l[0], l[0], l[0], l[0], r[0], r[0], r[0], r[0]];
    let mut out = [0.0; 8];
    out[0] = dd[0];
    for k in 1..8 {
        for i in 0..8 - k {
            let same_left = i + k <= 3;
            let same_right = i >= 4;
            dd[i] = if same_left {
                l[k]
            } else if same_right {
                r[k]
            } else {
                dd[i + 1] - dd[i]
            };
        }
        out[k] = dd[0];
    }
    out
}
