//! Local expansion of a solution through a transversal zero.
//!
//! Near a zero `x_z` with slope `s ≠ 0`, write `τ = x - x_z`. The singular
//! forcing `σ c₋ sgn(y)|y|^{-q}` behaves like `κ sgn(τ)|τ|^{-q}` with
//! `κ = σ(x_z) c₋ sgn(s)|s|^{-q}`, and integrating term by term gives
//!
//! ```text
//! y''(τ) ≈ κ sgn|τ|^{-q} + K₂ sgn|τ|^{1-2q} + K₃ |τ|^{1-q} + B + Cτ
//! ```
//!
//! where `K₂ = -qκ²/(s(1-q)(2-q))` corrects `|y|^{-q}` for the curvature of
//! `y`, `K₃ = κ(σ'/σ - qB/(2s))` collects the variation of `σ` and of the
//! regular acceleration, and `B + Cτ` is the regular acceleration to first
//! order. The first neglected term is `O(κ³/s²·|τ|^{2-3q})` in `y''`.

use super::system::SecondOrderSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingModel {
    pub xz: f64,
    pub slope: f64,
    q: f64,
    kappa: f64,
    k2: f64,
    k3: f64,
    b: f64,
    c: f64,
}

impl CrossingModel {
    pub fn new(sys: &dyn SecondOrderSystem, xz: f64, slope: f64) -> Self {
        let nl = sys.nonlinearity();
        let q = nl.singular_exponent();
        let sigma = sys.weight(xz);
        let kappa = sigma * nl.singular_coefficient() * slope.signum() * slope.abs().powf(-q);
        let b = sys.regular_accel(xz, 0.0, slope);
        let (lx, ly, ldy) = sys.linear_partials(xz, 0.0, slope);
        let rx = -sys.weight_derivative(xz) * nl.regular(0.0) + lx;
        let ry = -sigma * nl.regular_derivative(0.0) + ly;
        let c = rx + ry * slope + ldy * b;
        let k2 = -q * kappa * kappa / (slope * (1.0 - q) * (2.0 - q));
        let k3 = kappa * (sys.weight_derivative(xz) / sigma - q * b / (2.0 * slope));
        Self {
            xz,
            slope,
            q,
            kappa,
            k2,
            k3,
            b,
            c,
        }
    }

    /// `(y, y', y'')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let tau = x - self.xz;
        if tau == 0.0 {
            return (0.0, self.slope, f64::INFINITY.copysign(self.kappa));
        }
        let q = self.q;
        let sg = tau.signum();
        let at = tau.abs();
        let p1 = at.powf(1.0 - q);
        let p12 = at.powf(1.0 - 2.0 * q);
        let y = self.slope * tau
            + self.kappa * sg * at * p1 / ((1.0 - q) * (2.0 - q))
            + self.k2 * sg * at * at * p12 / ((2.0 - 2.0 * q) * (3.0 - 2.0 * q))
            + self.k3 * at * at * p1 / ((2.0 - q) * (3.0 - q))
            + self.b * tau * tau / 2.0
            + self.c * tau * tau * tau / 6.0;
        let dy = self.slope
            + self.kappa * p1 / (1.0 - q)
            + self.k2 * at * p12 / (2.0 - 2.0 * q)
            + self.k3 * sg * at * p1 / (2.0 - q)
            + self.b * tau
            + self.c * tau * tau / 2.0;
        let ddy = self.kappa * sg * p1 / at
            + self.k2 * sg * p12
            + self.k3 * p1
            + self.b
            + self.c * tau;
        (y, dy, ddy)
    }

    /// Half-width of the jump window keeping the first neglected singular
    /// term of `y'` below `tol`, and the drift of the regular acceleration
    /// from `B + Cτ` integrated over the window likewise, capped at `cap`.
    pub fn window(&self, sys: &dyn SecondOrderSystem, tol: f64, cap: f64) -> f64 {
        let q = self.q;
        let k = self.kappa.abs();
        let from_singular = if k == 0.0 {
            f64::INFINITY
        } else {
            (tol * self.slope * self.slope / (k * k * k)).powf(1.0 / (3.0 - 3.0 * q))
        };
        let floor = 64.0 * f64::EPSILON * self.xz.abs().max(f64::MIN_POSITIVE);
        let mut d = from_singular.min(cap);
        while d > floor {
            let drift = [-d, d]
                .iter()
                .map(|&tau| {
                    let (y, dy, _) = self.eval(self.xz + tau);
                    (sys.regular_accel(self.xz + tau, y, dy) - self.b - self.c * tau).abs()
                })
                .fold(0.0, f64::max);
            if d * drift <= tol || !drift.is_finite() {
                break;
            }
            d *= 0.5;
        }
        d.max(floor)
    }
}

/// Fits `(x_z, s)` so the expansion reproduces `(y0, y0')` at `x0`.
pub fn fit(sys: &dyn SecondOrderSystem, x0: f64, y0: f64, dy0: f64) -> Option<CrossingModel> {
    if dy0 == 0.0 {
        return None;
    }
    let mut xz = x0 - y0 / dy0;
    let mut s = dy0;
    let residual = |xz: f64, s: f64| {
        let m = CrossingModel::new(sys, xz, s);
        let (y, dy, _) = m.eval(x0);
        (y - y0, dy - dy0)
    };
    let scale_y = y0.abs().max(f64::MIN_POSITIVE);
    for _ in 0..30 {
        let (r1, r2) = residual(xz, s);
        if r1.abs() <= 1e-15 * scale_y && r2.abs() <= 1e-15 * s.abs() {
            break;
        }
        let hx = 1e-7 * (x0 - xz).abs().max(f64::MIN_POSITIVE);
        let hs = 1e-7 * s.abs();
        let (a1, a2) = residual(xz + hx, s);
        let (b1, b2) = residual(xz, s + hs);
        let j11 = (a1 - r1) / hx;
        let j21 = (a2 - r2) / hx;
        let j12 = (b1 - r1) / hs;
        let j22 = (b2 - r2) / hs;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = (r1 * j22 - r2 * j12) / det;
        let ds = (j11 * r2 - j21 * r1) / det;
        xz -= dx;
        s -= ds;
        if !(xz.is_finite() && s.is_finite()) || s.signum() != dy0.signum() {
            return None;
        }
        if dx.abs() <= 1e-16 * xz.abs() && ds.abs() <= 1e-16 * s.abs() {
            break;
        }
    }
    Some(CrossingModel::new(sys, xz, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivp::system::TransformedSystem;
    use crate::nonlinearity::NonlinearitySpec;
    use crate::transform::ProblemParams;

    #[test]
    fn expansion_satisfies_the_equation_near_the_zero() {
        let nl = NonlinearitySpec::canonical();
        let tp = ProblemParams::canonical(2.0).transformed();
        let sys = TransformedSystem { tp, nl: &nl };
        let m = CrossingModel::new(&sys, 0.3, -2.0);
        for tau in [-1e-6, -1e-7, 1e-8, 1e-6] {
            let x = 0.3 + tau;
            let (y, dy, ddy) = m.eval(x);
            let exact = sys.accel(x, y, dy);
            // Residual is the neglected O(|τ|^{2-3q}) term relative to |y''|.
            assert!(((ddy - exact) / exact).abs() < 1e-2, "tau {tau}: {ddy} vs {exact}");
        }
    }

    #[test]
    fn fit_recovers_the_zero() {
        let nl = NonlinearitySpec::canonical();
        let tp = ProblemParams::canonical(2.0).transformed();
        let sys = TransformedSystem { tp, nl: &nl };
        let truth = CrossingModel::new(&sys, 0.31, 1.7);
        for x0 in [0.31 - 1e-7, 0.31 + 3e-8] {
            let (y0, dy0, _) = truth.eval(x0);
            let m = fit(&sys, x0, y0, dy0).unwrap();
            assert!((m.xz - 0.31).abs() < 1e-15);
            assert!((m.slope - 1.7).abs() < 1e-12);
        }
    }
}
