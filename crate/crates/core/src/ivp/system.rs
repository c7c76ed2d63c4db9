//! Scalar second-order equations `y'' = -σ(x)·f(y) + L(x, y, y')` with `f`
//! singular at `y = 0` and `L` linear in `(y, y')`.

use crate::nonlinearity::Nonlinearity;
use crate::transform::{ProblemParams, TransformedProblem};

pub trait SecondOrderSystem: Sync {
    fn nonlinearity(&self) -> &dyn Nonlinearity;

    /// Weight `σ(x) > 0` multiplying `f`.
    fn weight(&self, x: f64) -> f64;
    fn weight_derivative(&self, x: f64) -> f64;

    /// The part of `y''` not involving `f`.
    fn linear(&self, x: f64, y: f64, dy: f64) -> f64;

    /// `(∂L/∂x, ∂L/∂y, ∂L/∂y')`.
    fn linear_partials(&self, x: f64, y: f64, dy: f64) -> (f64, f64, f64);

    fn accel(&self, x: f64, y: f64, dy: f64) -> f64 {
        -self.weight(x) * self.nonlinearity().f(y) + self.linear(x, y, dy)
    }

    fn jerk(&self, x: f64, y: f64, dy: f64, ddy: f64) -> f64 {
        let nl = self.nonlinearity();
        let (lx, ly, ldy) = self.linear_partials(x, y, dy);
        -self.weight_derivative(x) * nl.f(y) - self.weight(x) * nl.derivative(y) * dy
            + lx
            + ly * dy
            + ldy * ddy
    }

    /// `y''` without the singular term `σ c₋ sgn(y)|y|^{-q}`.
    fn regular_accel(&self, x: f64, y: f64, dy: f64) -> f64 {
        -self.weight(x) * self.nonlinearity().regular(y) + self.linear(x, y, dy)
    }
}

/// `v'' + h(t) f(v) + v t^{δ-2} = 0`; `δ = 0` is allowed here for the
/// borderline validation even though the shooting problem excludes it.
#[derive(Debug, Clone, Copy)]
pub struct TransformedSystem<'a> {
    pub tp: TransformedProblem,
    pub nl: &'a dyn Nonlinearity,
}

impl SecondOrderSystem for TransformedSystem<'_> {
    fn nonlinearity(&self) -> &dyn Nonlinearity {
        self.nl
    }
    fn weight(&self, t: f64) -> f64 {
        self.tp.h(t)
    }
    fn weight_derivative(&self, t: f64) -> f64 {
        self.tp.dh(t)
    }
    fn linear(&self, t: f64, v: f64, _dv: f64) -> f64 {
        -v * t.powf(self.tp.delta - 2.0)
    }
    fn linear_partials(&self, t: f64, v: f64, _dv: f64) -> (f64, f64, f64) {
        let d = self.tp.delta;
        (-(d - 2.0) * v * t.powf(d - 3.0), -t.powf(d - 2.0), 0.0)
    }
}

/// The radial equation
/// `u'' + (N-1)u'/r + K(r) f(u) + (N-2)² u / r^{2+(N-2)δ} = 0`.
#[derive(Debug, Clone, Copy)]
pub struct RadialSystem<'a> {
    pub params: ProblemParams,
    pub nl: &'a dyn Nonlinearity,
}

impl RadialSystem<'_> {
    fn potential_exponent(&self) -> f64 {
        2.0 + (self.params.n as f64 - 2.0) * self.params.delta
    }
    fn potential_coeff(&self) -> f64 {
        (self.params.n as f64 - 2.0).powi(2)
    }
}

impl SecondOrderSystem for RadialSystem<'_> {
    fn nonlinearity(&self) -> &dyn Nonlinearity {
        self.nl
    }
    fn weight(&self, r: f64) -> f64 {
        self.params.kernel(r)
    }
    fn weight_derivative(&self, r: f64) -> f64 {
        -self.params.alpha * self.params.kernel(r) / r
    }
    fn linear(&self, r: f64, u: f64, du: f64) -> f64 {
        let n = self.params.n as f64;
        -(n - 1.0) * du / r - self.potential_coeff() * u * r.powf(-self.potential_exponent())
    }
    fn linear_partials(&self, r: f64, u: f64, du: f64) -> (f64, f64, f64) {
        let n = self.params.n as f64;
        let m = self.potential_exponent();
        let c = self.potential_coeff();
        (
            (n - 1.0) * du / (r * r) + m * c * u * r.powf(-m - 1.0),
            -c * r.powf(-m),
            -(n - 1.0) / r,
        )
    }
}
