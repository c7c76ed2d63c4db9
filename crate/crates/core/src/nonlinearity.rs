//! Odd nonlinearities that are superlinear at infinity and singular at zero.
//!
//! The canonical family is
//!
//! ```text
//! f(u) = c₊·|u|^{p-1}u − c₋·sgn(u)|u|^{-q},   p > 1, 0 < q < 1,
//! ```
//!
//! split as `f = g₁ + s` with the regular part `g₁(u) = c₊|u|^{p-1}u` and the
//! singular part `s(u) = −c₋ sgn(u)|u|^{-q}`. Solvers only talk to the
//! [`Nonlinearity`] trait, so any odd `f` with the same split can be plugged in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An odd nonlinearity `f = g₁ − c₋·sgn(u)|u|^{-q}` with a locally Lipschitz
/// regular part `g₁`, `g₁(0) = 0`.
pub trait Nonlinearity: Send + Sync + std::fmt::Debug {
    /// `f(u)`. Infinite at `u = 0` when the singular coefficient is nonzero.
    fn f(&self, u: f64) -> f64;

    /// `F(u) = ∫₀ᵘ f`, continuous at 0 with `F(0) = 0`.
    fn primitive(&self, u: f64) -> f64;

    /// `f'(u)` for `u ≠ 0`.
    fn derivative(&self, u: f64) -> f64;

    /// The regular part `g₁(u)`.
    fn regular(&self, u: f64) -> f64;

    /// `g₁'(u)`.
    fn regular_derivative(&self, u: f64) -> f64;

    /// Coefficient `c₋ ≥ 0` of the singular term.
    fn singular_coefficient(&self) -> f64;

    /// Exponent `q ∈ (0, 1)` of the singular term.
    fn singular_exponent(&self) -> f64;

    /// A Lipschitz constant for `g₁` on `[-bound, bound]`.
    fn regular_lipschitz(&self, bound: f64) -> f64;

    fn is_singular(&self) -> bool {
        self.singular_coefficient() > 0.0
    }
}

/// The canonical two-term power family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearitySpec {
    pub p: f64,
    pub q: f64,
    pub c_plus: f64,
    pub c_minus: f64,
}

impl Default for NonlinearitySpec {
    fn default() -> Self {
        Self::canonical()
    }
}

/// Zeros and lower bounds of `f` and `F` on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityConstants {
    /// Unique positive zero of `f`.
    pub beta: f64,
    /// Unique positive zero of `F`.
    pub gamma: f64,
    /// `F ≥ -F0` everywhere.
    #[serde(rename = "F0")]
    pub big_f0: f64,
    /// `|u|^{q-1}u·f(u) ≥ -f0` everywhere.
    pub f0: f64,
}

impl NonlinearitySpec {
    pub fn new(p: f64, q: f64, c_plus: f64, c_minus: f64) -> Result<Self> {
        let spec = Self {
            p,
            q,
            c_plus,
            c_minus,
        };
        spec.validate().map(|_| spec).map_err(|mut errs| {
            let (field, reason) = errs.remove(0);
            Error::InvalidParameter { field, reason }
        })
    }

    pub fn canonical() -> Self {
        Self {
            p: 3.0,
            q: 0.5,
            c_plus: 1.0,
            c_minus: 1.0,
        }
    }

    /// Every violated constraint, for aggregated config errors.
    pub fn validate(&self) -> std::result::Result<(), Vec<(&'static str, String)>> {
        let mut errs = Vec::new();
        if !(self.p.is_finite() && self.p > 1.0) {
            errs.push(("p", format!("must be > 1, got {}", self.p)));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            errs.push(("q", format!("must lie in (0, 1), got {}", self.q)));
        }
        if !(self.c_plus.is_finite() && self.c_plus > 0.0) {
            errs.push(("c_plus", format!("must be > 0, got {}", self.c_plus)));
        }
        if !(self.c_minus.is_finite() && self.c_minus > 0.0) {
            errs.push(("c_minus", format!("must be > 0, got {}", self.c_minus)));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Checked `f(u)`: the singular term makes `u = 0` a domain error.
    pub fn eval_f(&self, u: f64) -> Result<f64> {
        if u == 0.0 || !u.is_finite() {
            return Err(Error::Domain(format!("f is singular at u = {u}")));
        }
        Ok(self.f(u))
    }

    pub fn eval_big_f(&self, u: f64) -> f64 {
        self.primitive(u)
    }

    /// Closed-form `β, γ, F₀, f₀`.
    pub fn derive_constants(&self) -> NonlinearityConstants {
        let s = self.p + self.q;
        let beta = (self.c_minus / self.c_plus).powf(1.0 / s);
        let gamma = ((self.p + 1.0) * self.c_minus / ((1.0 - self.q) * self.c_plus)).powf(1.0 / s);
        debug_assert!(beta < gamma);
        NonlinearityConstants {
            beta,
            gamma,
            big_f0: -self.primitive(beta),
            f0: self.c_minus,
        }
    }
}

impl Nonlinearity for NonlinearitySpec {
    fn f(&self, u: f64) -> f64 {
        let a = u.abs();
        u.signum() * (self.c_plus * a.powf(self.p) - self.c_minus * a.powf(-self.q))
    }

    fn primitive(&self, u: f64) -> f64 {
        let a = u.abs();
        if a == 0.0 {
            return 0.0;
        }
        self.c_plus * a.powf(self.p + 1.0) / (self.p + 1.0)
            - self.c_minus * a.powf(1.0 - self.q) / (1.0 - self.q)
    }

    fn derivative(&self, u: f64) -> f64 {
        let a = u.abs();
        self.c_plus * self.p * a.powf(self.p - 1.0) + self.c_minus * self.q * a.powf(-self.q - 1.0)
    }

    fn regular(&self, u: f64) -> f64 {
        self.c_plus * u.abs().powf(self.p - 1.0) * u
    }

    fn regular_derivative(&self, u: f64) -> f64 {
        self.c_plus * self.p * u.abs().powf(self.p - 1.0)
    }

    fn singular_coefficient(&self) -> f64 {
        self.c_minus
    }

    fn singular_exponent(&self) -> f64 {
        self.q
    }

    fn regular_lipschitz(&self, bound: f64) -> f64 {
        self.c_plus * self.p * bound.abs().powf(self.p - 1.0)
    }
}

/// `f ≡ 0`: reduces the problem to the linear comparison equation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Linear;

impl Nonlinearity for Linear {
    fn f(&self, _u: f64) -> f64 {
        0.0
    }
    fn primitive(&self, _u: f64) -> f64 {
        0.0
    }
    fn derivative(&self, _u: f64) -> f64 {
        0.0
    }
    fn regular(&self, _u: f64) -> f64 {
        0.0
    }
    fn regular_derivative(&self, _u: f64) -> f64 {
        0.0
    }
    fn singular_coefficient(&self) -> f64 {
        0.0
    }
    fn singular_exponent(&self) -> f64 {
        0.5
    }
    fn regular_lipschitz(&self, _bound: f64) -> f64 {
        0.0
    }
}

/// Finds the unique positive zero of `g` by bracketing outward from 1 and
/// bisecting to relative width `1e-14`. Assumes `g < 0` below and `g > 0`
/// above the root.
pub fn positive_root(g: impl Fn(f64) -> f64) -> Result<f64> {
    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    let mut guard = 0;
    while g(lo) >= 0.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Domain("no sign change below 1".into()));
        }
    }
    guard = 0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Domain("no sign change above 1".into()));
        }
    }
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `β`, `γ`, `F₀`, `f₀` for an arbitrary nonlinearity by bisection and grid
/// minimization on `[1e-6, 1e3]`.
pub fn constants_numeric(nl: &dyn Nonlinearity) -> Result<NonlinearityConstants> {
    let beta = positive_root(|u| nl.f(u))?;
    let gamma = positive_root(|u| nl.primitive(u))?;
    let q = nl.singular_exponent();
    let (mut big_f0, mut f0) = (0.0_f64, 0.0_f64);
    for u in log_grid(1e-6, 1e3, 20_000) {
        big_f0 = big_f0.max(-nl.primitive(u));
        f0 = f0.max(-(u.powf(q) * nl.f(u)));
    }
    big_f0 = big_f0.max(-nl.primitive(beta));
    Ok(NonlinearityConstants {
        beta,
        gamma,
        big_f0,
        f0,
    })
}

/// Maximum of `|g₁|` on `[0, upper]` by a 10⁴-point grid and golden-section
/// refinement around the best grid point.
pub fn max_abs_regular(nl: &dyn Nonlinearity, upper: f64) -> f64 {
    const POINTS: usize = 10_000;
    let g = |u: f64| nl.regular(u).abs();
    let step = upper / POINTS as f64;
    let (mut best_i, mut best) = (0usize, g(0.0));
    for i in 1..=POINTS {
        let v = g(step * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = step * best_i.saturating_sub(1) as f64;
    let mut hi = (step * (best_i + 1) as f64).min(upper);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if g(x1) > g(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best.max(g(0.5 * (lo + hi)))
}

pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
}
