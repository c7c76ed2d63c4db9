//! The change of variables `t = r^{2-N}`, `u(r) = v(t)` between the exterior
//! radial problem on `[R, ∞)` and the singular problem on `(0, R^{2-N}]`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ivp::Trajectory;

/// Which of the two kernel hypotheses the parameters satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// `N + q(N-2) < α < 2(N-1)`.
    Existence,
    /// `0 < α ≤ 2`.
    Nonexistence,
    Neither,
}

/// Original-variable data with the power kernel `K(r) = K0·r^{-α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemParams {
    #[serde(rename = "N")]
    pub n: u32,
    pub delta: f64,
    pub alpha: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "K0")]
    pub k0: f64,
}

/// Canonical parameters at `R = 1`, the `R₀` of the doubling scan from `R = 1/4`.
impl Default for ProblemParams {
    fn default() -> Self {
        Self::canonical(1.0)
    }
}

impl ProblemParams {
    pub fn new(n: u32, delta: f64, alpha: f64, r: f64, k0: f64) -> Result<Self> {
        let p = Self {
            n,
            delta,
            alpha,
            r,
            k0,
        };
        p.validate().map(|_| p).map_err(|mut errs| {
            let (field, reason) = errs.remove(0);
            Error::InvalidParameter { field, reason }
        })
    }

    /// N = 3, δ = 1, α = 3.75, K0 = 1 at the given inner radius.
    pub fn canonical(r: f64) -> Self {
        Self {
            n: 3,
            delta: 1.0,
            alpha: 3.75,
            r,
            k0: 1.0,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<(&'static str, String)>> {
        let mut errs = Vec::new();
        if self.n < 3 {
            errs.push(("N", format!("must be >= 3, got {}", self.n)));
        }
        if !(self.delta > 0.0 && self.delta < 2.0) {
            errs.push(("delta", format!("must lie in (0, 2), got {}", self.delta)));
        }
        if !self.alpha.is_finite() {
            errs.push(("alpha", format!("must be finite, got {}", self.alpha)));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            errs.push(("R", format!("must be > 0, got {}", self.r)));
        }
        if !(self.k0.is_finite() && self.k0 > 0.0) {
            errs.push(("K0", format!("must be > 0, got {}", self.k0)));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    pub fn regime(&self, q: f64) -> Regime {
        let n = self.n as f64;
        if n + q * (n - 2.0) < self.alpha && self.alpha < 2.0 * (n - 1.0) {
            Regime::Existence
        } else if self.alpha > 0.0 && self.alpha <= 2.0 {
            Regime::Nonexistence
        } else {
            Regime::Neither
        }
    }

    pub fn kernel(&self, r: f64) -> f64 {
        self.k0 * r.powf(-self.alpha)
    }

    /// `r K'(r) / K(r)`, constant for the power kernel.
    pub fn kernel_log_slope(&self) -> f64 {
        -self.alpha
    }

    pub fn to_t(&self, r: f64) -> Result<f64> {
        if !(r >= self.r) {
            return Err(Error::Domain(format!("r = {r} lies below R = {}", self.r)));
        }
        Ok(r.powi(2 - self.n as i32))
    }

    /// Inverse of [`ProblemParams::to_t`].
    pub fn to_r(&self, t: f64) -> f64 {
        t.powf(1.0 / (2.0 - self.n as f64))
    }

    pub fn transformed(&self) -> TransformedProblem {
        let n = self.n as f64;
        TransformedProblem {
            t_end: self.r.powf(2.0 - n),
            tilde_alpha: (2.0 * (n - 1.0) - self.alpha) / (n - 2.0),
            h_coeff: self.k0 / ((n - 2.0) * (n - 2.0)),
            delta: self.delta,
        }
    }
}

/// The `t`-variable problem `v'' + h(t) f(v) + v / t^{2-δ} = 0` on `(0, T]`
/// with `h(t) = h_coeff · t^{-α̃}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformedProblem {
    /// Right endpoint `T = R^{2-N}`.
    pub t_end: f64,
    pub tilde_alpha: f64,
    /// `h₀ = h₁ = K0 / (N-2)²` for the power kernel.
    pub h_coeff: f64,
    pub delta: f64,
}

impl TransformedProblem {
    pub fn h_eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("h is defined for t > 0, got {t}")));
        }
        Ok(self.h(t))
    }

    pub fn h(&self, t: f64) -> f64 {
        self.h_coeff * t.powf(-self.tilde_alpha)
    }

    pub fn dh(&self, t: f64) -> f64 {
        -self.tilde_alpha * self.h_coeff * t.powf(-self.tilde_alpha - 1.0)
    }

    pub fn d2h(&self, t: f64) -> f64 {
        self.tilde_alpha * (self.tilde_alpha + 1.0) * self.h_coeff * t.powf(-self.tilde_alpha - 2.0)
    }

    /// `0 < α̃ + q < 1`, the integrability condition behind the startup.
    pub fn startup_admissible(&self, q: f64) -> bool {
        let s = self.tilde_alpha + q;
        s > 0.0 && s < 1.0
    }
}

/// One sample of a solution in both variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub r: f64,
    pub u: f64,
    pub du_dr: f64,
    pub t: f64,
    pub v: f64,
    pub dv_dt: f64,
}

/// A solution on `[R, r_max]`, ordered by increasing `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionProfile {
    pub rows: Vec<ProfileRow>,
}

pub const PROFILE_HEADER: &str = "r,u,du_dr,t,v,dv_dt";

/// Maps a sample `(t, v, v')` to `(r, u, u')`.
pub fn pull_sample(params: &ProblemParams, t: f64, v: f64, dv: f64) -> ProfileRow {
    let n = params.n as f64;
    let r = params.to_r(t);
    ProfileRow {
        r,
        u: v,
        du_dr: (2.0 - n) * r.powf(1.0 - n) * dv,
        t,
        v,
        dv_dt: dv,
    }
}

pub fn pullback(params: &ProblemParams, traj: &Trajectory) -> SolutionProfile {
    let mut rows: Vec<ProfileRow> = traj
        .nodes()
        .iter()
        .map(|s| pull_sample(params, s.t, s.v, s.dv))
        .collect();
    rows.reverse();
    SolutionProfile { rows }
}

impl SolutionProfile {
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{PROFILE_HEADER}")?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt17(row.r),
                fmt17(row.u),
                fmt17(row.du_dr),
                fmt17(row.t),
                fmt17(row.v),
                fmt17(row.dv_dt)
            )?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == PROFILE_HEADER => {}
            other => {
                return Err(Error::Io(format!(
                    "profile header must be `{PROFILE_HEADER}`, got {other:?}"
                )))
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Io(format!("profile line {}: {e}", i + 2)))?;
            if vals.len() != 6 {
                return Err(Error::Io(format!("profile line {}: expected 6 columns", i + 2)));
            }
            rows.push(ProfileRow {
                r: vals[0],
                u: vals[1],
                du_dr: vals[2],
                t: vals[3],
                v: vals[4],
                dv_dt: vals[5],
            });
        }
        Ok(Self { rows })
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn r_t_round_trip(n in 3u32..6, r0 in 0.1f64..10.0, k in 1.0f64..1e4) {
            let p = ProblemParams { n, ..ProblemParams::canonical(r0) };
            let r = r0 * k;
            let t = p.to_t(r).unwrap();
            prop_assert!(t > 0.0 && t <= p.transformed().t_end * (1.0 + 1e-15));
            prop_assert!((p.to_r(t) - r).abs() <= 1e-12 * r);
        }
    }

    #[test]
    fn to_t_examples() {
        let p = ProblemParams::canonical(4.0);
        assert_eq!(p.to_t(4.0).unwrap(), 0.25);
        let p4 = ProblemParams::new(4, 1.0, 5.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(p4.to_t(10.0).unwrap(), 1e-2, max_relative = 1e-15);
        let mut last = f64::INFINITY;
        for k in 0..40 {
            let t = p.to_t(4.0 * 2f64.powi(k)).unwrap();
            assert!(t < last && t > 0.0);
            last = t;
        }
        assert!(last < 1e-11);
        assert!(matches!(p.to_t(3.9), Err(Error::Domain(_))));
    }

    #[test]
    fn round_trip() {
        for n in 3..7 {
            let p = ProblemParams::new(n, 1.0, 3.0, 0.5, 1.0).unwrap();
            for r in crate::nonlinearity::log_grid(0.5, 1e6, 200) {
                assert_relative_eq!(p.to_r(p.to_t(r).unwrap()), r, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn h_examples() {
        let tp = ProblemParams::new(3, 1.0, 3.75, 4.0, 1.0).unwrap().transformed();
        assert_relative_eq!(tp.tilde_alpha, 0.25, max_relative = 1e-15);
        assert_relative_eq!(tp.h_eval(0.25).unwrap(), 2f64.sqrt(), max_relative = 1e-15);
        let lim = ProblemParams::new(3, 1.0, 4.0 - 1e-12, 1.0, 1.7).unwrap().transformed();
        assert_relative_eq!(lim.h(0.3), 1.7, max_relative = 1e-11);
        let tp4 = ProblemParams::new(4, 1.0, 5.0, 1.0, 2.0).unwrap().transformed();
        assert_relative_eq!(tp4.h_eval(1.0).unwrap(), 0.5, max_relative = 1e-15);
        assert!(tp.h_eval(0.0).is_err());
    }

    #[test]
    fn h_positive_decreasing() {
        let tp = ProblemParams::canonical(2.0).transformed();
        let ts: Vec<f64> = crate::nonlinearity::log_grid(1e-9, tp.t_end, 300).collect();
        for w in ts.windows(2) {
            assert!(tp.h(w[0]) > tp.h(w[1]));
            assert!(tp.h(w[1]) > 0.0);
        }
    }

    #[test]
    fn regimes() {
        let p = ProblemParams::canonical(1.0);
        assert_eq!(p.regime(0.5), Regime::Existence);
        let tp = p.transformed();
        assert!(tp.startup_admissible(0.5));
        let mut p2 = p;
        p2.alpha = 2.0;
        assert_eq!(p2.regime(0.5), Regime::Nonexistence);
        p2.alpha = 3.0;
        assert_eq!(p2.regime(0.5), Regime::Neither);
    }

    #[test]
    fn chain_rule_sample() {
        let p = ProblemParams::canonical(4.0);
        let row = pull_sample(&p, 0.25, 5.0, 1.0);
        assert_relative_eq!(row.r, 4.0, max_relative = 1e-15);
        assert_eq!(row.u, 5.0);
        assert_relative_eq!(row.du_dr, -0.0625, max_relative = 1e-15);
    }

    /// For v(t) = t(1-t), the pulled-back u(r) = v(r^{-1}) has
    /// u'' + (N-1)u'/r = (N-2)² r^{2-2N} v''(t): the radial operator and the
    /// t-operator agree up to that chain-rule factor.
    #[test]
    fn equations_agree_on_manufactured_profile() {
        let p = ProblemParams::new(3, 1.0, 3.75, 1.0, 1.0).unwrap();
        let tp = p.transformed();
        let nl = crate::nonlinearity::NonlinearitySpec::canonical();
        use crate::nonlinearity::Nonlinearity;
        let n = p.n as f64;
        let v = |t: f64| t * (1.0 - t);
        let u = |r: f64| v(p.to_t(r).unwrap());
        for r in [1.2, 1.7, 3.0, 8.0, 40.0] {
            let t = p.to_t(r).unwrap();
            let hh = 1e-4 * r;
            let du = (u(r + hh) - u(r - hh)) / (2.0 * hh);
            let d2u = (u(r + hh) - 2.0 * u(r) + u(r - hh)) / (hh * hh);
            let res_r = d2u
                + (n - 1.0) / r * du
                + p.kernel(r) * nl.f(u(r))
                + (n - 2.0).powi(2) * u(r) / r.powf(2.0 + (n - 2.0) * p.delta);
            let res_t = -2.0 + tp.h(t) * nl.f(v(t)) + v(t) / t.powf(2.0 - p.delta);
            let factor = (n - 2.0).powi(2) * r.powf(2.0 - 2.0 * n);
            assert_relative_eq!(res_r, factor * res_t, max_relative = 1e-6);
        }
    }

    #[test]
    fn csv_round_trip() {
        let prof = SolutionProfile {
            rows: vec![ProfileRow {
                r: 1.0 / 3.0,
                u: -2.5e-300,
                du_dr: std::f64::consts::PI,
                t: 3.0,
                v: -2.5e-300,
                dv_dt: 1e10,
            }],
        };
        let mut buf = Vec::new();
        prof.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,u,du_dr,t,v,dv_dt\n"));
        assert_eq!(SolutionProfile::read_csv(&text).unwrap(), prof);
    }
}
