//! Shooting on the slope `a = v'(0)`: zero-count scans, bracketing of the
//! count jump `n → n+1`, and refinement to the boundary solution `v_a(T) = 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ivp::{count_zeros, integrate, Controls, Trajectory};
use crate::nonlinearity::Nonlinearity;
use crate::transform::{ProblemParams, TransformedProblem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative bracket width for the count bisection.
    pub tol_a: f64,
    /// Boundary residual, relative to `max(1, max|v|)`.
    pub tol_b: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_a: 1e-10,
            tol_b: 1e-8,
        }
    }
}

/// One column of a zero-count scan. `n` is `None` when the trajectory could
/// not be completed (tangency, startup failure, too many zeros).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub a: f64,
    pub n: Option<usize>,
    pub v_t: f64,
    /// First extremum `M_a` and `v(M_a)`.
    pub m_a: Option<f64>,
    pub v_ma: Option<f64>,
    /// First zero `z_a` and `v'(z_a)`.
    pub z_a: Option<f64>,
    pub dv_za: Option<f64>,
    pub max_abs_v: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl ScanPoint {
    fn from_trajectory(tr: &Trajectory) -> Self {
        let first_ext = tr.extrema().first();
        let first_zero = tr.zeros().first();
        Self {
            a: tr.a,
            n: Some(count_zeros(tr)),
            v_t: tr.v_end(),
            m_a: first_ext.map(|e| e.t),
            v_ma: first_ext.map(|e| e.v),
            z_a: first_zero.map(|z| z.t),
            dv_za: first_zero.map(|z| z.slope),
            max_abs_v: tr.max_abs_v(),
            failure: None,
        }
    }

    fn unknown(a: f64, e: &Error) -> Self {
        Self {
            a,
            n: None,
            v_t: f64::NAN,
            m_a: None,
            v_ma: None,
            z_a: None,
            dv_za: None,
            max_abs_v: f64::NAN,
            failure: Some(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShootingResult {
    pub n: usize,
    pub a_n: f64,
    pub boundary_residual: f64,
    /// `|v(T)| ≤ tol_b·max(1, max|v|)` was reached.
    pub converged: bool,
    pub zero_slopes: Vec<f64>,
    pub dv_end: f64,
    /// Final count bracket `[a_lo, a_hi]`.
    pub bracket: (f64, f64),
    #[serde(skip)]
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct N0Result {
    pub n0: usize,
    /// Smallest slope whose count was determined.
    pub a_smallest: f64,
    /// The count at `a_smallest` is still positive.
    pub positive_at_min: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R0Result {
    pub r0: f64,
    /// `(R, min |v(M)| over the n = 0, 1 boundary solutions)` per attempt.
    pub history: Vec<(f64, f64)>,
}

/// `points` values geometrically spaced on `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (points - 1) as f64;
    (0..points)
        .map(|i| if i == points - 1 { hi } else { lo * (r * i as f64).exp() })
        .collect()
}

/// Slope below which the scan for `n₀` does not descend.
pub const A_MIN: f64 = 1e-6;
const RETRY_FRACTIONS: [f64; 5] = [0.5, 0.4, 0.6, 0.3, 0.7];
const POLISH_ITERATIONS: usize = 100;

pub struct Shooter<'a> {
    pub tp: TransformedProblem,
    pub nl: &'a dyn Nonlinearity,
    pub controls: Controls,
    pub tol: Tolerances,
}

impl Shooter<'_> {
    pub fn trajectory(&self, a: f64) -> Result<Trajectory> {
        integrate(&self.tp, self.nl, a, &self.controls)
    }

    pub fn probe(&self, a: f64) -> ScanPoint {
        match self.trajectory(a) {
            Ok(tr) => ScanPoint::from_trajectory(&tr),
            Err(e) => ScanPoint::unknown(a, &e),
        }
    }

    /// Counts zeros over `grid` in parallel; failed points are kept as
    /// unknown and their neighbourhood is refined once.
    pub fn zero_count_map(&self, grid: &[f64]) -> Result<Vec<ScanPoint>> {
        if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] > 0.0) {
            return Err(Error::Scan("grid must be positive and strictly increasing".into()));
        }
        let mut points: Vec<ScanPoint> = grid.par_iter().map(|&a| self.probe(a)).collect();
        let extra: Vec<f64> = points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.n.is_none() && p.failure.as_deref().is_some_and(|f| f.contains("tangential")))
            .flat_map(|(i, p)| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push((points[i - 1].a * p.a).sqrt());
                }
                if i + 1 < points.len() {
                    v.push((points[i + 1].a * p.a).sqrt());
                }
                v
            })
            .collect();
        points.extend(extra.par_iter().map(|&a| self.probe(a)).collect::<Vec<_>>());
        points.sort_by(|x, y| x.a.total_cmp(&y.a));
        if points.iter().all(|p| p.n.is_none()) {
            return Err(Error::Scan(format!(
                "every grid point failed (first: {})",
                points[0].failure.as_deref().unwrap_or("?")
            )));
        }
        Ok(points)
    }

    fn count_at(&self, a: f64) -> Result<(usize, Trajectory)> {
        let tr = self.trajectory(a)?;
        Ok((count_zeros(&tr), tr))
    }

    /// Boundary solution with exactly `n` interior zeros, bracketed from a
    /// previous scan.
    pub fn find_a_n(&self, n: usize, scan: &[ScanPoint]) -> Result<ShootingResult> {
        let (lo, hi) = bracket(n, scan)?;
        let (mut lo, mut hi) = (lo, hi);
        let mut lo_tr: Option<Trajectory> = None;
        let mut hi_tr: Option<Trajectory> = None;
        while hi - lo >= self.tol.tol_a * lo {
            let mut probed = None;
            for frac in RETRY_FRACTIONS {
                let a = lo + frac * (hi - lo);
                match self.count_at(a) {
                    Ok(r) => {
                        probed = Some((a, r));
                        break;
                    }
                    Err(Error::Tangency { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            let Some((a, (count, tr))) = probed else {
                return Err(Error::Unresolved { n, a: 0.5 * (lo + hi) });
            };
            if count <= n {
                lo = a;
                lo_tr = Some(tr);
            } else {
                hi = a;
                hi_tr = Some(tr);
            }
        }
        let lo_tr = match lo_tr {
            Some(t) => t,
            None => self.trajectory(lo)?,
        };
        let hi_tr = match hi_tr {
            Some(t) => t,
            None => self.trajectory(hi)?,
        };
        if count_zeros(&lo_tr) != n || count_zeros(&hi_tr) != n + 1 {
            return Err(Error::Unresolved { n, a: lo });
        }
        self.polish(n, lo_tr, hi_tr)
    }

    fn residual_scale(tr: &Trajectory) -> f64 {
        tr.max_abs_v().max(1.0)
    }

    /// Illinois regula falsi on `a ↦ v_a(T)` inside the count bracket.
    fn polish(&self, n: usize, lo_tr: Trajectory, hi_tr: Trajectory) -> Result<ShootingResult> {
        let bracket = (lo_tr.a, hi_tr.a);
        let (mut a0, mut g0) = (lo_tr.a, lo_tr.v_end());
        let (mut a1, mut g1) = (hi_tr.a, hi_tr.v_end());
        let mut best = lo_tr;
        let accept = |tr: &Trajectory| tr.v_end().abs() < self.tol.tol_b * Self::residual_scale(tr);
        let mut side = 0i8;
        if !accept(&best) && g0 * g1 < 0.0 {
            for _ in 0..POLISH_ITERATIONS {
                let a = (a0 * g1 - a1 * g0) / (g1 - g0);
                if !(a > a0.min(a1) && a < a0.max(a1)) {
                    break;
                }
                let tr = match self.trajectory(a) {
                    Ok(tr) => tr,
                    Err(Error::Tangency { .. }) => break,
                    Err(e) => return Err(e),
                };
                let g = tr.v_end();
                let count = count_zeros(&tr);
                if count == n && g.abs() < best.v_end().abs() {
                    best = tr.clone();
                }
                if count == n && accept(&tr) {
                    break;
                }
                if g * g1 < 0.0 {
                    a0 = a1;
                    g0 = g1;
                    side = 0;
                } else if side == 1 {
                    g0 *= 0.5;
                } else {
                    side = 1;
                }
                a1 = a;
                g1 = g;
                if (a1 - a0).abs() < 4.0 * f64::EPSILON * a1 {
                    break;
                }
            }
        }
        let residual = best.v_end().abs();
        Ok(ShootingResult {
            n,
            a_n: best.a,
            boundary_residual: residual,
            converged: residual < self.tol.tol_b * Self::residual_scale(&best),
            zero_slopes: best.zeros().iter().take(n).map(|z| z.slope).collect(),
            dv_end: best.nodes().last().expect("nonempty").dv,
            bracket,
            trajectory: best,
        })
    }

    /// Smallest observed count over a geometric grid from [`A_MIN`] to
    /// `a_max`.
    pub fn find_n0(&self, a_max: f64, points_per_decade: usize) -> Result<N0Result> {
        let decades = (a_max / A_MIN).log10().max(1.0);
        let points = (decades * points_per_decade as f64).ceil() as usize + 1;
        let scan = self.zero_count_map(&geometric_grid(A_MIN, a_max, points))?;
        let known: Vec<&ScanPoint> = scan.iter().filter(|p| p.n.is_some()).collect();
        let n0 = known.iter().filter_map(|p| p.n).min().expect("scan has a known point");
        let first = known[0];
        Ok(N0Result {
            n0,
            a_smallest: first.a,
            positive_at_min: first.n.unwrap_or(0) > 0,
        })
    }
}

/// `[a_lo, a_hi]` with `n(a_lo) = n` the last such scan point and `a_hi` the
/// next determined point, which must have a larger count.
pub fn bracket(n: usize, scan: &[ScanPoint]) -> Result<(f64, f64)> {
    let Some(i) = scan.iter().rposition(|p| p.n == Some(n)) else {
        return Err(Error::NotFound {
            n,
            reason: "no scanned slope has this zero count".into(),
        });
    };
    let Some(next) = scan[i + 1..].iter().find(|p| p.n.is_some()) else {
        return Err(Error::NotFound {
            n,
            reason: "no larger count beyond the last slope with this count (extend a_max)".into(),
        });
    };
    if next.n.expect("known") <= n {
        return Err(Error::NotFound {
            n,
            reason: format!("count decreases after a = {:e}", scan[i].a),
        });
    }
    Ok((scan[i].a, next.a))
}

/// Pairs `(a_i, a_{i+1})` of consecutive determined points where the count
/// decreases.
pub fn monotonicity_violations(scan: &[ScanPoint]) -> Vec<(f64, f64)> {
    let known: Vec<&ScanPoint> = scan.iter().filter(|p| p.n.is_some()).collect();
    known
        .windows(2)
        .filter(|w| w[1].n < w[0].n)
        .map(|w| (w[0].a, w[1].a))
        .collect()
}

/// Doubles `R` from `r_init` until every extremum of the `n = 0` and `n = 1`
/// boundary solutions exceeds `gamma`.
pub fn find_r0(
    params: &ProblemParams,
    nl: &dyn Nonlinearity,
    controls: &Controls,
    tol: &Tolerances,
    gamma: f64,
    a_grid: &[f64],
    max_doublings: usize,
) -> Result<R0Result> {
    let mut history = Vec::new();
    let mut p = *params;
    for _ in 0..=max_doublings {
        let shooter = Shooter {
            tp: p.transformed(),
            nl,
            controls: *controls,
            tol: *tol,
        };
        let scan = shooter.zero_count_map(a_grid)?;
        let mut min_ext = f64::INFINITY;
        let mut ok = true;
        for n in 0..2 {
            match shooter.find_a_n(n, &scan) {
                Ok(res) => {
                    for e in res.trajectory.extrema() {
                        min_ext = min_ext.min(e.v.abs());
                    }
                }
                Err(_) => ok = false,
            }
        }
        history.push((p.r, min_ext));
        if ok && min_ext > gamma {
            return Ok(R0Result { r0: p.r, history });
        }
        p.r *= 2.0;
    }
    Err(Error::Scan(format!(
        "extrema did not exceed gamma = {gamma} up to R = {}",
        p.r / 2.0
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Nonincreasing,
}

/// One large-`a` monotone trend over a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub name: String,
    pub direction: Direction,
    /// Slopes `a_{i+1}` at which the sequence moved the wrong way.
    pub violations: Vec<f64>,
    /// Points with the quantity defined.
    pub points: usize,
    pub pass: bool,
}

fn trend(name: &str, direction: Direction, series: &[(f64, f64)], allowed: usize) -> Trend {
    let violations: Vec<f64> = series
        .windows(2)
        .filter(|w| match direction {
            Direction::Increasing => w[1].1 <= w[0].1,
            Direction::Nonincreasing => w[1].1 > w[0].1,
        })
        .map(|w| w[1].0)
        .collect();
    Trend {
        name: name.to_string(),
        direction,
        pass: violations.len() <= allowed && series.len() >= 2,
        violations,
        points: series.len(),
    }
}

/// `max|v_a|` increasing, `M_a` nonincreasing, `v_a(M_a)` increasing, `z_a`
/// nonincreasing and `|v'(z_a)|` increasing over the determined points of
/// `scan`, each tolerating `allowed` wrong-way steps.
pub fn trend_checks(scan: &[ScanPoint], allowed: usize) -> Vec<Trend> {
    let known: Vec<&ScanPoint> = scan.iter().filter(|p| p.n.is_some()).collect();
    let col = |g: &dyn Fn(&ScanPoint) -> Option<f64>| -> Vec<(f64, f64)> {
        known.iter().filter_map(|p| g(p).map(|x| (p.a, x))).collect()
    };
    use Direction::*;
    vec![
        trend("max_abs_v", Increasing, &col(&|p| Some(p.max_abs_v)), allowed),
        trend("m_a", Nonincreasing, &col(&|p| p.m_a), allowed),
        trend("v_m_a", Increasing, &col(&|p| p.v_ma), allowed),
        trend("z_a", Nonincreasing, &col(&|p| p.z_a), allowed),
        trend("abs_dv_z_a", Increasing, &col(&|p| p.dv_za.map(f64::abs)), allowed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_oracle;
    use crate::nonlinearity::{Linear, NonlinearitySpec};

    fn linear_shooter(t_end: f64) -> Shooter<'static> {
        let mut tp = ProblemParams::canonical(2.0).transformed();
        tp.t_end = t_end;
        Shooter {
            tp,
            nl: &Linear,
            controls: Controls::default(),
            tol: Tolerances::default(),
        }
    }

    #[test]
    fn grid_endpoints() {
        let g = geometric_grid(1e-2, 1e2, 5);
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 1e-2);
        assert_eq!(g[4], 1e2);
        assert!((g[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn linear_counts_do_not_depend_on_a() {
        let sh = linear_shooter(25.0);
        let scan = sh.zero_count_map(&geometric_grid(0.1, 10.0, 7)).unwrap();
        assert!(scan.iter().all(|p| p.n == Some(2)));
    }

    #[test]
    fn trend_counts_wrong_way_steps() {
        let s = [(1.0, 1.0), (2.0, 2.0), (3.0, 1.5), (4.0, 3.0)];
        let t = trend("x", Direction::Increasing, &s, 1);
        assert_eq!(t.violations, vec![3.0]);
        assert!(t.pass);
        let t = trend("x", Direction::Increasing, &s, 0);
        assert!(!t.pass);
        let t = trend("x", Direction::Nonincreasing, &s, 1);
        assert_eq!(t.violations.len(), 2);
        assert!(!t.pass);
    }

    #[test]
    fn linear_n0_from_oracle() {
        let first = linear_oracle::first_zero(1.0).unwrap();
        let sh = linear_shooter(0.9 * first);
        assert_eq!(sh.find_n0(1.0, 1).unwrap().n0, 0);
        let sh = linear_shooter(1.5 * first);
        let r = sh.find_n0(1.0, 1).unwrap();
        assert_eq!(r.n0, 1);
        assert!(r.positive_at_min);
    }

    #[test]
    fn bracket_selection() {
        let pt = |a: f64, n: Option<usize>| ScanPoint {
            a,
            n,
            v_t: 0.0,
            m_a: None,
            v_ma: None,
            z_a: None,
            dv_za: None,
            max_abs_v: 0.0,
            failure: None,
        };
        let scan = vec![pt(1.0, Some(0)), pt(2.0, Some(0)), pt(3.0, None), pt(4.0, Some(1)), pt(5.0, Some(3))];
        assert_eq!(bracket(0, &scan).unwrap(), (2.0, 4.0));
        assert_eq!(bracket(1, &scan).unwrap(), (4.0, 5.0));
        assert!(matches!(bracket(2, &scan), Err(Error::NotFound { .. })));
        assert!(matches!(bracket(3, &scan), Err(Error::NotFound { .. })));
        assert!(monotonicity_violations(&scan).is_empty());
    }

    #[test]
    fn rejects_bad_grid() {
        let sh = linear_shooter(4.0);
        assert!(sh.zero_count_map(&[2.0, 1.0]).is_err());
        assert!(sh.zero_count_map(&[]).is_err());
    }

    #[test]
    fn canonical_boundary_solution_n0() {
        let nl = NonlinearitySpec::canonical();
        let sh = Shooter {
            tp: ProblemParams::canonical(2.0).transformed(),
            nl: &nl,
            controls: Controls::default(),
            tol: Tolerances::default(),
        };
        let scan = sh.zero_count_map(&geometric_grid(0.5, 200.0, 24)).unwrap();
        let res = sh.find_a_n(0, &scan).unwrap();
        assert!(res.converged, "residual {}", res.boundary_residual);
        assert_eq!(count_zeros(&res.trajectory), 0);
        assert!(res.dv_end != 0.0);
    }
}
