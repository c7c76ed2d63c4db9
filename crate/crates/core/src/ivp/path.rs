//! Adaptive propagation of a [`SecondOrderSystem`] with dense output and
//! zero/extremum events, crossing zeros of a singular `f` with the local
//! expansion in [`super::crossing`].

use serde::{Deserialize, Serialize};

use super::crossing::{fit, CrossingModel};
use super::dopri;
use super::hermite;
use super::system::SecondOrderSystem;
use crate::error::{Error, Result};
use crate::roots::brent;

/// A step endpoint with the jet used by the dense interpolant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub t: f64,
    pub v: f64,
    pub dv: f64,
    pub d2v: f64,
    pub d3v: f64,
}

impl Node {
    fn jet(&self) -> hermite::Jet {
        [self.v, self.dv, self.d2v, self.d3v]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCrossing {
    pub t: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub t: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControls {
    pub rtol: f64,
    pub atol: f64,
    pub max_zeros: usize,
    /// First trial step; defaults to 1% of the span.
    pub h_init: Option<f64>,
    /// Stop (without error) once `|y|` exceeds this.
    pub blowup: f64,
}

impl Default for StepControls {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_zeros: 64,
            h_init: None,
            blowup: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<Node>,
    /// `crossings[i]` is set when the segment `nodes[i]..nodes[i+1]` was
    /// bridged by a crossing expansion.
    pub crossings: Vec<Option<CrossingModel>>,
    pub zeros: Vec<ZeroCrossing>,
    pub extrema: Vec<Extremum>,
    pub blew_up: bool,
}

const EVENT_XTOL: f64 = 1e-13;
/// Accepted steps keep the dense `y''` within this many local tolerances
/// of the equation at the step midpoint.
const DENSE_SLACK: f64 = 5.0;

fn make_node(sys: &dyn SecondOrderSystem, t: f64, v: f64, dv: f64) -> Node {
    let d2v = sys.accel(t, v, dv);
    Node {
        t,
        v,
        dv,
        d2v,
        d3v: sys.jerk(t, v, dv, d2v),
    }
}

/// Integrates from `(x0, y0, dy0)` to `x_end` (either direction).
pub fn propagate(
    sys: &dyn SecondOrderSystem,
    x0: f64,
    y0: f64,
    dy0: f64,
    x_end: f64,
    ctl: &StepControls,
) -> Result<Path> {
    let singular = sys.nonlinearity().is_singular();
    let dir = (x_end - x0).signum();
    let span = (x_end - x0).abs();
    let mut path = Path {
        nodes: vec![make_node(sys, x0, y0, dy0)],
        crossings: Vec::new(),
        zeros: Vec::new(),
        extrema: Vec::new(),
        blew_up: false,
    };
    if span == 0.0 {
        return Ok(path);
    }
    let (mut x, mut y, mut dy) = (x0, y0, dy0);
    let mut h = ctl.h_init.unwrap_or(0.01 * span).min(span);
    let window_cap = 1e-4 * span;
    let mut last_extremum_abs = 0.0_f64;

    loop {
        let remaining = (x_end - x) * dir;
        if remaining <= 0.0 {
            break;
        }
        if singular {
            let eta = 1e-8 * last_extremum_abs.max(1.0);
            if y.abs() < eta && dy.abs() < eta {
                return Err(Error::Tangency { t: x, v: y.abs(), dv: dy.abs() });
            }
            let heading_in = y * dy * dir < 0.0;
            if y == 0.0 || heading_in {
                let tau = if y == 0.0 { 0.0 } else { (y / dy).abs() };
                let tol = 0.1 * (ctl.atol + ctl.rtol * dy.abs());
                let probe = CrossingModel::new(sys, x + dir * tau, dy);
                let d = probe.window(sys, tol, window_cap);
                if tau <= d {
                    let model = if y == 0.0 {
                        probe
                    } else {
                        fit(sys, x, y, dy).ok_or_else(|| Error::Integration {
                            t: x,
                            reason: "crossing fit failed".into(),
                        })?
                    };
                    let tz = model.xz;
                    let d = model.window(sys, tol, window_cap);
                    let (target, interior) = if (tz - x_end) * dir >= 0.0 {
                        (x_end, false)
                    } else {
                        (tz + dir * d.min((x_end - tz) * dir), y != 0.0)
                    };
                    if interior {
                        path.zeros.push(ZeroCrossing {
                            t: tz,
                            slope: model.slope,
                        });
                        if path.zeros.len() > ctl.max_zeros {
                            return Err(Error::TooManyZeros {
                                max: ctl.max_zeros,
                                t: tz,
                            });
                        }
                    }
                    let (ny, ndy, _) = model.eval(target);
                    path.nodes.push(make_node(sys, target, ny, ndy));
                    path.crossings.push(Some(model));
                    x = target;
                    y = ny;
                    dy = ndy;
                    h = h.max(2.0 * d);
                    continue;
                }
                h = h.min(tau - 0.5 * d);
            }
        }
        h = h.min(remaining);
        // Relative to the current abscissa: the startup endpoint can sit far
        // below the span.
        let min_step = 1e-15 * x.abs().max(span * 1e-300);
        if h < min_step && h < remaining {
            return Err(Error::Integration {
                t: x,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
        let xn = if h >= remaining { x_end } else { x + dir * h };
        // The representable increment, so the node sits where the step ended.
        let Some(st) = dopri::step(sys, x, y, dy, xn - x, ctl.rtol, ctl.atol) else {
            h *= 0.25;
            continue;
        };
        if singular && (st.y == 0.0 || st.y.signum() != y.signum()) && y != 0.0 {
            h *= 0.5;
            continue;
        }
        if st.err > 1.0 {
            h *= dopri::factor(st.err);
            continue;
        }
        let node = make_node(sys, xn, st.y, st.dy);
        let prev = *path.nodes.last().expect("nonempty");
        let xm = 0.5 * (x + xn);
        let (ym, dym, d2ym) = dense_regular(&prev, &node, xm);
        let exact = sys.accel(xm, ym, dym);
        let unit = dense_unit(&prev, &node, xm, ym, dym, exact, ctl.atol, ctl.rtol);
        let res = (d2ym - exact).abs();
        if !(res <= unit) {
            h *= (0.9 * (unit / res).powf(1.0 / 6.0)).clamp(0.2, 0.9);
            continue;
        }
        path.nodes.push(node);
        path.crossings.push(None);

        if prev.dv * node.dv < 0.0 || (node.dv == 0.0 && prev.dv != 0.0) {
            let tm = brent(|t| dense_regular(&prev, &node, t).1, prev.t, node.t, EVENT_XTOL)
                .unwrap_or(node.t);
            let vm = dense_regular(&prev, &node, tm).0;
            last_extremum_abs = vm.abs();
            path.extrema.push(Extremum { t: tm, v: vm });
        }
        if !singular && prev.v * node.v < 0.0 {
            let tz = brent(|t| dense_regular(&prev, &node, t).0, prev.t, node.t, EVENT_XTOL)
                .unwrap_or(node.t);
            path.zeros.push(ZeroCrossing {
                t: tz,
                slope: dense_regular(&prev, &node, tz).1,
            });
            if path.zeros.len() > ctl.max_zeros {
                return Err(Error::TooManyZeros {
                    max: ctl.max_zeros,
                    t: tz,
                });
            }
        }
        x = xn;
        y = st.y;
        dy = st.dy;
        if y.abs() > ctl.blowup {
            path.blew_up = true;
            break;
        }
        h *= dopri::factor(st.err);
    }
    Ok(path)
}

/// Admissible `|y'' - accel|` at a dense midpoint: local tolerances plus the
/// change of `y''` over a few ulps of the abscissa and the cancellation in
/// the interpolant's second derivative.
#[allow(clippy::too_many_arguments)]
pub(crate) fn dense_unit(a: &Node, b: &Node, xm: f64, ym: f64, dym: f64, accel: f64, atol: f64, rtol: f64) -> f64 {
    let h = (b.t - a.t).abs();
    let cancel = a.v.abs().max(b.v.abs()) / (h * h) + a.dv.abs().max(b.dv.abs()) / h;
    let rounding = 64.0 * f64::EPSILON * (xm.abs() * a.d3v.abs().max(b.d3v.abs()) + cancel);
    DENSE_SLACK * (atol + rtol * ym.abs().max(dym.abs())) * accel.abs().max(1.0) + rounding
}

/// A segment heading into a zero at (or just past) its far end, as written
/// by a crossing step stopped at the integration end: the fitted expansion
/// must reproduce the far node.
fn terminal_crossing(sys: &dyn SecondOrderSystem, prev: &Node, node: &Node) -> Option<CrossingModel> {
    let h = node.t - prev.t;
    if prev.v == 0.0 || prev.v * prev.dv * h.signum() >= 0.0 {
        return None;
    }
    let m = fit(sys, prev.t, prev.v, prev.dv)?;
    if (m.xz - prev.t) / h > 2.0 {
        return None;
    }
    let (y, dy, _) = m.eval(node.t);
    let tol = 1e-8 * prev.dv.abs().max(node.dv.abs());
    ((y - node.v).abs() <= tol * h.abs() && (dy - node.dv).abs() <= tol).then_some(m)
}

fn dense_regular(a: &Node, b: &Node, t: f64) -> (f64, f64, f64) {
    let h = b.t - a.t;
    hermite::eval(&a.jet(), &b.jet(), h, (t - a.t) / h)
}

impl Path {
    /// Rebuilds a dense path from ordered samples `(t, v, v')`, bridging
    /// sign changes of a singular `f` with fitted crossing expansions.
    pub fn from_samples(sys: &dyn SecondOrderSystem, samples: &[(f64, f64, f64)]) -> Result<Path> {
        if samples.is_empty() {
            return Err(Error::Domain("no samples".into()));
        }
        let singular = sys.nonlinearity().is_singular();
        let mut path = Path {
            nodes: Vec::with_capacity(samples.len()),
            crossings: Vec::with_capacity(samples.len()),
            zeros: Vec::new(),
            extrema: Vec::new(),
            blew_up: false,
        };
        for (i, &(t, v, dv)) in samples.iter().enumerate() {
            if i > 0 && !(t > samples[i - 1].0) {
                return Err(Error::Domain(format!("sample abscissae must increase (row {i})")));
            }
            path.nodes.push(make_node(sys, t, v, dv));
        }
        for i in 0..path.nodes.len().saturating_sub(1) {
            let (prev, node) = (path.nodes[i], path.nodes[i + 1]);
            let sign_change = prev.v * node.v < 0.0 || (prev.v == 0.0) != (node.v == 0.0);
            let terminal = if singular && !sign_change { terminal_crossing(sys, &prev, &node) } else { None };
            if singular && (sign_change || terminal.is_some()) {
                let model = match terminal {
                    Some(m) => m,
                    None if prev.v == 0.0 => CrossingModel::new(sys, prev.t, prev.dv),
                    None => fit(sys, prev.t, prev.v, prev.dv).ok_or_else(|| Error::Integration {
                        t: prev.t,
                        reason: "crossing fit failed".into(),
                    })?,
                };
                if model.xz > prev.t && model.xz < node.t {
                    path.zeros.push(ZeroCrossing {
                        t: model.xz,
                        slope: model.slope,
                    });
                }
                path.crossings.push(Some(model));
                continue;
            }
            path.crossings.push(None);
            if prev.dv * node.dv < 0.0 {
                let tm = brent(|t| dense_regular(&prev, &node, t).1, prev.t, node.t, EVENT_XTOL)
                    .unwrap_or(node.t);
                path.extrema.push(Extremum {
                    t: tm,
                    v: dense_regular(&prev, &node, tm).0,
                });
            }
            if !singular && prev.v * node.v < 0.0 {
                let tz = brent(|t| dense_regular(&prev, &node, t).0, prev.t, node.t, EVENT_XTOL)
                    .unwrap_or(node.t);
                path.zeros.push(ZeroCrossing {
                    t: tz,
                    slope: dense_regular(&prev, &node, tz).1,
                });
            }
        }
        Ok(path)
    }

    pub fn start(&self) -> f64 {
        self.nodes[0].t
    }

    pub fn end(&self) -> f64 {
        self.nodes.last().expect("nonempty").t
    }

    fn ascending(&self) -> bool {
        self.end() >= self.start()
    }

    /// Index of the segment containing `t`.
    pub fn segment(&self, t: f64) -> usize {
        let n = self.nodes.len();
        if n < 2 {
            return 0;
        }
        let asc = self.ascending();
        let idx = self.nodes.partition_point(|nd| if asc { nd.t <= t } else { nd.t >= t });
        idx.clamp(1, n - 1) - 1
    }

    /// Dense `(y, y', y'')` at `t` inside the covered range.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        if self.nodes.len() < 2 {
            let n = self.nodes[0];
            return (n.v, n.dv, n.d2v);
        }
        let i = self.segment(t);
        match &self.crossings[i] {
            Some(m) => m.eval(t),
            None => dense_regular(&self.nodes[i], &self.nodes[i + 1], t),
        }
    }

    pub fn max_abs_v(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.v.abs())
            .chain(self.extrema.iter().map(|e| e.v.abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_dv(&self) -> f64 {
        self.nodes.iter().map(|n| n.dv.abs()).fold(0.0, f64::max)
    }
}
