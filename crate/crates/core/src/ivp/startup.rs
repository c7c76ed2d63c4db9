//! Fixed-point startup on `[0, ε]` for `w = v/t`:
//!
//! ```text
//! Tw(t) = a - (1/t) ∫₀ᵗ (t - x) Φ(x) dx,
//! Φ = h g₁(xw) - h c₋ (xw)^{-q} + x^{δ-1} w,
//! ```
//!
//! discretized by product integration on a geometric mesh: each of the three
//! terms is `x^μ · A(x)` with `A` smooth, `A` is interpolated linearly and the
//! weights `x^μ (t - x)` are integrated exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::transform::TransformedProblem;

const MESH_POINTS: usize = 1900;
const MESH_RATIO: f64 = 1.02;
const MAX_HALVINGS: usize = 60;
const MAX_ITERATIONS: usize = 500;
const TARGET_CONTRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Startup {
    pub a: f64,
    pub eps: f64,
    pub v_eps: f64,
    pub dv_eps: f64,
    pub contraction: f64,
    pub iterations: usize,
    /// Mesh `0 = x₀ < x₁ < … < x_M = ε`.
    pub mesh: Vec<f64>,
    /// Fixed point `w` on the mesh.
    pub w: Vec<f64>,
    #[serde(skip)]
    exps: [f64; 3],
    #[serde(skip)]
    amps: Vec<[f64; 3]>,
}

/// `C_ε` bound for the contraction constant of `T` on the ball `|w - a| ≤ a/2`.
pub fn contraction_bound(tp: &TransformedProblem, nl: &dyn Nonlinearity, a: f64, eps: f64) -> f64 {
    let q = nl.singular_exponent();
    let at = tp.tilde_alpha;
    let h1 = tp.h_coeff;
    let d = tp.delta;
    let c3 = nl.singular_coefficient() * 2f64.powf(q + 1.0) * q * h1
        / ((1.0 - at - q) * (2.0 - at - q) * a.powf(q + 1.0));
    let l1 = nl.regular_lipschitz(1.5 * a * eps);
    let c4 = l1 * h1 / ((2.0 - at) * (3.0 - at));
    c3 * eps.powf(1.0 - (at + q)) + c4 * eps.powf(2.0 - at) + eps.powf(d) / (d * (d + 1.0))
}

/// Runs the startup from the initial `eps`, halving it until the contraction
/// bound drops below `1/2`.
pub fn picard_startup(
    tp: &TransformedProblem,
    nl: &dyn Nonlinearity,
    a: f64,
    eps: f64,
) -> Result<Startup> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Startup(format!("slope a must be positive, got {a}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Startup(format!("eps must be positive, got {eps}")));
    }
    if !(tp.delta > 0.0) {
        return Err(Error::Startup("startup requires delta > 0".into()));
    }
    if nl.is_singular() && !tp.startup_admissible(nl.singular_exponent()) {
        return Err(Error::Startup(format!(
            "tilde_alpha + q = {} outside (0, 1)",
            tp.tilde_alpha + nl.singular_exponent()
        )));
    }
    let mut eps = eps;
    let mut c = contraction_bound(tp, nl, a, eps);
    let mut halvings = 0;
    while !(c < TARGET_CONTRACTION) {
        if halvings == MAX_HALVINGS {
            return Err(Error::Startup(format!(
                "no contraction after {MAX_HALVINGS} halvings of eps (C_eps = {c:e} at eps = {eps:e})"
            )));
        }
        eps *= 0.5;
        halvings += 1;
        c = contraction_bound(tp, nl, a, eps);
    }
    iterate(tp, nl, a, eps, c)
}

fn geometric_mesh(eps: f64) -> Vec<f64> {
    let mut mesh = Vec::with_capacity(MESH_POINTS + 1);
    mesh.push(0.0);
    for k in 0..MESH_POINTS {
        mesh.push(eps * MESH_RATIO.powi(k as i32 + 1 - MESH_POINTS as i32));
    }
    *mesh.last_mut().expect("nonempty") = eps;
    mesh
}

fn amplitudes(tp: &TransformedProblem, nl: &dyn Nonlinearity, x: f64, w: f64) -> [f64; 3] {
    let h1 = tp.h_coeff;
    let q = nl.singular_exponent();
    let g = nl.regular(x * w);
    [
        h1 * g,
        -h1 * nl.singular_coefficient() * w.powf(-q),
        w,
    ]
}

/// `(∫_lo^hi x^μ (α + βx) dx, ∫_lo^hi x^μ (t - x)(α + βx) dx)`.
fn product_weights(mu: f64, lo: f64, hi: f64, alpha: f64, beta: f64, t: f64) -> (f64, f64) {
    let m = |j: f64| {
        let e = mu + j + 1.0;
        (hi.powf(e) - lo.powf(e)) / e
    };
    let (m0, m1, m2) = (m(0.0), m(1.0), m(2.0));
    (alpha * m0 + beta * m1, alpha * t * m0 + (beta * t - alpha) * m1 - beta * m2)
}

impl Startup {
    /// Per term `k` of `Φ`: `(∫₀ᵗ Φ_k, ∫₀ᵗ (t - x) Φ_k)` for `t ∈ [0, ε]`.
    pub fn term_integrals(&self, t: f64) -> [(f64, f64); 3] {
        integrals_with(&self.mesh, &self.amps, &self.exps, t)
    }

    /// `(v, v')` on `[0, ε]`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        if t <= 0.0 {
            return (0.0, self.a);
        }
        let parts = self.term_integrals(t);
        let i0: f64 = parts.iter().map(|p| p.0).sum();
        let i1: f64 = parts.iter().map(|p| p.1).sum();
        (self.a * t - i1, self.a - i0)
    }
}

fn integrals_with(mesh: &[f64], amps: &[[f64; 3]], exps: &[f64; 3], t: f64) -> [(f64, f64); 3] {
    let mut out = [(0.0, 0.0); 3];
    for i in 0..mesh.len() - 1 {
        let (lo, hi) = (mesh[i], mesh[i + 1]);
        if lo >= t {
            break;
        }
        let top = hi.min(t);
        for k in 0..3 {
            let slope = (amps[i + 1][k] - amps[i][k]) / (hi - lo);
            let alpha = amps[i][k] - slope * lo;
            let (a0, a1) = product_weights(exps[k], lo, top, alpha, slope, t);
            out[k].0 += a0;
            out[k].1 += a1;
        }
    }
    out
}

fn iterate(
    tp: &TransformedProblem,
    nl: &dyn Nonlinearity,
    a: f64,
    eps: f64,
    contraction: f64,
) -> Result<Startup> {
    let q = nl.singular_exponent();
    let exps = [-tp.tilde_alpha, -tp.tilde_alpha - q, tp.delta - 1.0];
    let mesh = geometric_mesh(eps);
    let mut w = vec![a; mesh.len()];
    let tol = 1e-12 * a.max(1.0);
    // Full-interval moments ∫ x^{μ_k + j}, j = 0, 1, 2.
    let moments: Vec<[[f64; 3]; 3]> = mesh
        .windows(2)
        .map(|iv| {
            let mut m = [[0.0; 3]; 3];
            for (mk, ek) in m.iter_mut().zip(exps) {
                for (j, mkj) in mk.iter_mut().enumerate() {
                    let e = ek + j as f64 + 1.0;
                    *mkj = (iv[1].powf(e) - iv[0].powf(e)) / e;
                }
            }
            m
        })
        .collect();
    for it in 1..=MAX_ITERATIONS {
        let amps: Vec<[f64; 3]> = mesh
            .iter()
            .zip(&w)
            .map(|(&x, &wx)| amplitudes(tp, nl, x, wx))
            .collect();
        let mut next = vec![a; mesh.len()];
        let mut change = 0.0_f64;
        // Running ∫₀ˣ Φ and ∫₀ˣ xΦ, so ∫₀ᵗ (t - x)Φ = t·s0 - s1.
        let (mut s0, mut s1) = (0.0, 0.0);
        for k in 1..mesh.len() {
            let i = k - 1;
            let (lo, hi) = (mesh[i], mesh[k]);
            for term in 0..3 {
                let slope = (amps[k][term] - amps[i][term]) / (hi - lo);
                let alpha = amps[i][term] - slope * lo;
                let m = moments[i][term];
                s0 += alpha * m[0] + slope * m[1];
                s1 += alpha * m[1] + slope * m[2];
            }
            let t = hi;
            next[k] = a - (t * s0 - s1) / t;
            if !((next[k] - a).abs() <= 0.5 * a) {
                return Err(Error::Startup(format!(
                    "iterate left the ball |w - a| <= a/2 at t = {t:e} (w = {})",
                    next[k]
                )));
            }
            change = change.max((next[k] - w[k]).abs());
        }
        w = next;
        if change < tol {
            let amps: Vec<[f64; 3]> = mesh
                .iter()
                .zip(&w)
                .map(|(&x, &wx)| amplitudes(tp, nl, x, wx))
                .collect();
            let mut s = Startup {
                a,
                eps,
                v_eps: 0.0,
                dv_eps: 0.0,
                contraction,
                iterations: it,
                mesh,
                w,
                exps,
                amps,
            };
            let (v, dv) = s.eval(eps);
            s.v_eps = v;
            s.dv_eps = dv;
            return Ok(s);
        }
    }
    Err(Error::Startup(format!(
        "fixed-point iteration did not converge in {MAX_ITERATIONS} sweeps"
    )))
}
