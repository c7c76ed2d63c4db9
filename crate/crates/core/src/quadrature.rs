//! Quadrature for integrands with integrable endpoint singularities of the
//! form `|x - c|^{-q}`, `0 < q < 1`.

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }
}

/// Which ends of an interval carry a singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ends {
    None,
    Left,
    Right,
    Both,
}

const GRADE_RATIO: f64 = 0.2;
const GRADE_LEVELS: usize = 60;
/// Power of the substitution `x = c + w·s^m` on the panel touching a
/// singular end.
const END_POWER: i32 = 32;

/// Composite Gauss on panels shrinking geometrically (ratio 0.2) toward each
/// singular end, plus `uniform` equal panels in the bulk.
pub fn graded_gauss(
    rule: &GaussRule,
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    ends: Ends,
    uniform: usize,
) -> f64 {
    if b == a {
        return 0.0;
    }
    let mut cuts = graded_cuts(a, b, ends, uniform);
    cuts.dedup();
    let last = cuts.len() - 2;
    let left = matches!(ends, Ends::Left | Ends::Both);
    let right = matches!(ends, Ends::Right | Ends::Both);
    cuts.windows(2)
        .enumerate()
        .map(|(i, w)| {
            let m = END_POWER as f64;
            let mut mapped = |c: f64, len: f64| {
                let mut g = |s: f64| {
                    let x = c + len * s.powi(END_POWER);
                    if x == c {
                        0.0
                    } else {
                        len * m * s.powi(END_POWER - 1) * f(x)
                    }
                };
                rule.integrate(&mut g, 0.0, 1.0)
            };
            if i == 0 && left {
                mapped(w[0], w[1] - w[0])
            } else if i == last && right {
                -mapped(w[1], w[0] - w[1])
            } else {
                rule.integrate(f, w[0], w[1])
            }
        })
        .sum()
}

fn graded_cuts(a: f64, b: f64, ends: Ends, uniform: usize) -> Vec<f64> {
    let len = b - a;
    let (left, right) = match ends {
        Ends::None => (false, false),
        Ends::Left => (true, false),
        Ends::Right => (false, true),
        Ends::Both => (true, true),
    };
    // Bulk fraction reserved for geometric grading at each singular end.
    let edge = if left && right { 0.25 } else { 0.5 };
    let mut cuts = Vec::with_capacity(2 * GRADE_LEVELS + uniform + 2);
    let lo = if left { a + edge * len } else { a };
    let hi = if right { b - edge * len } else { b };
    // Panels narrower than a few ulp of the endpoint cannot be resolved.
    let resolvable = |end: f64, w: f64| w > 16.0 * f64::EPSILON * end.abs();
    if left {
        cuts.push(a);
        for k in (0..GRADE_LEVELS).rev() {
            let w = edge * len * GRADE_RATIO.powi(k as i32);
            if resolvable(a, w) {
                cuts.push(a + w);
            }
        }
    }
    let m = uniform.max(1);
    for k in 0..=m {
        cuts.push(lo + (hi - lo) * k as f64 / m as f64);
    }
    if right {
        for k in 1..GRADE_LEVELS {
            let w = edge * len * GRADE_RATIO.powi(k as i32);
            if resolvable(b, w) {
                cuts.push(b - w);
            }
        }
        cuts.push(b);
    }
    cuts
}

/// Trapezoid rule on the algebraically graded mesh `x_k = a + L (k/n)^m`
/// (mirrored when the singularity sits at `b`). The panel touching the
/// singular end uses its midpoint so the singular value is never sampled.
pub fn graded_trapezoid(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    singular_at_left: bool,
    n: usize,
    grading: f64,
) -> f64 {
    let len = b - a;
    let map = |s: f64| {
        if singular_at_left {
            a + len * s.powf(grading)
        } else {
            b - len * s.powf(grading)
        }
    };
    let xs: Vec<f64> = (0..=n).map(|k| map(k as f64 / n as f64)).collect();
    let mut sum = 0.0;
    let mut prev_f = f64::NAN;
    for k in 0..n {
        let (x0, x1) = (xs[k], xs[k + 1]);
        let width = (x1 - x0).abs();
        if k == 0 {
            sum += width * f(0.5 * (x0 + x1));
            prev_f = f(x1);
        } else {
            let f1 = f(x1);
            sum += 0.5 * width * (prev_f + f1);
            prev_f = f1;
        }
    }
    sum
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod 7/15 with interval bisection.
pub fn adaptive(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || parts.len() >= max_intervals {
            return (total, err);
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            let total: f64 = parts.iter().map(|p| p.2).sum::<f64>() + gk15(f, lo, hi).0;
            return (total, err);
        }
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}
