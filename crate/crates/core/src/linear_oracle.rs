//! Closed-form solutions of the linear comparison equation
//! `y'' + y / t^{2-δ} = 0`, `y(0) = 0`, `y'(0) = 1`.
//!
//! For `δ > 0` the solution is `y(t) = A·t^{1/2}·J_{1/δ}((2/δ) t^{δ/2})` with
//! `A = δ^{1/δ} Γ(1/δ + 1)`. Expanding the Bessel series gives the equivalent
//! normalized form
//!
//! ```text
//! y(t) = t · Σₘ cₘ,   c₀ = 1,   cₘ = -cₘ₋₁ · t^δ / (δ² m (m + 1/δ)),
//! ```
//!
//! which is what [`linear_solution`] sums. [`bessel_j`] evaluates `J_ν`
//! directly so the two routes can be checked against each other.

use crate::error::{Error, Result};

/// Largest Bessel argument the ascending series is trusted for.
pub const SERIES_MAX_ARG: f64 = 30.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) by the Lanczos approximation (g = 7, 9 terms) with reflection for
/// `x < 1/2`.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// `J_ν(x)` from the ascending power series.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::Oracle(format!("order must be positive, got {nu}")));
    }
    if !(0.0..=SERIES_MAX_ARG).contains(&x) {
        return Err(Error::Oracle(format!(
            "argument {x} outside the series range [0, {SERIES_MAX_ARG}]"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let half = 0.5 * x;
    let mut term = half.powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    let z = -half * half;
    for m in 1..500 {
        let mf = m as f64;
        term *= z / (mf * (nu + mf));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    Ok(sum)
}

/// `A = δ^{1/δ} Γ(1/δ + 1)`, the normalization giving `y'(0) = 1`.
pub fn normalization(delta: f64) -> f64 {
    let nu = 1.0 / delta;
    delta.powf(nu) * gamma(nu + 1.0)
}

/// `(y(t), y'(t))` for the normalized linear solution.
pub fn linear_solution(delta: f64, t: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::Oracle(format!("delta must lie in (0, 2), got {delta}")));
    }
    if t < 0.0 {
        return Err(Error::Oracle(format!("t must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok((0.0, 1.0));
    }
    let arg = 2.0 / delta * t.powf(0.5 * delta);
    if arg > SERIES_MAX_ARG {
        return Err(Error::Oracle(format!("t = {t} exceeds the series range")));
    }
    let nu = 1.0 / delta;
    let z = -t.powf(delta) / (delta * delta);
    let (mut c, mut y, mut dy) = (1.0_f64, 1.0_f64, 1.0_f64);
    for m in 1..500 {
        let mf = m as f64;
        c *= z / (mf * (mf + nu));
        y += c;
        dy += c * (1.0 + mf * delta);
        if c.abs() * (1.0 + mf * delta) < 1e-17 * y.abs().max(dy.abs()) {
            break;
        }
    }
    Ok((t * y, dy))
}

/// `y''` from the equation itself.
pub fn linear_second_derivative(delta: f64, t: f64, y: f64) -> f64 {
    -y * t.powf(delta - 2.0)
}

fn bisect(g: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut glo = g(lo)?;
    let ghi = g(hi)?;
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo.signum() == ghi.signum() {
        return Err(Error::Oracle(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// First positive zero `j_{ν,1}` of `J_ν`, bracketed by
/// `ν + 1 ≤ j_{ν,1} ≤ ν + 2ν^{1/3} + 3`.
pub fn first_bessel_zero(nu: f64) -> Result<f64> {
    let lo = nu + 1.0;
    let hi = nu + 2.0 * nu.cbrt() + 3.0;
    bisect(|x| bessel_j(nu, x), lo, hi)
}

/// Maps a Bessel-argument zero `j` to the `t` where `y` vanishes.
pub fn t_of_bessel_arg(delta: f64, j: f64) -> f64 {
    (0.5 * delta * j).powf(2.0 / delta)
}

/// First positive zero `t* = (δ j_{1/δ,1} / 2)^{2/δ}` of the linear solution.
pub fn first_zero(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::Oracle(format!("delta must lie in (0, 2), got {delta}")));
    }
    Ok(t_of_bessel_arg(delta, first_bessel_zero(1.0 / delta)?))
}

/// All zeros of the linear solution on `(0, t_max]`, located by a sign scan
/// of the series followed by bisection.
pub fn zeros(delta: f64, t_max: f64) -> Result<Vec<f64>> {
    const SCAN: usize = 4000;
    let y = |t: f64| linear_solution(delta, t).map(|p| p.0);
    let mut out = Vec::new();
    let mut prev_t = t_max / SCAN as f64;
    let mut prev = y(prev_t)?;
    for i in 2..=SCAN {
        let t = t_max * i as f64 / SCAN as f64;
        let cur = y(t)?;
        if cur == 0.0 || cur.signum() != prev.signum() {
            out.push(bisect(y, prev_t, t)?);
        }
        prev = cur;
        prev_t = t;
    }
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    Ok(out)
}

/// General solution `c₁√t cos(ω ln t) + c₂√t sin(ω ln t)`, `ω = √3/2`, of the
/// borderline equation `v'' + v/t² = 0`, with its first two derivatives.
pub fn delta_zero_solution(t: f64, c1: f64, c2: f64) -> Result<(f64, f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be > 0, got {t}")));
    }
    let w = 0.5 * 3f64.sqrt();
    let (s, c) = (w * t.ln()).sin_cos();
    let rt = t.sqrt();
    let v = rt * (c1 * c + c2 * s);
    // d/dt [√t·cos] = (cos/2 − ω sin)/√t, d/dt [√t·sin] = (sin/2 + ω cos)/√t
    let dv = (c1 * (0.5 * c - w * s) + c2 * (0.5 * s + w * c)) / rt;
    Ok((v, dv, -v / (t * t)))
}

/// Zeros `exp((π/2 + kπ)/ω)` of `√t cos(ω ln t)` inside `[lo, hi]`.
pub fn delta_zero_cos_zeros(lo: f64, hi: f64) -> Vec<f64> {
    let w = 0.5 * 3f64.sqrt();
    let kmin = ((lo.ln() * w - std::f64::consts::FRAC_PI_2) / std::f64::consts::PI).floor() as i64;
    let kmax = ((hi.ln() * w - std::f64::consts::FRAC_PI_2) / std::f64::consts::PI).ceil() as i64;
    (kmin..=kmax)
        .map(|k| ((std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::PI) / w).exp())
        .filter(|t| *t >= lo && *t <= hi)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num::{BigInt, BigRational, ToPrimitive};

    /// J₁(2) = Σ (-1)^m / (m!(m+1)!) summed exactly in rationals.
    fn j1_of_2_exact() -> f64 {
        let mut sum = BigRational::from_integer(BigInt::from(0));
        let mut fact_m = BigInt::from(1);
        for m in 0..40u32 {
            if m > 0 {
                fact_m *= BigInt::from(m);
            }
            let denom = &fact_m * &fact_m * BigInt::from(m + 1);
            let term = BigRational::new(BigInt::from(if m % 2 == 0 { 1 } else { -1 }), denom);
            sum += term;
        }
        sum.to_f64().unwrap()
    }

    #[test]
    fn gamma_known_values() {
        assert_relative_eq!(gamma(1.0), 1.0, max_relative = 1e-13);
        assert_relative_eq!(gamma(5.0), 24.0, max_relative = 1e-13);
        assert_relative_eq!(gamma(0.5), std::f64::consts::PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(2.5), 0.75 * std::f64::consts::PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(11.0), 3_628_800.0, max_relative = 1e-13);
    }

    #[test]
    fn bessel_examples() {
        assert_eq!(bessel_j(1.0, 0.0).unwrap(), 0.0);
        let exact = j1_of_2_exact();
        assert_relative_eq!(exact, 0.5767248078, max_relative = 1e-10);
        assert_relative_eq!(bessel_j(1.0, 2.0).unwrap(), exact, max_relative = 1e-13);
        let x = std::f64::consts::FRAC_PI_2;
        assert_relative_eq!(
            bessel_j(0.5, x).unwrap(),
            2.0 / std::f64::consts::PI,
            max_relative = 1e-13
        );
        for x in [0.3, 1.7, 4.2, 9.5] {
            let closed = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sin();
            assert_relative_eq!(bessel_j(0.5, x).unwrap(), closed, max_relative = 1e-11);
        }
        assert!(bessel_j(1.0, 31.0).is_err());
        assert!(bessel_j(0.0, 1.0).is_err());
    }

    #[test]
    fn series_routes_agree() {
        for delta in [0.5, 2.0 / 3.0, 1.0, 1.5] {
            let nu = 1.0 / delta;
            let a = normalization(delta);
            for t in [1e-4_f64, 0.01, 0.3, 1.0, 2.5, 6.0] {
                let arg = 2.0 / delta * t.powf(delta / 2.0);
                let via_j = a * t.sqrt() * bessel_j(nu, arg).unwrap();
                let (y, _) = linear_solution(delta, t).unwrap();
                assert_relative_eq!(y, via_j, max_relative = 1e-11, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn linear_solution_examples() {
        let (y, _) = linear_solution(1.0, 1.0).unwrap();
        assert_relative_eq!(normalization(1.0), 1.0, max_relative = 1e-13);
        assert_relative_eq!(y, j1_of_2_exact(), max_relative = 1e-14);
        for delta in [0.3, 0.5, 1.0, 1.5, 1.9] {
            let t: f64 = 1e-6;
            let c1 = -t.powf(delta) / (delta * (delta + 1.0));
            let (y, dy) = linear_solution(delta, t).unwrap();
            // Next series term is bounded by c1².
            assert!((y / t - 1.0 - c1).abs() <= c1 * c1 + 1e-15);
            assert!((dy - 1.0 - (1.0 + delta) * c1).abs() <= 3.0 * c1 * c1 + 1e-15);
        }
    }

    #[test]
    fn concavity_bound_before_first_zero() {
        for delta in [0.5, 1.0, 1.5] {
            let tz = first_zero(delta).unwrap();
            let t1 = 0.95 * tz;
            for i in 1..=200 {
                let t = t1 * i as f64 / 200.0;
                let (y, _) = linear_solution(delta, t).unwrap();
                assert!(y >= 0.0 && y <= t * (1.0 + 1e-15), "delta {delta} t {t} y {y}");
            }
            // C_y t ≤ y with C_y = y(t1)/t1 since y/t decreases (y concave).
            let cy = linear_solution(delta, t1).unwrap().0 / t1;
            assert!(cy > 0.0);
            for i in 1..=200 {
                let t = t1 * i as f64 / 200.0;
                assert!(linear_solution(delta, t).unwrap().0 >= cy * t * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn derivative_and_residual() {
        for delta in [0.5, 1.0, 1.5] {
            for t in [1e-3, 0.05, 0.7, 3.0, 10.0] {
                let h = 1e-5 * t;
                let yp = linear_solution(delta, t + h).unwrap();
                let ym = linear_solution(delta, t - h).unwrap();
                let (y, dy) = linear_solution(delta, t).unwrap();
                assert_relative_eq!((yp.0 - ym.0) / (2.0 * h), dy, max_relative = 1e-7, epsilon = 1e-9);
                let d2 = (yp.1 - ym.1) / (2.0 * h);
                let rhs = linear_second_derivative(delta, t, y);
                assert!((d2 - rhs).abs() < 1e-6 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn first_zero_examples() {
        let j11 = first_bessel_zero(1.0).unwrap();
        assert_relative_eq!(j11, 3.8317059702, max_relative = 1e-10);
        assert_relative_eq!(first_zero(1.0).unwrap(), (j11 / 2.0).powi(2), max_relative = 1e-14);
        assert_relative_eq!(first_zero(1.0).unwrap(), 3.6704926605, max_relative = 1e-10);

        // ν = 3/2: J_{3/2} ∝ sin x / x − cos x, zero where tan x = x.
        let j = first_bessel_zero(1.5).unwrap();
        let mut x = 4.5_f64;
        for _ in 0..50 {
            x -= (x.tan() - x) / (1.0 / x.cos().powi(2) - 1.0);
        }
        assert_relative_eq!(j, x, max_relative = 1e-12);
        assert_relative_eq!(j, 4.493409, max_relative = 1e-6);
        assert_relative_eq!(first_zero(2.0 / 3.0).unwrap(), (2.0 / 3.0 * x / 2.0).powi(3), max_relative = 1e-11);

        for delta in [0.5, 1.0, 1.5] {
            let tz = first_zero(delta).unwrap();
            assert!(linear_solution(delta, tz).unwrap().0.abs() < 1e-10);
        }
    }

    #[test]
    fn zero_list_matches_bessel_zeros() {
        let z = zeros(1.0, 25.0).unwrap();
        assert_eq!(z.len(), 2);
        assert_relative_eq!(z[0], (3.8317059702f64 / 2.0).powi(2), max_relative = 1e-9);
        assert_relative_eq!(z[1], (7.0155866698f64 / 2.0).powi(2), max_relative = 1e-9);
        let z30 = zeros(1.0, 30.0).unwrap();
        assert_eq!(z30.len(), 3);
        assert_relative_eq!(z30[2], (10.1734681351f64 / 2.0).powi(2), max_relative = 1e-9);
    }

    #[test]
    fn delta_zero_examples() {
        assert_eq!(delta_zero_solution(1.0, 1.0, 0.0).unwrap().0, 1.0);
        assert!(delta_zero_solution(0.0, 1.0, 0.0).is_err());
        let zs = delta_zero_cos_zeros(0.01, 100.0);
        let w = 0.5 * 3f64.sqrt();
        assert!(zs.iter().any(|t| (t - (std::f64::consts::FRAC_PI_2 / w).exp()).abs() < 1e-12));
        for t in &zs {
            assert!(delta_zero_solution(*t, 1.0, 0.0).unwrap().0.abs() < 1e-12 * t.sqrt());
        }
        for i in 0..50 {
            let t = 0.1 * (100f64).powf(i as f64 / 49.0);
            let h = 1e-4 * t;
            let (v, dv, d2v) = delta_zero_solution(t, 0.7, -1.3).unwrap();
            let vp = delta_zero_solution(t + h, 0.7, -1.3).unwrap();
            let vm = delta_zero_solution(t - h, 0.7, -1.3).unwrap();
            assert_relative_eq!((vp.0 - vm.0) / (2.0 * h), dv, max_relative = 1e-6, epsilon = 1e-8);
            assert_relative_eq!((vp.1 - vm.1) / (2.0 * h), d2v, max_relative = 1e-6, epsilon = 1e-8);
            assert!((d2v + v / (t * t)).abs() < 1e-12 * (1.0 + d2v.abs()));
        }
    }
}
