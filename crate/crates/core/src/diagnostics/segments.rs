//! Quadrature over ranges containing zeros of `v`, where `|v|^{-q}`
//! integrands have integrable endpoint singularities.

use crate::quadrature::{graded_gauss, Ends, GaussRule};

const PANELS: usize = 8;
/// Largest ratio `hi/lo` of a sub-piece on a positive axis.
const MAX_RATIO: f64 = 2.0;

/// `∫_lo^hi f`, split at `breaks` (sorted), each break treated as a possible
/// singular endpoint. Pieces on the positive axis are further cut into
/// geometric sub-pieces so wide logarithmic ranges are resolved.
pub(crate) fn integrate_split(
    rule: &GaussRule,
    f: &mut impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    breaks: &[f64],
) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let mut cuts = vec![(lo, false)];
    cuts.extend(breaks.iter().filter(|&&z| z > lo && z < hi).map(|&z| (z, true)));
    cuts.push((hi, false));
    let lo_singular = breaks.contains(&lo);
    let hi_singular = breaks.contains(&hi);
    cuts[0].1 = lo_singular;
    let last = cuts.len() - 1;
    cuts[last].1 = hi_singular;
    cuts.windows(2)
        .map(|w| integrate_piece(rule, f, w[0], w[1]))
        .sum()
}

fn integrate_piece(
    rule: &GaussRule,
    f: &mut impl FnMut(f64) -> f64,
    (a, sing_a): (f64, bool),
    (b, sing_b): (f64, bool),
) -> f64 {
    let mut cuts = vec![a];
    if a > 0.0 && b / a > MAX_RATIO {
        let k = ((b / a).ln() / MAX_RATIO.ln()).ceil() as usize;
        let r = (b / a).powf(1.0 / k as f64);
        for i in 1..k {
            cuts.push(a * r.powi(i as i32));
        }
    }
    cuts.push(b);
    let n = cuts.len() - 1;
    (0..n)
        .map(|i| {
            let ends = match (i == 0 && sing_a, i == n - 1 && sing_b) {
                (true, true) => Ends::Both,
                (true, false) => Ends::Left,
                (false, true) => Ends::Right,
                (false, false) => Ends::None,
            };
            graded_gauss(rule, f, cuts[i], cuts[i + 1], ends, PANELS)
        })
        .sum()
}
