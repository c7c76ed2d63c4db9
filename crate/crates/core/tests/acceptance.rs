//! Acceptance criteria 1-8. Prints one `PASS`/`FAIL` line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nodal_core::diagnostics::{property_suite, nonexistence_probe, ProbeOptions, Status, SuiteOptions};
use nodal_core::ivp::{count_zeros, integrate, propagate, Controls, StepControls, TransformedSystem};
use nodal_core::linear_oracle::{self, delta_zero_solution, linear_solution};
use nodal_core::nonlinearity::{constants_numeric, Linear, NonlinearitySpec};
use nodal_core::shooting::{find_r0, geometric_grid, trend_checks, Shooter, Tolerances};
use nodal_core::transform::{pullback, ProblemParams, TransformedProblem};

const ORACLE_TOL: f64 = 1e-8;
const ORACLE_BUDGET: Duration = Duration::from_secs(5);
const ZERO_TOL: f64 = 1e-8;
const COUNT_T: [f64; 8] = [1.0, 3.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
const BORDERLINE_TOL: f64 = 1e-8;
const R_INIT: f64 = 0.25;
const R0_DOUBLINGS: usize = 8;
const BOUNDARY_TOL: f64 = 1e-8;
const EXISTENCE_BUDGET: Duration = Duration::from_secs(300);
const TREND_POINTS: usize = 30;
const TREND_JITTER: usize = 1;
const PROBE_POINTS: usize = 20;
const PROBE_E_PRIME_TOL: f64 = 1e-6;
const PROBE_BUDGET: Duration = Duration::from_secs(120);

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

impl Line {
    fn print(&self) {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {}: {}", self.id, self.name, self.detail);
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn linear_params(delta: f64) -> ProblemParams {
    ProblemParams {
        delta,
        ..ProblemParams::canonical(1.0)
    }
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut err = None;
    for delta in [0.5, 1.0, 1.5] {
        let tp = linear_params(delta).transformed();
        let run = || -> nodal_core::Result<f64> {
            let z2 = linear_oracle::zeros(delta, 60.0)?[1];
            let hi = tp.t_end.min(0.9 * z2);
            let mut tp = tp;
            tp.t_end = hi;
            let tr = integrate(&tp, &Linear, 1.0, &Controls::default())?;
            let mut w = 0.0_f64;
            for t in geometric_grid(1e-3, hi, 20) {
                let (y, _) = linear_solution(delta, t)?;
                w = w.max((tr.eval(t).0 - y).abs() / y.abs());
            }
            Ok(w)
        };
        match run() {
            Ok(w) => worst = worst.max(w),
            Err(e) => err = Some(format!("delta = {delta}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    Line {
        id: 1,
        name: "linear oracle agreement",
        pass: err.is_none() && worst < ORACLE_TOL && elapsed < ORACLE_BUDGET,
        detail: err.unwrap_or_else(|| {
            format!("max rel err {worst:.3e} (tol {ORACLE_TOL:e}), runtime {}", secs(elapsed))
        }),
    }
}

fn criterion_2() -> Line {
    let run = || -> nodal_core::Result<(f64, Vec<String>)> {
        let j11 = linear_oracle::first_bessel_zero(1.0)?;
        let mut tp = linear_params(1.0).transformed();
        tp.t_end = 5.0;
        let tr = integrate(&tp, &Linear, 1.0, &Controls::default())?;
        let dz = (tr.zeros()[0].t - 0.25 * j11 * j11).abs();
        let mut bad = Vec::new();
        for t_end in COUNT_T {
            tp.t_end = t_end;
            let tr = integrate(&tp, &Linear, 1.0, &Controls::default())?;
            let expected = linear_oracle::zeros(1.0, t_end)?.into_iter().filter(|z| *z < t_end).count();
            let got = count_zeros(&tr);
            if got != expected {
                bad.push(format!("T = {t_end}: {got} zeros, expected {expected}"));
            }
        }
        Ok((dz, bad))
    };
    match run() {
        Ok((dz, bad)) => Line {
            id: 2,
            name: "Bessel zero localization",
            pass: dz < ZERO_TOL && bad.is_empty(),
            detail: format!(
                "|z1 - (j11/2)^2| = {dz:.3e} (tol {ZERO_TOL:e}); counts for T in {COUNT_T:?}: {}",
                if bad.is_empty() { "all match".to_string() } else { bad.join("; ") }
            ),
        },
        Err(e) => Line {
            id: 2,
            name: "Bessel zero localization",
            pass: false,
            detail: e.to_string(),
        },
    }
}

/// Error relative to the envelope `√t`, since the solution has zeros.
fn criterion_3() -> Line {
    let tp = TransformedProblem {
        t_end: 10.0,
        tilde_alpha: 0.0,
        h_coeff: 0.0,
        delta: 0.0,
    };
    let sys = TransformedSystem { tp, nl: &Linear };
    let run = || -> nodal_core::Result<f64> {
        let (v1, dv1, _) = delta_zero_solution(1.0, 1.0, 0.0)?;
        let ctl = StepControls::default();
        let back = propagate(&sys, 1.0, v1, dv1, 0.05, &ctl)?;
        let fwd = propagate(&sys, 1.0, v1, dv1, 10.0, &ctl)?;
        let mut worst = 0.0_f64;
        for t in geometric_grid(0.05, 10.0, 41) {
            let v = if t < 1.0 { back.eval(t).0 } else { fwd.eval(t).0 };
            let exact = delta_zero_solution(t, 1.0, 0.0)?.0;
            worst = worst.max((v - exact).abs() / t.sqrt());
        }
        Ok(worst)
    };
    let (pass, detail) = match run() {
        Ok(w) => (w < BORDERLINE_TOL, format!("max err / sqrt(t) {w:.3e} (tol {BORDERLINE_TOL:e})")),
        Err(e) => (false, e.to_string()),
    };
    Line {
        id: 3,
        name: "delta = 0 borderline",
        pass,
        detail,
    }
}

/// Everything criteria 4-7 produce, plus the bytes compared by criterion 8.
struct Stage {
    lines: Vec<Line>,
    artifacts: BTreeMap<String, Vec<u8>>,
}

fn json(v: &impl serde::Serialize) -> Vec<u8> {
    serde_json::to_vec_pretty(v).expect("serializable")
}

fn stage() -> Stage {
    let nl = NonlinearitySpec::canonical();
    let mut artifacts = BTreeMap::new();
    let mut lines = Vec::new();
    let controls = Controls::default();
    let tol = Tolerances::default();
    let gamma = constants_numeric(&nl).expect("canonical constants").gamma;
    let a_grid = geometric_grid(1.0, 1e4, 41);

    let start = Instant::now();
    let mut solutions = Vec::new();
    let existence = (|| -> nodal_core::Result<(ProblemParams, Vec<String>, bool)> {
        let r0 = find_r0(&ProblemParams::canonical(R_INIT), &nl, &controls, &tol, gamma, &a_grid, R0_DOUBLINGS)?;
        artifacts.insert("r0.json".into(), json(&r0));
        let params = ProblemParams::canonical(r0.r0);
        let shooter = Shooter {
            tp: params.transformed(),
            nl: &nl,
            controls,
            tol,
        };
        let scan = shooter.zero_count_map(&a_grid)?;
        let mut notes = vec![format!("R0 = {}", r0.r0)];
        let mut ok = true;
        let mut prev = 0.0;
        for n in 0..4 {
            let res = shooter.find_a_n(n, &scan)?;
            let count = count_zeros(&res.trajectory);
            ok &= count == n && res.boundary_residual < BOUNDARY_TOL && res.a_n > prev;
            prev = res.a_n;
            notes.push(format!("a{n} = {:.6} (zeros {count}, |v(T)| {:.1e})", res.a_n, res.boundary_residual));
            let mut csv = Vec::new();
            pullback(&params, &res.trajectory).write_csv(&mut csv)?;
            artifacts.insert(format!("solve_n{n}.csv"), csv);
            artifacts.insert(format!("solve_n{n}.json"), json(&res));
            solutions.push(res);
        }
        Ok((params, notes, ok))
    })();
    let elapsed = start.elapsed();
    let params = match existence {
        Ok((params, notes, ok)) => {
            lines.push(Line {
                id: 4,
                name: "existence runs",
                pass: ok && elapsed < EXISTENCE_BUDGET,
                detail: format!("{}; runtime {}", notes.join(", "), secs(elapsed)),
            });
            Some(params)
        }
        Err(e) => {
            lines.push(Line {
                id: 4,
                name: "existence runs",
                pass: false,
                detail: e.to_string(),
            });
            None
        }
    };

    let Some(params) = params else {
        for (id, name) in [(5, "trajectory properties"), (6, "large-a trends")] {
            lines.push(Line {
                id,
                name,
                pass: false,
                detail: "no boundary solutions from criterion 4".into(),
            });
        }
        lines.push(criterion_7(&nl, &mut artifacts));
        return Stage { lines, artifacts };
    };

    let opts = SuiteOptions {
        r_above_r0: true,
        force_pohozaev: true,
        ..SuiteOptions::default()
    };
    let mut failures = Vec::new();
    let mut evaluated = 0;
    let mut pohozaev_max = 0.0_f64;
    for res in &solutions {
        match property_suite(&res.trajectory, &params, &nl, &opts) {
            Ok(report) => {
                for c in &report.checks {
                    if c.status != Status::Skip {
                        evaluated += 1;
                    }
                    if c.name.starts_with("zero_extremum_identity") && c.status != Status::Skip {
                        pohozaev_max = pohozaev_max.max(c.value.unwrap_or(0.0));
                    }
                    if c.status == Status::Fail {
                        failures.push(format!("n={}: {} = {:?}", res.n, c.name, c.value));
                    }
                }
                artifacts.insert(format!("suite_n{}.json", res.n), json(&report));
            }
            Err(e) => failures.push(format!("n={}: {e}", res.n)),
        }
    }
    lines.push(Line {
        id: 5,
        name: "trajectory properties",
        pass: failures.is_empty() && evaluated > 0,
        detail: if failures.is_empty() {
            format!("{evaluated} checks pass on n = 0..3; max zero-extremum residual {pohozaev_max:.2e}")
        } else {
            failures.join("; ")
        },
    });

    let a0 = solutions[0].a_n;
    let wide = Shooter {
        tp: params.transformed(),
        nl: &nl,
        controls: Controls {
            max_zeros: 100_000,
            ..controls
        },
        tol,
    };
    let trend_line = match wide.zero_count_map(&geometric_grid(a0, 1e3 * a0, TREND_POINTS)) {
        Ok(scan) => {
            let trends = trend_checks(&scan, TREND_JITTER);
            artifacts.insert("trend_scan.json".into(), json(&scan));
            let pass = trends.iter().all(|t| t.pass);
            let detail = trends
                .iter()
                .map(|t| format!("{} {} violations over {} points", t.name, t.violations.len(), t.points))
                .collect::<Vec<_>>()
                .join(", ");
            Line {
                id: 6,
                name: "large-a trends",
                pass,
                detail,
            }
        }
        Err(e) => Line {
            id: 6,
            name: "large-a trends",
            pass: false,
            detail: e.to_string(),
        },
    };
    lines.push(trend_line);
    lines.push(criterion_7(&nl, &mut artifacts));
    Stage { lines, artifacts }
}

fn criterion_7(nl: &NonlinearitySpec, artifacts: &mut BTreeMap<String, Vec<u8>>) -> Line {
    let start = Instant::now();
    let beta = constants_numeric(nl).expect("canonical constants").beta;
    let mut pass = true;
    let mut notes = Vec::new();
    for alpha in [1.0, 2.0] {
        let params = ProblemParams {
            alpha,
            ..ProblemParams::canonical(1.0)
        };
        let opts = ProbeOptions::new(&params, 1e-2, 1e2, PROBE_POINTS);
        match nonexistence_probe(&params, nl, beta, &opts) {
            Ok(rep) => {
                let ok = rep.all_monotone
                    && rep.max_e_prime_residual < PROBE_E_PRIME_TOL
                    && rep.decaying_candidates == 0
                    && rep.failures == 0
                    && rep.growth.pass;
                pass &= ok;
                notes.push(format!(
                    "alpha = {alpha}: E monotone {}, E' residual {:.2e}, decaying {}, failed {}, growth fit {:.4} vs {:.4} (rel {:.2e}, tol {})",
                    rep.all_monotone,
                    rep.max_e_prime_residual,
                    rep.decaying_candidates,
                    rep.failures,
                    rep.growth.fitted,
                    rep.growth.expected,
                    rep.growth.rel_err,
                    rep.growth.tolerance
                ));
                artifacts.insert(format!("probe_alpha{alpha}.json"), json(&rep));
            }
            Err(e) => {
                pass = false;
                notes.push(format!("alpha = {alpha}: {e}"));
            }
        }
    }
    let elapsed = start.elapsed();
    Line {
        id: 7,
        name: "nonexistence probe",
        pass: pass && elapsed < PROBE_BUDGET,
        detail: format!("{}; runtime {}", notes.join("; "), secs(elapsed)),
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}

fn main() -> ExitCode {
    let mut lines = vec![criterion_1(), criterion_2(), criterion_3()];
    let first = in_pool(4, stage);
    let second = in_pool(1, stage);
    let differing: Vec<&String> = first
        .artifacts
        .iter()
        .filter(|(k, v)| second.artifacts.get(*k) != Some(*v))
        .map(|(k, _)| k)
        .collect();
    let same_keys = first.artifacts.len() == second.artifacts.len();
    lines.extend(first.lines);
    lines.push(Line {
        id: 8,
        name: "determinism",
        pass: differing.is_empty() && same_keys && !first.artifacts.is_empty(),
        detail: format!(
            "{} artifacts from criteria 4-7 compared across 4-thread and 1-thread runs; {} differ",
            first.artifacts.len(),
            differing.len()
        ),
    });
    for l in &lines {
        l.print();
    }
    if lines.iter().all(|l| l.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
