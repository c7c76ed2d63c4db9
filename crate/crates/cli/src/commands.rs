use std::fmt::Write as _;
use std::path::Path;

use nodal_core::config::RunConfig;
use nodal_core::diagnostics::{property_suite, nonexistence_probe, ProbeOptions, SuiteOptions, PROBE_HEADER};
use nodal_core::ivp::Trajectory;
use nodal_core::linear_oracle::linear_solution;
use nodal_core::nonlinearity::constants_numeric;
use nodal_core::shooting::{geometric_grid, Shooter};
use nodal_core::transform::{fmt17, pullback, SolutionProfile};
use nodal_core::Error;
use serde::Serialize;
use serde_json::json;

use crate::artifacts::Artifacts;
use crate::{CliError, CliResult};

pub const SCAN_HEADER: &str = "a,n_zeros,v_T,M_a,v_Ma,z_a";
pub const ORACLE_HEADER: &str = "t,y,dy_dt";

/// The resolved configuration and the bytes hashed into the manifest.
fn load_config(path: Option<&Path>) -> CliResult<(RunConfig, Vec<u8>)> {
    match path {
        Some(p) => {
            let bytes =
                std::fs::read(p).map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", p.display())]))?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|_| Error::Config(vec![format!("{} is not UTF-8", p.display())]))?;
            Ok((RunConfig::from_toml(&text)?, bytes))
        }
        None => Ok((RunConfig::default(), Vec::new())),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

#[derive(Serialize)]
struct ExtremumR {
    r: f64,
    u: f64,
}

#[derive(Serialize)]
struct SolveSummary {
    n: usize,
    a_n: f64,
    boundary_residual: f64,
    converged: bool,
    #[serde(rename = "R")]
    r: f64,
    zeros_r: Vec<f64>,
    extrema: Vec<ExtremumR>,
}

pub fn solve(n: usize, config: Option<&Path>, out: &Path) -> CliResult<()> {
    let (cfg, bytes) = load_config(config)?;
    let params = cfg.problem;
    let shooter = Shooter {
        tp: params.transformed(),
        nl: &cfg.nonlinearity,
        controls: cfg.controls(),
        tol: cfg.tolerances(),
    };
    let grid = geometric_grid(cfg.scan.a_min, cfg.scan.a_max, cfg.scan.points);
    let scan = shooter.zero_count_map(&grid)?;
    let res = shooter.find_a_n(n, &scan)?;
    let traj = &res.trajectory;

    let mut zeros_r: Vec<f64> = traj.zeros().iter().map(|z| params.to_r(z.t)).collect();
    zeros_r.sort_by(f64::total_cmp);
    let mut extrema: Vec<ExtremumR> =
        traj.extrema().iter().map(|e| ExtremumR { r: params.to_r(e.t), u: e.v }).collect();
    extrema.sort_by(|a, b| a.r.total_cmp(&b.r));
    let summary = SolveSummary {
        n,
        a_n: res.a_n,
        boundary_residual: res.boundary_residual,
        converged: res.converged,
        r: params.r,
        zeros_r,
        extrema,
    };

    let mut art = Artifacts::new(out, "solve", json!({ "n": n }), Some((&cfg, &bytes)))?;
    let mut csv = Vec::new();
    pullback(&params, traj).write_csv(&mut csv)?;
    art.write("profile.csv", &csv)?;
    art.write_json("summary.json", &summary)?;
    art.finish()?;
    if !res.converged {
        return Err(Error::NotFound {
            n,
            reason: format!("boundary residual {:e} above tolerance", res.boundary_residual),
        }
        .into());
    }
    Ok(())
}

pub fn scan(
    config: Option<&Path>,
    a_min: Option<f64>,
    a_max: Option<f64>,
    points: Option<usize>,
    out: &Path,
) -> CliResult<()> {
    let (mut cfg, bytes) = load_config(config)?;
    cfg.scan.a_min = a_min.unwrap_or(cfg.scan.a_min);
    cfg.scan.a_max = a_max.unwrap_or(cfg.scan.a_max);
    cfg.scan.points = points.unwrap_or(cfg.scan.points);
    cfg.validate()?;
    let shooter = Shooter {
        tp: cfg.problem.transformed(),
        nl: &cfg.nonlinearity,
        controls: cfg.controls(),
        tol: cfg.tolerances(),
    };
    let grid = geometric_grid(cfg.scan.a_min, cfg.scan.a_max, cfg.scan.points);
    let pts = shooter.zero_count_map(&grid)?;
    let mut csv = String::new();
    writeln!(csv, "{SCAN_HEADER}").expect("string write");
    for p in &pts {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt17(p.a),
            p.n.map(|n| n.to_string()).unwrap_or_default(),
            if p.n.is_some() { fmt17(p.v_t) } else { String::new() },
            opt(p.m_a),
            opt(p.v_ma),
            opt(p.z_a)
        )
        .expect("string write");
    }
    let args = json!({ "a_min": cfg.scan.a_min, "a_max": cfg.scan.a_max, "points": cfg.scan.points });
    let mut art = Artifacts::new(out, "scan", args, Some((&cfg, &bytes)))?;
    art.write("scan.csv", csv.as_bytes())?;
    art.finish()
}

pub fn oracle(delta: f64, t_min: f64, t_max: f64, points: usize, out: &Path) -> CliResult<()> {
    if !(t_min > 0.0 && t_max > t_min && points >= 2) {
        return Err(CliError::Usage(format!(
            "need 0 < t_min < t_max and points >= 2, got t_min = {t_min}, t_max = {t_max}, points = {points}"
        )));
    }
    let mut csv = String::new();
    writeln!(csv, "{ORACLE_HEADER}").expect("string write");
    for t in geometric_grid(t_min, t_max, points) {
        let (y, dy) = linear_solution(delta, t)?;
        writeln!(csv, "{},{},{}", fmt17(t), fmt17(y), fmt17(dy)).expect("string write");
    }
    let args = json!({ "delta": delta, "t_min": t_min, "t_max": t_max, "points": points });
    let mut art = Artifacts::new(out, "oracle", args, None)?;
    art.write("oracle.csv", csv.as_bytes())?;
    art.finish()
}

pub fn verify(
    profile: &Path,
    config: Option<&Path>,
    r_above_r0: bool,
    force_pohozaev: bool,
    out: Option<&Path>,
) -> CliResult<()> {
    let (cfg, bytes) = load_config(config)?;
    let text = std::fs::read_to_string(profile).map_err(Error::from)?;
    let prof = SolutionProfile::read_csv(&text)?;
    let mut samples: Vec<(f64, f64, f64)> = prof.rows.iter().map(|r| (r.t, r.v, r.dv_dt)).collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tp = cfg.problem.transformed();
    let traj = Trajectory::from_samples(&tp, &cfg.nonlinearity, &samples)?;
    let opts = SuiteOptions {
        r_above_r0,
        force_pohozaev,
        controls: cfg.controls(),
        ..SuiteOptions::default()
    };
    let report = property_suite(&traj, &cfg.problem, &cfg.nonlinearity, &opts)?;
    match out {
        Some(dir) => {
            let args = json!({ "r_above_r0": r_above_r0, "force_pohozaev": force_pohozaev });
            let mut art = Artifacts::new(dir, "verify", args, Some((&cfg, &bytes)))?;
            art.write_json("report.json", &report)?;
            art.finish()
        }
        None => {
            let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
            println!("{text}");
            Ok(())
        }
    }
}

pub fn nonexist(
    config: Option<&Path>,
    b_min: Option<f64>,
    b_max: Option<f64>,
    points: Option<usize>,
    r_far: Option<f64>,
    out: &Path,
) -> CliResult<()> {
    let (mut cfg, bytes) = load_config(config)?;
    cfg.probe.b_min = b_min.unwrap_or(cfg.probe.b_min);
    cfg.probe.b_max = b_max.unwrap_or(cfg.probe.b_max);
    cfg.probe.points = points.unwrap_or(cfg.probe.points);
    cfg.probe.r_far = r_far.or(cfg.probe.r_far);
    cfg.validate()?;
    let params = cfg.problem;
    let beta = constants_numeric(&cfg.nonlinearity)?.beta;
    let mut opts = ProbeOptions::new(&params, cfg.probe.b_min, cfg.probe.b_max, cfg.probe.points);
    opts.r_far = cfg.r_far();
    opts.rtol = cfg.solver.rtol;
    opts.atol = cfg.solver.atol;
    let report = nonexistence_probe(&params, &cfg.nonlinearity, beta, &opts)?;
    let mut csv = String::new();
    writeln!(csv, "{PROBE_HEADER}").expect("string write");
    for row in &report.rows {
        writeln!(
            csv,
            "{},{},{},{}",
            fmt17(row.b),
            row.outcome.as_str(),
            row.e_monotone,
            opt(row.divergence_fit)
        )
        .expect("string write");
    }
    let args = json!({
        "b_min": cfg.probe.b_min,
        "b_max": cfg.probe.b_max,
        "points": cfg.probe.points,
        "r_far": opts.r_far,
    });
    let mut art = Artifacts::new(out, "nonexist", args, Some((&cfg, &bytes)))?;
    art.write("nonexist.csv", csv.as_bytes())?;
    art.write_json("probe_report.json", &report)?;
    art.finish()
}
