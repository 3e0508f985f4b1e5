//! Dispatch a validated config to its solver and write the artifacts.

use crate::config::{Mode, RunConfig};
use crate::output::{fmt_f64, write_csv, write_json, write_rows};
use csvortex_core::diagnostics::{
    curvature_probe, decay_fit, enclosed_flux, flux, reconstruct_higgs_gauge, Convergence, FluxSource, GridGeometry,
    Provenance, SolveReport, SolverTag,
};
use csvortex_core::model::Coupling;
use csvortex_core::plane::{solve_topological_plane, PlaneOptions, PlaneSolution};
use csvortex_core::radial::{
    beta_of, check_identities, find_a0, find_a_for_beta, solve_topological, to_physical, RadialError, RadialProfile,
    ShootingOptions,
};
use csvortex_core::torus::{
    estimate_lambda_c, kappa_c_from_lambda_c, lambda_lower_bound, monotone_iterate, IterationOutcome, OutcomeTag,
    SolverOptions, TorusGrid,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::fmt::Debug;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Converged,
    Diverged,
    Unresolved,
    NoSolution,
    Error,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Converged => 0,
            Status::Diverged | Status::Unresolved | Status::NoSolution => 2,
            Status::Error => 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A solver failure that ends the run with exit code 1.
#[derive(Debug)]
struct Failure {
    code: String,
    message: String,
}

impl Failure {
    fn from_error<E: Debug + std::fmt::Display>(module: &str, e: &E) -> Self {
        Self {
            code: format!("{module}-{}", variant_code(e)),
            message: e.to_string(),
        }
    }
}

/// `SomeVariant { .. }` → `some-variant`.
fn variant_code<E: Debug>(e: &E) -> String {
    let dbg = format!("{e:?}");
    let name: String = dbg.chars().take_while(|c| c.is_alphanumeric()).collect();
    let mut out = String::new();
    for (i, c) in name.chars().enumerate() {
        if c.is_uppercase() {
            if i > 0 {
                out.push('-');
            }
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

#[derive(Debug)]
pub struct RunSummary {
    pub status: Status,
    pub report_path: PathBuf,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

/// What a mode hands back before the report is stamped and written.
struct Produced {
    status: Status,
    report: SolveReport,
    details: Value,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    out: &'a Path,
}

impl Ctx<'_> {
    fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    fn io(&self, rel: &str, r: std::io::Result<()>) -> Result<(), RunError> {
        r.map_err(|source| RunError::Io {
            path: self.path(rel),
            source,
        })
    }

    fn csv(&self, rel: &str, header: &[&str], cols: &[&[f64]]) -> Result<(), RunError> {
        self.io(rel, write_csv(&self.path(rel), header, cols))
    }

    fn coupling(&self) -> Coupling {
        self.cfg.coupling().expect("validated coupling")
    }
}

pub fn config_hash(normalized: &Value) -> String {
    let text = serde_json::to_string(normalized).expect("plain JSON");
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true)
}

/// Run `cfg` and write every artifact under `out`.
pub fn run(cfg: &RunConfig, normalized: &Value, out: &Path) -> Result<RunSummary, RunError> {
    let started_at = now();
    let ctx = Ctx { cfg, out };
    ctx.io(".", std::fs::create_dir_all(out))?;
    ctx.io("plotdata", std::fs::create_dir_all(out.join("plotdata")))?;
    let result = match cfg.mode {
        Mode::RadialTopological => radial_topological(&ctx),
        Mode::RadialNontopological => radial_nontopological(&ctx),
        Mode::RadialSweep => radial_sweep(&ctx),
        Mode::Torus => torus(&ctx),
        Mode::Plane => plane(&ctx),
        Mode::LambdaCritical => lambda_critical(&ctx),
    }?;
    let provenance = Provenance {
        config_hash: config_hash(normalized),
        started_at,
        finished_at: now(),
    };
    let (status, doc) = match result {
        Ok(p) => {
            let mut report = p.report;
            report.provenance = provenance;
            let Value::Object(mut m) = serde_json::to_value(&report).expect("plain data") else {
                unreachable!("report serializes to an object")
            };
            m.insert("mode".into(), json!(cfg.mode.as_str()));
            m.insert("status".into(), json!(p.status));
            m.insert("details".into(), p.details);
            m.insert("config".into(), normalized.clone());
            (p.status, Value::Object(m))
        }
        Err(f) => {
            let mut m = Map::new();
            m.insert("mode".into(), json!(cfg.mode.as_str()));
            m.insert("status".into(), json!(Status::Error));
            m.insert("error".into(), json!({"code": f.code, "message": f.message}));
            m.insert("provenance".into(), serde_json::to_value(&provenance).expect("plain data"));
            m.insert("config".into(), normalized.clone());
            (Status::Error, Value::Object(m))
        }
    };
    let report_path = out.join("report.json");
    ctx.io("report.json", write_json(&report_path, &doc))?;
    Ok(RunSummary { status, report_path })
}

type ModeResult = Result<Result<Produced, Failure>, RunError>;

fn shooting_options(cfg: &RunConfig) -> ShootingOptions {
    let mut o = ShootingOptions::default();
    o.t_start = cfg.domain.t_start;
    o.t_max = cfg.domain.t_max.unwrap_or(o.t_max);
    let tol = cfg.solver.tol.unwrap_or(o.abs_tol);
    o.rel_tol = o.rel_tol * tol / o.abs_tol;
    o.abs_tol = tol;
    o
}

fn write_profile(ctx: &Ctx<'_>, p: &RadialProfile) -> Result<(), RunError> {
    ctx.csv("profile.csv", &["t", "u", "up"], &[&p.t, &p.u, &p.up])?;
    let ph = to_physical(p);
    ctx.csv(
        "physical.csv",
        &["r", "phisq", "F12", "energy_density"],
        &[&ph.r, &ph.phisq, &ph.f12, &ph.energy_density],
    )
}

fn radial_topological(ctx: &Ctx<'_>) -> ModeResult {
    let cfg = ctx.cfg;
    let c = ctx.coupling();
    let n = cfg.total_winding();
    let opts = shooting_options(cfg);
    let sol = match solve_topological(n, c.lambda(), &opts) {
        Ok(s) => s,
        Err(e) => return Ok(Err(Failure::from_error("radial", &e))),
    };
    write_profile(ctx, &sol.profile)?;
    let phi = flux(FluxSource::Radial(&sol.profile), c.lambda());
    let mut report = SolveReport::new(
        SolverTag::Radial,
        n,
        c.lambda(),
        c.kappa(),
        phi,
        Convergence {
            iterations: sol.bisection_steps,
            final_residual: sol.a_upper - sol.a_lower,
        },
    );
    report.a = Some(sol.a0);
    let target = 2.0 * std::f64::consts::PI * n as f64;
    let details = json!({
        "a_lower": sol.a_lower,
        "a_upper": sol.a_upper,
        "separation_time": sol.separation_time,
        "ode_residual": sol.profile.ode_residual(),
        "flux_rel_error": if n > 0 { (phi - target).abs() / target } else { phi.abs() },
    });
    Ok(Ok(Produced {
        status: Status::Converged,
        report,
        details,
    }))
}

fn radial_nontopological(ctx: &Ctx<'_>) -> ModeResult {
    let cfg = ctx.cfg;
    let c = ctx.coupling();
    let n = cfg.total_winding();
    let opts = shooting_options(cfg);
    let target = cfg.targets.beta.expect("validated target");
    let solve = match find_a_for_beta(n, c.lambda(), target, &opts) {
        Ok(s) => s,
        Err(e @ (RadialError::NoBracket { .. } | RadialError::OutOfRange { .. })) => {
            return Ok(Ok(no_solution(cfg, c, &e)));
        }
        Err(e) => return Ok(Err(Failure::from_error("radial", &e))),
    };
    let (profile, beta) = match beta_of(n, c.lambda(), solve.a, &opts) {
        Ok(x) => x,
        Err(e) => return Ok(Err(Failure::from_error("radial", &e))),
    };
    write_profile(ctx, &profile)?;
    let identities = check_identities(&profile, beta);
    let phi = flux(FluxSource::Radial(&profile), c.lambda());
    let mut report = SolveReport::new(
        SolverTag::Radial,
        n,
        c.lambda(),
        c.kappa(),
        phi,
        Convergence {
            iterations: solve.bisection_steps,
            final_residual: (beta - target).abs(),
        },
    );
    report.a = Some(solve.a);
    report.beta = Some(beta);
    report.identity_residuals = Some(identities);
    report.decay_slope = decay_fit(&profile).ok();
    let expected = std::f64::consts::PI * (2.0 * n as f64 + beta);
    let details = json!({
        "a0": solve.a0,
        "beta_target": target,
        "sign_changes": solve.sign_changes,
        "flux_vs_pi_2n_plus_beta": (phi - expected).abs() / phi,
    });
    Ok(Ok(Produced {
        status: Status::Converged,
        report,
        details,
    }))
}

fn no_solution(cfg: &RunConfig, c: Coupling, e: &RadialError) -> Produced {
    let report = SolveReport::new(
        SolverTag::Radial,
        cfg.total_winding(),
        c.lambda(),
        c.kappa(),
        f64::NAN,
        Convergence {
            iterations: 0,
            final_residual: f64::NAN,
        },
    );
    Produced {
        status: Status::NoSolution,
        report,
        details: json!({"reason": {"code": format!("radial-{}", variant_code(e)), "message": e.to_string()}}),
    }
}

#[derive(Serialize)]
struct SweepSample {
    a: f64,
    beta: Option<f64>,
    flux: Option<f64>,
    identity_residuals: Option<(f64, f64)>,
    error: Option<String>,
}

fn radial_sweep(ctx: &Ctx<'_>) -> ModeResult {
    let cfg = ctx.cfg;
    let c = ctx.coupling();
    let n = cfg.total_winding();
    let lam = c.lambda();
    let opts = shooting_options(cfg);
    let t = &cfg.targets;
    let samples = t.samples.expect("validated samples");
    let (range, a0) = match (t.a_range, t.a_offset_range) {
        (Some(r), _) => (r, None),
        (None, Some(off)) => match find_a0(n, lam, &opts) {
            Ok(a0) => ([a0 + off[0], a0 + off[1]], Some(a0)),
            Err(e) => return Ok(Err(Failure::from_error("radial", &e))),
        },
        (None, None) => unreachable!("validated range"),
    };
    let a_values: Vec<f64> = (0..samples)
        .map(|k| range[0] + (range[1] - range[0]) * k as f64 / (samples - 1) as f64)
        .collect();
    let results: Vec<SweepSample> = a_values
        .par_iter()
        .map(|&a| match beta_of(n, lam, a, &opts) {
            Ok((p, b)) => SweepSample {
                a,
                beta: Some(b),
                flux: Some(flux(FluxSource::Radial(&p), lam)),
                identity_residuals: Some(check_identities(&p, b)),
                error: None,
            },
            Err(e) => SweepSample {
                a,
                beta: None,
                flux: None,
                identity_residuals: None,
                error: Some(format!("radial-{}", variant_code(&e))),
            },
        })
        .collect();
    let ok: Vec<&SweepSample> = results.iter().filter(|s| s.beta.is_some()).collect();
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|s| vec![fmt_f64(s.a), s.beta.map_or_else(|| "nan".into(), fmt_f64)])
        .collect();
    ctx.io(
        "plotdata/beta_vs_a.csv",
        write_rows(&ctx.path("plotdata/beta_vs_a.csv"), &["a", "beta"], &rows),
    )?;
    let min = 2.0 * n as f64 + 4.0;
    let status = if ok.len() == results.len() {
        Status::Converged
    } else {
        Status::NoSolution
    };
    // the report headline is the sample closest to the separatrix
    let head = ok.last();
    let mut report = SolveReport::new(
        SolverTag::Radial,
        n,
        lam,
        c.kappa(),
        head.and_then(|s| s.flux).unwrap_or(f64::NAN),
        Convergence {
            iterations: ok.len(),
            final_residual: 0.0,
        },
    );
    report.a = head.map(|s| s.a);
    report.beta = head.and_then(|s| s.beta);
    report.identity_residuals = head.and_then(|s| s.identity_residuals);
    let details = json!({
        "a0": a0,
        "a_range": range,
        "samples": results,
        "all_beta_above_2n_plus_4": ok.iter().all(|s| s.beta.unwrap() > min),
        "failed": results.len() - ok.len(),
    });
    Ok(Ok(Produced {
        status,
        report,
        details,
    }))
}

fn torus_grid(cfg: &RunConfig) -> TorusGrid {
    let d = &cfg.domain;
    TorusGrid::new(d.lx.unwrap(), d.ly.unwrap(), d.nx.unwrap(), d.ny.unwrap()).expect("validated grid")
}

fn torus_options(cfg: &RunConfig) -> SolverOptions {
    let s = &cfg.solver;
    SolverOptions {
        k_factor: s.k_factor.unwrap(),
        tol: s.tol.unwrap(),
        max_iter: s.max_iter.unwrap(),
        ..SolverOptions::default()
    }
}

fn status_of(tag: OutcomeTag) -> Status {
    match tag {
        OutcomeTag::Converged => Status::Converged,
        OutcomeTag::Diverged => Status::Diverged,
        OutcomeTag::Unresolved => Status::Unresolved,
    }
}

fn write_torus_field(ctx: &Ctx<'_>, grid: &TorusGrid, out: &IterationOutcome) -> Result<(), RunError> {
    let u = out.u();
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..grid.len()).map(|p| grid.node(p)).unzip();
    ctx.csv("field.csv", &["x", "y", "u"], &[&xs, &ys, &u.values])?;
    let it: Vec<f64> = (0..out.residual_history.len()).map(|k| k as f64).collect();
    ctx.csv("plotdata/residuals.csv", &["iteration", "residual"], &[&it, &out.residual_history])
}

/// Stokes loop around the middle half of a periodic grid and the curvature probe.
fn torus_checks(grid: &TorusGrid, out: &IterationOutcome, cfg: &RunConfig, lambda: f64) -> Value {
    let u = out.u();
    let geo = GridGeometry {
        nx: grid.nx,
        ny: grid.ny,
        x0: 0.0,
        y0: 0.0,
        hx: grid.hx(),
        hy: grid.hy(),
        periodic: true,
    };
    let vs = cfg.vortex_set();
    let probe = curvature_probe(&geo, &u.values, &vs, lambda);
    let mut m = Map::new();
    m.insert("curvature_probe".into(), json!(probe));
    if let Ok(hg) = reconstruct_higgs_gauge(geo, &u.values, &vs) {
        let (i0, i1, j0, j1) = (grid.nx / 8, grid.nx - grid.nx / 8, grid.ny / 8, grid.ny - grid.ny / 8);
        let inside = vs.iter().all(|v| {
            let (fx, fy) = (v.x / grid.hx(), v.y / grid.hy());
            fx > (i0 + 2) as f64 && fx < (i1 - 2) as f64 && fy > (j0 + 2) as f64 && fy < (j1 - 2) as f64
        });
        if inside {
            m.insert("stokes_loop".into(), json!(hg.loop_integral(i0, i1, j0, j1)));
            m.insert(
                "stokes_enclosed_flux".into(),
                json!(enclosed_flux(&geo, &u.values, lambda, i0, i1, j0, j1)),
            );
        }
        m.insert("masked_nodes".into(), json!(hg.masked.len()));
    }
    Value::Object(m)
}

fn torus(ctx: &Ctx<'_>) -> ModeResult {
    let cfg = ctx.cfg;
    let c = ctx.coupling();
    let grid = torus_grid(cfg);
    let opts = torus_options(cfg);
    let vs = cfg.vortex_set();
    let n = cfg.total_winding();
    let out = match monotone_iterate(&grid, &vs, c.lambda(), &opts) {
        Ok(o) => o,
        Err(e) => return Ok(Err(Failure::from_error("torus", &e))),
    };
    write_torus_field(ctx, &grid, &out)?;
    let u = out.u();
    let phi = flux(FluxSource::Torus(&u), c.lambda());
    let report = SolveReport::new(
        SolverTag::Torus,
        n,
        c.lambda(),
        c.kappa(),
        phi,
        Convergence {
            iterations: out.iterations,
            final_residual: out.final_residual(),
        },
    );
    let details = json!({
        "outcome": out.tag,
        "lambda_lower_bound": lambda_lower_bound(n, grid.area()),
        "max_increment": out.max_increment,
        "u_max": u.max(),
        "u_min": u.min(),
        "checks": torus_checks(&grid, &out, cfg, c.lambda()),
    });
    Ok(Ok(Produced {
        status: status_of(out.tag),
        report,
        details,
    }))
}

fn lambda_critical(ctx: &Ctx<'_>) -> ModeResult {
    let cfg = ctx.cfg;
    let grid = torus_grid(cfg);
    let opts = torus_options(cfg);
    let vs = cfg.vortex_set();
    let n = cfg.total_winding();
    let width = cfg.targets.rel_width.unwrap();
    let lc = match estimate_lambda_c(&grid, &vs, &opts, width) {
        Ok(l) => l,
        Err(e) => return Ok(Err(Failure::from_error("torus", &e))),
    };
    let rows: Vec<Vec<String>> = lc
        .scan
        .iter()
        .map(|&(l, ok)| vec![fmt_f64(l), if ok { "1".into() } else { "0".into() }])
        .collect();
    ctx.io(
        "plotdata/lambda_scan.csv",
        write_rows(&ctx.path("plotdata/lambda_scan.csv"), &["lambda", "converged"], &rows),
    )?;
    // field of the smallest converged coupling
    let out = match monotone_iterate(&grid, &vs, lc.lambda_converged, &opts) {
        Ok(o) => o,
        Err(e) => return Ok(Err(Failure::from_error("torus", &e))),
    };
    write_torus_field(ctx, &grid, &out)?;
    let u = out.u();
    let report = SolveReport::new(
        SolverTag::Torus,
        n,
        lc.lambda_c,
        kappa_c_from_lambda_c(lc.lambda_c),
        flux(FluxSource::Torus(&u), lc.lambda_converged),
        Convergence {
            iterations: lc.oracle_calls,
            final_residual: lc.bracket_width,
        },
    );
    let bound = lambda_lower_bound(n, grid.area());
    let details = json!({
        "lambda_c": lc.lambda_c,
        "kappa_c": kappa_c_from_lambda_c(lc.lambda_c),
        "bracket_width": lc.bracket_width,
        "lambda_converged": lc.lambda_converged,
        "lambda_lower_bound": bound,
        "above_lower_bound": lc.lambda_c >= bound,
        "field_iterations": out.iterations,
    });
    Ok(Ok(Produced {
        status: Status::Converged,
        report,
        details,
    }))
}

fn plane(ctx: &Ctx<'_>) -> ModeResult {
    let cfg = ctx.cfg;
    let c = ctx.coupling();
    let vs = cfg.vortex_set();
    let n = cfg.total_winding();
    let s = &cfg.solver;
    let opts = PlaneOptions {
        k_factor: s.k_factor.unwrap(),
        tol: s.tol.unwrap(),
        max_iter: s.max_iter.unwrap(),
        ..PlaneOptions::default()
    };
    let schedule = cfg.domain.r_schedule.clone().unwrap();
    let sol = match solve_topological_plane(&vs, c.lambda(), &schedule, cfg.domain.n.unwrap(), &opts) {
        Ok(s) => s,
        Err(e) => return Ok(Err(Failure::from_error("plane", &e))),
    };
    let last = sol.outcome.v.domain;
    let u = sol.outcome.u();
    let (xs, ys): (Vec<f64>, Vec<f64>) = last.interior_points().into_iter().unzip();
    ctx.csv("field.csv", &["x", "y", "u"], &[&xs, &ys, &u])?;
    let r: Vec<f64> = sol.stages.iter().map(|s| s.domain.r).collect();
    let fl: Vec<f64> = sol.stages.iter().map(|s| s.flux).collect();
    ctx.csv("plotdata/flux_vs_R.csv", &["R", "flux"], &[&r, &fl])?;
    let report = SolveReport::new(
        SolverTag::Plane,
        n,
        c.lambda(),
        c.kappa(),
        flux(FluxSource::Grid { u: &u, h: last.h() }, c.lambda()),
        Convergence {
            iterations: sol.outcome.iterations,
            final_residual: sol.outcome.final_residual(),
        },
    );
    let status = if sol.stages.iter().all(|s| s.converged) {
        Status::Converged
    } else {
        Status::Unresolved
    };
    let details = plane_details(&sol, cfg, c.lambda(), &u);
    Ok(Ok(Produced {
        status,
        report,
        details,
    }))
}

fn plane_details(sol: &PlaneSolution, cfg: &RunConfig, lambda: f64, u: &[f64]) -> Value {
    let d = sol.outcome.v.domain;
    let geo = GridGeometry {
        nx: d.n,
        ny: d.n,
        x0: d.coord(0),
        y0: d.coord(0),
        hx: d.h(),
        hy: d.h(),
        periodic: false,
    };
    let stages: Vec<Value> = sol
        .stages
        .iter()
        .map(|s| {
            json!({
                "R": s.domain.r,
                "n": s.domain.n,
                "flux": s.flux,
                "iterations": s.iterations,
                "converged": s.converged,
                "final_residual": s.final_residual,
                "rise_over_previous": s.rise_over_previous,
                "boundary_band": s.boundary_band,
            })
        })
        .collect();
    json!({
        "stages": stages,
        "cauchy_gap": sol.cauchy_gap,
        "max_increment": sol.outcome.max_increment,
        "u_max": u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "curvature_probe": curvature_probe(&geo, u, &cfg.vortex_set(), lambda),
    })
}
