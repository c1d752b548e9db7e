//! Configured runs and the CSV exports behind the command-line driver.

mod config;
mod csv;

pub use self::config::{InlineTableau, ModelSpec, Prepared, RunConfig};
pub use self::csv::{fmt_f64, CsvWriter};

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::diagnostics::{self, fit_slope, observable_names, observable_vector, peak_to_peak, poincare_section_series, ConvergenceStudy, DriftSeries, SectionPoint, SectionSpec};
use crate::error::{Error, Result};
use crate::integrators::{vprk_step_detailed, ButcherTableau, HPState, Integrator, Method, StageData, StepReport};
use crate::lie::{Group, Momentum};
use crate::models::Model;

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } => 3,
        Error::OutOfDomain { .. } => 4,
        Error::ReferenceUnconverged { .. } => 1,
        _ => 2,
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::InvalidConfig(vec![format!("cannot write {}: {e}", path.display())])
}

fn metadata(command: &str, cfg: &RunConfig, extra: &[String]) -> String {
    let mut s = format!("lievprk {} {command}\n", env!("CARGO_PKG_VERSION"));
    for e in extra {
        s.push_str(e);
        s.push('\n');
    }
    s.push_str("config:\n");
    s.push_str(&cfg.to_config_string());
    s
}

/// Spatial momentum reported for a state: the discrete candidate for
/// variational methods, the continuous one otherwise.
pub fn reported_spatial_momentum(integrator: &Integrator, h: f64, state: &HPState) -> Result<Momentum> {
    let sm = diagnostics::spatial_momentum(state, &integrator.retraction, h)?;
    Ok(if integrator.method.is_variational() { sm.discrete } else { sm.continuous })
}

/// The VPRK tableau a stepper is equivalent to, when it has one.
pub fn stage_tableau(method: &Method) -> Option<ButcherTableau> {
    match method {
        Method::VeForward => Some(ButcherTableau::forward_euler()),
        Method::VeBackward => Some(ButcherTableau::backward_euler()),
        Method::Sv => Some(ButcherTableau::implicit_trapezoidal()),
        Method::Vprk(t) => Some(t.clone()),
        _ => None,
    }
}

pub fn trajectory_header(group: Group, stages: Option<usize>) -> Vec<String> {
    let n = group.matrix_dim();
    let d = group.algebra_dim();
    let mut h = vec!["step".to_string(), "t".into()];
    for i in 0..n {
        for j in 0..n {
            h.push(format!("g_{i}{j}"));
        }
    }
    h.extend((0..d).map(|i| format!("xi_{i}")));
    h.extend((0..d).map(|i| format!("mu_{i}")));
    h.push("energy".into());
    h.extend((0..d).map(|i| format!("spatial_momentum_{i}")));
    h.extend(["group_residual".into(), "newton_iters".into(), "residual".into()]);
    for s in 0..stages.unwrap_or(0) {
        for name in ["theta", "xi", "m", "mu"] {
            h.extend((0..d).map(|i| format!("stage{s}_{name}_{i}")));
        }
    }
    h
}

fn trajectory_row(
    k: usize,
    state: &HPState,
    report: &StepReport,
    model: &dyn Model,
    integrator: &Integrator,
    h: f64,
    stages: Option<&StageData>,
) -> Result<Vec<String>> {
    let g = state.g.matrix();
    let n = g.nrows();
    let mut row = vec![k.to_string(), fmt_f64(state.t)];
    row.extend((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| fmt_f64(g[(i, j)])));
    row.extend(state.xi.coords().iter().map(|&v| fmt_f64(v)));
    row.extend(state.mu.coords().iter().map(|&v| fmt_f64(v)));
    row.push(fmt_f64(state.energy(model)));
    row.extend(reported_spatial_momentum(integrator, h, state)?.coords().iter().map(|&v| fmt_f64(v)));
    row.push(fmt_f64(state.g.residual()));
    row.push(report.newton_iterations.to_string());
    row.push(fmt_f64(report.residual));
    if let Some(sd) = stages {
        for s in 0..sd.theta.len() {
            for v in [sd.theta[s].coords(), sd.xi[s].coords(), sd.m[s].coords(), sd.mu[s].coords()] {
                row.extend(v.iter().map(|&x| fmt_f64(x)));
            }
        }
    }
    Ok(row)
}

fn output_path(cfg: &RunConfig, output: Option<&Path>) -> Result<PathBuf> {
    output
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| Error::InvalidConfig(vec!["no output path: set `output` in the config or pass --output".into()]))
}

/// Writes one trajectory CSV row per state, including the initial one.
///
/// On a solver failure the rows written so far are kept and followed by a
/// `# ABORTED` line.
pub fn cmd_simulate(cfg: &RunConfig, output: Option<&Path>, debug_stages: bool) -> Result<usize> {
    let path = output_path(cfg, output)?;
    let p = cfg.prepare()?;
    let stage_tab = if debug_stages {
        Some(stage_tableau(&p.integrator.method).ok_or_else(|| {
            Error::InvalidConfig(vec![format!("--debug-stages needs a method with VPRK stages, got {}", p.integrator.id())])
        })?)
    } else {
        None
    };
    let mut extra = vec![format!("h = {:?}", p.h), format!("method_id = {}", p.integrator.id())];
    if let Some(t) = &stage_tab {
        extra.push(format!("stages computed by the equivalent VPRK tableau {}", t.name()));
    }
    let mut w = CsvWriter::create(&path).map_err(io_err(&path))?;
    w.comment(&metadata("simulate", cfg, &extra)).map_err(io_err(&path))?;
    let group = p.model.group();
    w.row(&trajectory_header(group, stage_tab.as_ref().map(|t| t.stages()))).map_err(io_err(&path))?;

    let model = p.model.as_ref();
    let mut state = p.initial.clone();
    let mut rows = 0;
    let empty_stages = stage_tab.as_ref().map(|t| {
        let z = crate::lie::AlgebraElement::zero(group);
        let m = Momentum::zero(group);
        StageData {
            theta: vec![z.clone(); t.stages()],
            xi: vec![z; t.stages()],
            m: vec![m.clone(); t.stages()],
            mu: vec![m; t.stages()],
        }
    });
    w.row(&trajectory_row(0, &state, &StepReport::explicit(), model, &p.integrator, p.h, empty_stages.as_ref())?)
        .map_err(io_err(&path))?;
    rows += 1;
    let mut failure = None;
    for k in 1..=cfg.steps {
        let stepped = match &stage_tab {
            Some(t) => vprk_step_detailed(model, t, &p.integrator.retraction, p.h, &state, &p.integrator.numerics).map(|(s, r, d)| (s, r, Some(d))),
            None => p.integrator.step(model, p.h, &state).map(|(s, r)| (s, r, None)),
        };
        match stepped {
            Ok((next, report, stages)) => {
                w.row(&trajectory_row(k, &next, &report, model, &p.integrator, p.h, stages.as_ref())?)
                    .map_err(io_err(&path))?;
                rows += 1;
                state = next;
            }
            Err(e) => {
                failure = Some((k, e));
                break;
            }
        }
    }
    if let Some((k, e)) = failure {
        w.comment(&format!("ABORTED at step {k}: {e}")).map_err(io_err(&path))?;
        w.finish().map_err(io_err(&path))?;
        return Err(e);
    }
    w.finish().map_err(io_err(&path))?;
    Ok(rows)
}

/// Convergence study per method over `h_list` on the configured time span.
pub fn cmd_converge(cfg: &RunConfig, methods: &[String], h_list: &[f64], output: Option<&Path>) -> Result<Vec<(String, ConvergenceStudy)>> {
    if h_list.len() < 4 {
        return Err(Error::InvalidConfig(vec![format!("need >= 4 step sizes, got {}", h_list.len())]));
    }
    let path = output_path(cfg, output)?;
    let p = cfg.prepare()?;
    let methods: Vec<String> = if methods.is_empty() { vec![cfg.method.clone()] } else { methods.to_vec() };
    let t_end = cfg.t_span.1 - cfg.t_span.0;
    let model = p.model.as_ref();
    let studies: Vec<(String, ConvergenceStudy)> = methods
        .par_iter()
        .map(|m| {
            let mut c = cfg.clone();
            c.method = m.clone();
            let it = c.integrator()?;
            let study = diagnostics::convergence_order(&it, model, h_list, t_end, &p.initial.g, &p.initial.mu)?;
            Ok((it.id(), study))
        })
        .collect::<Result<_>>()?;
    let mut extra = vec![format!("T = {t_end:?}")];
    for (m, s) in &studies {
        extra.push(format!("slope {m} = {:.6} +- {:.2e} (reference h = {:?})", s.slope, s.slope_stderr, s.reference_h));
    }
    let mut w = CsvWriter::create(&path).map_err(io_err(&path))?;
    w.comment(&metadata("converge", cfg, &extra)).map_err(io_err(&path))?;
    w.row(&["method", "h", "steps", "error"]).map_err(io_err(&path))?;
    for (m, s) in &studies {
        for (h, e) in s.h.iter().zip(&s.errors) {
            w.row(&[m.clone(), fmt_f64(*h), format!("{}", (t_end / h).round() as usize), fmt_f64(*e)])
                .map_err(io_err(&path))?;
        }
    }
    w.finish().map_err(io_err(&path))?;
    Ok(studies)
}

/// Runs the configured simulation and returns its section crossings.
pub fn section_points(cfg: &RunConfig, spec: &SectionSpec) -> Result<Vec<SectionPoint>> {
    let p = cfg.prepare()?;
    let index = spec.index(p.model.group())?;
    let model = p.model.as_ref();
    let mut state = p.initial.clone();
    let mut prev = (state.t, observable_vector(&state));
    let mut out = Vec::new();
    for _ in 0..cfg.steps {
        state = p.integrator.step(model, p.h, &state)?.0;
        let cur = (state.t, observable_vector(&state));
        out.extend(poincare_section_series(&[prev.0, cur.0], &[prev.1, cur.1.clone()], index, spec.level, spec.direction));
        prev = cur;
    }
    Ok(out)
}

/// Writes the section crossings of the configured run.
pub fn cmd_poincare(cfg: &RunConfig, output: Option<&Path>) -> Result<usize> {
    let spec = cfg.section.clone().ok_or_else(|| {
        Error::InvalidConfig(vec![format!(
            "poincare needs a section (section.coordinate, section.level, section.direction); the default is {}",
            SectionSpec::default()
        )])
    })?;
    let path = output_path(cfg, output)?;
    let points = section_points(cfg, &spec)?;
    let extra = vec![format!("section: {spec}"), format!("crossings = {}", points.len())];
    let mut w = CsvWriter::create(&path).map_err(io_err(&path))?;
    w.comment(&metadata("poincare", cfg, &extra)).map_err(io_err(&path))?;
    let mut header = vec!["t".to_string()];
    header.extend(observable_names(cfg.model.group()));
    w.row(&header).map_err(io_err(&path))?;
    for p in &points {
        let mut row = vec![fmt_f64(p.t)];
        row.extend(p.values.iter().map(|&v| fmt_f64(v)));
        w.row(&row).map_err(io_err(&path))?;
    }
    w.finish().map_err(io_err(&path))?;
    Ok(points.len())
}

/// Drift statistics of one method over the configured run.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub method: String,
    pub energy: DriftSeries,
    /// Largest `|slope|` over the spatial momentum components.
    pub momentum_slope: f64,
    pub momentum_peak_to_peak: f64,
    /// Largest per-step residual of the discrete Lie-Poisson relation,
    /// `None` for non-variational methods.
    pub max_dlp_residual: Option<f64>,
    pub final_group_residual: f64,
}

pub fn drift_report(cfg: &RunConfig, method: &str) -> Result<DriftReport> {
    let mut c = cfg.clone();
    c.method = method.into();
    let p = c.prepare()?;
    let model = p.model.as_ref();
    let it = &p.integrator;
    let d = model.group().algebra_dim();
    let mut state = p.initial.clone();
    let mut times = vec![state.t];
    let mut energy = vec![state.energy(model)];
    let mut momentum: Vec<Vec<f64>> = vec![reported_spatial_momentum(it, p.h, &state)?.coords().iter().copied().collect()];
    let mut dlp: Option<f64> = it.method.is_variational().then_some(0.0);
    for _ in 0..c.steps {
        let next = it.step(model, p.h, &state)?.0;
        if let Some(r) = dlp.as_mut() {
            *r = r.max(diagnostics::dlp_residual(&it.retraction, p.h, &state, &next)?);
        }
        state = next;
        times.push(state.t);
        energy.push(state.energy(model));
        momentum.push(reported_spatial_momentum(it, p.h, &state)?.coords().iter().copied().collect());
    }
    let mut momentum_slope: f64 = 0.0;
    let mut momentum_peak_to_peak: f64 = 0.0;
    for i in 0..d {
        let comp: Vec<f64> = momentum.iter().map(|m| m[i]).collect();
        momentum_slope = momentum_slope.max(fit_slope(&times, &comp).0.abs());
        momentum_peak_to_peak = momentum_peak_to_peak.max(peak_to_peak(&comp));
    }
    Ok(DriftReport {
        method: it.id(),
        energy: DriftSeries::from_values(times, energy),
        momentum_slope,
        momentum_peak_to_peak,
        max_dlp_residual: dlp,
        final_group_residual: state.g.residual(),
    })
}

/// Runs every method on the configured problem and writes one row each.
/// Ratios are taken against the first method.
pub fn cmd_compare(cfg: &RunConfig, methods: &[String], output: Option<&Path>) -> Result<Vec<DriftReport>> {
    if methods.len() < 2 {
        return Err(Error::InvalidConfig(vec![format!("compare needs >= 2 methods, got {}", methods.len())]));
    }
    let path = output_path(cfg, output)?;
    cfg.validate()?;
    let reports: Vec<DriftReport> = methods.par_iter().map(|m| drift_report(cfg, m)).collect::<Result<_>>()?;
    let base = &reports[0];
    let mut w = CsvWriter::create(&path).map_err(io_err(&path))?;
    w.comment(&metadata("compare", cfg, &[format!("h = {:?}", cfg.h()), format!("ratios relative to {}", base.method)]))
        .map_err(io_err(&path))?;
    w.row(&[
        "method",
        "h",
        "steps",
        "energy_slope",
        "energy_slope_stderr",
        "energy_peak_to_peak",
        "energy_max_deviation",
        "momentum_slope",
        "momentum_peak_to_peak",
        "max_dlp_residual",
        "final_group_residual",
        "energy_slope_ratio",
        "energy_excursion_ratio",
    ])
    .map_err(io_err(&path))?;
    for r in &reports {
        w.row(&[
            r.method.clone(),
            fmt_f64(cfg.h()),
            cfg.steps.to_string(),
            fmt_f64(r.energy.slope),
            fmt_f64(r.energy.slope_stderr),
            fmt_f64(r.energy.peak_to_peak),
            fmt_f64(r.energy.max_deviation),
            fmt_f64(r.momentum_slope),
            fmt_f64(r.momentum_peak_to_peak),
            r.max_dlp_residual.map_or("nan".into(), fmt_f64),
            fmt_f64(r.final_group_residual),
            fmt_f64(r.energy.slope.abs() / base.energy.slope.abs()),
            fmt_f64(r.energy.max_deviation / base.energy.max_deviation),
        ])
        .map_err(io_err(&path))?;
    }
    w.finish().map_err(io_err(&path))?;
    Ok(reports)
}
