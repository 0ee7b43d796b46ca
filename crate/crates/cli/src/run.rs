//! Executes a scenario and writes its files.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use surfvortex_core::dynamics::*;
use surfvortex_core::greens::GreensEvaluator;
use surfvortex_core::ode::Control;
use surfvortex_core::spectral::SphereGrid;
use surfvortex_core::surface::{ConformalMetric, SpherePoint};

use crate::config::{heading_vector, Experiment, ScenarioConfig};
use crate::error::CliError;
use crate::output::{position_header, OutputDir};

/// Environment variable that relocates relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "SURFVORTEX_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Whatever the experiment block asks for (plain simulation if none).
    Auto,
    Simulate,
    Dipole,
    Poincare,
    GreensTable,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub metric: String,
    pub config: ScenarioConfig,
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub summary: Value,
    pub wall_time_s: f64,
}

/// Output directory for `cfg`: an explicit override wins, otherwise a
/// relative `output_dir` is placed under `$SURFVORTEX_OUTPUT_ROOT` if set.
pub fn resolve_output_dir(cfg: &ScenarioConfig, cli_override: Option<&Path>) -> PathBuf {
    if let Some(p) = cli_override {
        return p.to_path_buf();
    }
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if cfg.output_dir.is_relative() => PathBuf::from(root).join(&cfg.output_dir),
        _ => cfg.output_dir.clone(),
    }
}

pub fn run_scenario(cfg: &ScenarioConfig, command: Command, out_dir: PathBuf) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let command = match (command, &cfg.experiment) {
        (Command::Auto, Experiment::None) => Command::Simulate,
        (Command::Auto, Experiment::Dipole { .. }) => Command::Dipole,
        (Command::Auto, Experiment::Poincare { .. }) => Command::Poincare,
        (Command::Auto, Experiment::GreensTable { .. }) => Command::GreensTable,
        (c, _) => c,
    };
    let metric = Arc::new(cfg.metric()?);
    let ev = GreensEvaluator::new(metric.clone());
    let mut out = OutputDir::create(out_dir)?;
    let (name, summary) = match command {
        Command::Simulate if cfg.has_masses() => ("simulate", simulate_mass(cfg, &ev, &mut out)?),
        Command::Simulate => ("simulate", simulate(cfg, &ev, &mut out)?),
        Command::Dipole => ("dipole-test", dipole(cfg, &ev, &mut out)?),
        Command::Poincare => ("poincare", poincare(cfg, &ev, &mut out)?),
        Command::GreensTable => ("greens-table", greens_table(cfg, &ev, &mut out)?),
        Command::Auto => unreachable!(),
    };
    let report = RunReport {
        command: name,
        metric: metric.label().to_string(),
        config: cfg.clone(),
        output_dir: out.root().to_path_buf(),
        files: out.written().to_vec(),
        summary,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    out.json("run_report.json", &report)?;
    Ok(report)
}

fn simulate(cfg: &ScenarioConfig, ev: &GreensEvaluator, out: &mut OutputDir) -> Result<Value, CliError> {
    let st = cfg.vortex_state()?;
    let i = &cfg.integrator;
    let mut opts = TrajectoryOptions::new(i.tol, i.sample_interval);
    if let Some(n) = i.max_steps {
        opts.max_steps = n;
    }
    let traj = integrate_trajectory_with(ev, &st, i.t_end, &opts, |_| Ok(Control::Continue))?;

    out.csv(
        "trajectory.csv",
        &position_header(st.len(), &["t"]),
        traj.samples.iter().map(|s| {
            let mut row = vec![s.t];
            row.extend(s.positions.iter().flat_map(|p| p.to_array()));
            row
        }),
    )?;
    let d = &traj.diagnostics;
    let series: Vec<Value> = traj
        .samples
        .iter()
        .map(|s| json!({ "t": s.t, "hamiltonian": s.hamiltonian, "momentum": s.momentum }))
        .collect();
    let diagnostics = json!({
        "n_vortices": st.len(),
        "strengths": st.strengths(),
        "h_initial": d.h_initial,
        "h_final": d.h_final,
        "max_abs_dh": d.max_abs_dh,
        "max_rel_dh": d.max_rel_dh,
        "energy_contract_ok": d.energy_contract_ok,
        "momentum_initial": d.momentum_initial,
        "momentum_final": d.momentum_final,
        "max_momentum_drift": d.max_momentum_drift,
        "max_norm_error": d.max_norm_error,
        "max_projection_correction": d.max_projection_correction,
        "steps_accepted": d.steps_accepted,
        "steps_rejected": d.steps_rejected,
        "rhs_evaluations": d.rhs_evaluations,
        "series": series,
    });
    out.json("diagnostics.json", &diagnostics)?;
    Ok(json!({
        "samples": traj.samples.len(),
        "max_rel_dh": d.max_rel_dh,
        "max_momentum_drift": d.max_momentum_drift,
        "energy_contract_ok": d.energy_contract_ok,
    }))
}

fn simulate_mass(cfg: &ScenarioConfig, ev: &GreensEvaluator, out: &mut OutputDir) -> Result<Value, CliError> {
    let st = cfg.mass_state(ev.metric())?;
    let i = &cfg.integrator;
    let opts = MassOptions {
        robin_self_term: i.robin_self_term,
    };
    let run = integrate_mass_vortices(ev, &st, i.t_end, i.tol, i.sample_interval, opts)?;
    let n = st.len();
    out.csv(
        "trajectory.csv",
        &position_header(n, &["t"]),
        run.samples.iter().map(|s| {
            let mut row = vec![s.t];
            row.extend(s.positions.iter().flat_map(|p| p.to_array()));
            row
        }),
    )?;
    let mut header = vec!["t".to_string()];
    for k in 1..=n {
        header.extend(["px", "py", "pz"].iter().map(|c| format!("{c}{k}")));
    }
    header.push("energy".into());
    out.csv(
        "momenta.csv",
        &header,
        run.samples.iter().map(|s| {
            let mut row = vec![s.t];
            row.extend(s.momenta.iter().flat_map(|p| [p.x, p.y, p.z]));
            row.push(s.energy);
            row
        }),
    )?;
    let diagnostics = json!({
        "n_vortices": n,
        "masses": st.masses,
        "strengths": st.strengths,
        "robin_self_term": i.robin_self_term,
        "energy_initial": run.energy_initial,
        "energy_final": run.samples.last().map(|s| s.energy),
        "max_energy_drift": run.max_energy_drift,
        "steps_accepted": run.steps_accepted,
        "steps_rejected": run.steps_rejected,
    });
    out.json("diagnostics.json", &diagnostics)?;
    Ok(json!({ "samples": run.samples.len(), "max_energy_drift": run.max_energy_drift }))
}

fn dipole(cfg: &ScenarioConfig, ev: &GreensEvaluator, out: &mut OutputDir) -> Result<Value, CliError> {
    let Experiment::Dipole {
        lat,
        lon,
        heading,
        epsilons,
        samples,
    } = &cfg.experiment
    else {
        return Err(CliError::Config("dipole-test needs [experiment] kind = \"dipole\"".into()));
    };
    let s0 = SpherePoint::from_lat_lon_deg(*lat, *lon);
    let settings = DipoleSettings {
        t_end: cfg.integrator.t_end,
        tol: cfg.integrator.tol,
        samples: *samples,
    };
    let report = dipole_sweep(ev, &s0, &heading_vector(&s0, *heading), epsilons, &settings)?;
    let cols = ["epsilon", "strength", "initial_speed", "max_deviation", "max_plane_distance"];
    out.csv(
        "dipole_runs.csv",
        &cols.map(String::from),
        report
            .runs
            .iter()
            .map(|r| vec![r.epsilon, r.strength, r.initial_speed, r.max_deviation, r.max_plane_distance]),
    )?;
    let cols = ["epsilon", "t", "cx", "cy", "cz", "gx", "gy", "gz"];
    out.csv(
        "dipole_tracks.csv",
        &cols.map(String::from),
        report.runs.iter().flat_map(|r| {
            r.track.iter().map(move |(t, c, g)| {
                let mut row = vec![r.epsilon, *t];
                row.extend(c.to_array());
                row.extend(g.to_array());
                row
            })
        }),
    )?;
    let runs: Vec<Value> = report
        .runs
        .iter()
        .map(|r| {
            json!({
                "epsilon": r.epsilon,
                "strength": r.strength,
                "initial_speed": r.initial_speed,
                "max_deviation": r.max_deviation,
                "max_plane_distance": r.max_plane_distance,
            })
        })
        .collect();
    let summary = json!({ "fitted_order": report.fitted_order, "runs": runs });
    out.json("dipole.json", &summary)?;
    Ok(summary)
}

fn poincare(cfg: &ScenarioConfig, ev: &GreensEvaluator, out: &mut OutputDir) -> Result<Value, CliError> {
    let Experiment::Poincare {
        level,
        crossing,
        epsilon,
        heading,
        lon,
        latitudes,
        fourier_modes,
    } = &cfg.experiment
    else {
        return Err(CliError::Config("poincare needs [experiment] kind = \"poincare\"".into()));
    };
    let family = latitudes
        .iter()
        .map(|lat| {
            let s0 = SpherePoint::from_lat_lon_deg(*lat, *lon);
            dipole_initial_state(ev.metric(), &s0, &heading_vector(&s0, *heading), *epsilon, cfg.integrator.tol * 0.1)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let spec = SectionSpec {
        level: *level,
        direction: (*crossing).into(),
    };
    let record = poincare_section(ev, &family, &spec, cfg.integrator.t_end, cfg.integrator.tol)?;
    let mut header: Vec<String> = ["trajectory", "t", "lambda", "q", "hamiltonian", "residual"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(position_header(2, &[]));
    out.csv(
        "section.csv",
        &header,
        record.crossings.iter().map(|c| {
            let mut row = vec![c.trajectory as f64, c.t, c.lambda, c.q, c.hamiltonian, c.residual];
            row.extend(c.positions.iter().flat_map(|p| p.to_array()));
            row
        }),
    )?;
    let summary = json!({
        "level": level,
        "crossing": crossing,
        "crossings": record.crossings.len(),
        "initial_hamiltonians": record.initial_hamiltonians,
        "max_h_deviation": record.max_h_deviation,
        "max_residual": record.crossings.iter().map(|c| c.residual).fold(0.0, f64::max),
        "closed_curve_deviation": closed_curve_deviation(&record, *fourier_modes),
    });
    out.json("section.json", &summary)?;
    Ok(summary)
}

fn greens_table(cfg: &ScenarioConfig, ev: &GreensEvaluator, out: &mut OutputDir) -> Result<Value, CliError> {
    let Experiment::GreensTable { grid } = &cfg.experiment else {
        return Err(CliError::Config("greens-table needs [experiment] kind = \"greens-table\"".into()));
    };
    let m: &ConformalMetric = ev.metric();
    let nodes = SphereGrid::new(*grid);
    let cols = ["lat", "lon", "h", "u", "robin", "curvature"];
    out.csv(
        "greens_table.csv",
        &cols.map(String::from),
        nodes.points().map(|p| {
            let (lat, lon) = p.lat_lon_deg();
            vec![lat, lon, m.h(&p), ev.u_value(&p), ev.robin(&p), m.gaussian_curvature(&p)]
        }),
    )?;
    out.text("ln_h.csv", &m.ln_h_coeffs().to_csv("ln_h"))?;
    let robin: Vec<f64> = m.grid().points().map(|p| ev.robin(&p)).collect();
    out.text("robin.csv", &m.grid().analyze(&robin).to_csv("robin"))?;
    let summary = json!({
        "total_area": m.total_area(),
        "c_tilde": m.c_tilde(),
        "robin_constant": ev.robin_constant(),
        "steiner_residual": ev.steiner_residual(),
        "table_degree": grid,
    });
    out.json("greens.json", &summary)?;
    Ok(summary)
}
