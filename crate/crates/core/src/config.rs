//! Run configuration: flat INI-style key=value files with section headers,
//! plus the drivers behind the CLI subcommands.

use std::path::{Path, PathBuf};

use crate::dgsem::SolverVariant;
use crate::diagnostics::{eoc, mean_eoc};
use crate::output;
use crate::scenarios::Scenario;
use crate::time::{run, RunEvent, RunStatus, TimeLoopConfig};
use crate::{Result, SolverError};

/// Fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario: String,
    pub degree: usize,
    /// Elements per direction; 0 = use the scenario default.
    pub elements: usize,
    pub solver: SolverVariant,
    pub glm_enabled: bool,
    /// GLM scaling; `None` = scenario default.
    pub nu: Option<f64>,
    pub cfl: Option<f64>,
    pub t_end: Option<f64>,
    pub out_dir: PathBuf,
    pub diagnostics_every: usize,
    pub snapshot_every: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: String::new(),
            degree: 3,
            elements: 0,
            solver: SolverVariant::Es,
            glm_enabled: true,
            nu: None,
            cfl: None,
            t_end: None,
            out_dir: PathBuf::from("out"),
            diagnostics_every: 1,
            snapshot_every: 0,
            seed: 0,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| SolverError::Config(format!("cannot parse '{value}' for key '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "1" | "yes" => Ok(true),
        "false" | "off" | "0" | "no" => Ok(false),
        _ => Err(SolverError::Config(format!(
            "cannot parse '{value}' as a flag for key '{key}'"
        ))),
    }
}

/// Parses the INI-style configuration text. Sections carry the module names:
/// `[scenarios]`, `[sbp-basis-mesh]`, `[dgsem]`, `[time-integration]`,
/// `[cli-runner]`.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_string();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            SolverError::Config(format!("line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        match (section.as_str(), key) {
            ("scenarios", "name") => cfg.scenario = value.to_string(),
            ("sbp-basis-mesh", "degree") => cfg.degree = parse_value(key, value)?,
            ("sbp-basis-mesh", "elements") => cfg.elements = parse_value(key, value)?,
            ("dgsem", "solver") => cfg.solver = SolverVariant::parse(value)?,
            ("dgsem", "glm") => cfg.glm_enabled = parse_bool(key, value)?,
            ("dgsem", "nu") => cfg.nu = Some(parse_value(key, value)?),
            ("time-integration", "cfl") => cfg.cfl = Some(parse_value(key, value)?),
            ("time-integration", "t_end") => cfg.t_end = Some(parse_value(key, value)?),
            ("cli-runner", "out") => cfg.out_dir = PathBuf::from(value),
            ("cli-runner", "diagnostics_every") => {
                cfg.diagnostics_every = parse_value::<usize>(key, value)?.max(1)
            }
            ("cli-runner", "snapshot_every") => cfg.snapshot_every = parse_value(key, value)?,
            ("cli-runner", "seed") => cfg.seed = parse_value(key, value)?,
            _ => {
                return Err(SolverError::Config(format!(
                    "line {}: unknown key '{key}' in section '[{section}]'",
                    lineno + 1
                )))
            }
        }
    }
    if cfg.scenario.is_empty() {
        return Err(SolverError::Config(
            "missing scenario name ([scenarios] name = ...)".into(),
        ));
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Outcome of a single run, as reported by the CLI.
pub struct RunSummary {
    pub exit_code: i32,
    pub aborted_at: Option<(f64, usize)>,
    pub final_entropy_rate_max: f64,
}

fn resolved_time_config(cfg: &RunConfig, sc: &Scenario) -> TimeLoopConfig {
    TimeLoopConfig {
        cfl: cfg.cfl.unwrap_or(sc.cfl),
        t_end: cfg.t_end.unwrap_or(sc.t_end),
        nu: cfg.nu.unwrap_or(sc.glm_nu),
        diagnostics_every: cfg.diagnostics_every,
        snapshot_every: cfg.snapshot_every,
    }
}

/// Executes one simulation, writing `diagnostics.csv`, snapshots and
/// `run_meta` into `out_dir`. Exit code 2 flags an admissibility abort.
pub fn run_single(cfg: &RunConfig) -> Result<RunSummary> {
    let sc = Scenario::by_name(&cfg.scenario)?;
    let elements = if cfg.elements == 0 {
        sc.default_elements
    } else {
        cfg.elements
    };
    let tcfg = resolved_time_config(cfg, &sc);
    let sd = sc.semidiscretization(cfg.degree, elements, cfg.solver, cfg.glm_enabled, tcfg.nu)?;
    let u0 = sc.initial_grid(&sd);

    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut series_rows = Vec::new();
    let out_dir = cfg.out_dir.clone();
    let sd_ref = &sd;
    let result = run(u0, &sd, &tcfg, |event| match event {
        RunEvent::Diagnostic(s) => {
            series_rows.push(output::diagnostics_row(s));
            // append-free: rewrite the whole file atomically per tick
            let _ = output::write_diagnostics_rows(&out_dir, &series_rows);
        }
        RunEvent::Snapshot { step, u, .. } => {
            let _ = output::write_snapshot(&out_dir, step, sd_ref, u);
        }
    })?;

    output::write_diagnostics_rows(&cfg.out_dir, &series_rows)?;
    let (exit_code, aborted_at) = match &result.status {
        RunStatus::Completed => (0, None),
        RunStatus::Aborted { time, step, .. } => (2, Some((*time, *step))),
    };
    output::write_run_meta(&cfg.out_dir, cfg, &sd, &tcfg, elements, &result.status)?;

    let max_rate = result
        .series
        .samples
        .iter()
        .map(|s| s.entropy_rate.abs())
        .fold(0.0, f64::max);
    Ok(RunSummary {
        exit_code,
        aborted_at,
        final_entropy_rate_max: max_rate,
    })
}

/// Per-resolution errors plus EOC rows mirroring the convergence tables.
pub struct ConvergenceResult {
    pub elements: Vec<usize>,
    /// `errors[r][v]`: resolution r, variable v.
    pub errors: Vec<Vec<f64>>,
    /// `eocs[r][v]` between consecutive resolutions.
    pub eocs: Vec<Vec<f64>>,
    pub mean_eocs: Vec<f64>,
}

/// Runs the scenario over a list of resolutions, collecting L2 errors and
/// EOCs against the exact solution.
pub fn run_convergence(cfg: &RunConfig, element_list: &[usize]) -> Result<ConvergenceResult> {
    let sc = Scenario::by_name(&cfg.scenario)?;
    if sc.exact.is_none() {
        return Err(SolverError::Config(format!(
            "scenario '{}' has no exact solution for a convergence study",
            sc.name
        )));
    }
    if element_list.len() < 2 {
        return Err(SolverError::Config(
            "convergence studies need at least two resolutions".into(),
        ));
    }
    let tcfg_base = resolved_time_config(cfg, &sc);
    let mut errors = Vec::new();
    for &ne in element_list {
        let sd = sc.semidiscretization(cfg.degree, ne, cfg.solver, cfg.glm_enabled, tcfg_base.nu)?;
        let u0 = sc.initial_grid(&sd);
        let tcfg = TimeLoopConfig {
            diagnostics_every: usize::MAX,
            snapshot_every: 0,
            ..tcfg_base
        };
        let out = run(u0, &sd, &tcfg, |_| {})?;
        if let RunStatus::Aborted { time, step, reason } = out.status {
            return Err(SolverError::SimulationAborted {
                time,
                step,
                reason: reason.to_string(),
            });
        }
        let exact = sc.exact.as_ref().unwrap().clone();
        let errs = crate::diagnostics::l2_error(
            &out.final_state,
            |x, y, t, out| exact(x, y, t, out),
            tcfg.t_end,
            &sd,
        );
        errors.push(errs);
    }
    let nv = errors[0].len();
    let mut eocs = Vec::new();
    let mut means = Vec::new();
    for v in 0..nv {
        let col: Vec<f64> = errors.iter().map(|row| row[v]).collect();
        let e = eoc(&col, element_list)?;
        means.push(mean_eoc(&e));
        eocs.push(e);
    }
    // transpose eocs to [resolution step][variable]
    let eocs_rows: Vec<Vec<f64>> = (0..element_list.len() - 1)
        .map(|r| (0..nv).map(|v| eocs[v][r]).collect())
        .collect();
    let result = ConvergenceResult {
        elements: element_list.to_vec(),
        errors,
        eocs: eocs_rows,
        mean_eocs: means,
    };
    std::fs::create_dir_all(&cfg.out_dir)?;
    output::write_convergence_csv(&cfg.out_dir, &Scenario::by_name(&cfg.scenario)?, &result)?;
    Ok(result)
}

/// One row of an entropy study.
pub struct EntropyStudyRow {
    pub cfl: f64,
    pub entropy_initial: f64,
    pub entropy_final: f64,
    pub max_rate: f64,
}

pub struct EntropyStudyResult {
    pub rows: Vec<EntropyStudyRow>,
    /// Least-squares slope of `log |dS|` vs `log CFL`.
    pub slope: f64,
}

/// Runs the scenario under a list of CFL numbers and reports the total
/// entropy change and the extremal entropy rate per run.
pub fn run_entropy_study(cfg: &RunConfig, cfls: &[f64]) -> Result<EntropyStudyResult> {
    let sc = Scenario::by_name(&cfg.scenario)?;
    let elements = if cfg.elements == 0 {
        sc.default_elements
    } else {
        cfg.elements
    };
    let mut rows = Vec::new();
    for &cfl in cfls {
        let tcfg = TimeLoopConfig {
            cfl,
            ..resolved_time_config(cfg, &sc)
        };
        let sd = sc.semidiscretization(cfg.degree, elements, cfg.solver, cfg.glm_enabled, tcfg.nu)?;
        let u0 = sc.initial_grid(&sd);
        let out = run(u0, &sd, &tcfg, |_| {})?;
        if let RunStatus::Aborted { time, step, reason } = out.status {
            return Err(SolverError::SimulationAborted {
                time,
                step,
                reason: reason.to_string(),
            });
        }
        let s0 = out.series.samples.first().map(|s| s.entropy).unwrap_or(0.0);
        let s1 = out.series.last().map(|s| s.entropy).unwrap_or(0.0);
        let max_rate = out
            .series
            .samples
            .iter()
            .map(|s| s.entropy_rate)
            .fold(f64::NEG_INFINITY, f64::max);
        rows.push(EntropyStudyRow {
            cfl,
            entropy_initial: s0,
            entropy_final: s1,
            max_rate,
        });
    }
    let slope = fit_log_slope(
        &rows.iter().map(|r| r.cfl).collect::<Vec<_>>(),
        &rows
            .iter()
            .map(|r| (r.entropy_final - r.entropy_initial).abs())
            .collect::<Vec<_>>(),
    );
    std::fs::create_dir_all(&cfg.out_dir)?;
    let result = EntropyStudyResult { rows, slope };
    output::write_entropy_study_csv(&cfg.out_dir, &result)?;
    Ok(result)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..x.len() {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    num / den
}
