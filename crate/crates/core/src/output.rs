//! Machine-readable run outputs: diagnostics/snapshot CSV files and the
//! run_meta summary. All files are written atomically (temp file + rename)
//! and re-running with the same configuration overwrites deterministically.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::{ConvergenceResult, EntropyStudyResult, RunConfig};
use crate::dgsem::{GridFunction, Semidiscretization};
use crate::diagnostics::DiagnosticSample;
use crate::scenarios::Scenario;
use crate::time::{RunStatus, TimeLoopConfig};
use crate::Result;

/// Writes `content` to `path` atomically.
pub fn atomic_write(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub const DIAGNOSTICS_HEADER: &str =
    "t,dt,S_total,dS_dt,divB_L2,divB_Linf,Bp2_norm,momentum_x,momentum_y,momentum_z,energy_total";

/// Formats one diagnostics CSV row.
pub fn diagnostics_row(s: &DiagnosticSample) -> String {
    format!(
        "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
        s.t,
        s.dt,
        s.entropy,
        s.entropy_rate,
        s.div_b_l2,
        s.div_b_linf,
        s.poloidal_energy,
        s.momentum[0],
        s.momentum[1],
        s.momentum[2],
        s.total_energy
    )
}

pub fn write_diagnostics_rows(dir: &Path, rows: &[String]) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 200 + 128);
    text.push_str(DIAGNOSTICS_HEADER);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    atomic_write(&dir.join("diagnostics.csv"), &text)
}

/// Flat node table: element id, coordinates, then the state components in
/// the canonical layout.
pub fn write_snapshot(
    dir: &Path,
    step: usize,
    sd: &Semidiscretization,
    u: &GridFunction,
) -> Result<()> {
    let np = sd.basis.n_nodes();
    let npy = if sd.mesh.dimension == 2 { np } else { 1 };
    let names = sd.species.variable_names();
    let mut text = String::new();
    text.push_str("element,x,y");
    for n in &names {
        text.push(',');
        text.push_str(n);
    }
    text.push('\n');
    for e in 0..u.n_elements {
        for j in 0..npy {
            for i in 0..np {
                let (x, y) = sd.node_coords(e, i, j);
                let _ = write!(text, "{e},{x:.17e},{y:.17e}");
                for v in u.node(e, i + np * j) {
                    let _ = write!(text, ",{v:.17e}");
                }
                text.push('\n');
            }
        }
    }
    atomic_write(&dir.join(format!("snapshot_{step}.csv")), &text)
}

/// Fully resolved run description, including the wave-speed and cleaning
/// speed definitions the results depend on.
pub fn write_run_meta(
    dir: &Path,
    cfg: &RunConfig,
    sd: &Semidiscretization,
    tcfg: &TimeLoopConfig,
    elements: usize,
    status: &RunStatus,
) -> Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "version = miondg {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "scenario = {}", cfg.scenario);
    let _ = writeln!(text, "degree = {}", cfg.degree);
    let _ = writeln!(text, "elements_per_direction = {elements}");
    let _ = writeln!(text, "solver = {}", cfg.solver.name());
    let _ = writeln!(text, "volume_kernels = {}", sd.volume.id());
    let _ = writeln!(text, "surface_kernels = {}", sd.surface.id());
    let _ = writeln!(text, "glm_enabled = {}", sd.glm.enabled);
    let _ = writeln!(text, "glm_nu = {}", tcfg.nu);
    let _ = writeln!(text, "cfl = {}", tcfg.cfl);
    let _ = writeln!(text, "t_end = {}", tcfg.t_end);
    let _ = writeln!(text, "diagnostics_every = {}", tcfg.diagnostics_every);
    let _ = writeln!(text, "snapshot_every = {}", tcfg.snapshot_every);
    let _ = writeln!(text, "seed = {}", cfg.seed);
    let _ = writeln!(
        text,
        "lambda_max = max_sides(max_k v_k.n) + max_sides(c_f); c_f with b = B/sqrt(rho_total)"
    );
    let _ = writeln!(
        text,
        "c_h = nu/dt * CFL*h/(2(N+1)), recomputed once per step after clamping dt to t_end"
    );
    match status {
        RunStatus::Completed => {
            let _ = writeln!(text, "status = completed");
        }
        RunStatus::Aborted { time, step, reason } => {
            let _ = writeln!(text, "status = aborted");
            let _ = writeln!(text, "abort_time = {time}");
            let _ = writeln!(text, "abort_step = {step}");
            let _ = writeln!(text, "abort_reason = {reason}");
        }
    }
    atomic_write(&dir.join("run_meta"), &text)
}

/// errors.csv: one row per resolution per variable, followed by EOC and
/// mean-EOC rows.
pub fn write_convergence_csv(
    dir: &Path,
    scenario: &Scenario,
    result: &ConvergenceResult,
) -> Result<()> {
    let names = scenario.species.variable_names();
    let mut text = String::from("row,elements");
    for n in &names {
        let _ = write!(text, ",{n}");
    }
    text.push('\n');
    for (r, ne) in result.elements.iter().enumerate() {
        let _ = write!(text, "error,{ne}");
        for v in &result.errors[r] {
            let _ = write!(text, ",{v:.8e}");
        }
        text.push('\n');
        if r > 0 {
            let _ = write!(text, "eoc,{ne}");
            for v in &result.eocs[r - 1] {
                let _ = write!(text, ",{v:.4}");
            }
            text.push('\n');
        }
    }
    let _ = write!(text, "mean_eoc,");
    for v in &result.mean_eocs {
        let _ = write!(text, ",{v:.4}");
    }
    text.push('\n');
    atomic_write(&dir.join("errors.csv"), &text)
}

pub fn write_entropy_study_csv(dir: &Path, result: &EntropyStudyResult) -> Result<()> {
    let mut text = String::from("cfl,S_initial,S_final,delta_S,max_dS_dt\n");
    for row in &result.rows {
        let _ = writeln!(
            text,
            "{},{:.17e},{:.17e},{:.17e},{:.17e}",
            row.cfl,
            row.entropy_initial,
            row.entropy_final,
            row.entropy_final - row.entropy_initial,
            row.max_rate
        );
    }
    let _ = writeln!(text, "# fitted |delta_S| ~ CFL^p slope: p = {:.4}", result.slope);
    atomic_write(&dir.join("entropy_study.csv"), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_overwrites() {
        let dir = std::env::temp_dir().join("miondg-output-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("file.txt");
        atomic_write(&path, "one").unwrap();
        atomic_write(&path, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn diagnostics_row_has_all_columns() {
        let s = DiagnosticSample {
            t: 1.0,
            dt: 0.1,
            entropy: -2.0,
            entropy_rate: 1e-15,
            div_b_l2: 0.0,
            div_b_linf: 0.0,
            poloidal_energy: 1.0,
            momentum: [0.1, 0.2, 0.3],
            total_energy: 5.0,
        };
        let row = diagnostics_row(&s);
        assert_eq!(row.split(',').count(), DIAGNOSTICS_HEADER.split(',').count());
    }
}
