//! Study orchestration and on-disk artifacts.
//!
//! `run` writes into the output directory:
//! - `study.csv`, one row per mesh;
//! - `meshes/step_<k>.mesh` in the `stvem-mesh/1` format;
//! - `summary.json` with the fitted rates and the quadrature check.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stvem::adaptivity::{adapt_loop_with, hp_sequence, run_sequence, uniform_sequence, Evaluation, StudyReport};
use stvem::analysis::ExactSolution;
use stvem::mesh::{cartesian_mesh, write_mesh, SpaceTimeMesh};

use crate::config::{RunConfig, Study};
use crate::rates::{fit_rates, RateSummary};
use crate::table::{write_csv, CsvRow};
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: String,
    pub test_case: u32,
    pub alpha: Option<f64>,
    pub rows: usize,
    /// Absent with fewer than three rows.
    pub rates: Option<RateSummary>,
    /// Relative change of E^Y on the final mesh under extra quadrature.
    pub quadrature_drift: f64,
    pub final_n_dofs: usize,
}

fn mesh_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("step_{step}.mesh"))
}

fn dump(mesh: &SpaceTimeMesh, path: &Path) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_mesh(mesh, &mut w)?;
    w.flush()?;
    Ok(())
}

/// The prescribed meshes of a non-adaptive study; for adaptive studies the
/// initial mesh.
pub fn meshes_of(study: &Study, exact: &ExactSolution) -> Result<Vec<SpaceTimeMesh>, CliError> {
    Ok(match study {
        Study::Uniform { nx, nt, levels, p } => uniform_sequence(exact, *nx, *nt, *levels, *p)?,
        Study::Hp { grading, levels } => hp_sequence(exact, *grading, *levels)?,
        Study::Single { nx, nt, p } => vec![cartesian_mesh(exact.omega, exact.t_final, *nx, *nt, *p)?],
        Study::Adaptive(cfg) => vec![cartesian_mesh(exact.omega, exact.t_final, 1, 1, cfg.degree)?],
    })
}

/// Writes the meshes a study starts from without solving anything.
pub fn mesh_dump(cfg: &RunConfig) -> Result<usize, CliError> {
    let study = cfg.study()?;
    let exact = cfg.exact()?;
    let dir = cfg.output_dir.join("meshes");
    fs::create_dir_all(&dir)?;
    let meshes = meshes_of(&study, &exact)?;
    for (i, m) in meshes.iter().enumerate() {
        dump(m, &mesh_path(&dir, i + 1))?;
    }
    Ok(meshes.len())
}

/// Runs the configured study and writes its artifacts.
pub fn run(cfg: &RunConfig) -> Result<(Vec<CsvRow>, Summary), CliError> {
    let study = cfg.study()?;
    let exact = cfg.exact()?;
    let dir = cfg.output_dir.join("meshes");
    fs::create_dir_all(&dir)?;
    let opts = cfg.eval_options();
    let guard = cfg.quadrature.guard_extra;
    let mut drift = 0.0;
    let mut on_mesh = |mesh: &SpaceTimeMesh, ev: &Evaluation, last: bool| -> stvem::Result<()> {
        dump(mesh, &mesh_path(&dir, ev.row.step)).map_err(|e| match e {
            CliError::Io(io) => stvem::StvemError::Io(io),
            other => stvem::StvemError::InvalidMesh(other.to_string()),
        })?;
        if last {
            drift = ev.quadrature_drift(mesh, &exact, opts, guard)?;
        }
        Ok(())
    };
    let report: StudyReport = match &study {
        Study::Adaptive(acfg) => {
            let mesh0 = meshes_of(&study, &exact)?.remove(0);
            adapt_loop_with(acfg, &exact, mesh0, |v| on_mesh(v.mesh, v.eval, v.marked.is_empty()))?.report
        }
        _ => {
            let meshes = meshes_of(&study, &exact)?;
            let n = meshes.len();
            let mut k = 0;
            run_sequence(&meshes, &exact, opts, |m, ev| {
                k += 1;
                on_mesh(m, ev, k == n)
            })?
        }
    };
    let rows: Vec<CsvRow> = report.rows.iter().map(|r| CsvRow::from_study(r, cfg.timing)).collect();
    write_csv(&rows, BufWriter::new(File::create(cfg.output_dir.join("study.csv"))?))?;
    let summary = Summary {
        mode: format!("{:?}", cfg.mode),
        test_case: cfg.test_case,
        alpha: cfg.alpha,
        rows: rows.len(),
        rates: if rows.len() >= 3 { Some(fit_rates(&rows)?) } else { None },
        quadrature_drift: drift,
        final_n_dofs: rows.last().map_or(0, |r| r.n_dofs),
    };
    let mut w = BufWriter::new(File::create(cfg.output_dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut w, &summary).map_err(std::io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok((rows, summary))
}
