//! `study.csv`: one row per mesh, fixed column order.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use stvem::adaptivity::StudyRow;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub step: usize,
    #[serde(rename = "N_dofs")]
    pub n_dofs: usize,
    #[serde(rename = "EY")]
    pub ey: f64,
    #[serde(rename = "EN")]
    pub en: Option<f64>,
    #[serde(rename = "EU")]
    pub eu: f64,
    #[serde(rename = "EX")]
    pub ex: Option<f64>,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub eta4: f64,
    pub eta5: f64,
    pub eta: f64,
    pub effectivity: f64,
    pub n_elements: usize,
    pub n_slabs: usize,
    pub n_ref_elements: usize,
    /// Left empty unless timing was requested, so that repeated runs
    /// produce identical files.
    pub seconds: Option<f64>,
}

pub const COLUMNS: [&str; 17] = [
    "step",
    "N_dofs",
    "EY",
    "EN",
    "EU",
    "EX",
    "eta1",
    "eta2",
    "eta3",
    "eta4",
    "eta5",
    "eta",
    "effectivity",
    "n_elements",
    "n_slabs",
    "n_ref_elements",
    "seconds",
];

impl CsvRow {
    pub fn from_study(r: &StudyRow, timing: bool) -> Self {
        let [eta1, eta2, eta3, eta4, eta5] = r.eta_parts;
        Self {
            step: r.step,
            n_dofs: r.n_dofs,
            ey: r.ey,
            en: r.en,
            eu: r.eu,
            ex: r.ex,
            eta1,
            eta2,
            eta3,
            eta4,
            eta5,
            eta: r.eta,
            effectivity: r.effectivity,
            n_elements: r.n_elements,
            n_slabs: r.n_slabs,
            n_ref_elements: r.n_ref_elements,
            seconds: timing.then_some(r.seconds),
        }
    }
}

pub fn write_csv(rows: &[CsvRow], w: impl Write) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv(r: impl Read) -> Result<Vec<CsvRow>, CliError> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != COLUMNS {
        return Err(CliError::config("csv", format!("unexpected header {header:?}")));
    }
    rd.deserialize().map(|r| r.map_err(CliError::from)).collect()
}
