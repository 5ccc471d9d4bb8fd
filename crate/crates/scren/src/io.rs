//! JSON serialization of PCS state files, verification reports and
//! density matrices. Serialization is `f64` only; emitted floats use the
//! shortest representation that parses back to the identical value.
//!
//! Parties are 0-based throughout the API; serialized reports label them
//! 1-based.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::SubsystemLayout;
use crate::linalg::DensityMatrix;
use crate::monogamy::MonogamyReport;
use crate::states::{PcsParams, PcsState, WClassCoefficients};

/// On-disk form of a PCS state: coefficient row `i` is a party, column
/// `j-1` the level-`j` amplitude as `[re, im]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub n: usize,
    pub d: usize,
    pub a: Vec<Vec<[f64; 2]>>,
    pub p: f64,
    pub lambda: f64,
}

impl StateFile {
    pub fn from_pcs(pcs: &PcsState<f64>) -> Self {
        let a = (0..pcs.n())
            .map(|i| {
                (1..pcs.d())
                    .map(|j| {
                        let c = pcs.coeffs().coeff(i, j);
                        [c.re, c.im]
                    })
                    .collect()
            })
            .collect();
        Self {
            n: pcs.n(),
            d: pcs.d(),
            a,
            p: pcs.params().p(),
            lambda: pcs.params().lam(),
        }
    }

    pub fn to_pcs(&self) -> Result<PcsState<f64>> {
        if self.a.len() != self.n {
            return Err(Error::MalformedState(format!(
                "coefficient matrix has {} rows, header says n = {}",
                self.a.len(),
                self.n
            )));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() + 1 != self.d {
                return Err(Error::MalformedState(format!(
                    "row {} has {} columns, header says d = {}",
                    i + 1,
                    row.len(),
                    self.d
                )));
            }
        }
        let a = DMatrix::from_fn(self.n, self.d - 1, |i, j| {
            Complex::new(self.a[i][j][0], self.a[i][j][1])
        });
        Ok(PcsState::new(
            WClassCoefficients::new(a)?,
            PcsParams::new(self.p, self.lambda)?,
        ))
    }
}

/// Parses a PCS state from its JSON form.
pub fn read_state(json: &str) -> Result<PcsState<f64>> {
    let file: StateFile =
        serde_json::from_str(json).map_err(|e| Error::MalformedState(e.to_string()))?;
    file.to_pcs()
}

/// Serializes a PCS state to its JSON form.
pub fn write_state(pcs: &PcsState<f64>) -> String {
    serde_json::to_string_pretty(&StateFile::from_pcs(pcs)).expect("state files serialize")
}

/// On-disk form of a [`MonogamyReport`]; term parties are 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub claim: String,
    pub lhs: f64,
    pub terms: Vec<ReportTerm>,
    pub residual: f64,
    pub pass: bool,
    pub tolerance: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportTerm {
    pub parties: Vec<usize>,
    pub m: usize,
    pub value: f64,
    pub method: String,
}

impl ReportFile {
    pub fn from_report(report: &MonogamyReport<f64>) -> Self {
        Self {
            claim: report.claim.as_str().to_string(),
            lhs: report.lhs,
            terms: report
                .terms
                .iter()
                .map(|t| ReportTerm {
                    parties: t.parties.iter().map(|&p| p + 1).collect(),
                    m: t.m,
                    value: t.value,
                    method: t.method.as_str().to_string(),
                })
                .collect(),
            residual: report.residual,
            pass: report.pass,
            tolerance: report.tolerance,
            seed: report.seed,
        }
    }
}

/// Serializes a report to its JSON form.
pub fn write_report(report: &MonogamyReport<f64>) -> String {
    serde_json::to_string_pretty(&ReportFile::from_report(report)).expect("reports serialize")
}

/// Parses a report file (for tooling that post-processes reports).
pub fn read_report(json: &str) -> Result<ReportFile> {
    serde_json::from_str(json).map_err(|e| Error::MalformedState(e.to_string()))
}

/// On-disk form of a density matrix: row-major entries as `[re, im]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityFile {
    pub dims: Vec<usize>,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl DensityFile {
    pub fn from_density(rho: &DensityMatrix<f64>) -> Self {
        let m = rho.matrix();
        let entries = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        Self {
            dims: rho.layout().dims().to_vec(),
            entries,
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix<f64>> {
        let layout = SubsystemLayout::new(self.dims.clone())?;
        let dim = layout.total_dim();
        if self.entries.len() != dim || self.entries.iter().any(|r| r.len() != dim) {
            return Err(Error::MalformedState(format!(
                "entry block is not {dim}x{dim}"
            )));
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| {
            Complex::new(self.entries[i][j][0], self.entries[i][j][1])
        });
        DensityMatrix::new(layout, m)
    }
}

/// Serializes a density matrix to its JSON form.
pub fn write_density(rho: &DensityMatrix<f64>) -> String {
    serde_json::to_string_pretty(&DensityFile::from_density(rho)).expect("densities serialize")
}

/// Parses a density matrix from its JSON form.
pub fn read_density(json: &str) -> Result<DensityMatrix<f64>> {
    let file: DensityFile =
        serde_json::from_str(json).map_err(|e| Error::MalformedState(e.to_string()))?;
    file.to_density()
}
