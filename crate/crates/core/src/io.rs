//! State files (JSON) and branch tables (CSV with a commented header).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::{Branch, BranchOrigin};
use crate::contour::{ContourError, VortexContourCoeffs};
use crate::solver::{SolveReport, SolverConfig};

pub const STATE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed state file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed branch file: {0}")]
    Csv(#[from] csv::Error),
    #[error("unsupported schema version {found} (expected {expected})")]
    Schema { found: u32, expected: u32 },
    #[error("invalid file contents: {0}")]
    Invalid(String),
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// One solved configuration together with the solver diagnostics.
///
/// Floats are written in shortest round-trip form, so reading a file back
/// reproduces every coefficient bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
    pub b: f64,
    pub m: usize,
    pub omega: f64,
    #[serde(rename = "M")]
    pub modes: usize,
    #[serde(rename = "N")]
    pub nodes: usize,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub residual_max: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trivial: bool,
}

impl StateFile {
    pub fn from_report(omega: f64, report: &SolveReport, config: &SolverConfig, timestamp: bool) -> Self {
        let c = &report.coeffs;
        Self {
            schema_version: STATE_SCHEMA_VERSION,
            created_unix: timestamp.then(unix_now),
            b: c.b,
            m: c.fold,
            omega,
            modes: c.modes(),
            nodes: config.nodes,
            a1: c.a1.clone(),
            a2: c.a2.clone(),
            residual_max: report.residual_max,
            iterations: report.iterations,
            converged: report.converged,
            trivial: report.trivial,
        }
    }

    pub fn coeffs(&self) -> Result<VortexContourCoeffs, ContourError> {
        VortexContourCoeffs::new(self.b, self.m, self.a1.clone(), self.a2.clone())
    }

    pub fn to_json(&self) -> Result<String, IoError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let s: StateFile = serde_json::from_str(text)?;
        if s.schema_version != STATE_SCHEMA_VERSION {
            return Err(IoError::Schema { found: s.schema_version, expected: STATE_SCHEMA_VERSION });
        }
        if s.a1.len() != s.modes || s.a2.len() != s.modes {
            return Err(IoError::Invalid(format!(
                "M = {} but the coefficient arrays have {} and {} entries",
                s.modes,
                s.a1.len(),
                s.a2.len()
            )));
        }
        s.coeffs().map_err(|e| IoError::Invalid(e.to_string()))?;
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        write_text(path, &self.to_json()?)
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        Self::from_json(&read_text(path)?)
    }
}

/// One line of a branch table. The terminated marker has only `omega` and
/// `converged = false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub omega: f64,
    pub distance: Option<f64>,
    pub iterations: Option<usize>,
    pub a1_1: Option<f64>,
    pub a2_1: Option<f64>,
    pub converged: bool,
}

impl BranchRow {
    pub fn terminated(omega: f64) -> Self {
        Self { omega, distance: None, iterations: None, a1_1: None, a2_1: None, converged: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchFile {
    pub created_unix: Option<u64>,
    pub b: f64,
    pub m: usize,
    pub origin: BranchOrigin,
    pub step: f64,
    pub modes: usize,
    pub nodes: usize,
    pub rows: Vec<BranchRow>,
}

impl BranchFile {
    pub fn from_branch(branch: &Branch, config: &SolverConfig, timestamp: bool) -> Self {
        let mut rows: Vec<BranchRow> = branch
            .records
            .iter()
            .map(|r| BranchRow {
                omega: r.omega,
                distance: Some(r.distance),
                iterations: Some(r.report.iterations),
                a1_1: Some(r.report.coeffs.a1[0]),
                a2_1: Some(r.report.coeffs.a2[0]),
                converged: true,
            })
            .collect();
        if let Some(omega) = branch.terminated_at {
            rows.push(BranchRow::terminated(omega));
        }
        Self {
            created_unix: timestamp.then(unix_now),
            b: branch.b,
            m: branch.fold,
            origin: branch.origin,
            step: branch.step,
            modes: config.modes,
            nodes: config.nodes,
            rows,
        }
    }

    pub fn terminated_at(&self) -> Option<f64> {
        self.rows.iter().find(|r| !r.converged).map(|r| r.omega)
    }

    pub fn to_csv(&self) -> Result<String, IoError> {
        let mut out = String::from("# vstates branch\n");
        if let Some(t) = self.created_unix {
            out += &format!("# created_unix={t}\n");
        }
        out += &format!(
            "# b={}\n# m={}\n# origin={}\n# step={}\n# M={}\n# N={}\n",
            self.b, self.m, self.origin, self.step, self.modes, self.nodes
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let body = w.into_inner().map_err(|e| IoError::Invalid(e.to_string()))?;
        out += &String::from_utf8(body).map_err(|e| IoError::Invalid(e.to_string()))?;
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self, IoError> {
        let mut fields = std::collections::HashMap::new();
        for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
            if let Some((k, v)) = line.trim().split_once('=') {
                fields.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        fn get<T: std::str::FromStr>(f: &std::collections::HashMap<String, String>, key: &str) -> Result<T, IoError> {
            f.get(key)
                .ok_or_else(|| IoError::Invalid(format!("missing header field `{key}`")))?
                .parse()
                .map_err(|_| IoError::Invalid(format!("bad header field `{key}`")))
        }
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let rows = reader.deserialize().collect::<Result<Vec<BranchRow>, _>>()?;
        let origin: String = get(&fields, "origin")?;
        Ok(Self {
            created_unix: fields.get("created_unix").and_then(|v| v.parse().ok()),
            b: get(&fields, "b")?,
            m: get(&fields, "m")?,
            origin: origin.parse().map_err(IoError::Invalid)?,
            step: get(&fields, "step")?,
            modes: get(&fields, "M")?,
            nodes: get(&fields, "N")?,
            rows,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        write_text(path, &self.to_csv()?)
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        Self::from_csv(&read_text(path)?)
    }
}
