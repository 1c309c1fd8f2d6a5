//! System files: a pair of operators, optionally in non-flat coordinates
//! with the point transformation to the flat coordinates of `A₁`.
//!
//! ```json
//! {
//!   "transform": {"source": [...], "target": [...], "source_in_target": [...]},
//!   "K": [["1", "0"], ["0", "1"]],
//!   "A1": {"coordinates": [...], "entries": [[[{"coeff": "1", "dx": 1}], ...]]},
//!   "A2": {...},
//!   "hamiltonian": "u1*u2",
//!   "R": [["0", "..."], ["...", "0"]]
//! }
//! ```
//!
//! Every key is optional; each command says which ones it needs. The
//! Hamiltonian density and `R` are written in the flat coordinates.

use std::path::Path;
use std::sync::Arc;

use lagrep::diffop::OperatorMatrix;
use lagrep::expr::parse_diffpoly;
use lagrep::jet::{DiffPoly, Space};
use lagrep::json::{operator_in_space, qmatrix_from_json, rmatrix_from_json, transform_between, OperatorJson, TransformJson};
use lagrep::linalg::{QMatrix, RMatrix};
use lagrep::pipeline::BiHamiltonianSystem;
use lagrep::transform::{change_coordinates, PointTransform};
use lagrep::{Error, Result};
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize)]
pub struct SystemFile {
    #[serde(default)]
    pub transform: Option<TransformJson>,
    #[serde(rename = "K", default)]
    pub k: Option<Vec<Vec<String>>>,
    #[serde(rename = "A1", default)]
    pub a1: Option<OperatorJson>,
    #[serde(rename = "A2", default)]
    pub a2: Option<OperatorJson>,
    #[serde(default)]
    pub hamiltonian: Option<String>,
    #[serde(rename = "R", default)]
    pub r: Option<Vec<Vec<String>>>,
}

/// Which operator of the pair a command acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    A1,
    A2,
}

impl Which {
    pub fn label(self) -> &'static str {
        match self {
            Which::A1 => "A1",
            Which::A2 => "A2",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Loaded {
    /// Coordinates of the operators as written in the file.
    pub source: Arc<Space>,
    /// Flat coordinates; equal to `source` when there is no transform.
    pub flat: Arc<Space>,
    pub transform: Option<PointTransform>,
    pub k: Option<QMatrix>,
    pub a1: Option<OperatorMatrix>,
    pub a2: Option<OperatorMatrix>,
    pub hamiltonian: Option<DiffPoly>,
    pub r: Option<RMatrix>,
}

pub fn read_file(path: &Path) -> Result<SystemFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

pub fn fixture(name: &str) -> Result<SystemFile> {
    match name {
        "wdvv3" => serde_json::from_str(lagrep::wdvv::FIXTURE_JSON).map_err(|e| Error::Invalid(format!("fixture: {e}"))),
        other => Err(Error::Invalid(format!("unknown fixture `{other}`; available: wdvv3"))),
    }
}

impl SystemFile {
    pub fn load(&self, jet_bound: usize) -> Result<Loaded> {
        let names = match (&self.a1, &self.a2, &self.transform) {
            (Some(a), _, _) | (None, Some(a), _) => a.coordinates.clone(),
            (None, None, Some(t)) => t.source.clone(),
            (None, None, None) => return Err(Error::Invalid("the file defines no operator".into())),
        };
        let source = Space::new(names, jet_bound);
        let (flat, transform) = match &self.transform {
            Some(t) => {
                let flat = Space::new(t.target.iter().cloned(), jet_bound);
                let pt = transform_between(t, &source, &flat)?;
                (flat, Some(pt))
            }
            None => (source.clone(), None),
        };
        let op = |j: &Option<OperatorJson>, label: &str| -> Result<Option<OperatorMatrix>> {
            j.as_ref()
                .map(|j| operator_in_space(j, &source).map_err(|e| Error::Invalid(format!("{label}: {e}"))))
                .transpose()
        };
        let a1 = op(&self.a1, "A1")?;
        let a2 = op(&self.a2, "A2")?;
        let k = self.k.as_ref().map(|k| qmatrix_from_json(k).map_err(|e| Error::Invalid(format!("K: {e}")))).transpose()?;
        let hamiltonian = self
            .hamiltonian
            .as_ref()
            .map(|h| parse_diffpoly(&flat, h).map_err(|e| Error::Invalid(format!("hamiltonian: {e}"))))
            .transpose()?;
        let r = self.r.as_ref().map(|r| rmatrix_from_json(&flat, r).map_err(|e| Error::Invalid(format!("R: {e}")))).transpose()?;
        Ok(Loaded { source, flat, transform, k, a1, a2, hamiltonian, r })
    }
}

impl Loaded {
    pub fn operator(&self, which: Which) -> Result<&OperatorMatrix> {
        match which {
            Which::A1 => self.a1.as_ref(),
            Which::A2 => self.a2.as_ref(),
        }
        .ok_or_else(|| Error::Invalid(format!("the input has no {}", which.label())))
    }

    /// The operator in the flat coordinates.
    pub fn flat_operator(&self, which: Which) -> Result<OperatorMatrix> {
        let op = self.operator(which)?;
        match &self.transform {
            Some(t) => change_coordinates(op, t),
            None => Ok(op.clone()),
        }
    }

    /// `K` as given, or read off from `A₁` when it is `K ∂_x` in the flat
    /// coordinates.
    pub fn k(&self) -> Result<QMatrix> {
        if let Some(k) = &self.k {
            return Ok(k.clone());
        }
        let a1 = self
            .flat_operator(Which::A1)
            .map_err(|_| Error::Invalid("the input needs either K or A1".into()))?;
        let lead = a1.coeff_matrix(1);
        let k: Option<QMatrix> = lead.iter().map(|r| r.iter().map(|c| c.constant_value()).collect()).collect();
        match k {
            Some(k) if OperatorMatrix::constant(&self.flat, &k, 1) == a1 => Ok(k),
            _ => Err(Error::Invalid("A1 is not of the form K D_x with constant K in the flat coordinates".into())),
        }
    }

    pub fn system(&self) -> Result<BiHamiltonianSystem> {
        let k = self.k()?;
        let a2 = self.operator(Which::A2)?;
        match &self.transform {
            Some(t) => BiHamiltonianSystem::from_source(k, a2, t, self.hamiltonian.clone()),
            None => BiHamiltonianSystem::new(k, a2.clone(), self.hamiltonian.clone()),
        }
    }
}
