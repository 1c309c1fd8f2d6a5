//! JSON encodings for operators, point transforms and rational matrices.
//!
//! Every expression is stored as a string in the expression grammar, printed
//! in canonical term order, so equal objects serialize to identical bytes.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{RatFn, Rational};
use crate::diffop::{DiffOp, OperatorMatrix};
use crate::error::{Error, Result};
use crate::expr::{parse_diffpoly, parse_ratfn};
use crate::jet::{DiffPoly, Space};
use crate::linalg::{QMatrix, RMatrix};
use crate::tensor::Tensor;
use crate::transform::PointTransform;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub dx: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub coordinates: Vec<String>,
    pub entries: Vec<Vec<Vec<TermJson>>>,
}

/// A point transform given by the source coordinates as functions of the
/// target ones, optionally with the forward map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformJson {
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub source_in_target: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_in_source: Option<Vec<String>>,
}

fn located(e: Error, what: &str) -> Error {
    match e {
        Error::Parse { pos, msg } => Error::Invalid(format!("{what}, column {pos}: {msg}")),
        other => Error::Invalid(format!("{what}: {other}")),
    }
}

pub fn operator_to_json(p: &OperatorMatrix) -> OperatorJson {
    let entries = (0..p.rows())
        .map(|i| {
            (0..p.cols())
                .map(|j| {
                    p.get(i, j)
                        .coeffs()
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(k, c)| TermJson { coeff: c.to_string(), dx: k })
                        .collect()
                })
                .collect()
        })
        .collect();
    OperatorJson { coordinates: p.space().names().to_vec(), entries }
}

/// Reads an operator; the coordinate list defines the space.
pub fn operator_from_json(j: &OperatorJson, jet_bound: usize) -> Result<OperatorMatrix> {
    let space = Space::new(j.coordinates.iter().cloned(), jet_bound);
    operator_in_space(j, &space)
}

/// Reads an operator into an existing space, which must have the same
/// coordinate names.
pub fn operator_in_space(j: &OperatorJson, space: &Arc<Space>) -> Result<OperatorMatrix> {
    if j.coordinates != space.names() {
        return Err(Error::Invalid(format!("operator coordinates {:?} differ from {:?}", j.coordinates, space.names())));
    }
    let n = j.entries.len();
    if n == 0 || j.entries.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("operator entries must form a non-empty square array".into()));
    }
    let mut out = OperatorMatrix::zero(space, n, n);
    for (i, row) in j.entries.iter().enumerate() {
        for (k, terms) in row.iter().enumerate() {
            let mut op = DiffOp::zero(space);
            for (t, term) in terms.iter().enumerate() {
                let c = parse_diffpoly(space, &term.coeff)
                    .map_err(|e| located(e, &format!("entries[{i}][{k}][{t}].coeff")))?;
                op = op.add(&DiffOp::term(c, term.dx));
            }
            out.set(i, k, op);
        }
    }
    Ok(out)
}

pub fn transform_from_json(j: &TransformJson, jet_bound: usize) -> Result<PointTransform> {
    let source = Space::new(j.source.iter().cloned(), jet_bound);
    let target = Space::new(j.target.iter().cloned(), jet_bound);
    transform_between(j, &source, &target)
}

/// Reads a transform between existing spaces.
pub fn transform_between(j: &TransformJson, source: &Arc<Space>, target: &Arc<Space>) -> Result<PointTransform> {
    if j.source != source.names() || j.target != target.names() {
        return Err(Error::Invalid("transform coordinates differ from the operator coordinates".into()));
    }
    let back: Result<Vec<RatFn>> = j
        .source_in_target
        .iter()
        .enumerate()
        .map(|(i, e)| parse_ratfn(target, e).map_err(|err| located(err, &format!("source_in_target[{i}]"))))
        .collect();
    let fwd = match &j.target_in_source {
        Some(v) => Some(
            v.iter()
                .enumerate()
                .map(|(i, e)| parse_ratfn(source, e).map_err(|err| located(err, &format!("target_in_source[{i}]"))))
                .collect::<Result<Vec<RatFn>>>()?,
        ),
        None => None,
    };
    PointTransform::new(source, target, back?, fwd)
}

pub fn transform_to_json(t: &PointTransform) -> TransformJson {
    TransformJson {
        source: t.source().names().to_vec(),
        target: t.target().names().to_vec(),
        source_in_target: t.source_in_target().iter().map(|f| f.to_string()).collect(),
        target_in_source: t.target_in_source().map(|v| v.iter().map(|f| f.to_string()).collect()),
    }
}

pub fn rmatrix_to_json(m: &RMatrix) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

pub fn rmatrix_from_json(space: &Arc<Space>, m: &[Vec<String>]) -> Result<RMatrix> {
    m.iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, e)| parse_ratfn(space, e).map_err(|err| located(err, &format!("matrix entry [{i}][{j}]"))))
                .collect()
        })
        .collect()
}

pub fn qmatrix_from_json(m: &[Vec<String>]) -> Result<QMatrix> {
    m.iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, e)| {
                    e.parse::<Rational>().map_err(|msg| Error::Invalid(format!("matrix entry [{i}][{j}]: {msg}")))
                })
                .collect()
        })
        .collect()
}

pub fn qmatrix_to_json(m: &QMatrix) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

/// Rank-3 tensor as nested arrays `t[i][j][k]`.
pub fn tensor3_to_json(t: &Tensor) -> Vec<Vec<Vec<String>>> {
    let n = t.dim();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| t.get(&[i, j, k]).to_string()).collect()).collect()).collect()
}

pub fn covector_to_json(v: &[DiffPoly]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::DEFAULT_JET_BOUND;

    #[test]
    fn operator_round_trip() {
        let s = Space::new(["u1", "u2"], DEFAULT_JET_BOUND);
        let p = OperatorMatrix::from_fn(&s, 2, 2, |i, j| {
            let c = parse_diffpoly(&s, "u1_x*u2/(u1-u2)").unwrap();
            DiffOp::term(c, i + j).add(&DiffOp::dx(&s, 3))
        });
        let j = operator_to_json(&p);
        let text = serde_json::to_string(&j).unwrap();
        let back: OperatorJson = serde_json::from_str(&text).unwrap();
        assert_eq!(operator_from_json(&back, DEFAULT_JET_BOUND).unwrap(), p);
    }

    #[test]
    fn parse_errors_name_the_entry() {
        let j = OperatorJson {
            coordinates: vec!["u".into()],
            entries: vec![vec![vec![TermJson { coeff: "u+*2".into(), dx: 1 }]]],
        };
        let err = operator_from_json(&j, DEFAULT_JET_BOUND).unwrap_err();
        assert!(err.to_string().contains("entries[0][0][0].coeff"), "{err}");
    }
}
