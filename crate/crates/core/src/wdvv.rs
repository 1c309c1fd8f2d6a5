//! The WDVV system with three components: the bi-Hamiltonian pair in the
//! coordinates `(a, b, c) = (f_xxx, f_xxt, f_xtt)`, the point transformation
//! to the eigenvalues `u^k` of the x-Lax matrix, and reference values.
//!
//! The data lives in `fixtures/wdvv3.json`. The operators there are checked
//! against the compositional definitions in this module by the tests.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{RatFn, Rational, Vars};
use crate::diffop::{DiffOp, OperatorMatrix};
use crate::error::{Error, Result};
use crate::expr::{parse_diffpoly, parse_ratfn};
use crate::jet::{euler, is_total_divergence, DiffPoly, Space};
use crate::json::{
    operator_in_space, qmatrix_from_json, rmatrix_from_json, transform_between, OperatorJson, TransformJson,
};
use crate::linalg::{r_det, r_inverse, QMatrix, RMatrix};
use crate::tensor::Tensor;
use crate::transform::{change_coordinates, PointTransform};

/// Raw contents of the fixture file.
pub const FIXTURE_JSON: &str = include_str!("../fixtures/wdvv3.json");

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixtureFile {
    pub name: String,
    pub transform: TransformJson,
    #[serde(rename = "K")]
    pub k: Vec<Vec<String>>,
    #[serde(rename = "A1")]
    pub a1: OperatorJson,
    #[serde(rename = "A2")]
    pub a2: OperatorJson,
    pub monge_metric: Vec<Vec<String>>,
    pub lax_x: Vec<Vec<String>>,
    pub lax_t: Vec<Vec<String>>,
    /// Hamiltonian density of the flow in the flat coordinates.
    pub hamiltonian: String,
    /// Density `h₂ = c` generating the same flow through `A₁` in `(a, b, c)`.
    pub hamiltonian_source: String,
    pub expected: ExpectedJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpectedJson {
    pub g: Vec<Vec<String>>,
    pub g_covariant: Vec<Vec<String>>,
    #[serde(rename = "G")]
    pub big_g: Vec<Vec<String>>,
    #[serde(rename = "G_inverse")]
    pub big_g_inverse: Vec<Vec<String>>,
    #[serde(rename = "det_G")]
    pub det_g: String,
    #[serde(rename = "L")]
    pub l: Vec<Vec<Vec<String>>>,
    #[serde(rename = "R0")]
    pub r0: Vec<Vec<String>>,
    pub curvature: String,
    pub signature: [usize; 2],
}

/// Parsed reference values in the flat coordinates.
#[derive(Clone, Debug)]
pub struct Expected {
    /// Leading coefficient of `A₂(u)`.
    pub g: RMatrix,
    pub g_covariant: RMatrix,
    /// Leading coefficient of the symplectic operator.
    pub big_g: RMatrix,
    pub big_g_inverse: RMatrix,
    pub det_g: RatFn,
    pub l: Tensor,
    pub r0: RMatrix,
    pub curvature: Rational,
    pub signature: (usize, usize),
}

/// The WDVV bi-Hamiltonian pair with its point transformation.
#[derive(Clone, Debug)]
pub struct WdvvFixture {
    pub source: Arc<Space>,
    pub flat: Arc<Space>,
    pub transform: PointTransform,
    pub k: QMatrix,
    pub a1: OperatorMatrix,
    pub a2: OperatorMatrix,
    pub monge_metric: RMatrix,
    pub lax_x: RMatrix,
    pub lax_t: RMatrix,
    pub hamiltonian: DiffPoly,
    pub hamiltonian_source: DiffPoly,
    pub expected: Expected,
}

impl WdvvFixture {
    pub fn load(jet_bound: usize) -> Result<Self> {
        let file: FixtureFile =
            serde_json::from_str(FIXTURE_JSON).map_err(|e| Error::Invalid(format!("fixture file: {e}")))?;
        Self::from_file(&file, jet_bound)
    }

    pub fn from_file(file: &FixtureFile, jet_bound: usize) -> Result<Self> {
        let source = Space::new(file.transform.source.iter().cloned(), jet_bound);
        let flat = Space::new(file.transform.target.iter().cloned(), jet_bound);
        let transform = transform_between(&file.transform, &source, &flat)?;
        let e = &file.expected;
        let l = {
            let vars = flat.base().clone();
            let mut t = Tensor::zeros(&vars, 3);
            for (i, plane) in e.l.iter().enumerate() {
                for (j, row) in plane.iter().enumerate() {
                    for (k, s) in row.iter().enumerate() {
                        t.set(&[i, j, k], parse_ratfn(&flat, s)?);
                    }
                }
            }
            t
        };
        let expected = Expected {
            g: rmatrix_from_json(&flat, &e.g)?,
            g_covariant: rmatrix_from_json(&flat, &e.g_covariant)?,
            big_g: rmatrix_from_json(&flat, &e.big_g)?,
            big_g_inverse: rmatrix_from_json(&flat, &e.big_g_inverse)?,
            det_g: parse_ratfn(&flat, &e.det_g)?,
            l,
            r0: rmatrix_from_json(&flat, &e.r0)?,
            curvature: e.curvature.parse().map_err(Error::Invalid)?,
            signature: (e.signature[0], e.signature[1]),
        };
        Ok(WdvvFixture {
            k: qmatrix_from_json(&file.k)?,
            a1: operator_in_space(&file.a1, &source)?,
            a2: operator_in_space(&file.a2, &source)?,
            monge_metric: rmatrix_from_json(&source, &file.monge_metric)?,
            lax_x: rmatrix_from_json(&source, &file.lax_x)?,
            lax_t: rmatrix_from_json(&source, &file.lax_t)?,
            hamiltonian: parse_diffpoly(&flat, &file.hamiltonian)?,
            hamiltonian_source: parse_diffpoly(&source, &file.hamiltonian_source)?,
            source,
            flat,
            transform,
            expected,
        })
    }

    /// `A₂` in the flat coordinates of `A₁`.
    pub fn a2_flat(&self) -> Result<OperatorMatrix> {
        change_coordinates(&self.a2, &self.transform)
    }

    /// The pair in flat coordinates with `h = u¹u²u³`, ready for the pipeline.
    pub fn system(&self) -> Result<crate::pipeline::BiHamiltonianSystem> {
        crate::pipeline::BiHamiltonianSystem::from_source(
            self.k.clone(),
            &self.a2,
            &self.transform,
            Some(self.hamiltonian.clone()),
        )
    }

    /// `A₁` in the flat coordinates; equals `K ∂_x`.
    pub fn a1_flat(&self) -> Result<OperatorMatrix> {
        change_coordinates(&self.a1, &self.transform)
    }
}

fn mult(f: DiffPoly) -> DiffOp {
    DiffOp::term(f, 0)
}

fn chain(ops: &[DiffOp]) -> Result<DiffOp> {
    let mut acc = ops[0].clone();
    for op in &ops[1..] {
        acc = acc.compose(op)?;
    }
    Ok(acc)
}

/// First operator of the pair, assembled from products of `∂_x` and
/// multiplication operators.
pub fn compositional_a1(space: &Arc<Space>) -> Result<OperatorMatrix> {
    let p = |s: &str| parse_diffpoly(space, s);
    let d = DiffOp::dx(space, 1);
    let (a, b, c, cx) = (mult(p("a")?), mult(p("b")?), mult(p("c")?), mult(p("c_x")?));
    let w = mult(p("b^2-a*c")?);
    let h = Rational::new(1, 2);
    let h3 = Rational::new(3, 2);
    let entries = vec![
        d.scale(&Rational::new(-3, 2)),
        d.compose(&a)?.scale(&h),
        d.compose(&b)?,
        a.compose(&d)?.scale(&h),
        d.compose(&b)?.add(&b.compose(&d)?).scale(&h),
        c.compose(&d)?.scale(&h3).add(&cx),
        b.compose(&d)?,
        d.compose(&c)?.scale(&h3).sub(&cx),
        w.compose(&d)?.add(&d.compose(&w)?),
    ];
    Ok(OperatorMatrix::from_entries(space, 3, 3, entries))
}

/// Second operator of the pair, in the same form.
pub fn compositional_a2(space: &Arc<Space>) -> Result<OperatorMatrix> {
    let d = |k| DiffOp::dx(space, k);
    let a = mult(parse_diffpoly(space, "a")?);
    let b = mult(parse_diffpoly(space, "b")?);
    let zero = DiffOp::zero(space);
    let entries = vec![
        zero.clone(),
        zero,
        d(3),
        DiffOp::zero(space),
        d(3),
        chain(&[d(2), a.clone(), d(1)])?.neg(),
        d(3),
        chain(&[d(1), a.clone(), d(2)])?.neg(),
        chain(&[d(2), b.clone(), d(1)])?
            .add(&chain(&[d(1), b, d(2)])?)
            .add(&chain(&[d(1), a.clone(), d(1), a, d(1)])?),
    ];
    Ok(OperatorMatrix::from_entries(space, 3, 3, entries))
}

/// The characteristic polynomial `det(λ - V_x)` of the x-Lax matrix, after
/// the point transformation, equals `∏(λ - u^k)`.
pub fn lax_eigenvalue_check(fx: &WdvvFixture) -> Result<bool> {
    let (_, lam_flat) = lambda_rings(fx);
    let n = fx.lax_x.len();
    let map: Vec<usize> = (0..n).collect();
    let mut args: Vec<RatFn> = fx.transform.source_in_target().iter().map(|f| f.remap(&lam_flat, &map)).collect();
    args.push(RatFn::var(&lam_flat, n));
    let pulled = lax_characteristic_polynomial(fx)?.compose(&args)?;
    let lambda = RatFn::var(&lam_flat, n);
    let product = (0..n).fold(RatFn::one(&lam_flat), |acc, k| acc.mul(&lambda.sub(&RatFn::var(&lam_flat, k))));
    Ok(pulled == product)
}

/// The characteristic polynomial of the x-Lax matrix in `(a, b, c, λ)`.
pub fn lax_characteristic_polynomial(fx: &WdvvFixture) -> Result<RatFn> {
    let (lam_src, _) = lambda_rings(fx);
    let n = fx.lax_x.len();
    let lambda = RatFn::var(&lam_src, n);
    let map: Vec<usize> = (0..n).collect();
    let m: RMatrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = fx.lax_x[i][j].remap(&lam_src, &map);
                    if i == j {
                        lambda.sub(&v)
                    } else {
                        v.neg()
                    }
                })
                .collect()
        })
        .collect();
    r_det(&m)
}

fn lambda_rings(fx: &WdvvFixture) -> (Arc<Vars>, Arc<Vars>) {
    let with_lambda = |names: &[String]| Vars::new(names.iter().cloned().chain(std::iter::once("lambda".to_string())));
    (with_lambda(fx.source.names()), with_lambda(fx.flat.names()))
}

/// The flow generated by `h` through `A₁` in the flat coordinates is the
/// pull-back of the flow generated by `h₂ = c` in `(a, b, c)`: for every
/// source coordinate, `D_t a^n(u)` computed from the flat flow equals the
/// pulled-back source flux. Also checks that each flat flux is a total
/// x-derivative.
pub fn flux_check(fx: &WdvvFixture) -> Result<bool> {
    let flat_flow = flat_flow(fx)?;
    let source_flow = fx.a1.apply(&euler(&fx.hamiltonian_source)?)?;
    for (n, a_of_u) in fx.transform.source_in_target().iter().enumerate() {
        let a = DiffPoly::from_ratfn(&fx.flat, a_of_u.clone());
        let dt = a.evolutionary(&flat_flow)?;
        if dt != fx.transform.pull_back(&source_flow[n])? {
            return Ok(false);
        }
    }
    for f in &flat_flow {
        if !is_total_divergence(f)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `u_t = K ∂_x δh/δu` in the flat coordinates.
pub fn flat_flow(fx: &WdvvFixture) -> Result<Vec<DiffPoly>> {
    OperatorMatrix::constant(&fx.flat, &fx.k, 1).apply(&euler(&fx.hamiltonian)?)
}

/// The inverse of the leading coefficient of `A₂(a, b, c)` is the Monge
/// metric.
pub fn monge_check(fx: &WdvvFixture) -> Result<bool> {
    let lead: RMatrix = fx
        .a2
        .coeff_matrix(3)
        .iter()
        .map(|r| r.iter().map(|c| c.as_ratfn().ok_or_else(|| Error::Shape("leading coefficient depends on jets".into()))).collect())
        .collect::<Result<_>>()?;
    Ok(r_inverse(&lead)? == fx.monge_metric)
}

/// Checks that `A₂ = ∂_x ∘ (g ∂_x + w) ∘ ∂_x` with `w^{ij} = c^{ij}_k a^k_x`,
/// i.e. the source coordinates are Casimirs. Expanding,
/// `A₂ = g ∂³ + (g_x + w) ∂² + w_x ∂`, so `w` is read off from the `∂²`
/// coefficient and the remaining coefficients must match.
pub fn casimir_form_check(fx: &WdvvFixture) -> Result<bool> {
    let p = &fx.a2;
    if p.order() != Some(3) {
        return Ok(false);
    }
    for i in 0..p.rows() {
        for j in 0..p.cols() {
            let e = p.get(i, j);
            let g = e.coeff(3);
            if g.order() > 0 {
                return Ok(false);
            }
            let w = e.coeff(2).sub(&g.total_x()?);
            let linear = w.terms().all(|(m, _)| m.len() == 1 && m[0].order == 1);
            if !linear || e.coeff(1) != w.total_x()? || !e.coeff(0).is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::DEFAULT_JET_BOUND;

    fn fixture() -> WdvvFixture {
        WdvvFixture::load(DEFAULT_JET_BOUND).unwrap()
    }

    #[test]
    fn stored_operators_match_compositional_definitions() {
        let fx = fixture();
        assert_eq!(fx.a1, compositional_a1(&fx.source).unwrap());
        assert_eq!(fx.a2, compositional_a2(&fx.source).unwrap());
    }

    #[test]
    fn both_operators_are_skew_adjoint_and_homogeneous() {
        let fx = fixture();
        assert!(fx.a1.is_skew_adjoint().unwrap());
        assert!(fx.a2.is_skew_adjoint().unwrap());
        assert!(fx.a1.is_homogeneous(1));
        assert!(fx.a2.is_homogeneous(3));
    }

    #[test]
    fn first_operator_becomes_constant_in_flat_coordinates() {
        let fx = fixture();
        let flat = fx.a1_flat().unwrap();
        assert_eq!(flat, OperatorMatrix::constant(&fx.flat, &fx.k, 1));
    }

    #[test]
    fn lax_matrix_and_fluxes() {
        let fx = fixture();
        assert!(lax_eigenvalue_check(&fx).unwrap());
        assert!(flux_check(&fx).unwrap());
        let cp = lax_characteristic_polynomial(&fx).unwrap();
        let vars = cp.vars().clone();
        let v = |i| RatFn::var(&vars, i);
        let (a, b, c, l) = (v(0), v(1), v(2), v(3));
        let l2 = l.mul(&l);
        let expected = l2.mul(&l).sub(&a.mul(&l2)).sub(&b.mul(&l).scale(&Rational::from_int(2))).sub(&c);
        assert_eq!(cp, expected);
    }

    #[test]
    fn flat_flux_matches_component_formula() {
        // u^i_t = ½(u^j u^k - u^i u^j - u^i u^k)_x with i, j, k distinct.
        let fx = fixture();
        let flow = flat_flow(&fx).unwrap();
        let f = parse_diffpoly(&fx.flat, "1/2*(u2*u3-u1*u2-u1*u3)").unwrap();
        assert_eq!(flow[0], f.total_x().unwrap());
    }

    #[test]
    fn casimir_and_monge_structure() {
        let fx = fixture();
        assert!(monge_check(&fx).unwrap());
        assert!(casimir_form_check(&fx).unwrap());
        assert!(!casimir_form_check(&WdvvFixture { a2: fx.a1.clone(), ..fx.clone() }).unwrap());
    }
}

