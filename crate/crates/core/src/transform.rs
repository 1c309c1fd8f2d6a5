//! Point transformations between coordinate systems and the induced change of
//! contravariant operators `A(u)^{ij} = (∂u^i/∂a^n) ∘ A^{nm}(a) ∘ (∂u^j/∂a^m)`.

use std::sync::Arc;

use crate::algebra::RatFn;
use crate::diffop::{DiffOp, OperatorMatrix};
use crate::error::{Error, Result};
use crate::jet::{DiffPoly, JetVar, Space};
use crate::linalg::{r_det, r_inverse, RMatrix};

/// Transformation from source coordinates `a` to target coordinates `u`,
/// given by the source coordinates as rational functions of the target ones.
#[derive(Clone, Debug)]
pub struct PointTransform {
    source: Arc<Space>,
    target: Arc<Space>,
    /// `a^n(u)`
    source_in_target: Vec<RatFn>,
    /// `u^i(a)`, when known in closed form.
    target_in_source: Option<Vec<RatFn>>,
    /// `∂a^n/∂u^i`, row `n`, column `i`.
    jacobian: RMatrix,
    /// `∂u^i/∂a^n` as functions of `u`, row `i`, column `n`.
    inverse_jacobian: RMatrix,
}

impl PointTransform {
    pub fn new(
        source: &Arc<Space>,
        target: &Arc<Space>,
        source_in_target: Vec<RatFn>,
        target_in_source: Option<Vec<RatFn>>,
    ) -> Result<Self> {
        let n = target.dim();
        if source.dim() != n || source_in_target.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} source coordinates, {} target coordinates, {} expressions",
                source.dim(),
                n,
                source_in_target.len()
            )));
        }
        if source_in_target.iter().any(|f| f.vars() != target.base()) {
            return Err(Error::Invalid("source expressions must be written in the target coordinates".into()));
        }
        let jacobian: RMatrix = source_in_target.iter().map(|a| (0..n).map(|i| a.partial(i)).collect()).collect();
        if r_det(&jacobian)?.is_zero() {
            return Err(Error::Singular("the Jacobian determinant of the transformation vanishes identically".into()));
        }
        let inverse_jacobian = r_inverse(&jacobian)?;
        if let Some(fwd) = &target_in_source {
            if fwd.len() != n || fwd.iter().any(|f| f.vars() != source.base()) {
                return Err(Error::Invalid("target expressions must be n functions of the source coordinates".into()));
            }
            for (i, f) in fwd.iter().enumerate() {
                if f.compose(&source_in_target)? != RatFn::var(target.base(), i) {
                    return Err(Error::Invalid(format!(
                        "the two maps are not mutually inverse in component {}",
                        target.names()[i]
                    )));
                }
            }
        }
        Ok(PointTransform { source: source.clone(), target: target.clone(), source_in_target, target_in_source, jacobian, inverse_jacobian })
    }

    pub fn identity(space: &Arc<Space>) -> Result<Self> {
        let ids: Vec<RatFn> = (0..space.dim()).map(|i| RatFn::var(space.base(), i)).collect();
        Self::new(space, space, ids.clone(), Some(ids))
    }

    pub fn source(&self) -> &Arc<Space> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Space> {
        &self.target
    }

    pub fn source_in_target(&self) -> &[RatFn] {
        &self.source_in_target
    }

    pub fn target_in_source(&self) -> Option<&[RatFn]> {
        self.target_in_source.as_deref()
    }

    pub fn jacobian(&self) -> &RMatrix {
        &self.jacobian
    }

    pub fn inverse_jacobian(&self) -> &RMatrix {
        &self.inverse_jacobian
    }

    /// `a = a(u)` followed by `u = u(z)`, i.e. source coordinates in terms of
    /// the target of `next`.
    pub fn then(&self, next: &PointTransform) -> Result<PointTransform> {
        if self.target.base() != next.source.base() {
            return Err(Error::Invalid("transforms do not chain".into()));
        }
        let composite: Result<Vec<RatFn>> = self.source_in_target.iter().map(|a| a.compose(&next.source_in_target)).collect();
        PointTransform::new(&self.source, &next.target, composite?, None)
    }

    /// Rewrites a differential polynomial in the source coordinates in terms
    /// of the target coordinates, replacing `a^n_σ` by `D_x^σ(a^n(u))`.
    pub fn pull_back(&self, f: &DiffPoly) -> Result<DiffPoly> {
        let target = self.target.clone();
        let a_of_u: Vec<DiffPoly> = self.source_in_target.iter().map(|a| DiffPoly::from_ratfn(&target, a.clone())).collect();
        let mut jets = |v: JetVar| a_of_u[v.comp as usize].total_x_pow(v.order as usize);
        f.substitute(&target, &self.source_in_target, &mut jets)
    }
}

/// Expresses a contravariant operator given in the source coordinates in the
/// target coordinates.
pub fn change_coordinates(p: &OperatorMatrix, t: &PointTransform) -> Result<OperatorMatrix> {
    let n = t.target.dim();
    if p.rows() != n || p.cols() != n {
        return Err(Error::DimensionMismatch(format!("{}x{} operator for {} coordinates", p.rows(), p.cols(), n)));
    }
    if p.space().base() != t.source.base() {
        return Err(Error::Invalid("operator is not written in the source coordinates".into()));
    }
    let target = t.target.clone();
    let mut pulled = OperatorMatrix::zero(&target, n, n);
    for i in 0..n {
        for j in 0..n {
            let coeffs: Result<Vec<DiffPoly>> = p.get(i, j).coeffs().iter().map(|c| t.pull_back(c)).collect();
            pulled.set(i, j, DiffOp::from_coeffs(&target, coeffs?));
        }
    }
    let j: Vec<Vec<DiffPoly>> = t.inverse_jacobian.iter().map(|r| r.iter().map(|x| DiffPoly::from_ratfn(&target, x.clone())).collect()).collect();
    let left = OperatorMatrix::multiplication(&target, &j);
    let right = left.transpose();
    left.compose(&pulled)?.compose(&right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_diffpoly, parse_ratfn};

    #[test]
    fn identity_transform_is_neutral() {
        let s = Space::new(["u1", "u2"], 6);
        let p = OperatorMatrix::from_fn(&s, 2, 2, |i, j| {
            let c = parse_diffpoly(&s, if i == j { "u1*u2" } else { "u1_x" }).unwrap();
            DiffOp::term(c, i + j)
        });
        let t = PointTransform::identity(&s).unwrap();
        assert_eq!(change_coordinates(&p, &t).unwrap(), p);
    }

    #[test]
    fn singular_and_inconsistent_transforms_are_rejected() {
        let a = Space::new(["a", "b"], 6);
        let u = Space::new(["x", "y"], 6);
        let f = |e: &str| parse_ratfn(&u, e).unwrap();
        assert!(matches!(PointTransform::new(&a, &u, vec![f("x+y"), f("2*x+2*y")], None), Err(Error::Singular(_))));
        let g = |e: &str| parse_ratfn(&a, e).unwrap();
        let bad = PointTransform::new(&a, &u, vec![f("x+y"), f("x-y")], Some(vec![g("a"), g("b")]));
        assert!(matches!(bad, Err(Error::Invalid(_))));
        let good = PointTransform::new(&a, &u, vec![f("x+y"), f("x-y")], Some(vec![g("(a+b)/2"), g("(a-b)/2")]));
        assert!(good.is_ok());
    }

    #[test]
    fn scalar_metric_transforms_as_a_tensor() {
        // a = x^2: the operator ∂_x becomes (1/(2x))∘∂_x∘(1/(2x)).
        let a = Space::new(["a"], 6);
        let u = Space::new(["x"], 6);
        let t = PointTransform::new(&a, &u, vec![parse_ratfn(&u, "x^2").unwrap()], None).unwrap();
        let p = OperatorMatrix::from_entries(&a, 1, 1, vec![DiffOp::dx(&a, 1)]);
        let q = change_coordinates(&p, &t).unwrap();
        let expected = DiffOp::from_coeffs(&u, vec![parse_diffpoly(&u, "-1/(4*x^3)*x_x").unwrap(), parse_diffpoly(&u, "1/(4*x^2)").unwrap()]);
        assert_eq!(q.get(0, 0), &expected);
        assert!(q.is_skew_adjoint().unwrap());
    }
}
