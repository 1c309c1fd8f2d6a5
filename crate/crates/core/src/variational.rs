//! Linearizations, Lie derivatives of operators and evidence checks for the
//! Jacobi identity.

use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::Rational;
use crate::diffop::{DiffOp, OperatorMatrix};
use crate::error::{Error, Result};
use crate::jet::{euler, DiffPoly, Space};

fn space_of(f: &[DiffPoly]) -> Result<Arc<Space>> {
    f.first().map(|p| p.space().clone()).ok_or_else(|| Error::DimensionMismatch("empty vector".into()))
}

/// Linearization `ℓ_F`: entry `(k, i)` is `Σ_σ ∂F^k/∂u^i_σ ∂_x^σ`.
pub fn frechet(f: &[DiffPoly]) -> Result<OperatorMatrix> {
    let space = space_of(f)?;
    let n = space.dim();
    let mut out = OperatorMatrix::zero(&space, f.len(), n);
    for (k, fk) in f.iter().enumerate() {
        let ord = fk.order();
        for i in 0..n {
            let coeffs: Vec<DiffPoly> = (0..=ord).map(|s| fk.partial(i, s)).collect();
            out.set(k, i, DiffOp::from_coeffs(&space, coeffs));
        }
    }
    Ok(out)
}

/// `ℓ_ψ = ℓ_ψ*`, the Helmholtz condition for `ψ` to be an Euler expression.
pub fn helmholtz_symmetric(psi: &[DiffPoly]) -> Result<bool> {
    if psi.len() != space_of(psi)?.dim() {
        return Err(Error::DimensionMismatch("covector length differs from the dimension".into()));
    }
    frechet(psi)?.is_self_adjoint()
}

/// The operator `ℓ_ψ ∘ ∂_x + ∂_x ∘ ℓ_ψ*`.
///
/// In potential variables `u = φ_x` this is `ℓ_ψ - ℓ_ψ*` computed with respect
/// to `φ`; the chain rule turns `ℓ_ψ(φ)` into `ℓ_ψ(u) ∘ ∂_x` and `ℓ_ψ*(φ)` into
/// `-∂_x ∘ ℓ_ψ*(u)`.
pub fn presentation_operator(psi: &[DiffPoly]) -> Result<OperatorMatrix> {
    let space = space_of(psi)?;
    let l = frechet(psi)?;
    let n = space.dim();
    let d = OperatorMatrix::from_fn(&space, n, n, |i, j| if i == j { DiffOp::dx(&space, 1) } else { DiffOp::zero(&space) });
    l.compose(&d)?.add(&d.compose(&l.adjoint()?)?)
}

/// Checks that `ψ` is a potential of `B`, i.e. `B = ℓ_ψ - ℓ_ψ*` in potential
/// variables (see [`presentation_operator`]).
pub fn presentation_check(b: &OperatorMatrix, psi: &[DiffPoly]) -> Result<bool> {
    Ok(presentation_operator(psi)? == *b)
}

pub fn skew_adjoint_check(a: &OperatorMatrix) -> Result<bool> {
    a.is_skew_adjoint()
}

/// `D_Q(A)`: the operator whose coefficients are the evolutionary
/// derivatives of those of `A` along the characteristic `Q`.
pub fn coefficient_derivative(a: &OperatorMatrix, q: &[DiffPoly]) -> Result<OperatorMatrix> {
    let space = a.space().clone();
    let entries: Result<Vec<DiffOp>> = a
        .entries()
        .par_iter()
        .map(|e| {
            let coeffs: Result<Vec<DiffPoly>> = e.coeffs().iter().map(|c| c.evolutionary(q)).collect();
            Ok(DiffOp::from_coeffs(&space, coeffs?))
        })
        .collect();
    Ok(OperatorMatrix::from_entries(&space, a.rows(), a.cols(), entries?))
}

/// `ℓ_{A,ψ}`: the operator in `τ` with entry `(i, k)` equal to
/// `Σ_μ (Σ_{j,σ} ∂A^{ij}_σ/∂u^k_μ · D_x^σ ψ_j) ∂_x^μ`.
pub fn operator_directional_derivative(a: &OperatorMatrix, psi: &[DiffPoly]) -> Result<OperatorMatrix> {
    let space = a.space().clone();
    let n = space.dim();
    let mut dpsi: Vec<Vec<DiffPoly>> = Vec::with_capacity(psi.len());
    let ord = a.order().unwrap_or(0);
    for p in psi {
        let mut v = vec![p.clone()];
        for _ in 0..ord {
            let next = v.last().unwrap().total_x()?;
            v.push(next);
        }
        dpsi.push(v);
    }
    let mut out = OperatorMatrix::zero(&space, a.rows(), n);
    for i in 0..a.rows() {
        for k in 0..n {
            let mut coeffs: Vec<DiffPoly> = Vec::new();
            for j in 0..a.cols() {
                for (sigma, c) in a.get(i, j).coeffs().iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for mu in 0..=c.order() {
                        let dc = c.partial(k, mu);
                        if dc.is_zero() {
                            continue;
                        }
                        if coeffs.len() <= mu {
                            coeffs.resize(mu + 1, DiffPoly::zero(&space));
                        }
                        coeffs[mu] = coeffs[mu].add(&dc.mul(&dpsi[j][sigma]));
                    }
                }
            }
            out.set(i, k, DiffOp::from_coeffs(&space, coeffs));
        }
    }
    Ok(out)
}

/// `L_τ A`: the operator `ξ ↦ ℓ_{A,ξ}(τ) - ℓ_τ(A ξ) - A(ℓ_τ* ξ)`.
pub fn lie_derivative(a: &OperatorMatrix, tau: &[DiffPoly]) -> Result<OperatorMatrix> {
    let l = frechet(tau)?;
    let first = coefficient_derivative(a, tau)?;
    let second = l.compose(a)?;
    let third = a.compose(&l.adjoint()?)?;
    first.sub(&second)?.sub(&third)
}

/// Covectors with a single nonzero component `u^l_σ`, `σ ≤ max_order`, in
/// every placement.
pub fn monomial_covectors(space: &Arc<Space>, max_order: usize) -> Result<Vec<Vec<DiffPoly>>> {
    let n = space.dim();
    let mut out = Vec::new();
    for place in 0..n {
        for sigma in 0..=max_order {
            for l in 0..n {
                let mut v = vec![DiffPoly::zero(space); n];
                v[place] = DiffPoly::jet(space, l, sigma)?;
                out.push(v);
            }
        }
    }
    Ok(out)
}

/// All unordered triples with repetition `a ≤ b ≤ c` of `0..len`.
pub fn all_triples(len: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for a in 0..len {
        for b in a..len {
            for c in b..len {
                out.push((a, b, c));
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct TripleFailure {
    pub triple: (usize, usize, usize),
    pub fingerprint: String,
}

#[derive(Clone, Debug)]
pub struct EvidenceReport {
    pub checked: usize,
    pub failures: Vec<TripleFailure>,
}

impl EvidenceReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

fn dot(a: &[DiffPoly], b: &[DiffPoly]) -> DiffPoly {
    let mut acc = DiffPoly::zero(a[0].space());
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc = acc.add(&x.mul(y));
        }
    }
    acc
}

/// Shared driver: `pair(a, b)` is the vector `X(a, b)` and the density of a
/// triple is `ψ_p·X(r,q) + ψ_q·X(p,r) + ψ_r·X(q,p)`.
fn evidence(
    basis: &[Vec<DiffPoly>],
    triples: &[(usize, usize, usize)],
    ops: &[OperatorMatrix],
) -> Result<EvidenceReport> {
    let len = basis.len();
    let mut needed = vec![false; len * len];
    for &(p, q, r) in triples {
        needed[r * len + q] = true;
        needed[p * len + r] = true;
        needed[q * len + p] = true;
    }
    let pairs: Result<Vec<Option<Vec<DiffPoly>>>> = (0..len * len)
        .into_par_iter()
        .map(|k| if needed[k] { ops[k / len].apply(&basis[k % len]).map(Some) } else { Ok(None) })
        .collect();
    let pairs = pairs?;
    let x = |a: usize, b: usize| pairs[a * len + b].as_ref().expect("pair computed");
    let results: Result<Vec<Option<TripleFailure>>> = triples
        .par_iter()
        .map(|&(p, q, r)| {
            let density = dot(&basis[p], x(r, q)).add(&dot(&basis[q], x(p, r))).add(&dot(&basis[r], x(q, p)));
            let e = euler(&density)?;
            if e.iter().all(DiffPoly::is_zero) {
                Ok(None)
            } else {
                let parts: Vec<String> = e.iter().map(|c| c.to_string()).collect();
                Ok(Some(TripleFailure { triple: (p, q, r), fingerprint: format!("[{}]", parts.join(", ")) }))
            }
        })
        .collect();
    Ok(EvidenceReport { checked: triples.len(), failures: results?.into_iter().flatten().collect() })
}

/// Per-triple test of `Σ_cyc ψ₁·D_{Aψ₃}(A)(ψ₂) ≡ 0` modulo total divergences.
pub fn jacobi_evidence(a: &OperatorMatrix, basis: &[Vec<DiffPoly>], triples: &[(usize, usize, usize)]) -> Result<EvidenceReport> {
    let ops: Result<Vec<OperatorMatrix>> = basis.par_iter().map(|psi| coefficient_derivative(a, &a.apply(psi)?)).collect();
    evidence(basis, triples, &ops?)
}

/// Polarized version: `Σ_cyc ψ₁·(D_{Aψ₃}(B) + D_{Bψ₃}(A))(ψ₂)`.
pub fn compatibility_evidence(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    basis: &[Vec<DiffPoly>],
    triples: &[(usize, usize, usize)],
) -> Result<EvidenceReport> {
    let ops: Result<Vec<OperatorMatrix>> = basis
        .par_iter()
        .map(|psi| coefficient_derivative(b, &a.apply(psi)?)?.add(&coefficient_derivative(a, &b.apply(psi)?)?))
        .collect();
    evidence(basis, triples, &ops?)
}

/// `ψ` scaled by a rational, componentwise.
pub fn scale_vec(v: &[DiffPoly], c: &Rational) -> Vec<DiffPoly> {
    v.iter().map(|x| x.scale(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_diffpoly;
    use crate::jet::DEFAULT_JET_BOUND;
    use crate::linalg::QMatrix;

    fn sp() -> Arc<Space> {
        Space::new(["u1", "u2", "u3"], DEFAULT_JET_BOUND)
    }

    fn v(s: &Arc<Space>, es: &[&str]) -> Vec<DiffPoly> {
        es.iter().map(|e| parse_diffpoly(s, e).unwrap()).collect()
    }

    fn wdvv_k() -> QMatrix {
        let h = |a: i64| Rational::new(a, 2);
        vec![vec![h(1), h(-1), h(-1)], vec![h(-1), h(1), h(-1)], vec![h(-1), h(-1), h(1)]]
    }

    #[test]
    fn frechet_examples() {
        let s = sp();
        let l = frechet(&v(&s, &["u1_x", "u2_x", "u3_x"])).unwrap();
        assert_eq!(l, OperatorMatrix::constant(&s, &crate::linalg::q_identity(3), 1));
        let e = euler(&parse_diffpoly(&s, "u1*u2*u3").unwrap()).unwrap();
        let h = frechet(&e).unwrap();
        let expected = OperatorMatrix::multiplication(&s, &[v(&s, &["0", "u3", "u2"]), v(&s, &["u3", "0", "u1"]), v(&s, &["u2", "u1", "0"])]);
        assert_eq!(h, expected);
    }

    #[test]
    fn helmholtz_examples() {
        let s = sp();
        let e = euler(&parse_diffpoly(&s, "u1_x^2*u2 + u3*u1_xx*u2_x").unwrap()).unwrap();
        assert!(helmholtz_symmetric(&e).unwrap());
        assert!(!helmholtz_symmetric(&v(&s, &["u2_x", "0", "0"])).unwrap());
    }

    #[test]
    fn presentation_examples() {
        let s = sp();
        let e = euler(&parse_diffpoly(&s, "u1_x^2*u2 + u1*u2*u3").unwrap()).unwrap();
        let psi: Vec<DiffPoly> = e.iter().map(|c| c.total_x().unwrap()).collect();
        assert!(presentation_check(&OperatorMatrix::zero(&s, 3, 3), &psi).unwrap());
        let k = wdvv_k();
        let b = OperatorMatrix::constant(&s, &k, 1);
        assert!(!presentation_check(&b, &v(&s, &["u1*u2", "0", "0"])).unwrap());
        // ψ = ½ K u gives ℓ_ψ = ½K, so ℓ_ψ∂ + ∂ℓ_ψ* = K∂.
        let half: Vec<DiffPoly> = (0..3)
            .map(|i| {
                let mut acc = DiffPoly::zero(&s);
                for j in 0..3 {
                    acc = acc.add(&DiffPoly::jet(&s, j, 0).unwrap().scale(&(&k[i][j] * &Rational::new(1, 2))));
                }
                acc
            })
            .collect();
        assert!(presentation_check(&b, &half).unwrap());
    }

    #[test]
    fn lie_derivative_trivial_cases() {
        let s = sp();
        let a = OperatorMatrix::constant(&s, &wdvv_k(), 1);
        let zero = vec![DiffPoly::zero(&s); 3];
        assert!(lie_derivative(&a, &zero).unwrap().is_zero());
        assert!(lie_derivative(&a, &v(&s, &["1", "-2", "1/3"])).unwrap().is_zero());
    }

    #[test]
    fn directional_derivative_matches_coefficient_derivative() {
        let s = sp();
        let a = OperatorMatrix::multiplication(&s, &[v(&s, &["0", "u1", "u2_x"]), v(&s, &["-u1", "0", "u3"]), v(&s, &["-u2_x", "-u3", "0"])]);
        let psi = v(&s, &["u2", "u1_x", "u3^2"]);
        let tau = v(&s, &["u1*u2", "u3_x", "1"]);
        let lhs = operator_directional_derivative(&a, &psi).unwrap().apply(&tau).unwrap();
        let rhs = coefficient_derivative(&a, &tau).unwrap().apply(&psi).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn jacobi_constant_coefficients_pass() {
        let s = Space::new(["u1", "u2"], 10);
        let k: QMatrix = vec![vec![Rational::one(), Rational::zero()], vec![Rational::zero(), Rational::from_int(-1)]];
        let a = OperatorMatrix::constant(&s, &k, 1);
        let basis = monomial_covectors(&s, 1).unwrap();
        let r = jacobi_evidence(&a, &basis, &all_triples(basis.len())).unwrap();
        assert!(r.pass());
    }

    #[test]
    fn jacobi_detects_non_poisson_ultralocal_bracket() {
        // {u_i, u_j} = ε_ijk u_k is Poisson (so(3)); replacing the entries by
        // J^{23} = u2, J^{31} = u3, J^{12} = u1 breaks the Jacobi identity.
        let s = Space::new(["u1", "u2", "u3"], 8);
        let good = OperatorMatrix::multiplication(&s, &[v(&s, &["0", "u3", "-u2"]), v(&s, &["-u3", "0", "u1"]), v(&s, &["u2", "-u1", "0"])]);
        let bad = OperatorMatrix::multiplication(&s, &[v(&s, &["0", "u1", "-u3"]), v(&s, &["-u1", "0", "u2"]), v(&s, &["u3", "-u2", "0"])]);
        let basis = monomial_covectors(&s, 0).unwrap();
        let triples = all_triples(basis.len());
        assert!(jacobi_evidence(&good, &basis, &triples).unwrap().pass());
        assert!(!jacobi_evidence(&bad, &basis, &triples).unwrap().pass());
    }
}
