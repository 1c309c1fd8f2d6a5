//! Matrix differential operators `Σ_k c_k ∂_x^k` with differential-polynomial
//! coefficients, kept in normal form (coefficients to the left of `∂_x`).

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{RatFn, Rational};
use crate::error::{Error, Result};
use crate::jet::{DiffPoly, Grade, JetVar, Space};
use crate::linalg::QMatrix;
use crate::tensor::Tensor;

fn binom(n: usize, k: usize) -> Rational {
    let mut r = Rational::one();
    for i in 0..k {
        r = r * Rational::new((n - i) as i64, (i + 1) as i64);
    }
    r
}

/// Scalar operator; `coeffs[k]` multiplies `∂_x^k`.
#[derive(Clone, PartialEq, Eq)]
pub struct DiffOp {
    space: Arc<Space>,
    coeffs: Vec<DiffPoly>,
}

impl DiffOp {
    pub fn zero(space: &Arc<Space>) -> Self {
        DiffOp { space: space.clone(), coeffs: Vec::new() }
    }

    /// `c ∂_x^k`.
    pub fn term(c: DiffPoly, k: usize) -> Self {
        let space = c.space().clone();
        let mut coeffs = vec![DiffPoly::zero(&space); k];
        coeffs.push(c);
        DiffOp { space, coeffs }.trimmed()
    }

    pub fn dx(space: &Arc<Space>, k: usize) -> Self {
        Self::term(DiffPoly::one(space), k)
    }

    pub fn from_coeffs(space: &Arc<Space>, coeffs: Vec<DiffPoly>) -> Self {
        DiffOp { space: space.clone(), coeffs }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().is_some_and(DiffPoly::is_zero) {
            self.coeffs.pop();
        }
        self
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn coeffs(&self) -> &[DiffPoly] {
        &self.coeffs
    }

    /// Coefficient of `∂_x^k` (zero beyond the order).
    pub fn coeff(&self, k: usize) -> DiffPoly {
        self.coeffs.get(k).cloned().unwrap_or_else(|| DiffPoly::zero(&self.space))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Order, or `None` for the zero operator.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| match (self.coeffs.get(k), other.coeffs.get(k)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        DiffOp { space: self.space.clone(), coeffs }.trimmed()
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffOp {
        DiffOp { space: self.space.clone(), coeffs: self.coeffs.iter().map(DiffPoly::neg).collect() }
    }

    pub fn scale(&self, c: &Rational) -> DiffOp {
        DiffOp { space: self.space.clone(), coeffs: self.coeffs.iter().map(|x| x.scale(c)).collect() }.trimmed()
    }

    /// `f ∘ P` for a multiplication operator `f`.
    pub fn mul_left(&self, f: &DiffPoly) -> DiffOp {
        DiffOp { space: self.space.clone(), coeffs: self.coeffs.iter().map(|x| f.mul(x)).collect() }.trimmed()
    }

    /// `P ∘ Q` by the Leibniz rule `∂^k ∘ b = Σ_t C(k,t) D_x^t(b) ∂^{k-t}`.
    pub fn compose(&self, other: &DiffOp) -> Result<DiffOp> {
        if self.is_zero() || other.is_zero() {
            return Ok(DiffOp::zero(&self.space));
        }
        let kmax = self.coeffs.len() - 1;
        let mut out: Vec<DiffPoly> = vec![DiffPoly::zero(&self.space); kmax + other.coeffs.len()];
        for (l, b) in other.coeffs.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            // derivs[t] = D_x^t(b)
            let mut derivs = vec![b.clone()];
            for _ in 0..kmax {
                let next = derivs.last().unwrap().total_x()?;
                derivs.push(next);
            }
            for (k, a) in self.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (t, d) in derivs.iter().enumerate().take(k + 1) {
                    if d.is_zero() {
                        continue;
                    }
                    let p = a.mul(d).scale(&binom(k, t));
                    out[k - t + l] = out[k - t + l].add(&p);
                }
            }
        }
        Ok(DiffOp { space: self.space.clone(), coeffs: out }.trimmed())
    }

    /// Formal adjoint `Σ_k (-1)^k ∂^k ∘ c_k`.
    pub fn adjoint(&self) -> Result<DiffOp> {
        let mut out: Vec<DiffPoly> = vec![DiffPoly::zero(&self.space); self.coeffs.len()];
        for (k, c) in self.coeffs.iter().enumerate() {
            let sign = if k % 2 == 0 { Rational::one() } else { Rational::from_int(-1) };
            let mut d = c.clone();
            for t in 0..=k {
                if t > 0 {
                    d = d.total_x()?;
                }
                if d.is_zero() {
                    break;
                }
                out[k - t] = out[k - t].add(&d.scale(&(&sign * &binom(k, t))));
            }
        }
        Ok(DiffOp { space: self.space.clone(), coeffs: out }.trimmed())
    }

    /// `Σ_k c_k D_x^k(ψ)`.
    pub fn apply(&self, psi: &DiffPoly) -> Result<DiffPoly> {
        let mut acc = DiffPoly::zero(&self.space);
        let mut d = psi.clone();
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                d = d.total_x()?;
            }
            if !c.is_zero() {
                acc = acc.add(&c.mul(&d));
            }
        }
        Ok(acc)
    }

    fn rebase(&self, space: &Arc<Space>) -> DiffOp {
        DiffOp { space: space.clone(), coeffs: self.coeffs.iter().map(|c| c.rebase(space)).collect() }
    }
}

/// Row-major matrix of scalar operators.
#[derive(Clone, PartialEq, Eq)]
pub struct OperatorMatrix {
    space: Arc<Space>,
    rows: usize,
    cols: usize,
    entries: Vec<DiffOp>,
}

impl OperatorMatrix {
    pub fn zero(space: &Arc<Space>, rows: usize, cols: usize) -> Self {
        OperatorMatrix { space: space.clone(), rows, cols, entries: vec![DiffOp::zero(space); rows * cols] }
    }

    pub fn from_entries(space: &Arc<Space>, rows: usize, cols: usize, entries: Vec<DiffOp>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count");
        OperatorMatrix { space: space.clone(), rows, cols, entries }
    }

    pub fn from_fn(space: &Arc<Space>, rows: usize, cols: usize, f: impl Fn(usize, usize) -> DiffOp) -> Self {
        let entries = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        OperatorMatrix { space: space.clone(), rows, cols, entries }
    }

    pub fn identity(space: &Arc<Space>, n: usize) -> Self {
        Self::from_fn(space, n, n, |i, j| if i == j { DiffOp::dx(space, 0) } else { DiffOp::zero(space) })
    }

    /// `K ∂_x^k` for a constant matrix `K`.
    pub fn constant(space: &Arc<Space>, k: &QMatrix, power: usize) -> Self {
        let n = k.len();
        Self::from_fn(space, n, n, |i, j| DiffOp::term(DiffPoly::constant(space, k[i][j].clone()), power))
    }

    /// Order-zero operator given by a matrix of multiplication operators.
    pub fn multiplication(space: &Arc<Space>, m: &[Vec<DiffPoly>]) -> Self {
        let (rows, cols) = (m.len(), m[0].len());
        Self::from_fn(space, rows, cols, |i, j| DiffOp::term(m[i][j].clone(), 0))
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &DiffOp {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, op: DiffOp) {
        self.entries[i * self.cols + j] = op;
    }

    pub fn entries(&self) -> &[DiffOp] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(DiffOp::is_zero)
    }

    pub fn order(&self) -> Option<usize> {
        self.entries.iter().filter_map(DiffOp::order).max()
    }

    /// Coefficient matrix of `∂_x^k`.
    pub fn coeff_matrix(&self, k: usize) -> Vec<Vec<DiffPoly>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).coeff(k)).collect()).collect()
    }

    fn same_shape(&self, other: &OperatorMatrix) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} and {}x{} operators",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect();
        Ok(OperatorMatrix { space: self.space.clone(), rows: self.rows, cols: self.cols, entries })
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> OperatorMatrix {
        self.map(DiffOp::neg)
    }

    pub fn scale(&self, c: &Rational) -> OperatorMatrix {
        self.map(|e| e.scale(c))
    }

    fn map(&self, f: impl Fn(&DiffOp) -> DiffOp) -> OperatorMatrix {
        OperatorMatrix { space: self.space.clone(), rows: self.rows, cols: self.cols, entries: self.entries.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> OperatorMatrix {
        Self::from_fn(&self.space, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Normal-ordered product `P ∘ Q`.
    pub fn compose(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (rows, cols) = (self.rows, other.cols);
        let entries: Result<Vec<DiffOp>> = (0..rows * cols)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / cols, k % cols);
                let mut acc = DiffOp::zero(&self.space);
                for l in 0..self.cols {
                    let (a, b) = (self.get(i, l), other.get(l, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.compose(b)?);
                    }
                }
                Ok(acc)
            })
            .collect();
        Ok(OperatorMatrix { space: self.space.clone(), rows, cols, entries: entries? })
    }

    /// Formal adjoint: entry `(i,j)` is the scalar adjoint of entry `(j,i)`.
    pub fn adjoint(&self) -> Result<OperatorMatrix> {
        let entries: Result<Vec<DiffOp>> = (0..self.rows * self.cols)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / self.rows, k % self.rows);
                self.get(j, i).adjoint()
            })
            .collect();
        Ok(OperatorMatrix { space: self.space.clone(), rows: self.cols, cols: self.rows, entries: entries? })
    }

    /// Component `i` is `Σ_j P^{ij}(ψ_j)`.
    pub fn apply(&self, psi: &[DiffPoly]) -> Result<Vec<DiffPoly>> {
        if psi.len() != self.cols {
            return Err(Error::DimensionMismatch(format!("operator with {} columns on a {}-vector", self.cols, psi.len())));
        }
        (0..self.rows)
            .map(|i| {
                let mut acc = DiffPoly::zero(&self.space);
                for (j, p) in psi.iter().enumerate() {
                    let e = self.get(i, j);
                    if !e.is_zero() && !p.is_zero() {
                        acc = acc.add(&e.apply(p)?);
                    }
                }
                Ok(acc)
            })
            .collect()
    }

    /// `C P D` for constant matrices `C`, `D`.
    pub fn conjugate(&self, left: &QMatrix, right: &QMatrix) -> Result<OperatorMatrix> {
        let l = OperatorMatrix::constant(&self.space, left, 0);
        let r = OperatorMatrix::constant(&self.space, right, 0);
        l.compose(self)?.compose(&r)
    }

    pub fn is_skew_adjoint(&self) -> Result<bool> {
        Ok(self.rows == self.cols && self.adjoint()? == self.neg())
    }

    pub fn is_self_adjoint(&self) -> Result<bool> {
        Ok(self.rows == self.cols && self.adjoint()? == *self)
    }

    /// Entries `(i, j)` where `P* ≠ -P`.
    pub fn skew_defects(&self) -> Result<Vec<(usize, usize)>> {
        let adj = self.adjoint()?;
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if adj.get(i, j) != &self.get(i, j).neg() {
                    out.push((i, j));
                }
            }
        }
        Ok(out)
    }

    /// Every term of the coefficient of `∂_x^k` has grade `m - k`.
    pub fn is_homogeneous(&self, m: usize) -> bool {
        self.entries.iter().all(|e| {
            e.coeffs().iter().enumerate().all(|(k, c)| match c.grade() {
                Grade::Zero => true,
                Grade::Homogeneous(g) => k <= m && g == m - k,
                Grade::Inhomogeneous => false,
            })
        })
    }

    /// Same operator over a space with a different jet bound.
    pub fn rebase(&self, space: &Arc<Space>) -> OperatorMatrix {
        OperatorMatrix { space: space.clone(), rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|e| e.rebase(space)).collect() }
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                _ if c.constant_value().is_some_and(|v| v.is_one()) => write!(f, "D^{k}")?,
                _ => write!(f, "({c})*D^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(" | "))?;
        }
        Ok(())
    }
}

/// Coefficient tensors of a homogeneous operator of order one or three,
/// named after the decomposition
/// `g ∂³ + b_k u^k_x ∂² + (c_k u^k_xx + c_km u^k_x u^m_x) ∂
///  + d_k u^k_xxx + d_km u^k_xx u^m_x + d_kmn u^k_x u^m_x u^n_x`.
/// Index order is `(i, j, k, m, n)`; `c2` and `d3` are symmetrized in their
/// lower indices. For order one only `g` and `b` (as `g ∂ + b_k u^k_x`) are
/// populated.
#[derive(Clone, Debug)]
pub struct OperatorTensors {
    pub order: usize,
    pub g: Tensor,
    pub b: Tensor,
    pub c1: Tensor,
    pub c2: Tensor,
    pub d1: Tensor,
    pub d2: Tensor,
    pub d3: Tensor,
}

/// Splits a homogeneous operator of order `m` (1 or 3) into its tensors.
pub fn leading_and_lower(p: &OperatorMatrix, m: usize) -> Result<OperatorTensors> {
    if m != 1 && m != 3 {
        return Err(Error::Unsupported(format!("tensor decomposition of order {m}")));
    }
    let space = p.space().clone();
    let vars = space.base().clone();
    let n = space.dim();
    if p.rows() != n || p.cols() != n {
        return Err(Error::DimensionMismatch("operator size differs from the number of coordinates".into()));
    }
    let mut t = OperatorTensors {
        order: m,
        g: Tensor::zeros(&vars, 2),
        b: Tensor::zeros(&vars, 3),
        c1: Tensor::zeros(&vars, 3),
        c2: Tensor::zeros(&vars, 4),
        d1: Tensor::zeros(&vars, 3),
        d2: Tensor::zeros(&vars, 4),
        d3: Tensor::zeros(&vars, 5),
    };
    let mut offending = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let e = p.get(i, j);
            if e.order().is_some_and(|o| o > m) {
                offending.push(format!("({},{}) has order {}", i + 1, j + 1, e.order().unwrap()));
                continue;
            }
            for (k, c) in e.coeffs().iter().enumerate() {
                let weight = m - k;
                for (mono, coef) in c.terms() {
                    let w: usize = mono.iter().map(|v| v.order as usize).sum();
                    if w != weight {
                        offending.push(format!("({},{}) D^{k}: {}", i + 1, j + 1, term_text(&space, mono, coef)));
                        continue;
                    }
                    let orders: Vec<u16> = mono.iter().map(|v| v.order).collect();
                    let comps: Vec<usize> = mono.iter().map(|v| v.comp as usize).collect();
                    let add = |tensor: &mut Tensor, idx: &[usize], val: RatFn| {
                        let cur = tensor.get(idx).clone();
                        tensor.set(idx, cur.add(&val));
                    };
                    match (m, k, orders.as_slice()) {
                        (_, _, []) => add(&mut t.g, &[i, j], coef.clone()),
                        (3, 2, [1]) | (1, 0, [1]) => add(&mut t.b, &[i, j, comps[0]], coef.clone()),
                        (3, 1, [2]) => add(&mut t.c1, &[i, j, comps[0]], coef.clone()),
                        (3, 1, [1, 1]) => {
                            let (a, b) = (comps[0], comps[1]);
                            if a == b {
                                add(&mut t.c2, &[i, j, a, a], coef.clone());
                            } else {
                                let half = coef.scale(&Rational::new(1, 2));
                                add(&mut t.c2, &[i, j, a, b], half.clone());
                                add(&mut t.c2, &[i, j, b, a], half);
                            }
                        }
                        (3, 0, [3]) => add(&mut t.d1, &[i, j, comps[0]], coef.clone()),
                        // sorted by order, so the u_x factor comes first
                        (3, 0, [1, 2]) => add(&mut t.d2, &[i, j, comps[1], comps[0]], coef.clone()),
                        (3, 0, [1, 1, 1]) => {
                            let perms = permutations3(comps[0], comps[1], comps[2]);
                            let share = coef.scale(&Rational::new(1, perms.len() as i64));
                            for p in perms {
                                add(&mut t.d3, &[i, j, p[0], p[1], p[2]], share.clone());
                            }
                        }
                        _ => unreachable!("weights already checked"),
                    }
                }
            }
        }
    }
    if !offending.is_empty() {
        return Err(Error::Shape(format!("not homogeneous of order {m}: {}", offending.join("; "))));
    }
    Ok(t)
}

fn term_text(space: &Arc<Space>, mono: &[JetVar], coef: &RatFn) -> String {
    let mut s = format!("({coef})");
    for v in mono {
        s.push('*');
        s.push_str(&space.jet_name(*v));
    }
    s
}

fn permutations3(a: usize, b: usize, c: usize) -> Vec<[usize; 3]> {
    let mut v = vec![[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]];
    v.sort();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_diffpoly;
    use crate::jet::DEFAULT_JET_BOUND;

    fn sp(n: usize) -> Arc<Space> {
        let names: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
        Space::new(names, DEFAULT_JET_BOUND)
    }

    fn p(s: &Arc<Space>, e: &str) -> DiffPoly {
        parse_diffpoly(s, e).unwrap()
    }

    #[test]
    fn leibniz_rule() {
        let s = sp(1);
        let d = DiffOp::dx(&s, 1);
        let u = DiffOp::term(p(&s, "u1"), 0);
        let expected = DiffOp::from_coeffs(&s, vec![p(&s, "u1_x"), p(&s, "u1")]);
        assert_eq!(d.compose(&u).unwrap(), expected);
    }

    #[test]
    fn adjoint_examples() {
        let s = sp(1);
        assert_eq!(DiffOp::dx(&s, 1).adjoint().unwrap(), DiffOp::dx(&s, 1).neg());
        let f = DiffOp::term(p(&s, "u1^2"), 1);
        let expected = DiffOp::from_coeffs(&s, vec![p(&s, "-2*u1*u1_x"), p(&s, "-u1^2")]);
        assert_eq!(f.adjoint().unwrap(), expected);
    }

    #[test]
    fn identity_and_constant_products() {
        let s = sp(3);
        let half = |a: i64| Rational::new(a, 2);
        let k: QMatrix = vec![vec![half(1), half(-1), half(-1)], vec![half(-1), half(1), half(-1)], vec![half(-1), half(-1), half(1)]];
        let m = crate::linalg::q_inverse(&k).unwrap();
        let a = OperatorMatrix::constant(&s, &k, 1);
        let b = OperatorMatrix::constant(&s, &m, 1);
        let id = OperatorMatrix::identity(&s, 3);
        assert_eq!(a.compose(&b).unwrap(), OperatorMatrix::constant(&s, &crate::linalg::q_identity(3), 2));
        assert_eq!(a.compose(&id).unwrap(), a);
        assert!(a.is_skew_adjoint().unwrap());
        assert!(!id.is_skew_adjoint().unwrap());
    }

    #[test]
    fn apply_examples() {
        let s = sp(1);
        let d3 = OperatorMatrix::constant(&s, &vec![vec![Rational::one()]], 3);
        assert_eq!(d3.apply(&[p(&s, "u1")]).unwrap(), vec![p(&s, "u1_xxx")]);
    }

    #[test]
    fn homogeneity() {
        let s = sp(1);
        let k = OperatorMatrix::constant(&s, &vec![vec![Rational::one()]], 1);
        assert!(k.is_homogeneous(1));
        let bad = OperatorMatrix::from_entries(&s, 1, 1, vec![DiffOp::from_coeffs(&s, vec![p(&s, "1"), p(&s, "1")])]);
        assert!(!bad.is_homogeneous(1));
        let third = OperatorMatrix::from_entries(
            &s,
            1,
            1,
            vec![DiffOp::from_coeffs(&s, vec![p(&s, "u1_xxx + u1_x^3"), p(&s, "u1_xx"), p(&s, "u1_x"), p(&s, "u1")])],
        );
        assert!(third.is_homogeneous(3));
    }

    #[test]
    fn tensor_split_round_numbers() {
        let s = sp(2);
        let op = DiffOp::from_coeffs(
            &s,
            vec![p(&s, "u1_x*u2_x^2 + 5*u2_xx*u1_x"), p(&s, "2*u1_x*u2_x"), p(&s, "u2_x"), p(&s, "u1")],
        );
        let z = DiffOp::zero(&s);
        let m = OperatorMatrix::from_entries(&s, 2, 2, vec![op, z.clone(), z.clone(), z]);
        let t = leading_and_lower(&m, 3).unwrap();
        let v = s.base();
        assert_eq!(t.g.get(&[0, 0]), &RatFn::var(v, 0));
        assert_eq!(t.b.get(&[0, 0, 1]), &RatFn::one(v));
        assert_eq!(t.c2.get(&[0, 0, 0, 1]), &RatFn::one(v));
        assert_eq!(t.d2.get(&[0, 0, 1, 0]), &RatFn::constant(v, Rational::from_int(5)));
        assert_eq!(t.d3.get(&[0, 0, 1, 0, 1]), &RatFn::constant(v, Rational::new(1, 3)));
        let bad = OperatorMatrix::from_entries(&s, 1, 1, vec![DiffOp::term(p(&s, "u1_x"), 3)]);
        assert!(matches!(leading_and_lower(&bad, 3), Err(Error::DimensionMismatch(_))));
        let z = DiffOp::zero(&s);
        let bad = OperatorMatrix::from_entries(&s, 2, 2, vec![DiffOp::term(p(&s, "u1_x"), 3), z.clone(), z.clone(), z]);
        assert!(matches!(leading_and_lower(&bad, 3), Err(Error::Shape(_))));
    }
}
