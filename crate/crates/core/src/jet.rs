//! Differential polynomials on the jet space of `n` field components.
//!
//! A [`DiffPoly`] is a finite sum `Σ c_m(u) · m` where `m` is a monomial in the
//! jet coordinates `u^i_σ` (`σ ≥ 1`) and `c_m` is a rational function of the
//! base coordinates. Base coordinates never appear in monomials, so the
//! representation is unique once coefficients are in normal form.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::algebra::{MPoly, RatFn, Rational, Vars};
use crate::error::{Error, Result};

/// Default bound on the order of jet coordinates.
pub const DEFAULT_JET_BOUND: usize = 6;

/// Coordinate system shared by a family of differential polynomials.
#[derive(Debug, PartialEq, Eq)]
pub struct Space {
    base: Arc<Vars>,
    jet_bound: usize,
}

impl Space {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>, jet_bound: usize) -> Arc<Space> {
        Arc::new(Space { base: Vars::new(names), jet_bound })
    }

    /// Same coordinate names with a different jet bound.
    pub fn with_bound(&self, jet_bound: usize) -> Arc<Space> {
        Arc::new(Space { base: self.base.clone(), jet_bound })
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &Arc<Vars> {
        &self.base
    }

    pub fn names(&self) -> &[String] {
        self.base.names()
    }

    pub fn jet_bound(&self) -> usize {
        self.jet_bound
    }

    pub fn jet_name(&self, v: JetVar) -> String {
        let base = self.base.name(v.comp as usize);
        match v.order {
            1..=3 => format!("{base}_{}", "x".repeat(v.order as usize)),
            k => format!("{base}_x{k}"),
        }
    }

    fn same(a: &Arc<Space>, b: &Arc<Space>) -> bool {
        Arc::ptr_eq(a, b) || a.base == b.base
    }
}

/// Jet coordinate `u^comp_order`; ordered by order first, then component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVar {
    pub order: u16,
    pub comp: u16,
}

impl JetVar {
    pub fn new(comp: usize, order: usize) -> Self {
        assert!(order >= 1, "jet variables have order at least 1");
        JetVar { order: order as u16, comp: comp as u16 }
    }

    fn raised(self) -> JetVar {
        JetVar { order: self.order + 1, comp: self.comp }
    }
}

/// Sorted multiset of jet variables.
pub type JetMono = SmallVec<[JetVar; 4]>;

fn mono_mul(a: &[JetVar], b: &[JetVar]) -> JetMono {
    let mut out = JetMono::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn mono_insert(m: &[JetVar], v: JetVar) -> JetMono {
    mono_mul(m, &[v])
}

/// Removes one copy of `v`; returns the multiplicity it had.
fn mono_remove(m: &[JetVar], v: JetVar) -> Option<(JetMono, usize)> {
    let k = m.iter().filter(|&&w| w == v).count();
    if k == 0 {
        return None;
    }
    let pos = m.iter().position(|&w| w == v).unwrap();
    let mut out: JetMono = m.into();
    out.remove(pos);
    Some((out, k))
}

/// Homogeneity with respect to the grading `weight(u^i_σ) = σ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grade {
    Zero,
    Homogeneous(usize),
    Inhomogeneous,
}

#[derive(Clone, PartialEq, Eq)]
pub struct DiffPoly {
    space: Arc<Space>,
    terms: BTreeMap<JetMono, RatFn>,
}

pub type Covector = Vec<DiffPoly>;
pub type EvolutionField = Vec<DiffPoly>;

impl DiffPoly {
    pub fn zero(space: &Arc<Space>) -> Self {
        DiffPoly { space: space.clone(), terms: BTreeMap::new() }
    }

    pub fn one(space: &Arc<Space>) -> Self {
        Self::from_ratfn(space, RatFn::one(space.base()))
    }

    pub fn constant(space: &Arc<Space>, c: Rational) -> Self {
        Self::from_ratfn(space, RatFn::constant(space.base(), c))
    }

    pub fn from_ratfn(space: &Arc<Space>, c: RatFn) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(JetMono::new(), c);
        }
        DiffPoly { space: space.clone(), terms }
    }

    /// `u^i_σ`; `σ = 0` gives the base coordinate.
    pub fn jet(space: &Arc<Space>, comp: usize, order: usize) -> Result<Self> {
        if order > space.jet_bound {
            return Err(Error::JetOrderExceeded { order, bound: space.jet_bound });
        }
        if order == 0 {
            return Ok(Self::from_ratfn(space, RatFn::var(space.base(), comp)));
        }
        let mut terms = BTreeMap::new();
        terms.insert(SmallVec::from_slice(&[JetVar::new(comp, order)]), RatFn::one(space.base()));
        Ok(DiffPoly { space: space.clone(), terms })
    }

    pub fn from_terms(space: &Arc<Space>, terms: impl IntoIterator<Item = (JetMono, RatFn)>) -> Self {
        let mut out = DiffPoly::zero(space);
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    fn add_term(&mut self, m: JetMono, c: RatFn) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetMono, &RatFn)> {
        self.terms.iter()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient of a jet monomial (zero if absent).
    pub fn coeff(&self, m: &[JetVar]) -> RatFn {
        self.terms.get(m).cloned().unwrap_or_else(|| RatFn::zero(self.space.base()))
    }

    /// Jet-free part viewed as a rational function, if there are no jets.
    pub fn as_ratfn(&self) -> Option<RatFn> {
        match self.terms.len() {
            0 => Some(RatFn::zero(self.space.base())),
            1 => self.terms.get(&JetMono::new()).cloned(),
            _ => None,
        }
    }

    pub fn constant_value(&self) -> Option<Rational> {
        self.as_ratfn()?.constant_value()
    }

    /// Highest jet order present (0 when jet-free).
    pub fn order(&self) -> usize {
        self.terms.keys().flat_map(|m| m.iter().map(|v| v.order as usize)).max().unwrap_or(0)
    }

    /// Highest jet variable present, in the `(order, component)` order.
    pub fn top_var(&self) -> Option<JetVar> {
        self.terms.keys().flat_map(|m| m.iter().copied()).max()
    }

    pub fn grade(&self) -> Grade {
        let mut g = None;
        for m in self.terms.keys() {
            let w: usize = m.iter().map(|v| v.order as usize).sum();
            match g {
                None => g = Some(w),
                Some(h) if h != w => return Grade::Inhomogeneous,
                _ => {}
            }
        }
        g.map_or(Grade::Zero, Grade::Homogeneous)
    }

    /// True when every coefficient is a polynomial in the base coordinates.
    pub fn is_polynomial(&self) -> bool {
        self.terms.values().all(|c| c.is_polynomial())
    }

    fn check(&self, other: &DiffPoly) {
        assert!(Space::same(&self.space, &other.space), "differential polynomials over different spaces");
    }

    pub fn add(&self, other: &DiffPoly) -> DiffPoly {
        self.check(other);
        let (mut big, small) = if self.terms.len() >= other.terms.len() { (self.clone(), other) } else { (other.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn sub(&self, other: &DiffPoly) -> DiffPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffPoly {
        DiffPoly { space: self.space.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn scale(&self, c: &Rational) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero(&self.space);
        }
        DiffPoly { space: self.space.clone(), terms: self.terms.iter().map(|(m, x)| (m.clone(), x.scale(c))).collect() }
    }

    pub fn mul_ratfn(&self, c: &RatFn) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero(&self.space);
        }
        if c.is_one() {
            return self.clone();
        }
        DiffPoly { space: self.space.clone(), terms: self.terms.iter().map(|(m, x)| (m.clone(), x.mul(c))).collect() }
    }

    pub fn mul(&self, other: &DiffPoly) -> DiffPoly {
        self.check(other);
        if self.is_zero() || other.is_zero() {
            return DiffPoly::zero(&self.space);
        }
        if let Some(c) = other.as_ratfn() {
            return self.mul_ratfn(&c);
        }
        if let Some(c) = self.as_ratfn() {
            return other.mul_ratfn(&c);
        }
        let mut out = DiffPoly::zero(&self.space);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(mono_mul(m1, m2), c1.mul(c2));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> DiffPoly {
        let mut acc = DiffPoly::one(&self.space);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// `∂/∂u^i` acting on the coefficients.
    pub fn partial_base(&self, i: usize) -> DiffPoly {
        let mut out = DiffPoly::zero(&self.space);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.partial(i));
        }
        out
    }

    /// `∂/∂u^i_σ` for `σ ≥ 1`.
    pub fn partial_jet(&self, v: JetVar) -> DiffPoly {
        let mut out = DiffPoly::zero(&self.space);
        for (m, c) in &self.terms {
            if let Some((rest, k)) = mono_remove(m, v) {
                out.add_term(rest, c.scale(&Rational::from_int(k as i64)));
            }
        }
        out
    }

    /// `∂/∂u^i_σ` for any `σ ≥ 0`.
    pub fn partial(&self, comp: usize, order: usize) -> DiffPoly {
        if order == 0 {
            self.partial_base(comp)
        } else {
            self.partial_jet(JetVar::new(comp, order))
        }
    }

    /// Total x-derivative `D_x`.
    pub fn total_x(&self) -> Result<DiffPoly> {
        let bound = self.space.jet_bound;
        let n = self.space.dim();
        let mut out = DiffPoly::zero(&self.space);
        for (m, c) in &self.terms {
            for i in 0..n {
                if c.uses_var(i) {
                    if bound < 1 {
                        return Err(Error::JetOrderExceeded { order: 1, bound });
                    }
                    out.add_term(mono_insert(m, JetVar::new(i, 1)), c.partial(i));
                }
            }
            let mut prev = None;
            for &v in m.iter() {
                if prev == Some(v) {
                    continue;
                }
                prev = Some(v);
                if v.order as usize + 1 > bound {
                    return Err(Error::JetOrderExceeded { order: v.order as usize + 1, bound });
                }
                let (rest, k) = mono_remove(m, v).unwrap();
                out.add_term(mono_insert(&rest, v.raised()), c.scale(&Rational::from_int(k as i64)));
            }
        }
        Ok(out)
    }

    /// `D_x^k`.
    pub fn total_x_pow(&self, k: usize) -> Result<DiffPoly> {
        let mut f = self.clone();
        for _ in 0..k {
            f = f.total_x()?;
        }
        Ok(f)
    }

    /// Evolutionary derivative `Σ_{i,σ} ∂f/∂u^i_σ · D_x^σ(q^i)`.
    pub fn evolutionary(&self, q: &[DiffPoly]) -> Result<DiffPoly> {
        assert_eq!(q.len(), self.space.dim(), "characteristic length");
        let mut out = DiffPoly::zero(&self.space);
        let ord = self.order();
        for (i, qi) in q.iter().enumerate() {
            if qi.is_zero() {
                continue;
            }
            let mut dq = qi.clone();
            for sigma in 0..=ord {
                if sigma > 0 {
                    dq = dq.total_x()?;
                }
                let p = self.partial(i, sigma);
                if !p.is_zero() {
                    out = out.add(&p.mul(&dq));
                }
            }
        }
        Ok(out)
    }

    /// Substitutes the base coordinates by rational functions of the target
    /// space and every jet variable by the result of `jets`.
    pub fn substitute(
        &self,
        target: &Arc<Space>,
        base: &[RatFn],
        jets: &mut dyn FnMut(JetVar) -> Result<DiffPoly>,
    ) -> Result<DiffPoly> {
        let mut cache: BTreeMap<JetVar, DiffPoly> = BTreeMap::new();
        let mut out = DiffPoly::zero(target);
        for (m, c) in &self.terms {
            let mut t = DiffPoly::from_ratfn(target, c.compose(base)?);
            for &v in m.iter() {
                if !cache.contains_key(&v) {
                    cache.insert(v, jets(v)?);
                }
                t = t.mul(&cache[&v]);
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Moves the polynomial to a space with the same names and another bound.
    pub fn rebase(&self, space: &Arc<Space>) -> DiffPoly {
        assert!(Space::same(&self.space, space), "rebase to a different coordinate system");
        if let Some(v) = self.top_var() {
            assert!(v.order as usize <= space.jet_bound, "rebase below the present jet order");
        }
        DiffPoly { space: space.clone(), terms: self.terms.clone() }
    }

    /// Evaluates at a point of the jet space; `jets[i][σ-1]` is `u^i_σ`.
    pub fn eval(&self, base: &[Rational], jets: &[Vec<Rational>]) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.eval(base)?;
            for v in m.iter() {
                t = &t * &jets[v.comp as usize][v.order as usize - 1];
            }
            acc += &t;
        }
        Some(acc)
    }
}

/// Variational derivative: component `j` is `Σ_σ (-1)^σ D_x^σ(∂f/∂u^j_σ)`.
pub fn euler(f: &DiffPoly) -> Result<Covector> {
    let n = f.space.dim();
    let ord = f.order();
    (0..n)
        .map(|j| {
            let mut acc = DiffPoly::zero(&f.space);
            for sigma in (0..=ord).rev() {
                // Horner form: acc = ∂f/∂u^j_σ - D_x(acc)
                let p = f.partial(j, sigma);
                acc = if acc.is_zero() { p } else { p.sub(&acc.total_x()?) };
            }
            Ok(acc)
        })
        .collect()
}

pub fn is_total_divergence(f: &DiffPoly) -> Result<bool> {
    Ok(euler(f)?.iter().all(DiffPoly::is_zero))
}

fn fingerprint(psi: &[DiffPoly]) -> String {
    let parts: Vec<String> = psi.iter().map(|p| p.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Returns `g` with `D_x g = f` and no constant term.
///
/// The reduction repeatedly takes the highest jet variable `u^i_σ` (ties by
/// component index), integrates its coefficient with respect to
/// `u^i_{σ-1}` and subtracts the total derivative of the result.
pub fn formal_x_integral(f: &DiffPoly) -> Result<DiffPoly> {
    let e = euler(f)?;
    if e.iter().any(|c| !c.is_zero()) {
        return Err(Error::NotTotalDivergence { fingerprint: fingerprint(&e) });
    }
    let space = f.space.clone();
    let mut rest = f.clone();
    let mut g = DiffPoly::zero(&space);
    while let Some(v) = rest.top_var() {
        let h = rest.partial_jet(v);
        if h.order() >= v.order as usize {
            return Err(Error::Unsupported(format!("coefficient of {} is not of lower order", space.jet_name(v))));
        }
        let piece = if v.order == 1 {
            let c = h.as_ratfn().expect("order-0 coefficient is jet-free");
            DiffPoly::from_ratfn(&space, integrate_ratfn(&c, v.comp as usize)?)
        } else {
            integrate_jet(&h, JetVar { order: v.order - 1, comp: v.comp })
        };
        rest = rest.sub(&piece.total_x()?);
        g = g.add(&piece);
    }
    if !rest.is_zero() {
        return Err(Error::NotTotalDivergence { fingerprint: format!("constant remainder {rest}") });
    }
    Ok(g)
}

/// Antiderivative in the jet variable `w`, with zero integration constant.
fn integrate_jet(h: &DiffPoly, w: JetVar) -> DiffPoly {
    let mut out = DiffPoly::zero(&h.space);
    for (m, c) in &h.terms {
        let k = m.iter().filter(|&&x| x == w).count() as i64;
        out.add_term(mono_insert(m, w), c.scale(&Rational::new(1, k + 1)));
    }
    out
}

fn integrate_ratfn(c: &RatFn, i: usize) -> Result<RatFn> {
    if c.den().uses_var(i) {
        return Err(Error::Unsupported(format!(
            "antiderivative of {c} in {} needs a denominator free of that variable",
            c.vars().name(i)
        )));
    }
    let coeffs = c.num().coefficients_in(i);
    let mut lifted = vec![MPoly::zero(c.vars())];
    for (k, p) in coeffs.iter().enumerate() {
        lifted.push(p.scale(&Rational::new(1, k as i64 + 1)));
    }
    let num = MPoly::from_coefficients_in(c.vars(), i, &lifted);
    RatFn::new(num, c.den().clone())
}

/// Euler inverse of a polynomial covector by the homotopy formula
/// `L = ∫₀¹ Σ_j u^j ψ_j(t·u) dt`.
pub fn volterra_homotopy(psi: &[DiffPoly]) -> Result<DiffPoly> {
    let space = match psi.first() {
        Some(p) => p.space.clone(),
        None => return Err(Error::DimensionMismatch("empty covector".into())),
    };
    if psi.len() != space.dim() {
        return Err(Error::DimensionMismatch(format!("covector of length {} in dimension {}", psi.len(), space.dim())));
    }
    if let Some(j) = psi.iter().position(|p| !p.is_polynomial()) {
        return Err(Error::Unsupported(format!(
            "component {} has rational coefficients; the homotopy integrand is singular at t = 0",
            j + 1
        )));
    }
    if !crate::variational::helmholtz_symmetric(psi)? {
        return Err(Error::NotVariational("the linearization is not self-adjoint".into()));
    }
    let mut out = DiffPoly::zero(&space);
    for (j, p) in psi.iter().enumerate() {
        let mut scaled = DiffPoly::zero(&space);
        for (m, c) in &p.terms {
            // Split the coefficient into homogeneous parts in u.
            for (e, q) in c.num().terms() {
                let d = e.iter().map(|&x| x as i64).sum::<i64>() + m.len() as i64;
                let coeff = MPoly::monomial(space.base(), e.clone(), q * &Rational::new(1, d + 1));
                scaled.add_term(m.clone(), RatFn::from_poly(coeff));
            }
        }
        out = out.add(&scaled.mul(&DiffPoly::jet(&space, j, 0)?));
    }
    Ok(out)
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest monomials first.
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> = {
                let mut parts = Vec::new();
                let mut i = 0;
                while i < m.len() {
                    let mut j = i;
                    while j < m.len() && m[j] == m[i] {
                        j += 1;
                    }
                    let name = self.space.jet_name(m[i]);
                    parts.push(if j - i > 1 { format!("{name}^{}", j - i) } else { name });
                    i = j;
                }
                parts
            };
            let mono = mono.join("*");
            let coef = c.to_string();
            let negated = coef.starts_with('-');
            let text = if m.is_empty() {
                coef
            } else if c.is_one() {
                mono
            } else if c.neg().is_one() {
                format!("-{mono}")
            } else if c.is_polynomial() && c.num().nterms() > 1 {
                format!("({coef})*{mono}")
            } else if !c.is_polynomial() && c.num().nterms() > 1 && !coef.starts_with('(') {
                format!("({coef})*{mono}")
            } else {
                format!("{coef}*{mono}")
            };
            if k > 0 && !(negated || text.starts_with('-')) {
                write!(f, "+")?;
            }
            write!(f, "{text}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp() -> Arc<Space> {
        Space::new(["u1", "u2", "u3"], DEFAULT_JET_BOUND)
    }

    fn j(s: &Arc<Space>, c: usize, o: usize) -> DiffPoly {
        DiffPoly::jet(s, c, o).unwrap()
    }

    #[test]
    fn total_derivative_basics() {
        let s = sp();
        assert!(DiffPoly::constant(&s, Rational::from_int(7)).total_x().unwrap().is_zero());
        assert_eq!(j(&s, 0, 0).total_x().unwrap(), j(&s, 0, 1));
        let f = j(&s, 0, 0).mul(&j(&s, 1, 1));
        let expected = j(&s, 0, 1).mul(&j(&s, 1, 1)).add(&j(&s, 0, 0).mul(&j(&s, 1, 2)));
        assert_eq!(f.total_x().unwrap(), expected);
    }

    #[test]
    fn jet_bound_is_enforced() {
        let s = Space::new(["u"], 2);
        let f = j(&s, 0, 2);
        assert_eq!(f.total_x(), Err(Error::JetOrderExceeded { order: 3, bound: 2 }));
        assert!(DiffPoly::jet(&s, 0, 3).is_err());
    }

    #[test]
    fn euler_examples() {
        let s = sp();
        let g = j(&s, 0, 0).mul(&j(&s, 1, 0));
        assert!(euler(&g.total_x().unwrap()).unwrap().iter().all(DiffPoly::is_zero));
        let f = j(&s, 0, 1).pow(2).scale(&Rational::new(1, 2));
        let e = euler(&f).unwrap();
        assert_eq!(e[0], j(&s, 0, 2).neg());
        assert!(e[1].is_zero() && e[2].is_zero());
        let h = j(&s, 0, 0).mul(&j(&s, 1, 0)).mul(&j(&s, 2, 0));
        let e = euler(&h).unwrap();
        assert_eq!(e[0], j(&s, 1, 0).mul(&j(&s, 2, 0)));
        assert_eq!(e[2], j(&s, 0, 0).mul(&j(&s, 1, 0)));
    }

    #[test]
    fn divergence_test() {
        let s = sp();
        assert!(is_total_divergence(&j(&s, 0, 1)).unwrap());
        assert!(is_total_divergence(&j(&s, 0, 0).mul(&j(&s, 0, 1))).unwrap());
        assert!(!is_total_divergence(&j(&s, 0, 1).pow(2)).unwrap());
    }

    #[test]
    fn formal_integral_examples() {
        let s = sp();
        assert_eq!(formal_x_integral(&j(&s, 0, 1)).unwrap(), j(&s, 0, 0));
        let f = j(&s, 0, 1).mul(&j(&s, 1, 1)).add(&j(&s, 0, 0).mul(&j(&s, 1, 2)));
        assert_eq!(formal_x_integral(&f).unwrap(), j(&s, 0, 0).mul(&j(&s, 1, 1)));
        assert!(formal_x_integral(&DiffPoly::zero(&s)).unwrap().is_zero());
        assert!(matches!(formal_x_integral(&j(&s, 0, 1).pow(2)), Err(Error::NotTotalDivergence { .. })));
    }

    #[test]
    fn formal_integral_with_rational_coefficients() {
        let s = sp();
        let v = s.base().clone();
        let c = RatFn::one(&v).div(&RatFn::var(&v, 1).sub(&RatFn::var(&v, 2))).unwrap();
        let g = DiffPoly::from_ratfn(&s, c).mul(&j(&s, 0, 1)).mul(&j(&s, 0, 2));
        assert_eq!(formal_x_integral(&g.total_x().unwrap()).unwrap(), g);
    }

    #[test]
    fn grade_examples() {
        let s = sp();
        assert_eq!(j(&s, 0, 2).grade(), Grade::Homogeneous(2));
        assert_eq!(j(&s, 0, 1).mul(&j(&s, 1, 1)).grade(), Grade::Homogeneous(2));
        assert_eq!(j(&s, 0, 0).add(&j(&s, 0, 1)).grade(), Grade::Inhomogeneous);
    }

    #[test]
    fn homotopy_examples() {
        let s = sp();
        let (u1, u2, u3) = (j(&s, 0, 0), j(&s, 1, 0), j(&s, 2, 0));
        let psi = vec![u2.mul(&u3), u1.mul(&u3), u1.mul(&u2)];
        assert_eq!(volterra_homotopy(&psi).unwrap(), u1.mul(&u2).mul(&u3));
        let zero = vec![DiffPoly::zero(&s); 3];
        assert!(volterra_homotopy(&zero).unwrap().is_zero());
        let psi = vec![j(&s, 0, 2).neg(), DiffPoly::zero(&s), DiffPoly::zero(&s)];
        let l = volterra_homotopy(&psi).unwrap();
        assert_eq!(euler(&l).unwrap(), psi);
        let target = j(&s, 0, 1).pow(2).scale(&Rational::new(1, 2));
        assert!(is_total_divergence(&l.sub(&target)).unwrap());
    }

    #[test]
    fn homotopy_rejects_bad_input() {
        let s = sp();
        let psi = vec![j(&s, 1, 1), DiffPoly::zero(&s), DiffPoly::zero(&s)];
        assert!(matches!(volterra_homotopy(&psi), Err(Error::NotVariational(_))));
        let v = s.base().clone();
        let c = RatFn::one(&v).div(&RatFn::var(&v, 0)).unwrap();
        let psi = vec![DiffPoly::from_ratfn(&s, c), DiffPoly::zero(&s), DiffPoly::zero(&s)];
        assert!(matches!(volterra_homotopy(&psi), Err(Error::Unsupported(_))));
    }

    #[test]
    fn printing() {
        let s = sp();
        let f = j(&s, 0, 1).mul(&j(&s, 1, 2)).add(&j(&s, 0, 4).scale(&Rational::new(-3, 2)));
        assert_eq!(f.to_string(), "-3/2*u1_x4+u1_x*u2_xx");
    }
}
