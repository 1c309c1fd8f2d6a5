//! Sparse multivariate polynomials over ℚ.
//!
//! Terms are kept sorted in descending graded-lexicographic order (total
//! degree first, then lexicographic with the first variable most
//! significant). No zero coefficients are stored, so two polynomials over the
//! same variables are equal iff their term vectors are equal.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::rational::Rational;

pub type Exponents = SmallVec<[u32; 4]>;

/// Ordered list of variable names shared by every polynomial of a ring.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Vars {
    names: Vec<String>,
}

impl Vars {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Arc<Vars> {
        Arc::new(Vars { names: names.into_iter().map(Into::into).collect() })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

pub(crate) fn total_degree(e: &[u32]) -> u64 {
    e.iter().map(|&x| x as u64).sum()
}

/// Graded-lex comparison.
pub fn grlex(a: &[u32], b: &[u32]) -> Ordering {
    total_degree(a).cmp(&total_degree(b)).then_with(|| a.cmp(b))
}

fn add_exps(a: &[u32], b: &[u32]) -> Exponents {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.checked_add(*y).expect("exponent overflow"))
        .collect()
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MPoly {
    vars: Arc<Vars>,
    terms: Vec<(Exponents, Rational)>,
}

impl MPoly {
    pub fn zero(vars: &Arc<Vars>) -> Self {
        MPoly { vars: vars.clone(), terms: Vec::new() }
    }

    pub fn one(vars: &Arc<Vars>) -> Self {
        Self::constant(vars, Rational::one())
    }

    pub fn constant(vars: &Arc<Vars>, c: Rational) -> Self {
        Self::monomial(vars, SmallVec::from_elem(0, vars.len()), c)
    }

    pub fn var(vars: &Arc<Vars>, i: usize) -> Self {
        let mut e: Exponents = SmallVec::from_elem(0, vars.len());
        e[i] = 1;
        Self::monomial(vars, e, Rational::one())
    }

    pub fn monomial(vars: &Arc<Vars>, exps: Exponents, c: Rational) -> Self {
        assert_eq!(exps.len(), vars.len(), "exponent vector length");
        if c.is_zero() {
            return Self::zero(vars);
        }
        MPoly { vars: vars.clone(), terms: vec![(exps, c)] }
    }

    /// Builds a polynomial from arbitrary (possibly repeated, unsorted) terms.
    pub fn from_terms(vars: &Arc<Vars>, terms: impl IntoIterator<Item = (Exponents, Rational)>) -> Self {
        let mut acc: HashMap<Exponents, Rational> = HashMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent vector length");
            *acc.entry(e).or_insert_with(Rational::zero) += &c;
        }
        Self::from_map(vars, acc)
    }

    fn from_map(vars: &Arc<Vars>, acc: HashMap<Exponents, Rational>) -> Self {
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| grlex(&b.0, &a.0));
        MPoly { vars: vars.clone(), terms }
    }

    pub fn vars(&self) -> &Arc<Vars> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> &[(Exponents, Rational)] {
        &self.terms
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        match self.terms.as_slice() {
            [] => true,
            [(e, _)] => e.iter().all(|&x| x == 0),
            _ => false,
        }
    }

    pub fn is_one(&self) -> bool {
        self.is_constant() && self.terms.first().is_some_and(|(_, c)| c.is_one())
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_zero() {
            Some(Rational::zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    /// Leading coefficient (grlex); zero for the zero polynomial.
    pub fn lc(&self) -> Rational {
        self.terms.first().map(|t| t.1.clone()).unwrap_or_else(Rational::zero)
    }

    pub fn lm(&self) -> Option<&Exponents> {
        self.terms.first().map(|t| &t.0)
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.first().map(|t| total_degree(&t.0))
    }

    /// `Some(d)` when every term has total degree `d`.
    pub fn homogeneous_degree(&self) -> Option<u64> {
        let d = self.total_degree()?;
        self.terms.iter().all(|t| total_degree(&t.0) == d).then_some(d)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.iter().map(|t| t.0[i]).max().unwrap_or(0)
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.iter().any(|t| t.0[i] > 0)
    }

    pub(crate) fn same_ring(&self, other: &MPoly) {
        assert!(
            Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars,
            "polynomials over different variable lists: {:?} vs {:?}",
            self.vars.names(),
            other.vars.names()
        );
    }

    fn merge(&self, other: &MPoly, negate: bool) -> MPoly {
        self.same_ring(other);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match grlex(&a[i].0, &b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0.clone(), c));
        }
        MPoly { vars: self.vars.clone(), terms: out }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        self.merge(other, false)
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        if other.is_zero() {
            return self.clone();
        }
        self.merge(other, true)
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(&self.vars);
        }
        if c.is_one() {
            return self.clone();
        }
        MPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    /// Multiplication by `c * x^e`; order is preserved since grlex is a monomial order.
    pub fn mul_term(&self, e: &[u32], c: &Rational) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(&self.vars);
        }
        MPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(x, y)| (add_exps(x, e), y * c)).collect(),
        }
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        self.same_ring(other);
        if self.is_zero() || other.is_zero() {
            return MPoly::zero(&self.vars);
        }
        if other.terms.len() == 1 {
            return self.mul_term(&other.terms[0].0, &other.terms[0].1);
        }
        if self.terms.len() == 1 {
            return other.mul_term(&self.terms[0].0, &self.terms[0].1);
        }
        let mut acc: HashMap<Exponents, Rational> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let p = ca * cb;
                acc.entry(add_exps(ea, eb)).and_modify(|c| *c += &p).or_insert(p);
            }
        }
        MPoly::from_map(&self.vars, acc)
    }

    pub fn pow(&self, mut e: u32) -> MPoly {
        let mut base = self.clone();
        let mut acc = MPoly::one(&self.vars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn partial(&self, i: usize) -> MPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e[i] > 0)
            .map(|(e, c)| {
                let mut e2 = e.clone();
                e2[i] -= 1;
                (e2, c * &Rational::from_int(e[i] as i64))
            });
        // Differentiation can break grlex order between terms of different
        // degree in variable i, so re-sort.
        MPoly::from_terms(&self.vars, terms)
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars());
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e.iter()) {
                if k > 0 {
                    t *= &x.pow(k as i32);
                }
            }
            acc += &t;
        }
        acc
    }

    /// Substitutes `x_i := value`, keeping the variable list.
    pub fn eval_var(&self, i: usize, value: &Rational) -> MPoly {
        let terms = self.terms.iter().map(|(e, c)| {
            let mut e2 = e.clone();
            let k = e2[i];
            e2[i] = 0;
            (e2, c * &value.pow(k as i32))
        });
        MPoly::from_terms(&self.vars, terms)
    }

    /// Re-expresses the polynomial over `target`, sending variable `i` to
    /// `target` variable `map[i]`.
    pub fn remap(&self, target: &Arc<Vars>, map: &[usize]) -> MPoly {
        assert_eq!(map.len(), self.nvars());
        let terms = self.terms.iter().map(|(e, c)| {
            let mut e2: Exponents = SmallVec::from_elem(0, target.len());
            for (k, &x) in e.iter().enumerate() {
                e2[map[k]] += x;
            }
            (e2, c.clone())
        });
        MPoly::from_terms(target, terms)
    }

    /// Exact division; `None` if `other` does not divide `self`.
    pub fn div_exact(&self, other: &MPoly) -> Option<MPoly> {
        self.same_ring(other);
        assert!(!other.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(MPoly::zero(&self.vars));
        }
        if other.terms.len() == 1 {
            let (eb, cb) = &other.terms[0];
            let inv = cb.recip().unwrap();
            let mut terms = Vec::with_capacity(self.terms.len());
            for (e, c) in &self.terms {
                if !divides(eb, e) {
                    return None;
                }
                let q: Exponents = e.iter().zip(eb).map(|(x, y)| x - y).collect();
                terms.push((q, c * &inv));
            }
            return Some(MPoly { vars: self.vars.clone(), terms });
        }
        let (lmb, lcb) = (&other.terms[0].0, &other.terms[0].1);
        let lcb_inv = lcb.recip().unwrap();
        let mut rem = self.clone();
        let mut quot: Vec<(Exponents, Rational)> = Vec::new();
        while let Some((lm, lc)) = rem.terms.first().cloned() {
            if !divides(lmb, &lm) || grlex(&lm, lmb) == Ordering::Less {
                return None;
            }
            let q: Exponents = lm.iter().zip(lmb).map(|(x, y)| x - y).collect();
            let qc = &lc * &lcb_inv;
            rem = rem.sub(&other.mul_term(&q, &qc));
            quot.push((q, qc));
        }
        // Quotient terms were produced in strictly descending order.
        Some(MPoly { vars: self.vars.clone(), terms: quot })
    }

    /// Minimum exponent of each variable over all terms.
    pub fn monomial_content(&self) -> Exponents {
        let mut m: Exponents = SmallVec::from_elem(0, self.nvars());
        if let Some((first, _)) = self.terms.first() {
            m = first.clone();
            for (e, _) in &self.terms[1..] {
                for (x, y) in m.iter_mut().zip(e.iter()) {
                    *x = (*x).min(*y);
                }
            }
        }
        m
    }

    pub fn div_monomial(&self, m: &[u32]) -> MPoly {
        MPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().zip(m).map(|(x, y)| x - y).collect(), c.clone()))
                .collect(),
        }
    }

    /// Splits `self = content * primitive` where `primitive` has integer
    /// coefficients with gcd 1 and a positive leading coefficient.
    pub fn integer_primitive(&self) -> (Rational, MPoly) {
        if self.is_zero() {
            return (Rational::one(), self.clone());
        }
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for (_, c) in &self.terms {
            g = g.gcd(c.numer());
            l = l.lcm(c.denom());
        }
        let mut content = Rational::from_big(g, l);
        if self.terms[0].1.is_negative() {
            content = -content;
        }
        if content.is_one() {
            return (content, self.clone());
        }
        let inv = content.recip().unwrap();
        (content, self.scale(&inv))
    }

    pub fn is_integer_primitive(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        if self.terms[0].1.is_negative() {
            return false;
        }
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            if !c.is_integer() {
                return false;
            }
            g = g.gcd(c.numer());
        }
        g.abs().is_one()
    }

    /// Coefficients of `self` viewed as a univariate polynomial in variable
    /// `i`; entry `k` multiplies `x_i^k` and does not involve `x_i`.
    pub fn coefficients_in(&self, i: usize) -> Vec<MPoly> {
        let d = self.degree_in(i) as usize;
        let mut buckets: Vec<Vec<(Exponents, Rational)>> = vec![Vec::new(); d + 1];
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[i] as usize;
            e2[i] = 0;
            buckets[k].push((e2, c.clone()));
        }
        buckets
            .into_iter()
            .map(|mut t| {
                // Removing one variable keeps relative grlex order only within
                // equal x_i-degree buckets for lex, not for the degree part.
                t.sort_unstable_by(|a, b| grlex(&b.0, &a.0));
                MPoly { vars: self.vars.clone(), terms: t }
            })
            .collect()
    }

    pub fn from_coefficients_in(vars: &Arc<Vars>, i: usize, coeffs: &[MPoly]) -> MPoly {
        let mut acc = MPoly::zero(vars);
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut e: Exponents = SmallVec::from_elem(0, vars.len());
            e[i] = k as u32;
            acc = acc.add(&c.mul_term(&e, &Rational::one()));
        }
        acc
    }

    pub(crate) fn fmt_with(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let is_const = e.iter().all(|&x| x == 0);
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, "-")?;
            } else {
                write!(f, "+")?;
            }
            let mut first = true;
            if is_const || !mag.is_one() {
                write!(f, "{mag}")?;
                first = false;
            }
            for (i, &x) in e.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "{}", self.vars.name(i))?;
                if x > 1 {
                    write!(f, "^{x}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f)
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyz() -> Arc<Vars> {
        Vars::new(["x", "y", "z"])
    }

    #[test]
    fn grlex_ordering_and_printing() {
        let v = xyz();
        let x = MPoly::var(&v, 0);
        let y = MPoly::var(&v, 1);
        let z = MPoly::var(&v, 2);
        let p = x.add(&y.mul(&y)).add(&z.mul(&x)).sub(&MPoly::constant(&v, Rational::from_int(3)));
        assert_eq!(p.to_string(), "x*z+y^2+x-3");
        assert_eq!(p.lc(), Rational::one());
    }

    #[test]
    fn exact_division() {
        let v = xyz();
        let x = MPoly::var(&v, 0);
        let y = MPoly::var(&v, 1);
        let a = x.sub(&y);
        let b = x.add(&y).scale(&Rational::new(1, 2));
        let p = a.mul(&b).mul(&a);
        assert_eq!(p.div_exact(&a).unwrap(), a.mul(&b));
        assert_eq!(p.div_exact(&b).unwrap(), a.mul(&a));
        assert!(p.div_exact(&x).is_none());
        assert!(x.div_exact(&x.mul(&y)).is_none());
    }

    #[test]
    fn partial_and_eval() {
        let v = xyz();
        let x = MPoly::var(&v, 0);
        let y = MPoly::var(&v, 1);
        let z = MPoly::var(&v, 2);
        let p = x.mul(&y).mul(&z);
        assert_eq!(p.partial(0), y.mul(&z));
        let pt = [Rational::from_int(2), Rational::from_int(3), Rational::new(1, 2)];
        assert_eq!(p.eval(&pt), Rational::from_int(3));
    }

    #[test]
    fn univariate_view_round_trip() {
        let v = xyz();
        let x = MPoly::var(&v, 0);
        let y = MPoly::var(&v, 1);
        let p = x.mul(&x).mul(&y).add(&y.pow(3)).add(&x);
        let cs = p.coefficients_in(0);
        assert_eq!(cs.len(), 3);
        assert_eq!(MPoly::from_coefficients_in(&v, 0, &cs), p);
    }

    #[test]
    fn primitive_part() {
        let v = xyz();
        let x = MPoly::var(&v, 0);
        let p = x.scale(&Rational::new(-4, 6)).add(&MPoly::constant(&v, Rational::new(2, 9)));
        let (c, pp) = p.integer_primitive();
        assert_eq!(c, Rational::new(-2, 9));
        assert_eq!(pp.to_string(), "3*x-1");
        assert!(pp.is_integer_primitive());
    }
}
