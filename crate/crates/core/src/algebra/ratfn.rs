//! Rational functions in normal form.
//!
//! `num / den` with `gcd(num, den) = 1`, `den` integer-primitive with a
//! positive leading coefficient (so any common scalar lives in `num`), and
//! zero represented as `0 / 1`. Under these rules two rational functions are
//! equal iff their fields are structurally equal.

use std::fmt;
use std::sync::Arc;

use super::gcd::{gcd, split_simple_factors};
use super::mpoly::{MPoly, Vars};
use super::rational::Rational;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: MPoly,
    den: MPoly,
}

impl RatFn {
    pub fn zero(vars: &Arc<Vars>) -> Self {
        RatFn { num: MPoly::zero(vars), den: MPoly::one(vars) }
    }

    pub fn one(vars: &Arc<Vars>) -> Self {
        RatFn { num: MPoly::one(vars), den: MPoly::one(vars) }
    }

    pub fn constant(vars: &Arc<Vars>, c: Rational) -> Self {
        RatFn { num: MPoly::constant(vars, c), den: MPoly::one(vars) }
    }

    pub fn var(vars: &Arc<Vars>, i: usize) -> Self {
        RatFn { num: MPoly::var(vars, i), den: MPoly::one(vars) }
    }

    pub fn from_poly(p: MPoly) -> Self {
        let den = MPoly::one(p.vars());
        RatFn { num: p, den }
    }

    pub fn new(num: MPoly, den: MPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: MPoly, den: MPoly) -> Self {
        num.same_ring(&den);
        if num.is_zero() {
            return RatFn::zero(num.vars());
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = gcd(&num, &den);
            if g.is_one() {
                (num, den)
            } else {
                (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
            }
        };
        Self::fix_scale(num, den)
    }

    fn fix_scale(num: MPoly, den: MPoly) -> Self {
        let (c, den) = den.integer_primitive();
        let num = if c.is_one() { num } else { num.scale(&c.recip().unwrap()) };
        RatFn { num, den }
    }

    pub fn vars(&self) -> &Arc<Vars> {
        self.num.vars()
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn den(&self) -> &MPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.num.uses_var(i) || self.den.uses_var(i)
    }

    /// Degree of homogeneity `deg num - deg den`, if both parts are homogeneous.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let n = self.num.homogeneous_degree()? as i64;
        let d = self.den.homogeneous_degree()? as i64;
        Some(n - d)
    }

    pub fn add(&self, other: &RatFn) -> RatFn {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            if self.den.is_one() {
                return RatFn::from_poly(self.num.add(&other.num));
            }
            return Self::normalize(self.num.add(&other.num), self.den.clone());
        }
        if self.den.is_one() {
            // gcd(a*d + n, d) = gcd(n, d) = 1
            return RatFn { num: self.num.mul(&other.den).add(&other.num), den: other.den.clone() };
        }
        if other.den.is_one() {
            return RatFn { num: other.num.mul(&self.den).add(&self.num), den: self.den.clone() };
        }
        let g = gcd(&self.den, &other.den);
        if g.is_one() {
            let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            if num.is_zero() {
                return RatFn::zero(self.vars());
            }
            return Self::fix_scale(num, self.den.mul(&other.den));
        }
        let d1 = self.den.div_exact(&g).unwrap();
        let d2 = other.den.div_exact(&g).unwrap();
        let num = self.num.mul(&d2).add(&other.num.mul(&d1));
        if num.is_zero() {
            return RatFn::zero(self.vars());
        }
        let h = gcd(&num, &g);
        if h.is_one() {
            Self::fix_scale(num, g.mul(&d1).mul(&d2))
        } else {
            let num = num.div_exact(&h).unwrap();
            let g = g.div_exact(&h).unwrap();
            Self::fix_scale(num, g.mul(&d1).mul(&d2))
        }
    }

    pub fn neg(&self) -> RatFn {
        RatFn { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &RatFn) -> RatFn {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> RatFn {
        if c.is_zero() {
            return RatFn::zero(self.vars());
        }
        RatFn { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul(&self, other: &RatFn) -> RatFn {
        if self.is_zero() || other.is_zero() {
            return RatFn::zero(self.vars());
        }
        if self.den.is_one() && other.den.is_one() {
            return RatFn::from_poly(self.num.mul(&other.num));
        }
        let g1 = gcd(&self.num, &other.den);
        let g2 = gcd(&other.num, &self.den);
        let (n1, d2) = if g1.is_one() {
            (self.num.clone(), other.den.clone())
        } else {
            (self.num.div_exact(&g1).unwrap(), other.den.div_exact(&g1).unwrap())
        };
        let (n2, d1) = if g2.is_one() {
            (other.num.clone(), self.den.clone())
        } else {
            (other.num.div_exact(&g2).unwrap(), self.den.div_exact(&g2).unwrap())
        };
        Self::fix_scale(n1.mul(&n2), d1.mul(&d2))
    }

    pub fn mul_poly(&self, p: &MPoly) -> RatFn {
        self.mul(&RatFn::from_poly(p.clone()))
    }

    pub fn inv(&self) -> Result<RatFn> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::fix_scale(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &RatFn) -> Result<RatFn> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i32) -> Result<RatFn> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let e = e as u32;
        Ok(RatFn { num: self.num.pow(e), den: self.den.pow(e) })
    }

    /// Partial derivative with respect to variable `i` (quotient rule).
    pub fn partial(&self, i: usize) -> RatFn {
        if !self.uses_var(i) {
            return RatFn::zero(self.vars());
        }
        if !self.den.uses_var(i) {
            return RatFn { num: self.num.partial(i), den: self.den.clone() }.renormalize_num_only();
        }
        // d/dx (n/d) = (n' d - n d') / d^2; dividing numerator and
        // denominator by g = gcd(d, d') first keeps degrees low.
        let dd = self.den.partial(i);
        let g = gcd(&self.den, &dd);
        let (d_over_g, dd_over_g) = (self.den.div_exact(&g).unwrap(), dd.div_exact(&g).unwrap());
        let num = self.num.partial(i).mul(&d_over_g).sub(&self.num.mul(&dd_over_g));
        Self::normalize(num, self.den.mul(&d_over_g))
    }

    fn renormalize_num_only(self) -> RatFn {
        // Only the numerator changed and its content may now share a factor
        // with the denominator.
        if self.num.is_zero() {
            return RatFn::zero(self.vars());
        }
        if self.den.is_one() {
            return self;
        }
        Self::normalize(self.num, self.den)
    }

    /// Evaluates at a rational point; `None` where the denominator vanishes.
    pub fn eval(&self, point: &[Rational]) -> Option<Rational> {
        let d = self.den.eval(point);
        if d.is_zero() {
            return None;
        }
        Some(&self.num.eval(point) / &d)
    }

    /// Substitutes variable `i := args[i]`; all arguments share one target ring.
    pub fn compose(&self, args: &[RatFn]) -> Result<RatFn> {
        let n = compose_poly(&self.num, args);
        let d = compose_poly(&self.den, args);
        n.div(&d)
    }

    /// Re-expresses over another variable list (variable `i` goes to `map[i]`).
    pub fn remap(&self, target: &Arc<Vars>, map: &[usize]) -> RatFn {
        RatFn { num: self.num.remap(target, map), den: self.den.remap(target, map) }
    }
}

/// Evaluates a polynomial at rational-function arguments.
pub fn compose_poly(p: &MPoly, args: &[RatFn]) -> RatFn {
    assert_eq!(args.len(), p.nvars(), "argument count");
    let target = match args.first() {
        Some(a) => a.vars().clone(),
        None => return RatFn::constant(&Vars::new(Vec::<String>::new()), p.lc()),
    };
    if args.iter().all(|a| a.is_polynomial()) {
        let mut acc = MPoly::zero(&target);
        let mut cache: Vec<Vec<MPoly>> = args.iter().map(|a| vec![MPoly::one(&target), a.num.clone()]).collect();
        for (e, c) in p.terms() {
            let mut t = MPoly::constant(&target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while cache[i].len() <= k as usize {
                    let next = cache[i].last().unwrap().mul(&args[i].num);
                    cache[i].push(next);
                }
                t = t.mul(&cache[i][k as usize]);
            }
            acc = acc.add(&t);
        }
        return RatFn::from_poly(acc);
    }
    // Clear denominators: P(p/q) * prod q_i^{d_i} is a polynomial.
    let degs: Vec<u32> = (0..p.nvars()).map(|i| p.degree_in(i)).collect();
    let mut acc = MPoly::zero(&target);
    for (e, c) in p.terms() {
        let mut t = MPoly::constant(&target, c.clone());
        for (i, &k) in e.iter().enumerate() {
            t = t.mul(&args[i].num.pow(k)).mul(&args[i].den.pow(degs[i] - k));
        }
        acc = acc.add(&t);
    }
    let mut scale = MPoly::one(&target);
    for (i, a) in args.iter().enumerate() {
        scale = scale.mul(&a.den.pow(degs[i]));
    }
    RatFn::normalize(acc, scale)
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if self.num.nterms() == 1 {
            write!(f, "{}", self.num)?;
        } else {
            write!(f, "({})", self.num)?;
        }
        write!(f, "/")?;
        let (factors, rest) = split_simple_factors(&self.den);
        let mut parts: Vec<String> = Vec::new();
        for (p, k) in &factors {
            let base = if p.nterms() == 1 { p.to_string() } else { format!("({p})") };
            parts.push(if *k > 1 { format!("{base}^{k}") } else { base });
        }
        if !rest.is_one() {
            parts.push(if rest.nterms() == 1 && parts.is_empty() { rest.to_string() } else { format!("({rest})") });
        }
        if parts.len() == 1 {
            let single = &parts[0];
            // `x^2` and `(x-y)^2` bind tighter than `/`; a bare product does not.
            if single.contains('*') && !single.starts_with('(') {
                write!(f, "({single})")
            } else {
                write!(f, "{single}")
            }
        } else {
            write!(f, "({})", parts.join("*"))
        }
    }
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> (Arc<Vars>, RatFn, RatFn, RatFn) {
        let v = Vars::new(["u1", "u2", "u3"]);
        (v.clone(), RatFn::var(&v, 0), RatFn::var(&v, 1), RatFn::var(&v, 2))
    }

    #[test]
    fn cancellation_to_one() {
        let (_, u1, u2, _) = u();
        let d = u1.sub(&u2);
        assert!(d.div(&d).unwrap().is_one());
    }

    #[test]
    fn additive_inverse() {
        let (v, u1, u2, _) = u();
        let one = RatFn::one(&v);
        let a = one.div(&u1.sub(&u2)).unwrap();
        let b = one.div(&u2.sub(&u1)).unwrap();
        assert!(a.add(&b).is_zero());
    }

    #[test]
    fn metric_component_times_square() {
        let (v, u1, u2, _) = u();
        let d = u1.sub(&u2);
        let g12 = RatFn::constant(&v, Rational::from_int(-1)).div(&d.pow(2).unwrap()).unwrap();
        assert_eq!(g12.to_string(), "-1/(u1-u2)^2");
        let prod = g12.mul(&d.pow(2).unwrap());
        assert_eq!(prod, RatFn::constant(&v, Rational::from_int(-1)));
    }

    #[test]
    fn partial_derivatives() {
        let (v, u1, u2, u3) = u();
        assert!(RatFn::constant(&v, Rational::from_int(5)).partial(0).is_zero());
        assert_eq!(u1.mul(&u2).mul(&u3).partial(0), u2.mul(&u3));
        let d = u1.sub(&u2);
        let f = RatFn::constant(&v, Rational::from_int(-1)).div(&d.pow(2).unwrap()).unwrap();
        let expected = RatFn::constant(&v, Rational::from_int(-2)).div(&d.pow(3).unwrap()).unwrap();
        assert_eq!(f.partial(1), expected);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let (v, u1, _, _) = u();
        assert_eq!(u1.div(&RatFn::zero(&v)), Err(Error::DivisionByZero));
    }

    #[test]
    fn scale_lives_in_numerator() {
        let (v, u1, u2, _) = u();
        let two = RatFn::constant(&v, Rational::from_int(2));
        let f = u1.div(&two.mul(&u2)).unwrap();
        assert_eq!(f.den(), u2.num());
        assert_eq!(f.to_string(), "1/2*u1/u2");
    }

    #[test]
    fn composition() {
        let (v, u1, u2, _) = u();
        // (x/y) at x = u1 + u2, y = u1 - u2
        let w = Vars::new(["x", "y"]);
        let f = RatFn::var(&w, 0).div(&RatFn::var(&w, 1)).unwrap();
        let g = f.compose(&[u1.add(&u2), u1.sub(&u2)]).unwrap();
        assert_eq!(g, u1.add(&u2).div(&u1.sub(&u2)).unwrap());
        let h = f.compose(&[RatFn::one(&v), u1.inv().unwrap()]).unwrap();
        assert_eq!(h, u1);
    }
}
