//! Multivariate polynomial gcd over ℚ.
//!
//! Recursive primitive-PRS: the polynomials are viewed as univariate in a main
//! variable with coefficients in ℚ[other variables], contents are split off
//! recursively and the primitive parts run through a pseudo-remainder
//! sequence. A cheap specialisation test short-circuits the frequent coprime
//! case. The result is always the integer-primitive associate with positive
//! leading coefficient, so it is unique.

use super::mpoly::{Exponents, MPoly};
use super::rational::Rational;

/// Canonical gcd. `gcd(0, 0) = 0`.
pub fn gcd(a: &MPoly, b: &MPoly) -> MPoly {
    a.same_ring(b);
    if a.is_zero() {
        return b.integer_primitive().1;
    }
    if b.is_zero() {
        return a.integer_primitive().1;
    }
    let vars = a.vars().clone();
    if a.is_constant() || b.is_constant() {
        return MPoly::one(&vars);
    }
    let (_, a) = a.integer_primitive();
    let (_, b) = b.integer_primitive();
    if a == b {
        return a;
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let common: Exponents = ma.iter().zip(mb.iter()).map(|(x, y)| *x.min(y)).collect();
    let a = a.div_monomial(&ma);
    let b = b.div_monomial(&mb);
    let g = gcd_no_monomial(a, b);
    g.mul_term(&common, &Rational::one())
}

/// gcd of a list; stops early once the gcd becomes 1.
pub fn gcd_many<'a>(polys: impl IntoIterator<Item = &'a MPoly>) -> Option<MPoly> {
    let mut acc: Option<MPoly> = None;
    for p in polys {
        if p.is_zero() {
            continue;
        }
        acc = Some(match acc {
            None => p.integer_primitive().1,
            Some(g) => gcd(&g, p),
        });
        if acc.as_ref().is_some_and(|g| g.is_constant()) {
            break;
        }
    }
    acc
}

fn gcd_no_monomial(mut a: MPoly, mut b: MPoly) -> MPoly {
    let vars = a.vars().clone();
    let one = MPoly::one(&vars);
    if a.is_constant() || b.is_constant() {
        return one;
    }
    // A variable present in only one operand cannot divide the gcd.
    loop {
        let mut changed = false;
        for i in 0..vars.len() {
            let (ua, ub) = (a.uses_var(i), b.uses_var(i));
            if ua && !ub {
                a = content_in(&a, i);
                changed = true;
            } else if ub && !ua {
                b = content_in(&b, i);
                changed = true;
            }
            if a.is_constant() || b.is_constant() {
                return one;
            }
        }
        if !changed {
            break;
        }
    }
    if a == b {
        return a;
    }
    if a.nterms() >= b.nterms() {
        if a.div_exact(&b).is_some() {
            return b;
        }
    } else if b.div_exact(&a).is_some() {
        return a;
    }
    let x = (0..vars.len())
        .filter(|&i| a.uses_var(i))
        .min_by_key(|&i| a.degree_in(i).max(b.degree_in(i)))
        .expect("non-constant operands share a variable");
    let ca = content_in(&a, x);
    let cb = content_in(&b, x);
    let pa = if ca.is_one() { a } else { a.div_exact(&ca).expect("content divides") };
    let pb = if cb.is_one() { b } else { b.div_exact(&cb).expect("content divides") };
    let gc = gcd(&ca, &cb);
    let gp = if coprime_by_specialisation(&pa, &pb, x) { one } else { primitive_prs(pa, pb, x) };
    gc.mul(&gp).integer_primitive().1
}

/// gcd of the coefficients of `p` viewed as a polynomial in `x`.
pub fn content_in(p: &MPoly, x: usize) -> MPoly {
    let cs = p.coefficients_in(x);
    gcd_many(cs.iter().rev()).unwrap_or_else(|| MPoly::zero(p.vars()))
}

/// Primitive part of `p` with respect to `x`, made integer-primitive.
fn pp_in(p: &MPoly, x: usize) -> MPoly {
    let c = content_in(p, x);
    let q = if c.is_constant() { p.clone() } else { p.div_exact(&c).expect("content divides") };
    q.integer_primitive().1
}

/// Rigorous coprimality certificate: if the specialisations of two
/// `x`-primitive polynomials at a point where both leading coefficients
/// survive have a gcd of degree 0 in `x`, the polynomials are coprime.
fn coprime_by_specialisation(a: &MPoly, b: &MPoly, x: usize) -> bool {
    let n = a.nvars();
    if (0..n).all(|i| i == x || (!a.uses_var(i) && !b.uses_var(i))) {
        return false;
    }
    let la = a.coefficients_in(x).pop().unwrap();
    let lb = b.coefficients_in(x).pop().unwrap();
    const SEEDS: [i64; 8] = [3, 7, 11, 13, 17, 19, 23, 29];
    for attempt in 0..3usize {
        let point: Vec<Rational> =
            (0..n).map(|i| Rational::from_int(SEEDS[(i + 3 * attempt) % SEEDS.len()] + attempt as i64)).collect();
        if la.eval(&point).is_zero() || lb.eval(&point).is_zero() {
            continue;
        }
        let mut sa = a.clone();
        let mut sb = b.clone();
        for (i, v) in point.iter().enumerate() {
            if i != x {
                sa = sa.eval_var(i, v);
                sb = sb.eval_var(i, v);
            }
        }
        let g = univariate_gcd_degree(sa, sb, x);
        return g == 0;
    }
    false
}

fn univariate_gcd_degree(a: MPoly, b: MPoly, x: usize) -> u32 {
    let (mut f, mut g) = if a.degree_in(x) >= b.degree_in(x) { (a, b) } else { (b, a) };
    loop {
        if g.is_zero() {
            return f.degree_in(x);
        }
        if g.degree_in(x) == 0 {
            return 0;
        }
        let r = prem(&f, &g, x);
        let r = if r.is_zero() { r } else { r.integer_primitive().1 };
        f = g;
        g = r;
    }
}

fn primitive_prs(a: MPoly, b: MPoly, x: usize) -> MPoly {
    let (mut f, mut g) = if a.degree_in(x) >= b.degree_in(x) { (a, b) } else { (b, a) };
    loop {
        let r = prem(&f, &g, x);
        if r.is_zero() {
            return g.integer_primitive().1;
        }
        if r.degree_in(x) == 0 {
            return MPoly::one(f.vars());
        }
        f = g;
        g = pp_in(&r, x);
    }
}

/// Pseudo-remainder of `f` by `g` with respect to variable `x`:
/// `lc(g)^(deg f - deg g + 1) f = q g + r`.
pub fn prem(f: &MPoly, g: &MPoly, x: usize) -> MPoly {
    let vars = f.vars().clone();
    let mut r = f.coefficients_in(x);
    let gc = g.coefficients_in(x);
    let dg = gc.len() - 1;
    let lcg = gc[dg].clone();
    if r.len() < gc.len() {
        return f.clone();
    }
    let mut steps = r.len() - dg;
    while r.len() > dg && !r.is_empty() {
        let k = r.len() - 1 - dg;
        let lr = r.last().unwrap().clone();
        for c in r.iter_mut() {
            *c = c.mul(&lcg);
        }
        for (j, gj) in gc.iter().enumerate() {
            if !gj.is_zero() {
                r[j + k] = r[j + k].sub(&lr.mul(gj));
            }
        }
        while r.last().is_some_and(|c| c.is_zero()) {
            r.pop();
        }
        steps -= 1;
    }
    let mut out = MPoly::from_coefficients_in(&vars, x, &r);
    if steps > 0 && !out.is_zero() {
        out = out.mul(&lcg.pow(steps as u32));
    }
    out
}

/// Used when printing: returns `(factor, multiplicity)`
/// pairs of the linear factors `x_i - x_j` and `x_i` dividing `p`, plus the
/// remaining cofactor.
pub fn split_simple_factors(p: &MPoly) -> (Vec<(MPoly, u32)>, MPoly) {
    let vars = p.vars().clone();
    let n = vars.len();
    let mut rest = p.clone();
    let mut out = Vec::new();
    let mono = rest.monomial_content();
    rest = rest.div_monomial(&mono);
    for (i, &k) in mono.iter().enumerate() {
        if k > 0 {
            out.push((MPoly::var(&vars, i), k));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !(rest.uses_var(i) && rest.uses_var(j)) {
                continue;
            }
            let lin = MPoly::var(&vars, i).sub(&MPoly::var(&vars, j));
            let mut k = 0;
            while let Some(q) = rest.div_exact(&lin) {
                rest = q;
                k += 1;
            }
            if k > 0 {
                out.push((lin, k));
            }
        }
    }
    (out, rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::mpoly::Vars;
    use std::sync::Arc;

    fn ring() -> (Arc<Vars>, MPoly, MPoly, MPoly) {
        let v = Vars::new(["x", "y", "z"]);
        let x = MPoly::var(&v, 0);
        let y = MPoly::var(&v, 1);
        let z = MPoly::var(&v, 2);
        (v, x, y, z)
    }

    #[test]
    fn gcd_of_products() {
        let (v, x, y, z) = ring();
        let one = MPoly::one(&v);
        let a = x.sub(&y);
        let b = x.sub(&z);
        let c = y.mul(&z).add(&one);
        let p = a.pow(2).mul(&b).mul(&c);
        let q = a.mul(&b.pow(3)).mul(&x.add(&one));
        assert_eq!(gcd(&p, &q), a.mul(&b).integer_primitive().1);
        assert_eq!(gcd(&p, &MPoly::zero(&v)), p.integer_primitive().1);
        assert!(gcd(&c, &x.add(&one)).is_one());
    }

    #[test]
    fn gcd_with_monomial_content() {
        let (_, x, y, _) = ring();
        let p = x.pow(3).mul(&y).mul(&x.add(&y));
        let q = x.mul(&y.pow(2)).mul(&x.add(&y)).scale(&Rational::new(-3, 2));
        assert_eq!(gcd(&p, &q), x.mul(&y).mul(&x.add(&y)));
    }

    #[test]
    fn prem_identity() {
        let (_, x, y, _) = ring();
        let f = x.pow(3).add(&y);
        let g = y.mul(&x).add(&MPoly::one(x.vars()));
        let r = prem(&f, &g, 0);
        assert!(r.degree_in(0) < 1);
    }

    #[test]
    fn simple_factor_split() {
        let (_, x, y, z) = ring();
        let p = x.sub(&y).pow(2).mul(&y.sub(&z)).mul(&z).mul(&x.add(&z));
        let (fs, rest) = split_simple_factors(&p);
        assert_eq!(fs.len(), 3);
        assert_eq!(rest, x.add(&z));
    }
}
