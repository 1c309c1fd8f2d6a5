//! Exact dense linear algebra over ℚ and over rational functions.

use std::sync::Arc;

use crate::algebra::{RatFn, Rational, Vars};
use crate::error::{Error, Result};

pub type QMatrix = Vec<Vec<Rational>>;
pub type RMatrix = Vec<Vec<RatFn>>;

pub fn q_identity(n: usize) -> QMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect()
}

pub fn q_mul(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let (n, m, p) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    (0..n)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let mut s = Rational::zero();
                    for k in 0..m {
                        s += &(&a[i][k] * &b[k][j]);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn q_is_symmetric(a: &QMatrix) -> bool {
    a.iter().enumerate().all(|(i, row)| row.len() == a.len() && row.iter().enumerate().all(|(j, x)| *x == a[j][i]))
}

/// Inverse by Gauss-Jordan elimination.
pub fn q_inverse(a: &QMatrix) -> Result<QMatrix> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("matrix is not square".into()));
    }
    let mut m: Vec<Vec<Rational>> = a.iter().cloned().collect();
    let mut inv = q_identity(n);
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero()).ok_or_else(|| Error::Singular("constant matrix".into()))?;
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = m[col][col].recip().unwrap();
        for j in 0..n {
            m[col][j] = &m[col][j] * &p;
            inv[col][j] = &inv[col][j] * &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in 0..n {
                    let t = &f * &m[col][j];
                    m[r][j] -= &t;
                    let t = &f * &inv[col][j];
                    inv[r][j] -= &t;
                }
            }
        }
    }
    Ok(inv)
}

/// Solves `A x = b` exactly. Free variables are set to zero; returns `None`
/// when the system is inconsistent.
pub fn q_solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> = a.iter().zip(b).map(|(r, x)| r.iter().cloned().chain(std::iter::once(x.clone())).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip().unwrap();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &(&f * y);
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Some(x)
}

/// Inertia `(positive, negative)` of a symmetric rational matrix, from a
/// symmetric Gaussian elimination (`LDLᵀ` with pivoting on 2×2 blocks reduced
/// by a congruence when the diagonal vanishes).
pub fn q_inertia(a: &QMatrix) -> Result<(usize, usize)> {
    if !q_is_symmetric(a) {
        return Err(Error::Invalid("inertia of a non-symmetric matrix".into()));
    }
    let mut m = a.clone();
    let mut n = m.len();
    let (mut pos, mut neg) = (0, 0);
    while n > 0 {
        let k = match (0..n).find(|&i| !m[i][i].is_zero()) {
            Some(k) => k,
            None => match (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| !m[i][j].is_zero()) {
                // Congruence e_i <- e_i + e_j makes the diagonal entry 2 m_ij.
                Some((i, j)) => {
                    for r in 0..n {
                        let t = m[r][j].clone();
                        m[r][i] += &t;
                    }
                    for c in 0..n {
                        let t = m[j][c].clone();
                        m[i][c] += &t;
                    }
                    i
                }
                None => break,
            },
        };
        let d = m[k][k].clone();
        if d.is_negative() {
            neg += 1;
        } else {
            pos += 1;
        }
        let piv_row = m[k].clone();
        let mut next = Vec::with_capacity(n - 1);
        for i in (0..n).filter(|&i| i != k) {
            let f = &piv_row[i] / &d;
            next.push((0..n).filter(|&j| j != k).map(|j| &m[i][j] - &(&f * &piv_row[j])).collect());
        }
        m = next;
        n -= 1;
    }
    Ok((pos, neg))
}

pub fn r_identity(vars: &Arc<Vars>, n: usize) -> RMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { RatFn::one(vars) } else { RatFn::zero(vars) }).collect()).collect()
}

pub fn r_from_q(vars: &Arc<Vars>, a: &QMatrix) -> RMatrix {
    a.iter().map(|r| r.iter().map(|x| RatFn::constant(vars, x.clone())).collect()).collect()
}

pub fn r_mul(a: &RMatrix, b: &RMatrix) -> RMatrix {
    let vars = a[0][0].vars().clone();
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let mut s = RatFn::zero(&vars);
                    for k in 0..m {
                        if !a[i][k].is_zero() && !b[k][j].is_zero() {
                            s = s.add(&a[i][k].mul(&b[k][j]));
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn r_transpose(a: &RMatrix) -> RMatrix {
    let n = a.first().map_or(0, Vec::len);
    (0..n).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn r_is_identity(a: &RMatrix) -> bool {
    a.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() }))
}

/// Determinant by Gaussian elimination over the field of
/// rational functions.
pub fn r_det(a: &RMatrix) -> Result<RatFn> {
    let n = a.len();
    let vars = a[0][0].vars().clone();
    let mut m = a.clone();
    let mut det = RatFn::one(&vars);
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Ok(RatFn::zero(&vars));
        };
        if piv != col {
            m.swap(col, piv);
            det = det.neg();
        }
        det = det.mul(&m[col][col]);
        let inv = m[col][col].inv()?;
        for r in (col + 1)..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].mul(&inv);
            for j in col..n {
                let t = f.mul(&m[col][j]);
                m[r][j] = m[r][j].sub(&t);
            }
        }
    }
    Ok(det)
}

/// Inverse over the field of rational functions.
pub fn r_inverse(a: &RMatrix) -> Result<RMatrix> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("matrix is not square".into()));
    }
    let vars = a[0][0].vars().clone();
    let mut m = a.clone();
    let mut inv = r_identity(&vars, n);
    for col in 0..n {
        // Prefer the simplest nonzero pivot to keep intermediate sizes down.
        let piv = (col..n)
            .filter(|&r| !m[r][col].is_zero())
            .min_by_key(|&r| m[r][col].num().nterms() + m[r][col].den().nterms())
            .ok_or_else(|| Error::Singular("determinant vanishes identically".into()))?;
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = m[col][col].inv()?;
        for j in 0..n {
            m[col][j] = m[col][j].mul(&p);
            inv[col][j] = inv[col][j].mul(&p);
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in 0..n {
                    if !m[col][j].is_zero() {
                        m[r][j] = m[r][j].sub(&f.mul(&m[col][j]));
                    }
                    if !inv[col][j].is_zero() {
                        inv[r][j] = inv[r][j].sub(&f.mul(&inv[col][j]));
                    }
                }
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[&[i64]]) -> QMatrix {
        rows.iter().map(|r| r.iter().map(|&x| Rational::from_int(x)).collect()).collect()
    }

    #[test]
    fn rational_inverse() {
        let k = q(&[&[1, -1, -1], &[-1, 1, -1], &[-1, -1, 1]]);
        let inv = q_inverse(&k).unwrap();
        assert_eq!(q_mul(&k, &inv), q_identity(3));
        assert!(q_inverse(&q(&[&[1, 2], &[2, 4]])).is_err());
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = q(&[&[1, 1, 0], &[0, 1, 1], &[1, 2, 1]]);
        let b: Vec<Rational> = [1, 2, 3].iter().map(|&x| Rational::from_int(x)).collect();
        let x = q_solve(&a, &b).unwrap();
        for (row, bi) in a.iter().zip(&b) {
            let s = row.iter().zip(&x).fold(Rational::zero(), |acc, (p, q)| acc + p * q);
            assert_eq!(&s, bi);
        }
        let b2: Vec<Rational> = [1, 2, 4].iter().map(|&x| Rational::from_int(x)).collect();
        assert!(q_solve(&a, &b2).is_none());
    }

    #[test]
    fn inertia() {
        assert_eq!(q_inertia(&q(&[&[0, 1], &[1, 0]])).unwrap(), (1, 1));
        assert_eq!(q_inertia(&q(&[&[2, 0, 0], &[0, 3, 0], &[0, 0, -1]])).unwrap(), (2, 1));
        assert_eq!(q_inertia(&q(&[&[1, 2], &[2, 4]])).unwrap(), (1, 0));
    }

    #[test]
    fn ratfn_inverse_and_det() {
        let v = Vars::new(["x", "y"]);
        let x = RatFn::var(&v, 0);
        let y = RatFn::var(&v, 1);
        let a = vec![vec![x.clone(), y.clone()], vec![RatFn::one(&v), x.clone()]];
        let det = r_det(&a).unwrap();
        assert_eq!(det, x.mul(&x).sub(&y));
        let inv = r_inverse(&a).unwrap();
        assert!(r_is_identity(&r_mul(&a, &inv)));
    }
}
