//! Riemannian geometry of a metric with rational coefficients.
//!
//! Conventions: `Γ^i_{jk} = ½ G^{is}(G_{sj,k} + G_{sk,j} - G_{jk,s})`,
//! `R^i_{jkl} = Γ^i_{jl,k} - Γ^i_{jk,l} + Γ^i_{ks}Γ^s_{jl} - Γ^i_{ls}Γ^s_{jk}`
//! and `R_{ijkl} = G_{is} R^s_{jkl}`. A space of constant sectional curvature
//! `κ` then has `R_{ijkl} = κ (G_{ik}G_{jl} - G_{il}G_{jk})`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{RatFn, Rational, Vars};
use crate::error::{Error, Result};
use crate::linalg::{q_inertia, r_det, r_inverse, r_is_identity, r_mul, QMatrix, RMatrix};
use crate::tensor::Tensor;

/// Covariant metric components with the inverse computed once.
#[derive(Clone, Debug)]
pub struct MetricField {
    g: RMatrix,
    inverse: RMatrix,
    vars: Arc<Vars>,
}

impl MetricField {
    pub fn new(g: RMatrix) -> Result<Self> {
        let n = g.len();
        if n == 0 || g.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("a metric must be a non-empty square matrix".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if g[i][j] != g[j][i] {
                    return Err(Error::Invalid(format!("metric is not symmetric at [{}][{}]", i + 1, j + 1)));
                }
            }
        }
        let inverse = invert_metric(&g)?;
        let vars = g[0][0].vars().clone();
        Ok(MetricField { g, inverse, vars })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn covariant(&self) -> &RMatrix {
        &self.g
    }

    pub fn contravariant(&self) -> &RMatrix {
        &self.inverse
    }

    pub fn det(&self) -> Result<RatFn> {
        r_det(&self.g)
    }

    /// `Γ^i_{jk}`, stored with index order `[i, j, k]`.
    pub fn christoffel(&self) -> Tensor {
        let n = self.dim();
        let g = &self.g;
        let half = Rational::new(1, 2);
        // Γ_{sjk} = ½(G_{sj,k} + G_{sk,j} - G_{jk,s})
        let lowered = Tensor::from_fn(&self.vars, 3, |i| {
            let (s, j, k) = (i[0], i[1], i[2]);
            g[s][j].partial(k).add(&g[s][k].partial(j)).sub(&g[j][k].partial(s)).scale(&half)
        });
        Tensor::from_fn(&self.vars, 3, |i| {
            let mut acc = RatFn::zero(&self.vars);
            for s in 0..n {
                let inv = &self.inverse[i[0]][s];
                let low = lowered.get(&[s, i[1], i[2]]);
                if !inv.is_zero() && !low.is_zero() {
                    acc = acc.add(&inv.mul(low));
                }
            }
            acc
        })
    }

    /// Lowered curvature tensor `R_{ijkl}`.
    pub fn riemann(&self) -> Tensor {
        let n = self.dim();
        let gamma = self.christoffel();
        let up: Vec<RatFn> = index_tuples(n, 4)
            .into_par_iter()
            .map(|t| {
                let (i, j, k, l) = (t[0], t[1], t[2], t[3]);
                let mut r = gamma.get(&[i, j, l]).partial(k).sub(&gamma.get(&[i, j, k]).partial(l));
                for s in 0..n {
                    r = r.add(&gamma.get(&[i, k, s]).mul(gamma.get(&[s, j, l])));
                    r = r.sub(&gamma.get(&[i, l, s]).mul(gamma.get(&[s, j, k])));
                }
                r
            })
            .collect();
        let up = Tensor::from_fn(&self.vars, 4, |t| up[flat_index(n, t)].clone());
        Tensor::from_fn(&self.vars, 4, |t| {
            let mut acc = RatFn::zero(&self.vars);
            for s in 0..n {
                let g = &self.g[t[0]][s];
                if !g.is_zero() {
                    acc = acc.add(&g.mul(up.get(&[s, t[1], t[2], t[3]])));
                }
            }
            acc
        })
    }

    /// `G_{ik}G_{jl} - G_{il}G_{jk}`.
    pub fn constant_curvature_model(&self) -> Tensor {
        let g = &self.g;
        Tensor::from_fn(&self.vars, 4, |t| {
            let (i, j, k, l) = (t[0], t[1], t[2], t[3]);
            g[i][k].mul(&g[j][l]).sub(&g[i][l].mul(&g[j][k]))
        })
    }

    /// Signature `(positive, negative)` of the metric at a rational point.
    pub fn signature_at(&self, point: &[Rational]) -> Result<(usize, usize)> {
        let q: QMatrix = self
            .g
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| x.eval(point).ok_or_else(|| Error::DivisionByZero))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        q_inertia(&q)
    }
}

fn index_tuples(n: usize, rank: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..rank {
        out = out.into_iter().flat_map(|t| (0..n).map(move |i| [t.clone(), vec![i]].concat())).collect();
    }
    out
}

fn flat_index(n: usize, t: &[usize]) -> usize {
    t.iter().fold(0, |acc, &i| acc * n + i)
}

/// Exact inverse, verified by multiplying back.
pub fn invert_metric(g: &RMatrix) -> Result<RMatrix> {
    let inv = r_inverse(g).map_err(|e| match e {
        Error::Singular(m) => Error::Singular(format!("metric: {m}")),
        other => other,
    })?;
    if !r_is_identity(&r_mul(g, &inv)) {
        return Err(Error::Singular("metric inverse does not multiply back to the identity".into()));
    }
    Ok(inv)
}

/// Result of testing for constant sectional curvature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Curvature {
    Constant(Rational),
    NotConstant { residual: String },
}

/// Returns `κ` when `R_{ijkl} = κ (G_{ik}G_{jl} - G_{il}G_{jk})` identically.
pub fn constant_curvature_test(metric: &MetricField) -> Curvature {
    let r = metric.riemann();
    let model = metric.constant_curvature_model();
    let Some((idx, m)) = model.support().into_iter().next().map(|(i, m)| (i, m.clone())) else {
        // One-dimensional metrics have no sectional curvature; report zero.
        return if r.is_zero() {
            Curvature::Constant(Rational::zero())
        } else {
            Curvature::NotConstant { residual: format!("{r:?}") }
        };
    };
    let ratio = match r.get(&idx).div(&m) {
        Ok(q) => q,
        Err(e) => return Curvature::NotConstant { residual: e.to_string() },
    };
    let Some(kappa) = ratio.constant_value() else {
        return Curvature::NotConstant { residual: format!("R/(GG - GG) at {idx:?} is {ratio}") };
    };
    for t in r.indices() {
        let diff = r.get(&t).sub(&model.get(&t).scale(&kappa));
        if !diff.is_zero() {
            return Curvature::NotConstant { residual: format!("at {t:?}: {diff}") };
        }
    }
    Curvature::Constant(kappa)
}

/// `R_{ijkl} + R_{iklj} + R_{iljk} = 0`.
pub fn first_bianchi_holds(r: &Tensor) -> bool {
    r.indices().into_iter().all(|t| {
        let (i, j, k, l) = (t[0], t[1], t[2], t[3]);
        r.get(&[i, j, k, l]).add(r.get(&[i, k, l, j])).add(r.get(&[i, l, j, k])).is_zero()
    })
}

/// `R_{ijkl} = -R_{jikl} = -R_{ijlk} = R_{klij}`.
pub fn riemann_symmetries_hold(r: &Tensor) -> bool {
    r.has_symmetry(&[1, 0, 2, 3], -1) && r.has_symmetry(&[0, 1, 3, 2], -1) && r.has_symmetry(&[2, 3, 0, 1], 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_ratfn;
    use crate::jet::{Space, DEFAULT_JET_BOUND};
    use crate::linalg::r_identity;

    fn metric(s: &Arc<Space>, rows: &[&[&str]]) -> MetricField {
        MetricField::new(rows.iter().map(|r| r.iter().map(|e| parse_ratfn(s, e).unwrap()).collect()).collect()).unwrap()
    }

    #[test]
    fn constant_metric_is_flat() {
        let s = Space::new(["x", "y", "z"], DEFAULT_JET_BOUND);
        let m = metric(&s, &[&["1", "2", "0"], &["2", "5", "0"], &["0", "0", "-1"]]);
        assert!(m.riemann().is_zero());
        assert_eq!(constant_curvature_test(&m), Curvature::Constant(Rational::zero()));
        assert_eq!(m.signature_at(&vec![Rational::zero(); 3]).unwrap(), (2, 1));
    }

    #[test]
    fn identity_inverts_to_identity() {
        let s = Space::new(["x", "y"], DEFAULT_JET_BOUND);
        let id = r_identity(s.base(), 2);
        assert_eq!(invert_metric(&id).unwrap(), id);
    }

    #[test]
    fn polar_coordinates_are_flat() {
        // dr² + r² dθ² is the Euclidean plane.
        let s = Space::new(["r", "t"], DEFAULT_JET_BOUND);
        let m = metric(&s, &[&["1", "0"], &["0", "r^2"]]);
        assert!(m.riemann().is_zero());
    }

    #[test]
    fn warped_product_curvature() {
        // dr² + f(r)² dθ² has Gaussian curvature -f''/f; with f = r² this is
        // -2/r², so R_{1212} = -2/r² · r⁴ = -2r².
        let s = Space::new(["r", "t"], DEFAULT_JET_BOUND);
        let m = metric(&s, &[&["1", "0"], &["0", "r^4"]]);
        let r = m.riemann();
        assert_eq!(r.get(&[0, 1, 0, 1]), &parse_ratfn(&s, "-2*r^2").unwrap());
        assert!(matches!(constant_curvature_test(&m), Curvature::NotConstant { .. }));
        assert!(first_bianchi_holds(&r) && riemann_symmetries_hold(&r));
    }

    #[test]
    fn hyperbolic_half_plane() {
        // (dx² + dy²)/y² has curvature -1.
        let s = Space::new(["x", "y"], DEFAULT_JET_BOUND);
        let m = metric(&s, &[&["1/y^2", "0"], &["0", "1/y^2"]]);
        assert_eq!(constant_curvature_test(&m), Curvature::Constant(Rational::from_int(-1)));
    }

    #[test]
    fn singular_metric_is_rejected() {
        let s = Space::new(["x", "y"], DEFAULT_JET_BOUND);
        let g = vec![vec![parse_ratfn(&s, "x").unwrap(), parse_ratfn(&s, "x").unwrap()]; 2];
        assert!(MetricField::new(g).is_err());
    }
}
