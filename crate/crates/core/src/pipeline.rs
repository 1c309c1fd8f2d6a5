//! Lagrangian representation of a bi-Hamiltonian hierarchy with a flat
//! first-order operator `A₁ = K ∂_x` and a third-order homogeneous `A₂`.
//!
//! Sign conventions. With `M = K⁻¹` the symplectic operator is
//! `B = -M A₂ M`, and the potential covector is `ψ = -L_n`, so that
//! `B = ℓ_ψ ∘ ∂_x + ∂_x ∘ ℓ_ψ*` in the coordinates `u = φ_x` (see
//! [`presentation_operator`]). The characteristic functions are
//!
//! `L_n = (½ G_{nm} u^m_x + R_{nm} u^m_x)_x - ½ L_{nsm} u^s_x u^m_x`
//!
//! and `A₂ = K ∘ (ℓ_L ∘ ∂_x + ∂_x ∘ ℓ_L*) ∘ K`. Comma indices denote
//! partial derivatives in the flat coordinates.

use std::sync::Arc;

use serde::Serialize;

use crate::algebra::gcd::gcd;
use crate::algebra::{Exponents, MPoly, RatFn, Rational};
use crate::diffop::{leading_and_lower, DiffOp, OperatorMatrix};
use crate::error::{Error, Result};
use crate::jet::{euler, formal_x_integral, volterra_homotopy, DiffPoly, Grade, JetVar, Space};
use crate::linalg::{q_inverse, q_is_symmetric, q_solve, QMatrix, RMatrix};
use crate::tensor::Tensor;
use crate::transform::{change_coordinates, PointTransform};
use crate::variational::{helmholtz_symmetric, lie_derivative, presentation_check};

/// Input of the pipeline: `A₁ = K ∂_x` in flat coordinates together with
/// `A₂` written in the same coordinates.
#[derive(Clone, Debug)]
pub struct BiHamiltonianSystem {
    space: Arc<Space>,
    k: QMatrix,
    m: QMatrix,
    a2: OperatorMatrix,
    source: Option<(OperatorMatrix, PointTransform)>,
    hamiltonian: Option<DiffPoly>,
}

impl BiHamiltonianSystem {
    /// Checks the shape of the data; the operator properties of `A₂` are
    /// checked separately by [`BiHamiltonianSystem::operator_checks`].
    pub fn new(k: QMatrix, a2: OperatorMatrix, hamiltonian: Option<DiffPoly>) -> Result<Self> {
        let space = a2.space().clone();
        let n = space.dim();
        if k.len() != n || k.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!("K must be {n}x{n}")));
        }
        if !q_is_symmetric(&k) {
            return Err(Error::Invalid("K is not symmetric".into()));
        }
        let m = q_inverse(&k)?;
        if a2.rows() != n || a2.cols() != n {
            return Err(Error::DimensionMismatch(format!("A2 must be {n}x{n}")));
        }
        if let Some(h) = &hamiltonian {
            if h.space().base() != space.base() {
                return Err(Error::Invalid("the Hamiltonian density uses other coordinates".into()));
            }
        }
        Ok(BiHamiltonianSystem { space, k, m, a2, source: None, hamiltonian })
    }

    /// Builds the system from `A₂` in other coordinates and the point
    /// transformation to the flat coordinates.
    pub fn from_source(
        k: QMatrix,
        a2_source: &OperatorMatrix,
        transform: &PointTransform,
        hamiltonian: Option<DiffPoly>,
    ) -> Result<Self> {
        let a2 = change_coordinates(a2_source, transform)?;
        let mut sys = Self::new(k, a2, hamiltonian)?;
        sys.source = Some((a2_source.clone(), transform.clone()));
        Ok(sys)
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn k(&self) -> &QMatrix {
        &self.k
    }

    pub fn m(&self) -> &QMatrix {
        &self.m
    }

    pub fn a2(&self) -> &OperatorMatrix {
        &self.a2
    }

    pub fn source(&self) -> Option<&(OperatorMatrix, PointTransform)> {
        self.source.as_ref()
    }

    pub fn hamiltonian(&self) -> Option<&DiffPoly> {
        self.hamiltonian.as_ref()
    }

    /// `K ∂_x`.
    pub fn a1(&self) -> OperatorMatrix {
        OperatorMatrix::constant(&self.space, &self.k, 1)
    }

    /// Skew-adjointness and homogeneity of `A₂`.
    pub fn operator_checks(&self) -> Result<Vec<Check>> {
        let defects = self.a2.skew_defects()?;
        let skew = Check::new(
            "skew-adjoint",
            defects.is_empty(),
            (!defects.is_empty()).then(|| {
                let names: Vec<String> = defects.iter().map(|(i, j)| format!("A2[{}][{}]", i + 1, j + 1)).collect();
                format!("adjoint differs from the negative at {}", names.join(", "))
            }),
        );
        let homogeneous = self.a2.order() == Some(3) && self.a2.is_homogeneous(3);
        let hom = Check::new(
            "homogeneous",
            homogeneous,
            (!homogeneous).then(|| match leading_and_lower(&self.a2, 3) {
                Err(e) => e.to_string(),
                Ok(_) => "operator does not have order 3".to_string(),
            }),
        );
        Ok(vec![skew, hom])
    }
}

/// Outcome of one exact check, with a printed residual on failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    #[serde(rename = "stage")]
    pub name: String,
    pub pass: bool,
    pub residual: Option<String>,
}

impl Check {
    pub fn new(name: &str, pass: bool, residual: Option<String>) -> Self {
        Check { name: name.to_string(), pass, residual }
    }
}

#[derive(Clone, Debug)]
pub struct SymplecticData {
    pub b: OperatorMatrix,
    /// `G = -(coefficient of ∂³ in B) = M g M`.
    pub g: RMatrix,
}

fn leading_ratfn(p: &OperatorMatrix, k: usize) -> Result<RMatrix> {
    p.coeff_matrix(k)
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|c| c.as_ratfn().ok_or_else(|| Error::Shape(format!("coefficient of D^{k} depends on jets"))))
                .collect()
        })
        .collect()
}

pub fn symplectic_operator(sys: &BiHamiltonianSystem) -> Result<SymplecticData> {
    let b = sys.a2.conjugate(&sys.m, &sys.m)?.neg();
    let g = leading_ratfn(&b, 3)?.into_iter().map(|r| r.into_iter().map(|x| x.neg()).collect()).collect();
    Ok(SymplecticData { b, g })
}

/// `Σ_{i,j} M_{ai} t_{ij} M_{jb}` for a matrix-valued function `t`.
fn conjugate_by(space: &Arc<Space>, m: &QMatrix, a: usize, b: usize, t: impl Fn(usize, usize) -> RatFn) -> RatFn {
    let n = m.len();
    let mut acc = RatFn::zero(space.base());
    for i in 0..n {
        if m[a][i].is_zero() {
            continue;
        }
        for j in 0..n {
            if m[j][b].is_zero() {
                continue;
            }
            let v = t(i, j);
            if !v.is_zero() {
                acc = acc.add(&v.scale(&(&m[a][i] * &m[j][b])));
            }
        }
    }
    acc
}

/// Tensors `G`, `L`, `F` read off from `A₂`:
/// `G = M g M`, `L_{npm} = (M d_m M)_{pn}` from the `u^m_xxx` coefficient and
/// `F_{pmn} = (M c_m M)_{pn}` from the `u^m_xx ∂_x` coefficient.
pub fn extract_glf(sys: &BiHamiltonianSystem) -> Result<(RMatrix, Tensor, Tensor)> {
    let t = leading_and_lower(&sys.a2, 3)?;
    let space = &sys.space;
    let vars = space.base().clone();
    let n = space.dim();
    let m = &sys.m;
    let g: RMatrix = (0..n).map(|a| (0..n).map(|b| conjugate_by(space, m, a, b, |i, j| t.g.get(&[i, j]).clone())).collect()).collect();
    let l = Tensor::from_fn(&vars, 3, |idx| {
        let (nn, p, mm) = (idx[0], idx[1], idx[2]);
        conjugate_by(space, m, p, nn, |i, j| t.d1.get(&[i, j, mm]).clone())
    });
    let f = Tensor::from_fn(&vars, 3, |idx| {
        let (p, mm, nn) = (idx[0], idx[1], idx[2]);
        conjugate_by(space, m, p, nn, |i, j| t.c1.get(&[i, j, mm]).clone())
    });
    let broken: Vec<String> = l
        .indices()
        .into_iter()
        .filter(|i| i[1] < i[2] && l.get(i) != l.get(&[i[0], i[2], i[1]]))
        .map(|i| format!("L[{}][{}][{}] != L[{}][{}][{}]", i[0] + 1, i[1] + 1, i[2] + 1, i[0] + 1, i[2] + 1, i[1] + 1))
        .collect();
    if !broken.is_empty() {
        return Err(Error::AnsatzViolation(format!("symmetry of L in its last two indices fails: {}", broken.join(", "))));
    }
    Ok((g, l, f))
}

fn d(f: &RatFn, i: usize) -> RatFn {
    f.partial(i)
}

/// `(dR)_{pmn} = R_{pm,n} + R_{mn,p} + R_{np,m}`.
pub fn exterior_derivative(r: &RMatrix) -> Tensor {
    let vars = r[0][0].vars().clone();
    Tensor::from_fn(&vars, 3, |i| {
        let (p, m, n) = (i[0], i[1], i[2]);
        d(&r[p][m], n).add(&d(&r[m][n], p)).add(&d(&r[n][p], m))
    })
}

#[derive(Clone, Debug)]
pub struct Obstruction {
    pub t: Tensor,
    pub skew: bool,
    pub closed: bool,
}

/// `T_{pmn} = F_{pmn} - ½(G_{pm,n} + G_{np,m} - G_{nm,p} + 4 L_{npm})`,
/// with flags for complete skew-symmetry and closedness.
pub fn obstruction_t(g: &RMatrix, l: &Tensor, f: &Tensor) -> Obstruction {
    let vars = g[0][0].vars().clone();
    let half = Rational::new(1, 2);
    let four = Rational::from_int(4);
    let t = Tensor::from_fn(&vars, 3, |i| {
        let (p, m, n) = (i[0], i[1], i[2]);
        let inner = d(&g[p][m], n).add(&d(&g[n][p], m)).sub(&d(&g[n][m], p)).add(&l.get(&[n, p, m]).scale(&four));
        f.get(&[p, m, n]).sub(&inner.scale(&half))
    });
    let skew = t.is_totally_skew();
    let closed = skew && is_closed_3form(&t);
    Obstruction { t, skew, closed }
}

/// `dT = 0` for a totally skew `T`:
/// `T_{mnq,p} - T_{pnq,m} + T_{pmq,n} - T_{pmn,q} = 0`.
pub fn is_closed_3form(t: &Tensor) -> bool {
    let n = t.dim();
    for p in 0..n {
        for m in (p + 1)..n {
            for k in (m + 1)..n {
                for q in (k + 1)..n {
                    let s = d(t.get(&[m, k, q]), p)
                        .sub(&d(t.get(&[p, k, q]), m))
                        .add(&d(t.get(&[p, m, q]), k))
                        .sub(&d(t.get(&[p, m, k]), q));
                    if !s.is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// How a solution of `dR = T` was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RMethod {
    Zero,
    CyclicAnsatz,
    UndeterminedCoefficients,
    Candidate,
}

#[derive(Clone, Debug)]
pub struct RSolution {
    pub r: RMatrix,
    pub method: RMethod,
}

/// Whether a skew `R` satisfies `dR = T` exactly.
pub fn verify_r(r: &RMatrix, t: &Tensor) -> bool {
    let n = r.len();
    let skew = (0..n).all(|i| (0..n).all(|j| r[i][j].add(&r[j][i]).is_zero()));
    skew && exterior_derivative(r) == *t
}

fn monomials(vars: &Arc<crate::algebra::Vars>, degree: u32) -> Vec<MPoly> {
    fn rec(n: usize, left: u32, cur: &mut Exponents, out: &mut Vec<Exponents>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let n = vars.len();
    let mut out: Vec<Exponents> = Vec::new();
    if n == 0 {
        return Vec::new();
    }
    rec(n, degree, &mut Exponents::new(), &mut out);
    out.into_iter().map(|e| MPoly::monomial(vars, e, Rational::one())).collect()
}

fn lcm(a: &MPoly, b: &MPoly) -> MPoly {
    let g = gcd(a, b);
    a.mul(&b.div_exact(&g).expect("gcd divides"))
}

/// Solves `Σ_α c_α columns[α][s] = target[s]` for rational `c_α`, slot by
/// slot clearing denominators and comparing monomial coefficients.
fn solve_linear_ratfn(columns: &[Vec<RatFn>], target: &[RatFn]) -> Option<Vec<Rational>> {
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    for (s, t) in target.iter().enumerate() {
        let mut den = t.den().clone();
        for col in columns {
            den = lcm(&den, col[s].den());
        }
        let scaled = |f: &RatFn| f.num().mul(&den.div_exact(f.den()).expect("lcm is a multiple"));
        let polys: Vec<MPoly> = columns.iter().map(|c| scaled(&c[s])).collect();
        let tp = scaled(t);
        let mut keys: Vec<Exponents> = polys.iter().chain(std::iter::once(&tp)).flat_map(|p| p.terms().iter().map(|(e, _)| e.clone())).collect();
        keys.sort();
        keys.dedup();
        for key in keys {
            let coeff = |p: &MPoly| p.terms().iter().find(|(e, _)| *e == key).map(|(_, c)| c.clone()).unwrap_or_else(Rational::zero);
            rows.push(polys.iter().map(coeff).collect());
            rhs.push(coeff(&tp));
        }
    }
    if rows.is_empty() {
        return Some(vec![Rational::zero(); columns.len()]);
    }
    q_solve(&rows, &rhs)
}

/// Candidate denominators `∏_{i<j} (u^i - u^j)^{bound}`; numerator degree is
/// fixed by homogeneity when `T` is homogeneous.
fn difference_denominator(space: &Arc<Space>, bound: u32) -> MPoly {
    let vars = space.base();
    let n = space.dim();
    let mut den = MPoly::one(vars);
    for i in 0..n {
        for j in (i + 1)..n {
            den = den.mul(&MPoly::var(vars, i).sub(&MPoly::var(vars, j)).pow(bound));
        }
    }
    den
}

fn numerator_degrees(t: &Tensor, den_degree: i64) -> Vec<u32> {
    let degs: Vec<Option<i64>> = t.support().iter().map(|(_, v)| v.homogeneous_degree()).collect();
    match degs.first() {
        Some(Some(first)) if degs.iter().all(|x| *x == Some(*first)) => {
            let k = den_degree + first + 1;
            if k >= 0 {
                vec![k as u32]
            } else {
                Vec::new()
            }
        }
        _ => (0..=(den_degree.max(0) as u32 + 2)).collect(),
    }
}

/// Solves `dR = T` for a skew `R`.
///
/// For three coordinates the cyclic ansatz `R_{12} = f(u¹,u²,u³)`,
/// `R_{23} = f(u²,u³,u¹)`, `R_{31} = f(u³,u¹,u²)` is tried first; then
/// general undetermined coefficients over the denominator
/// `∏_{i<j}(u^i - u^j)^{bound}`. Every returned `R` has been verified.
pub fn solve_r(space: &Arc<Space>, t: &Tensor, bound: u32) -> Result<RSolution> {
    let n = space.dim();
    let vars = space.base().clone();
    if t.is_zero() {
        return Ok(RSolution { r: vec![vec![RatFn::zero(&vars); n]; n], method: RMethod::Zero });
    }
    if !t.is_totally_skew() {
        return Err(Error::NoSolution { residual: "T is not totally skew-symmetric".into() });
    }
    if !is_closed_3form(t) {
        return Err(Error::NoSolution { residual: "T is not closed".into() });
    }
    let den = difference_denominator(space, bound);
    let den_degree = den.total_degree().unwrap_or(0) as i64;
    let numerators: Vec<MPoly> = numerator_degrees(t, den_degree).into_iter().flat_map(|k| monomials(&vars, k)).collect();
    let basis: Vec<RatFn> = numerators.iter().map(|p| RatFn::new(p.clone(), den.clone())).collect::<Result<_>>()?;
    let slots: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|p| ((p + 1)..n).flat_map(move |m| ((m + 1)..n).map(move |k| (p, m, k)))).collect();
    let target: Vec<RatFn> = slots.iter().map(|&(p, m, k)| t.get(&[p, m, k]).clone()).collect();

    let assemble = |parts: &[(usize, usize, RatFn)]| {
        let mut r = vec![vec![RatFn::zero(&vars); n]; n];
        for (i, j, f) in parts {
            r[*i][*j] = r[*i][*j].add(f);
            r[*j][*i] = r[*j][*i].sub(f);
        }
        r
    };
    let dr_slots = |r: &RMatrix| -> Vec<RatFn> {
        slots.iter().map(|&(p, m, k)| d(&r[p][m], k).add(&d(&r[m][k], p)).add(&d(&r[k][p], m))).collect()
    };

    if n == 3 {
        let shift = |f: &RatFn, s: usize| -> Result<RatFn> {
            let args: Vec<RatFn> = (0..3).map(|i| RatFn::var(&vars, (i + s) % 3)).collect();
            f.compose(&args)
        };
        let mut columns = Vec::with_capacity(basis.len());
        let mut candidates = Vec::with_capacity(basis.len());
        for f in &basis {
            let r = assemble(&[(0, 1, f.clone()), (1, 2, shift(f, 1)?), (2, 0, shift(f, 2)?)]);
            columns.push(dr_slots(&r));
            candidates.push(r);
        }
        if let Some(c) = solve_linear_ratfn(&columns, &target) {
            let r = combine(&vars, n, &candidates, &c);
            if verify_r(&r, t) {
                return Ok(RSolution { r, method: RMethod::CyclicAnsatz });
            }
        }
    }

    let mut columns = Vec::new();
    let mut candidates = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for f in &basis {
                let r = assemble(&[(i, j, f.clone())]);
                columns.push(dr_slots(&r));
                candidates.push(r);
            }
        }
    }
    match solve_linear_ratfn(&columns, &target) {
        Some(c) => {
            let r = combine(&vars, n, &candidates, &c);
            if verify_r(&r, t) {
                Ok(RSolution { r, method: RMethod::UndeterminedCoefficients })
            } else {
                Err(Error::NoSolution { residual: residual_text(&r, t) })
            }
        }
        None => Err(Error::NoSolution {
            residual: format!(
                "no combination of {} basis forms over denominator {} matches T = {:?}",
                candidates.len(),
                RatFn::from_poly(den.clone()),
                t
            ),
        }),
    }
}

/// Accepts a user-supplied `R` after exact verification.
pub fn accept_r_candidate(r: RMatrix, t: &Tensor) -> Result<RSolution> {
    if verify_r(&r, t) {
        Ok(RSolution { r, method: RMethod::Candidate })
    } else {
        Err(Error::NoSolution { residual: residual_text(&r, t) })
    }
}

fn residual_text(r: &RMatrix, t: &Tensor) -> String {
    format!("dR - T = {:?}", exterior_derivative(r).sub(t))
}

fn combine(vars: &Arc<crate::algebra::Vars>, n: usize, candidates: &[RMatrix], c: &[Rational]) -> RMatrix {
    let mut r = vec![vec![RatFn::zero(vars); n]; n];
    for (cand, coef) in candidates.iter().zip(c) {
        if coef.is_zero() {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                if !cand[i][j].is_zero() {
                    r[i][j] = r[i][j].add(&cand[i][j].scale(coef));
                }
            }
        }
    }
    r
}

fn ux(space: &Arc<Space>, m: usize, order: usize) -> DiffPoly {
    DiffPoly::jet(space, m, order).expect("jet within bound")
}

fn lift(space: &Arc<Space>, f: &RatFn) -> DiffPoly {
    DiffPoly::from_ratfn(space, f.clone())
}

/// `L_n = (½ G_{nm} u^m_x + R_{nm} u^m_x)_x - ½ L_{nsm} u^s_x u^m_x`.
pub fn assemble_ln(space: &Arc<Space>, g: &RMatrix, r: &RMatrix, l: &Tensor) -> Result<Vec<DiffPoly>> {
    let n = space.dim();
    let half = Rational::new(1, 2);
    (0..n)
        .map(|nn| {
            let mut inner = DiffPoly::zero(space);
            for m in 0..n {
                let c = g[nn][m].scale(&half).add(&r[nn][m]);
                if !c.is_zero() {
                    inner = inner.add(&ux(space, m, 1).mul_ratfn(&c));
                }
            }
            let mut quad = DiffPoly::zero(space);
            for s in 0..n {
                for m in 0..n {
                    let c = l.get(&[nn, s, m]);
                    if !c.is_zero() {
                        quad = quad.add(&ux(space, s, 1).mul(&ux(space, m, 1)).mul_ratfn(c));
                    }
                }
            }
            Ok(inner.total_x()?.sub(&quad.scale(&half)))
        })
        .collect()
}

/// `F_{pmn} = ½G_{pm,n} + ½G_{np,m} - ½G_{nm,p} + 2L_{npm} + R_{pm,n} + R_{mn,p} + R_{np,m}`.
pub fn structure_f(g: &RMatrix, r: &RMatrix, l: &Tensor) -> Tensor {
    let vars = g[0][0].vars().clone();
    let half = Rational::new(1, 2);
    let two = Rational::from_int(2);
    let dr = exterior_derivative(r);
    Tensor::from_fn(&vars, 3, |i| {
        let (p, m, n) = (i[0], i[1], i[2]);
        d(&g[p][m], n)
            .add(&d(&g[n][p], m))
            .sub(&d(&g[n][m], p))
            .scale(&half)
            .add(&l.get(&[n, p, m]).scale(&two))
            .add(dr.get(&[p, m, n]))
    })
}

/// `A₂` from the structure formula in terms of `G`, `R`, `L`:
///
/// `A₂ = K X K` where `X_{pn}` is
/// `G_{pn}∂³ + (F_{pmn} + G_{pn,m} - L_{npm} - L_{pnm}) u^m_x ∂²
///  + [F_{pmn} u^m_xx + (F_{pmn,s} - ½L_{psm,n} - ½L_{nsm,p}) u^s_x u^m_x] ∂
///  + D_x[L_{npm} u^m_xx + L_{npm,s} u^s_x u^m_x - ½L_{nsm,p} u^s_x u^m_x]`.
pub fn reconstruct_a2(sys: &BiHamiltonianSystem, g: &RMatrix, r: &RMatrix, l: &Tensor) -> Result<OperatorMatrix> {
    let space = &sys.space;
    let n = space.dim();
    let f = structure_f(g, r, l);
    let half = Rational::new(1, 2);
    let mut x = OperatorMatrix::zero(space, n, n);
    for p in 0..n {
        for nn in 0..n {
            let mut c3 = lift(space, &g[p][nn]);
            let mut c2 = DiffPoly::zero(space);
            let mut c1 = DiffPoly::zero(space);
            let mut inner0 = DiffPoly::zero(space);
            for m in 0..n {
                let um = ux(space, m, 1);
                let umm = ux(space, m, 2);
                let b = f.get(&[p, m, nn]).add(&d(&g[p][nn], m)).sub(l.get(&[nn, p, m])).sub(l.get(&[p, nn, m]));
                c2 = c2.add(&um.mul_ratfn(&b));
                c1 = c1.add(&umm.mul_ratfn(f.get(&[p, m, nn])));
                inner0 = inner0.add(&umm.mul_ratfn(l.get(&[nn, p, m])));
                for s in 0..n {
                    let us_um = ux(space, s, 1).mul(&um);
                    let q1 = d(f.get(&[p, m, nn]), s)
                        .sub(&d(l.get(&[p, s, m]), nn).scale(&half))
                        .sub(&d(l.get(&[nn, s, m]), p).scale(&half));
                    c1 = c1.add(&us_um.mul_ratfn(&q1));
                    let q0 = d(l.get(&[nn, p, m]), s).sub(&d(l.get(&[nn, s, m]), p).scale(&half));
                    inner0 = inner0.add(&us_um.mul_ratfn(&q0));
                }
            }
            let c0 = inner0.total_x()?;
            c3 = c3.clone();
            x.set(p, nn, DiffOp::from_coeffs(space, vec![c0, c1, c2, c3]));
        }
    }
    x.conjugate(&sys.k, &sys.k)
}

/// `A₂ = K X K` with `X` expanded from an arbitrary `L_n` of order at most 2:
///
/// `X_{pn} = (∂L_p/∂u^n_xx + ∂L_n/∂u^p_xx) ∂³
///  + [∂L_p/∂u^n_x - ∂L_n/∂u^p_x + 3(∂L_n/∂u^p_xx)_x] ∂²
///  + [∂L_p/∂u^n + ∂L_n/∂u^p - 2(∂L_n/∂u^p_x)_x + 3(∂L_n/∂u^p_xx)_xx] ∂
///  + [∂L_n/∂u^p - (∂L_n/∂u^p_x)_x + (∂L_n/∂u^p_xx)_xx]_x`.
pub fn expand_a2_from_ln(sys: &BiHamiltonianSystem, ln: &[DiffPoly]) -> Result<OperatorMatrix> {
    let space = &sys.space;
    let n = space.dim();
    if ln.iter().any(|f| f.order() > 2) {
        return Err(Error::Unsupported("the expansion is written for L_n of order at most 2".into()));
    }
    let three = Rational::from_int(3);
    let two = Rational::from_int(2);
    let mut x = OperatorMatrix::zero(space, n, n);
    for p in 0..n {
        for nn in 0..n {
            let (lp, ln_) = (&ln[p], &ln[nn]);
            let n0 = ln_.partial(p, 0);
            let n1 = ln_.partial(p, 1);
            let n2 = ln_.partial(p, 2);
            let n2x = n2.total_x()?;
            let n2xx = n2x.total_x()?;
            let n1x = n1.total_x()?;
            let c3 = lp.partial(nn, 2).add(&n2);
            let c2 = lp.partial(nn, 1).sub(&n1).add(&n2x.scale(&three));
            let c1 = lp.partial(nn, 0).add(&n0).sub(&n1x.scale(&two)).add(&n2xx.scale(&three));
            let c0 = n0.sub(&n1x).add(&n2xx).total_x()?;
            x.set(p, nn, DiffOp::from_coeffs(space, vec![c0, c1, c2, c3]));
        }
    }
    x.conjugate(&sys.k, &sys.k)
}

/// Everything produced by the derivation.
#[derive(Clone, Debug)]
pub struct LagrangianRep {
    pub g: RMatrix,
    pub r: RMatrix,
    pub r_method: RMethod,
    pub l: Tensor,
    pub f: Tensor,
    pub t: Tensor,
    pub ln: Vec<DiffPoly>,
    pub tau: Vec<DiffPoly>,
}

/// `τ^i = -K^{in} L_n`.
pub fn tau_from_ln(k: &QMatrix, ln: &[DiffPoly]) -> Vec<DiffPoly> {
    q_apply(k, ln).into_iter().map(|f| f.neg()).collect()
}

/// Constant matrix times a vector of differential polynomials.
pub fn q_apply(m: &QMatrix, v: &[DiffPoly]) -> Vec<DiffPoly> {
    let space = v[0].space().clone();
    m.iter()
        .map(|row| {
            row.iter().zip(v).fold(DiffPoly::zero(&space), |acc, (c, f)| if c.is_zero() { acc } else { acc.add(&f.scale(c)) })
        })
        .collect()
}

/// Assembles the representation from `G`, `R`, `L` (and the already
/// computed `F`, `T`).
pub fn representation(sys: &BiHamiltonianSystem, g: RMatrix, sol: RSolution, l: Tensor, f: Tensor, t: Tensor) -> Result<LagrangianRep> {
    let ln = assemble_ln(&sys.space, &g, &sol.r, &l)?;
    let tau = tau_from_ln(&sys.k, &ln);
    Ok(LagrangianRep { g, r: sol.r, r_method: sol.method, l, f, t, ln, tau })
}

/// Options of the certification step.
#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    pub lie: bool,
    pub presentation: bool,
    pub conservation: bool,
    pub recursion: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { lie: true, presentation: true, conservation: true, recursion: true }
    }
}

fn first_difference(a: &OperatorMatrix, b: &OperatorMatrix) -> Option<String> {
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let diff = a.get(i, j).sub(b.get(i, j));
            if !diff.is_zero() {
                return Some(format!("entry [{}][{}]: {}", i + 1, j + 1, diff));
            }
        }
    }
    None
}

/// (a) `L_τ(K ∂_x) = A₂`.
pub fn certify_lie(sys: &BiHamiltonianSystem, rep: &LagrangianRep) -> Result<Check> {
    let lie = lie_derivative(&sys.a1(), &rep.tau)?;
    let residual = first_difference(&lie, &sys.a2);
    Ok(Check::new("lie-derivative", residual.is_none(), residual))
}

/// (b) `B = ℓ_ψ ∘ ∂_x + ∂_x ∘ ℓ_ψ*` with `ψ = -L_n`.
pub fn certify_presentation(sys: &BiHamiltonianSystem, rep: &LagrangianRep) -> Result<Check> {
    let b = symplectic_operator(sys)?.b;
    let psi: Vec<DiffPoly> = rep.ln.iter().map(DiffPoly::neg).collect();
    if presentation_check(&b, &psi)? {
        return Ok(Check::new("presentation", true, None));
    }
    let other = crate::variational::presentation_operator(&psi)?;
    Ok(Check::new("presentation", false, first_difference(&other, &b)))
}

/// (c) Each `L_n` is conserved by the flow `u_t = K ∂_x δh/δu`.
pub fn certify_conservation(sys: &BiHamiltonianSystem, rep: &LagrangianRep) -> Result<Check> {
    let Some(h) = &sys.hamiltonian else {
        return Ok(Check::new("conservation", true, Some("skipped: no Hamiltonian density".into())));
    };
    let flow = sys.a1().apply(&euler(h)?)?;
    for (n, l) in rep.ln.iter().enumerate() {
        let dt = l.evolutionary(&flow)?;
        let e = euler(&dt)?;
        if e.iter().any(|c| !c.is_zero()) {
            let parts: Vec<String> = e.iter().map(|c| c.to_string()).collect();
            return Ok(Check::new("conservation", false, Some(format!("E(D_t L_{}) = [{}]", n + 1, parts.join(", ")))));
        }
    }
    Ok(Check::new("conservation", true, None))
}

/// `u^i L_i` is a total divergence, so it carries no conserved quantity.
pub fn contracted_density_check(space: &Arc<Space>, ln: &[DiffPoly]) -> Result<Check> {
    let density = ln.iter().enumerate().fold(DiffPoly::zero(space), |acc, (i, l)| acc.add(&ux(space, i, 0).mul(l)));
    let e = euler(&density)?;
    if e.iter().all(DiffPoly::is_zero) {
        Ok(Check::new("contracted-density", true, None))
    } else {
        let parts: Vec<String> = e.iter().map(|c| c.to_string()).collect();
        Ok(Check::new("contracted-density", false, Some(format!("E(u^i L_i) = [{}]", parts.join(", ")))))
    }
}

/// (d) The recursion started from the Casimirs `u^k` of `A₁` yields
/// `K^{km} L_m` up to total divergences.
pub fn certify_recursion(sys: &BiHamiltonianSystem, rep: &LagrangianRep) -> Result<Check> {
    let kl = q_apply(&sys.k, &rep.ln);
    for k in 0..sys.space.dim() {
        let start = ux(&sys.space, k, 0);
        let next = recursion_step(sys, &start)?;
        let lhs = euler(&next)?;
        let rhs = euler(&kl[k])?;
        if lhs != rhs {
            let diff: Vec<String> = lhs.iter().zip(&rhs).map(|(a, b)| a.sub(b).to_string()).collect();
            return Ok(Check::new("recursion", false, Some(format!("component {}: [{}]", k + 1, diff.join(", ")))));
        }
    }
    Ok(Check::new("recursion", true, None))
}

/// Runs the selected checks; independent checks run in parallel.
pub fn certify(sys: &BiHamiltonianSystem, rep: &LagrangianRep, opts: CertifyOptions) -> Result<Vec<Check>> {
    type Job<'a> = (bool, &'a (dyn Fn() -> Result<Check> + Sync));
    let lie = || certify_lie(sys, rep);
    let pres = || certify_presentation(sys, rep);
    let cons = || certify_conservation(sys, rep);
    let rec = || certify_recursion(sys, rep);
    let jobs: [Job; 4] = [(opts.lie, &lie), (opts.presentation, &pres), (opts.conservation, &cons), (opts.recursion, &rec)];
    use rayon::prelude::*;
    jobs.par_iter().filter(|(on, _)| *on).map(|(_, f)| f()).collect()
}

/// One step `h ↦ h'` of the recursion `A₁ δh'/δu = A₂ δh/δu`.
///
/// The covector `ψ = ∂_x^{-1} M A₂ δh/δu` is computed componentwise; a
/// density with `E(h') = ψ` is then found by the homotopy formula for
/// polynomial `ψ`, or, for rational `ψ` of grade 2, from the quadratic
/// ansatz `h' = Q_{ij}(u) u^i_x u^j_x` whose Euler expression has
/// `u^j_xx`-coefficient `-2 Q_{kj}` in component `k`.
pub fn recursion_step(sys: &BiHamiltonianSystem, h: &DiffPoly) -> Result<DiffPoly> {
    let v = sys.a2.apply(&euler(h)?)?;
    let w = q_apply(&sys.m, &v);
    let psi: Vec<DiffPoly> = w
        .iter()
        .enumerate()
        .map(|(i, f)| {
            formal_x_integral(f).map_err(|e| match e {
                Error::NotTotalDivergence { fingerprint } => {
                    Error::NotTotalDivergence { fingerprint: format!("component {}: {}", i + 1, fingerprint) }
                }
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    if psi.iter().all(DiffPoly::is_zero) {
        return Ok(DiffPoly::zero(&sys.space));
    }
    if !helmholtz_symmetric(&psi)? {
        return Err(Error::NotVariational("the integrated covector fails the Helmholtz condition".into()));
    }
    if psi.iter().all(DiffPoly::is_polynomial) {
        return volterra_homotopy(&psi);
    }
    quadratic_inverse(&sys.space, &psi)
}

fn quadratic_inverse(space: &Arc<Space>, psi: &[DiffPoly]) -> Result<DiffPoly> {
    let n = space.dim();
    let graded = psi.iter().all(|f| matches!(f.grade(), Grade::Homogeneous(2) | Grade::Zero) && f.order() <= 2);
    if !graded {
        return Err(Error::Unsupported(
            "inverting the Euler operator on a rational covector is implemented for grade 2 only".into(),
        ));
    }
    let minus_half = Rational::new(-1, 2);
    let mut s = DiffPoly::zero(space);
    for k in 0..n {
        for j in 0..n {
            let q = psi[k].coeff(&[JetVar::new(j, 2)]).scale(&minus_half);
            if !q.is_zero() {
                s = s.add(&ux(space, k, 1).mul(&ux(space, j, 1)).mul_ratfn(&q));
            }
        }
    }
    let e = euler(&s)?;
    if e.as_slice() != psi {
        return Err(Error::Unsupported("the integrated covector is not the Euler expression of a quadratic density".into()));
    }
    Ok(s)
}

/// Commutator of evolutionary fields, `[X, Y]^i = X(Y^i) - Y(X^i)`.
pub fn flow_commutator(x: &[DiffPoly], y: &[DiffPoly]) -> Result<Vec<DiffPoly>> {
    x.iter().zip(y).map(|(xi, yi)| Ok(yi.evolutionary(x)?.sub(&xi.evolutionary(y)?))).collect()
}

/// Full derivation, stopping at the first failing stage.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub stages: Vec<Check>,
    pub symplectic: Option<SymplecticData>,
    pub rep: Option<LagrangianRep>,
}

impl Derivation {
    pub fn pass(&self) -> bool {
        self.stages.iter().all(|s| s.pass)
    }
}

#[derive(Clone, Debug)]
pub struct DeriveOptions {
    pub rden_bound: u32,
    /// A user-supplied `R`, verified instead of solving `dR = T`.
    pub r_candidate: Option<RMatrix>,
    pub certify: CertifyOptions,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions { rden_bound: 2, r_candidate: None, certify: CertifyOptions::default() }
    }
}

/// Stages up to and including the solution of `dR = T`; `rep` is set when
/// all of them pass.
pub fn derive_representation(sys: &BiHamiltonianSystem, opts: &DeriveOptions) -> Result<Derivation> {
    let mut out = Derivation { stages: Vec::new(), symplectic: None, rep: None };
    let checks = sys.operator_checks()?;
    let ok = checks.iter().all(|c| c.pass);
    out.stages.extend(checks);
    if !ok {
        return Ok(out);
    }
    let sd = symplectic_operator(sys)?;
    let b_skew = sd.b.is_skew_adjoint()?;
    out.stages.push(Check::new("symplectic-operator", b_skew, (!b_skew).then(|| "B is not skew-adjoint".to_string())));
    out.symplectic = Some(sd);
    if !b_skew {
        return Ok(out);
    }
    let (g, l, f) = match extract_glf(sys) {
        Ok(v) => v,
        Err(e @ (Error::AnsatzViolation(_) | Error::Shape(_))) => {
            out.stages.push(Check::new("extract", false, Some(e.to_string())));
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    out.stages.push(Check::new("extract", true, None));
    let obs = obstruction_t(&g, &l, &f);
    let obs_ok = obs.skew && obs.closed;
    out.stages.push(Check::new(
        "obstruction",
        obs_ok,
        (!obs_ok).then(|| format!("T skew: {}, closed: {}; T = {:?}", obs.skew, obs.closed, obs.t)),
    ));
    if !obs_ok {
        return Ok(out);
    }
    let solved = match &opts.r_candidate {
        Some(r) => accept_r_candidate(r.clone(), &obs.t),
        None => solve_r(&sys.space, &obs.t, opts.rden_bound),
    };
    let sol = match solved {
        Ok(s) => s,
        Err(e @ Error::NoSolution { .. }) => {
            out.stages.push(Check::new("solve-r", false, Some(e.to_string())));
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    out.stages.push(Check::new("solve-r", true, None));
    out.rep = Some(representation(sys, g, sol, l, f, obs.t)?);
    Ok(out)
}

/// The full pipeline: representation, closure of both expansions of `A₂`,
/// then the certification checks.
pub fn derive(sys: &BiHamiltonianSystem, opts: &DeriveOptions) -> Result<Derivation> {
    let mut out = derive_representation(sys, opts)?;
    let Some(rep) = &out.rep else {
        return Ok(out);
    };
    let rebuilt = reconstruct_a2(sys, &rep.g, &rep.r, &rep.l)?;
    let residual = first_difference(&rebuilt, &sys.a2);
    out.stages.push(Check::new("reconstruct", residual.is_none(), residual));
    let expanded = expand_a2_from_ln(sys, &rep.ln)?;
    let residual = first_difference(&expanded, &sys.a2);
    out.stages.push(Check::new("expansion", residual.is_none(), residual));
    let checks = certify(sys, rep, opts.certify)?;
    out.stages.extend(checks);
    Ok(out)
}
