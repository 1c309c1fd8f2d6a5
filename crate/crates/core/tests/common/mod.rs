//! Random inputs shared by the property suites and the acceptance run, and
//! the four core invariants as reusable checks.

#![allow(dead_code)]

use std::sync::Arc;

use lagrep::diffop::{DiffOp, OperatorMatrix};
use lagrep::expr::{parse_diffpoly, parse_ratfn};
use lagrep::jet::{euler, volterra_homotopy, DiffPoly, Space};
use lagrep::transform::{change_coordinates, PointTransform};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const BOUND: usize = 10;

/// Coefficients in the base variables `x`, `y` (renamed per space).
pub const RATIONAL_POOL: &[&str] = &["1", "-2", "3/2", "x", "y", "x*y", "x^2-y", "1/(x+2)", "x/(y+3)", "1/(x-y+1)^2"];
pub const POLY_POOL: &[&str] = &["1", "-2", "3/2", "x", "y", "x*y", "x^2-y", "y^3"];

/// Terms `(c, coefficient index, jets)`; each jet is `(component, order)`.
pub type Terms = Vec<(i32, usize, Vec<(usize, usize)>)>;
pub type OperatorSpec = Vec<Vec<Terms>>;

pub fn with_names(expr: &str, names: &[&str]) -> String {
    expr.replace('x', "\u{1}").replace('y', names[1]).replace('\u{1}', names[0])
}

pub fn terms(pool: &'static [&'static str], max_order: usize, max_jets: usize, max_terms: usize) -> impl Strategy<Value = Terms> {
    prop::collection::vec(
        (-3i32..=3, 0..pool.len(), prop::collection::vec((0usize..2, 0..=max_order), 0..=max_jets)),
        0..=max_terms,
    )
}

/// Up to four terms with up to three jet factors of order ≤ `max_order`.
pub fn diffpoly_terms(pool: &'static [&'static str], max_order: usize) -> impl Strategy<Value = Terms> {
    terms(pool, max_order, 3, 4)
}

pub fn build(space: &Arc<Space>, pool: &[&str], terms: &[(i32, usize, Vec<(usize, usize)>)]) -> DiffPoly {
    let names: Vec<&str> = space.names().iter().map(String::as_str).collect();
    let mut text = String::from("0");
    for (c, k, jets) in terms {
        text.push_str(&format!("+({c})*({})", with_names(pool[*k], &names)));
        for (comp, order) in jets {
            let suffix = if *order == 0 { String::new() } else { format!("_{}", "x".repeat(*order)) };
            text.push_str(&format!("*{}{}", names[*comp], suffix));
        }
    }
    parse_diffpoly(space, &text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

pub fn space(names: [&str; 2]) -> Arc<Space> {
    Space::new(names, BOUND)
}

pub fn operator_from(space: &Arc<Space>, pool: &[&str], entries: &[Vec<Terms>]) -> OperatorMatrix {
    OperatorMatrix::from_fn(space, 2, 2, |i, j| {
        let coeffs: Vec<DiffPoly> = entries[i * 2 + j].iter().map(|t| build(space, pool, t)).collect();
        DiffOp::from_coeffs(space, coeffs)
    })
}

pub fn operator_strategy(pool: &'static [&'static str], max_order: usize, max_terms: usize) -> impl Strategy<Value = OperatorSpec> {
    prop::collection::vec(prop::collection::vec(terms(pool, 1, 2, max_terms), 1..=max_order + 1), 4)
}

/// `(P, (m11, m12, m21, m22), c1, c2)` for two quadratic triangular changes.
pub type CoordinateCase = (OperatorSpec, (i64, i64, i64, i64), i64, i64);

pub fn coordinate_case() -> impl Strategy<Value = CoordinateCase> {
    (
        operator_strategy(POLY_POOL, 1, 2),
        (-2i64..=2, -2i64..=2, -2i64..=2, -2i64..=2).prop_filter("invertible", |(a, b, c, d)| a * d - b * c != 0),
        -2i64..=2,
        -2i64..=2,
    )
}

pub fn check_euler_of_total_derivative(t: &Terms) -> Result<(), TestCaseError> {
    let s = space(["u", "v"]);
    let f = build(&s, RATIONAL_POOL, t);
    let e = euler(&f.total_x().unwrap()).unwrap();
    prop_assert!(e.iter().all(DiffPoly::is_zero));
    Ok(())
}

pub fn check_adjoint_of_composition(a: &OperatorSpec, b: &OperatorSpec) -> Result<(), TestCaseError> {
    let s = space(["u", "v"]);
    let (a, b) = (operator_from(&s, RATIONAL_POOL, a), operator_from(&s, RATIONAL_POOL, b));
    let lhs = a.compose(&b).unwrap().adjoint().unwrap();
    let rhs = b.adjoint().unwrap().compose(&a.adjoint().unwrap()).unwrap();
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

pub fn check_coordinate_composition((p, m, c1, c2): &CoordinateCase) -> Result<(), TestCaseError> {
    let ab = space(["a", "b"]);
    let pq = space(["p", "q"]);
    let xy = space(["x", "y"]);
    let first = PointTransform::new(
        &ab,
        &pq,
        vec![
            parse_ratfn(&pq, &format!("({})*p+({})*q+({c1})*q^2", m.0, m.1)).unwrap(),
            parse_ratfn(&pq, &format!("({})*p+({})*q", m.2, m.3)).unwrap(),
        ],
        None,
    )
    .unwrap();
    let second = PointTransform::new(
        &pq,
        &xy,
        vec![parse_ratfn(&xy, "x").unwrap(), parse_ratfn(&xy, &format!("y+({c2})*x^2")).unwrap()],
        None,
    )
    .unwrap();
    let p = operator_from(&ab, POLY_POOL, p);
    let stepwise = change_coordinates(&change_coordinates(&p, &first).unwrap(), &second).unwrap();
    let direct = change_coordinates(&p, &first.then(&second).unwrap()).unwrap();
    prop_assert_eq!(stepwise, direct);
    Ok(())
}

pub fn check_homotopy_round_trip(t: &Terms) -> Result<(), TestCaseError> {
    let s = space(["u", "v"]);
    let l = build(&s, POLY_POOL, t);
    let psi = euler(&l).unwrap();
    let back = volterra_homotopy(&psi).unwrap();
    prop_assert_eq!(euler(&back).unwrap(), psi);
    Ok(())
}
