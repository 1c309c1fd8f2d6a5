use std::io::Write;

use lagrep::algebra::Rational;
use lagrep::diffop::OperatorMatrix;
use lagrep::expr::parse_diffpoly;
use lagrep::geometry::{constant_curvature_test, first_bianchi_holds, riemann_symmetries_hold, Curvature, MetricField};
use lagrep::jet::{euler, DiffPoly};
use lagrep::json::{covector_to_json, operator_to_json, rmatrix_to_json, tensor3_to_json};
use lagrep::pipeline::{
    certify_conservation, contracted_density_check, derive_representation, q_apply, recursion_step, symplectic_operator,
    Check, DeriveOptions, Derivation, LagrangianRep,
};
use lagrep::variational::{all_triples, compatibility_evidence, jacobi_evidence, monomial_covectors, EvidenceReport};
use lagrep::{Error, Result};
use serde::Serialize;

use crate::input::{fixture, read_file, Loaded, Which};
use crate::report::Report;
use crate::Common;

fn load(common: &Common) -> Result<Loaded> {
    let file = match (&common.fixture, &common.input) {
        (Some(name), _) => fixture(name)?,
        (None, Some(path)) => read_file(path)?,
        (None, None) => return Err(Error::Invalid("give --fixture or --input".into())),
    };
    file.load(common.jet_bound as usize)
}

fn write_data(common: &Common, data: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(data).map_err(|e| Error::Invalid(e.to_string()))?;
    text.push('\n');
    match &common.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Invalid(e.to_string())),
    }
}

fn finish(common: &Common, report: &Report) -> Result<u8> {
    write_data(common, report)?;
    if !common.json {
        eprint!("{}", report.summary());
    }
    Ok(if report.pass { 0 } else { 1 })
}

pub fn transform(common: &Common, which: Which) -> Result<u8> {
    let loaded = load(common)?;
    let Some(t) = &loaded.transform else {
        return Err(Error::Invalid("the input has no transform".into()));
    };
    let op = loaded.flat_operator(which)?;
    write_data(common, &operator_to_json(&op))?;
    if !common.json {
        eprintln!("{} rewritten from ({}) to ({})", which.label(), t.source().names().join(", "), t.target().names().join(", "));
    }
    Ok(0)
}

fn representation_artifacts(report: &mut Report, d: &Derivation) {
    if let Some(sd) = &d.symplectic {
        report.artifact("G", rmatrix_to_json(&sd.g));
    }
    if let Some(rep) = &d.rep {
        report.artifact("R", rmatrix_to_json(&rep.r));
        report.artifact("R_method", rep.r_method);
        report.artifact("L", tensor3_to_json(&rep.l));
        report.artifact("F", tensor3_to_json(&rep.f));
        report.artifact("T", tensor3_to_json(&rep.t));
        report.artifact("Ln", covector_to_json(&rep.ln));
        report.artifact("tau", covector_to_json(&rep.tau));
    }
}

fn options(loaded: &Loaded, rden_bound: u32) -> DeriveOptions {
    DeriveOptions { rden_bound, r_candidate: loaded.r.clone(), ..DeriveOptions::default() }
}

/// `A₁` from the file must be `K ∂_x` in the flat coordinates.
fn first_operator_check(loaded: &Loaded, k: &lagrep::linalg::QMatrix) -> Result<Option<Check>> {
    if loaded.a1.is_none() {
        return Ok(None);
    }
    let a1 = loaded.flat_operator(Which::A1)?;
    let expected = OperatorMatrix::constant(&loaded.flat, k, 1);
    let pass = a1 == expected;
    Ok(Some(Check::new("flat-first-operator", pass, (!pass).then(|| "A1 differs from K D_x in the flat coordinates".into()))))
}

pub fn derive(common: &Common, rden_bound: u32) -> Result<u8> {
    let loaded = load(common)?;
    let sys = loaded.system()?;
    let mut report = Report::new("derive");
    if let Some(c) = first_operator_check(&loaded, sys.k())? {
        report.push(c);
    }
    let d = lagrep::pipeline::derive(&sys, &options(&loaded, rden_bound))?;
    report.extend(d.stages.iter().cloned());
    representation_artifacts(&mut report, &d);
    finish(common, &report)
}

fn evidence_check(name: &str, r: &EvidenceReport) -> Check {
    let residual = (!r.pass()).then(|| {
        let f = &r.failures[0];
        format!("{} of {} triples fail; first {:?}: {}", r.failures.len(), r.checked, f.triple, f.fingerprint)
    });
    Check::new(name, r.pass(), residual)
}

fn operator_checks(report: &mut Report, label: &str, op: &OperatorMatrix, basis: &[Vec<DiffPoly>], triples: &[(usize, usize, usize)]) -> Result<()> {
    let defects = op.skew_defects()?;
    report.push(Check::new(
        &format!("{label} skew-adjoint"),
        defects.is_empty(),
        (!defects.is_empty()).then(|| {
            let names: Vec<String> = defects.iter().map(|(i, j)| format!("{label}[{}][{}]", i + 1, j + 1)).collect();
            format!("adjoint differs from the negative at {}", names.join(", "))
        }),
    ));
    let order = op.order().unwrap_or(0);
    let hom = op.is_homogeneous(order);
    report.push(Check::new(
        &format!("{label} homogeneous"),
        hom,
        (!hom).then(|| format!("not homogeneous of order {order}")),
    ));
    let ev = jacobi_evidence(op, basis, triples)?;
    report.artifact(&format!("{label}_triples"), ev.checked);
    report.push(evidence_check(&format!("{label} jacobi"), &ev));
    Ok(())
}

pub fn check(common: &Common, which: Option<Which>, triple_order: usize) -> Result<u8> {
    let loaded = load(common)?;
    let basis = monomial_covectors(&loaded.source, triple_order)?;
    let triples = all_triples(basis.len());
    let mut report = Report::new("check");
    let selected: Vec<Which> = match which {
        Some(w) => vec![w],
        None => [Which::A1, Which::A2].into_iter().filter(|w| loaded.operator(*w).is_ok()).collect(),
    };
    if selected.is_empty() {
        return Err(Error::Invalid("the input has no operator".into()));
    }
    for w in &selected {
        operator_checks(&mut report, w.label(), loaded.operator(*w)?, &basis, &triples)?;
    }
    if selected.len() == 2 {
        let ev = compatibility_evidence(loaded.operator(Which::A1)?, loaded.operator(Which::A2)?, &basis, &triples)?;
        report.push(evidence_check("compatibility", &ev));
    }
    finish(common, &report)
}

fn parse_point(text: &str) -> Result<Vec<Rational>> {
    text.split(',')
        .map(|s| s.trim().parse::<Rational>().map_err(|e| Error::Invalid(format!("--point: {e}"))))
        .collect()
}

pub fn curvature(common: &Common, point: &str) -> Result<u8> {
    let loaded = load(common)?;
    let sys = loaded.system()?;
    let point = parse_point(point)?;
    if point.len() != sys.space().dim() {
        return Err(Error::Invalid(format!("--point needs {} coordinates", sys.space().dim())));
    }
    let sd = symplectic_operator(&sys)?;
    let metric = MetricField::new(sd.g.clone())?;
    let mut report = Report::new("curvature");
    report.artifact("G", rmatrix_to_json(metric.covariant()));
    report.artifact("G_inverse", rmatrix_to_json(metric.contravariant()));
    report.artifact("det_G", metric.det()?.to_string());
    let r = metric.riemann();
    match constant_curvature_test(&metric) {
        Curvature::Constant(k) => {
            report.artifact("curvature", k.to_string());
            report.push(Check::new("constant-curvature", true, None));
        }
        Curvature::NotConstant { residual } => {
            report.artifact("curvature", serde_json::Value::Null);
            report.push(Check::new("constant-curvature", false, Some(residual)));
        }
    }
    report.push(Check::new("first-bianchi", first_bianchi_holds(&r), None));
    report.push(Check::new("riemann-symmetries", riemann_symmetries_hold(&r), None));
    let (pos, neg) = metric.signature_at(&point)?;
    report.artifact("signature", [pos, neg]);
    report.artifact("signature_point", point.iter().map(|x| x.to_string()).collect::<Vec<_>>());
    finish(common, &report)
}

/// Runs the stages up to `R`; on failure they are recorded and `None` is
/// returned.
fn representation(report: &mut Report, loaded: &Loaded, rden_bound: u32) -> Result<Option<(lagrep::pipeline::BiHamiltonianSystem, LagrangianRep)>> {
    let sys = loaded.system()?;
    let d = derive_representation(&sys, &options(loaded, rden_bound))?;
    report.extend(d.stages.iter().cloned());
    Ok(d.rep.map(|rep| (sys, rep)))
}

pub fn recursion(common: &Common, density: Option<&str>, rden_bound: u32) -> Result<u8> {
    let loaded = load(common)?;
    let mut report = Report::new("recursion");
    if let Some(text) = density {
        let sys = loaded.system()?;
        let h = parse_diffpoly(sys.space(), text).map_err(|e| Error::Invalid(format!("--density: {e}")))?;
        let next = recursion_step(&sys, &h)?;
        report.push(Check::new("recursion-step", true, None));
        report.artifact("density", h.to_string());
        report.artifact("next", next.to_string());
        return finish(common, &report);
    }
    let Some((sys, rep)) = representation(&mut report, &loaded, rden_bound)? else {
        return finish(common, &report);
    };
    let kl = q_apply(sys.k(), &rep.ln);
    let mut next = Vec::new();
    for (k, expected) in kl.iter().enumerate() {
        let name = sys.space().names()[k].clone();
        let h = recursion_step(&sys, &DiffPoly::jet(sys.space(), k, 0)?)?;
        let same = euler(&h)? == euler(expected)?;
        report.push(Check::new(
            &format!("recursion from {name}"),
            same,
            (!same).then(|| "Euler expression differs from that of K^{km} L_m".to_string()),
        ));
        next.push(h.to_string());
    }
    report.artifact("next", next);
    finish(common, &report)
}

pub fn conservation(common: &Common, rden_bound: u32) -> Result<u8> {
    let loaded = load(common)?;
    if loaded.hamiltonian.is_none() {
        return Err(Error::Invalid("conservation needs a hamiltonian density".into()));
    }
    let mut report = Report::new("conservation");
    let Some((sys, rep)) = representation(&mut report, &loaded, rden_bound)? else {
        return finish(common, &report);
    };
    report.push(certify_conservation(&sys, &rep)?);
    // A property of particular systems, not a requirement: reported only.
    let contracted = contracted_density_check(sys.space(), &rep.ln)?;
    report.artifact("contracted_density_is_divergence", contracted.pass);
    report.artifact("Ln", covector_to_json(&rep.ln));
    finish(common, &report)
}
