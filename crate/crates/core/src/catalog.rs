//! The two classification tables, the mappings between their cases, and
//! end-to-end verification of both.
//!
//! Table 1 covers the whole class, Table 2 the subclass `V = V(x)`. Row
//! numbers follow the printed tables; row 0 is the generic header row.
//! `∂_t` and `∂_x` are encoded as `D(1)` and `G(1)`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::equiv::{EquivTransform, TransformSpec, DEFAULT_DOMAIN};
use crate::exec::Exec;
use crate::expr::number::{fmt_rat, rat};
use crate::expr::{ex, is_zero, Decision, ExactReal, Expr};
use crate::liealg::{bracket, in_span, linearly_independent, AlgebraElement};
use crate::symmetry::{is_symmetry, Potential};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("no case {1} in table {0}")]
    UnknownCase(u8, u32),
}

/// Parameter predicate attached to a case.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    Ge { param: String, bound: String },
    Gt { param: String, bound: String },
    Ne { param: String, value: String },
    NotBothZero { a: String, b: String },
}

impl Constraint {
    fn ge(p: &str, n: i64, d: i64) -> Self {
        Constraint::Ge { param: p.into(), bound: fmt_rat(&rat(n, d)) }
    }

    fn gt(p: &str, n: i64, d: i64) -> Self {
        Constraint::Gt { param: p.into(), bound: fmt_rat(&rat(n, d)) }
    }

    fn ne(p: &str, n: i64, d: i64) -> Self {
        Constraint::Ne { param: p.into(), value: fmt_rat(&rat(n, d)) }
    }

    fn not_both_zero(a: &str, b: &str) -> Self {
        Constraint::NotBothZero { a: a.into(), b: b.into() }
    }

    /// Evaluates the predicate; parameters missing from `values` fail it.
    pub fn holds(&self, values: &BTreeMap<String, ExactReal>) -> bool {
        use std::cmp::Ordering::*;
        let cmp = |p: &str, bound: &str| {
            let b = parse_rational(bound)?;
            values.get(p).map(|v| v.cmp_rational(&b))
        };
        match self {
            Constraint::Ge { param, bound } => matches!(cmp(param, bound), Some(Greater | Equal)),
            Constraint::Gt { param, bound } => cmp(param, bound) == Some(Greater),
            Constraint::Ne { param, value } => matches!(cmp(param, value), Some(Greater | Less)),
            Constraint::NotBothZero { a, b } => match (values.get(a), values.get(b)) {
                (Some(x), Some(y)) => x.signum() != 0 || y.signum() != 0,
                _ => false,
            },
        }
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => Some(BigRational::new(n.trim().parse().ok()?, d.trim().parse().ok()?)),
        None => crate::expr::number::parse_decimal(s.trim_start_matches('-')).map(|r| if s.starts_with('-') { -r } else { r }),
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Ge { param, bound } => write!(f, "{param} >= {bound}"),
            Constraint::Gt { param, bound } => write!(f, "{param} > {bound}"),
            Constraint::Ne { param, value } => write!(f, "{param} != {value}"),
            Constraint::NotBothZero { a, b } => write!(f, "({a},{b}) != (0,0)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TableCase {
    pub table: u8,
    pub id: u32,
    pub potential: Potential,
    /// Real parameters of the template, in display order.
    pub params: Vec<&'static str>,
    pub constraints: Vec<Constraint>,
    pub basis: Vec<AlgebraElement>,
    /// Equivalent Table 1 row (Table 2 only).
    pub cross_ref: Option<u32>,
}

impl TableCase {
    pub fn key(&self) -> (u8, u32) {
        (self.table, self.id)
    }

    /// Template with parameters replaced by the given values.
    pub fn instantiate(&self, values: &BTreeMap<String, ExactReal>) -> Potential {
        let mut e = self.potential.expr().clone();
        for (p, v) in values {
            e = e.subst_param(p, &Expr::exact_real(v));
        }
        Potential(e)
    }

    pub fn admissible(&self, values: &BTreeMap<String, ExactReal>) -> bool {
        self.constraints.iter().all(|c| c.holds(values))
    }
}

fn case(table: u8, id: u32, v: &str, params: &[&'static str], constraints: Vec<Constraint>, basis: &[&str], cross_ref: Option<u32>) -> TableCase {
    TableCase {
        table,
        id,
        potential: Potential::parse(v).expect("table potential parses"),
        params: params.to_vec(),
        constraints,
        basis: basis
            .iter()
            .map(|b| AlgebraElement::parse(b).expect("table operator parses"))
            .collect(),
        cross_ref,
    }
}

fn table1() -> Vec<TableCase> {
    let ab = || vec![Constraint::ge("beta", 0, 1), Constraint::not_both_zero("alpha", "beta")];
    vec![
        case(1, 0, "V(t,x)", &[], vec![], &["M(1)"], None),
        case(1, 1, "i*W(t)", &[], vec![], &["M(1)", "G(1)", "G(t)"], None),
        case(1, 2, "(i/2)*(t+nu)/(t^2+1)", &["nu"], vec![Constraint::ge("nu", 0, 1)], &["M(1)", "G(1)", "G(t)", "D(t^2+1)"], None),
        case(
            1,
            3,
            "i*nu/t",
            &["nu"],
            vec![Constraint::ge("nu", 1, 4), Constraint::ne("nu", 1, 2)],
            &["M(1)", "G(1)", "G(t)", "D(t)"],
            None,
        ),
        case(1, 4, "i", &[], vec![], &["M(1)", "G(1)", "G(t)", "D(1)"], None),
        case(1, 5, "0", &[], vec![], &["M(1)", "G(1)", "G(t)", "D(1)", "D(t)"], None),
        case(1, 6, "V(x)", &[], vec![], &["M(1)", "D(1)"], None),
        case(1, 7, "(alpha+i*beta)*x^-2", &["alpha", "beta"], ab(), &["M(1)", "D(1)", "D(t)"], None),
    ]
}

fn table2() -> Vec<TableCase> {
    vec![
        case(2, 0, "V(x)", &[], vec![], &["M(1)", "D(1)"], Some(6)),
        case(
            2,
            1,
            "(alpha+i*beta)*x^-2",
            &["alpha", "beta"],
            vec![Constraint::ge("beta", 0, 1), Constraint::not_both_zero("alpha", "beta")],
            &["M(1)", "D(1)", "D(t)"],
            Some(7),
        ),
        case(
            2,
            2,
            "x^2+i+(alpha+i*beta)*x^-2",
            &["alpha", "beta"],
            vec![Constraint::not_both_zero("alpha", "beta")],
            &["M(1)", "D(1)", "D(exp(4*t))"],
            Some(7),
        ),
        case(2, 3, "i", &[], vec![], &["M(1)", "D(1)", "G(1)", "G(t)"], Some(4)),
        case(2, 4, "x+i*nu", &["nu"], vec![Constraint::gt("nu", 0, 1)], &["M(1)", "D(1)", "G(1)+M(t)", "G(2*t)+M(t^2)"], Some(4)),
        case(2, 5, "-x^2+i*nu", &["nu"], vec![Constraint::ge("nu", 0, 1)], &["M(1)", "D(1)", "G(sin(2*t))", "G(cos(2*t))"], Some(2)),
        case(
            2,
            6,
            "x^2+i*nu",
            &["nu"],
            vec![Constraint::ge("nu", 0, 1), Constraint::ne("nu", 1, 1)],
            &["M(1)", "D(1)", "G(exp(2*t))", "G(exp(-2*t))"],
            Some(3),
        ),
        case(2, 7, "0", &[], vec![], &["M(1)", "D(1)", "G(1)", "G(t)", "D(t)"], Some(5)),
        case(
            2,
            8,
            "x",
            &[],
            vec![],
            &["M(1)", "D(1)", "G(1)+M(t)", "G(2*t)+M(t^2)", "D(2*t)+G(3*t^2)+M(t^3)"],
            Some(5),
        ),
        case(
            2,
            9,
            "x^2+i",
            &[],
            vec![],
            &["M(1)", "D(1)", "G(exp(2*t))", "G(exp(-2*t))", "D(exp(4*t))"],
            Some(5),
        ),
    ]
}

/// Every row of both tables, header rows included.
pub fn all_cases() -> Vec<TableCase> {
    let mut v = table1();
    v.extend(table2());
    v
}

/// The numbered rows (7 + 9); header rows are excluded.
pub fn numbered_cases() -> Vec<TableCase> {
    all_cases().into_iter().filter(|c| c.id != 0).collect()
}

pub fn get_case(table: u8, id: u32) -> Result<TableCase, CatalogError> {
    all_cases()
        .into_iter()
        .find(|c| c.table == table && c.id == id)
        .ok_or(CatalogError::UnknownCase(table, id))
}

/// Table 2 rows whose potential is literally a Table 1 potential.
pub const IDENTITY_CROSS_REFS: [(u32, u32); 4] = [(0, 6), (1, 7), (3, 4), (7, 5)];

/// An equivalence transform carrying one case template onto another.
#[derive(Clone, Debug)]
pub struct CaseMapping {
    pub source: (u8, u32),
    pub target: (u8, u32),
    pub g: EquivTransform,
    /// Values substituted into the source template first, e.g. `ν = μ²`.
    pub source_params: Vec<(&'static str, Expr)>,
    /// Target parameters in terms of the source ones.
    pub parameter_map: Vec<(&'static str, Expr)>,
    /// Working `t`-interval of the transform.
    pub domain: (f64, f64),
}

impl CaseMapping {
    pub fn source_potential(&self) -> Potential {
        let mut e = get_case(self.source.0, self.source.1).expect("known case").potential.0;
        for (p, v) in &self.source_params {
            e = e.subst_param(p, v);
        }
        Potential(e)
    }

    pub fn target_potential(&self) -> Potential {
        let mut e = get_case(self.target.0, self.target.1).expect("known case").potential.0;
        // simultaneous substitution through temporary names
        for (p, _) in &self.parameter_map {
            e = e.subst_param(p, &Expr::param(&format!("{p}_mapped")));
        }
        for (p, v) in &self.parameter_map {
            e = e.subst_param(&format!("{p}_mapped"), v);
        }
        Potential(e)
    }
}

/// The printed mappings from Table 2 rows to Table 1 rows.
pub fn printed_mappings() -> Vec<CaseMapping> {
    let exp_map = |source: u32, target: u32, parameter_map: Vec<(&'static str, Expr)>| CaseMapping {
        source: (2, source),
        target: (1, target),
        g: EquivTransform::exp_map(),
        source_params: vec![],
        parameter_map,
        domain: (-1.0, 1.0),
    };
    let t = Expr::t();
    let mu = Expr::param("mu");
    vec![
        exp_map(6, 3, vec![("nu", ex("(1-nu)/4"))]),
        exp_map(2, 7, vec![]),
        exp_map(9, 5, vec![]),
        CaseMapping {
            source: (2, 5),
            target: (1, 2),
            g: EquivTransform::tan_map(),
            source_params: vec![],
            parameter_map: vec![],
            domain: (-0.7, 0.7),
        },
        CaseMapping {
            source: (2, 8),
            target: (1, 5),
            g: EquivTransform::new(t.clone(), t.clone(), -t.pow(2), Expr::frac(1, 3) * t.pow(3)).with_sqrt(Expr::one()),
            source_params: vec![],
            parameter_map: vec![],
            domain: DEFAULT_DOMAIN,
        },
        // ν = μ² with μ > 0, equivalent to T = |ν|t, X = −√|ν| t²
        CaseMapping {
            source: (2, 4),
            target: (1, 4),
            g: EquivTransform::new(mu.pow(2) * &t, &t / mu.pow(2), -(&mu * t.pow(2)), Expr::frac(1, 3) * t.pow(3))
                .with_sqrt(mu.clone()),
            source_params: vec![("nu", mu.pow(2))],
            parameter_map: vec![],
            domain: DEFAULT_DOMAIN,
        },
    ]
}

/// The inversion `T = −1/t` within Table 1 row 3, and its `ν = ½`
/// instance landing on row 5.
pub fn inversion_mappings() -> Vec<CaseMapping> {
    vec![
        CaseMapping {
            source: (1, 3),
            target: (1, 3),
            g: EquivTransform::inversion(),
            source_params: vec![],
            parameter_map: vec![("nu", ex("1/2-nu"))],
            domain: DEFAULT_DOMAIN,
        },
        CaseMapping {
            source: (1, 3),
            target: (1, 5),
            g: EquivTransform::inversion(),
            source_params: vec![("nu", Expr::frac(1, 2))],
            parameter_map: vec![],
            domain: DEFAULT_DOMAIN,
        },
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorReport {
    pub name: String,
    /// `exact`, `numeric` or `fail`.
    pub residual_zero: &'static str,
    pub residual: Option<String>,
}

fn status(holds: bool, d: Decision) -> &'static str {
    match (holds, d) {
        (false, _) => "fail",
        (true, Decision::Exact) => "exact",
        (true, _) => "numeric",
    }
}

fn operator_report(v: &Potential, q: &AlgebraElement) -> OperatorReport {
    let c = is_symmetry(v, q);
    OperatorReport {
        name: q.to_string(),
        residual_zero: status(c.holds, c.decision),
        residual: c.residual.or(c.evidence.filter(|_| !c.holds)),
    }
}

fn transport_report(g: &EquivTransform, source: &Potential, q: &AlgebraElement) -> OperatorReport {
    let Some(r) = g.residual_old_vars(source, q) else {
        return operator_report(&g.apply_to_potential(source), q);
    };
    let z = is_zero(&r);
    OperatorReport {
        name: q.to_string(),
        residual_zero: status(z.zero, z.decision),
        residual: (!z.zero).then(|| r.simplify().to_string()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosureEntry {
    pub a: String,
    pub b: String,
    pub bracket: String,
    /// Real coordinates of the bracket in the basis, if it lies in the span.
    pub coefficients: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub table: u8,
    pub id: u32,
    pub potential: String,
    pub constraints: Vec<String>,
    pub operators: Vec<OperatorReport>,
    pub closure: Vec<ClosureEntry>,
    pub independent: bool,
    pub pass: bool,
}

pub fn verify_case(c: &TableCase) -> CaseReport {
    let operators: Vec<OperatorReport> = c.basis.iter().map(|q| operator_report(&c.potential, q)).collect();
    let mut closure = Vec::new();
    for i in 0..c.basis.len() {
        for j in i + 1..c.basis.len() {
            let br = bracket(&c.basis[i], &c.basis[j]);
            closure.push(ClosureEntry {
                a: c.basis[i].to_string(),
                b: c.basis[j].to_string(),
                bracket: br.to_string(),
                coefficients: in_span(&br, &c.basis).map(|cs| cs.iter().map(fmt_rat).collect()),
            });
        }
    }
    let independent = linearly_independent(&c.basis);
    let pass = independent
        && operators.iter().all(|o| o.residual_zero == "exact")
        && closure.iter().all(|e| e.coefficients.is_some());
    CaseReport {
        table: c.table,
        id: c.id,
        potential: c.potential.to_string(),
        constraints: c.constraints.iter().map(|k| k.to_string()).collect(),
        operators,
        closure,
        independent,
        pass,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MappingReport {
    pub source: (u8, u32),
    pub target: (u8, u32),
    pub transform: TransformSpec,
    pub source_potential: String,
    pub target_potential: String,
    pub valid: bool,
    pub validation: Option<String>,
    pub equal: bool,
    pub decision: Decision,
    pub difference: Option<String>,
    /// Target basis operators checked against the mapped potential.
    pub transport: Vec<OperatorReport>,
    pub pass: bool,
}

pub fn verify_mapping(m: &CaseMapping) -> MappingReport {
    let source = m.source_potential();
    let target = m.target_potential();
    let validation = m.g.validate(m.domain).err().map(|e| e.to_string());
    let check = m.g.maps_to(&source, &target);
    let basis = get_case(m.target.0, m.target.1).expect("known case").basis;
    let transport: Vec<OperatorReport> = basis.iter().map(|q| transport_report(&m.g, &source, q)).collect();
    let pass = validation.is_none()
        && check.equal
        && check.decision == Decision::Exact
        && transport.iter().all(|o| o.residual_zero == "exact");
    MappingReport {
        source: m.source,
        target: m.target,
        transform: m.g.to_spec(),
        source_potential: source.to_string(),
        target_potential: target.to_string(),
        valid: validation.is_none(),
        validation,
        equal: check.equal,
        decision: check.decision,
        difference: check.difference,
        transport,
        pass,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossRefReport {
    pub table2: u32,
    pub table1: u32,
    /// `identity` or `mapping`.
    pub witness: &'static str,
    pub pass: bool,
}

/// Checks that every Table 2 row's equivalent Table 1 row is witnessed
/// by identity or by a printed mapping.
pub fn verify_cross_refs() -> Vec<CrossRefReport> {
    let maps = printed_mappings();
    table2()
        .iter()
        .map(|c| {
            let n1 = c.cross_ref.expect("Table 2 rows carry a cross reference");
            let (witness, pass) = if IDENTITY_CROSS_REFS.contains(&(c.id, n1)) {
                let t1 = get_case(1, n1).expect("known case");
                ("identity", is_zero(&(c.potential.expr() - t1.potential.expr())).zero)
            } else {
                ("mapping", maps.iter().any(|m| m.source == (2, c.id) && m.target == (1, n1)))
            };
            CrossRefReport { table2: c.id, table1: n1, witness, pass }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TablesReport {
    pub cases: Vec<CaseReport>,
    pub mappings: Vec<MappingReport>,
    pub inversions: Vec<MappingReport>,
    pub cross_refs: Vec<CrossRefReport>,
    pub pass: bool,
}

/// Verifies every numbered case, every mapping and the cross references.
pub fn verify_all(exec: Exec) -> TablesReport {
    let cases = exec.map(&numbered_cases(), verify_case);
    let mappings = exec.map(&printed_mappings(), verify_mapping);
    let inversions = exec.map(&inversion_mappings(), verify_mapping);
    let cross_refs = verify_cross_refs();
    let pass = cases.iter().all(|c| c.pass)
        && mappings.iter().all(|m| m.pass)
        && inversions.iter().all(|m| m.pass)
        && cross_refs.iter().all(|c| c.pass);
    TablesReport { cases, mappings, inversions, cross_refs, pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        let c = get_case(1, 7).unwrap();
        assert_eq!(c.basis.len(), 3);
        assert_eq!(c.constraints[0].to_string(), "beta >= 0");
        assert_eq!(get_case(1, 5).unwrap().basis.len(), 5);
        assert_eq!(get_case(2, 5).unwrap().basis[2], AlgebraElement::g(ex("sin(2*t)")));
        assert!(get_case(1, 8).is_err());
        assert!(get_case(3, 1).is_err());
        assert_eq!(numbered_cases().len(), 16);
    }

    #[test]
    fn constraints() {
        let c = get_case(1, 3).unwrap();
        let at = |v: BigRational| BTreeMap::from([("nu".to_string(), ExactReal::rational(v))]);
        assert!(c.admissible(&at(rat(1, 4))));
        assert!(!c.admissible(&at(rat(1, 2))));
        assert!(!c.admissible(&at(rat(1, 5))));
        let root = ExactReal::rational_power(&rat(1, 2), 1, 2).unwrap();
        assert!(c.admissible(&BTreeMap::from([("nu".to_string(), root)])));
        let c = get_case(1, 7).unwrap();
        let ab = |a, b| {
            BTreeMap::from([
                ("alpha".to_string(), ExactReal::rational(rat(a, 1))),
                ("beta".to_string(), ExactReal::rational(rat(b, 1))),
            ])
        };
        assert!(!c.admissible(&ab(0, 0)));
        assert!(c.admissible(&ab(-3, 0)));
        assert!(!c.admissible(&ab(1, -1)));
    }

    #[test]
    fn case_nine_report() {
        let r = verify_case(&get_case(2, 9).unwrap());
        assert!(r.pass, "{r:?}");
        let entry = |a: &str, b: &str| r.closure.iter().find(|e| e.a == a && e.b == b).unwrap().clone();
        assert_eq!(entry("G(exp(2*t))", "G(exp(-2*t))").bracket, "-2*M(1)");
        assert_eq!(entry("D(1)", "G(exp(2*t))").bracket, "G(2*exp(2*t))");
        assert_eq!(entry("G(exp(2*t))", "D(exp(4*t))").bracket, "0");
    }

    #[test]
    fn header_and_generic_rows() {
        for (t, id) in [(1, 0), (1, 1), (1, 6), (2, 0)] {
            assert!(verify_case(&get_case(t, id).unwrap()).pass, "{t} {id}");
        }
    }

    #[test]
    fn single_mappings() {
        for m in printed_mappings().iter().chain(inversion_mappings().iter()) {
            let r = verify_mapping(m);
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn broken_mapping_is_reported() {
        let mut m = printed_mappings().remove(0);
        m.parameter_map = vec![("nu", ex("(1+nu)/4"))];
        let r = verify_mapping(&m);
        assert!(!r.pass);
        assert!(r.difference.is_some());
    }

    #[test]
    fn cross_refs() {
        let r = verify_cross_refs();
        assert_eq!(r.len(), 10);
        assert!(r.iter().all(|c| c.pass), "{r:?}");
    }
}
