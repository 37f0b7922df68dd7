//! Operators `Q = D(ξ) + G(χ) + λM` of the ambient symmetry algebra.
//!
//! ```text
//! D(ξ) = ξ∂_t + ½ξ_t x∂_x + ⅛ξ_tt x² M − ½ξ_t I
//! G(χ) = χ∂_x + ½χ_t x M
//! M    = i(ψ∂_ψ − ψ*∂_ψ*),   I = ψ∂_ψ + ψ*∂_ψ*
//! ```

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{is_zero, CanonicalForm, Cq, Expr, Var};
use crate::linsolve;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("{0} depends on x")]
    DependsOnX(&'static str),
    #[error("operator syntax: {0}")]
    Syntax(String),
}

/// `D(xi) + G(chi) + lam*M`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub xi: Expr,
    pub chi: Expr,
    pub lam: Expr,
}

impl AlgebraElement {
    pub fn new(xi: Expr, chi: Expr, lam: Expr) -> Result<Self, LieError> {
        for (name, e) in [("xi", &xi), ("chi", &chi), ("lam", &lam)] {
            if e.depends_on(Var::X) {
                return Err(LieError::DependsOnX(name));
            }
        }
        Ok(AlgebraElement { xi, chi, lam })
    }

    pub fn zero() -> Self {
        AlgebraElement {
            xi: Expr::zero(),
            chi: Expr::zero(),
            lam: Expr::zero(),
        }
    }

    /// `D(xi)`. Panics if `xi` depends on `x`.
    pub fn d(xi: Expr) -> Self {
        AlgebraElement::new(xi, Expr::zero(), Expr::zero()).expect("D(xi) needs xi(t)")
    }

    pub fn g(chi: Expr) -> Self {
        AlgebraElement::new(Expr::zero(), chi, Expr::zero()).expect("G(chi) needs chi(t)")
    }

    pub fn m(lam: Expr) -> Self {
        AlgebraElement::new(Expr::zero(), Expr::zero(), lam).expect("lam M needs lam(t)")
    }

    pub fn channels(&self) -> [&Expr; 3] {
        [&self.xi, &self.chi, &self.lam]
    }

    pub fn add(&self, o: &Self) -> Self {
        AlgebraElement {
            xi: &self.xi + &o.xi,
            chi: &self.chi + &o.chi,
            lam: &self.lam + &o.lam,
        }
    }

    pub fn scale(&self, k: &Expr) -> Self {
        AlgebraElement {
            xi: k * &self.xi,
            chi: k * &self.chi,
            lam: k * &self.lam,
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&Expr::int(-1))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Channelwise zero test.
    pub fn is_zero(&self) -> bool {
        self.channels().iter().all(|e| is_zero(e).zero)
    }

    pub fn equals(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }

    pub fn simplify(&self) -> Self {
        AlgebraElement {
            xi: self.xi.simplify(),
            chi: self.chi.simplify(),
            lam: self.lam.simplify(),
        }
    }

    /// Parses `"D(2*t)+G(3*t^2)+M(t^3)"`, with optional real rational
    /// multiples such as `"-2*M(1)"` or `"1/2*D(t)"`.
    pub fn parse(text: &str) -> Result<Self, LieError> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            return Err(LieError::Syntax("empty operator".into()));
        }
        let mut terms = Vec::new();
        let mut depth = 0i32;
        let mut start = 0;
        for (k, &c) in chars.iter().enumerate() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' | '-' if depth == 0 && k > start => {
                    terms.push(chars[start..k].iter().collect::<String>());
                    start = k;
                }
                _ => {}
            }
        }
        terms.push(chars[start..].iter().collect());
        let mut acc = AlgebraElement::zero();
        for term in terms {
            acc = acc.add(&parse_term(&term)?);
        }
        Ok(acc)
    }
}

fn parse_term(term: &str) -> Result<AlgebraElement, LieError> {
    let body = term.strip_prefix('+').unwrap_or(term);
    let open = body
        .find(['D', 'G', 'M'])
        .ok_or_else(|| LieError::Syntax(format!("no D/G/M in {term:?}")))?;
    let (coef_text, rest) = body.split_at(open);
    let kind = rest.chars().next().unwrap();
    let inner = rest[1..]
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| LieError::Syntax(format!("expected {kind}(...) in {term:?}")))?;
    let coef = match coef_text {
        "" => Expr::one(),
        "-" => Expr::int(-1),
        s => {
            let s = s
                .strip_suffix('*')
                .ok_or_else(|| LieError::Syntax(format!("expected '*' after coefficient in {term:?}")))?;
            let c = crate::expr::parse(s).map_err(|e| LieError::Syntax(e.to_string()))?;
            match c.as_num() {
                Some(v) if v.is_real() => c,
                _ => return Err(LieError::Syntax(format!("coefficient {s} is not a real number"))),
            }
        }
    };
    let f = crate::expr::parse(inner).map_err(|e| LieError::Syntax(e.to_string()))?;
    let f = coef * f;
    match kind {
        'D' => AlgebraElement::new(f, Expr::zero(), Expr::zero()),
        'G' => AlgebraElement::new(Expr::zero(), f, Expr::zero()),
        _ => AlgebraElement::new(Expr::zero(), Expr::zero(), f),
    }
}

fn fmt_channel(name: char, e: &Expr) -> Option<String> {
    let e = e.simplify();
    if e.is_zero_literal() {
        return None;
    }
    Some(match e.as_num() {
        Some(c) if c.is_one() => format!("{name}(1)"),
        Some(c) => format!("{}*{name}(1)", c),
        None => format!("{name}({e})"),
    })
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = [('D', &self.xi), ('G', &self.chi), ('M', &self.lam)]
            .iter()
            .filter_map(|(n, e)| fmt_channel(*n, e))
            .collect();
        if parts.is_empty() {
            return f.write_str("0");
        }
        let mut s = String::new();
        for (k, p) in parts.iter().enumerate() {
            if k > 0 && !p.starts_with('-') {
                s.push('+');
            }
            s.push_str(p);
        }
        f.write_str(&s)
    }
}

/// Coefficients of `ξ^t ∂_t + ξ^x ∂_x + η ∂_ψ + η* ∂_ψ*` with
/// `η = eta_psi · ψ`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub coef_t: Expr,
    pub coef_x: Expr,
    pub eta_psi: Expr,
}

impl VectorField {
    pub fn equals(&self, o: &VectorField) -> bool {
        is_zero(&(&self.coef_t - &o.coef_t)).zero
            && is_zero(&(&self.coef_x - &o.coef_x)).zero
            && is_zero(&(&self.eta_psi - &o.eta_psi)).zero
    }
}

pub fn to_vector_field(q: &AlgebraElement) -> VectorField {
    let x = Expr::x();
    let xi_t = q.xi.diff(Var::T);
    let xi_tt = xi_t.diff(Var::T);
    let chi_t = q.chi.diff(Var::T);
    let phase = Expr::frac(1, 8) * &xi_tt * x.pow(2) + Expr::frac(1, 2) * &chi_t * &x + &q.lam;
    VectorField {
        coef_t: q.xi.clone(),
        coef_x: Expr::frac(1, 2) * &xi_t * &x + &q.chi,
        eta_psi: Expr::i() * phase - Expr::frac(1, 2) * xi_t,
    }
}

/// Commutator from the closed-form structure relations.
pub fn bracket(q1: &AlgebraElement, q2: &AlgebraElement) -> AlgebraElement {
    let d = |e: &Expr| e.diff(Var::T);
    let half = Expr::frac(1, 2);
    let xi = &q1.xi * d(&q2.xi) - &q2.xi * d(&q1.xi);
    let chi = (&q1.xi * d(&q2.chi) - &half * d(&q1.xi) * &q2.chi)
        - (&q2.xi * d(&q1.chi) - &half * d(&q2.xi) * &q1.chi);
    let lam = &q1.xi * d(&q2.lam) - &q2.xi * d(&q1.lam)
        + &half * (&q1.chi * d(&q2.chi) - &q2.chi * d(&q1.chi));
    AlgebraElement { xi, chi, lam }.simplify()
}

/// Commutator computed directly from the vector-field coefficients.
/// Since `η` is linear in `ψ`, the `ψ`-derivative terms cancel and every
/// coefficient transforms as `Q₁(f₂) − Q₂(f₁)` with `Q = τ∂_t + ξ∂_x`.
pub fn bracket_direct(q1: &AlgebraElement, q2: &AlgebraElement) -> VectorField {
    let v1 = to_vector_field(q1);
    let v2 = to_vector_field(q2);
    let apply = |v: &VectorField, f: &Expr| &v.coef_t * f.diff(Var::T) + &v.coef_x * f.diff(Var::X);
    let comm = |f1: &Expr, f2: &Expr| apply(&v1, f2) - apply(&v2, f1);
    VectorField {
        coef_t: comm(&v1.coef_t, &v2.coef_t).simplify(),
        coef_x: comm(&v1.coef_x, &v2.coef_x).simplify(),
        eta_psi: comm(&v1.eta_psi, &v2.eta_psi).simplify(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Reflection {
    /// `x → −x`
    X,
    /// `t → −t`, `ψ → ψ*`
    T,
}

pub fn ad_reflection(q: &AlgebraElement, which: Reflection) -> AlgebraElement {
    match which {
        Reflection::X => AlgebraElement {
            xi: q.xi.clone(),
            chi: -&q.chi,
            lam: q.lam.clone(),
        },
        Reflection::T => {
            let mt = -Expr::t();
            AlgebraElement {
                xi: -q.xi.subst_var(Var::T, &mt),
                chi: q.chi.subst_var(Var::T, &mt),
                lam: -q.lam.subst_var(Var::T, &mt),
            }
        }
    }
}

/// Type of the one-dimensional subalgebra spanned by an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OneDimClass {
    /// equivalent to `⟨D(1)⟩`
    DType,
    /// equivalent to `⟨G(1)⟩`
    GType,
    /// equivalent to `⟨tM⟩`
    TmType,
    /// `⟨M⟩`
    MType,
    Zero,
}

pub fn one_dim_class(q: &AlgebraElement) -> OneDimClass {
    if !is_zero(&q.xi).zero {
        OneDimClass::DType
    } else if !is_zero(&q.chi).zero {
        OneDimClass::GType
    } else if !is_zero(&q.lam.diff(Var::T)).zero {
        OneDimClass::TmType
    } else if !is_zero(&q.lam).zero {
        OneDimClass::MType
    } else {
        OneDimClass::Zero
    }
}

/// Real constants `c` with `q = Σ c_k basis_k`, if they exist.
pub fn in_span(q: &AlgebraElement, basis: &[AlgebraElement]) -> Option<Vec<BigRational>> {
    let n = basis.len();
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let mut rhs: Vec<BigRational> = Vec::new();
    for ch in 0..3 {
        let mut forms = vec![q.channels()[ch].canonical().ok()?];
        for b in basis {
            forms.push(b.channels()[ch].canonical().ok()?);
        }
        let nums = CanonicalForm::common_numerators(&forms);
        let mut monos = std::collections::BTreeSet::new();
        for p in &nums {
            for (m, _) in p.terms() {
                monos.insert(m.clone());
            }
        }
        for m in monos {
            let coef = |k: usize| {
                nums[k]
                    .terms()
                    .find(|(mm, _)| **mm == m)
                    .map(|(_, c)| c.clone())
                    .unwrap_or_else(Cq::zero)
            };
            let target = coef(0);
            let cols: Vec<Cq> = (1..=n).map(coef).collect();
            rows.push(cols.iter().map(|c| c.re.clone()).collect());
            rhs.push(target.re.clone());
            rows.push(cols.iter().map(|c| c.im.clone()).collect());
            rhs.push(target.im.clone());
        }
    }
    let c = linsolve::solve(&rows, &rhs, n)?;
    let mut combo = AlgebraElement::zero();
    for (k, b) in basis.iter().enumerate() {
        if !c[k].is_zero() {
            combo = combo.add(&b.scale(&Expr::rational(c[k].clone())));
        }
    }
    combo.equals(q).then_some(c)
}

/// True when no nontrivial real combination of `basis` vanishes.
pub fn linearly_independent(basis: &[AlgebraElement]) -> bool {
    (0..basis.len()).all(|k| {
        let mut rest = basis.to_vec();
        let q = rest.remove(k);
        in_span(&q, &rest).is_none()
    }) && basis.iter().all(|b| !b.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ex;

    fn el(s: &str) -> AlgebraElement {
        AlgebraElement::parse(s).unwrap()
    }

    #[test]
    fn vector_field_examples() {
        let v = to_vector_field(&AlgebraElement::d(ex("t^2")));
        assert!(is_zero(&(&v.coef_x - ex("t*x"))).zero);
        assert!(is_zero(&(&v.eta_psi - ex("i*x^2/4 - t"))).zero);
        let v = to_vector_field(&AlgebraElement::m(Expr::one()));
        assert!(v.coef_t.is_zero_literal());
        assert!(is_zero(&(&v.eta_psi - Expr::i())).zero);
        let v = to_vector_field(&AlgebraElement::g(Expr::t()));
        assert!(is_zero(&(&v.coef_x - Expr::t())).zero);
        assert!(is_zero(&(&v.eta_psi - ex("i*x/2"))).zero);
    }

    #[test]
    fn bracket_examples() {
        assert!(bracket(&el("D(1)"), &el("D(t)")).equals(&el("D(1)")));
        assert!(bracket(&el("G(exp(2*t))"), &el("G(exp(-2*t))")).equals(&el("-2*M(1)")));
        let q = el("D(t^2+1)+G(t)+M(t^3)");
        assert!(bracket(&q, &q).is_zero());
    }

    #[test]
    fn bracket_direct_examples() {
        assert!(bracket_direct(&el("D(1)"), &el("G(t)")).equals(&to_vector_field(&el("G(1)"))));
        assert!(bracket_direct(&el("D(t)"), &el("D(t^2)")).equals(&to_vector_field(&el("D(t^2)"))));
        let q = el("D(t)+G(t^2)");
        let m = el("M(1)");
        assert!(bracket_direct(&m, &q).equals(&to_vector_field(&bracket(&m, &q))));
    }

    #[test]
    fn reflections() {
        assert!(ad_reflection(&el("G(t)"), Reflection::X).equals(&el("G(-t)")));
        assert!(ad_reflection(&el("D(t)"), Reflection::T).equals(&el("D(t)")));
        assert!(ad_reflection(&el("M(1)"), Reflection::T).equals(&el("-M(1)")));
    }

    #[test]
    fn one_dim_classes() {
        assert_eq!(one_dim_class(&el("D(t^2+1)+G(1)")), OneDimClass::DType);
        assert_eq!(one_dim_class(&el("G(5)+M(t)")), OneDimClass::GType);
        assert_eq!(one_dim_class(&el("M(3*t)")), OneDimClass::TmType);
        assert_eq!(one_dim_class(&el("M(1)")), OneDimClass::MType);
        assert_eq!(one_dim_class(&AlgebraElement::zero()), OneDimClass::Zero);
    }

    #[test]
    fn span_examples() {
        let basis = vec![el("M(1)"), el("D(1)"), el("G(exp(2*t))"), el("G(exp(-2*t))"), el("D(exp(4*t))")];
        let c = in_span(&el("-2*M(1)"), &basis).unwrap();
        assert_eq!(c[0], BigRational::from_integer((-2).into()));
        assert!(c[1..].iter().all(Zero::is_zero));
        assert!(in_span(&el("D(t)"), &[el("M(1)"), el("D(1)")]).is_none());
        let c = in_span(&el("G(2*exp(2*t))"), &basis).unwrap();
        assert_eq!(c[2], BigRational::from_integer(2.into()));
        assert!(linearly_independent(&basis));
    }

    #[test]
    fn operator_text_round_trip() {
        let q = el("D(2*t)+G(3*t^2)+M(t^3)");
        assert!(q.equals(&AlgebraElement::new(ex("2*t"), ex("3*t^2"), ex("t^3")).unwrap()));
        assert_eq!(el("-2*M(1)").to_string(), "-2*M(1)");
        assert!(el(&q.to_string()).equals(&q));
        assert!(AlgebraElement::parse("D(x)").is_err());
        assert!(AlgebraElement::parse("i*D(t)").is_err());
        assert!(AlgebraElement::parse("Q(t)").is_err());
    }
}
