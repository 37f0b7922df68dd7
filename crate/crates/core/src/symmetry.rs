//! The classifying condition: when is `Q = D(ξ)+G(χ)+λM` a Lie symmetry
//! of `i ψ_t + ψ_xx + |ψ|²ψ + V ψ = 0`?
//!
//! `Q` is a symmetry iff
//!
//! ```text
//! i η_t + η_xx + ξ^t V_t + ξ^x V_x + ξ^t_t V = 0,    η = eta_psi
//! ```
//!
//! identically in `(t, x)`. Expanding with the coefficients of `Q` gives
//!
//! ```text
//! R = ξV_t + (½ξ_t x + χ)V_x + ξ_t V − ⅛ξ_ttt x² − ½χ_tt x − (i/4)ξ_tt − λ_t.
//! ```

use std::fmt;

use num_rational::BigRational;
use serde::Serialize;

use crate::expr::{is_zero, CanonicalForm, Cq, Decision, Expr, ParseError, Var};
use crate::liealg::{to_vector_field, AlgebraElement};
use crate::linsolve;

/// Complex-valued potential `V(t, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential(pub Expr);

impl Potential {
    pub fn new(v: Expr) -> Self {
        Potential(v)
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        crate::expr::parse(text).map(Potential)
    }

    pub fn expr(&self) -> &Expr {
        &self.0
    }

    /// Arbitrary `V(t, x)`, as an uninterpreted function.
    pub fn generic() -> Self {
        Potential(Expr::apply("V", vec![Expr::t(), Expr::x()]))
    }

    /// Arbitrary `V(t)`.
    pub fn generic_t() -> Self {
        Potential(Expr::apply("V", vec![Expr::t()]))
    }

    /// Arbitrary `V(x)`.
    pub fn generic_x() -> Self {
        Potential(Expr::apply("V", vec![Expr::x()]))
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Expanded classifying residual.
pub fn residual(v: &Potential, q: &AlgebraElement) -> Expr {
    let v = v.expr();
    let x = Expr::x();
    let xi_t = q.xi.diff(Var::T);
    let xi_tt = xi_t.diff(Var::T);
    let xi_ttt = xi_tt.diff(Var::T);
    Expr::sum(vec![
        &q.xi * v.diff(Var::T),
        (Expr::frac(1, 2) * &xi_t * &x + &q.chi) * v.diff(Var::X),
        &xi_t * v,
        -(Expr::frac(1, 8) * xi_ttt * x.pow(2)),
        -(Expr::frac(1, 2) * q.chi.diff_n(Var::T, 2) * &x),
        -(Expr::num(Cq::imag(crate::expr::number::rat(1, 4))) * xi_tt),
        -q.lam.diff(Var::T),
    ])
}

/// The classifying condition computed from the vector field coefficients,
/// without the hand expansion. Used as an oracle for [`residual`].
pub fn residual_verbatim(v: &Potential, q: &AlgebraElement) -> Expr {
    let vf = to_vector_field(q);
    let v = v.expr();
    Expr::sum(vec![
        Expr::i() * vf.eta_psi.diff(Var::T),
        vf.eta_psi.diff_n(Var::X, 2),
        &vf.coef_t * v.diff(Var::T),
        &vf.coef_x * v.diff(Var::X),
        vf.coef_t.diff(Var::T) * v,
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryCheck {
    pub holds: bool,
    pub decision: Decision,
    /// Simplified residual when it does not vanish.
    pub residual: Option<String>,
    pub evidence: Option<String>,
}

pub fn is_symmetry(v: &Potential, q: &AlgebraElement) -> SymmetryCheck {
    let r = residual(v, q);
    let z = is_zero(&r);
    SymmetryCheck {
        holds: z.zero,
        decision: z.decision,
        residual: (!z.zero).then(|| r.simplify().to_string()),
        evidence: z.evidence,
    }
}

/// Symmetries found by solving the classifying condition over the real
/// span of an ansatz: `ξ, χ, λ ∈ span(functions)`.
#[derive(Clone, Debug)]
pub struct AnsatzSolution {
    pub basis: Vec<AlgebraElement>,
}

impl AnsatzSolution {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Default ansatz: the functions of `t` appearing in the tables.
pub fn table_ansatz() -> Vec<Expr> {
    [
        "1", "t", "t^2", "t^3", "exp(2*t)", "exp(-2*t)", "exp(4*t)", "exp(-4*t)", "sin(2*t)",
        "cos(2*t)", "sin(4*t)", "cos(4*t)", "t*exp(2*t)", "t*exp(-2*t)",
    ]
    .iter()
    .map(|s| crate::expr::ex(s))
    .collect()
}

/// Solves the classifying condition within the ansatz exactly. Returns
/// `None` when the potential leaves the exact class.
pub fn solve_ansatz(v: &Potential, functions: &[Expr]) -> Option<AnsatzSolution> {
    let mut generators = Vec::new();
    for f in functions {
        generators.push(AlgebraElement::d(f.clone()));
        generators.push(AlgebraElement::g(f.clone()));
        generators.push(AlgebraElement::m(f.clone()));
    }
    let forms: Vec<CanonicalForm> = generators
        .iter()
        .map(|q| residual(v, q).canonical())
        .collect::<Result<_, _>>()
        .ok()?;
    let nums = CanonicalForm::common_numerators(&forms);
    let mut monos = std::collections::BTreeSet::new();
    for p in &nums {
        for (m, _) in p.terms() {
            monos.insert(m.clone());
        }
    }
    let n = generators.len();
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for m in monos {
        let coefs: Vec<Cq> = nums
            .iter()
            .map(|p| {
                p.terms()
                    .find(|(mm, _)| **mm == m)
                    .map(|(_, c)| c.clone())
                    .unwrap_or_else(Cq::zero)
            })
            .collect();
        rows.push(coefs.iter().map(|c| c.re.clone()).collect());
        rows.push(coefs.iter().map(|c| c.im.clone()).collect());
    }
    let null = linsolve::nullspace(&rows, n);
    let basis = null
        .into_iter()
        .map(|v| {
            let mut q = AlgebraElement::zero();
            for (k, c) in v.iter().enumerate() {
                if !num_traits::Zero::is_zero(c) {
                    q = q.add(&generators[k].scale(&Expr::rational(c.clone())));
                }
            }
            q.simplify()
        })
        .collect();
    Some(AnsatzSolution { basis })
}
