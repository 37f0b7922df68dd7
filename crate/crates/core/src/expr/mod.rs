//! Exact symbolic expressions in the independent variables `t`, `x` and
//! named real parameters.
//!
//! Trees are immutable and cheap to clone. Constructors perform light
//! structural simplification (flattening, constant folding); the real
//! normal form is [`CanonicalForm`].

mod canonical;
mod eval;
pub mod number;
mod parse;
mod zero;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use canonical::{Atom, CanonicalForm, Freq, Mono, Poly};
pub use eval::{eval, eval_f64, EvalError, HpComplex, Point};
pub use number::{Cq, ExactReal, Radical};
pub use parse::{parse, ParseError, ParseErrorKind};
pub use zero::{
    default_seed, is_zero, is_zero_with, set_default_seed, Decision, SampleDomain, ZeroConfig,
    ZeroTest,
};

/// Independent variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    T,
    X,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
        }
    }
}

/// Unary functions. `Exp`, `Sin`, `Cos` belong to the exact class (with
/// arguments linear in `t`, `x`); the others are evaluable only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Log,
    Atan,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Log => "log",
            Func::Atan => "atan",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Uninterpreted function symbol, e.g. the arbitrary `V` of a generic
/// potential. `derivs[k]` counts derivatives taken in argument slot `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Opaque {
    pub name: Arc<str>,
    pub derivs: Vec<u32>,
    pub conj: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(Cq),
    Root(Radical),
    Var(Var),
    Param(Arc<str>),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Pow(Expr, i64),
    Call(Func, Expr),
    Apply(Opaque, Vec<Expr>),
}

#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

/// Names that cannot be used as parameters.
pub const RESERVED: &[&str] = &[
    "t", "x", "i", "exp", "sin", "cos", "tan", "log", "atan", "sqrt", "sech",
];

/// What a [`Expr::substitute`] binding replaces.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Symbol {
    Var(Var),
    Param(Arc<str>),
}

pub type Bindings = BTreeMap<Symbol, Expr>;

impl Expr {
    fn from_node(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn num(c: Cq) -> Expr {
        Expr::from_node(Node::Num(c))
    }

    pub fn int(n: i64) -> Expr {
        Expr::num(Cq::from_int(n))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::num(Cq::frac(n, d))
    }

    pub fn rational(r: BigRational) -> Expr {
        Expr::num(Cq::real(r))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn i() -> Expr {
        Expr::num(Cq::i())
    }

    pub fn t() -> Expr {
        Expr::from_node(Node::Var(Var::T))
    }

    pub fn x() -> Expr {
        Expr::from_node(Node::Var(Var::X))
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_node(Node::Var(v))
    }

    /// Named real parameter. Panics on reserved names; the parser rejects
    /// them before reaching here.
    pub fn param(name: &str) -> Expr {
        assert!(!RESERVED.contains(&name), "reserved name used as parameter: {name}");
        Expr::from_node(Node::Param(Arc::from(name)))
    }

    /// `b^(1/n)` for a positive rational `b`.
    pub fn root_of(b: &BigRational, n: u32) -> Option<Expr> {
        let (c, r) = Radical::normalize(b, n)?;
        Some(match r {
            Some(r) => Expr::rational(c) * Expr::from_node(Node::Root(r)),
            None => Expr::rational(c),
        })
    }

    pub fn exact_real(v: &ExactReal) -> Expr {
        match &v.radical {
            Some(r) => Expr::rational(v.coef.clone()) * Expr::from_node(Node::Root(r.clone())),
            None => Expr::rational(v.coef.clone()),
        }
    }

    /// Application of an uninterpreted function to arguments.
    pub fn apply(name: &str, args: Vec<Expr>) -> Expr {
        let derivs = vec![0; args.len()];
        Expr::from_node(Node::Apply(
            Opaque {
                name: Arc::from(name),
                derivs,
                conj: false,
            },
            args,
        ))
    }

    pub fn as_num(&self) -> Option<&Cq> {
        match self.node() {
            Node::Num(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        self.as_num().is_some_and(Cq::is_zero)
    }

    pub fn is_one_literal(&self) -> bool {
        self.as_num().is_some_and(Cq::is_one)
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(terms.len());
        let mut c = Cq::zero();
        for term in terms {
            match term.node() {
                Node::Num(k) => c = &c + k,
                Node::Sum(inner) => {
                    for e in inner {
                        match e.node() {
                            Node::Num(k) => c = &c + k,
                            _ => flat.push(e.clone()),
                        }
                    }
                }
                _ => flat.push(term),
            }
        }
        if !c.is_zero() {
            flat.push(Expr::num(c));
        }
        match flat.len() {
            0 => Expr::zero(),
            1 => flat.pop().unwrap(),
            _ => Expr::from_node(Node::Sum(flat)),
        }
    }

    pub fn prod(factors: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(factors.len());
        let mut c = Cq::one();
        for f in factors {
            match f.node() {
                Node::Num(k) => c = &c * k,
                Node::Prod(inner) => {
                    for e in inner {
                        match e.node() {
                            Node::Num(k) => c = &c * k,
                            _ => flat.push(e.clone()),
                        }
                    }
                }
                _ => flat.push(f),
            }
        }
        if c.is_zero() {
            return Expr::zero();
        }
        if !c.is_one() {
            flat.insert(0, Expr::num(c));
        }
        match flat.len() {
            0 => Expr::one(),
            1 => flat.pop().unwrap(),
            _ => Expr::from_node(Node::Prod(flat)),
        }
    }

    pub fn pow(&self, n: i64) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return self.clone();
        }
        match self.node() {
            Node::Num(c) => match c.powi(n) {
                Some(v) => Expr::num(v),
                None => Expr::from_node(Node::Pow(self.clone(), n)),
            },
            Node::Pow(b, m) => b.pow(m * n),
            _ => Expr::from_node(Node::Pow(self.clone(), n)),
        }
    }

    pub fn recip(&self) -> Expr {
        self.pow(-1)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        if let Some(c) = arg.as_num() {
            if c.is_zero() {
                match f {
                    Func::Exp | Func::Cos => return Expr::one(),
                    Func::Sin | Func::Atan | Func::Sqrt => return Expr::zero(),
                    Func::Log => {}
                }
            }
            if f == Func::Log && c.is_one() {
                return Expr::zero();
            }
            if f == Func::Sqrt && c.is_real() {
                if c.re.is_positive() {
                    return Expr::root_of(&c.re, 2).expect("positive radicand");
                }
                return Expr::i() * Expr::root_of(&-&c.re, 2).expect("positive radicand");
            }
        }
        Expr::from_node(Node::Call(f, arg))
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::call(Func::Exp, arg)
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::call(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::call(Func::Cos, arg)
    }

    /// `tan u`, stored as `sin u / cos u`.
    pub fn tan(arg: Expr) -> Expr {
        Expr::sin(arg.clone()) * Expr::cos(arg).recip()
    }

    /// `sech u`, stored as `2 / (exp u + exp(-u))`.
    pub fn sech(arg: Expr) -> Expr {
        Expr::int(2) * (Expr::exp(arg.clone()) + Expr::exp(-arg)).recip()
    }

    pub fn log(arg: Expr) -> Expr {
        Expr::call(Func::Log, arg)
    }

    pub fn atan(arg: Expr) -> Expr {
        Expr::call(Func::Atan, arg)
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::call(Func::Sqrt, arg)
    }

    /// Complex conjugate; `t`, `x`, parameters and radicals are real.
    pub fn conj(&self) -> Expr {
        match self.node() {
            Node::Num(c) => Expr::num(c.conj()),
            Node::Root(_) | Node::Var(_) | Node::Param(_) => self.clone(),
            Node::Sum(ts) => Expr::sum(ts.iter().map(Expr::conj).collect()),
            Node::Prod(fs) => Expr::prod(fs.iter().map(Expr::conj).collect()),
            Node::Pow(b, n) => b.conj().pow(*n),
            Node::Call(f, a) => Expr::call(*f, a.conj()),
            Node::Apply(op, args) => {
                let mut op = op.clone();
                op.conj = !op.conj;
                Expr::from_node(Node::Apply(op, args.iter().map(Expr::conj).collect()))
            }
        }
    }

    pub fn re(&self) -> Expr {
        (self.clone() + self.conj()) * Expr::frac(1, 2)
    }

    pub fn im(&self) -> Expr {
        (self.clone() - self.conj()) * Expr::num(Cq::imag(number::rat(-1, 2)))
    }

    fn any(&self, pred: &dyn Fn(&Node) -> bool) -> bool {
        if pred(self.node()) {
            return true;
        }
        match self.node() {
            Node::Sum(v) | Node::Prod(v) | Node::Apply(_, v) => v.iter().any(|e| e.any(pred)),
            Node::Pow(b, _) | Node::Call(_, b) => b.any(pred),
            _ => false,
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.any(&|n| matches!(n, Node::Var(w) if *w == v))
    }

    pub fn has_opaque(&self) -> bool {
        self.any(&|n| matches!(n, Node::Apply(..)))
    }

    pub fn params(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<Arc<str>>) {
        match self.node() {
            Node::Param(p) => {
                out.insert(p.clone());
            }
            Node::Sum(v) | Node::Prod(v) | Node::Apply(_, v) => {
                v.iter().for_each(|e| e.collect_params(out))
            }
            Node::Pow(b, _) | Node::Call(_, b) => b.collect_params(out),
            _ => {}
        }
    }

    /// Simultaneous substitution of variables and parameters.
    pub fn substitute(&self, b: &Bindings) -> Expr {
        match self.node() {
            Node::Var(v) => b.get(&Symbol::Var(*v)).cloned().unwrap_or_else(|| self.clone()),
            Node::Param(p) => b
                .get(&Symbol::Param(p.clone()))
                .cloned()
                .unwrap_or_else(|| self.clone()),
            Node::Num(_) | Node::Root(_) => self.clone(),
            Node::Sum(ts) => Expr::sum(ts.iter().map(|e| e.substitute(b)).collect()),
            Node::Prod(fs) => Expr::prod(fs.iter().map(|e| e.substitute(b)).collect()),
            Node::Pow(base, n) => base.substitute(b).pow(*n),
            Node::Call(f, a) => Expr::call(*f, a.substitute(b)),
            Node::Apply(op, args) => Expr::from_node(Node::Apply(
                op.clone(),
                args.iter().map(|e| e.substitute(b)).collect(),
            )),
        }
    }

    pub fn subst_var(&self, v: Var, with: &Expr) -> Expr {
        let mut b = Bindings::new();
        b.insert(Symbol::Var(v), with.clone());
        self.substitute(&b)
    }

    pub fn subst_param(&self, name: &str, with: &Expr) -> Expr {
        let mut b = Bindings::new();
        b.insert(Symbol::Param(Arc::from(name)), with.clone());
        self.substitute(&b)
    }

    /// Exact derivative with respect to `t` or `x`; parameters are constants.
    pub fn diff(&self, v: Var) -> Expr {
        self.diff_sym(&Symbol::Var(v))
    }

    /// Derivative with respect to a named parameter.
    pub fn diff_param(&self, name: &str) -> Expr {
        self.diff_sym(&Symbol::Param(Arc::from(name)))
    }

    pub fn diff_n(&self, v: Var, n: usize) -> Expr {
        (0..n).fold(self.clone(), |e, _| e.diff(v))
    }

    fn diff_sym(&self, s: &Symbol) -> Expr {
        match self.node() {
            Node::Num(_) | Node::Root(_) => Expr::zero(),
            Node::Var(v) => {
                if *s == Symbol::Var(*v) {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Param(p) => {
                if *s == Symbol::Param(p.clone()) {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Sum(ts) => Expr::sum(ts.iter().map(|e| e.diff_sym(s)).collect()),
            Node::Prod(fs) => {
                let mut terms = Vec::new();
                for k in 0..fs.len() {
                    let dk = fs[k].diff_sym(s);
                    if dk.is_zero_literal() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = fs.clone();
                    factors[k] = dk;
                    terms.push(Expr::prod(factors));
                }
                Expr::sum(terms)
            }
            Node::Pow(b, n) => {
                let db = b.diff_sym(s);
                if db.is_zero_literal() {
                    return Expr::zero();
                }
                Expr::prod(vec![Expr::int(*n), b.pow(n - 1), db])
            }
            Node::Call(f, a) => {
                let da = a.diff_sym(s);
                if da.is_zero_literal() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Sin => Expr::cos(a.clone()),
                    Func::Cos => -Expr::sin(a.clone()),
                    Func::Log => a.recip(),
                    Func::Atan => (Expr::one() + a.pow(2)).recip(),
                    Func::Sqrt => Expr::frac(1, 2) * self.recip(),
                };
                outer * da
            }
            Node::Apply(op, args) => {
                let mut terms = Vec::new();
                for (k, a) in args.iter().enumerate() {
                    let da = a.diff_sym(s);
                    if da.is_zero_literal() {
                        continue;
                    }
                    let mut dop = op.clone();
                    dop.derivs[k] += 1;
                    terms.push(Expr::from_node(Node::Apply(dop, args.clone())) * da);
                }
                Expr::sum(terms)
            }
        }
    }

    /// Exact normal form; fails for expressions outside the closed class.
    pub fn canonical(&self) -> Result<CanonicalForm, canonical::CanonError> {
        CanonicalForm::of(self)
    }

    /// Canonicalizes and converts back to a tidy tree; returns `self`
    /// unchanged when the expression is outside the exact class.
    pub fn simplify(&self) -> Expr {
        match self.canonical() {
            Ok(c) => c.to_expr(),
            Err(_) => self.clone(),
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        is_zero(self).zero
    }
}

pub use canonical::CanonError;

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

macro_rules! expr_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                self.clone().$m(rhs.clone())
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                self.$m(rhs.clone())
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.clone().$m(rhs)
            }
        }
    };
}

expr_binop!(Add, add, |a, b| Expr::sum(vec![a, b]));
expr_binop!(Sub, sub, |a, b| Expr::sum(vec![a, -b]));
expr_binop!(Mul, mul, |a, b| Expr::prod(vec![a, b]));
expr_binop!(Div, div, |a, b| Expr::prod(vec![a, b.recip()]));

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::prod(vec![Expr::int(-1), self])
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

// Printing. Output is accepted by `parse` (except for derivatives and
// conjugates of opaque functions, which have no surface syntax).

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Sum,
    Prod,
    Pow,
}

fn fmt_num(c: &Cq, ctx: Prec) -> String {
    let s = c.to_string();
    let simple = c.is_real() && c.re.is_integer() && !c.re.is_negative();
    if simple || (ctx == Prec::Sum && c.is_real()) || (c.re.is_zero() && c.im.is_one()) {
        s
    } else {
        format!("({s})")
    }
}

fn fmt_expr(e: &Expr, ctx: Prec) -> String {
    match e.node() {
        Node::Num(c) => fmt_num(c, ctx),
        Node::Root(r) => {
            if ctx == Prec::Pow {
                format!("({r})")
            } else {
                r.to_string()
            }
        }
        Node::Var(v) => v.name().to_string(),
        Node::Param(p) => p.to_string(),
        Node::Sum(ts) => {
            let mut s = String::new();
            for (k, term) in ts.iter().enumerate() {
                let piece = fmt_expr(term, Prec::Sum);
                if k > 0 {
                    if let Some(rest) = piece.strip_prefix('-') {
                        s.push_str(" - ");
                        s.push_str(rest);
                        continue;
                    }
                    s.push_str(" + ");
                }
                s.push_str(&piece);
            }
            if ctx > Prec::Sum {
                format!("({s})")
            } else {
                s
            }
        }
        Node::Prod(fs) => {
            let (lead, first, rest): (String, Option<String>, &[Expr]) = match fs[0].as_num() {
                Some(c) if c.is_real() && (-&c.re).is_one() => ("-".to_string(), None, &fs[1..]),
                Some(c) if c.is_real() && c.re.is_negative() => (
                    "-".to_string(),
                    Some(fmt_num(&Cq::real(-&c.re), Prec::Prod)),
                    &fs[1..],
                ),
                _ => (String::new(), None, &fs[..]),
            };
            let body = first
                .into_iter()
                .chain(rest.iter().map(|f| fmt_expr(f, Prec::Prod)))
                .collect::<Vec<_>>()
                .join("*");
            let s = format!("{lead}{body}");
            if ctx > Prec::Prod || (ctx == Prec::Prod && !lead.is_empty()) {
                format!("({s})")
            } else {
                s
            }
        }
        Node::Pow(b, n) => {
            let s = format!("{}^{}", fmt_expr(b, Prec::Pow), n);
            if ctx == Prec::Pow {
                format!("({s})")
            } else {
                s
            }
        }
        Node::Call(f, a) => format!("{}({})", f.name(), fmt_expr(a, Prec::Sum)),
        Node::Apply(op, args) => {
            let args = args
                .iter()
                .map(|a| fmt_expr(a, Prec::Sum))
                .collect::<Vec<_>>()
                .join(",");
            let mut name = op.name.to_string();
            if op.derivs.iter().any(|d| *d > 0) {
                let ds = op.derivs.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
                name = format!("{name}_[{ds}]");
            }
            if op.conj {
                format!("conj({name}({args}))")
            } else {
                format!("{name}({args})")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_expr(self, Prec::Sum))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

/// Convenience: parse or panic. For literals in tables and tests.
pub fn ex(text: &str) -> Expr {
    parse(text).unwrap_or_else(|e| panic!("bad expression literal {text:?}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_fold_constants() {
        let e = Expr::int(2) + Expr::int(3) * Expr::one();
        assert_eq!(e, Expr::int(5));
        assert_eq!(Expr::t() * Expr::zero(), Expr::zero());
        assert_eq!(Expr::t().pow(2).pow(3), Expr::t().pow(6));
        assert_eq!(Expr::exp(Expr::zero()), Expr::one());
    }

    #[test]
    fn diff_basic() {
        assert!((ex("x^2").diff(Var::X) - ex("2*x")).is_identically_zero());
        assert!((ex("exp(4*t)").diff(Var::T) - ex("4*exp(4*t)")).is_identically_zero());
        assert!(ex("nu*x").diff(Var::T).is_identically_zero());
        assert!((ex("nu*t^3").diff_param("nu") - ex("t^3")).is_identically_zero());
    }

    #[test]
    fn substitution_examples() {
        let e = ex("x^2").subst_var(Var::X, &ex("x+1"));
        assert!((e - ex("(x+1)^2")).is_identically_zero());
        let e = ex("i*nu/t").subst_var(Var::T, &ex("-1/t"));
        assert!((e - ex("-i*nu*t")).is_identically_zero());
        let e = ex("x^2+i*nu").subst_param("nu", &Expr::zero());
        assert!((e - ex("x^2")).is_identically_zero());
    }

    #[test]
    fn substitution_is_simultaneous() {
        let mut b = Bindings::new();
        b.insert(Symbol::Var(Var::T), Expr::x());
        b.insert(Symbol::Var(Var::X), Expr::t());
        let e = ex("t - 2*x").substitute(&b);
        assert!((e - ex("x - 2*t")).is_identically_zero());
    }

    #[test]
    fn tan_is_rewritten() {
        let e = ex("tan(2*t)");
        assert!(matches!(e.node(), Node::Prod(_)));
        assert!(!format!("{e}").contains("tan"));
    }

    #[test]
    fn opaque_chain_rule() {
        let v = Expr::apply("V", vec![Expr::t(), Expr::x()]);
        let d = v.diff(Var::X).diff(Var::X);
        match d.node() {
            Node::Apply(op, _) => assert_eq!(op.derivs, vec![0, 2]),
            other => panic!("unexpected {other:?}"),
        }
        let w = Expr::apply("W", vec![Expr::t()]);
        assert!(w.diff(Var::X).is_zero_literal());
    }

    #[test]
    fn conj_and_parts() {
        let e = ex("(2+3*i)*x");
        assert!((e.conj() - ex("(2-3*i)*x")).is_identically_zero());
        assert!((e.re() - ex("2*x")).is_identically_zero());
        assert!((e.im() - ex("3*x")).is_identically_zero());
    }
}
