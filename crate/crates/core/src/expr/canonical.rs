//! Canonical rational form.
//!
//! A form is `num / Π den_k^e_k` where `num` and every `den_k` are
//! polynomials in the atoms (`t`, `x`, parameters, radicals, opaque
//! function symbols) whose monomials also carry an exponential factor
//! `exp(w_t t + w_x x)` with complex-rational frequencies. `sin` and `cos`
//! are rewritten as complex exponentials, so `sin² + cos² = 1` and
//! `exp(a t) exp(b t) = exp((a+b) t)` hold by construction and the
//! zero polynomial is the unique representation of zero.
//!
//! Denominator factors are kept primitive (unit leading coefficient, no
//! exponential or monomial content) and are cancelled against the
//! numerator by exact division.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::number::Cq;
use super::{Expr, Func, Node, Opaque, Radical, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonError {
    #[error("outside the exact class: {0}")]
    OutOfClass(String),
    #[error("division by an expression that is identically zero")]
    DivisionByZero,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    T,
    X,
    Param(Arc<str>),
    Root(Radical),
    Opaque {
        name: Arc<str>,
        derivs: Vec<u32>,
        conj: bool,
        args: Vec<Var>,
    },
}

impl Atom {
    fn to_expr(&self) -> Expr {
        match self {
            Atom::T => Expr::t(),
            Atom::X => Expr::x(),
            Atom::Param(p) => Expr::from_node(Node::Param(p.clone())),
            Atom::Root(r) => Expr::from_node(Node::Root(r.clone())),
            Atom::Opaque {
                name,
                derivs,
                conj,
                args,
            } => Expr::from_node(Node::Apply(
                Opaque {
                    name: name.clone(),
                    derivs: derivs.clone(),
                    conj: *conj,
                },
                args.iter().map(|v| Expr::var(*v)).collect(),
            )),
        }
    }
}

/// Frequency vector of an exponential factor `exp(t*w_t + x*w_x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Freq {
    pub t: Cq,
    pub x: Cq,
}

impl Freq {
    pub fn zero() -> Freq {
        Freq {
            t: Cq::zero(),
            x: Cq::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.t.is_zero() && self.x.is_zero()
    }

    fn add(&self, o: &Freq) -> Freq {
        Freq {
            t: &self.t + &o.t,
            x: &self.x + &o.x,
        }
    }

    fn sub(&self, o: &Freq) -> Freq {
        Freq {
            t: &self.t - &o.t,
            x: &self.x - &o.x,
        }
    }

    fn coords(&self) -> [&BigRational; 4] {
        [&self.t.re, &self.t.im, &self.x.re, &self.x.im]
    }
}

impl Ord for Freq {
    fn cmp(&self, o: &Self) -> Ordering {
        self.t.lex_cmp(&o.t).then_with(|| self.x.lex_cmp(&o.x))
    }
}

impl PartialOrd for Freq {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Power product of atoms times an exponential. Ordered lexicographically,
/// which is compatible with multiplication.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono {
    atoms: Vec<(Atom, u32)>,
    freq: Freq,
}

impl Mono {
    pub fn one() -> Mono {
        Mono {
            atoms: Vec::new(),
            freq: Freq::zero(),
        }
    }

    pub fn atom(a: Atom) -> Mono {
        Mono {
            atoms: vec![(a, 1)],
            freq: Freq::zero(),
        }
    }

    pub fn exp(freq: Freq) -> Mono {
        Mono {
            atoms: Vec::new(),
            freq,
        }
    }

    pub fn atoms(&self) -> &[(Atom, u32)] {
        &self.atoms
    }

    pub fn freq(&self) -> &Freq {
        &self.freq
    }

    pub fn degree(&self, a: &Atom) -> u32 {
        self.atoms
            .iter()
            .find(|(b, _)| b == a)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.atoms.is_empty() && self.freq.is_zero()
    }

    /// Product; radicals are reduced and their overflow returned as an
    /// integer multiplier.
    fn mul(&self, o: &Mono) -> (Mono, BigInt) {
        let mut atoms = Vec::with_capacity(self.atoms.len() + o.atoms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.atoms.len() || j < o.atoms.len() {
            let pick = match (self.atoms.get(i), o.atoms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => unreachable!(),
            };
            match pick {
                Ordering::Less => {
                    atoms.push(self.atoms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    atoms.push(o.atoms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    atoms.push((self.atoms[i].0.clone(), self.atoms[i].1 + o.atoms[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        let mut mult = BigInt::one();
        atoms.retain_mut(|(a, e)| {
            if let Atom::Root(r) = a {
                while *e >= r.root() {
                    *e -= r.root();
                    mult *= r.base();
                }
            }
            *e > 0
        });
        (
            Mono {
                atoms,
                freq: self.freq.add(&o.freq),
            },
            mult,
        )
    }

    /// Quotient when every atom exponent stays non-negative.
    fn div(&self, o: &Mono) -> Option<Mono> {
        let mut atoms = self.atoms.clone();
        for (a, e) in &o.atoms {
            let slot = atoms.iter_mut().find(|(b, _)| b == a)?;
            if slot.1 < *e {
                return None;
            }
            slot.1 -= e;
        }
        atoms.retain(|(_, e)| *e > 0);
        Some(Mono {
            atoms,
            freq: self.freq.sub(&o.freq),
        })
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.atoms.get(i), o.atoms.get(j)) {
                (None, None) => return self.freq.cmp(&o.freq),
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((a, ea)), Some((b, eb))) => match a.cmp(b) {
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(eb);
                        }
                        i += 1;
                        j += 1;
                    }
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                },
            }
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Sparse polynomial with complex-rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, Cq>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Cq) -> Poly {
        Poly::term(Mono::one(), c)
    }

    pub fn term(m: Mono, c: Cq) -> Poly {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Cq)> {
        self.terms.iter()
    }

    pub fn as_constant(&self) -> Option<Cq> {
        match self.terms.len() {
            0 => Some(Cq::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    fn add_term(&mut self, m: Mono, c: Cq) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let (mut big, small) = if self.len() >= o.len() {
            (self.clone(), o)
        } else {
            (o.clone(), self)
        };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &Cq) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    fn mul_term(&self, m: &Mono, k: &Cq) -> Poly {
        let mut out = Poly::zero();
        for (a, c) in &self.terms {
            let (p, mult) = a.mul(m);
            let coef = (c * k).scale(&BigRational::from_integer(mult));
            out.add_term(p, coef);
        }
        out
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &o.terms {
            for (a, d) in &self.terms {
                let (p, mult) = a.mul(m);
                out.add_term(p, (d * c).scale(&BigRational::from_integer(mult)));
            }
        }
        out
    }

    pub fn pow(&self, mut n: u32) -> Poly {
        let mut acc = Poly::constant(Cq::one());
        let mut sq = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq);
            }
            n >>= 1;
            if n > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }

    pub fn leading(&self) -> Option<(&Mono, &Cq)> {
        self.terms.iter().next_back()
    }

    fn has_root_atoms(&self) -> bool {
        self.terms
            .keys()
            .any(|m| m.atoms.iter().any(|(a, _)| matches!(a, Atom::Root(_))))
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if d.has_root_atoms() {
            return None;
        }
        let (lm_d, lc_d) = d.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let inv = lc_d.inv()?;
        let bounds = QuotientBounds::new(self, d);
        let mut r = self.clone();
        let mut q = Poly::zero();
        let mut steps = 0usize;
        while let Some((lm_r, lc_r)) = r.leading() {
            let m = lm_r.div(&lm_d)?;
            if !bounds.admits(&m) {
                return None;
            }
            let c = lc_r * &inv;
            r = r.sub(&d.mul_term(&m, &c));
            q.add_term(m, c);
            steps += 1;
            if steps > 100_000 {
                return None;
            }
        }
        Some(q)
    }

    /// Splits `p = unit * content * primitive` where the unit is a constant
    /// times an exponential and the content is a power product of atoms.
    fn split_content(&self) -> (Cq, Freq, Vec<(Atom, u32)>, Poly) {
        let mut content: Option<Vec<(Atom, u32)>> = None;
        for m in self.terms.keys() {
            content = Some(match content {
                None => m.atoms.clone(),
                Some(c) => c
                    .into_iter()
                    .filter_map(|(a, e)| {
                        let d = m.degree(&a);
                        (d > 0).then(|| (a, e.min(d)))
                    })
                    .collect(),
            });
        }
        let content = content.unwrap_or_default();
        let cm = Mono {
            atoms: content.clone(),
            freq: Freq::zero(),
        };
        let stripped: BTreeMap<Mono, Cq> = self
            .terms
            .iter()
            .map(|(m, c)| (m.div(&cm).expect("content divides"), c.clone()))
            .collect();
        let stripped = Poly { terms: stripped };
        let (lm, lc) = stripped.leading().map(|(m, c)| (m.clone(), c.clone())).expect("nonzero");
        let inv = lc.inv().expect("nonzero");
        let shift = Mono::exp(Freq::zero().sub(&lm.freq));
        let prim = stripped.mul_term(&shift, &inv);
        (lc, lm.freq, content, prim)
    }

    fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    fn to_expr(&self) -> Expr {
        // Pair conjugate imaginary frequencies back into cos/sin.
        type Key = (Vec<(Atom, u32)>, Freq, Freq);
        let mut groups: BTreeMap<KeyOrd<Key>, (Cq, Cq)> = BTreeMap::new();
        for (m, c) in &self.terms {
            let re = Freq {
                t: Cq::real(m.freq.t.re.clone()),
                x: Cq::real(m.freq.x.re.clone()),
            };
            let im = Freq {
                t: Cq::real(m.freq.t.im.clone()),
                x: Cq::real(m.freq.x.im.clone()),
            };
            let positive = match (m.freq.t.im.is_zero(), m.freq.t.im.is_positive()) {
                (false, p) => p,
                (true, _) => !m.freq.x.im.is_negative(),
            };
            let im_abs = if positive { im } else { Freq::zero().sub(&im) };
            let slot = groups
                .entry(KeyOrd((m.atoms.clone(), re, im_abs)))
                .or_insert((Cq::zero(), Cq::zero()));
            if positive {
                slot.0 = &slot.0 + c;
            } else {
                slot.1 = &slot.1 + c;
            }
        }
        let mut terms = Vec::new();
        for (KeyOrd((atoms, re, im)), (cp, cm)) in groups.into_iter().rev() {
            let mut factors: Vec<Expr> = atoms
                .iter()
                .map(|(a, e)| a.to_expr().pow(*e as i64))
                .collect();
            if !re.is_zero() {
                factors.push(Expr::exp(linear_expr(&re)));
            }
            if im.is_zero() {
                factors.insert(0, Expr::num(&cp + &cm));
                terms.push(Expr::prod(factors));
            } else {
                let theta = linear_expr(&im);
                let cos_c = &cp + &cm;
                let sin_c = &(&cp - &cm) * &Cq::i();
                let trig = Expr::sum(vec![
                    Expr::num(cos_c) * Expr::cos(theta.clone()),
                    Expr::num(sin_c) * Expr::sin(theta),
                ]);
                factors.insert(0, trig);
                terms.push(Expr::prod(factors));
            }
        }
        Expr::sum(terms)
    }
}

/// Ordering wrapper so grouped keys iterate deterministically.
#[derive(PartialEq, Eq)]
struct KeyOrd<K>(K);

impl Ord for KeyOrd<(Vec<(Atom, u32)>, Freq, Freq)> {
    fn cmp(&self, o: &Self) -> Ordering {
        let a = Mono {
            atoms: self.0 .0.clone(),
            freq: self.0 .1.clone(),
        };
        let b = Mono {
            atoms: o.0 .0.clone(),
            freq: o.0 .1.clone(),
        };
        a.cmp(&b).then_with(|| self.0 .2.cmp(&o.0 .2))
    }
}

impl PartialOrd for KeyOrd<(Vec<(Atom, u32)>, Freq, Freq)> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn linear_expr(f: &Freq) -> Expr {
    Expr::sum(vec![
        Expr::num(f.t.clone()) * Expr::t(),
        Expr::num(f.x.clone()) * Expr::x(),
    ])
}

impl Ord for Poly {
    fn cmp(&self, o: &Self) -> Ordering {
        let mut a = self.terms.iter();
        let mut b = o.terms.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some((ma, ca)), Some((mb, cb))) => {
                    let c = ma.cmp(mb).then_with(|| ca.lex_cmp(cb));
                    if c != Ordering::Equal {
                        return c;
                    }
                }
            }
        }
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Degree box every term of an exact quotient must lie in.
struct QuotientBounds {
    atoms: BTreeMap<Atom, (i64, i64)>,
    freq: [(BigRational, BigRational); 4],
}

fn extents(p: &Poly) -> (BTreeMap<Atom, (i64, i64)>, [(BigRational, BigRational); 4]) {
    let mut atoms: BTreeMap<Atom, (i64, i64)> = BTreeMap::new();
    for m in p.terms.keys() {
        for (a, _) in &m.atoms {
            atoms.entry(a.clone()).or_insert((i64::MAX, i64::MIN));
        }
    }
    for m in p.terms.keys() {
        for (a, range) in atoms.iter_mut() {
            let d = m.degree(a) as i64;
            range.0 = range.0.min(d);
            range.1 = range.1.max(d);
        }
    }
    let mut freq: [(BigRational, BigRational); 4] = Default::default();
    for (k, slot) in freq.iter_mut().enumerate() {
        let vals: Vec<&BigRational> = p.terms.keys().map(|m| m.freq.coords()[k]).collect();
        let lo = vals.iter().min().map(|v| (*v).clone()).unwrap_or_default();
        let hi = vals.iter().max().map(|v| (*v).clone()).unwrap_or_default();
        *slot = (lo, hi);
    }
    (atoms, freq)
}

impl QuotientBounds {
    fn new(a: &Poly, d: &Poly) -> Self {
        let (aa, af) = extents(a);
        let (da, df) = extents(d);
        let mut atoms = BTreeMap::new();
        for key in aa.keys().chain(da.keys()) {
            let (alo, ahi) = aa.get(key).copied().unwrap_or((0, 0));
            let (dlo, dhi) = da.get(key).copied().unwrap_or((0, 0));
            atoms.insert(key.clone(), (alo - dlo, ahi - dhi));
        }
        let freq = std::array::from_fn(|k| (&af[k].0 - &df[k].0, &af[k].1 - &df[k].1));
        QuotientBounds { atoms, freq }
    }

    fn admits(&self, m: &Mono) -> bool {
        for (a, e) in &m.atoms {
            if !self.atoms.contains_key(a) {
                return false;
            }
            let _ = e;
        }
        for (a, (lo, hi)) in &self.atoms {
            let d = m.degree(a) as i64;
            if d < *lo || d > *hi {
                return false;
            }
        }
        let c = m.freq.coords();
        for k in 0..4 {
            if c[k] < &self.freq[k].0 || c[k] > &self.freq[k].1 {
                return false;
            }
        }
        true
    }
}

/// Canonical rational form of an expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

impl CanonicalForm {
    pub fn zero() -> Self {
        CanonicalForm::from_poly(Poly::zero())
    }

    pub fn constant(c: Cq) -> Self {
        CanonicalForm::from_poly(Poly::constant(c))
    }

    pub fn from_poly(p: Poly) -> Self {
        CanonicalForm {
            num: p,
            den: Vec::new(),
        }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &[(Poly, u32)] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The value as a constant, if it is one.
    pub fn as_constant(&self) -> Option<Cq> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// Canonicalizes an expression tree.
    pub fn of(e: &Expr) -> Result<Self, CanonError> {
        Ok(match e.node() {
            Node::Num(c) => CanonicalForm::constant(c.clone()),
            Node::Root(r) => {
                CanonicalForm::from_poly(Poly::term(Mono::atom(Atom::Root(r.clone())), Cq::one()))
            }
            Node::Var(Var::T) => CanonicalForm::from_poly(Poly::term(Mono::atom(Atom::T), Cq::one())),
            Node::Var(Var::X) => CanonicalForm::from_poly(Poly::term(Mono::atom(Atom::X), Cq::one())),
            Node::Param(p) => {
                CanonicalForm::from_poly(Poly::term(Mono::atom(Atom::Param(p.clone())), Cq::one()))
            }
            Node::Sum(ts) => {
                let mut acc = CanonicalForm::zero();
                for t in ts {
                    acc = acc.add(&CanonicalForm::of(t)?);
                }
                acc
            }
            Node::Prod(fs) => {
                let mut acc = CanonicalForm::constant(Cq::one());
                for f in fs {
                    acc = acc.mul(&CanonicalForm::of(f)?);
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
            Node::Pow(b, n) => CanonicalForm::of(b)?.powi(*n)?,
            Node::Call(f, a) => {
                let ca = CanonicalForm::of(a)?;
                canon_call(*f, &ca, a)?
            }
            Node::Apply(op, args) => {
                let mut vars = Vec::with_capacity(args.len());
                for a in args {
                    let ca = CanonicalForm::of(a)?;
                    match ca.as_single_var() {
                        Some(v) => vars.push(v),
                        None => {
                            return Err(CanonError::OutOfClass(format!(
                                "{} applied to a non-variable argument {a}",
                                op.name
                            )))
                        }
                    }
                }
                CanonicalForm::from_poly(Poly::term(
                    Mono::atom(Atom::Opaque {
                        name: op.name.clone(),
                        derivs: op.derivs.clone(),
                        conj: op.conj,
                        args: vars,
                    }),
                    Cq::one(),
                ))
            }
        })
    }

    fn as_single_var(&self) -> Option<Var> {
        if !self.den.is_empty() || self.num.len() != 1 {
            return None;
        }
        let (m, c) = self.num.terms.iter().next()?;
        if !c.is_one() || !m.freq.is_zero() || m.atoms.len() != 1 || m.atoms[0].1 != 1 {
            return None;
        }
        match m.atoms[0].0 {
            Atom::T => Some(Var::T),
            Atom::X => Some(Var::X),
            _ => None,
        }
    }

    /// `a t + b x` with constant complex coefficients, as a frequency.
    pub fn as_linear_freq(&self) -> Option<Freq> {
        if !self.den.is_empty() {
            return None;
        }
        let mut f = Freq::zero();
        for (m, c) in &self.num.terms {
            if !m.freq.is_zero() || m.atoms.len() != 1 || m.atoms[0].1 != 1 {
                return None;
            }
            match m.atoms[0].0 {
                Atom::T => f.t = c.clone(),
                Atom::X => f.x = c.clone(),
                _ => return None,
            }
        }
        Some(f)
    }

    pub fn neg(&self) -> Self {
        CanonicalForm {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let lcm = lcm_factors(&self.den, &o.den);
        let a = self.num.mul(&cofactor(&lcm, &self.den));
        let b = o.num.mul(&cofactor(&lcm, &o.den));
        CanonicalForm {
            num: a.add(&b),
            den: lcm,
        }
        .reduced()
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return CanonicalForm::zero();
        }
        let mut den = self.den.clone();
        for (f, e) in &o.den {
            push_factor(&mut den, f.clone(), *e);
        }
        CanonicalForm {
            num: self.num.mul(&o.num),
            den,
        }
        .reduced()
    }

    pub fn inv(&self) -> Result<Self, CanonError> {
        if self.is_zero() {
            return Err(CanonError::DivisionByZero);
        }
        let (lc, lfreq, content, prim) = self.num.split_content();
        let mut num = Poly::constant(Cq::one());
        for (f, e) in &self.den {
            num = num.mul(&f.pow(*e));
        }
        let unit_inv = Mono::exp(Freq::zero().sub(&lfreq));
        num = num.mul_term(&unit_inv, &lc.inv().expect("nonzero"));
        let mut den = Vec::new();
        for (a, e) in content {
            match &a {
                Atom::Root(r) => {
                    // r^(-e) = r^(n-e) / base
                    let m = Mono {
                        atoms: vec![(a.clone(), r.root() - e)],
                        freq: Freq::zero(),
                    };
                    let k = Cq::real(BigRational::new(BigInt::one(), r.base().clone()));
                    num = num.mul_term(&m, &k);
                }
                _ => push_factor(&mut den, Poly::term(Mono::atom(a), Cq::one()), e),
            }
        }
        if !prim.is_one() {
            push_factor(&mut den, prim, 1);
        }
        Ok(CanonicalForm { num, den }.reduced())
    }

    pub fn powi(&self, n: i64) -> Result<Self, CanonError> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = CanonicalForm::constant(Cq::one());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    fn reduced(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        for (f, e) in self.den.iter_mut() {
            while *e > 0 {
                match self.num.div_exact(f) {
                    Some(q) => {
                        self.num = q;
                        *e -= 1;
                    }
                    None => break,
                }
            }
        }
        self.den.retain(|(_, e)| *e > 0);
        self
    }

    /// Numerators of `forms` rewritten over their common denominator.
    pub fn common_numerators(forms: &[CanonicalForm]) -> Vec<Poly> {
        let mut lcm: Vec<(Poly, u32)> = Vec::new();
        for f in forms {
            lcm = lcm_factors(&lcm, &f.den);
        }
        forms
            .iter()
            .map(|f| f.num.mul(&cofactor(&lcm, &f.den)))
            .collect()
    }

    /// Converts back to a tidy expression tree.
    pub fn to_expr(&self) -> Expr {
        let mut factors = vec![self.num.to_expr()];
        for (f, e) in &self.den {
            factors.push(f.to_expr().pow(-(*e as i64)));
        }
        Expr::prod(factors)
    }
}

fn push_factor(den: &mut Vec<(Poly, u32)>, f: Poly, e: u32) {
    match den.iter_mut().find(|(g, _)| *g == f) {
        Some(slot) => slot.1 += e,
        None => {
            den.push((f, e));
            den.sort_by(|a, b| a.0.cmp(&b.0));
        }
    }
}

fn lcm_factors(a: &[(Poly, u32)], b: &[(Poly, u32)]) -> Vec<(Poly, u32)> {
    let mut out: Vec<(Poly, u32)> = a.to_vec();
    for (f, e) in b {
        match out.iter_mut().find(|(g, _)| g == f) {
            Some(slot) => slot.1 = slot.1.max(*e),
            None => out.push((f.clone(), *e)),
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

fn cofactor(lcm: &[(Poly, u32)], den: &[(Poly, u32)]) -> Poly {
    let mut acc = Poly::constant(Cq::one());
    for (f, e) in lcm {
        let have = den.iter().find(|(g, _)| g == f).map(|(_, k)| *k).unwrap_or(0);
        if *e > have {
            acc = acc.mul(&f.pow(e - have));
        }
    }
    acc
}

fn canon_call(f: Func, arg: &CanonicalForm, raw: &Expr) -> Result<CanonicalForm, CanonError> {
    let out_of_class = |why: &str| Err(CanonError::OutOfClass(format!("{}({raw}): {why}", f.name())));
    match f {
        Func::Exp | Func::Sin | Func::Cos => {
            if arg.is_zero() {
                return Ok(CanonicalForm::constant(if f == Func::Sin { Cq::zero() } else { Cq::one() }));
            }
            let Some(w) = arg.as_linear_freq() else {
                return out_of_class("argument is not linear in t, x");
            };
            let p = match f {
                Func::Exp => Poly::term(Mono::exp(w), Cq::one()),
                _ => {
                    let iw = Freq {
                        t: &w.t * &Cq::i(),
                        x: &w.x * &Cq::i(),
                    };
                    let plus = Mono::exp(iw.clone());
                    let minus = Mono::exp(Freq::zero().sub(&iw));
                    let half = Cq::frac(1, 2);
                    if f == Func::Cos {
                        let mut p = Poly::term(plus, half.clone());
                        p.add_term(minus, half);
                        p
                    } else {
                        // (e^{iu} - e^{-iu}) / (2i)
                        let k = Cq::imag(num_rational::BigRational::new((-1).into(), 2.into()));
                        let mut p = Poly::term(plus, k.clone());
                        p.add_term(minus, -&k);
                        p
                    }
                }
            };
            Ok(CanonicalForm::from_poly(p))
        }
        Func::Sqrt => {
            if let Some(c) = arg.as_constant() {
                if c.is_real() {
                    return CanonicalForm::of(&Expr::sqrt(Expr::num(c)));
                }
                return out_of_class("complex radicand");
            }
            // sqrt(c * exp(w t)) with c > 0 and real w
            if arg.den.is_empty() && arg.num.len() == 1 {
                let (m, c) = arg.num.terms.iter().next().unwrap();
                let real_freq = m.freq.t.is_real() && m.freq.x.is_real();
                if m.atoms.is_empty() && real_freq && c.is_real() && c.re.is_positive() {
                    let half = Freq {
                        t: m.freq.t.scale(&BigRational::new(1.into(), 2.into())),
                        x: m.freq.x.scale(&BigRational::new(1.into(), 2.into())),
                    };
                    let root = CanonicalForm::of(&Expr::root_of(&c.re, 2).expect("positive"))?;
                    return Ok(root.mul(&CanonicalForm::from_poly(Poly::term(Mono::exp(half), Cq::one()))));
                }
            }
            out_of_class("square root of a non-monomial")
        }
        Func::Log | Func::Atan => out_of_class("transcendental outside exp/sin/cos"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ex;

    fn zero(s: &str) -> bool {
        CanonicalForm::of(&ex(s)).unwrap().is_zero()
    }

    #[test]
    fn identities() {
        assert!(zero("sin(2*t)^2 + cos(2*t)^2 - 1"));
        assert!(zero("exp(2*t)*exp(-2*t) - 1"));
        assert!(zero("(t^2-1)/(t-1) - (t+1)"));
        assert!(zero("1/(t+1) + 1/(t-1) - 2*t/(t^2-1)"));
        assert!(zero("sin(2*t) - 2*sin(t)*cos(t)"));
        assert!(zero("2^(1/2)*2^(1/2) - 2"));
        assert!(zero("sqrt(8) - 2*2^(1/2)"));
        assert!(zero("sqrt(4*exp(2*t)) - 2*exp(t)"));
        assert!(!zero("t - x"));
        assert!(!zero("1"));
    }

    #[test]
    fn table_case_two_residual_identity() {
        assert!(zero(
            "(t^2+1)*(i/2)*(1/(t^2+1) - (t+nu)*2*t/(t^2+1)^2) + 2*t*(i/2)*(t+nu)/(t^2+1) - i/2"
        ));
    }

    #[test]
    fn out_of_class_detected() {
        assert!(matches!(
            CanonicalForm::of(&ex("exp(sin(t))")),
            Err(CanonError::OutOfClass(_))
        ));
        assert!(matches!(CanonicalForm::of(&ex("log(t)")), Err(CanonError::OutOfClass(_))));
        assert!(matches!(CanonicalForm::of(&ex("exp(t^2)")), Err(CanonError::OutOfClass(_))));
        assert!(matches!(
            CanonicalForm::of(&ex("1/(t-t)")),
            Err(CanonError::DivisionByZero)
        ));
    }

    #[test]
    fn denominators_cancel() {
        let c = CanonicalForm::of(&ex("(t^2+1)^2/(t^2+1)")).unwrap();
        assert!(c.denominator().is_empty());
        let c = CanonicalForm::of(&ex("x^3/x^5")).unwrap();
        assert_eq!(c.denominator().len(), 1);
        assert_eq!(c.denominator()[0].1, 2);
        let c = CanonicalForm::of(&ex("(exp(2*t)+1)/(exp(4*t)+exp(2*t))")).unwrap();
        assert!(c.denominator().is_empty());
    }

    #[test]
    fn to_expr_reconstructs_trig() {
        let e = ex("3*sin(2*t) + cos(2*t)*exp(t)");
        let back = CanonicalForm::of(&e).unwrap().to_expr();
        let s = back.to_string();
        assert!(s.contains("sin") && s.contains("cos"), "{s}");
        assert!(CanonicalForm::of(&(back - e)).unwrap().is_zero());
    }
}
