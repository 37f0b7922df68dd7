//! Point equivalence transformations of the class.
//!
//! The continuous part, with `A = T_tt/T_t` and `B = X_t/√T_t`:
//!
//! ```text
//! t̃ = T(t),   x̃ = ε√T_t x + X(t),
//! ψ̃ = ψ/√T_t · exp(i(⅛A x² + ½εB x + Ψ)),
//! Ṽ = (V + ⅛A_t x² + ½εB_t x + (i/4)A − (¼Ax + ½εB)² + Ψ_t) / T_t,
//! ```
//!
//! followed by the optional space reflection `I_x` (`x̃ = −x`) and the
//! time reflection `I_t` (`t̃ = −t`, `ψ̃ = ψ*`, `Ṽ = V*`), in that order.
//!
//! Equality of a mapped potential with a target is decided on the
//! pull-back: the target is expressed in the old variables, which keeps
//! every inverse function out of the comparison.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{
    eval_f64, is_zero, is_zero_with, Bindings, Cq, Decision, Expr, Point, SampleDomain, Symbol, Var,
    ZeroConfig,
};
use crate::liealg::AlgebraElement;
use crate::symmetry::Potential;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivError {
    #[error("invalid transform: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("transform description: {0}")]
    Format(String),
    #[error("composition with reflections is not supported")]
    Reflections,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivTransform {
    pub t_map: Expr,
    pub t_inv: Expr,
    pub x_shift: Expr,
    pub psi: Expr,
    pub eps: i8,
    pub reflect_x: bool,
    pub reflect_t: bool,
    /// Branch of `√T_t`; defaults to `sqrt(T_t)` when absent.
    pub sqrt_t_t: Option<Expr>,
}

/// Working interval of `t` on which a transform is used.
pub type Domain = (f64, f64);

pub const DEFAULT_DOMAIN: Domain = (0.3, 1.7);

impl EquivTransform {
    pub fn identity() -> Self {
        EquivTransform {
            t_map: Expr::t(),
            t_inv: Expr::t(),
            x_shift: Expr::zero(),
            psi: Expr::zero(),
            eps: 1,
            reflect_x: false,
            reflect_t: false,
            sqrt_t_t: Some(Expr::one()),
        }
    }

    /// Continuous transform with `ε = +1` and no reflections.
    pub fn new(t_map: Expr, t_inv: Expr, x_shift: Expr, psi: Expr) -> Self {
        EquivTransform {
            t_map,
            t_inv,
            x_shift,
            psi,
            eps: 1,
            reflect_x: false,
            reflect_t: false,
            sqrt_t_t: None,
        }
    }

    pub fn with_sqrt(mut self, s: Expr) -> Self {
        self.sqrt_t_t = Some(s);
        self
    }

    pub fn with_eps(mut self, eps: i8) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_reflections(mut self, reflect_x: bool, reflect_t: bool) -> Self {
        self.reflect_x = reflect_x;
        self.reflect_t = reflect_t;
        self
    }

    /// Galilean boost with velocity `v`: `X = vt`, `Ψ = v²t/4`.
    pub fn galilean(v: Expr) -> Self {
        let t = Expr::t();
        EquivTransform::new(t.clone(), t.clone(), &v * &t, Expr::frac(1, 4) * v.pow(2) * t)
            .with_sqrt(Expr::one())
    }

    /// `T = k t` for a positive rational `k`.
    pub fn scaling(k: &num_rational::BigRational) -> Self {
        let t = Expr::t();
        let root = Expr::root_of(k, 2).expect("positive scale");
        EquivTransform::new(
            Expr::rational(k.clone()) * &t,
            Expr::rational(num_traits::Inv::inv(k.clone())) * &t,
            Expr::zero(),
            Expr::zero(),
        )
        .with_sqrt(root)
    }

    /// Time reflection alone.
    pub fn time_reflection() -> Self {
        EquivTransform::identity().with_reflections(false, true)
    }

    /// Space reflection alone.
    pub fn space_reflection() -> Self {
        EquivTransform::identity().with_reflections(true, false)
    }

    /// `T = −1/t`, with `√T_t = 1/t` (valid for `t > 0`).
    pub fn inversion() -> Self {
        let t = Expr::t();
        EquivTransform::new(-t.recip(), -t.recip(), Expr::zero(), Expr::zero()).with_sqrt(t.recip())
    }

    /// `T = −e^{−4t}`, `T⁻¹ = −¼ log(−t)`, `√T_t = 2e^{−2t}`.
    pub fn exp_map() -> Self {
        let t = Expr::t();
        EquivTransform::new(
            -Expr::exp(Expr::int(-4) * &t),
            Expr::frac(-1, 4) * Expr::log(-t.clone()),
            Expr::zero(),
            Expr::zero(),
        )
        .with_sqrt(Expr::int(2) * Expr::exp(Expr::int(-2) * t))
    }

    /// `T = tan 2t`, `T⁻¹ = ½ atan t`, `√T_t = √2 / cos 2t` (for `|t| < π/4`).
    pub fn tan_map() -> Self {
        let t = Expr::t();
        let two_t = Expr::int(2) * &t;
        EquivTransform::new(
            Expr::tan(two_t.clone()),
            Expr::frac(1, 2) * Expr::atan(t),
            Expr::zero(),
            Expr::zero(),
        )
        .with_sqrt(Expr::sqrt(Expr::int(2)) * Expr::cos(two_t).recip())
    }

    /// Möbius map `(a t + b)/(c t + d)` with `ad − bc = 1`, so that
    /// `√T_t = 1/(ct + d)` on the side where `ct + d > 0`.
    pub fn mobius(a: i64, b: i64, c: i64, d: i64) -> Self {
        assert_eq!(a * d - b * c, 1, "Möbius map must have unit determinant");
        let t = Expr::t();
        let lin = |p: i64, q: i64| Expr::int(p) * &t + Expr::int(q);
        EquivTransform::new(
            lin(a, b) / lin(c, d),
            lin(d, -b) / lin(-c, a),
            Expr::zero(),
            Expr::zero(),
        )
        .with_sqrt(lin(c, d).recip())
    }

    pub fn is_continuous(&self) -> bool {
        !self.reflect_x && !self.reflect_t
    }

    fn t_t(&self) -> Expr {
        self.t_map.diff(Var::T)
    }

    /// `√T_t` as a function of the old time.
    pub fn root(&self) -> Expr {
        self.sqrt_t_t.clone().unwrap_or_else(|| Expr::sqrt(self.t_t()))
    }

    fn eps_expr(&self) -> Expr {
        Expr::int(self.eps as i64)
    }

    fn a(&self) -> Expr {
        let tt = self.t_t();
        tt.diff(Var::T) / tt
    }

    fn b(&self) -> Expr {
        self.x_shift.diff(Var::T) / self.root()
    }

    /// Right-hand side of the potential map, in the old variables.
    pub fn potential_old_vars(&self, v: &Expr) -> Expr {
        let x = Expr::x();
        let a = self.a();
        let b = self.b();
        let eps = self.eps_expr();
        let half = Expr::frac(1, 2);
        let quarter_i = Expr::num(Cq::imag(crate::expr::number::rat(1, 4)));
        let lin = Expr::frac(1, 4) * &a * &x + &half * &eps * &b;
        Expr::sum(vec![
            v.clone(),
            Expr::frac(1, 8) * a.diff(Var::T) * x.pow(2),
            &half * &eps * b.diff(Var::T) * &x,
            quarter_i * &a,
            -lin.pow(2),
            self.psi.diff(Var::T),
        ]) / self.t_t()
    }

    /// Transformed field in the old variables.
    pub fn solution_old_vars(&self, psi: &Expr) -> Expr {
        let x = Expr::x();
        let phase = Expr::frac(1, 8) * self.a() * x.pow(2)
            + Expr::frac(1, 2) * self.eps_expr() * self.b() * &x
            + &self.psi;
        psi / self.root() * Expr::exp(Expr::i() * phase)
    }

    /// Rewrites a function of the old variables in the new ones.
    fn back_substitute(&self, e: &Expr) -> Expr {
        let t_old = self.t_inv.clone();
        let at_old = |f: &Expr| f.subst_var(Var::T, &t_old);
        let x_old = (Expr::x() - at_old(&self.x_shift)) / (self.eps_expr() * at_old(&self.root()));
        let mut b = Bindings::new();
        b.insert(Symbol::Var(Var::T), t_old.clone());
        b.insert(Symbol::Var(Var::X), x_old);
        e.substitute(&b)
    }

    fn reflect(&self, e: &Expr) -> Expr {
        let mut out = e.clone();
        if self.reflect_x {
            out = out.subst_var(Var::X, &-Expr::x());
        }
        if self.reflect_t {
            out = out.subst_var(Var::T, &-Expr::t()).conj();
        }
        out
    }

    fn unreflect(&self, e: &Expr) -> Expr {
        let mut out = e.clone();
        if self.reflect_t {
            out = out.subst_var(Var::T, &-Expr::t()).conj();
        }
        if self.reflect_x {
            out = out.subst_var(Var::X, &-Expr::x());
        }
        out
    }

    /// Mapped potential as a function of the new variables. The result
    /// may leave the exact class (for example through `T⁻¹`); it remains
    /// evaluable.
    pub fn apply_to_potential(&self, v: &Potential) -> Potential {
        let e = self.reflect(&self.back_substitute(&self.potential_old_vars(v.expr())));
        Potential(e.simplify())
    }

    /// Mapped solution as a function of the new variables.
    pub fn apply_to_solution(&self, psi: &Expr) -> Expr {
        self.reflect(&self.back_substitute(&self.solution_old_vars(psi)))
            .simplify()
    }

    /// `target` composed with the transform: the function of the old
    /// variables that the mapped potential must equal.
    pub fn pull_back(&self, target: &Expr) -> Expr {
        let pre = self.unreflect(target);
        let mut b = Bindings::new();
        b.insert(Symbol::Var(Var::T), self.t_map.clone());
        b.insert(
            Symbol::Var(Var::X),
            self.eps_expr() * self.root() * Expr::x() + &self.x_shift,
        );
        pre.substitute(&b)
    }

    /// Classifying residual of `q` against the mapped potential, composed
    /// with the transform. Derivatives of the mapped potential come from
    /// the chain rule on [`Self::potential_old_vars`], so the result stays
    /// in the exact class whenever `v`, `T`, `X` and `Ψ` do. `None` for
    /// transforms with reflections.
    pub fn residual_old_vars(&self, v: &Potential, q: &AlgebraElement) -> Option<Expr> {
        if self.reflect_x || self.reflect_t {
            return None;
        }
        let x = Expr::x();
        let p = self.potential_old_vars(v.expr());
        let s = self.eps_expr() * self.root();
        let v_x = p.diff(Var::X) / &s;
        let v_t = (p.diff(Var::T) - (s.diff(Var::T) * &x + self.x_shift.diff(Var::T)) * &v_x) / self.t_t();
        let at = |f: &Expr| f.subst_var(Var::T, &self.t_map);
        let xi_t = q.xi.diff(Var::T);
        let free = self.pull_back(&crate::symmetry::residual(&Potential(Expr::zero()), q));
        Some(
            at(&q.xi) * v_t
                + (Expr::frac(1, 2) * at(&xi_t) * (&s * &x + &self.x_shift) + at(&q.chi)) * v_x
                + at(&xi_t) * p
                + free,
        )
    }

    /// Decides whether the transform maps `v` to `target`.
    pub fn maps_to(&self, v: &Potential, target: &Potential) -> MappingCheck {
        self.maps_to_with(v, target, &ZeroConfig::default())
    }

    pub fn maps_to_with(&self, v: &Potential, target: &Potential, cfg: &ZeroConfig) -> MappingCheck {
        let d = self.potential_old_vars(v.expr()) - self.pull_back(target.expr());
        let z = is_zero_with(&d, cfg);
        MappingCheck {
            equal: z.zero,
            decision: z.decision,
            difference: (!z.zero).then(|| d.simplify().to_string()),
            evidence: z.evidence,
        }
    }

    /// Checks `T_t > 0` on `domain`, the supplied square root, the
    /// inverse identity and `ε = ±1`.
    pub fn validate(&self, domain: Domain) -> Result<(), EquivError> {
        let mut fails = Vec::new();
        if self.eps != 1 && self.eps != -1 {
            fails.push(format!("eps must be ±1, got {}", self.eps));
        }
        for (name, e) in [("T", &self.t_map), ("X", &self.x_shift), ("Psi", &self.psi), ("T_inv", &self.t_inv)] {
            if e.depends_on(Var::X) {
                fails.push(format!("{name} depends on x"));
            }
        }
        let samples = sample_points(domain, 64);
        // parameters are sampled from the default parameter box
        let params: Vec<_> = [&self.t_map, &self.x_shift, &self.psi, &self.t_inv]
            .into_iter()
            .chain(self.sqrt_t_t.as_ref())
            .flat_map(|e| e.params())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let at = |t: f64| {
            let (lo, hi) = SampleDomain::default().default_param;
            params.iter().enumerate().fold(Point::new(t, 0.0), |p, (j, name)| {
                let u = ((t * 7.31 + j as f64 * 0.377).sin() + 1.0) / 2.0;
                p.with(name, lo + (hi - lo) * u)
            })
        };
        let tt = self.t_t();
        let positive_at = |e: &Expr, label: &str, fails: &mut Vec<String>| {
            if let Some(c) = e.canonical().ok().and_then(|c| c.as_constant()) {
                if !(c.is_real() && c.re > num_rational::BigRational::from_integer(0.into())) {
                    fails.push(format!("{label} = {c} is not positive"));
                }
                return;
            }
            for &t in &samples {
                match eval_f64(e, &at(t)) {
                    Ok(v) if v.re > 0.0 && v.im.abs() <= 1e-12 * v.re => {}
                    Ok(v) => {
                        fails.push(format!("{label} = {v} at t = {t}"));
                        return;
                    }
                    Err(err) => {
                        fails.push(format!("{label} not evaluable at t = {t}: {err}"));
                        return;
                    }
                }
            }
        };
        positive_at(&tt, "T_t", &mut fails);
        if let Some(s) = &self.sqrt_t_t {
            positive_at(s, "sqrt(T_t)", &mut fails);
            let z = is_zero(&(s.pow(2) - &tt));
            if !z.zero {
                fails.push(format!("sqrt_T_t squared differs from T_t ({:?})", z.decision));
            }
        }
        // inverse identity on the image of the domain
        let images: Vec<f64> = samples
            .iter()
            .filter_map(|&t| eval_f64(&self.t_map, &at(t)).ok().map(|v| v.re))
            .collect();
        if images.len() == samples.len() {
            let lo = images.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = images.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let pad = 0.05 * (hi - lo);
            let cfg = ZeroConfig {
                domain: SampleDomain {
                    t: (lo + pad, hi - pad),
                    ..SampleDomain::default()
                },
                ..ZeroConfig::default()
            };
            let z = is_zero_with(&(self.t_map.subst_var(Var::T, &self.t_inv) - Expr::t()), &cfg);
            if !z.zero {
                fails.push(format!(
                    "T(T_inv(t)) != t ({})",
                    z.evidence.unwrap_or_else(|| format!("{:?}", z.decision))
                ));
            }
        } else {
            fails.push("T not evaluable on the domain".into());
        }
        if fails.is_empty() {
            Ok(())
        } else {
            Err(EquivError::Invalid(fails))
        }
    }

    /// Composition `other ∘ self` of two continuous transforms.
    pub fn then(&self, other: &EquivTransform) -> Result<EquivTransform, EquivError> {
        if !self.is_continuous() || !other.is_continuous() {
            return Err(EquivError::Reflections);
        }
        let at_t1 = |e: &Expr| e.subst_var(Var::T, &self.t_map);
        let s2 = at_t1(&other.root());
        let a2 = at_t1(&other.a());
        let b2 = at_t1(&other.b());
        let eps2 = other.eps_expr();
        let x1 = &self.x_shift;
        let t_map = at_t1(&other.t_map).simplify();
        let t_inv = self.t_inv.subst_var(Var::T, &other.t_inv);
        let x_shift = (&eps2 * &s2 * x1 + at_t1(&other.x_shift)).simplify();
        let psi = (&self.psi
            + Expr::frac(1, 8) * &a2 * x1.pow(2)
            + Expr::frac(1, 2) * &eps2 * &b2 * x1
            + at_t1(&other.psi))
        .simplify();
        let root = (s2 * self.root()).simplify();
        Ok(EquivTransform {
            t_map,
            t_inv,
            x_shift,
            psi,
            eps: self.eps * other.eps,
            reflect_x: false,
            reflect_t: false,
            sqrt_t_t: Some(root),
        })
    }

    pub fn to_spec(&self) -> TransformSpec {
        TransformSpec {
            t_map: self.t_map.to_string(),
            t_inv: self.t_inv.to_string(),
            x_shift: self.x_shift.to_string(),
            psi: self.psi.to_string(),
            eps: self.eps,
            reflect_x: self.reflect_x,
            reflect_t: self.reflect_t,
            sqrt_t_t: self.sqrt_t_t.as_ref().map(|e| e.to_string()),
        }
    }

    pub fn from_spec(s: &TransformSpec) -> Result<Self, EquivError> {
        let p = |name: &str, text: &str| {
            crate::expr::parse(text).map_err(|e| EquivError::Format(format!("{name}: {e}")))
        };
        Ok(EquivTransform {
            t_map: p("T", &s.t_map)?,
            t_inv: p("T_inv", &s.t_inv)?,
            x_shift: p("X", &s.x_shift)?,
            psi: p("Psi", &s.psi)?,
            eps: s.eps,
            reflect_x: s.reflect_x,
            reflect_t: s.reflect_t,
            sqrt_t_t: s.sqrt_t_t.as_deref().map(|t| p("sqrt_T_t", t)).transpose()?,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, EquivError> {
        let spec: TransformSpec =
            serde_json::from_str(text).map_err(|e| EquivError::Format(e.to_string()))?;
        EquivTransform::from_spec(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("plain strings serialize")
    }
}

/// Serialized form of a transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    #[serde(rename = "T")]
    pub t_map: String,
    #[serde(rename = "T_inv")]
    pub t_inv: String,
    #[serde(rename = "X", default = "zero_text")]
    pub x_shift: String,
    #[serde(rename = "Psi", default = "zero_text")]
    pub psi: String,
    #[serde(default = "plus_one")]
    pub eps: i8,
    #[serde(default)]
    pub reflect_x: bool,
    #[serde(default)]
    pub reflect_t: bool,
    #[serde(rename = "sqrt_T_t", default, skip_serializing_if = "Option::is_none")]
    pub sqrt_t_t: Option<String>,
}

fn zero_text() -> String {
    "0".into()
}

fn plus_one() -> i8 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MappingCheck {
    pub equal: bool,
    pub decision: Decision,
    pub difference: Option<String>,
    pub evidence: Option<String>,
}

fn sample_points((lo, hi): Domain, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / n as f64)
        .collect()
}

const FLOW: &str = "flow_eps";

/// First-order change of `V` along the equivalence flow generated by `q`:
/// `d/dε|₀` of the mapped potential for `T = t + εξ`, `X = εχ`, `Ψ = ελ`.
pub fn infinitesimal_action(v: &Potential, q: &AlgebraElement) -> Expr {
    let e = Expr::param(FLOW);
    let t = Expr::t();
    let g = EquivTransform {
        t_map: &t + &e * &q.xi,
        // inverse to first order, which is all the derivative sees
        t_inv: &t - &e * &q.xi,
        x_shift: &e * &q.chi,
        psi: &e * &q.lam,
        eps: 1,
        reflect_x: false,
        reflect_t: false,
        sqrt_t_t: Some(Expr::sqrt(Expr::one() + &e * q.xi.diff(Var::T))),
    };
    let mapped = g.back_substitute(&g.potential_old_vars(v.expr()));
    mapped
        .diff_param(FLOW)
        .subst_param(FLOW, &Expr::zero())
        .simplify()
}

/// The closed form the first-order expansion is expected to match:
/// `δV = −R(V, q)`.
pub fn infinitesimal_action_closed_form(v: &Potential, q: &AlgebraElement) -> Expr {
    -crate::symmetry::residual(v, q)
}

/// Coefficient `c` of `i ξ_tt` in `δV` for `V = 0`, measured on
/// `q = D(t²)` (where the other terms vanish).
pub fn dilation_phase_coefficient() -> Option<Cq> {
    let dv = infinitesimal_action(&Potential(Expr::zero()), &AlgebraElement::d(Expr::t().pow(2)));
    let c = (dv / (Expr::i() * Expr::int(2))).canonical().ok()?;
    c.as_constant()
}

/// Named transforms with the `t`-interval on which they are used.
pub fn sample_transforms() -> Vec<(&'static str, EquivTransform, Domain)> {
    vec![
        ("identity", EquivTransform::identity(), DEFAULT_DOMAIN),
        ("galilean boost v=1", EquivTransform::galilean(Expr::one()), DEFAULT_DOMAIN),
        ("scaling k=4", EquivTransform::scaling(&crate::expr::number::rat(4, 1)), DEFAULT_DOMAIN),
        ("inversion T=-1/t", EquivTransform::inversion(), DEFAULT_DOMAIN),
        ("T=-exp(-4t)", EquivTransform::exp_map(), (-1.0, 1.0)),
        ("T=tan(2t)", EquivTransform::tan_map(), (-0.7, 0.7)),
        ("mobius (2t+1)/(t+1)", EquivTransform::mobius(2, 1, 1, 1), DEFAULT_DOMAIN),
        (
            "shift X=t^2, Psi=t",
            EquivTransform::new(Expr::t(), Expr::t(), Expr::t().pow(2), Expr::t()).with_sqrt(Expr::one()),
            DEFAULT_DOMAIN,
        ),
    ]
}
