//! Seeded random generators for property tests and benchmarks.
//!
//! All generators draw from a caller-owned [`Rng`], normally
//! [`rng`]`(seed)`, so every failure is reproducible from its seed.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Cq, Expr};
use crate::liealg::AlgebraElement;

pub type Rng = ChaCha8Rng;

/// Seed used by the property suites unless a test says otherwise.
pub const PROPERTY_SEED: u64 = 0x5EED_0001;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_rational(r: &mut Rng) -> Expr {
    let n = r.gen_range(-5i64..=5);
    let d = r.gen_range(1i64..=3);
    if n == 0 {
        Expr::one()
    } else {
        Expr::frac(n, d)
    }
}

fn small_complex(r: &mut Rng) -> Expr {
    let re = r.gen_range(-4i64..=4);
    let im = r.gen_range(-4i64..=4);
    if re == 0 && im == 0 {
        return Expr::one();
    }
    Expr::num(Cq::from_int(re) + Cq::i() * Cq::frac(im, r.gen_range(1i64..=2)))
}

fn poly_t(r: &mut Rng, max_deg: u32) -> Expr {
    let deg = r.gen_range(0..=max_deg);
    let mut terms = Vec::new();
    for k in 0..=deg {
        if k == deg || r.gen_bool(0.6) {
            terms.push(small_rational(r) * Expr::t().pow(k as i64));
        }
    }
    Expr::sum(terms)
}

/// Real in-class function of `t`: polynomial, exponential or
/// trigonometric factor times a polynomial of degree at most `max_deg`.
pub fn t_function(r: &mut Rng, max_deg: u32) -> Expr {
    let pieces = r.gen_range(1..=2);
    let mut terms = Vec::new();
    for _ in 0..pieces {
        let p = poly_t(r, max_deg);
        let w = Expr::int(r.gen_range(1i64..=3)) * Expr::t();
        let term = match r.gen_range(0..4) {
            0 => p,
            1 => p * Expr::exp(if r.gen_bool(0.5) { w } else { -w }),
            2 => p * Expr::sin(w),
            _ => p * Expr::cos(w),
        };
        terms.push(term);
    }
    Expr::sum(terms)
}

/// Element with real channels of polynomial/exponential/trig type; each
/// channel is zero with probability 1/4.
pub fn element(r: &mut Rng) -> AlgebraElement {
    let channel = |r: &mut Rng| {
        if r.gen_bool(0.25) {
            Expr::zero()
        } else {
            t_function(r, 3)
        }
    };
    let xi = channel(r);
    let chi = channel(r);
    let lam = channel(r);
    AlgebraElement::new(xi, chi, lam).expect("generated channels depend on t only")
}

fn x_factor(r: &mut Rng) -> Expr {
    match r.gen_range(0..5) {
        0 => Expr::x().pow(r.gen_range(1i64..=3)),
        1 => Expr::exp(Expr::int(r.gen_range(-2i64..=2)) * Expr::x()),
        2 => Expr::sin(Expr::int(r.gen_range(1i64..=2)) * Expr::x()),
        3 => (Expr::int(1) + Expr::x().pow(2)).recip(),
        _ => Expr::x().pow(-r.gen_range(1i64..=2)),
    }
}

fn t_factor(r: &mut Rng) -> Expr {
    match r.gen_range(0..5) {
        0 => Expr::t().pow(r.gen_range(1i64..=3)),
        1 => Expr::exp(Expr::int(r.gen_range(-2i64..=2)) * Expr::t()),
        2 => Expr::cos(Expr::int(r.gen_range(1i64..=2)) * Expr::t()),
        3 => (Expr::int(2) + Expr::t()).recip(),
        _ => Expr::t().pow(-1),
    }
}

/// Complex in-class potential depending on both `t` and `x`.
pub fn potential(r: &mut Rng) -> Expr {
    let n = r.gen_range(1..=3);
    let mut terms = Vec::new();
    for _ in 0..n {
        let mut f = vec![small_complex(r)];
        if r.gen_bool(0.8) {
            f.push(t_factor(r));
        }
        if r.gen_bool(0.8) {
            f.push(x_factor(r));
        }
        terms.push(Expr::prod(f));
    }
    // make sure both variables appear
    terms.push(small_complex(r) * t_factor(r) * x_factor(r));
    Expr::sum(terms)
}

/// Complex in-class potential depending on `t` only.
pub fn potential_t(r: &mut Rng) -> Expr {
    let n = r.gen_range(1..=3);
    Expr::sum((0..n).map(|_| small_complex(r) * t_factor(r)).collect())
}

/// Complex in-class potential depending on `x` only.
pub fn potential_x(r: &mut Rng) -> Expr {
    let n = r.gen_range(1..=3);
    Expr::sum((0..n).map(|_| small_complex(r) * x_factor(r)).collect())
}

/// Random in-class expression tree in `t`, `x` and the parameter `nu`,
/// free of poles on the default sampling box.
pub fn expression(r: &mut Rng, depth: u32) -> Expr {
    if depth == 0 || r.gen_bool(0.25) {
        return match r.gen_range(0..5) {
            0 => Expr::t(),
            1 => Expr::x(),
            2 => Expr::param("nu"),
            3 => small_complex(r),
            _ => small_rational(r),
        };
    }
    match r.gen_range(0..7) {
        0 | 1 => expression(r, depth - 1) + expression(r, depth - 1),
        2 | 3 => expression(r, depth - 1) * expression(r, depth - 1),
        4 => {
            let base = expression(r, depth - 1);
            base.pow(r.gen_range(2i64..=3))
        }
        5 => {
            let a = Expr::int(r.gen_range(-2i64..=2));
            let b = Expr::int(r.gen_range(-2i64..=2));
            let arg = a * Expr::t() + b * Expr::x();
            match r.gen_range(0..3) {
                0 => Expr::exp(arg),
                1 => Expr::sin(arg),
                _ => Expr::cos(arg),
            }
        }
        _ => {
            let k = Expr::int(r.gen_range(1i64..=3));
            (k + Expr::t().pow(2) + Expr::x().pow(2)).recip() * expression(r, depth - 1)
        }
    }
}
