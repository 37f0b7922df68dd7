//! Numeric evaluation in double precision and in arbitrary precision.

use std::collections::BTreeMap;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_complex::Complex64;
use num_rational::BigRational;
use thiserror::Error;

use super::number::Cq;
use super::{Expr, Func, Node, Radical, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("parameter {0} has no value")]
    UnboundParameter(String),
    #[error("too close to a pole")]
    Pole,
    #[error("cannot evaluate {0}")]
    Unevaluable(String),
}

/// Evaluation point: values of `t`, `x` and of named parameters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Point {
    pub t: f64,
    pub x: f64,
    pub params: BTreeMap<String, f64>,
}

impl Point {
    pub fn new(t: f64, x: f64) -> Point {
        Point {
            t,
            x,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, v: f64) -> Point {
        self.params.insert(name.to_string(), v);
        self
    }
}

trait Backend {
    type V: Clone;
    fn lit(&mut self, c: &Cq) -> Self::V;
    fn real(&mut self, v: f64) -> Self::V;
    fn radical(&mut self, r: &Radical) -> Self::V;
    fn add(&mut self, a: &Self::V, b: &Self::V) -> Self::V;
    fn mul(&mut self, a: &Self::V, b: &Self::V) -> Self::V;
    fn inv(&mut self, a: &Self::V) -> Option<Self::V>;
    fn call(&mut self, f: Func, a: &Self::V) -> Option<Self::V>;
    fn abs(&self, a: &Self::V) -> f64;
}

fn walk<B: Backend>(
    e: &Expr,
    p: &Point,
    b: &mut B,
    scale: &mut f64,
) -> Result<B::V, EvalError> {
    let v = match e.node() {
        Node::Num(c) => b.lit(c),
        Node::Root(r) => b.radical(r),
        Node::Var(Var::T) => b.real(p.t),
        Node::Var(Var::X) => b.real(p.x),
        Node::Param(name) => match p.params.get(&**name) {
            Some(v) => b.real(*v),
            None => return Err(EvalError::UnboundParameter(name.to_string())),
        },
        Node::Sum(ts) => {
            let mut acc = walk(&ts[0], p, b, scale)?;
            for term in &ts[1..] {
                let v = walk(term, p, b, scale)?;
                acc = b.add(&acc, &v);
            }
            acc
        }
        Node::Prod(fs) => {
            let mut acc = walk(&fs[0], p, b, scale)?;
            for f in &fs[1..] {
                let v = walk(f, p, b, scale)?;
                acc = b.mul(&acc, &v);
            }
            acc
        }
        Node::Pow(base, n) => {
            let mut v = walk(base, p, b, scale)?;
            if *n < 0 {
                v = b.inv(&v).ok_or(EvalError::Pole)?;
            }
            let mut k = n.unsigned_abs();
            let mut acc: Option<B::V> = None;
            while k > 0 {
                if k & 1 == 1 {
                    acc = Some(match acc {
                        Some(a) => b.mul(&a, &v),
                        None => v.clone(),
                    });
                }
                k >>= 1;
                if k > 0 {
                    v = b.mul(&v, &v);
                }
            }
            acc.expect("nonzero exponent")
        }
        Node::Call(f, a) => {
            let v = walk(a, p, b, scale)?;
            b.call(*f, &v).ok_or(EvalError::Pole)?
        }
        Node::Apply(op, _) => return Err(EvalError::Unevaluable(op.name.to_string())),
    };
    let m = b.abs(&v);
    if !m.is_finite() {
        return Err(EvalError::Pole);
    }
    *scale = scale.max(m);
    Ok(v)
}

struct F64;

impl Backend for F64 {
    type V = Complex64;

    fn lit(&mut self, c: &Cq) -> Complex64 {
        c.to_c64()
    }

    fn real(&mut self, v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn radical(&mut self, r: &Radical) -> Complex64 {
        Complex64::new(r.to_f64(), 0.0)
    }

    fn add(&mut self, a: &Complex64, b: &Complex64) -> Complex64 {
        a + b
    }

    fn mul(&mut self, a: &Complex64, b: &Complex64) -> Complex64 {
        a * b
    }

    fn inv(&mut self, a: &Complex64) -> Option<Complex64> {
        (a.norm() > 1e-250).then(|| a.inv())
    }

    fn call(&mut self, f: Func, a: &Complex64) -> Option<Complex64> {
        Some(match f {
            Func::Exp => a.exp(),
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Log => {
                if a.norm() < 1e-250 {
                    return None;
                }
                a.ln()
            }
            Func::Atan => {
                if a.im == 0.0 {
                    Complex64::new(a.re.atan(), 0.0)
                } else {
                    a.atan()
                }
            }
            Func::Sqrt => a.sqrt(),
        })
    }

    fn abs(&self, a: &Complex64) -> f64 {
        a.norm()
    }
}

/// Double-precision evaluation.
pub fn eval_f64(e: &Expr, p: &Point) -> Result<Complex64, EvalError> {
    let mut scale = 0.0;
    walk(e, p, &mut F64, &mut scale)
}

/// Complex number with arbitrary-precision parts.
#[derive(Debug, Clone)]
pub struct HpComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

fn big_to_f64(v: &BigFloat) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    if v.is_nan() {
        return f64::NAN;
    }
    if v.is_inf() {
        return if v.is_positive() { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    let (words, _, sign, exponent, _) = v.as_raw_parts().expect("finite value");
    let top = *words.last().expect("mantissa") as f64 / 2f64.powi(64);
    let mag = top * 2f64.powi(exponent.clamp(-1100, 1100));
    if sign.is_negative() {
        -mag
    } else {
        mag
    }
}

impl HpComplex {
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(big_to_f64(&self.re), big_to_f64(&self.im))
    }

    pub fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

struct Hp {
    p: usize,
    cc: Consts,
}

impl Hp {
    fn zero(&self) -> BigFloat {
        BigFloat::from_i64(0, self.p)
    }

    fn int(&mut self, n: &num_bigint::BigInt) -> BigFloat {
        BigFloat::parse(&n.to_string(), Radix::Dec, self.p, RM, &mut self.cc)
    }

    fn rat(&mut self, r: &BigRational) -> BigFloat {
        let n = self.int(r.numer());
        let d = self.int(r.denom());
        n.div(&d, self.p, RM)
    }

    fn cmul(&self, a: &HpComplex, b: &HpComplex) -> HpComplex {
        let p = self.p;
        HpComplex {
            re: a.re.mul(&b.re, p, RM).sub(&a.im.mul(&b.im, p, RM), p, RM),
            im: a.re.mul(&b.im, p, RM).add(&a.im.mul(&b.re, p, RM), p, RM),
        }
    }

    fn norm_sqr(&self, a: &HpComplex) -> BigFloat {
        let p = self.p;
        a.re.mul(&a.re, p, RM).add(&a.im.mul(&a.im, p, RM), p, RM)
    }

    fn atan2(&mut self, y: &BigFloat, x: &BigFloat) -> BigFloat {
        let p = self.p;
        let pi = self.cc.pi(p, RM);
        if x.is_zero() {
            let half = pi.div(&BigFloat::from_i64(2, p), p, RM);
            return if y.is_negative() { half.neg() } else { half };
        }
        let base = y.div(x, p, RM).atan(p, RM, &mut self.cc);
        if x.is_positive() {
            base
        } else if y.is_negative() {
            base.sub(&pi, p, RM)
        } else {
            base.add(&pi, p, RM)
        }
    }

    fn ln(&mut self, a: &HpComplex) -> HpComplex {
        let p = self.p;
        let r2 = self.norm_sqr(a);
        let re = r2
            .ln(p, RM, &mut self.cc)
            .div(&BigFloat::from_i64(2, p), p, RM);
        HpComplex {
            re,
            im: self.atan2(&a.im, &a.re),
        }
    }

    fn sqrt(&mut self, a: &HpComplex) -> HpComplex {
        let p = self.p;
        let two = BigFloat::from_i64(2, p);
        let r = self.norm_sqr(a).sqrt(p, RM);
        let re = r.add(&a.re, p, RM).div(&two, p, RM).abs().sqrt(p, RM);
        let mut im = r.sub(&a.re, p, RM).div(&two, p, RM).abs().sqrt(p, RM);
        if a.im.is_negative() {
            im = im.neg();
        }
        HpComplex { re, im }
    }
}

impl Backend for Hp {
    type V = HpComplex;

    fn lit(&mut self, c: &Cq) -> HpComplex {
        HpComplex {
            re: self.rat(&c.re),
            im: self.rat(&c.im),
        }
    }

    fn real(&mut self, v: f64) -> HpComplex {
        HpComplex {
            re: BigFloat::from_f64(v, self.p),
            im: self.zero(),
        }
    }

    fn radical(&mut self, r: &Radical) -> HpComplex {
        let p = self.p;
        let b = self.int(r.base());
        let re = if r.root() == 2 {
            b.sqrt(p, RM)
        } else {
            let n = BigFloat::from_u32(r.root(), p);
            b.ln(p, RM, &mut self.cc).div(&n, p, RM).exp(p, RM, &mut self.cc)
        };
        HpComplex { re, im: self.zero() }
    }

    fn add(&mut self, a: &HpComplex, b: &HpComplex) -> HpComplex {
        HpComplex {
            re: a.re.add(&b.re, self.p, RM),
            im: a.im.add(&b.im, self.p, RM),
        }
    }

    fn mul(&mut self, a: &HpComplex, b: &HpComplex) -> HpComplex {
        self.cmul(a, b)
    }

    fn inv(&mut self, a: &HpComplex) -> Option<HpComplex> {
        let p = self.p;
        let n = self.norm_sqr(a);
        if n.is_zero() || n.exponent().is_none_or(|e| e < -1200) {
            return None;
        }
        Some(HpComplex {
            re: a.re.div(&n, p, RM),
            im: a.im.neg().div(&n, p, RM),
        })
    }

    fn call(&mut self, f: Func, a: &HpComplex) -> Option<HpComplex> {
        let p = self.p;
        let cc = &mut self.cc;
        Some(match f {
            Func::Exp => {
                let m = a.re.exp(p, RM, cc);
                HpComplex {
                    re: m.mul(&a.im.cos(p, RM, cc), p, RM),
                    im: m.mul(&a.im.sin(p, RM, cc), p, RM),
                }
            }
            Func::Sin => HpComplex {
                re: a.re.sin(p, RM, cc).mul(&a.im.cosh(p, RM, cc), p, RM),
                im: a.re.cos(p, RM, cc).mul(&a.im.sinh(p, RM, cc), p, RM),
            },
            Func::Cos => HpComplex {
                re: a.re.cos(p, RM, cc).mul(&a.im.cosh(p, RM, cc), p, RM),
                im: a.re.sin(p, RM, cc).mul(&a.im.sinh(p, RM, cc), p, RM).neg(),
            },
            Func::Log => {
                if self.norm_sqr(a).is_zero() {
                    return None;
                }
                self.ln(a)
            }
            Func::Atan => {
                if a.im.is_zero() {
                    HpComplex {
                        re: a.re.atan(p, RM, cc),
                        im: self.zero(),
                    }
                } else {
                    // atan z = (i/2) (ln(1 - iz) - ln(1 + iz))
                    let one = BigFloat::from_i64(1, p);
                    let minus = HpComplex {
                        re: one.add(&a.im, p, RM),
                        im: a.re.neg(),
                    };
                    let plus = HpComplex {
                        re: one.sub(&a.im, p, RM),
                        im: a.re.clone(),
                    };
                    let l1 = self.ln(&minus);
                    let l2 = self.ln(&plus);
                    let d = HpComplex {
                        re: l1.re.sub(&l2.re, p, RM),
                        im: l1.im.sub(&l2.im, p, RM),
                    };
                    let two = BigFloat::from_i64(2, p);
                    HpComplex {
                        re: d.im.neg().div(&two, p, RM),
                        im: d.re.div(&two, p, RM),
                    }
                }
            }
            Func::Sqrt => self.sqrt(a),
        })
    }

    fn abs(&self, a: &HpComplex) -> f64 {
        a.abs_f64()
    }
}

/// Arbitrary-precision evaluation with `bits` of mantissa.
pub fn eval(e: &Expr, p: &Point, bits: usize) -> Result<HpComplex, EvalError> {
    eval_tracked(e, p, bits).map(|(v, _)| v)
}

/// Value together with the largest magnitude met in any subexpression.
pub(crate) fn eval_tracked(e: &Expr, p: &Point, bits: usize) -> Result<(HpComplex, f64), EvalError> {
    let mut hp = Hp {
        p: bits,
        cc: Consts::new().expect("constants cache"),
    };
    let mut scale = 0.0;
    let v = walk(e, p, &mut hp, &mut scale)?;
    Ok((v, scale))
}
