//! Exact scalars: complex rationals and positive real radicals.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Complex number with exact rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cq {
    pub re: BigRational,
    pub im: BigRational,
}

impl Cq {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Cq { re, im }
    }

    pub fn zero() -> Self {
        Cq::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Cq::from_int(1)
    }

    pub fn i() -> Self {
        Cq::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Cq::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Cq::real(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn real(r: BigRational) -> Self {
        Cq::new(r, BigRational::zero())
    }

    pub fn imag(r: BigRational) -> Self {
        Cq::new(BigRational::zero(), r)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Cq {
        Cq::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Cq> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Cq::new(&self.re / &n, -&self.im / &n))
    }

    pub fn powi(&self, n: i64) -> Option<Cq> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Cq::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            sq = &sq * &sq;
            e >>= 1;
        }
        Some(acc)
    }

    pub fn scale(&self, r: &BigRational) -> Cq {
        Cq::new(&self.re * r, &self.im * r)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    /// Lexicographic order on (re, im); used only for deterministic keys.
    pub fn lex_cmp(&self, other: &Cq) -> Ordering {
        self.re.cmp(&other.re).then_with(|| self.im.cmp(&other.im))
    }
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Formats a rational as `n` or `n/d`.
pub fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rat(&self.re)),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-&self.im).is_one() {
                    write!(f, "-i")
                } else {
                    write!(f, "{}*i", fmt_rat(&self.im))
                }
            }
            (false, false) => {
                let im = if self.im.is_one() {
                    "+i".to_string()
                } else if (-&self.im).is_one() {
                    "-i".to_string()
                } else if self.im.is_negative() {
                    format!("-{}*i", fmt_rat(&-&self.im))
                } else {
                    format!("+{}*i", fmt_rat(&self.im))
                };
                write!(f, "{}{}", fmt_rat(&self.re), im)
            }
        }
    }
}

macro_rules! cq_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a> $tr<&'a Cq> for &'a Cq {
            type Output = Cq;
            fn $m(self, rhs: &'a Cq) -> Cq {
                let f: fn(&Cq, &Cq) -> Cq = $body;
                f(self, rhs)
            }
        }
        impl $tr<Cq> for Cq {
            type Output = Cq;
            fn $m(self, rhs: Cq) -> Cq {
                (&self).$m(&rhs)
            }
        }
    };
}

cq_binop!(Add, add, |a, b| Cq::new(&a.re + &b.re, &a.im + &b.im));
cq_binop!(Sub, sub, |a, b| Cq::new(&a.re - &b.re, &a.im - &b.im));
cq_binop!(Mul, mul, |a, b| Cq::new(
    &a.re * &b.re - &a.im * &b.im,
    &a.re * &b.im + &a.im * &b.re
));
cq_binop!(Div, div, |a, b| a * &b.inv().expect("division by zero constant"));

impl Neg for Cq {
    type Output = Cq;
    fn neg(self) -> Cq {
        Cq::new(-self.re, -self.im)
    }
}

impl Neg for &Cq {
    type Output = Cq;
    fn neg(self) -> Cq {
        Cq::new(-&self.re, -&self.im)
    }
}

/// Positive real number `base^(1/root)` with `base` free of `root`-th powers
/// and `root` minimal. Construct through [`Radical::normalize`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Radical {
    base: BigInt,
    root: u32,
}

impl Radical {
    pub fn base(&self) -> &BigInt {
        &self.base
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    /// Splits `b^(1/n)` for positive rational `b` into `coef * radical`.
    /// Returns `None` if `b <= 0` or `n == 0`.
    pub fn normalize(b: &BigRational, n: u32) -> Option<(BigRational, Option<Radical>)> {
        if !b.is_positive() || n == 0 {
            return None;
        }
        if n == 1 {
            return Some((b.clone(), None));
        }
        // b^(1/n) = (p q^(n-1))^(1/n) / q
        let p = b.numer().clone();
        let q = b.denom().clone();
        let m = &p * q.pow(n - 1);
        let (outside, inside, root) = extract_powers(m.magnitude().clone(), n);
        let coef = BigRational::new(BigInt::from(outside), q);
        if inside.is_one() {
            Some((coef, None))
        } else {
            Some((
                coef,
                Some(Radical {
                    base: BigInt::from(inside),
                    root,
                }),
            ))
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.base.to_f64().unwrap_or(f64::INFINITY).powf(1.0 / self.root as f64)
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^(1/{})", self.base, self.root)
    }
}

/// Writes `m^(1/n) = outside * inside^(1/root)` with `inside` reduced.
fn extract_powers(m: BigUint, n: u32) -> (BigUint, BigUint, u32) {
    let mut factors: Vec<(BigUint, u32)> = Vec::new();
    let mut rest = m;
    let mut p = BigUint::from(2u32);
    let limit = BigUint::from(100_000u32);
    while &p * &p <= rest && p < limit {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        if e > 0 {
            factors.push((p.clone(), e));
        }
        p += 1u32;
    }
    if !rest.is_one() {
        // cofactor may still be a perfect power when trial division stopped early
        let mut placed = false;
        for k in (2..=n).rev() {
            if n % k == 0 {
                let r = rest.nth_root(k);
                if r.pow(k) == rest {
                    factors.push((r, k));
                    placed = true;
                    break;
                }
            }
        }
        if !placed {
            factors.push((rest, 1));
        }
    }
    let mut outside = BigUint::one();
    let mut reduced: Vec<(BigUint, u32)> = Vec::new();
    for (p, e) in factors {
        outside *= p.pow(e / n);
        if e % n != 0 {
            reduced.push((p, e % n));
        }
    }
    let mut g = n;
    for (_, e) in &reduced {
        g = g.gcd(e);
    }
    let mut inside = BigUint::one();
    for (p, e) in &reduced {
        inside *= p.pow(e / g);
    }
    (outside, inside, n / g)
}

/// Exact real number `coef * radical`, used for emitted classification
/// parameters that may involve square or cube roots.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactReal {
    pub coef: BigRational,
    pub radical: Option<Radical>,
}

impl ExactReal {
    pub fn rational(r: BigRational) -> Self {
        ExactReal { coef: r, radical: None }
    }

    /// `r^(p/n)` for positive rational `r`.
    pub fn rational_power(r: &BigRational, p: u32, n: u32) -> Option<Self> {
        let (coef, radical) = Radical::normalize(&r.pow(p as i32), n)?;
        Some(ExactReal { coef, radical })
    }

    pub fn mul_rational(&self, r: &BigRational) -> Self {
        ExactReal {
            coef: &self.coef * r,
            radical: self.radical.clone(),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.radical.is_none() {
            Some(&self.coef)
        } else {
            None
        }
    }

    pub fn signum(&self) -> i32 {
        if self.coef.is_zero() {
            0
        } else if self.coef.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Exact comparison with a rational.
    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        let Some(rad) = &self.radical else {
            return self.coef.cmp(r);
        };
        let s = self.signum();
        let rs = if r.is_zero() { 0 } else if r.is_positive() { 1 } else { -1 };
        if s != rs || s == 0 {
            return s.cmp(&rs);
        }
        // same nonzero sign: compare n-th powers of magnitudes
        let n = rad.root as i32;
        let lhs = self.coef.abs().pow(n) * BigRational::from_integer(rad.base.clone());
        let rhs = r.abs().pow(n);
        let mag = lhs.cmp(&rhs);
        if s > 0 {
            mag
        } else {
            mag.reverse()
        }
    }

    pub fn to_f64(&self) -> f64 {
        let c = rat_to_f64(&self.coef);
        match &self.radical {
            Some(r) => c * r.to_f64(),
            None => c,
        }
    }
}

impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.radical {
            None => write!(f, "{}", fmt_rat(&self.coef)),
            Some(r) if self.coef.is_one() => write!(f, "{r}"),
            Some(r) => write!(f, "{}*{}", fmt_paren_rat(&self.coef), r),
        }
    }
}

fn fmt_paren_rat(r: &BigRational) -> String {
    if r.is_integer() && !r.is_negative() {
        fmt_rat(r)
    } else {
        format!("({})", fmt_rat(r))
    }
}

/// Parses a decimal literal (optionally with exponent) into an exact rational.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let (mant, exp) = match text.find(['e', 'E']) {
        Some(k) => (&text[..k], text[k + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(k) => (&mant[..k], &mant[k + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let n = BigInt::parse_bytes(if digits.is_empty() { b"0" } else { digits.as_bytes() }, 10)?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(n * ten.pow(scale as u32))
    } else {
        BigRational::new(n, ten.pow((-scale) as u32))
    })
}
