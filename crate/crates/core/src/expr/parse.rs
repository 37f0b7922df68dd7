//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := ["+"|"-"] term { ("+"|"-") term }
//! term   := unary { ("*"|"/") unary }
//! unary  := ("+"|"-") unary | factor
//! factor := base [ "^" exponent ]
//! exponent := ["-"] integer | "(" ["-"] integer [ "/" integer ] ")"
//! base   := number | "i" | "t" | "x" | param | "(" expr ")"
//!         | func "(" expr ")" | Name "(" expr { "," expr } ")"
//! func   := exp | sin | cos | tan | sech | log | atan | sqrt
//! ```
//!
//! Decimal literals are converted to exact rationals. Identifiers starting
//! with an uppercase letter and followed by `(` denote uninterpreted
//! functions; other identifiers followed by `(` must be a known function.
//! A fractional exponent is accepted only on a positive rational literal.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use super::number::parse_decimal;
use super::{Expr, RESERVED};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    UnknownFunction(String),
    BadNumber(String),
    BadExponent(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {pos}: {kind:?}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let mut j = k + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    k = j;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            out.push((start, Tok::Num(chars[start..k].iter().collect())));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            out.push((start, Tok::Ident(chars[start..k].iter().collect())));
        } else if "+-*/^(),".contains(c) {
            out.push((k, Tok::Sym(c)));
            k += 1;
        } else {
            return Err(ParseError {
                pos: k,
                kind: ParseErrorKind::UnexpectedChar(c),
            });
        }
    }
    out.push((chars.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    k: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.k].1
    }

    fn pos(&self) -> usize {
        self.toks[self.k].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.k].1.clone();
        if self.k + 1 < self.toks.len() {
            self.k += 1;
        }
        t
    }

    fn err<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos(),
            kind,
        })
    }

    fn unexpected<T>(&self) -> Result<T, ParseError> {
        match self.peek() {
            Tok::End => self.err(ParseErrorKind::UnexpectedEnd),
            t => self.err(ParseErrorKind::UnexpectedToken(format!("{t:?}"))),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.unexpected()
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = Vec::new();
        let first = if self.eat('-') {
            -self.term()?
        } else {
            self.eat('+');
            self.term()?
        };
        terms.push(first);
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.eat('/') {
                acc = acc / self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.factor()
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        let neg = self.eat('-');
        let pos = self.pos();
        match self.bump() {
            Tok::Num(s) if s.chars().all(|c| c.is_ascii_digit()) => {
                let n: BigInt = s.parse().map_err(|_| ParseError {
                    pos,
                    kind: ParseErrorKind::BadExponent(s.clone()),
                })?;
                Ok(if neg { -n } else { n })
            }
            t => Err(ParseError {
                pos,
                kind: ParseErrorKind::BadExponent(format!("{t:?}")),
            }),
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let pos = self.pos();
        let bad = |what: String| ParseError {
            pos,
            kind: ParseErrorKind::BadExponent(what),
        };
        let (num, den) = if self.eat('(') {
            let n = self.integer()?;
            let d = if self.eat('/') { self.integer()? } else { BigInt::from(1) };
            self.expect(')')?;
            (n, d)
        } else {
            (self.integer()?, BigInt::from(1))
        };
        if den.is_zero() {
            return Err(bad("zero denominator".into()));
        }
        let q = BigRational::new(num, den);
        let small = |n: &BigInt| -> Result<i64, ParseError> {
            i64::try_from(n.clone()).map_err(|_| bad(n.to_string()))
        };
        if q.is_integer() {
            return Ok(base.pow(small(q.numer())?));
        }
        // fractional exponents only on positive rational literals
        let radicand = match base.as_num() {
            Some(c) if c.is_real() && c.re.is_positive() => c.re.clone(),
            _ => return Err(bad(format!("fractional power of non-literal {base}"))),
        };
        let p = small(q.numer())?;
        let n = u32::try_from(small(q.denom())?).map_err(|_| bad(q.to_string()))?;
        let root = Expr::root_of(&radicand, n).ok_or_else(|| bad(q.to_string()))?;
        Ok(root.pow(p))
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                parse_decimal(&s).map(Expr::rational).ok_or(ParseError {
                    pos,
                    kind: ParseErrorKind::BadNumber(s),
                })
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::Sym('(') {
                    return self.call(&name, pos);
                }
                match name.as_str() {
                    "t" => Ok(Expr::t()),
                    "x" => Ok(Expr::x()),
                    "i" => Ok(Expr::i()),
                    n if RESERVED.contains(&n) => Err(ParseError {
                        pos,
                        kind: ParseErrorKind::UnexpectedToken(n.to_string()),
                    }),
                    n => Ok(Expr::param(n)),
                }
            }
            _ => self.unexpected(),
        }
    }

    fn call(&mut self, name: &str, pos: usize) -> Result<Expr, ParseError> {
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;
        let opaque = name.chars().next().is_some_and(|c| c.is_ascii_uppercase());
        if opaque {
            return Ok(Expr::apply(name, args));
        }
        if args.len() != 1 {
            return Err(ParseError {
                pos,
                kind: ParseErrorKind::UnknownFunction(format!("{name}/{}", args.len())),
            });
        }
        let a = args.pop().unwrap();
        Ok(match name {
            "exp" => Expr::exp(a),
            "sin" => Expr::sin(a),
            "cos" => Expr::cos(a),
            "tan" => Expr::tan(a),
            "sech" => Expr::sech(a),
            "log" => Expr::log(a),
            "atan" => Expr::atan(a),
            "sqrt" => Expr::sqrt(a),
            _ => {
                return Err(ParseError {
                    pos,
                    kind: ParseErrorKind::UnknownFunction(name.to_string()),
                })
            }
        })
    }
}

/// Parses an expression in `t`, `x`, `i` and named parameters.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        k: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.unexpected();
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;

    #[test]
    fn table_potentials_parse() {
        let e = parse("(alpha+i*beta)*x^-2").unwrap();
        assert_eq!(e.params().len(), 2);
        assert!(parse("0").unwrap().is_zero_literal());
        let c2 = parse("(i/2)*(t+nu)/(t^2+1)").unwrap();
        assert!(c2.depends_on(crate::expr::Var::T));
        assert!(!c2.depends_on(crate::expr::Var::X));
    }

    #[test]
    fn errors_carry_position() {
        let e = parse("x + * 2").unwrap_err();
        assert_eq!(e.pos, 4);
        let e = parse("foo(x)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::UnknownFunction(_)));
        let e = parse("1.2.3").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::BadNumber(_)));
        assert!(matches!(parse("(x").unwrap_err().kind, ParseErrorKind::UnexpectedEnd));
        assert!(matches!(parse("x $ 2").unwrap_err().kind, ParseErrorKind::UnexpectedChar('$')));
        assert!(parse("x^(1/2)").is_err());
    }

    #[test]
    fn decimals_and_radicals() {
        assert_eq!(parse("0.25").unwrap(), Expr::frac(1, 4));
        let r = parse("8^(1/2)").unwrap();
        assert_eq!(r.to_string(), "2*2^(1/2)");
        assert!(matches!(parse("2^(1/2)").unwrap().node(), Node::Root(_)));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse("-x^2").unwrap();
        let v = crate::expr::eval_f64(&e, &crate::expr::Point::new(0.0, 3.0)).unwrap();
        assert!((v.re + 9.0).abs() < 1e-12);
    }

    #[test]
    fn opaque_functions() {
        let e = parse("V(t,x) + W(t)").unwrap();
        assert!(e.has_opaque());
        assert!(parse("ln(x)").is_err());
    }
}
