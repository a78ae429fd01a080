//! Polynomial expression language.
//!
//! Identifiers, integer and `p/q` literals, the imaginary unit `I`, binary
//! `+ - *`, exponentiation by a non-negative integer literal, unary minus
//! and parentheses. There is no division operator; `/` only appears inside
//! rational literals.

use fedosov_core::{BasePolynomial, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("division by non-unit at position {position}")]
    DivisionByNonUnit { position: usize },
    #[error("imaginary unit at position {position} in a rational problem")]
    ComplexInRational { position: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            Self::Syntax { position, .. }
            | Self::UnknownIdentifier { position, .. }
            | Self::DivisionByNonUnit { position }
            | Self::ComplexInRational { position } => *position,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

fn syntax(position: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { position, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let digits = |start: usize| {
        let mut j = start;
        while j < chars.len() && chars[j].is_ascii_digit() {
            j += 1;
        }
        j
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '/' => return Err(syntax(i, "division is only allowed inside rational literals")),
            c if c.is_ascii_digit() => {
                let end = digits(i);
                let num: BigInt = chars[i..end].iter().collect::<String>().parse().expect("digits");
                i = end;
                if i < chars.len() && chars[i] == '/' {
                    let den_end = digits(i + 1);
                    if den_end == i + 1 {
                        return Err(syntax(i, "division is only allowed inside rational literals"));
                    }
                    let den: BigInt = chars[i + 1..den_end].iter().collect::<String>().parse().expect("digits");
                    if den.is_zero() {
                        return Err(ParseError::DivisionByNonUnit { position: i });
                    }
                    i = den_end;
                    out.push((Tok::Num(BigRational::new(num, den)), start));
                } else {
                    out.push((Tok::Num(BigRational::from_integer(num)), start));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                out.push((Tok::Ident(chars[i..j].iter().collect()), start));
                i = j;
                continue;
            }
            other => return Err(syntax(i, format!("unexpected character `{other}`"))),
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    names: &'a [String],
    allow_complex: bool,
}

const UNARY_PREC: u8 = 3;

fn binary_prec(t: &Tok) -> Option<u8> {
    match t {
        Tok::Plus | Tok::Minus => Some(1),
        Tok::Star => Some(2),
        _ => None,
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn dim(&self) -> usize {
        self.names.len()
    }

    fn expr(&mut self, min_prec: u8) -> Result<BasePolynomial, ParseError> {
        let mut lhs = self.prefix()?;
        while let Some(prec) = binary_prec(self.peek()) {
            if prec < min_prec {
                break;
            }
            let (op, _) = self.bump();
            let rhs = self.expr(prec + 1)?;
            lhs = match op {
                Tok::Plus => &lhs + &rhs,
                Tok::Minus => &lhs - &rhs,
                _ => &lhs * &rhs,
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<BasePolynomial, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-self.expr(UNARY_PREC)?)
            }
            Tok::Plus => {
                self.bump();
                self.expr(UNARY_PREC)
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<BasePolynomial, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.at();
        let e = match self.bump().0 {
            Tok::Num(r) if r.is_integer() => {
                u32::try_from(r.to_integer()).map_err(|_| syntax(at, "exponent out of range"))?
            }
            _ => return Err(syntax(at, "exponent must be a non-negative integer literal")),
        };
        if *self.peek() == Tok::Caret {
            return Err(syntax(self.at(), "chained exponents need parentheses"));
        }
        Ok(base.pow(e))
    }

    fn atom(&mut self) -> Result<BasePolynomial, ParseError> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(r) => Ok(BasePolynomial::constant(self.dim(), Scalar::from_rational(r))),
            Tok::Ident(name) if name == "I" => {
                if !self.allow_complex {
                    return Err(ParseError::ComplexInRational { position: at });
                }
                Ok(BasePolynomial::constant(self.dim(), Scalar::i()))
            }
            Tok::Ident(name) => match self.names.iter().position(|n| *n == name) {
                Some(i) => Ok(BasePolynomial::var(self.dim(), i)),
                None => Err(ParseError::UnknownIdentifier { name, position: at }),
            },
            Tok::LParen => {
                let inner = self.expr(1)?;
                match self.bump() {
                    (Tok::RParen, _) => Ok(inner),
                    (_, p) => Err(syntax(p, "expected `)`")),
                }
            }
            Tok::End => Err(syntax(at, "unexpected end of expression")),
            _ => Err(syntax(at, "expected a number, identifier or `(`")),
        }
    }
}

/// Parses `text` into a polynomial in the coordinates `names`.
pub fn parse_expression(text: &str, names: &[String], allow_complex: bool) -> Result<BasePolynomial, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, names, allow_complex };
    let out = p.expr(1)?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.at(), "unexpected trailing input"));
    }
    Ok(out)
}

/// Parses an expression that must reduce to a constant.
pub fn parse_constant(text: &str, allow_complex: bool) -> Result<Scalar, ParseError> {
    parse_expression(text, &[], allow_complex)?.as_constant().ok_or_else(|| syntax(0, "expected a constant"))
}

/// Canonical text form; [`parse_expression`] reads it back unchanged.
pub fn print_polynomial(p: &BasePolynomial, names: &[String]) -> String {
    p.display_with(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["x1".into(), "x2".into()]
    }

    fn p(text: &str) -> BasePolynomial {
        parse_expression(text, &names(), true).unwrap()
    }

    #[test]
    fn precedence() {
        let x1 = BasePolynomial::var(2, 0);
        let x2 = BasePolynomial::var(2, 1);
        assert_eq!(p("x1 + x2*x1"), &x1 + &(&x2 * &x1));
        assert_eq!(p("-x1^2"), -x1.pow(2));
        assert_eq!(p("2*x1 - x2 - x1"), &x1 - &x2);
        assert_eq!(p("(x1 + x2)^2"), &(&x1 * &x1 + &(&x2 * &x2)) + &(&x1 * &x2).scale(&Scalar::from_int(2)));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_expression("x1 + y", &names(), true).unwrap_err();
        assert_eq!(e, ParseError::UnknownIdentifier { name: "y".into(), position: 5 });
        assert!(matches!(parse_expression("x1/x2", &names(), true), Err(ParseError::Syntax { position: 2, .. })));
        assert_eq!(parse_expression("1/0", &names(), true), Err(ParseError::DivisionByNonUnit { position: 1 }));
        assert_eq!(parse_expression("2*I", &names(), false), Err(ParseError::ComplexInRational { position: 2 }));
        assert!(matches!(parse_expression("(x1", &names(), true), Err(ParseError::Syntax { position: 3, .. })));
        assert!(matches!(parse_expression("x1^x2", &names(), true), Err(ParseError::Syntax { position: 3, .. })));
        assert!(matches!(parse_expression("", &names(), true), Err(ParseError::Syntax { position: 0, .. })));
    }
}
