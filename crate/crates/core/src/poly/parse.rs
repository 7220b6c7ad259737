use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Exponent, HomogPoly};

const NVARS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownVariable(String),
    /// Degrees of the nonzero terms, ascending.
    Inhomogeneous(Vec<u32>),
    ZeroPolynomial,
}

/// Parse failure with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error at {}: {msg}", self.position),
            ParseErrorKind::UnknownVariable(v) => {
                write!(f, "unknown variable `{v}` at {} (expected x0..x3)", self.position)
            }
            ParseErrorKind::Inhomogeneous(ds) => {
                let list: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
                write!(f, "polynomial is not homogeneous: term degrees {{{}}}", list.join(","))
            }
            ParseErrorKind::ZeroPolynomial => write!(f, "polynomial is identically zero"),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'*' => out.push((start, Tok::Star)),
            b'^' => out.push((start, Tok::Caret)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| ParseError {
                    position: start,
                    kind: ParseErrorKind::Syntax(format!("bad number `{s}`")),
                })?;
                out.push((start, Tok::Num(v)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let name = &text[start..i];
                let idx = name
                    .strip_prefix('x')
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&k| k < NVARS && name.len() == 2);
                match idx {
                    Some(k) => out.push((start, Tok::Var(k))),
                    None => {
                        return Err(ParseError {
                            position: start,
                            kind: ParseErrorKind::UnknownVariable(name.to_string()),
                        })
                    }
                }
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    position: start,
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{ch}`")),
                });
            }
        }
        i += 1;
    }
    Ok(out)
}

type Sparse = BTreeMap<[u32; NVARS], f64>;

fn sparse_add(mut a: Sparse, b: Sparse, sign: f64) -> Sparse {
    for (e, c) in b {
        *a.entry(e).or_insert(0.0) += sign * c;
    }
    a
}

fn sparse_mul(a: &Sparse, b: &Sparse) -> Sparse {
    let mut out = Sparse::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let mut e = [0; NVARS];
            for k in 0..NVARS {
                e[k] = ea[k] + eb[k];
            }
            *out.entry(e).or_insert(0.0) += ca * cb;
        }
    }
    out
}

fn constant(c: f64) -> Sparse {
    let mut s = Sparse::new();
    s.insert([0; NVARS], c);
    s
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.offset(),
            kind: ParseErrorKind::Syntax(msg.into()),
        })
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Sparse, ParseError> {
        let mut acc = self.term()?;
        loop {
            let sign = match self.peek() {
                Some(Tok::Plus) => 1.0,
                Some(Tok::Minus) => -1.0,
                _ => return Ok(acc),
            };
            self.pos += 1;
            let rhs = self.term()?;
            acc = sparse_add(acc, rhs, sign);
        }
    }

    // term := unary ('*'? unary)*
    fn term(&mut self) -> Result<Sparse, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.power()?;
                    acc = sparse_mul(&acc, &rhs);
                }
                Some(Tok::Num(_)) | Some(Tok::Var(_)) | Some(Tok::LParen) => {
                    let rhs = self.power()?;
                    acc = sparse_mul(&acc, &rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Sparse, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                let inner = self.unary()?;
                Ok(inner.into_iter().map(|(e, c)| (e, -c)).collect())
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    // power := atom ('^' integer)?
    fn power(&mut self) -> Result<Sparse, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let k = match self.peek() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && *v >= 0.0 && *v <= 64.0 => *v as u32,
                _ => return self.err("expected a small nonnegative integer exponent"),
            };
            self.pos += 1;
            let mut acc = constant(1.0);
            for _ in 0..k {
                acc = sparse_mul(&acc, &base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Sparse, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(constant(v))
            }
            Some(Tok::Var(k)) => {
                self.pos += 1;
                let mut e = [0; NVARS];
                e[k] = 1;
                let mut s = Sparse::new();
                s.insert(e, 1.0);
                Ok(s)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses a polynomial in `x0..x3` and checks that it is homogeneous.
///
/// Accepts sums of products of numbers, variables, parenthesized
/// subexpressions and integer powers, e.g.
/// `x0^4 + x1^2*x2^2 - 4*x0*x1*x2*x3` or `-(x0^2 + x1^2)^2`.
pub fn parse_poly(text: &str) -> Result<HomogPoly, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
    };
    let sparse = p.expr()?;
    if p.pos != toks.len() {
        return p.err("trailing input");
    }
    let terms: Vec<([u32; NVARS], f64)> = sparse.into_iter().filter(|(_, c)| *c != 0.0).collect();
    let degrees: BTreeSet<u32> = terms.iter().map(|(e, _)| e.iter().sum()).collect();
    match degrees.len() {
        0 => Err(ParseError {
            position: 0,
            kind: ParseErrorKind::ZeroPolynomial,
        }),
        1 => {
            let degree = *degrees.iter().next().unwrap();
            let poly = HomogPoly::from_terms(
                NVARS,
                degree,
                terms.into_iter().map(|(e, c)| (Exponent::new(e.to_vec()), c)),
            )
            .expect("degrees checked");
            Ok(poly)
        }
        _ => Err(ParseError {
            position: 0,
            kind: ParseErrorKind::Inhomogeneous(degrees.into_iter().collect()),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHOI_LAM: &str = "x0^4 + x1^2*x2^2 + x2^2*x3^2 + x3^2*x1^2 - 4*x0*x1*x2*x3";

    #[test]
    fn parses_two_variable_quartic() {
        let f = parse_poly("x0^4 + x1^4").unwrap();
        assert_eq!(f.nvars(), 4);
        assert_eq!(f.degree(), 4);
        assert_eq!(f.coeffs().iter().filter(|c| **c != 0.0).count(), 2);
    }

    #[test]
    fn rejects_inhomogeneous() {
        let err = parse_poly("x0^4 + x1^3").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Inhomogeneous(vec![3, 4]));
        assert!(err.to_string().contains("{3,4}"));
    }

    #[test]
    fn choi_lam_has_five_terms() {
        let f = parse_poly(CHOI_LAM).unwrap();
        assert_eq!(f.coeffs().len(), 35);
        assert_eq!(f.coeffs().iter().filter(|c| **c != 0.0).count(), 5);
    }

    #[test]
    fn unknown_variable_reports_position() {
        let err = parse_poly("x0^4 + y^4").unwrap_err();
        assert_eq!(err.position, 7);
        assert!(matches!(err.kind, ParseErrorKind::UnknownVariable(ref v) if v == "y"));
        assert!(parse_poly("x4^2").is_err());
    }

    #[test]
    fn syntax_errors_have_positions() {
        let err = parse_poly("x0^4 + * x1^4").unwrap_err();
        assert_eq!(err.position, 7);
        let err = parse_poly("(x0^2 + x1^2").unwrap_err();
        assert_eq!(err.position, 12);
        assert!(parse_poly("x0^ 2.5").is_err());
    }

    #[test]
    fn parenthesized_powers_and_negation() {
        let f = parse_poly("-(x0^2+x1^2+x2^2+x3^2)^2").unwrap();
        assert_eq!(f, HomogPoly::sphere_power(4, 2).scale(-1.0));
        let g = parse_poly("2x0 x1 + 1.5e1*x2^2 - x3 x3").unwrap();
        assert_eq!(g.eval(&[1.0, 1.0, 1.0, 1.0]), 16.0);
    }

    #[test]
    fn cancellation_to_zero_is_rejected() {
        assert_eq!(
            parse_poly("x0^2 - x0^2").unwrap_err().kind,
            ParseErrorKind::ZeroPolynomial
        );
    }

    #[test]
    fn display_round_trip() {
        for s in [CHOI_LAM, "0.1*x0^4 - 1e-300*x1*x3^3 + 123456.789*x2^4", "-x3^2"] {
            let f = parse_poly(s).unwrap();
            assert_eq!(parse_poly(&f.to_string()).unwrap(), f);
        }
    }
}
