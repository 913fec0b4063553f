//! Abstract syntax of IMP2 sentences, a parser for the fully parenthesized
//! concrete syntax, and the canonical single-line printer.
//!
//! The grammar has three categories. Sentences:
//!
//! ```text
//! P -> skip | x[N] := A | (while B do P) | (P ; P) | (if B then P else P)
//! B -> true | false | (A = A) | (A < A) | (B and B) | (B or B) | not B
//! A -> readbit | N | x[N] | (A + A) | (A - A) | (A * A)
//! ```
//!
//! `N` is a decimal natural without leading zeros. There is no operator
//! precedence: every composite form carries its own parentheses, so
//! `parse` and `print` are mutually inverse.

use num_bigint::BigUint;
use std::fmt;
use thiserror::Error;

/// An IMP2 sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Sentence {
    Skip,
    /// `x[loc] := expr`
    Assign(BigUint, ArithExpr),
    /// `(while cond do body)`
    While(BoolExpr, Box<Sentence>),
    /// `(first ; second)`
    Seq(Box<Sentence>, Box<Sentence>),
    /// `(if cond then t else e)`
    If(BoolExpr, Box<Sentence>, Box<Sentence>),
}

/// A boolean expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    True,
    False,
    Eq(Box<ArithExpr>, Box<ArithExpr>),
    Lt(Box<ArithExpr>, Box<ArithExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Not(Box<BoolExpr>),
}

/// An arithmetic expression over non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ArithExpr {
    /// Consumes the next bit of the input stream.
    ReadBit,
    Lit(BigUint),
    /// `x[index]`
    Loc(BigUint),
    Add(Box<ArithExpr>, Box<ArithExpr>),
    Sub(Box<ArithExpr>, Box<ArithExpr>),
    Mul(Box<ArithExpr>, Box<ArithExpr>),
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sentence::Skip => f.write_str("skip"),
            Sentence::Assign(loc, e) => write!(f, "x[{loc}] := {e}"),
            Sentence::While(b, p) => write!(f, "(while {b} do {p})"),
            Sentence::Seq(p, q) => write!(f, "({p} ; {q})"),
            Sentence::If(b, p, q) => write!(f, "(if {b} then {p} else {q})"),
        }
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::True => f.write_str("true"),
            BoolExpr::False => f.write_str("false"),
            BoolExpr::Eq(l, r) => write!(f, "({l} = {r})"),
            BoolExpr::Lt(l, r) => write!(f, "({l} < {r})"),
            BoolExpr::And(l, r) => write!(f, "({l} and {r})"),
            BoolExpr::Or(l, r) => write!(f, "({l} or {r})"),
            BoolExpr::Not(e) => write!(f, "not {e}"),
        }
    }
}

impl fmt::Display for ArithExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithExpr::ReadBit => f.write_str("readbit"),
            ArithExpr::Lit(n) => write!(f, "{n}"),
            ArithExpr::Loc(n) => write!(f, "x[{n}]"),
            ArithExpr::Add(l, r) => write!(f, "({l} + {r})"),
            ArithExpr::Sub(l, r) => write!(f, "({l} - {r})"),
            ArithExpr::Mul(l, r) => write!(f, "({l} * {r})"),
        }
    }
}

/// Renders the canonical single-line concrete syntax of a sentence.
pub fn print(s: &Sentence) -> String {
    s.to_string()
}

/// Parse failure, with the byte offset of the offending token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {expected}, found {found}")]
    Unexpected {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("syntax error at byte {offset}: numeral has a leading zero")]
    LeadingZero { offset: usize },
    #[error("syntax error at byte {offset}: unexpected character {ch:?}")]
    BadChar { offset: usize, ch: char },
}

impl ParseError {
    /// Byte offset the error points at.
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Unexpected { offset, .. }
            | ParseError::LeadingZero { offset }
            | ParseError::BadChar { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Skip,
    While,
    Do,
    If,
    Then,
    Else,
    True,
    False,
    And,
    Or,
    Not,
    ReadBit,
    X,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Semi,
    Becomes,
    Eq,
    Lt,
    Plus,
    Minus,
    Star,
    Num(BigUint),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(n) => format!("numeral `{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Skip => "skip",
            Tok::While => "while",
            Tok::Do => "do",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::True => "true",
            Tok::False => "false",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::ReadBit => "readbit",
            Tok::X => "x",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Semi => ";",
            Tok::Becomes => ":=",
            Tok::Eq => "=",
            Tok::Lt => "<",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Num(_) | Tok::Eof => "",
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'[' => {
                toks.push((Tok::LBracket, i));
                i += 1;
            }
            b']' => {
                toks.push((Tok::RBracket, i));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b';' => {
                toks.push((Tok::Semi, i));
                i += 1;
            }
            b'=' => {
                toks.push((Tok::Eq, i));
                i += 1;
            }
            b'<' => {
                toks.push((Tok::Lt, i));
                i += 1;
            }
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b':' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((Tok::Becomes, i));
                    i += 2;
                } else {
                    return Err(ParseError::BadChar {
                        offset: i,
                        ch: ':',
                    });
                }
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &src[start..i];
                if digits.len() > 1 && digits.starts_with('0') {
                    return Err(ParseError::LeadingZero { offset: start });
                }
                let n = digits.parse::<BigUint>().expect("ascii digits");
                toks.push((Tok::Num(n), start));
            }
            b'a'..=b'z' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_lowercase() {
                    i += 1;
                }
                let word = &src[start..i];
                let tok = match word {
                    "skip" => Tok::Skip,
                    "while" => Tok::While,
                    "do" => Tok::Do,
                    "if" => Tok::If,
                    "then" => Tok::Then,
                    "else" => Tok::Else,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    "readbit" => Tok::ReadBit,
                    "x" => Tok::X,
                    _ => {
                        return Err(ParseError::Unexpected {
                            offset: start,
                            expected: "a keyword".to_string(),
                            found: format!("`{word}`"),
                        })
                    }
                };
                toks.push((tok, start));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('\u{fffd}');
                return Err(ParseError::BadChar { offset: i, ch });
            }
        }
    }
    toks.push((Tok::Eof, bytes.len()));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> ParseError {
        ParseError::Unexpected {
            offset: self.offset(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.err(expected))
        }
    }

    fn numeral(&mut self) -> Result<BigUint, ParseError> {
        match self.peek() {
            Tok::Num(_) => {
                if let Tok::Num(n) = self.bump() {
                    Ok(n)
                } else {
                    unreachable!()
                }
            }
            _ => Err(self.err("a numeral")),
        }
    }

    fn location(&mut self) -> Result<BigUint, ParseError> {
        self.expect(Tok::X, "`x`")?;
        self.expect(Tok::LBracket, "`[`")?;
        let n = self.numeral()?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok(n)
    }

    fn sentence(&mut self) -> Result<Sentence, ParseError> {
        match self.peek() {
            Tok::Skip => {
                self.bump();
                Ok(Sentence::Skip)
            }
            Tok::X => {
                let loc = self.location()?;
                self.expect(Tok::Becomes, "`:=`")?;
                let e = self.arith()?;
                Ok(Sentence::Assign(loc, e))
            }
            Tok::LParen => {
                self.bump();
                let s = match self.peek() {
                    Tok::While => {
                        self.bump();
                        let cond = self.boolean()?;
                        self.expect(Tok::Do, "`do`")?;
                        let body = self.sentence()?;
                        Sentence::While(cond, Box::new(body))
                    }
                    Tok::If => {
                        self.bump();
                        let cond = self.boolean()?;
                        self.expect(Tok::Then, "`then`")?;
                        let t = self.sentence()?;
                        self.expect(Tok::Else, "`else`")?;
                        let e = self.sentence()?;
                        Sentence::If(cond, Box::new(t), Box::new(e))
                    }
                    _ => {
                        let p = self.sentence()?;
                        self.expect(Tok::Semi, "`;`")?;
                        let q = self.sentence()?;
                        Sentence::Seq(Box::new(p), Box::new(q))
                    }
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(s)
            }
            _ => Err(self.err("a sentence (`skip`, `x[`, or `(`)")),
        }
    }

    fn boolean(&mut self) -> Result<BoolExpr, ParseError> {
        match self.peek() {
            Tok::True => {
                self.bump();
                Ok(BoolExpr::True)
            }
            Tok::False => {
                self.bump();
                Ok(BoolExpr::False)
            }
            Tok::Not => {
                self.bump();
                let e = self.boolean()?;
                Ok(BoolExpr::Not(Box::new(e)))
            }
            Tok::LParen => {
                self.bump();
                // The parenthesized form is either an arithmetic comparison
                // or a boolean combination; disambiguate by attempting the
                // arithmetic reading first and backtracking on failure.
                let mark = self.pos;
                let arith_attempt = self.arith();
                match arith_attempt {
                    Ok(l) if matches!(self.peek(), Tok::Eq | Tok::Lt) => {
                        let op = self.bump();
                        let r = self.arith()?;
                        self.expect(Tok::RParen, "`)`")?;
                        return Ok(match op {
                            Tok::Eq => BoolExpr::Eq(Box::new(l), Box::new(r)),
                            _ => BoolExpr::Lt(Box::new(l), Box::new(r)),
                        });
                    }
                    _ => {}
                }
                let arith_err = arith_attempt.err();
                self.pos = mark;
                let l = self.boolean().map_err(|e| furthest(e, arith_err.clone()))?;
                let op = match self.peek() {
                    Tok::And | Tok::Or => self.bump(),
                    _ => return Err(furthest(self.err("`and`, `or`, `=`, or `<`"), arith_err)),
                };
                let r = self.boolean()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(match op {
                    Tok::And => BoolExpr::And(Box::new(l), Box::new(r)),
                    _ => BoolExpr::Or(Box::new(l), Box::new(r)),
                })
            }
            _ => Err(self.err("a boolean expression (`true`, `false`, `not`, or `(`)")),
        }
    }

    fn arith(&mut self) -> Result<ArithExpr, ParseError> {
        match self.peek() {
            Tok::ReadBit => {
                self.bump();
                Ok(ArithExpr::ReadBit)
            }
            Tok::Num(_) => Ok(ArithExpr::Lit(self.numeral()?)),
            Tok::X => Ok(ArithExpr::Loc(self.location()?)),
            Tok::LParen => {
                self.bump();
                let l = self.arith()?;
                let op = match self.peek() {
                    Tok::Plus | Tok::Minus | Tok::Star => self.bump(),
                    _ => return Err(self.err("`+`, `-`, or `*`")),
                };
                let r = self.arith()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(match op {
                    Tok::Plus => ArithExpr::Add(Box::new(l), Box::new(r)),
                    Tok::Minus => ArithExpr::Sub(Box::new(l), Box::new(r)),
                    _ => ArithExpr::Mul(Box::new(l), Box::new(r)),
                })
            }
            _ => Err(self.err("an arithmetic expression (`readbit`, a numeral, `x[`, or `(`)")),
        }
    }
}

/// Of two candidate errors, keep the one that got furthest into the input.
fn furthest(a: ParseError, b: Option<ParseError>) -> ParseError {
    match b {
        Some(b) if b.offset() > a.offset() => b,
        _ => a,
    }
}

/// Parses the fully parenthesized concrete syntax of a sentence.
/// Whitespace between tokens is insignificant.
pub fn parse(text: &str) -> Result<Sentence, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let s = p.sentence()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err("end of input"));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(n: u32) -> ArithExpr {
        ArithExpr::Lit(BigUint::from(n))
    }

    fn loc(n: u32) -> ArithExpr {
        ArithExpr::Loc(BigUint::from(n))
    }

    /// The factorial example sentence: stores 5! in x[1].
    pub(crate) fn factorial_sentence() -> Sentence {
        let a1 = Sentence::Assign(BigUint::from(0u32), lit(5));
        let a2 = Sentence::Assign(BigUint::from(1u32), lit(1));
        let body = Sentence::Seq(
            Box::new(Sentence::Assign(
                BigUint::from(1u32),
                ArithExpr::Mul(Box::new(loc(1)), Box::new(loc(0))),
            )),
            Box::new(Sentence::Assign(
                BigUint::from(0u32),
                ArithExpr::Sub(Box::new(loc(0)), Box::new(lit(1))),
            )),
        );
        let w = Sentence::While(
            BoolExpr::Lt(Box::new(lit(0)), Box::new(loc(0))),
            Box::new(body),
        );
        Sentence::Seq(
            Box::new(a1),
            Box::new(Sentence::Seq(Box::new(a2), Box::new(w))),
        )
    }

    const FACTORIAL_TEXT: &str = "(x[0] := 5;\n (x[1] := 1;\n  (while (0 < x[0]) do\n    (x[1] := (x[1] * x[0]);\n     x[0] := (x[0] - 1)))))";

    #[test]
    fn parses_skip() {
        assert_eq!(parse("skip").unwrap(), Sentence::Skip);
    }

    #[test]
    fn parses_factorial_example() {
        assert_eq!(parse(FACTORIAL_TEXT).unwrap(), factorial_sentence());
    }

    #[test]
    fn rejects_leading_zero_numeral() {
        let err = parse("x[01] := 5").unwrap_err();
        assert_eq!(err, ParseError::LeadingZero { offset: 2 });
    }

    #[test]
    fn prints_canonical_forms() {
        assert_eq!(print(&Sentence::Skip), "skip");
        assert_eq!(
            print(&Sentence::Assign(BigUint::from(0u32), lit(5))),
            "x[0] := 5"
        );
        assert_eq!(
            print(&Sentence::While(BoolExpr::True, Box::new(Sentence::Skip))),
            "(while true do skip)"
        );
    }

    #[test]
    fn factorial_roundtrips_through_canonical_form() {
        let s = factorial_sentence();
        assert_eq!(parse(&print(&s)).unwrap(), s);
        assert_eq!(
            print(&s),
            "(x[0] := 5 ; (x[1] := 1 ; (while (0 < x[0]) do \
             (x[1] := (x[1] * x[0]) ; x[0] := (x[0] - 1)))))"
        );
    }

    #[test]
    fn parses_boolean_comparison_forms() {
        let s = parse("(while (readbit = 1) do skip)").unwrap();
        assert_eq!(
            s,
            Sentence::While(
                BoolExpr::Eq(Box::new(ArithExpr::ReadBit), Box::new(lit(1))),
                Box::new(Sentence::Skip)
            )
        );
        let s = parse("(if ((1 + 2) = 3) then skip else skip)").unwrap();
        assert!(matches!(s, Sentence::If(BoolExpr::Eq(_, _), _, _)));
        let s = parse("(if (not true and (true or false)) then skip else skip)").unwrap();
        assert!(matches!(s, Sentence::If(BoolExpr::And(_, _), _, _)));
    }

    #[test]
    fn error_reports_offset_and_expectation() {
        let err = parse("(skip skip)").unwrap_err();
        match err {
            ParseError::Unexpected {
                offset, expected, ..
            } => {
                assert_eq!(offset, 6);
                assert!(expected.contains(';'));
            }
            other => panic!("unexpected error {other:?}"),
        }
        let err = parse("x[3] :=").unwrap_err();
        assert_eq!(err.offset(), 7);
    }

    #[test]
    fn rejects_trailing_input() {
        assert!(parse("skip skip").is_err());
        assert!(parse("").is_err());
        assert!(parse("(skip ; skip) )").is_err());
    }
}
