//! Formula syntax: AST, parser and printer.
//!
//! Concrete grammar (ASCII):
//!
//! ```text
//! F ::= "true" | "false" | IDENT | "!" F | F "&" F | F "|" F
//!     | "N+" F | "N-" F
//!     | "reach+" F "[" F "]" | "reach-" F "[" F "]"
//!     | "rho+" F "[" F "]" | "rho-" F "[" F "]"
//!     | "surr" F "[" F "]" | "(" F ")"
//! ```
//!
//! `!` binds tighter than `&`, which binds tighter than `|`; the modalities
//! bind tighter than `&` and take a unary operand (parenthesize anything
//! larger). Identifiers are `[A-Za-z_][A-Za-z0-9_]*`; `N`, `reach` and `rho`
//! act as operators only when directly followed by `+` or `-`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    NearFwd(Box<Formula>),
    NearBwd(Box<Formula>),
    ReachFwd(Box<Formula>, Box<Formula>),
    ReachBwd(Box<Formula>, Box<Formula>),
    RhoFwd(Box<Formula>, Box<Formula>),
    RhoBwd(Box<Formula>, Box<Formula>),
    Surround(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(name.to_string())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        debug_assert!(!fs.is_empty());
        Formula::And(fs)
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        debug_assert!(!fs.is_empty());
        Formula::Or(fs)
    }

    pub fn near_fwd(f: Formula) -> Formula {
        Formula::NearFwd(Box::new(f))
    }

    pub fn near_bwd(f: Formula) -> Formula {
        Formula::NearBwd(Box::new(f))
    }

    pub fn reach_fwd(goal: Formula, via: Formula) -> Formula {
        Formula::ReachFwd(Box::new(goal), Box::new(via))
    }

    pub fn reach_bwd(goal: Formula, via: Formula) -> Formula {
        Formula::ReachBwd(Box::new(goal), Box::new(via))
    }

    /// Nesting depth of modal operators, used by the formula enumerator.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().map(Formula::modal_depth).max().unwrap_or(0)
            }
            Formula::NearFwd(f) | Formula::NearBwd(f) => 1 + f.modal_depth(),
            Formula::ReachFwd(a, b)
            | Formula::ReachBwd(a, b)
            | Formula::RhoFwd(a, b)
            | Formula::RhoBwd(a, b)
            | Formula::Surround(a, b) => 1 + a.modal_depth().max(b.modal_depth()),
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    True,
    False,
    Ident(String),
    Not,
    And,
    Or,
    LParen,
    RParen,
    LBracket,
    RBracket,
    NearFwd,
    NearBwd,
    ReachFwd,
    ReachBwd,
    RhoFwd,
    RhoBwd,
    Surr,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::True => "true",
            Tok::False => "false",
            Tok::Ident(name) => return write!(f, "`{name}`"),
            Tok::Not => "!",
            Tok::And => "&",
            Tok::Or => "|",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::NearFwd => "N+",
            Tok::NearBwd => "N-",
            Tok::ReachFwd => "reach+",
            Tok::ReachBwd => "reach-",
            Tok::RhoFwd => "rho+",
            Tok::RhoBwd => "rho-",
            Tok::Surr => "surr",
            Tok::Eof => "end of input",
        };
        write!(f, "`{s}`")
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn next_token(&mut self) -> Result<(Tok, usize, usize)> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.bump();
        }
        let (line, col) = (self.line, self.col);
        if self.pos >= self.src.len() {
            return Ok((Tok::Eof, line, col));
        }
        let c = self.bump();
        let tok = match c {
            b'!' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            c if c == b'_' || c.is_ascii_alphabetic() => {
                let start = self.pos - 1;
                while self.pos < self.src.len()
                    && (self.src[self.pos] == b'_' || self.src[self.pos].is_ascii_alphanumeric())
                {
                    self.bump();
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let sign = self.src.get(self.pos).copied();
                match (word, sign) {
                    ("N", Some(b'+')) => {
                        self.bump();
                        Tok::NearFwd
                    }
                    ("N", Some(b'-')) => {
                        self.bump();
                        Tok::NearBwd
                    }
                    ("reach", Some(b'+')) => {
                        self.bump();
                        Tok::ReachFwd
                    }
                    ("reach", Some(b'-')) => {
                        self.bump();
                        Tok::ReachBwd
                    }
                    ("rho", Some(b'+')) => {
                        self.bump();
                        Tok::RhoFwd
                    }
                    ("rho", Some(b'-')) => {
                        self.bump();
                        Tok::RhoBwd
                    }
                    ("true", _) => Tok::True,
                    ("false", _) => Tok::False,
                    ("surr", _) => Tok::Surr,
                    _ => Tok::Ident(word.to_string()),
                }
            }
            other => {
                return Err(Error::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok((tok, line, col))
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        let mut lexer = Lexer::new(src);
        let (tok, line, col) = lexer.next_token()?;
        Ok(Parser { lexer, tok, line, col })
    }

    fn advance(&mut self) -> Result<()> {
        let (tok, line, col) = self.lexer.next_token()?;
        self.tok = tok;
        self.line = line;
        self.col = col;
        Ok(())
    }

    fn error(&self, msg: String) -> Error {
        Error::Syntax { line: self.line, col: self.col, msg }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.tok == tok {
            self.advance()
        } else {
            Err(self.error(format!("expected {tok}, found {}", self.tok)))
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let first = self.conjunction()?;
        if self.tok != Tok::Or {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.tok == Tok::Or {
            self.advance()?;
            items.push(self.conjunction()?);
        }
        Ok(Formula::Or(items))
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let first = self.unary()?;
        if self.tok != Tok::And {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.tok == Tok::And {
            self.advance()?;
            items.push(self.unary()?);
        }
        Ok(Formula::And(items))
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.tok.clone() {
            Tok::Not => {
                self.advance()?;
                Ok(Formula::not(self.unary()?))
            }
            Tok::NearFwd => {
                self.advance()?;
                Ok(Formula::near_fwd(self.unary()?))
            }
            Tok::NearBwd => {
                self.advance()?;
                Ok(Formula::near_bwd(self.unary()?))
            }
            Tok::ReachFwd => self.bracketed(|a, b| Formula::ReachFwd(a, b)),
            Tok::ReachBwd => self.bracketed(|a, b| Formula::ReachBwd(a, b)),
            Tok::RhoFwd => self.bracketed(|a, b| Formula::RhoFwd(a, b)),
            Tok::RhoBwd => self.bracketed(|a, b| Formula::RhoBwd(a, b)),
            Tok::Surr => self.bracketed(|a, b| Formula::Surround(a, b)),
            Tok::True => {
                self.advance()?;
                Ok(Formula::True)
            }
            Tok::False => {
                self.advance()?;
                Ok(Formula::False)
            }
            Tok::Ident(name) => {
                self.advance()?;
                Ok(Formula::Atom(name))
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => Err(self.error(format!("expected a formula, found {other}"))),
        }
    }

    fn bracketed(
        &mut self,
        build: fn(Box<Formula>, Box<Formula>) -> Formula,
    ) -> Result<Formula> {
        self.advance()?;
        let goal = self.unary()?;
        self.expect(Tok::LBracket)?;
        let via = self.formula()?;
        self.expect(Tok::RBracket)?;
        Ok(build(Box::new(goal), Box::new(via)))
    }
}

/// Parses one formula; the whole input must be consumed.
pub fn parse(src: &str) -> Result<Formula> {
    let mut parser = Parser::new(src)?;
    let formula = parser.formula()?;
    if parser.tok != Tok::Eof {
        return Err(parser.error(format!("unexpected {} after formula", parser.tok)));
    }
    Ok(formula)
}

/// Parses a formula file: one formula per line, `#` starts a comment.
pub fn parse_file(src: &str) -> Result<Vec<Formula>> {
    let mut formulas = Vec::new();
    for (lineno, raw) in src.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let f = parse(line).map_err(|e| match e {
            Error::Syntax { col, msg, .. } => Error::Syntax { line: lineno + 1, col, msg },
            other => other,
        })?;
        formulas.push(f);
    }
    Ok(formulas)
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

#[derive(PartialOrd, Ord, PartialEq, Eq, Clone, Copy)]
enum Prec {
    Or,
    And,
    Unary,
}

fn prec(f: &Formula) -> Prec {
    match f {
        Formula::Or(_) => Prec::Or,
        Formula::And(_) => Prec::And,
        _ => Prec::Unary,
    }
}

fn print_at(f: &Formula, min: Prec, out: &mut String) {
    let mine = prec(f);
    if mine < min {
        out.push('(');
        print_at(f, Prec::Or, out);
        out.push(')');
        return;
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom(name) => out.push_str(name),
        Formula::Not(inner) => {
            out.push('!');
            print_at(inner, Prec::Unary, out);
        }
        Formula::And(items) => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(" & ");
                }
                print_at(item, Prec::Unary, out);
            }
        }
        Formula::Or(items) => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                print_at(item, Prec::And, out);
            }
        }
        Formula::NearFwd(inner) => {
            out.push_str("N+ ");
            print_at(inner, Prec::Unary, out);
        }
        Formula::NearBwd(inner) => {
            out.push_str("N- ");
            print_at(inner, Prec::Unary, out);
        }
        Formula::ReachFwd(a, b) => print_bracketed("reach+", a, b, out),
        Formula::ReachBwd(a, b) => print_bracketed("reach-", a, b, out),
        Formula::RhoFwd(a, b) => print_bracketed("rho+", a, b, out),
        Formula::RhoBwd(a, b) => print_bracketed("rho-", a, b, out),
        Formula::Surround(a, b) => print_bracketed("surr", a, b, out),
    }
}

fn print_bracketed(op: &str, a: &Formula, b: &Formula, out: &mut String) {
    out.push_str(op);
    out.push(' ');
    print_at(a, Prec::Unary, out);
    out.push_str(" [");
    print_at(b, Prec::Or, out);
    out.push(']');
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        print_at(self, Prec::Or, &mut out);
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_near() {
        assert_eq!(parse("N+ blue").unwrap(), Formula::near_fwd(Formula::atom("blue")));
    }

    #[test]
    fn parses_reach() {
        assert_eq!(
            parse("reach+ red [blue]").unwrap(),
            Formula::reach_fwd(Formula::atom("red"), Formula::atom("blue"))
        );
    }

    #[test]
    fn precedence_not_and_or() {
        assert_eq!(
            parse("!(a & b) | c").unwrap(),
            Formula::or(vec![
                Formula::not(Formula::and(vec![Formula::atom("a"), Formula::atom("b")])),
                Formula::atom("c"),
            ])
        );
    }

    #[test]
    fn modalities_bind_tighter_than_and() {
        assert_eq!(
            parse("N+ a & b").unwrap(),
            Formula::and(vec![Formula::near_fwd(Formula::atom("a")), Formula::atom("b")])
        );
    }

    #[test]
    fn reports_position() {
        match parse("a &\n& b").unwrap_err() {
            Error::Syntax { line, col, .. } => {
                assert_eq!((line, col), (2, 1));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ident_can_start_like_an_operator() {
        assert_eq!(parse("reach").unwrap(), Formula::atom("reach"));
        assert_eq!(parse("No").unwrap(), Formula::atom("No"));
    }

    #[test]
    fn file_parsing_skips_comments() {
        let fs = parse_file("# heading\nN+ a # trailing\n\n!b\n").unwrap();
        assert_eq!(fs.len(), 2);
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::True),
            Just(Formula::False),
            "[a-z][a-z0-9_]{0,4}"
                .prop_filter("reserved word", |s| !matches!(s.as_str(), "true" | "false" | "surr"))
                .prop_map(Formula::Atom),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::And),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::Or),
                inner.clone().prop_map(Formula::near_fwd),
                inner.clone().prop_map(Formula::near_bwd),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Formula::ReachFwd(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Formula::RhoBwd(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Formula::Surround(Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(f in arb_formula()) {
            let printed = f.to_string();
            let reparsed = parse(&printed).unwrap();
            prop_assert_eq!(reparsed, f);
        }
    }
}
