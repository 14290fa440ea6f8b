//! Ground formulas and their Prover9-subset surface syntax.
//!
//! The grammar accepted by [`parse_formula`]:
//!
//! ```text
//! formula := disj ( "->" formula )?          right associative
//! disj    := conj ( "|" conj )*              left associative
//! conj    := unary ( "&" unary )*            left associative
//! unary   := "-" unary | primary
//! primary := ident ( "(" ident ( "," ident )* ")" )? | "(" formula ")"
//! ident   := [a-z][a-z0-9_]*
//! ```
//!
//! An optional trailing `.` is accepted. Whitespace is insignificant.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Returns true when `s` matches `[a-z][a-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut bytes = s.bytes();
    match bytes.next() {
        Some(b'a'..=b'z') => {}
        _ => return false,
    }
    bytes.all(|b| matches!(b, b'a'..=b'z' | b'0'..=b'9' | b'_'))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AtomError {
    #[error("invalid predicate name `{0}`")]
    Predicate(String),
    #[error("invalid constant `{0}`")]
    Constant(String),
}

/// A ground atom such as `pin_ok(emma)` or the bare proposition `p`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Atom {
    predicate: String,
    args: Vec<String>,
}

impl Atom {
    pub fn new<P, I, A>(predicate: P, args: I) -> Result<Self, AtomError>
    where
        P: Into<String>,
        I: IntoIterator<Item = A>,
        A: Into<String>,
    {
        let predicate = predicate.into();
        if !is_identifier(&predicate) {
            return Err(AtomError::Predicate(predicate));
        }
        let args = args.into_iter().map(Into::into).collect::<Vec<String>>();
        if let Some(bad) = args.iter().find(|a| !is_identifier(a)) {
            return Err(AtomError::Constant(bad.clone()));
        }
        Ok(Self { predicate, args })
    }

    /// A zero-arity atom.
    ///
    /// # Panics
    /// If `name` is not a valid identifier.
    pub fn prop(name: &str) -> Self {
        Self::new(name, core::iter::empty::<String>()).expect("valid propositional atom name")
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                f.write_str(a)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl From<Atom> for String {
    fn from(a: Atom) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Atom {
    type Error = ParseError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        match parse_formula(&s)? {
            Formula::Atom(a) => Ok(a),
            _ => Err(ParseError::Syntax {
                offset: 0,
                expected: Vec::from(["atom"]),
                found: Some(s),
            }),
        }
    }
}

/// A ground formula tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
}

impl Formula {
    /// Propositional atom shorthand; panics on an invalid name.
    pub fn prop(name: &str) -> Self {
        Formula::Atom(Atom::prop(name))
    }

    pub fn negate(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn implies(self, rhs: Formula) -> Self {
        Formula::Implies(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn and(self, rhs: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(rhs))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom(_))
    }

    /// Atom or negated atom.
    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(inner) => inner.is_atom(),
            _ => false,
        }
    }

    /// Number of connectives and atoms in the tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Not(a) => 1 + a.size(),
            Formula::Implies(a, b) | Formula::Or(a, b) | Formula::And(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(a) => a.collect_atoms(out),
            Formula::Implies(a, b) | Formula::Or(a, b) | Formula::And(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Rebuilds the tree with every atom passed through `f`.
    pub fn map_atoms<F: FnMut(&Atom) -> Atom>(&self, f: &mut F) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(f(a)),
            Formula::Not(a) => Formula::Not(Box::new(a.map_atoms(f))),
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f)))
            }
            Formula::Or(a, b) => Formula::Or(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Formula::And(a, b) => Formula::And(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
        }
    }

    /// Evaluates under a valuation of atoms.
    pub fn eval<F: Fn(&Atom) -> bool + Copy>(&self, v: F) -> bool {
        match self {
            Formula::Atom(a) => v(a),
            Formula::Not(a) => !a.eval(v),
            Formula::Implies(a, b) => !a.eval(v) || b.eval(v),
            Formula::Or(a, b) => a.eval(v) || b.eval(v),
            Formula::And(a, b) => a.eval(v) && b.eval(v),
        }
    }

    /// The connective skeleton with atoms erased, e.g. `(_ -> _) | -_`.
    pub fn shape(&self) -> String {
        self.map_atoms(&mut |_| Atom::prop("x"))
            .to_string()
            .replace('x', "_")
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Not(_) => 4,
            Formula::Atom(_) => 5,
        }
    }
}

/// Exact leaf-atom set of `f`.
pub fn atoms_of(f: &Formula) -> BTreeSet<Atom> {
    f.atoms()
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => {
                f.write_str("-")?;
                write_child(f, a, 4)
            }
            Formula::Implies(a, b) => {
                write_child(f, a, 2)?;
                f.write_str(" -> ")?;
                write_child(f, b, 1)
            }
            Formula::Or(a, b) => {
                write_child(f, a, 2)?;
                f.write_str(" | ")?;
                write_child(f, b, 3)
            }
            Formula::And(a, b) => {
                write_child(f, a, 3)?;
                f.write_str(" & ")?;
                write_child(f, b, 4)
            }
        }
    }
}

/// Canonical text with minimal parentheses.
pub fn format_formula(f: &Formula) -> String {
    f.to_string()
}

impl From<Formula> for String {
    fn from(f: Formula) -> String {
        f.to_string()
    }
}

impl TryFrom<String> for Formula {
    type Error = ParseError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        parse_formula(&s)
    }
}

impl core::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty formula")]
    Empty,
    #[error("syntax error at byte {offset}: expected one of {expected:?}, found {found:?}")]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: Option<String>,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Empty => 0,
            ParseError::Syntax { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Ident(&'a str),
    Minus,
    Arrow,
    Bar,
    Amp,
    LParen,
    RParen,
    Comma,
    Dot,
}

impl Tok<'_> {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => (*s).to_string(),
            Tok::Minus => "-".into(),
            Tok::Arrow => "->".into(),
            Tok::Bar => "|".into(),
            Tok::Amp => "&".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
            Tok::Dot => ".".into(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok<'_>)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let tok = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((i, Tok::Arrow));
                i += 2;
                continue;
            }
            b'-' => Tok::Minus,
            b'|' => Tok::Bar,
            b'&' => Tok::Amp,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'.' => Tok::Dot,
            b'a'..=b'z' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i], b'a'..=b'z' | b'0'..=b'9' | b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(&src[start..i])));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: i,
                    expected: Vec::from(["identifier", "-", "("]),
                    found: Some(ch.to_string()),
                });
            }
        };
        out.push((i, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().map(Tok::describe),
        }
    }

    fn eat(&mut self, t: &Tok<'_>) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            Ok(lhs.implies(rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while self.eat(&Tok::Bar) {
            acc = acc.or(self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::Amp) {
            acc = acc.and(self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(self.unary()?.negate());
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.formula()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.error(&[")", "->", "|", "&"]));
                }
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) {
                    loop {
                        match self.peek().cloned() {
                            Some(Tok::Ident(c)) => {
                                self.pos += 1;
                                args.push(c.to_string());
                            }
                            _ => return Err(self.error(&["constant"])),
                        }
                        if self.eat(&Tok::Comma) {
                            continue;
                        }
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        return Err(self.error(&[",", ")"]));
                    }
                }
                // identifiers were validated by the tokenizer
                Ok(Formula::Atom(Atom {
                    predicate: name.to_string(),
                    args,
                }))
            }
            _ => Err(self.error(&["identifier", "-", "("])),
        }
    }
}

/// Parses a single formula in the Prover9 subset.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let f = p.formula()?;
    p.eat(&Tok::Dot);
    if p.pos != p.toks.len() {
        return Err(p.error(&["->", "|", "&", ".", "end of input"]));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p(s: &str) -> Formula {
        Formula::prop(s)
    }

    #[test]
    fn parses_negated_disjunction() {
        assert_eq!(
            parse_formula("-q | -s").unwrap(),
            p("q").negate().or(p("s").negate())
        );
    }

    #[test]
    fn parses_single_atom() {
        assert_eq!(parse_formula("p").unwrap(), p("p"));
        assert_eq!(parse_formula("  p .").unwrap(), p("p"));
    }

    #[test]
    fn implication_is_right_associative() {
        assert_eq!(
            parse_formula("a -> b -> c").unwrap(),
            p("a").implies(p("b").implies(p("c")))
        );
    }

    #[test]
    fn precedence_table() {
        let f = parse_formula("-a & b | c -> d").unwrap();
        assert_eq!(f, p("a").negate().and(p("b")).or(p("c")).implies(p("d")));
        let g = parse_formula("a | b | c").unwrap();
        assert_eq!(g, p("a").or(p("b")).or(p("c")));
    }

    #[test]
    fn formats_predicates_with_constants() {
        let pin = Formula::Atom(Atom::new("pin_ok", ["emma"]).unwrap());
        let badge = Formula::Atom(Atom::new("badge", ["emma"]).unwrap());
        assert_eq!(
            format_formula(&pin.implies(badge)),
            "pin_ok(emma) -> badge(emma)"
        );
        assert_eq!(format_formula(&p("p")), "p");
    }

    #[test]
    fn formats_minimal_parentheses() {
        let f = p("a").implies(p("b")).implies(p("c"));
        assert_eq!(f.to_string(), "(a -> b) -> c");
        let g = p("a").or(p("b").or(p("c")));
        assert_eq!(g.to_string(), "a | (b | c)");
        let h = p("a").and(p("b")).negate().negate();
        assert_eq!(h.to_string(), "--(a & b)");
        assert_eq!(parse_formula(&h.to_string()).unwrap(), h);
    }

    #[test]
    fn atoms_of_collects_leaves() {
        let f = parse_formula("-q | -s").unwrap();
        let got: Vec<_> = atoms_of(&f).into_iter().collect();
        assert_eq!(got, vec![Atom::prop("q"), Atom::prop("s")]);
        let g = parse_formula("pin_ok(emma)").unwrap();
        assert_eq!(atoms_of(&g).len(), 1);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(parse_formula("   "), Err(ParseError::Empty));
        let e = parse_formula("p & ").unwrap_err();
        assert_eq!(e.offset(), 4);
        let e = parse_formula("p q").unwrap_err();
        assert_eq!(e.offset(), 2);
        let e = parse_formula("Pin").unwrap_err();
        assert_eq!(e.offset(), 0);
        let e = parse_formula("f(a,)").unwrap_err();
        assert_eq!(e.offset(), 4);
        assert!(parse_formula("(p").is_err());
        assert!(parse_formula("p..").is_err());
        assert!(parse_formula("p <-> q").is_err());
    }

    #[test]
    fn atom_validation() {
        assert!(Atom::new("Pin", ["emma"]).is_err());
        assert!(Atom::new("pin", ["Emma"]).is_err());
        assert!(Atom::new("pin_2", ["e_1"]).is_ok());
    }
}
