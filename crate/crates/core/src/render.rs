//! Mechanical English rendering of formulas and its inverse.
//!
//! Binary connectives use fixed frames ("if X, then Y", "either X or Y",
//! "both X and Y"); binary operands are parenthesized, negation is a prefix.
//! Given the atom glosses, every rendering parses back to its formula.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::formula::{Atom, Formula};

const NOT: &str = "it is not the case that ";

pub fn render_clause<G: Fn(&Atom) -> String + Copy>(f: &Formula, gloss: G) -> String {
    match f {
        Formula::Atom(a) => gloss(a),
        Formula::Not(x) => format!("{NOT}{}", render_operand(x, gloss)),
        Formula::Implies(a, b) => format!(
            "if {}, then {}",
            render_operand(a, gloss),
            render_operand(b, gloss)
        ),
        Formula::Or(a, b) => format!(
            "either {} or {}",
            render_operand(a, gloss),
            render_operand(b, gloss)
        ),
        Formula::And(a, b) => format!(
            "both {} and {}",
            render_operand(a, gloss),
            render_operand(b, gloss)
        ),
    }
}

fn render_operand<G: Fn(&Atom) -> String + Copy>(f: &Formula, gloss: G) -> String {
    match f {
        Formula::Atom(_) | Formula::Not(_) => render_clause(f, gloss),
        _ => format!("({})", render_clause(f, gloss)),
    }
}

/// Capitalized sentence ending in a period.
pub fn render_sentence<G: Fn(&Atom) -> String + Copy>(f: &Formula, gloss: G) -> String {
    let mut s = capitalize(&render_clause(f, gloss));
    s.push('.');
    s
}

pub fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Case-insensitive comparison key for sentences.
pub fn normalize(text: &str) -> String {
    let t = text.trim();
    let t = t.strip_suffix('.').unwrap_or(t).trim();
    let mut out = String::with_capacity(t.len());
    let mut space = false;
    for c in t.chars() {
        if c.is_whitespace() {
            space = true;
            continue;
        }
        if space && !out.is_empty() {
            out.push(' ');
        }
        space = false;
        out.extend(c.to_lowercase());
    }
    out
}

/// Gloss lookup for parsing rendered text.
#[derive(Debug, Clone, Default)]
pub struct GlossIndex {
    by_text: BTreeMap<String, Atom>,
}

impl GlossIndex {
    pub fn new<'a, I: IntoIterator<Item = (&'a Atom, &'a str)>>(entries: I) -> Self {
        let by_text = entries
            .into_iter()
            .map(|(a, g)| (normalize(g), a.clone()))
            .collect();
        Self { by_text }
    }

    pub fn atom(&self, text: &str) -> Option<&Atom> {
        self.by_text.get(text)
    }

    pub fn len(&self) -> usize {
        self.by_text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_text.is_empty()
    }

    /// Inverse of [`render_sentence`]; `None` if the text is not a rendering.
    pub fn parse(&self, text: &str) -> Option<Formula> {
        self.clause(&normalize(text))
    }

    fn clause(&self, s: &str) -> Option<Formula> {
        if let Some(f) = self.operand(s) {
            return Some(f);
        }
        if let Some(rest) = s.strip_prefix("if ") {
            return self.binary(rest, ", then ", Formula::implies);
        }
        if let Some(rest) = s.strip_prefix("either ") {
            return self.binary(rest, " or ", Formula::or);
        }
        if let Some(rest) = s.strip_prefix("both ") {
            return self.binary(rest, " and ", Formula::and);
        }
        None
    }

    fn operand(&self, s: &str) -> Option<Formula> {
        if let Some(a) = self.atom(s) {
            return Some(Formula::Atom(a.clone()));
        }
        if let Some(rest) = s.strip_prefix(NOT) {
            return self.operand(rest).map(Formula::negate);
        }
        if s.starts_with('(') && matching_paren(s, 0) == Some(s.len() - 1) {
            return self.clause(&s[1..s.len() - 1]);
        }
        None
    }

    fn binary(&self, s: &str, sep: &str, make: fn(Formula, Formula) -> Formula) -> Option<Formula> {
        for at in top_level_matches(s, sep) {
            let (l, r) = (&s[..at], &s[at + sep.len()..]);
            if let (Some(a), Some(b)) = (self.operand(l), self.operand(r)) {
                return Some(make(a, b));
            }
        }
        None
    }
}

fn matching_paren(s: &str, open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices().skip_while(|(i, _)| *i < open) {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn top_level_matches(s: &str, sep: &str) -> Vec<usize> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ if depth == 0 && s[i..].starts_with(sep) => out.push(i),
            _ => {}
        }
    }
    out
}

/// Gloss used when no better one exists: the atom text with underscores
/// spread out, e.g. `person_prop_3(person_1)` becomes "person 1 has property 3".
pub fn mechanical_gloss(atom: &Atom) -> String {
    let pred = atom.predicate();
    let subject = if atom.args().is_empty() {
        String::from("it")
    } else {
        atom.args().join(" and ").replace('_', " ")
    };
    match pred.rsplit_once("_prop_") {
        Some((_, n)) => format!("{subject} has property {n}"),
        None => format!("{} holds for {subject}", pred.replace('_', " ")),
    }
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn vault_glosses() -> Vec<(Atom, &'static str)> {
        [
            ("escort(emma)", "Emma has a security escort"),
            ("enter(emma)", "Emma can enter the Vault"),
            ("badge(emma)", "Emma receives a badge and a key"),
        ]
        .into_iter()
        .map(|(a, g)| match parse_formula(a).unwrap() {
            Formula::Atom(a) => (a, g),
            _ => unreachable!(),
        })
        .collect()
    }

    #[test]
    fn renders_vault_rule() {
        let gl = vault_glosses();
        let lookup = |a: &Atom| gl.iter().find(|(b, _)| b == a).unwrap().1.to_string();
        let f = parse_formula("escort(emma) -> enter(emma)").unwrap();
        assert_eq!(
            render_sentence(&f, lookup),
            "If Emma has a security escort, then Emma can enter the Vault."
        );
        let n = parse_formula("-escort(emma)").unwrap();
        assert!(render_sentence(&n, lookup).starts_with("It is not the case that"));
    }

    #[test]
    fn parse_inverts_render() {
        let gl = vault_glosses();
        let idx = GlossIndex::new(gl.iter().map(|(a, g)| (a, *g)));
        let lookup = |a: &Atom| gl.iter().find(|(b, _)| b == a).unwrap().1.to_string();
        for src in [
            "escort(emma)",
            "-escort(emma) | badge(emma)",
            "(escort(emma) -> badge(emma)) -> -(enter(emma) & -badge(emma))",
            "--badge(emma)",
            "badge(emma) & escort(emma) & enter(emma)",
            "(escort(emma) | enter(emma)) | badge(emma)",
        ] {
            let f = parse_formula(src).unwrap();
            let text = render_sentence(&f, lookup);
            assert_eq!(idx.parse(&text), Some(f), "{text}");
        }
        assert_eq!(idx.parse("Emma dances."), None);
    }

    #[test]
    fn mechanical_names() {
        let a = Atom::new("person_prop_3", ["person_1"]).unwrap();
        assert_eq!(mechanical_gloss(&a), "person 1 has property 3");
    }
}
