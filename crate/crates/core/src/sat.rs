//! Tseitin encoding and a small DPLL solver.
//!
//! Every compound subformula gets a definitional gate variable constrained in
//! both directions, so once all atom variables are assigned, unit propagation
//! fixes every gate. Decisions therefore go to atoms first.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::formula::{Atom, Formula};

type Lit = i32;

#[inline]
fn var(l: Lit) -> usize {
    l.unsigned_abs() as usize
}

#[inline]
fn widx(l: Lit) -> usize {
    2 * var(l) + usize::from(l < 0)
}

#[derive(Default)]
pub(crate) struct Encoder<'f> {
    atoms: BTreeMap<&'f Atom, Lit>,
    gates: BTreeMap<&'f Formula, Lit>,
    clauses: Vec<Vec<Lit>>,
    next: Lit,
}

impl<'f> Encoder<'f> {
    pub(crate) fn new() -> Self {
        Self {
            next: 1,
            ..Self::default()
        }
    }

    fn fresh(&mut self) -> Lit {
        let v = self.next;
        self.next += 1;
        v
    }

    fn lit(&mut self, f: &'f Formula) -> Lit {
        match f {
            Formula::Atom(a) => {
                if let Some(&l) = self.atoms.get(a) {
                    return l;
                }
                let l = self.fresh();
                self.atoms.insert(a, l);
                l
            }
            Formula::Not(inner) => -self.lit(inner),
            Formula::Implies(a, b) | Formula::Or(a, b) | Formula::And(a, b) => {
                if let Some(&g) = self.gates.get(f) {
                    return g;
                }
                let la = self.lit(a);
                let lb = self.lit(b);
                let g = self.fresh();
                match f {
                    Formula::Implies(..) => {
                        self.clauses.push(vec![-g, -la, lb]);
                        self.clauses.push(vec![g, la]);
                        self.clauses.push(vec![g, -lb]);
                    }
                    Formula::Or(..) => {
                        self.clauses.push(vec![-g, la, lb]);
                        self.clauses.push(vec![g, -la]);
                        self.clauses.push(vec![g, -lb]);
                    }
                    _ => {
                        self.clauses.push(vec![-g, la]);
                        self.clauses.push(vec![-g, lb]);
                        self.clauses.push(vec![g, -la, -lb]);
                    }
                }
                self.gates.insert(f, g);
                g
            }
        }
    }

    pub(crate) fn assert_true(&mut self, f: &'f Formula) {
        let l = self.lit(f);
        self.clauses.push(vec![l]);
    }

    pub(crate) fn assert_false(&mut self, f: &'f Formula) {
        let l = self.lit(f);
        self.clauses.push(vec![-l]);
    }

    pub(crate) fn solve(self) -> bool {
        let num_vars = (self.next - 1) as usize;
        let mut order: Vec<usize> = self.atoms.values().map(|&l| var(l)).collect();
        order.sort_unstable();
        let mut is_atom = vec![false; num_vars + 1];
        for &v in &order {
            is_atom[v] = true;
        }
        order.extend((1..=num_vars).filter(|&v| !is_atom[v]));
        Dpll::new(num_vars, self.clauses, order).run()
    }
}

struct Dpll {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<i8>,
    trail: Vec<Lit>,
    qhead: usize,
    // (trail length before decision, decision literal, already flipped)
    levels: Vec<(usize, Lit, bool)>,
    order: Vec<usize>,
    units: Vec<Lit>,
}

impl Dpll {
    fn new(num_vars: usize, clauses: Vec<Vec<Lit>>, order: Vec<usize>) -> Self {
        let mut s = Dpll {
            clauses: Vec::with_capacity(clauses.len()),
            watches: vec![Vec::new(); 2 * (num_vars + 1)],
            assign: vec![0; num_vars + 1],
            trail: Vec::new(),
            qhead: 0,
            levels: Vec::new(),
            order,
            units: Vec::new(),
        };
        for mut c in clauses {
            c.sort_unstable();
            c.dedup();
            // tautologies carry no constraint
            if c.iter().any(|l| c.contains(&-l)) {
                continue;
            }
            if c.len() == 1 {
                s.units.push(c[0]);
                continue;
            }
            let idx = s.clauses.len();
            s.watches[widx(c[0])].push(idx);
            s.watches[widx(c[1])].push(idx);
            s.clauses.push(c);
        }
        s
    }

    #[inline]
    fn value(&self, l: Lit) -> i8 {
        let a = self.assign[var(l)];
        if l > 0 {
            a
        } else {
            -a
        }
    }

    fn enqueue(&mut self, l: Lit) -> bool {
        match self.value(l) {
            1 => true,
            -1 => false,
            _ => {
                self.assign[var(l)] = if l > 0 { 1 } else { -1 };
                self.trail.push(l);
                true
            }
        }
    }

    /// Returns false on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = -p;
            let mut ws = core::mem::take(&mut self.watches[widx(false_lit)]);
            let mut i = 0;
            let mut ok = true;
            while i < ws.len() {
                let ci = ws[i];
                let c = &mut self.clauses[ci];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                let first_val = {
                    let a = self.assign[var(first)];
                    if first > 0 {
                        a
                    } else {
                        -a
                    }
                };
                if first_val == 1 {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    let l = c[k];
                    let a = self.assign[var(l)];
                    let val = if l > 0 { a } else { -a };
                    if val != -1 {
                        c.swap(1, k);
                        let nl = c[1];
                        self.watches[widx(nl)].push(ci);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if first_val == -1 {
                    ok = false;
                    break;
                }
                self.enqueue(first);
                i += 1;
            }
            let slot = &mut self.watches[widx(false_lit)];
            ws.append(slot);
            *slot = ws;
            if !ok {
                return false;
            }
        }
        true
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let l = self.trail.pop().unwrap();
            self.assign[var(l)] = 0;
        }
        self.qhead = len;
    }

    fn run(mut self) -> bool {
        let units = core::mem::take(&mut self.units);
        for u in units {
            if !self.enqueue(u) {
                return false;
            }
        }
        let mut cursor = 0usize;
        loop {
            if !self.propagate() {
                // chronological backtracking
                loop {
                    let Some((len, d, flipped)) = self.levels.pop() else {
                        return false;
                    };
                    self.undo_to(len);
                    if !flipped {
                        self.levels.push((len, -d, true));
                        self.enqueue(-d);
                        cursor = 0;
                        break;
                    }
                }
                continue;
            }
            while cursor < self.order.len() && self.assign[self.order[cursor]] != 0 {
                cursor += 1;
            }
            if cursor == self.order.len() {
                return true;
            }
            let d = -(self.order[cursor] as Lit);
            self.levels.push((self.trail.len(), d, false));
            self.enqueue(d);
        }
    }
}

/// Satisfiability of a conjunction of formulas.
pub(crate) fn sat_all<'f, I>(formulas: I) -> bool
where
    I: IntoIterator<Item = &'f Formula>,
{
    let mut enc = Encoder::new();
    for f in formulas {
        enc.assert_true(f);
    }
    enc.solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn sat(src: &[&str]) -> bool {
        let fs: Vec<Formula> = src.iter().map(|s| parse_formula(s).unwrap()).collect();
        sat_all(fs.iter())
    }

    #[test]
    fn basic_cases() {
        assert!(sat(&[]));
        assert!(sat(&["p"]));
        assert!(!sat(&["p", "-p"]));
        assert!(!sat(&["p -> q", "p", "-q"]));
        assert!(sat(&["p | q", "-p"]));
        assert!(!sat(&["p | q", "-p", "-q"]));
        assert!(!sat(&["(p -> q) & (p -> -q) & p"]));
        assert!(sat(&["-(p & q)", "p"]));
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        // p_i_h: pigeon i in hole h
        let mut fs = Vec::new();
        for i in 1..=3 {
            fs.push(std::format!("p{i}1 | p{i}2"));
        }
        for h in 1..=2 {
            for i in 1..=3 {
                for j in (i + 1)..=3 {
                    fs.push(std::format!("-(p{i}{h} & p{j}{h})"));
                }
            }
        }
        let refs: Vec<&str> = fs.iter().map(|s| s.as_str()).collect();
        assert!(!sat(&refs));
    }
}
