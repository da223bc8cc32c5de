//! Reader for a subset of the Hanoi Omega-Automata format.
//!
//! Supported: `HOA:`, `States:`, a single `Start:`, `AP:`, and an
//! `Acceptance:` condition that is a disjunction of conjunctions of `Fin`/`Inf`
//! atoms with at most one `Inf` per disjunct (Rabin). Acceptance sets are
//! state-based (`State: 3 {0 1}`); every edge carries an explicit guard built
//! from `t`, `f`, proposition indices, `!`, `&`, `|` and parentheses. Other
//! header items are skipped.
//!
//! ```text
//! HOA: v1
//! States: 2
//! Start: 0
//! AP: 1 "goal"
//! Acceptance: 1 Inf(0)
//! --BODY--
//! State: 0
//! [!0] 0
//! [0] 1
//! State: 1 {0}
//! [t] 1
//! --END--
//! ```

use std::collections::{BTreeMap, BTreeSet};

use crate::automata::rabin::{RabinAutomaton, RabinPair, MAX_APS};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default)]
pub struct HoaOptions {
    /// Route missing transitions to a fresh rejecting sink instead of failing.
    pub auto_complete: bool,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Key(String),
    Ident(String),
    Int(usize),
    Str(String),
    Punct(char),
    Marker(String),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let advance = |i: &mut usize, line: &mut usize, col: &mut usize| {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                advance(&mut i, &mut line, &mut col);
            }
            if i >= chars.len() {
                return Err(syntax(l0, c0, "unterminated comment"));
            }
            advance(&mut i, &mut line, &mut col);
            advance(&mut i, &mut line, &mut col);
        } else if c == '"' {
            advance(&mut i, &mut line, &mut col);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(syntax(l0, c0, "unterminated string")),
                    Some('"') => break,
                    Some('\\') => {
                        advance(&mut i, &mut line, &mut col);
                        if let Some(&e) = chars.get(i) {
                            s.push(e);
                            advance(&mut i, &mut line, &mut col);
                        }
                    }
                    Some(&ch) => {
                        s.push(ch);
                        advance(&mut i, &mut line, &mut col);
                    }
                }
            }
            advance(&mut i, &mut line, &mut col);
            out.push(Spanned { tok: Tok::Str(s), line: l0, column: c0 });
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            let mut s = String::new();
            while i < chars.len() && !chars[i].is_whitespace() {
                s.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            out.push(Spanned { tok: Tok::Marker(s), line: l0, column: c0 });
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            let n = s
                .parse()
                .map_err(|_| syntax(l0, c0, format!("integer {s} is too large")))?;
            out.push(Spanned { tok: Tok::Int(n), line: l0, column: c0 });
        } else if c.is_alphabetic() || c == '_' || c == '@' {
            let mut s = String::new();
            while i < chars.len()
                && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '-' | '@' | '.'))
            {
                s.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            if chars.get(i) == Some(&':') {
                advance(&mut i, &mut line, &mut col);
                out.push(Spanned { tok: Tok::Key(s), line: l0, column: c0 });
            } else {
                out.push(Spanned { tok: Tok::Ident(s), line: l0, column: c0 });
            }
        } else if "[]{}()&|!".contains(c) {
            advance(&mut i, &mut line, &mut col);
            out.push(Spanned { tok: Tok::Punct(c), line: l0, column: c0 });
        } else {
            return Err(syntax(l0, c0, format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

/// Boolean guard over proposition indices.
#[derive(Clone, Debug)]
enum Guard {
    Const(bool),
    Ap(usize),
    Not(Box<Guard>),
    And(Box<Guard>, Box<Guard>),
    Or(Box<Guard>, Box<Guard>),
}

impl Guard {
    fn eval(&self, val: usize) -> bool {
        match self {
            Guard::Const(b) => *b,
            Guard::Ap(i) => val & (1 << i) != 0,
            Guard::Not(g) => !g.eval(val),
            Guard::And(a, b) => a.eval(val) && b.eval(val),
            Guard::Or(a, b) => a.eval(val) || b.eval(val),
        }
    }
}

/// Acceptance formula over set indices.
#[derive(Clone, Debug)]
enum Acc {
    Const(bool),
    Fin(usize),
    Inf(usize),
    And(Vec<Acc>),
    Or(Vec<Acc>),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or(self.eof, |s| (s.line, s.column))
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (l, c) = self.here();
        syntax(l, c, msg)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect_punct(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(Tok::Punct(p)) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected '{c}'"))),
        }
    }

    fn int(&mut self) -> Result<usize> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err("expected an integer")),
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(p)) if *p == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn guard_or(&mut self) -> Result<Guard> {
        let mut g = self.guard_and()?;
        while self.eat_punct('|') {
            g = Guard::Or(Box::new(g), Box::new(self.guard_and()?));
        }
        Ok(g)
    }

    fn guard_and(&mut self) -> Result<Guard> {
        let mut g = self.guard_atom()?;
        while self.eat_punct('&') {
            g = Guard::And(Box::new(g), Box::new(self.guard_atom()?));
        }
        Ok(g)
    }

    fn guard_atom(&mut self) -> Result<Guard> {
        match self.peek().cloned() {
            Some(Tok::Punct('!')) => {
                self.pos += 1;
                Ok(Guard::Not(Box::new(self.guard_atom()?)))
            }
            Some(Tok::Punct('(')) => {
                self.pos += 1;
                let g = self.guard_or()?;
                self.expect_punct(')')?;
                Ok(g)
            }
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Guard::Ap(n))
            }
            Some(Tok::Ident(s)) if s == "t" || s == "f" => {
                self.pos += 1;
                Ok(Guard::Const(s == "t"))
            }
            _ => Err(self.err("expected a guard")),
        }
    }

    fn acc_or(&mut self) -> Result<Acc> {
        let mut items = vec![self.acc_and()?];
        while self.eat_punct('|') {
            items.push(self.acc_and()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Acc::Or(items) })
    }

    fn acc_and(&mut self) -> Result<Acc> {
        let mut items = vec![self.acc_atom()?];
        while self.eat_punct('&') {
            items.push(self.acc_atom()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Acc::And(items) })
    }

    fn acc_atom(&mut self) -> Result<Acc> {
        match self.peek().cloned() {
            Some(Tok::Punct('(')) => {
                self.pos += 1;
                let a = self.acc_or()?;
                self.expect_punct(')')?;
                Ok(a)
            }
            Some(Tok::Ident(s)) if s == "t" || s == "f" => {
                self.pos += 1;
                Ok(Acc::Const(s == "t"))
            }
            Some(Tok::Ident(s)) if s == "Fin" || s == "Inf" => {
                self.pos += 1;
                self.expect_punct('(')?;
                if self.eat_punct('!') {
                    return Err(self.err("complemented acceptance sets are not supported"));
                }
                let i = self.int()?;
                self.expect_punct(')')?;
                Ok(if s == "Fin" { Acc::Fin(i) } else { Acc::Inf(i) })
            }
            _ => Err(self.err("expected Fin(..), Inf(..), t or f")),
        }
    }

    /// Skips tokens up to the next header key or body marker.
    fn skip_item(&mut self) {
        while let Some(t) = self.peek() {
            if matches!(t, Tok::Key(_) | Tok::Marker(_)) {
                break;
            }
            self.pos += 1;
        }
    }
}

/// Rabin pairs (as acceptance-set indices) of a Rabin-shaped condition.
/// `None` for a set means "all states".
type SetPair = (Vec<usize>, Option<usize>);

fn acc_to_pairs(acc: &Acc) -> std::result::Result<Vec<SetPair>, String> {
    let disjuncts: Vec<&Acc> = match acc {
        Acc::Or(items) => items.iter().collect(),
        other => vec![other],
    };
    let mut pairs = Vec::new();
    for d in disjuncts {
        let atoms: Vec<&Acc> = match d {
            Acc::And(items) => items.iter().collect(),
            other => vec![other],
        };
        let mut fin = Vec::new();
        let mut inf = None;
        let mut never = false;
        for a in atoms {
            match a {
                Acc::Fin(i) => fin.push(*i),
                Acc::Inf(i) if inf.is_none() => inf = Some(*i),
                Acc::Inf(_) => return Err("more than one Inf in a disjunct is not a Rabin condition".into()),
                Acc::Const(true) => {}
                Acc::Const(false) => never = true,
                _ => return Err("acceptance must be a disjunction of conjunctions".into()),
            }
        }
        if !never {
            pairs.push((fin, inf));
        }
    }
    Ok(pairs)
}

pub fn parse_automaton(text: &str) -> Result<RabinAutomaton> {
    parse_automaton_with(text, HoaOptions::default())
}

pub fn parse_automaton_with(text: &str, opts: HoaOptions) -> Result<RabinAutomaton> {
    let toks = lex(text)?;
    let lines = text.lines().count().max(1);
    let mut p = Parser {
        toks,
        pos: 0,
        eof: (lines, 1),
    };

    let mut num_states: Option<usize> = None;
    let mut start: Option<usize> = None;
    let mut aps: Option<Vec<String>> = None;
    let mut acceptance: Option<(usize, Acc)> = None;

    match p.next() {
        Some(Tok::Key(k)) if k == "HOA" => match p.next() {
            Some(Tok::Ident(v)) if v == "v1" => {}
            _ => {
                p.pos -= 1;
                return Err(p.err("expected version v1"));
            }
        },
        _ => {
            p.pos = 0;
            return Err(p.err("expected 'HOA: v1'"));
        }
    }
    loop {
        match p.peek().cloned() {
            Some(Tok::Marker(m)) if m == "--BODY--" => {
                p.pos += 1;
                break;
            }
            Some(Tok::Key(k)) => {
                p.pos += 1;
                match k.as_str() {
                    "States" => num_states = Some(p.int()?),
                    "Start" => {
                        if start.is_some() {
                            return Err(p.err("only a single initial state is supported"));
                        }
                        start = Some(p.int()?);
                        if matches!(p.peek(), Some(Tok::Punct('&'))) {
                            return Err(p.err("alternating initial states are not supported"));
                        }
                    }
                    "AP" => {
                        let n = p.int()?;
                        let mut names = Vec::with_capacity(n);
                        for _ in 0..n {
                            match p.next() {
                                Some(Tok::Str(s)) => names.push(s),
                                _ => {
                                    p.pos -= 1;
                                    return Err(p.err("expected a quoted proposition name"));
                                }
                            }
                        }
                        if names.iter().collect::<BTreeSet<_>>().len() != names.len() {
                            return Err(p.err("duplicate proposition name"));
                        }
                        aps = Some(names);
                    }
                    "Acceptance" => {
                        let n = p.int()?;
                        acceptance = Some((n, p.acc_or()?));
                    }
                    _ => p.skip_item(),
                }
            }
            Some(_) => return Err(p.err("expected a header item or --BODY--")),
            None => return Err(p.err("missing --BODY--")),
        }
    }

    let aps = aps.unwrap_or_default();
    if aps.len() > MAX_APS {
        return Err(Error::CapExceeded {
            what: format!("{} atomic propositions", aps.len()),
            limit: MAX_APS as u64,
        });
    }
    let (num_sets, acc) = acceptance.ok_or_else(|| p.err("missing Acceptance header"))?;

    // Body.
    let mut edges: BTreeMap<usize, Vec<(Guard, usize, (usize, usize))>> = BTreeMap::new();
    let mut membership: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut declared: BTreeSet<usize> = BTreeSet::new();
    let mut current: Option<usize> = None;
    loop {
        match p.peek().cloned() {
            Some(Tok::Marker(m)) if m == "--END--" => {
                p.pos += 1;
                break;
            }
            Some(Tok::Key(k)) if k == "State" => {
                p.pos += 1;
                let q = p.int()?;
                if !declared.insert(q) {
                    return Err(p.err(format!("state {q} is declared twice")));
                }
                if matches!(p.peek(), Some(Tok::Str(_))) {
                    p.pos += 1;
                }
                if p.eat_punct('{') {
                    let mut sets = BTreeSet::new();
                    while !p.eat_punct('}') {
                        let s = p.int()?;
                        if s >= num_sets {
                            return Err(p.err(format!("acceptance set {s} is not declared")));
                        }
                        sets.insert(s);
                    }
                    membership.insert(q, sets);
                }
                current = Some(q);
            }
            Some(Tok::Punct('[')) => {
                let q = current.ok_or_else(|| p.err("edge before any State:"))?;
                let at = p.here();
                p.pos += 1;
                let g = p.guard_or()?;
                p.expect_punct(']')?;
                let succ = p.int()?;
                if matches!(p.peek(), Some(Tok::Punct('{'))) {
                    return Err(p.err("transition-based acceptance is not supported"));
                }
                edges.entry(q).or_default().push((g, succ, at));
            }
            Some(Tok::Int(_)) => {
                return Err(p.err("edges without an explicit guard are not supported"));
            }
            Some(_) => return Err(p.err("expected State:, an edge, or --END--")),
            None => return Err(p.err("missing --END--")),
        }
    }
    if p.peek().is_some() {
        return Err(p.err("unexpected content after --END--"));
    }

    let n = num_states.unwrap_or_else(|| declared.iter().next_back().map_or(0, |q| q + 1));
    if n == 0 {
        return Err(Error::invalid("automaton has no states"));
    }
    if let Some(q) = declared.iter().find(|&&q| q >= n) {
        return Err(Error::invalid(format!("state {q} exceeds the declared state count {n}")));
    }
    let start = start.ok_or_else(|| Error::invalid("missing Start header"))?;
    if start >= n {
        return Err(Error::invalid("initial state is not declared"));
    }
    for list in edges.values() {
        for (g, succ, (line, column)) in list {
            if *succ >= n {
                return Err(syntax(*line, *column, format!("successor {succ} is not a state")));
            }
            check_guard_aps(g, aps.len()).map_err(|i| {
                syntax(*line, *column, format!("unknown proposition index {i}"))
            })?;
        }
    }

    let width = 1usize << aps.len();
    let sink = n;
    let mut needs_sink = false;
    let mut delta = vec![vec![usize::MAX; width]; n];
    for (q, row) in delta.iter_mut().enumerate() {
        let list = edges.get(&q).map(Vec::as_slice).unwrap_or(&[]);
        for (val, slot) in row.iter_mut().enumerate() {
            let mut succs = list.iter().filter(|(g, _, _)| g.eval(val)).map(|(_, s, _)| *s);
            match succs.next() {
                None if opts.auto_complete => {
                    needs_sink = true;
                    *slot = sink;
                }
                None => {
                    return Err(Error::invalid(format!(
                        "transition function not total: state {q} has no edge for {}",
                        describe_valuation(&aps, val)
                    )))
                }
                Some(s) => {
                    if succs.any(|t| t != s) {
                        return Err(Error::invalid(format!(
                            "automaton is not deterministic: state {q} has several successors for {}",
                            describe_valuation(&aps, val)
                        )));
                    }
                    *slot = s;
                }
            }
        }
    }
    let total_states = if needs_sink {
        delta.push(vec![sink; width]);
        n + 1
    } else {
        n
    };

    let set_pairs = acc_to_pairs(&acc).map_err(Error::invalid)?;
    if set_pairs.is_empty() {
        return Err(Error::invalid("acceptance condition is unsatisfiable"));
    }
    let members = |set: usize| -> BTreeSet<usize> {
        membership
            .iter()
            .filter(|(_, sets)| sets.contains(&set))
            .map(|(q, _)| *q)
            .collect()
    };
    let mut pairs = Vec::new();
    for (fin, inf) in set_pairs {
        if let Some(&bad) = fin.iter().chain(inf.iter()).find(|&&s| s >= num_sets) {
            return Err(Error::invalid(format!("acceptance set {bad} is not declared")));
        }
        let avoid: BTreeSet<usize> = fin.iter().flat_map(|&s| members(s)).collect();
        let repeat = match inf {
            Some(s) => members(s),
            None => (0..n).collect(),
        };
        pairs.push(RabinPair { avoid, repeat });
    }
    RabinAutomaton::new(aps, start, delta, pairs).inspect(|a| {
        debug_assert_eq!(a.num_states(), total_states);
    })
}

fn check_guard_aps(g: &Guard, n: usize) -> std::result::Result<(), usize> {
    match g {
        Guard::Const(_) => Ok(()),
        Guard::Ap(i) if *i < n => Ok(()),
        Guard::Ap(i) => Err(*i),
        Guard::Not(x) => check_guard_aps(x, n),
        Guard::And(a, b) | Guard::Or(a, b) => {
            check_guard_aps(a, n)?;
            check_guard_aps(b, n)
        }
    }
}

fn describe_valuation(aps: &[String], val: usize) -> String {
    let set: Vec<&str> = aps
        .iter()
        .enumerate()
        .filter(|(i, _)| val & (1 << i) != 0)
        .map(|(_, a)| a.as_str())
        .collect();
    format!("{{{}}}", set.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    const REACH: &str = r#"HOA: v1
States: 2
Start: 0
AP: 1 "P1"
acc-name: Rabin 1
Acceptance: 2 (Fin(0) & Inf(1))
--BODY--
State: 0
[!0] 0
[0] 1
State: 1 {1}
[t] 1
--END--
"#;

    #[test]
    fn parses_reachability_automaton() {
        let a = parse_automaton(REACH).unwrap();
        assert_eq!(a.num_states(), 2);
        assert_eq!(a.aps(), &["P1".to_string()]);
        assert_eq!(a.pairs().len(), 1);
        assert!(a.pairs()[0].avoid.is_empty());
        assert_eq!(a.pairs()[0].repeat, BTreeSet::from([1]));
        assert_eq!(a, RabinAutomaton::reach("P1"));
    }

    #[test]
    fn recurrence_with_inf_only() {
        let text = r#"HOA: v1
States: 2
Start: 0
AP: 1 "P1"
Acceptance: 1 Inf(0)
--BODY--
State: 0
[!0] 0
[0] 1
State: 1 {0}
[!0] 0
[0] 1
--END--"#;
        assert_eq!(parse_automaton(text).unwrap(), RabinAutomaton::infinitely_often("P1"));
    }

    #[test]
    fn writer_round_trip() {
        for a in [
            RabinAutomaton::reach("a"),
            RabinAutomaton::avoid("b"),
            RabinAutomaton::finitely_often("c"),
        ] {
            assert_eq!(parse_automaton(&a.to_hoa()).unwrap(), a);
        }
    }

    #[test]
    fn incomplete_is_rejected_or_completed() {
        let text = REACH.replace("[!0] 0\n", "");
        let err = parse_automaton(&text).unwrap_err().to_string();
        assert!(err.contains("not total"), "{err}");
        let a = parse_automaton_with(&text, HoaOptions { auto_complete: true }).unwrap();
        assert_eq!(a.num_states(), 3);
        assert_eq!(a.step_valuation(0, 0), 2);
        assert_eq!(a.step_valuation(2, 1), 2);
        assert!(!a.accepts_inf(&BTreeSet::from([2])));
    }

    #[test]
    fn nondeterminism_and_unknown_aps() {
        let text = REACH.replace("[!0] 0", "[t] 0");
        assert!(parse_automaton(&text).unwrap_err().to_string().contains("not deterministic"));
        let text = REACH.replace("[0] 1", "[0 | 3] 1");
        let err = parse_automaton(&text).unwrap_err().to_string();
        assert!(err.contains("unknown proposition"), "{err}");
    }

    #[test]
    fn syntax_errors_are_positioned() {
        let text = REACH.replace("[0] 1", "[0 &] 1");
        match parse_automaton(&text).unwrap_err() {
            Error::Syntax { line, .. } => assert_eq!(line, 10),
            e => panic!("{e:?}"),
        }
        assert!(parse_automaton("States: 1").is_err());
    }

    #[test]
    fn generalized_conditions_are_rejected() {
        let text = REACH.replace("(Fin(0) & Inf(1))", "(Inf(0) & Inf(1))");
        assert!(parse_automaton(&text).is_err());
    }
}
