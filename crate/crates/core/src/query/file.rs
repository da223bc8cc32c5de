//! Query files.
//!
//! ```text
//! # comment
//! properties {
//!   gf1 = buchi "P1"          # reach | avoid | buchi | cobuchi | automaton
//!   r2 = reach "P2"
//!   a2 = avoid "P2"
//!   complement r2 = a2
//! }
//! exists Pr(gf1) > 0 & Pr(r2) >= 1/2
//! ```
//!
//! The statement is `exists <query>` (also `query <query>`, or a bare
//! query), `forall <query>`, or `assume Pr(a) >= r1 guarantee Pr(b) >= r2`.
//! Automaton paths are resolved relative to the query file.

use std::path::Path;

use crate::automata::{parse_automaton, RabinAutomaton};
use crate::error::{Error, Result};
use crate::num::Rational;
use crate::objectives::Property;
use crate::oracle::validate::Comparator;
use crate::query::eval::PropertyTable;
use crate::query::parse::{parse_query_at, Query};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    Exists(Query),
    Forall(Query),
    AssumeGuarantee {
        assume: (String, Rational),
        guarantee: (String, Rational),
    },
}

#[derive(Clone, Debug)]
pub struct QueryFile {
    pub table: PropertyTable,
    pub statement: Statement,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, column, message: message.into() }
}

fn strip_comment(line: &str) -> &str {
    // `#` inside a quoted string is kept
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn quoted(text: &str, line: usize) -> Result<String> {
    let t = text.trim();
    t.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .filter(|s| !s.contains('"'))
        .map(str::to_string)
        .ok_or_else(|| syntax(line, 1, format!("expected a quoted string, found {t:?}")))
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\''))
}

fn property(kind: &str, arg: &str, line: usize, base: Option<&Path>) -> Result<Property> {
    let arg = quoted(arg, line)?;
    Ok(match kind {
        "reach" => Property::Reach(arg),
        "avoid" => Property::Avoid(arg),
        "buchi" => Property::Automaton(RabinAutomaton::infinitely_often(&arg)),
        "cobuchi" => Property::Automaton(RabinAutomaton::finitely_often(&arg)),
        "automaton" => {
            let path = match base {
                Some(dir) => dir.join(&arg),
                None => arg.into(),
            };
            Property::Automaton(parse_automaton(&std::fs::read_to_string(path)?)?)
        }
        other => return Err(syntax(line, 1, format!("unknown property kind {other:?}"))),
    })
}

/// A single `Pr(name) >= r` predicate.
fn lower_bound(q: Query, line: usize) -> Result<(String, Rational)> {
    match q {
        Query::Pred(p) if p.cmp == Comparator::Ge => Ok((p.property, p.bound)),
        _ => Err(syntax(line, 1, "assume and guarantee take one `Pr(name) >= r` each")),
    }
}

/// Parses a query file; `base` is the directory automaton paths are
/// relative to.
pub fn parse_query_file(text: &str, base: Option<&Path>) -> Result<QueryFile> {
    let lines: Vec<&str> = text.lines().map(strip_comment).collect();
    let mut table = PropertyTable::new();
    let mut i = 0;
    while i < lines.len() && lines[i].trim().is_empty() {
        i += 1;
    }
    if i < lines.len() && lines[i].trim().starts_with("properties") {
        let head = lines[i].trim();
        if head.trim_start_matches("properties").trim() != "{" {
            return Err(syntax(i + 1, 1, "expected `properties {`"));
        }
        i += 1;
        loop {
            let Some(raw) = lines.get(i) else {
                return Err(syntax(i, 1, "unterminated properties block"));
            };
            let l = raw.trim();
            i += 1;
            if l.is_empty() {
                continue;
            }
            if l == "}" {
                break;
            }
            let (lhs, rhs) = l.split_once('=').ok_or_else(|| syntax(i, 1, "expected `name = kind \"arg\"`"))?;
            let lhs = lhs.trim();
            if let Some(a) = lhs.strip_prefix("complement ") {
                let (a, b) = (a.trim(), rhs.trim());
                if !is_name(a) || !is_name(b) {
                    return Err(syntax(i, 1, "expected `complement a = b`"));
                }
                table.complement(a, b)?;
                continue;
            }
            if !is_name(lhs) {
                return Err(syntax(i, 1, format!("invalid property name {lhs:?}")));
            }
            let rhs = rhs.trim();
            let (kind, arg) = rhs.split_once(char::is_whitespace).unwrap_or((rhs, ""));
            table.add(lhs, property(kind, arg, i, base)?)?;
        }
    }
    // the statement: everything that is left
    let rest_start = i;
    while i < lines.len() && lines[i].trim().is_empty() {
        i += 1;
    }
    if i >= lines.len() {
        return Err(syntax(rest_start.max(1), 1, "missing query"));
    }
    let first = lines[i];
    let indent = first.len() - first.trim_start().len();
    let body: String = std::iter::once(&first[indent..])
        .chain(lines[i + 1..].iter().copied())
        .collect::<Vec<_>>()
        .join("\n");
    let line = i + 1;
    let keyword = body.split(|c: char| c.is_whitespace() || c == '(').next().unwrap_or("");
    let after = |k: &str| (body[k.len()..].to_string(), indent + k.len() + 1);
    let statement = match keyword {
        "exists" | "query" => {
            let (q, col) = after(keyword);
            Statement::Exists(parse_query_at(&q, (line, col))?)
        }
        "forall" => {
            let (q, col) = after(keyword);
            Statement::Forall(parse_query_at(&q, (line, col))?)
        }
        "assume" => {
            let (rest, col) = after(keyword);
            let (a, g) = rest
                .split_once("guarantee")
                .ok_or_else(|| syntax(line, 1, "expected `guarantee`"))?;
            let assume = lower_bound(parse_query_at(a, (line, col))?, line)?;
            let guarantee = lower_bound(parse_query_at(g, (line, col + a.len() + "guarantee".len()))?, line)?;
            Statement::AssumeGuarantee { assume, guarantee }
        }
        _ => Statement::Exists(parse_query_at(&body, (line, indent + 1))?),
    };
    let names = match &statement {
        Statement::Exists(q) | Statement::Forall(q) => q.properties(),
        Statement::AssumeGuarantee { assume, guarantee } => vec![assume.0.clone(), guarantee.0.clone()],
    };
    for n in names {
        table.get(&n)?;
    }
    Ok(QueryFile { table, statement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    const LOOPS: &str = r#"
# two loops
properties {
  gf1 = buchi "P1"   # visit P1 forever
  gf2 = buchi "P2"
  r2 = reach "P2"
  a2 = avoid "P2"
  complement r2 = a2
}

exists Pr(gf1) > 0
     & Pr(gf2) > 0
"#;

    #[test]
    fn properties_and_statement() {
        let f = parse_query_file(LOOPS, None).unwrap();
        assert_eq!(f.table.names(), ["gf1", "gf2", "r2", "a2"]);
        assert_eq!(f.table.complements.of("a2"), Some("r2"));
        assert_eq!(
            f.table.get("gf1").unwrap(),
            &Property::Automaton(RabinAutomaton::infinitely_often("P1"))
        );
        match f.statement {
            Statement::Exists(Query::And(parts)) => assert_eq!(parts.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn other_statements() {
        let head = "properties {\n a = reach \"P1\"\n b = reach \"P2\"\n}\n";
        let f = parse_query_file(&format!("{head}forall Pr(a) <= 3/5"), None).unwrap();
        assert!(matches!(f.statement, Statement::Forall(_)));
        let f = parse_query_file(&format!("{head}assume Pr(a) >= 3/5 guarantee Pr(b) >= 1/10"), None).unwrap();
        assert_eq!(
            f.statement,
            Statement::AssumeGuarantee {
                assume: ("a".into(), rat(3, 5)),
                guarantee: ("b".into(), rat(1, 10)),
            }
        );
        let f = parse_query_file(&format!("{head}Pr(a) >= 1"), None).unwrap();
        assert_eq!(f.statement, Statement::Exists(Query::pred("a", Comparator::Ge, int(1))));
    }

    #[test]
    fn errors() {
        let head = "properties {\n a = reach \"P1\"\n}\n";
        assert!(matches!(parse_query_file(&format!("{head}exists Pr(z) > 0"), None), Err(Error::Unknown { .. })));
        assert!(parse_query_file("properties {\n a = reach \"P1\"\n", None).is_err());
        assert!(parse_query_file("properties {\n a = walk \"P1\"\n}\nPr(a) > 0", None).is_err());
        assert!(parse_query_file("properties {\n a = reach P1\n}\nPr(a) > 0", None).is_err());
        assert!(parse_query_file(&format!("{head}assume Pr(a) > 0 guarantee Pr(a) >= 1"), None).is_err());
        assert!(parse_query_file(head, None).is_err());
        match parse_query_file(&format!("{head}exists Pr(a) >= 2"), None) {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }
}
