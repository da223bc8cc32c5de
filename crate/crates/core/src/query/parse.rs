//! Boolean combinations of probability predicates.
//!
//! ```text
//! expr   := or
//! or     := and ('|' and)*
//! and    := unary ('&' unary)*
//! unary  := '!' unary | '(' expr ')' | 'Pr(' name ')' cmp number
//! cmp    := '>=' | '>' | '<=' | '<' | '=' | '!='
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::num::{format_rational, is_probability, parse_rational, Rational};
use crate::oracle::validate::Comparator;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    pub property: String,
    pub cmp: Comparator,
    pub bound: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    Pred(Predicate),
    Not(Box<Query>),
    And(Vec<Query>),
    Or(Vec<Query>),
}

impl Query {
    pub fn pred(property: &str, cmp: Comparator, bound: Rational) -> Query {
        Query::Pred(Predicate { property: property.into(), cmp, bound })
    }

    /// Property names in order of first occurrence.
    pub fn properties(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<String>) {
        match self {
            Query::Pred(p) => {
                if !out.contains(&p.property) {
                    out.push(p.property.clone());
                }
            }
            Query::Not(q) => q.collect(out),
            Query::And(qs) | Query::Or(qs) => qs.iter().for_each(|q| q.collect(out)),
        }
    }

    /// Truth value when every property has the given probability.
    pub fn holds(&self, value: &dyn Fn(&str) -> Rational) -> bool {
        match self {
            Query::Pred(p) => p.cmp.holds(&value(&p.property), &p.bound),
            Query::Not(q) => !q.holds(value),
            Query::And(qs) => qs.iter().all(|q| q.holds(value)),
            Query::Or(qs) => qs.iter().any(|q| q.holds(value)),
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, qs: &[Query], op: &str| {
            write!(f, "(")?;
            for (i, q) in qs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{q}")?;
            }
            write!(f, ")")
        };
        match self {
            Query::Pred(p) => write!(f, "Pr({}) {} {}", p.property, p.cmp, format_rational(&p.bound)),
            Query::Not(q) => write!(f, "!{q}"),
            Query::And(qs) => join(f, qs, "&"),
            Query::Or(qs) => join(f, qs, "|"),
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    /// Line and column of `text[0]` in the enclosing file.
    origin: (usize, usize),
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        let before = &self.text[..self.pos];
        let line = before.matches('\n').count();
        let column = match before.rfind('\n') {
            Some(i) => before[i + 1..].chars().count() + 1,
            None => before.chars().count() + self.origin.1,
        };
        Error::Syntax {
            line: self.origin.0 + line,
            column,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected {token:?}")))
        }
    }

    fn or(&mut self) -> Result<Query> {
        let mut parts = vec![self.and()?];
        while self.eat("|") {
            self.eat("|");
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one part") } else { Query::Or(parts) })
    }

    fn and(&mut self) -> Result<Query> {
        let mut parts = vec![self.unary()?];
        while self.eat("&") {
            self.eat("&");
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one part") } else { Query::And(parts) })
    }

    fn unary(&mut self) -> Result<Query> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(Query::Not(Box::new(self.unary()?)))
            }
            Some('(') => {
                self.pos += 1;
                let q = self.or()?;
                self.expect(")")?;
                Ok(q)
            }
            Some('P') => self.predicate(),
            Some(c) => Err(self.error(format!("unexpected {c:?}"))),
            None => Err(self.error("unexpected end of query")),
        }
    }

    fn predicate(&mut self) -> Result<Query> {
        self.expect("Pr(")?;
        self.skip_ws();
        let start = self.pos;
        let len = self.text[start..]
            .find(|c: char| !(c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\'')))
            .unwrap_or(self.text.len() - start);
        if len == 0 {
            return Err(self.error("expected a property name"));
        }
        let name = self.text[start..start + len].to_string();
        self.pos += len;
        self.expect(")")?;
        self.skip_ws();
        let cmp = [">=", "<=", "!=", "==", ">", "<", "="]
            .into_iter()
            .find(|op| self.text[self.pos..].starts_with(op))
            .ok_or_else(|| self.error("expected a comparison operator"))?;
        self.pos += cmp.len();
        self.skip_ws();
        let start = self.pos;
        let len = self.text[start..]
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '/' | '-' | '+')))
            .unwrap_or(self.text.len() - start);
        let bound = parse_rational(&self.text[start..start + len]).map_err(|_| self.error("expected a number"))?;
        if !is_probability(&bound) {
            return Err(self.error(format!("bound {} is outside [0,1]", format_rational(&bound))));
        }
        self.pos += len;
        Ok(Query::Pred(Predicate {
            property: name,
            cmp: cmp.parse()?,
            bound,
        }))
    }
}

pub fn parse_query(text: &str) -> Result<Query> {
    parse_query_at(text, (1, 1))
}

/// Parses a query embedded in a file at the given (line, column).
pub(crate) fn parse_query_at(text: &str, origin: (usize, usize)) -> Result<Query> {
    let mut p = Parser { text, pos: 0, origin };
    let q = p.or()?;
    if p.peek().is_some() {
        return Err(p.error("trailing input after the query"));
    }
    Ok(q)
}
