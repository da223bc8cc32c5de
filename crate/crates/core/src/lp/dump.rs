//! Diagnostic export of the flow LP in CPLEX LP layout.
//!
//! Coefficients are written as decimals for external solvers; the exact
//! values go to a JSON sidecar keyed by row and variable name. Nothing here
//! is ever read back.

use std::fmt::Write;

use serde_json::{json, Map, Value};

use crate::lp::multiobj::{LpVar, MultiObjectiveLp};
use crate::lp::simplex::Sense;
use crate::num::{format_decimal, format_rational, Rational};

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

/// Column name of every LP variable (`x<index>_<state>_<action>`; the index
/// prefix keeps sanitized names unique).
pub fn var_names(lp: &MultiObjectiveLp) -> Vec<String> {
    lp.vars
        .iter()
        .enumerate()
        .map(|(j, v)| match *v {
            LpVar::Flow { state, action } => format!(
                "x{j}_{}_{}",
                sanitize(lp.mdp.name(state)),
                sanitize(&lp.mdp.action(state, action).name)
            ),
            LpVar::Absorb { state } => format!("x{j}_{}", sanitize(lp.mdp.name(state))),
        })
        .collect()
}

fn term(out: &mut String, first: bool, c: &Rational, name: &str) {
    let neg = c < &Rational::from_integer(0.into());
    let mag = if neg { -c.clone() } else { c.clone() };
    let sign = match (first, neg) {
        (true, false) => "",
        (true, true) => "- ",
        (false, false) => " + ",
        (false, true) => " - ",
    };
    let _ = write!(out, "{sign}{} {name}", format_decimal(&mag, 12));
}

/// Returns the LP text (maximizing objective 0 by default, every objective
/// listed as a comment) and the exact sidecar.
pub fn dump_lp(lp: &MultiObjectiveLp) -> (String, String) {
    let names = var_names(lp);
    let mut text = String::new();
    for i in 0..lp.num_objectives() {
        let terms: Vec<String> = lp.objective(i).iter().map(|(j, _)| names[*j].clone()).collect();
        let _ = writeln!(text, "\\ objective {i}: {}", terms.join(" + "));
    }
    text.push_str("Maximize\n obj:");
    let obj = if lp.num_objectives() > 0 { lp.objective(0) } else { Vec::new() };
    if obj.is_empty() {
        text.push_str(" 0");
    }
    for (n, (j, c)) in obj.iter().enumerate() {
        text.push(' ');
        term(&mut text, n == 0, c, &names[*j]);
    }
    text.push_str("\nSubject To\n");
    let mut rows = Map::new();
    for (r, c) in lp.program.constraints.iter().enumerate() {
        let _ = write!(text, " r{r}: ");
        for (n, (j, a)) in c.coeffs.iter().enumerate() {
            term(&mut text, n == 0, a, &names[*j]);
        }
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(text, " {op} {}", format_decimal(&c.rhs, 12));
        let coeffs: Map<String, Value> = c
            .coeffs
            .iter()
            .map(|(j, a)| (names[*j].clone(), json!(format_rational(a))))
            .collect();
        rows.insert(format!("r{r}"), json!({"coeffs": coeffs, "sense": op, "rhs": format_rational(&c.rhs)}));
    }
    text.push_str("Bounds\n");
    for n in &names {
        let _ = writeln!(text, " {n} >= 0");
    }
    text.push_str("End\n");
    let sidecar = json!({ "variables": names, "rows": rows });
    (text, format!("{}\n", serde_json::to_string_pretty(&sidecar).expect("json value")))
}
