//! JSON model files.
//!
//! ```json
//! {
//!   "states":  [{"name": "s"}, {"name": "t", "labels": ["goal"]}],
//!   "actions": [{"state": "s", "action": "go",
//!                "transitions": [{"to": "t", "prob": "1/2"}, {"to": "s", "prob": "0.5"}]},
//!               {"state": "t", "action": "stay", "transitions": [{"to": "t", "prob": 1}]}],
//!   "init": "s"
//! }
//! ```
//!
//! `init` is either a state name or a map from state names to probabilities.
//! Names starting with `#` are reserved for generated states and actions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::mdp::Mdp;
use crate::num::{serde_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Prob(#[serde(with = "serde_rational")] pub Rational);

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    propositions: Vec<String>,
    states: Vec<StateEntry>,
    actions: Vec<ActionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    init: Option<InitEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateEntry {
    name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    labels: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionEntry {
    state: String,
    action: String,
    transitions: Vec<TransitionEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionEntry {
    to: String,
    prob: Prob,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum InitEntry {
    State(String),
    Distribution(BTreeMap<String, Prob>),
}

/// Converts a serde_json error into a positioned syntax error.
pub(crate) fn json_error(e: serde_json::Error) -> Error {
    Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn parse_mdp(text: &str) -> Result<Mdp> {
    let file: ModelFile = serde_json::from_str(text).map_err(json_error)?;
    let reserved = file
        .states
        .iter()
        .map(|s| &s.name)
        .chain(file.actions.iter().map(|a| &a.action))
        .find(|n| n.starts_with('#'));
    if let Some(name) = reserved {
        return Err(Error::invalid(format!(
            "name {name:?} is reserved (names starting with '#' are generated)"
        )));
    }
    let mut b = Mdp::builder();
    for p in &file.propositions {
        b.proposition(p.clone());
    }
    for s in &file.states {
        b.state(s.name.clone(), s.labels.iter().cloned());
    }
    if !file.propositions.is_empty() {
        for s in &file.states {
            if let Some(l) = s.labels.iter().find(|l| !file.propositions.contains(l)) {
                return Err(Error::invalid(format!(
                    "state {:?} carries undeclared proposition {l:?}",
                    s.name
                )));
            }
        }
    }
    for a in &file.actions {
        b.action(
            a.state.clone(),
            a.action.clone(),
            a.transitions.iter().map(|t| (t.to.clone(), t.prob.0.clone())),
        );
    }
    match &file.init {
        Some(InitEntry::State(s)) => {
            b.init_state(s.clone());
        }
        Some(InitEntry::Distribution(d)) => {
            b.init_distribution(d.iter().map(|(s, p)| (s.clone(), p.0.clone())));
        }
        None => {}
    }
    b.build()
}

/// Canonical JSON rendering; [`parse_mdp`] reads it back to an equal MDP.
pub fn mdp_to_json(m: &Mdp) -> String {
    let used: std::collections::BTreeSet<&String> =
        m.states().iter().flat_map(|s| s.labels.iter()).collect();
    let extra_props = m.propositions().iter().any(|p| !used.contains(p));
    let file = ModelFile {
        propositions: if extra_props {
            m.propositions().iter().cloned().collect()
        } else {
            Vec::new()
        },
        states: m
            .states()
            .iter()
            .map(|s| StateEntry {
                name: s.name.clone(),
                labels: s.labels.iter().cloned().collect(),
            })
            .collect(),
        actions: m
            .states()
            .iter()
            .flat_map(|s| {
                s.actions.iter().map(move |a| ActionEntry {
                    state: s.name.clone(),
                    action: a.name.clone(),
                    transitions: a
                        .transitions
                        .iter()
                        .map(|t| TransitionEntry {
                            to: m.name(t.to).to_string(),
                            prob: Prob(t.prob.clone()),
                        })
                        .collect(),
                })
            })
            .collect(),
        init: Some(match m.init() {
            [(v, p)] if num_traits::One::is_one(p) => InitEntry::State(m.name(*v).to_string()),
            dist => InitEntry::Distribution(
                dist.iter()
                    .map(|(v, p)| (m.name(*v).to_string(), Prob(p.clone())))
                    .collect(),
            ),
        }),
    };
    serde_json::to_string_pretty(&file).expect("model serialization cannot fail") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    const SMALL: &str = r#"{
        "states": [{"name": "s"}, {"name": "t", "labels": ["goal"]}],
        "actions": [
            {"state": "s", "action": "go", "transitions": [{"to": "t", "prob": "1/2"}, {"to": "s", "prob": 0.5}]},
            {"state": "t", "action": "stay", "transitions": [{"to": "t", "prob": 1}]}
        ],
        "init": "s"
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let m = parse_mdp(SMALL).unwrap();
        assert_eq!(m.num_states(), 2);
        assert_eq!(m.action(0, 0).prob_to(1), rat(1, 2));
        let text = mdp_to_json(&m);
        assert_eq!(parse_mdp(&text).unwrap(), m);
        assert_eq!(mdp_to_json(&parse_mdp(&text).unwrap()), text);
    }

    #[test]
    fn distribution_init() {
        let text = SMALL.replace(r#""init": "s""#, r#""init": {"s": "1/3", "t": "2/3"}"#);
        let m = parse_mdp(&text).unwrap();
        assert_eq!(m.init(), &[(0, rat(1, 3)), (1, rat(2, 3))]);
        assert_eq!(parse_mdp(&mdp_to_json(&m)).unwrap(), m);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_mdp("{\n  \"states\": [,]\n}").unwrap_err();
        match err {
            Error::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_the_invariant() {
        let text = SMALL.replace("\"1/2\"", "\"2/10\"");
        let err = parse_mdp(&text).unwrap_err().to_string();
        assert!(err.contains("do not sum to 1") && err.contains("7/10"), "{err}");
    }

    #[test]
    fn rejects_reserved_and_undeclared_names() {
        let text = SMALL.replace("\"go\"", "\"#go\"");
        assert!(parse_mdp(&text).is_err());
        let text = SMALL.replace("\"states\"", "\"propositions\": [\"other\"], \"states\"");
        assert!(parse_mdp(&text).unwrap_err().to_string().contains("undeclared proposition"));
    }
}
