//! Properties and the multi-objective problem built from them.
//!
//! A problem whose properties are all reachability of absorbing labels is
//! solved on the model itself; anything else goes through the product with
//! the property automata and the subset reduction. Both routes end in the
//! same flow LP, and strategies found there are mapped back to the model.

use std::fmt;

use num_traits::One;

use crate::automata::{product, ProductMdp, RabinAutomaton};
use crate::error::{Error, Result};
use crate::lp::multiobj::{build_multiobj_lp, MultiObjectiveLp};
use crate::model::mdp::Mdp;
use crate::model::strategy::Strategy;
use crate::num::Rational;
use crate::pareto::{epsilon_pareto, exact_vertices, ParetoResult};
use crate::reduction::{build_reduction, clean_up, lift_strategy, CleanupReport, ReducedMdp};

#[derive(Clone, Debug, PartialEq)]
pub enum Property {
    /// Eventually visit a state carrying the label.
    Reach(String),
    /// Never visit a state carrying the label.
    Avoid(String),
    Automaton(RabinAutomaton),
}

impl Property {
    pub fn automaton(&self) -> RabinAutomaton {
        match self {
            Property::Reach(l) => RabinAutomaton::reach(l),
            Property::Avoid(l) => RabinAutomaton::avoid(l),
            Property::Automaton(a) => a.clone(),
        }
    }

    /// Whether this property is `Reach` of a label carried only by
    /// absorbing states of `m`.
    fn absorbing_reach<'a>(&'a self, m: &Mdp) -> Option<&'a str> {
        match self {
            Property::Reach(l) => {
                let set = m.label_set(l);
                (0..m.num_states())
                    .all(|v| !set[v] || m.is_absorbing(v))
                    .then_some(l.as_str())
            }
            _ => None,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Reach(l) => write!(f, "reach {l:?}"),
            Property::Avoid(l) => write!(f, "avoid {l:?}"),
            Property::Automaton(a) => write!(f, "automaton with {} states", a.num_states()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RouteChoice {
    /// Direct LP when every property is reachability of absorbing labels.
    #[default]
    Auto,
    /// Always use the product and the subset reduction.
    Reduction,
}

#[derive(Clone, Debug)]
enum Route {
    Direct,
    Reduced { product: Box<ProductMdp>, reduced: Box<ReducedMdp> },
}

/// A model with `k` properties, prepared for LP-based questions.
#[derive(Clone, Debug)]
pub struct Problem {
    pub source: Mdp,
    pub properties: Vec<Property>,
    pub names: Vec<String>,
    pub cleanup: CleanupReport,
    pub lp: MultiObjectiveLp,
    route: Route,
}

/// Answer to an extended achievability query, with the witness mapped back
/// to the source model.
#[derive(Clone, Debug)]
pub struct Decision {
    pub achievable: bool,
    pub strategy: Option<Strategy>,
    /// Objective values of the LP witness (lower bounds on what the source
    /// strategy achieves).
    pub values: Option<Vec<Rational>>,
    pub slack: Option<Rational>,
}

impl Problem {
    pub fn new(m: &Mdp, properties: Vec<Property>, names: Vec<String>) -> Result<Problem> {
        Problem::with_route(m, properties, names, RouteChoice::Auto)
    }

    pub fn with_route(
        m: &Mdp,
        properties: Vec<Property>,
        names: Vec<String>,
        choice: RouteChoice,
    ) -> Result<Problem> {
        if names.len() != properties.len() {
            return Err(Error::invalid("one name per property is required"));
        }
        if properties.is_empty() {
            return Err(Error::invalid("at least one property is required"));
        }
        for p in &properties {
            if let Property::Reach(l) | Property::Avoid(l) = p {
                if !m.propositions().contains(l) {
                    return Err(Error::unknown("label", l));
                }
            }
        }
        let direct: Option<Vec<&str>> = match choice {
            RouteChoice::Auto => properties.iter().map(|p| p.absorbing_reach(m)).collect(),
            RouteChoice::Reduction => None,
        };
        if let Some(labels) = direct {
            let targets: Vec<Vec<bool>> = labels.iter().map(|l| m.label_set(l)).collect();
            let union: Vec<bool> = (0..m.num_states()).map(|v| targets.iter().any(|t| t[v])).collect();
            let cleanup = clean_up(m, &union)?;
            let kept_targets: Vec<Vec<bool>> = targets.iter().map(|t| cleanup.translate(t)).collect();
            let lp = build_multiobj_lp(&cleanup.kept, cleanup.kept.init(), &kept_targets, cleanup.dead)?;
            return Ok(Problem {
                source: m.clone(),
                properties,
                names,
                cleanup,
                lp,
                route: Route::Direct,
            });
        }
        let automata: Vec<RabinAutomaton> = properties.iter().map(Property::automaton).collect();
        let product = product(m, &automata)?;
        let reduced = build_reduction(&product)?;
        let cleanup = clean_up(&reduced.mdp, &reduced.all_targets())?;
        let kept_targets: Vec<Vec<bool>> = reduced.targets.iter().map(|t| cleanup.translate(t)).collect();
        let lp = build_multiobj_lp(&cleanup.kept, cleanup.kept.init(), &kept_targets, cleanup.dead)?;
        Ok(Problem {
            source: m.clone(),
            properties,
            names,
            cleanup,
            lp,
            route: Route::Reduced {
                product: Box::new(product),
                reduced: Box::new(reduced),
            },
        })
    }

    pub fn num_objectives(&self) -> usize {
        self.properties.len()
    }

    pub fn uses_reduction(&self) -> bool {
        matches!(self.route, Route::Reduced { .. })
    }

    /// The product and reduced MDP, when the reduction route is used.
    pub fn reduction(&self) -> Option<(&ProductMdp, &ReducedMdp)> {
        match &self.route {
            Route::Direct => None,
            Route::Reduced { product, reduced } => Some((product, reduced)),
        }
    }

    /// Maps a memoryless strategy of the LP's MDP to a strategy of the
    /// source model.
    pub fn lift(&self, sigma: &Strategy) -> Result<Strategy> {
        match &self.route {
            Route::Direct => {
                if !sigma.is_memoryless() {
                    return Err(Error::invalid("expected a memoryless strategy"));
                }
                let m = &self.source;
                let choice = (0..m.num_states())
                    .map(|v| match self.cleanup.map[v] {
                        Some(k) => sigma
                            .choice(k, 0)
                            .cloned()
                            .ok_or_else(|| Error::invalid("strategy is missing a state")),
                        None => Ok(vec![(0, Rational::one())]),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Strategy::memoryless(m, choice)
            }
            Route::Reduced { product, reduced } => {
                lift_strategy(&self.source, product, reduced, &self.cleanup, sigma)
            }
        }
    }

    /// Decides whether some strategy satisfies `Pr(φ_i) ≥ r_i` for every
    /// `i`, strictly for `i ∈ strict`.
    pub fn achievable(&self, r: &[Rational], strict: &[usize]) -> Result<Decision> {
        let a = self.lp.decide(r, strict)?;
        let strategy = match &a.strategy {
            Some(s) => Some(self.lift(s)?),
            None => None,
        };
        Ok(Decision {
            achievable: a.achievable,
            strategy,
            values: a.values,
            slack: a.slack,
        })
    }

    fn name(&self, mut r: ParetoResult) -> Result<ParetoResult> {
        r.objectives = self.names.clone();
        for p in &mut r.points {
            p.strategy = self.lift(&p.strategy)?;
        }
        Ok(r)
    }

    /// Exact Pareto vertices, with strategies on the source model.
    pub fn pareto_vertices(&self) -> Result<ParetoResult> {
        self.name(exact_vertices(&self.lp)?)
    }

    /// ε-approximate Pareto set, with strategies on the source model.
    pub fn pareto_epsilon(&self, eps: &Rational) -> Result<ParetoResult> {
        self.name(epsilon_pareto(&self.lp, eps)?)
    }
}
