//! The flow LP for multi-objective reachability with absorbing targets.
//!
//! Variables are expected action counts `y(v,a)` for non-target states and
//! absorption masses `y(v)` for target states; one balance row per state.
//! A target vector is achievable exactly when the balance rows together with
//! `Σ_{v∈F_i} y(v) ≥ r_i` are feasible, and normalizing the flows of a
//! feasible point yields a memoryless witness.

use std::sync::OnceLock;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::backward_reachable;
use crate::lp::simplex::{LinearProgram, LpOutcome, Sense, Tableau};
use crate::model::mdp::Mdp;
use crate::model::strategy::Strategy;
use crate::num::{is_probability, Field, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LpVar {
    /// Expected number of times action `action` is taken at `state`.
    Flow { state: usize, action: usize },
    /// Probability of being absorbed in target `state`.
    Absorb { state: usize },
}

#[derive(Debug)]
pub struct MultiObjectiveLp {
    pub mdp: Mdp,
    /// `F_i` over the states of `mdp`.
    pub targets: Vec<Vec<bool>>,
    pub alpha: Vec<(usize, Rational)>,
    /// Sink outside the LP; mass entering it is lost.
    pub dead: Option<usize>,
    pub vars: Vec<LpVar>,
    /// Balance rows only.
    pub program: LinearProgram<Rational>,
    /// Variable indices per state: flows by action for non-targets, the
    /// single absorption variable for targets, nothing for the sink.
    pub var_of: Vec<Vec<usize>>,
    basis: OnceLock<Option<Tableau<Rational>>>,
}

impl Clone for MultiObjectiveLp {
    fn clone(&self) -> Self {
        MultiObjectiveLp {
            mdp: self.mdp.clone(),
            targets: self.targets.clone(),
            alpha: self.alpha.clone(),
            dead: self.dead,
            vars: self.vars.clone(),
            program: self.program.clone(),
            var_of: self.var_of.clone(),
            basis: OnceLock::new(),
        }
    }
}

/// Decision for one extended achievability query.
#[derive(Clone, Debug)]
pub struct Achievability {
    pub achievable: bool,
    /// Memoryless witness on the LP's MDP when achievable.
    pub strategy: Option<Strategy>,
    /// The LP point behind the answer, when the solver was run and feasible.
    pub witness: Option<Vec<Rational>>,
    /// Objective readouts of the witness.
    pub values: Option<Vec<Rational>>,
    /// Optimal slack when strict constraints were present.
    pub slack: Option<Rational>,
}

#[derive(Clone, Debug)]
pub struct WeightedOptimum {
    pub value: Rational,
    pub point: Vec<Rational>,
    pub x: Vec<Rational>,
    pub strategy: Strategy,
}

/// Builds the LP over a cleaned-up MDP. `dead` is the sink that collects
/// lost mass (it gets neither variables nor a row); every other state must
/// be able to reach a target, and every target must be absorbing.
pub fn build_multiobj_lp(
    m: &Mdp,
    alpha: &[(usize, Rational)],
    targets: &[Vec<bool>],
    dead: Option<usize>,
) -> Result<MultiObjectiveLp> {
    let n = m.num_states();
    if targets.iter().any(|t| t.len() != n) {
        return Err(Error::invalid("target set does not match the state count"));
    }
    let in_f: Vec<bool> = (0..n).map(|v| targets.iter().any(|t| t[v])).collect();
    if let Some(v) = (0..n).find(|&v| in_f[v] && !m.is_absorbing(v)) {
        return Err(Error::invalid(format!("target state {:?} is not absorbing", m.name(v))));
    }
    if let Some(d) = dead {
        if d >= n || in_f[d] || !m.is_absorbing(d) {
            return Err(Error::invalid("the sink must be an absorbing non-target state"));
        }
    }
    let reach = backward_reachable(n, &m.predecessors(), &in_f);
    if let Some(v) = (0..n).find(|&v| !reach[v] && Some(v) != dead) {
        return Err(Error::invalid(format!(
            "state {:?} cannot reach any target; clean the model up first",
            m.name(v)
        )));
    }
    let mut total = Rational::zero();
    for (v, p) in alpha {
        if *v >= n || !p.gt_zero() {
            return Err(Error::invalid("initial distribution has an invalid entry"));
        }
        total += p;
    }
    if !total.is_one() {
        return Err(Error::invalid("initial distribution does not sum to 1"));
    }

    let mut vars = Vec::new();
    let mut var_of = vec![Vec::new(); n];
    for v in 0..n {
        if Some(v) == dead {
            continue;
        }
        if in_f[v] {
            var_of[v].push(vars.len());
            vars.push(LpVar::Absorb { state: v });
        } else {
            for a in 0..m.actions(v).len() {
                var_of[v].push(vars.len());
                vars.push(LpVar::Flow { state: v, action: a });
            }
        }
    }
    // Inflow coefficients per state.
    let mut inflow: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    for v in (0..n).filter(|&v| !in_f[v] && Some(v) != dead) {
        for (a, act) in m.actions(v).iter().enumerate() {
            for t in &act.transitions {
                inflow[t.to].push((var_of[v][a], t.prob.clone()));
            }
        }
    }
    let mut rhs = vec![Rational::zero(); n];
    for (v, p) in alpha {
        rhs[*v] += p;
    }
    let mut program = LinearProgram::new(vars.len());
    for v in 0..n {
        if Some(v) == dead {
            continue;
        }
        let mut row: Vec<(usize, Rational)> =
            var_of[v].iter().map(|&j| (j, Rational::one())).collect();
        row.extend(inflow[v].iter().map(|(j, p)| (*j, -p.clone())));
        program.add(row, Sense::Eq, rhs[v].clone());
    }
    Ok(MultiObjectiveLp {
        mdp: m.clone(),
        targets: targets.to_vec(),
        alpha: alpha.to_vec(),
        dead,
        vars,
        program,
        var_of,
        basis: OnceLock::new(),
    })
}

impl MultiObjectiveLp {
    pub fn num_objectives(&self) -> usize {
        self.targets.len()
    }

    /// `Σ_{v∈F_i} y(v)`.
    pub fn objective(&self, i: usize) -> Vec<(usize, Rational)> {
        self.weighted_objective(&unit(self.num_objectives(), i))
    }

    pub fn weighted_objective(&self, w: &[Rational]) -> Vec<(usize, Rational)> {
        let mut out = Vec::new();
        for (i, t) in self.targets.iter().enumerate() {
            if w[i].is_zero() {
                continue;
            }
            for v in (0..t.len()).filter(|&v| t[v]) {
                out.push((self.var_of[v][0], w[i].clone()));
            }
        }
        out
    }

    /// Objective readouts of an LP point.
    pub fn values(&self, x: &[Rational]) -> Vec<Rational> {
        (0..self.num_objectives())
            .map(|i| {
                self.objective(i)
                    .iter()
                    .map(|(j, c)| c.clone() * x[*j].clone())
                    .sum()
            })
            .collect()
    }

    /// Whether `x` satisfies every balance row and nonnegativity exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.vars.len()
            && x.iter().all(|v| !v.lt_zero())
            && self.program.constraints.iter().all(|c| {
                let lhs: Rational = c.coeffs.iter().map(|(j, a)| a.clone() * x[*j].clone()).sum();
                lhs == c.rhs
            })
    }

    fn basis(&self) -> Option<&Tableau<Rational>> {
        self.basis.get_or_init(|| self.program.feasible_basis()).as_ref()
    }

    /// Maximizes a linear objective over the balance polytope.
    pub fn solve(&self, objective: &[(usize, Rational)]) -> LpOutcome<Rational> {
        match self.basis() {
            Some(t) => t.maximize(objective),
            None => LpOutcome::Infeasible,
        }
    }

    /// Memoryless strategy from an LP point: flows normalized per state,
    /// the lexicographically least action where no flow passes.
    pub fn extract_strategy(&self, x: &[Rational]) -> Result<Strategy> {
        if !self.is_feasible(x) {
            return Err(Error::invalid("LP point is not feasible"));
        }
        let m = &self.mdp;
        let choice = (0..m.num_states())
            .map(|v| {
                let flows: Vec<(usize, Rational)> = self.var_of[v]
                    .iter()
                    .filter_map(|&j| match self.vars[j] {
                        LpVar::Flow { action, .. } => Some((action, x[j].clone())),
                        LpVar::Absorb { .. } => None,
                    })
                    .filter(|(_, y)| y.gt_zero())
                    .collect();
                let total: Rational = flows.iter().map(|(_, y)| y.clone()).sum();
                if total.is_zero() {
                    vec![(0, Rational::one())]
                } else {
                    flows.into_iter().map(|(a, y)| (a, y / total.clone())).collect()
                }
            })
            .collect();
        Strategy::memoryless(m, choice)
    }

    /// Decides `Pr(◊F_i) ≥ r_i` for all `i`, strictly for `i ∈ strict`.
    pub fn decide(&self, r: &[Rational], strict: &[usize]) -> Result<Achievability> {
        let k = self.num_objectives();
        if r.len() != k {
            return Err(Error::invalid(format!("expected {k} bounds, got {}", r.len())));
        }
        if let Some(p) = r.iter().find(|p| !is_probability(p)) {
            return Err(Error::invalid(format!("bound {p} is not a probability")));
        }
        if let Some(j) = strict.iter().find(|&&j| j >= k) {
            return Err(Error::invalid(format!("strict index {j} is out of range")));
        }
        if strict.is_empty() && r.iter().all(Zero::is_zero) {
            return Ok(Achievability {
                achievable: true,
                strategy: Some(Strategy::default_pure(&self.mdp)),
                witness: None,
                values: None,
                slack: None,
            });
        }
        let z = self.vars.len();
        let mut lp = LinearProgram::new(z + 1);
        lp.constraints = self.program.constraints.clone();
        for (i, ri) in r.iter().enumerate() {
            let mut row = self.objective(i);
            if strict.contains(&i) {
                row.push((z, -Rational::one()));
            }
            lp.add(row, Sense::Ge, ri.clone());
        }
        lp.add(vec![(z, Rational::one())], Sense::Le, Rational::one());
        let objective = if strict.is_empty() { Vec::new() } else { vec![(z, Rational::one())] };
        match lp.maximize(&objective) {
            LpOutcome::Optimal { value, mut x } => {
                x.truncate(z);
                let achievable = strict.is_empty() || value.gt_zero();
                let strategy = if achievable { Some(self.extract_strategy(&x)?) } else { None };
                Ok(Achievability {
                    achievable,
                    strategy,
                    values: Some(self.values(&x)),
                    witness: Some(x),
                    slack: (!strict.is_empty()).then_some(value),
                })
            }
            LpOutcome::Infeasible => Ok(Achievability {
                achievable: false,
                strategy: None,
                witness: None,
                values: None,
                slack: None,
            }),
            LpOutcome::Unbounded => Err(Error::Internal("bounded slack LP reported unbounded".into())),
        }
    }

    /// Maximizes `Σ_i w_i Pr(◊F_i)`.
    pub fn maximize_weighted(&self, w: &[Rational]) -> Result<WeightedOptimum> {
        if w.len() != self.num_objectives() {
            return Err(Error::invalid("weight vector has the wrong length"));
        }
        if w.iter().any(Field::lt_zero) {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        match self.solve(&self.weighted_objective(w)) {
            LpOutcome::Optimal { value, x } => Ok(WeightedOptimum {
                point: self.values(&x),
                strategy: self.extract_strategy(&x)?,
                value,
                x,
            }),
            LpOutcome::Infeasible => Err(Error::Internal("balance rows are infeasible".into())),
            LpOutcome::Unbounded => Err(Error::Internal("flow LP is unbounded".into())),
        }
    }
}

pub(crate) fn unit(k: usize, i: usize) -> Vec<Rational> {
    (0..k)
        .map(|j| if j == i { Rational::one() } else { Rational::zero() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::chain::{induced_chain, reach_probabilities};
    use crate::num::{int, rat};

    /// s --a1--> P1 3/5 | x 2/5 ; a2 --> P2 4/5 | y 1/5 ; a3 --> P1 1/2 | P2 1/2,
    /// with the leftovers already folded into an explicit sink.
    fn split_clean() -> (Mdp, Vec<Vec<bool>>, usize) {
        let mut b = Mdp::builder();
        b.state("s", Vec::<String>::new())
            .state("t1", ["P1"])
            .state("t2", ["P2"])
            .state("#dead", ["dead"])
            .action("s", "a1", [("t1", rat(3, 5)), ("#dead", rat(2, 5))])
            .action("s", "a2", [("t2", rat(4, 5)), ("#dead", rat(1, 5))])
            .action("s", "a3", [("t1", rat(1, 2)), ("t2", rat(1, 2))])
            .action("t1", "stay", [("t1", int(1))])
            .action("t2", "stay", [("t2", int(1))])
            .action("#dead", "#loop", [("#dead", int(1))])
            .init_state("s");
        let m = b.build().unwrap();
        let t = vec![m.label_set("P1"), m.label_set("P2")];
        let dead = m.index_of("#dead").unwrap();
        (m, t, dead)
    }

    fn lp() -> MultiObjectiveLp {
        let (m, t, dead) = split_clean();
        let s = m.index_of("s").unwrap();
        build_multiobj_lp(&m, &[(s, int(1))], &t, Some(dead)).unwrap()
    }

    #[test]
    fn shape() {
        let lp = lp();
        assert_eq!(lp.vars.len(), 5);
        assert_eq!(lp.program.constraints.len(), 3);
        let t1 = lp.mdp.index_of("t1").unwrap();
        // y(t1) - 3/5 y(s,a1) - 1/2 y(s,a3) = 0
        let y = lp.var_of[t1][0];
        let row = &lp.program.constraints.iter().find(|c| c.coeffs.contains(&(y, int(1)))).unwrap().coeffs;
        assert_eq!(row.len(), 3);
        assert!(row.contains(&(lp.var_of[t1][0], int(1))));
        assert!(row.iter().any(|(_, c)| *c == -rat(3, 5)));
        assert!(row.iter().any(|(_, c)| *c == -rat(1, 2)));
    }

    #[test]
    fn weighted_optima() {
        let lp = lp();
        assert_eq!(lp.maximize_weighted(&[int(1), int(0)]).unwrap().value, rat(3, 5));
        assert_eq!(lp.maximize_weighted(&[int(0), int(1)]).unwrap().value, rat(4, 5));
        assert_eq!(lp.maximize_weighted(&[int(1), int(1)]).unwrap().value, int(1));
        assert_eq!(lp.maximize_weighted(&[int(0), int(0)]).unwrap().value, int(0));
        assert!(lp.maximize_weighted(&[int(-1), int(0)]).is_err());
    }

    #[test]
    fn achievability_with_strictness() {
        let lp = lp();
        let yes = lp.decide(&[rat(1, 2), rat(1, 2)], &[]).unwrap();
        assert!(yes.achievable);
        let no = lp.decide(&[rat(1, 2), rat(1, 2)], &[0, 1]).unwrap();
        assert!(!no.achievable);
        assert_eq!(no.slack, Some(int(0)));
        let mixed = lp.decide(&[rat(3, 10), rat(2, 5)], &[]).unwrap();
        assert!(mixed.achievable);
        let sigma = mixed.strategy.unwrap();
        let chain = induced_chain(&lp.mdp, &sigma).unwrap();
        let got = reach_probabilities(&chain, &lp.targets).unwrap();
        assert!(got[0] >= rat(3, 10) && got[1] >= rat(2, 5));
        assert!(!lp.decide(&[rat(11, 20), rat(3, 10)], &[]).unwrap().achievable);
    }

    #[test]
    fn extraction_normalizes_flows() {
        let lp = lp();
        let s = lp.mdp.index_of("s").unwrap();
        let t1 = lp.mdp.index_of("t1").unwrap();
        let t2 = lp.mdp.index_of("t2").unwrap();
        let mut x = vec![int(0); lp.vars.len()];
        x[lp.var_of[s][0]] = rat(1, 2);
        x[lp.var_of[s][1]] = rat(1, 2);
        x[lp.var_of[t1][0]] = rat(3, 10);
        x[lp.var_of[t2][0]] = rat(2, 5);
        let sigma = lp.extract_strategy(&x).unwrap();
        assert_eq!(sigma.choice(s, 0).unwrap(), &vec![(0, rat(1, 2)), (1, rat(1, 2))]);
        x[lp.var_of[t2][0]] = rat(1, 2);
        assert!(lp.extract_strategy(&x).is_err());
    }

    #[test]
    fn rejects_uncleaned_models() {
        let mut b = Mdp::builder();
        b.state("s", Vec::<String>::new())
            .state("g", ["G"])
            .state("x", Vec::<String>::new())
            .action("s", "a", [("g", rat(1, 2)), ("x", rat(1, 2))])
            .action("g", "stay", [("g", int(1))])
            .action("x", "stay", [("x", int(1))])
            .init_state("s");
        let m = b.build().unwrap();
        assert!(build_multiobj_lp(&m, &[(0, int(1))], &[m.label_set("G")], None).is_err());
    }
}
