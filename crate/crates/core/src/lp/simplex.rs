//! Dense two-phase primal simplex with Bland's rule over an exact field.
//!
//! Variables are nonnegative. Entering and leaving variables are always the
//! lowest-indexed eligible ones, which rules out cycling and makes the
//! returned basic solution a deterministic function of the input.

use crate::num::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<F> {
    /// Sparse row; repeated indices are summed.
    pub coeffs: Vec<(usize, F)>,
    pub sense: Sense,
    pub rhs: F,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<F> {
    Optimal { value: F, x: Vec<F> },
    Infeasible,
    Unbounded,
}

impl<F> LpOutcome<F> {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

/// `maximize c·x subject to rows, x ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<F> {
    pub num_vars: usize,
    pub constraints: Vec<Constraint<F>>,
}

impl<F: Field> LinearProgram<F> {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { num_vars, constraints: Vec::new() }
    }

    pub fn add(&mut self, coeffs: Vec<(usize, F)>, sense: Sense, rhs: F) -> &mut Self {
        assert!(coeffs.iter().all(|(j, _)| *j < self.num_vars), "variable index out of range");
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self
    }

    pub fn maximize(&self, objective: &[(usize, F)]) -> LpOutcome<F> {
        match self.feasible_basis() {
            Some(t) => t.maximize(objective),
            None => LpOutcome::Infeasible,
        }
    }

    /// Runs phase one; `None` when the constraints are infeasible. The
    /// returned tableau can be re-optimized for many objectives.
    pub fn feasible_basis(&self) -> Option<Tableau<F>> {
        Tableau::phase_one(self)
    }
}

/// A feasible basic tableau (structural and slack columns only).
#[derive(Clone, Debug)]
pub struct Tableau<F> {
    num_vars: usize,
    /// Total columns excluding the right-hand side.
    cols: usize,
    rows: Vec<Vec<F>>,
    rhs: Vec<F>,
    basis: Vec<usize>,
}

impl<F: Field> Tableau<F> {
    fn phase_one(lp: &LinearProgram<F>) -> Option<Self> {
        let n = lp.num_vars;
        let m = lp.constraints.len();
        let slacks = lp.constraints.iter().filter(|c| c.sense != Sense::Eq).count();
        let cols = n + slacks;
        // Artificial columns follow at `cols + i` for row i.
        let width = cols + m;
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack = n;
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![F::zero(); width];
            for (j, a) in &c.coeffs {
                row[*j] = row[*j].clone() + a.clone();
            }
            match c.sense {
                Sense::Le => {
                    row[slack] = F::one();
                    slack += 1;
                }
                Sense::Ge => {
                    row[slack] = -F::one();
                    slack += 1;
                }
                Sense::Eq => {}
            }
            let mut b = c.rhs.clone();
            if b.lt_zero() {
                row.iter_mut().for_each(|x| *x = -x.clone());
                b = -b;
            }
            row[cols + i] = F::one();
            rows.push(row);
            rhs.push(b);
            basis.push(cols + i);
        }
        let mut t = Tableau { num_vars: n, cols: width, rows, rhs, basis };
        // Minimize the sum of artificials, i.e. maximize its negation.
        let obj: Vec<(usize, F)> = (0..m).map(|i| (cols + i, -F::one())).collect();
        let value = match t.optimize(&obj, width) {
            Ok(v) => v,
            Err(()) => unreachable!("phase one is bounded"),
        };
        if value.lt_zero() {
            return None;
        }
        // Drive zero-level artificials out of the basis, dropping redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= cols {
                match (0..cols).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.rhs.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for row in &mut t.rows {
            row.truncate(cols);
        }
        t.cols = cols;
        Some(t)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = F::one() / self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x = x.clone() * inv.clone();
            }
        }
        self.rhs[r] = self.rhs[r].clone() * inv;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for &j in &nz {
                let d = f.clone() * pivot_row[j].clone();
                self.rows[i][j] = self.rows[i][j].clone() - d;
            }
            self.rhs[i] = self.rhs[i].clone() - f * pivot_rhs.clone();
        }
        self.basis[r] = c;
    }

    /// Primal simplex on the current basis over columns `0..limit`.
    /// Returns the optimal value, or `Err` when unbounded.
    fn optimize(&mut self, objective: &[(usize, F)], limit: usize) -> Result<F, ()> {
        let mut c = vec![F::zero(); self.cols];
        for (j, a) in objective {
            c[*j] = c[*j].clone() + a.clone();
        }
        loop {
            // Reduced costs d_j = c_j - c_B · column_j.
            let cb: Vec<F> = self.basis.iter().map(|&b| c[b].clone()).collect();
            let entering = (0..limit).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut d = c[j].clone();
                for (i, row) in self.rows.iter().enumerate() {
                    if !row[j].is_zero() && !cb[i].is_zero() {
                        d = d - cb[i].clone() * row[j].clone();
                    }
                }
                d.gt_zero()
            });
            let Some(j) = entering else {
                let mut value = F::zero();
                for (i, b) in self.basis.iter().enumerate() {
                    value = value + c[*b].clone() * self.rhs[i].clone();
                }
                return Ok(value);
            };
            let mut best: Option<(usize, F)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[j].gt_zero() {
                    continue;
                }
                let ratio = self.rhs[i].clone() / row[j].clone();
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, j),
                None => return Err(()),
            }
        }
    }

    /// Optimizes `objective` from this basis (the tableau itself is left
    /// untouched).
    pub fn maximize(&self, objective: &[(usize, F)]) -> LpOutcome<F> {
        let mut t = self.clone();
        let limit = t.cols;
        match t.optimize(objective, limit) {
            Ok(value) => {
                let mut x = vec![F::zero(); t.num_vars];
                for (i, &b) in t.basis.iter().enumerate() {
                    if b < t.num_vars {
                        x[b] = t.rhs[i].clone();
                    }
                }
                LpOutcome::Optimal { value, x }
            }
            Err(()) => LpOutcome::Unbounded,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat, Rational};
    use num_rational::Ratio;

    #[test]
    fn single_bound() {
        let mut lp = LinearProgram::<Rational>::new(1);
        lp.add(vec![(0, int(1))], Sense::Le, rat(3, 7));
        match lp.maximize(&[(0, int(1))]) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, rat(3, 7));
                assert_eq!(x, vec![rat(3, 7)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::<Rational>::new(1);
        lp.add(vec![(0, int(1))], Sense::Ge, int(1));
        lp.add(vec![(0, int(1))], Sense::Le, int(0));
        assert_eq!(lp.maximize(&[(0, int(1))]), LpOutcome::Infeasible);

        let mut lp = LinearProgram::<Rational>::new(2);
        lp.add(vec![(0, int(1)), (1, int(-1))], Sense::Le, int(1));
        assert_eq!(lp.maximize(&[(0, int(1))]), LpOutcome::Unbounded);
    }

    #[test]
    fn equalities_with_redundant_row() {
        // x + y = 1, 2x + 2y = 2, maximize 3x + y.
        let mut lp = LinearProgram::<Ratio<i128>>::new(2);
        let one = Ratio::from_integer(1);
        let two = Ratio::from_integer(2);
        lp.add(vec![(0, one), (1, one)], Sense::Eq, one);
        lp.add(vec![(0, two), (1, two)], Sense::Eq, two);
        match lp.maximize(&[(0, Ratio::from_integer(3)), (1, one)]) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, Ratio::from_integer(3));
                assert_eq!(x, vec![one, Ratio::from_integer(0)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rhs_and_degenerate_vertex() {
        // -x - y <= -1 (x + y >= 1), x <= 1, y <= 1, x + y <= 2; minimize x + 2y.
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.add(vec![(0, int(-1)), (1, int(-1))], Sense::Le, int(-1))
            .add(vec![(0, int(1))], Sense::Le, int(1))
            .add(vec![(1, int(1))], Sense::Le, int(1))
            .add(vec![(0, int(1)), (1, int(1))], Sense::Le, int(2));
        match lp.maximize(&[(0, int(-1)), (1, int(-2))]) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, int(-1));
                assert_eq!(x, vec![int(1), int(0)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reused_basis_matches_fresh_solves() {
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.add(vec![(0, int(1)), (1, int(2))], Sense::Le, int(4))
            .add(vec![(0, int(3)), (1, int(1))], Sense::Le, int(6));
        let basis = lp.feasible_basis().unwrap();
        for obj in [vec![(0, int(1))], vec![(1, int(1))], vec![(0, int(1)), (1, int(1))]] {
            assert_eq!(basis.maximize(&obj), lp.maximize(&obj));
        }
        match lp.maximize(&[(0, int(1)), (1, int(1))]) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(14, 5)),
            other => panic!("{other:?}"),
        }
    }
}
