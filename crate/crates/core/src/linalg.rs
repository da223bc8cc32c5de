//! Dense exact linear solves.

use crate::num::Field;

/// Solves `A x = b` by Gauss-Jordan elimination with first-nonzero pivoting.
///
/// Returns `None` when `A` is singular.
pub fn solve<F: Field>(mut a: Vec<Vec<F>>, mut b: Vec<F>) -> Option<Vec<F>> {
    let n = a.len();
    assert_eq!(b.len(), n, "right-hand side length mismatch");
    for row in &a {
        assert_eq!(row.len(), n, "matrix must be square");
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = F::one() / a[col][col].clone();
        for j in col..n {
            a[col][j] = a[col][j].clone() * inv.clone();
        }
        b[col] = b[col].clone() * inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in col..n {
                let delta = factor.clone() * a[col][j].clone();
                a[r][j] = a[r][j].clone() - delta;
            }
            let delta = factor * b[col].clone();
            b[r] = b[r].clone() - delta;
        }
    }
    Some(b)
}

/// Solves `x = P x + c` restricted to the given index set, i.e.
/// `(I - P) x = c`, where `P` is given sparsely by rows.
pub fn solve_fixpoint<F: Field>(rows: &[Vec<(usize, F)>], rhs: &[F]) -> Option<Vec<F>> {
    let n = rows.len();
    let mut a = vec![vec![F::zero(); n]; n];
    for (i, row) in rows.iter().enumerate() {
        a[i][i] = F::one();
        for (j, p) in row {
            a[i][*j] = a[i][*j].clone() - p.clone();
        }
    }
    solve(a, rhs.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat, Rational};
    use num_rational::Ratio;

    #[test]
    fn solves_small_system() {
        // x + y = 1, x - y = 1/5
        let a = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
        let b = vec![int(1), rat(1, 5)];
        let x = solve(a, b).unwrap();
        assert_eq!(x, vec![rat(3, 5), rat(2, 5)]);
    }

    #[test]
    fn detects_singular() {
        let a = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert!(solve(a, vec![int(1), int(2)]).is_none());
    }

    #[test]
    fn generic_over_fixed_width_ratios() {
        let a = vec![
            vec![Ratio::new(0i128, 1), Ratio::new(1, 1)],
            vec![Ratio::new(2, 1), Ratio::new(1, 1)],
        ];
        let x = solve(a, vec![Ratio::new(1, 2), Ratio::new(3, 2)]).unwrap();
        assert_eq!(x, vec![Ratio::new(1, 2), Ratio::new(1, 2)]);
    }

    #[test]
    fn fixpoint_geometric() {
        // x = 1/2 x + 1/2  =>  x = 1
        let rows: Vec<Vec<(usize, Rational)>> = vec![vec![(0, rat(1, 2))]];
        assert_eq!(solve_fixpoint(&rows, &[rat(1, 2)]).unwrap(), vec![int(1)]);
    }
}
