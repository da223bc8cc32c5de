//! Exact membership in the downward closure of a convex hull.
//!
//! `D = conv(P) − ℝ^k_{≥0}` is a full-dimensional polyhedron whose facets
//! are spanned by some points of `P` together with some negative coordinate
//! directions. Every such spanning family yields a candidate normal through
//! the generalized cross product; the nonnegative ones give valid
//! inequalities `w·x ≤ max_{p∈P} w·p`, and together they cut out `D`
//! exactly. This is brute force and intended for small point sets.

use crate::num::Field;

#[derive(Clone, Debug)]
pub struct DownHull<F> {
    dim: usize,
    points: Vec<Vec<F>>,
    /// `(w, max_p w·p)`, with `Σ w = 1`.
    facets: Vec<(Vec<F>, F)>,
}

fn dot<F: Field>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// `a ≥ b` componentwise.
pub fn dominates<F: Field>(a: &[F], b: &[F]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// The points not weakly dominated by another point, deduplicated, in
/// lexicographic order.
pub fn pareto_filter<F: Field>(points: &[Vec<F>]) -> Vec<Vec<F>> {
    let mut out: Vec<Vec<F>> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let beaten = points.iter().enumerate().any(|(j, q)| {
            j != i && dominates(q, p) && (q != p || j < i)
        });
        if !beaten {
            out.push(p.clone());
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("exact scalars are totally ordered"));
    out
}

fn determinant<F: Field>(mut a: Vec<Vec<F>>) -> F {
    let n = a.len();
    let mut det = F::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return F::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det = det * pivot.clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / pivot.clone();
            for j in col..n {
                let d = f.clone() * a[col][j].clone();
                a[r][j] = a[r][j].clone() - d;
            }
        }
    }
    det
}

/// Vector orthogonal to the `k−1` given vectors in `ℝ^k` (zero when they are
/// linearly dependent).
fn cross<F: Field>(vectors: &[Vec<F>], k: usize) -> Vec<F> {
    (0..k)
        .map(|c| {
            let minor: Vec<Vec<F>> = vectors
                .iter()
                .map(|v| (0..k).filter(|&j| j != c).map(|j| v[j].clone()).collect())
                .collect();
            let d = determinant(minor);
            if c % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect()
}

fn combinations(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        f(&idx);
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + n - r) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

impl<F: Field> DownHull<F> {
    /// Hull of `points` in `ℝ^dim`. An empty point set gives the empty set.
    pub fn new(dim: usize, points: &[Vec<F>]) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        assert!(points.iter().all(|p| p.len() == dim), "point dimension mismatch");
        let points = pareto_filter(points);
        let mut normals: Vec<Vec<F>> = Vec::new();
        if !points.is_empty() {
            for m in 1..=dim.min(points.len()) {
                combinations(points.len(), m, |chosen| {
                    combinations(dim, dim - m, |axes| {
                        let base = &points[chosen[0]];
                        let mut vs: Vec<Vec<F>> = chosen[1..]
                            .iter()
                            .map(|&i| points[i].iter().zip(base).map(|(a, b)| a.clone() - b.clone()).collect())
                            .collect();
                        for &j in axes {
                            vs.push((0..dim).map(|c| if c == j { F::one() } else { F::zero() }).collect());
                        }
                        let mut w = cross(&vs, dim);
                        if w.iter().all(|x| x.is_zero()) {
                            return;
                        }
                        if w.iter().any(Field::lt_zero) {
                            if w.iter().any(Field::gt_zero) {
                                return;
                            }
                            w = w.into_iter().map(|x| -x).collect();
                        }
                        let s = w.iter().fold(F::zero(), |a, x| a + x.clone());
                        let w: Vec<F> = w.into_iter().map(|x| x / s.clone()).collect();
                        if !normals.contains(&w) {
                            normals.push(w);
                        }
                    });
                });
            }
        }
        let facets = normals
            .into_iter()
            .map(|w| {
                let h = points
                    .iter()
                    .map(|p| dot(&w, p))
                    .reduce(|a, b| if b > a { b } else { a })
                    .expect("nonempty");
                (w, h)
            })
            .collect();
        DownHull { dim, points, facets }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Non-dominated generating points.
    pub fn points(&self) -> &[Vec<F>] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Normals of the valid inequalities describing the hull, each scaled to
    /// sum to 1.
    pub fn normals(&self) -> Vec<Vec<F>> {
        self.facets.iter().map(|(w, _)| w.clone()).collect()
    }

    /// `max_{x∈D} w·x` for `w ≥ 0`.
    pub fn support(&self, w: &[F]) -> Option<F> {
        self.points.iter().map(|p| dot(w, p)).reduce(|a, b| if b > a { b } else { a })
    }

    pub fn contains(&self, r: &[F]) -> bool {
        !self.is_empty() && self.facets.iter().all(|(w, h)| dot(w, r) <= *h)
    }

    /// Whether some `x ∈ D` has `x ≥ r` with strict inequality on `strict`.
    pub fn contains_strict(&self, r: &[F], strict: &[usize]) -> bool {
        if !self.contains(r) {
            return false;
        }
        self.facets
            .iter()
            .filter(|(w, h)| dot(w, r) == *h)
            .all(|(w, _)| strict.iter().all(|&j| w[j].is_zero()))
    }

    /// Extreme points of `D`, in lexicographic order.
    pub fn vertices(&self) -> Vec<Vec<F>> {
        (0..self.points.len())
            .filter(|&i| {
                let others: Vec<Vec<F>> = self
                    .points
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, p)| p.clone())
                    .collect();
                !DownHull::new(self.dim, &others).contains(&self.points[i])
            })
            .map(|i| self.points[i].clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat, Rational};
    use num_rational::Ratio;

    fn split() -> DownHull<Rational> {
        DownHull::new(
            2,
            &[
                vec![rat(3, 5), int(0)],
                vec![int(0), rat(4, 5)],
                vec![rat(1, 2), rat(1, 2)],
                vec![rat(3, 10), rat(2, 5)],
            ],
        )
    }

    #[test]
    fn membership_in_the_plane() {
        let h = split();
        assert!(h.contains(&[rat(1, 2), rat(1, 2)]));
        assert!(h.contains(&[rat(3, 10), rat(2, 5)]));
        assert!(h.contains(&[int(0), int(0)]));
        // on the edge between (3/5,0) and (1/2,1/2), second coordinate at 11/20 is 1/4
        assert!(h.contains(&[rat(11, 20), rat(1, 4)]));
        assert!(!h.contains(&[rat(11, 20), rat(3, 10)]));
        assert!(!h.contains(&[rat(61, 100), int(0)]));
    }

    #[test]
    fn strict_membership_at_the_boundary() {
        let h = split();
        let r = [rat(1, 2), rat(1, 2)];
        assert!(h.contains_strict(&r, &[]));
        assert!(!h.contains_strict(&r, &[0]));
        assert!(!h.contains_strict(&r, &[0, 1]));
        // (0, 4/5) with the first coordinate strict: impossible without
        // lowering the second, which is not strict
        assert!(!h.contains_strict(&[int(0), rat(4, 5)], &[0]));
        assert!(h.contains_strict(&[int(0), rat(3, 4)], &[0]));
        // on the x_2 = 0 boundary, strictness in coordinate 0 is possible
        assert!(h.contains_strict(&[rat(1, 2), int(0)], &[0]));
        assert!(!h.contains_strict(&[rat(3, 5), int(0)], &[0]));
    }

    #[test]
    fn vertices_drop_interior_points() {
        let h = split();
        assert_eq!(
            h.vertices(),
            vec![
                vec![int(0), rat(4, 5)],
                vec![rat(1, 2), rat(1, 2)],
                vec![rat(3, 5), int(0)],
            ]
        );
    }

    #[test]
    fn three_dimensions_over_machine_rationals() {
        let one = Ratio::<i64>::from_integer(1);
        let zero = Ratio::from_integer(0);
        let half = Ratio::new(1, 2);
        let pts = vec![vec![one, zero, zero], vec![zero, one, zero], vec![zero, zero, one]];
        let h = DownHull::new(3, &pts);
        assert!(h.contains(&[Ratio::new(1, 3); 3]));
        assert!(!h.contains(&[half, half, Ratio::new(1, 10)]));
        assert!(!h.contains_strict(&[Ratio::new(1, 3); 3], &[2]));
        assert!(h.contains_strict(&[Ratio::new(1, 4); 3], &[0, 1, 2]));
        assert_eq!(h.vertices().len(), 3);
    }

    #[test]
    fn one_dimension_and_empty() {
        let h = DownHull::new(1, &[vec![rat(1, 3)], vec![rat(1, 5)]]);
        assert_eq!(h.points().len(), 1);
        assert!(h.contains(&[rat(1, 3)]));
        assert!(!h.contains_strict(&[rat(1, 3)], &[0]));
        let e = DownHull::<Rational>::new(2, &[]);
        assert!(!e.contains(&[int(0), int(0)]));
    }
}
