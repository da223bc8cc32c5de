//! Pareto curves of the flow LP: exact vertex sets and ε-approximate covers.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{dominates, DownHull};
use crate::lp::multiobj::{unit, MultiObjectiveLp};
use crate::lp::simplex::{LinearProgram, LpOutcome, Sense};
use crate::model::strategy::Strategy;
use crate::num::{Field, Rational};

#[derive(Clone, Debug)]
pub struct ParetoPoint {
    pub value: Vec<Rational>,
    /// LP point realizing `value`.
    pub x: Vec<Rational>,
    pub strategy: Strategy,
    /// Weight vector whose optimum produced the point; `None` for points
    /// interpolated between two vertices.
    pub weight: Option<Vec<Rational>>,
}

#[derive(Clone, Debug)]
pub struct ParetoResult {
    pub points: Vec<ParetoPoint>,
    /// Zero for exact vertex sets.
    pub epsilon: Rational,
    pub objectives: Vec<String>,
    /// Whether every achievable vector is certified to be ε-covered.
    pub complete_cover: bool,
    /// Number of LP optimizations performed.
    pub lp_calls: usize,
}

impl ParetoResult {
    pub fn values(&self) -> Vec<Vec<Rational>> {
        self.points.iter().map(|p| p.value.clone()).collect()
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x.clone() * y.clone()).sum()
}

fn default_names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("objective{i}")).collect()
}

struct Solver<'a> {
    lp: &'a MultiObjectiveLp,
}

impl Solver<'_> {
    /// Maximizes `w`, breaking ties by maximizing each objective in turn
    /// along `order`, so the result is an extreme point of the value set.
    fn lexmax(&self, w: &[Rational], order: &[usize]) -> Result<(Vec<Rational>, Vec<Rational>)> {
        let lp = self.lp;
        let mut x = match lp.solve(&lp.weighted_objective(w)) {
            LpOutcome::Optimal { x, .. } => x,
            _ => return Err(Error::Internal("flow LP has no optimum".into())),
        };
        let mut program: LinearProgram<Rational> = lp.program.clone();
        let mut fixed = vec![w.to_vec()];
        for &i in order {
            let last = fixed.last().expect("nonempty");
            let value = dot(last, &lp.values(&x));
            program.add(lp.weighted_objective(last), Sense::Ge, value);
            let e = unit(lp.num_objectives(), i);
            x = match program.maximize(&lp.weighted_objective(&e)) {
                LpOutcome::Optimal { x, .. } => x,
                _ => return Err(Error::Internal("tie-breaking LP has no optimum".into())),
            };
            fixed.push(e);
        }
        Ok((lp.values(&x), x))
    }

    fn point(&self, w: &[Rational], order: &[usize]) -> Result<ParetoPoint> {
        let (value, x) = self.lexmax(w, order)?;
        Ok(ParetoPoint {
            strategy: self.lp.extract_strategy(&x)?,
            value,
            x,
            weight: Some(w.to_vec()),
        })
    }
}

/// Keeps the points that are vertices of the down-closed hull, sorted
/// lexicographically by value (hence by first coordinate).
fn keep_vertices(points: Vec<ParetoPoint>, k: usize) -> Vec<ParetoPoint> {
    let values: Vec<Vec<Rational>> = points.iter().map(|p| p.value.clone()).collect();
    let vertices = DownHull::new(k, &values).vertices();
    let mut out: Vec<ParetoPoint> = Vec::new();
    for v in vertices {
        if let Some(p) = points.iter().find(|p| p.value == v) {
            out.push(p.clone());
        }
    }
    out
}

/// Exact vertices of the Pareto curve for two objectives by dichotomic
/// search between lexicographic endpoints.
pub fn exact_vertices_biobjective(lp: &MultiObjectiveLp) -> Result<ParetoResult> {
    if lp.num_objectives() != 2 {
        return Err(Error::invalid("dichotomic search needs exactly two objectives"));
    }
    let s = Solver { lp };
    let mut calls = 0usize;
    let a = s.point(&unit(2, 0), &[1])?;
    let b = s.point(&unit(2, 1), &[0])?;
    calls += 4;
    let mut found = vec![a.clone()];
    if a.value != b.value {
        found.push(b.clone());
        let mut stack = vec![(a, b)];
        while let Some((a, b)) = stack.pop() {
            // a has the larger first coordinate, b the larger second.
            let w = vec![
                b.value[1].clone() - a.value[1].clone(),
                a.value[0].clone() - b.value[0].clone(),
            ];
            if w.iter().all(Zero::is_zero) {
                continue;
            }
            let c = s.point(&w, &[0])?;
            calls += 2;
            if dot(&w, &c.value) > dot(&w, &a.value) {
                found.push(c.clone());
                stack.push((a, c.clone()));
                stack.push((c, b));
            }
        }
    }
    Ok(ParetoResult {
        points: keep_vertices(found, 2),
        epsilon: Rational::zero(),
        objectives: default_names(2),
        complete_cover: true,
        lp_calls: calls,
    })
}

/// Exact vertex set for any number of objectives: optimize along every
/// candidate facet normal of the current hull until none moves it.
pub fn exact_vertices(lp: &MultiObjectiveLp) -> Result<ParetoResult> {
    let k = lp.num_objectives();
    if k == 0 {
        return Err(Error::invalid("at least one objective is required"));
    }
    if k == 2 {
        return exact_vertices_biobjective(lp);
    }
    let s = Solver { lp };
    let order: Vec<usize> = (0..k).collect();
    let mut found: Vec<ParetoPoint> = (0..k)
        .into_par_iter()
        .map(|i| {
            let rest: Vec<usize> = order.iter().copied().filter(|&j| j != i).collect();
            s.point(&unit(k, i), &rest)
        })
        .collect::<Result<_>>()?;
    let mut calls = k * k;
    let mut settled: Vec<Vec<Rational>> = Vec::new();
    loop {
        let values: Vec<Vec<Rational>> = found.iter().map(|p| p.value.clone()).collect();
        let hull = DownHull::new(k, &values);
        let normals: Vec<Vec<Rational>> = hull
            .normals()
            .into_iter()
            .filter(|w| !settled.contains(w))
            .collect();
        if normals.is_empty() {
            break;
        }
        calls += normals.len() * (k + 1);
        let results: Vec<(Vec<Rational>, ParetoPoint)> = normals
            .into_par_iter()
            .map(|w| s.point(&w, &order).map(|p| (w, p)))
            .collect::<Result<_>>()?;
        let mut grew = false;
        for (w, p) in results {
            let h = hull.support(&w).expect("nonempty hull");
            if dot(&w, &p.value) > h {
                if !found.iter().any(|q| q.value == p.value) {
                    found.push(p);
                    grew = true;
                }
            } else {
                settled.push(w);
            }
        }
        if !grew {
            break;
        }
    }
    Ok(ParetoResult {
        points: keep_vertices(found, k),
        epsilon: Rational::zero(),
        objectives: default_names(k),
        complete_cover: true,
        lp_calls: calls,
    })
}

fn mix(a: &ParetoPoint, b: &ParetoPoint, s: &Rational, lp: &MultiObjectiveLp) -> Result<ParetoPoint> {
    let one = Rational::one();
    let x: Vec<Rational> = a
        .x
        .iter()
        .zip(&b.x)
        .map(|(p, q)| (one.clone() - s.clone()) * p.clone() + s.clone() * q.clone())
        .collect();
    Ok(ParetoPoint {
        value: lp.values(&x),
        strategy: lp.extract_strategy(&x)?,
        x,
        weight: None,
    })
}

/// Points on the segment from `a` to `b` (exclusive) such that together
/// with the endpoints every point of the segment is ε-covered.
///
/// From the current parameter `s`, the current point covers the segment up
/// to the first parameter where an increasing coordinate exceeds `(1+ε)`
/// times its value; the next point is placed as far out as possible while
/// still covering that parameter through the decreasing coordinates.
fn densify_segment(
    a: &ParetoPoint,
    b: &ParetoPoint,
    eps: &Rational,
    lp: &MultiObjectiveLp,
) -> Result<Vec<ParetoPoint>> {
    let one = Rational::one();
    let f = one.clone() + eps.clone();
    let d: Vec<Rational> = b.value.iter().zip(&a.value).map(|(x, y)| x.clone() - y.clone()).collect();
    let at = |s: &Rational, j: usize| a.value[j].clone() + s.clone() * d[j].clone();
    let mut out = Vec::new();
    let mut s = Rational::zero();
    loop {
        // Reach of the current point along increasing coordinates.
        let mut reach = one.clone();
        for j in (0..d.len()).filter(|&j| d[j].gt_zero()) {
            // a_j + u d_j = f (a_j + s d_j)
            let u = (f.clone() * at(&s, j) - a.value[j].clone()) / d[j].clone();
            if u < reach {
                reach = u;
            }
        }
        if reach >= one {
            break;
        }
        // Furthest next point that still covers `reach` downward.
        let mut next = one.clone();
        for j in (0..d.len()).filter(|&j| d[j].lt_zero()) {
            // a_j + u d_j = at(reach, j) / f
            let u = (at(&reach, j) / f.clone() - a.value[j].clone()) / d[j].clone();
            if u < next {
                next = u;
            }
        }
        if next >= one {
            break;
        }
        if next <= s {
            return Err(Error::Internal("segment densification made no progress".into()));
        }
        out.push(mix(a, b, &next, lp)?);
        s = next;
    }
    Ok(out)
}

/// Pairs of vertices spanning an edge of the down-closed hull.
fn hull_edges(hull: &DownHull<Rational>, vertices: &[Vec<Rational>]) -> Vec<(usize, usize)> {
    let k = hull.dim();
    let normals = hull.normals();
    let mut out = Vec::new();
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            let tight: Vec<Vec<Rational>> = normals
                .iter()
                .filter(|w| {
                    let h = hull.support(w).expect("nonempty");
                    dot(w, &vertices[i]) == h && dot(w, &vertices[j]) == h
                })
                .cloned()
                .collect();
            if rank(tight) + 1 >= k {
                out.push((i, j));
            }
        }
    }
    out
}

fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let Some(cols) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            if rows[i][c].is_zero() {
                continue;
            }
            let f = rows[i][c].clone() / rows[r][c].clone();
            for j in c..cols {
                let d = f.clone() * rows[r][j].clone();
                rows[i][j] = rows[i][j].clone() - d;
            }
        }
        r += 1;
    }
    r
}

/// An ε-approximate Pareto set.
///
/// One objective: the optimum. Two objectives: the exact vertices plus
/// interpolated points along every edge of the curve, which covers every
/// achievable vector. More objectives: the exact vertices plus densified
/// hull edges; points inside two-dimensional faces are not certified, which
/// `complete_cover` reports.
pub fn epsilon_pareto(lp: &MultiObjectiveLp, eps: &Rational) -> Result<ParetoResult> {
    if !eps.gt_zero() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let k = lp.num_objectives();
    if k == 0 {
        return Err(Error::invalid("at least one objective is required"));
    }
    if k == 1 {
        let p = Solver { lp }.point(&[Rational::one()], &[])?;
        return Ok(ParetoResult {
            points: vec![p],
            epsilon: eps.clone(),
            objectives: default_names(1),
            complete_cover: true,
            lp_calls: 1,
        });
    }
    let exact = exact_vertices(lp)?;
    let vertices = exact.values();
    let edges: Vec<(usize, usize)> = if k == 2 {
        (1..exact.points.len()).map(|i| (i - 1, i)).collect()
    } else {
        hull_edges(&DownHull::new(k, &vertices), &vertices)
    };
    let mut points = exact.points.clone();
    for (i, j) in edges {
        points.extend(densify_segment(&exact.points[i], &exact.points[j], eps, lp)?);
    }
    points.sort_by(|p, q| p.value.partial_cmp(&q.value).expect("total order"));
    points.dedup_by(|p, q| p.value == q.value);
    Ok(ParetoResult {
        points: non_dominated(points),
        epsilon: eps.clone(),
        objectives: default_names(k),
        complete_cover: k <= 2,
        lp_calls: exact.lp_calls,
    })
}

fn non_dominated(points: Vec<ParetoPoint>) -> Vec<ParetoPoint> {
    (0..points.len())
        .filter(|&i| {
            !points.iter().enumerate().any(|(j, q)| {
                j != i && dominates(&q.value, &points[i].value) && q.value != points[i].value
            })
        })
        .map(|i| points[i].clone())
        .collect()
}

/// The probes not ε-covered by any point, i.e. without a `t` such that
/// `r ≤ (1+ε)·t`.
pub fn check_coverage(points: &[Vec<Rational>], probes: &[Vec<Rational>], eps: &Rational) -> Vec<Vec<Rational>> {
    let f = Rational::one() + eps.clone();
    probes
        .iter()
        .filter(|r| {
            !points.iter().any(|t| {
                r.iter().zip(t).all(|(ri, ti)| *ri <= f.clone() * ti.clone())
            })
        })
        .cloned()
        .collect()
}
