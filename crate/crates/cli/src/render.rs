//! Text, CSV and JSON renderings. Every number is printed exactly, with a
//! 12-place decimal alongside for reading.

use momc_core::num::{decimal12, format_rational, Rational};
use momc_core::pareto::ParetoResult;
use serde_json::json;

pub fn exact(r: &Rational) -> String {
    format!("{} ({})", format_rational(r), decimal12(r))
}

pub fn values(names: &[String], values: &[Rational]) -> String {
    names
        .iter()
        .zip(values)
        .map(|(n, v)| format!("  {n}: {}\n", exact(v)))
        .collect()
}

/// Points in decreasing order of the first coordinate, ties broken by the
/// remaining ones; an empty result is a single all-zero row.
pub fn sorted_points(res: &ParetoResult) -> Vec<(Option<usize>, Vec<Rational>)> {
    let mut rows: Vec<(Option<usize>, Vec<Rational>)> =
        res.points.iter().enumerate().map(|(i, p)| (Some(i), p.value.clone())).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1));
    if rows.is_empty() {
        rows.push((None, vec![Rational::from_integer(0.into()); res.objectives.len()]));
    }
    rows
}

pub fn pareto_csv(res: &ParetoResult) -> String {
    let decimals = res.objectives.iter().map(|n| format!("{n}_decimal"));
    let header: Vec<String> = res.objectives.iter().cloned().chain(decimals).collect();
    let mut out = header.join(",") + "\n";
    for (_, v) in sorted_points(res) {
        let cells: Vec<String> = v.iter().map(format_rational).chain(v.iter().map(decimal12)).collect();
        out += &(cells.join(",") + "\n");
    }
    out
}

pub fn pareto_json(res: &ParetoResult) -> String {
    let points: Vec<_> = sorted_points(res)
        .into_iter()
        .map(|(_, v)| {
            json!({
                "value": v.iter().map(format_rational).collect::<Vec<_>>(),
                "decimal": v.iter().map(decimal12).collect::<Vec<_>>(),
            })
        })
        .collect();
    let doc = json!({
        "objectives": res.objectives,
        "epsilon": format_rational(&res.epsilon),
        "complete_cover": res.complete_cover,
        "points": points,
    });
    serde_json::to_string_pretty(&doc).expect("JSON rendering cannot fail") + "\n"
}
