use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use momc_core::automata::parse_automaton;
use momc_core::model::format::{mdp_to_json, parse_mdp};
use momc_core::model::strategy::parse_strategy;
use momc_core::num::{format_rational, int, parse_rational, Rational};
use momc_core::objectives::RouteChoice;
use momc_core::oracle::{
    bound_claims, gen_hard_instance, path_pareto_vertices, validate_strategy, Claim, ValidationReport,
};
use momc_core::qualitative::{decide_qualitative, QualitativeQuery};
use momc_core::query::{
    check_assume_guarantee, evaluate, evaluate_forall, parse_query_file, EvalOptions, Method, QueryOutcome,
    Statement,
};
use momc_core::{Error, Mdp, Problem, Property, RabinAutomaton, Strategy};

use crate::args::{
    AchievableArgs, CheckArgs, Format, GenHardArgs, ObjectiveArgs, ParetoArgs, QualitativeArgs, QueryArgs, Route,
};
use crate::render;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
}

impl From<bool> for Verdict {
    fn from(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(PathBuf, Error),
    Core(Error),
    SelfCheck(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Input(p, e) => write!(f, "{}: {e}", p.display()),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::SelfCheck(m) => write!(f, "self-check failed\n{m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<Verdict, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(path.into(), e.into()))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(path.into(), e.into()))
}

fn load_model(path: &Path) -> Result<Mdp, Failure> {
    parse_mdp(&read(path)?).map_err(|e| Failure::Input(path.into(), e))
}

impl From<Route> for RouteChoice {
    fn from(r: Route) -> Self {
        match r {
            Route::Auto => RouteChoice::Auto,
            Route::Reduction => RouteChoice::Reduction,
        }
    }
}

/// `LABEL`, `reach:L`, `avoid:L`, `buchi:L`, `cobuchi:L` or `automaton:FILE`.
fn property(text: &str) -> Result<Property, Failure> {
    let Some((kind, arg)) = text.split_once(':') else {
        return Ok(Property::Reach(text.into()));
    };
    Ok(match kind {
        "reach" => Property::Reach(arg.into()),
        "avoid" => Property::Avoid(arg.into()),
        "buchi" => Property::Automaton(RabinAutomaton::infinitely_often(arg)),
        "cobuchi" => Property::Automaton(RabinAutomaton::finitely_often(arg)),
        "automaton" => {
            let path = Path::new(arg);
            Property::Automaton(parse_automaton(&read(path)?).map_err(|e| Failure::Input(path.into(), e))?)
        }
        _ => return Err(Failure::Usage(format!("unknown property kind {kind:?} in {text:?}"))),
    })
}

fn properties(specs: &[String]) -> Result<Vec<Property>, Failure> {
    specs.iter().map(|s| property(s)).collect()
}

/// The model and its objectives; without `--targets`, reach every label.
fn objectives(a: &ObjectiveArgs) -> Result<(Mdp, Vec<Property>, Vec<String>), Failure> {
    let m = load_model(&a.model)?;
    let names: Vec<String> = if a.targets.is_empty() {
        m.propositions().iter().cloned().collect()
    } else {
        a.targets.clone()
    };
    if names.is_empty() {
        return Err(Failure::Usage("no objectives: the model has no labels and --targets is empty".into()));
    }
    Ok((m, properties(&names)?, names))
}

fn problem(a: &ObjectiveArgs) -> Result<Problem, Failure> {
    let (m, props, names) = objectives(a)?;
    Ok(Problem::with_route(&m, props, names, a.route.into())?)
}

fn rationals(texts: &[String]) -> Result<Vec<Rational>, Failure> {
    texts
        .iter()
        .map(|t| parse_rational(t).map_err(|e| Failure::Usage(format!("{t:?}: {e}"))))
        .collect()
}

/// Round-trips the strategy through its file format and re-validates it.
fn self_check(
    m: &Mdp,
    props: &[Property],
    names: &[String],
    s: &Strategy,
    claims: &[Claim],
) -> Result<ValidationReport, Failure> {
    let reread = parse_strategy(&s.to_json(m), m)?;
    let report = validate_strategy(m, props, &reread, claims)?;
    if report.passed() {
        Ok(report)
    } else {
        Err(Failure::SelfCheck(report.render(names)))
    }
}

/// Writes the strategy to `out`, or appends it to the printed report.
fn emit_strategy(out: &mut String, m: &Mdp, s: &Strategy, path: Option<&Path>) -> Result<(), Failure> {
    let json = s.to_json(m);
    match path {
        Some(p) => {
            write(p, &json)?;
            out.push_str(&format!("strategy: {}\n", p.display()));
        }
        None => {
            out.push_str("strategy:\n");
            out.push_str(&json);
        }
    }
    Ok(())
}

pub fn validate(path: &Path) -> Outcome {
    let m = load_model(path)?;
    let reachable = m.reachable();
    let unreachable: Vec<&str> = (0..m.num_states()).filter(|&v| !reachable[v]).map(|v| m.name(v)).collect();
    let absorbing = (0..m.num_states()).filter(|&v| m.is_absorbing(v)).count();
    let mut out = format!(
        "states: {}\nactions: {}\nlabels: {}\ninitial: {}\nabsorbing states: {absorbing}\n",
        m.num_states(),
        m.num_actions(),
        m.propositions().iter().cloned().collect::<Vec<_>>().join(", "),
        m.init()
            .iter()
            .map(|(v, p)| format!("{} {}", m.name(*v), format_rational(p)))
            .collect::<Vec<_>>()
            .join(", "),
    );
    if !unreachable.is_empty() {
        out += &format!("warning: unreachable states: {}\n", unreachable.join(", "));
    }
    out += "result: valid\n";
    print!("{out}");
    Ok(Verdict::Yes)
}

pub fn achievable(a: &AchievableArgs, check: bool) -> Outcome {
    let p = problem(&a.objectives)?;
    let k = p.num_objectives();
    let r = rationals(&a.bound)?;
    if r.len() != k {
        return Err(Failure::Usage(format!("{k} objectives but {} bounds", r.len())));
    }
    if let Some(&i) = a.strict.iter().find(|&&i| i == 0 || i > k) {
        return Err(Failure::Usage(format!("strict index {i} is outside 1..={k}")));
    }
    let strict: Vec<usize> = a.strict.iter().map(|i| i - 1).collect();
    let claims = bound_claims(&r, &strict);
    let mut out = String::new();
    for (n, c) in p.names.iter().zip(&claims) {
        out += &format!("objective {n}: {c}\n");
    }
    let d = p.achievable(&r, &strict)?;
    out += &format!("result: {}\n", if d.achievable { "yes" } else { "no" });
    if let (true, Some(s)) = (d.achievable, &d.strategy) {
        if check {
            let report = self_check(&p.source, &p.properties, &p.names, s, &claims)?;
            out += "values:\n";
            out += &render::values(&p.names, &report.values);
            out += "self-check: pass\n";
        } else if let Some(v) = &d.values {
            out += "values:\n";
            out += &render::values(&p.names, v);
        }
        emit_strategy(&mut out, &p.source, s, a.out.as_deref())?;
    }
    print!("{out}");
    Ok(d.achievable.into())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Trivial => "trivial",
        Method::Qualitative => "qualitative",
        Method::Quantitative => "quantitative",
    }
}

fn witness_report(out: &mut String, m: &Mdp, o: &QueryOutcome, label: &str, path: Option<&Path>) -> Result<(), Failure> {
    out.push_str(&format!("disjuncts: {}\n", o.normalized.disjuncts.len()));
    let Some(w) = &o.witness else {
        return Ok(());
    };
    let atoms: Vec<String> = o.normalized.disjuncts[w.disjunct]
        .iter()
        .map(|a| format!("Pr({}) {}", a.property, a.claim()))
        .collect();
    out.push_str(&format!(
        "{label}: disjunct {} [{}] via {}\n",
        w.disjunct + 1,
        if atoms.is_empty() { "true".into() } else { atoms.join(" & ") },
        method_name(w.method)
    ));
    if let Some((names, report)) = &w.report {
        out.push_str(&report.render(names));
        out.push_str("self-check: pass\n");
    }
    emit_strategy(out, m, &w.strategy, path)
}

pub fn query(a: &QueryArgs, check: bool) -> Outcome {
    let m = load_model(&a.model)?;
    let text = read(&a.query)?;
    let file = parse_query_file(&text, a.query.parent()).map_err(|e| Failure::Input(a.query.clone(), e))?;
    let opts = EvalOptions {
        dnf_cap: a.dnf_cap,
        route: a.route.into(),
        qualitative: !a.no_qualitative,
        self_check: check,
    };
    let mut out = String::new();
    let verdict = match &file.statement {
        Statement::Exists(q) => {
            out += &format!("query: exists {q}\n");
            let o = evaluate(&m, &file.table, q, &opts)?;
            out += &format!("result: {}\n", if o.sat { "sat" } else { "unsat" });
            witness_report(&mut out, &m, &o, "witness", a.out.as_deref())?;
            o.sat
        }
        Statement::Forall(q) => {
            out += &format!("query: forall {q}\n");
            let o = evaluate_forall(&m, &file.table, q, &opts)?;
            out += &format!("result: {}\n", if o.sat { "holds" } else { "fails" });
            witness_report(&mut out, &m, &o, "counterexample", a.out.as_deref())?;
            o.sat
        }
        Statement::AssumeGuarantee { assume, guarantee } => {
            out += &format!(
                "query: assume Pr({}) >= {} guarantee Pr({}) >= {}\n",
                assume.0,
                format_rational(&assume.1),
                guarantee.0,
                format_rational(&guarantee.1)
            );
            let phi1 = file.table.get(&assume.0)?;
            let bar = file
                .table
                .complements
                .of(&guarantee.0)
                .ok_or_else(|| Error::MissingComplement(guarantee.0.clone()))?;
            let phi2_bar = file.table.get(bar)?;
            let g = check_assume_guarantee(&m, phi1, &assume.1, phi2_bar, &guarantee.1, opts.route)?;
            out += &format!("result: {}\n", if g.holds { "holds" } else { "fails" });
            if let Some((s, p1, p2)) = &g.counterexample {
                out += "counterexample:\n";
                out += &render::values(&[assume.0.clone(), guarantee.0.clone()], &[p1.clone(), p2.clone()]);
                emit_strategy(&mut out, &m, s, a.out.as_deref())?;
            }
            g.holds
        }
    };
    print!("{out}");
    Ok(verdict.into())
}

pub fn qualitative(a: &QualitativeArgs, check: bool) -> Outcome {
    let m = load_model(&a.model)?;
    if a.sure.is_empty() && a.positive.is_empty() {
        return Err(Failure::Usage("give at least one of --sure and --positive".into()));
    }
    let names: Vec<String> = a.sure.iter().chain(&a.positive).cloned().collect();
    let props = properties(&names)?;
    let automata: Vec<RabinAutomaton> = props.iter().map(Property::automaton).collect();
    let q = QualitativeQuery {
        sure: (0..a.sure.len()).collect(),
        positive: (a.sure.len()..names.len()).collect(),
    };
    let o = decide_qualitative(&m, &automata, &q)?;
    let mut out = format!(
        "product states: {} ({} surviving)\nresult: {}\n",
        o.product_states,
        o.surviving_states,
        if o.satisfiable { "yes" } else { "no" }
    );
    if let (true, Some(s)) = (o.satisfiable, &o.strategy) {
        if check {
            let claims: Vec<Claim> = (0..names.len())
                .map(|i| if i < a.sure.len() { Claim::at_least(int(1)) } else { Claim::above(int(0)) })
                .collect();
            out += &self_check(&m, &props, &names, s, &claims)?.render(&names);
            out += "self-check: pass\n";
        }
        emit_strategy(&mut out, &m, s, a.out.as_deref())?;
    }
    print!("{out}");
    Ok(o.satisfiable.into())
}

fn check_points(p: &Problem, res: &momc_core::pareto::ParetoResult) -> Result<(), Failure> {
    for pt in &res.points {
        let claims: Vec<Claim> = pt.value.iter().cloned().map(Claim::at_least).collect();
        self_check(&p.source, &p.properties, &p.names, &pt.strategy, &claims)?;
    }
    Ok(())
}

pub fn pareto(a: &ParetoArgs, check: bool) -> Outcome {
    let p = problem(&a.objectives)?;
    let res = if a.exact2 {
        if p.num_objectives() != 2 {
            return Err(Failure::Usage(format!("--exact2 needs 2 objectives, got {}", p.num_objectives())));
        }
        p.pareto_vertices()?
    } else {
        let text = a.epsilon.as_deref().unwrap_or_default();
        let eps = parse_rational(text).map_err(|e| Failure::Usage(format!("--epsilon {text:?}: {e}")))?;
        if eps <= int(0) {
            return Err(Failure::Usage("--epsilon must be positive".into()));
        }
        p.pareto_epsilon(&eps)?
    };
    if check {
        check_points(&p, &res)?;
    }
    let text = match a.format {
        Format::Csv => render::pareto_csv(&res),
        Format::Json => render::pareto_json(&res),
    };
    match &a.out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(dir) = &a.strategies {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(dir.clone(), e.into()))?;
        for (row, (i, _)) in render::sorted_points(&res).into_iter().enumerate() {
            if let Some(i) = i {
                write(&dir.join(format!("point-{}.json", row + 1)), &res.points[i].strategy.to_json(&p.source))?;
            }
        }
    }
    if !res.complete_cover {
        eprintln!("momc: warning: the cover is not certified complete for every achievable vector");
    }
    Ok(Verdict::Yes)
}

pub fn vertices(a: &ObjectiveArgs, check: bool) -> Outcome {
    let p = problem(a)?;
    if p.num_objectives() != 2 {
        return Err(Failure::Usage(format!("vertices needs 2 objectives, got {}", p.num_objectives())));
    }
    let res = p.pareto_vertices()?;
    if check {
        check_points(&p, &res)?;
    }
    let mut out = format!("objectives: {}\nvertices: {}\n", p.names.join(", "), res.points.len());
    for (_, v) in render::sorted_points(&res) {
        let cells: Vec<String> = v.iter().map(render::exact).collect();
        out += &format!("({})\n", cells.join(", "));
    }
    print!("{out}");
    Ok(Verdict::Yes)
}

pub fn check_strategy(a: &CheckArgs) -> Outcome {
    let (m, props, names) = objectives(&a.objectives)?;
    let s = parse_strategy(&read(&a.strategy)?, &m).map_err(|e| Failure::Input(a.strategy.clone(), e))?;
    let claims: Vec<Claim> = if a.claims.is_empty() {
        vec![Claim::at_least(int(0)); props.len()]
    } else {
        a.claims
            .iter()
            .map(|c| c.parse::<Claim>().map_err(|e| Failure::Usage(format!("claim {c:?}: {e}"))))
            .collect::<Result<_, _>>()?
    };
    if claims.len() != props.len() {
        return Err(Failure::Usage(format!("{} objectives but {} claims", props.len(), claims.len())));
    }
    let report = validate_strategy(&m, &props, &s, &claims)?;
    print!("{}", report.render(&names));
    Ok(report.passed().into())
}

pub fn gen_hard(a: &GenHardArgs) -> Outcome {
    let inst = gen_hard_instance(a.n, a.seed).map_err(|e| Failure::Usage(e.to_string()))?;
    let json = mdp_to_json(&inst.mdp);
    match &a.out {
        Some(path) => {
            write(path, &json)?;
            let costs: Vec<(u64, u64)> = inst.paths().iter().map(|p| (p.c, p.d)).collect();
            println!(
                "layers: {}\nstates: {}\npaths: {}\npath pareto vertices: {}\nmodel: {}",
                inst.layers,
                inst.mdp.num_states(),
                costs.len(),
                path_pareto_vertices(&costs).len(),
                path.display()
            );
        }
        None => print!("{json}"),
    }
    Ok(Verdict::Yes)
}
