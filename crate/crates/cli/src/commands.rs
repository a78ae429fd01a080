//! Command dispatch and report assembly.

use std::time::Instant;

use fedosov_core::fedosov_solver::{
    check_invariants, lift, poisson_morphism_residual, solve_fundamental, SolveOptions, StepPath,
};
use fedosov_core::groupoid_builder::{
    build_change_of_variables, change_of_variables_residual, groupoid_checks, separation_check, source_target,
    validate_pq, GroupoidMaps,
};
use fedosov_core::poisson_geometry::{conn_analyze, nonzero_entries3, validate_poisson, ObstructionCertificate};
use fedosov_core::{BasePolynomial, FibreSeries, FundamentalSolution};
use serde_json::{json, Map, Value};

use crate::serialize as ser;
use crate::spec::{Geometry, Problem, ProblemSpec};
use crate::{demos, resolve_order, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Solve,
    Lift,
    Groupoid,
    Check,
    Demo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Validate => "validate",
            Self::Solve => "solve",
            Self::Lift => "lift",
            Self::Groupoid => "groupoid",
            Self::Check => "check",
            Self::Demo => "demo",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub order: Option<u32>,
    /// Restricts lifts and groupoid images to these named functions.
    pub functions: Vec<String>,
    /// Adds wall-clock timings, which makes the report non-reproducible.
    pub timing: bool,
    /// Raw value of the order environment variable, if set.
    pub env_order: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

impl Outcome {
    pub fn text(&self) -> String {
        ser::to_text(&self.report)
    }
}

struct Check {
    name: String,
    passed: bool,
    failures: usize,
    residuals: Vec<Value>,
}

impl Check {
    fn from_residuals(name: impl Into<String>, residuals: Vec<Value>) -> Self {
        Self { name: name.into(), passed: residuals.is_empty(), failures: residuals.len(), residuals }
    }

    fn flag(name: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), passed, failures: usize::from(!passed), residuals: Vec::new() }
    }

    fn to_json(&self) -> Value {
        json!({ "name": self.name, "passed": self.passed, "failures": self.failures, "residuals": self.residuals })
    }
}

#[derive(Default)]
struct Body {
    checks: Vec<Check>,
    outputs: Map<String, Value>,
    infeasible: bool,
    order: Option<u32>,
}

struct Timer {
    on: bool,
    phases: Map<String, Value>,
    last: Instant,
}

impl Timer {
    fn new(on: bool) -> Self {
        Self { on, phases: Map::new(), last: Instant::now() }
    }

    fn lap(&mut self, phase: &str) {
        if self.on {
            let ms = self.last.elapsed().as_secs_f64() * 1e3;
            self.phases.insert(phase.into(), json!((ms * 1e3).round() / 1e3));
        }
        self.last = Instant::now();
    }
}

/// Runs `command` on the spec document `spec_text`; `source` is echoed in
/// the report.
pub fn run(command: Command, source: &str, spec_text: &str, opts: &RunOptions) -> Outcome {
    let mut timer = Timer::new(opts.timing);
    let result = ProblemSpec::from_json(spec_text)
        .and_then(|spec| Problem::from_spec(&spec).map(|p| (spec, p)))
        .and_then(|(spec, problem)| {
            timer.lap("parse");
            let order = resolve_order(opts.order, spec.order, opts.env_order.as_deref())?;
            execute(command, &problem, order, opts, &mut timer).map(|body| (problem, body))
        });
    let mut report = Map::new();
    report.insert("command".into(), json!(command.name()));
    report.insert("source".into(), json!(source));
    let exit_code = match result {
        Ok((problem, body)) => {
            let failed = body.checks.iter().filter(|c| !c.passed).count();
            let (status, code) = if body.infeasible {
                ("infeasible", 3)
            } else if failed > 0 {
                ("failed", 1)
            } else {
                ("passed", 0)
            };
            report.insert("coordinates".into(), json!(problem.names));
            report.insert("order".into(), json!(body.order));
            report.insert("status".into(), json!(status));
            report.insert("checks".into(), Value::Array(body.checks.iter().map(Check::to_json).collect()));
            report.insert("summary".into(), json!({ "checks": body.checks.len(), "failed": failed }));
            report.insert("outputs".into(), Value::Object(body.outputs));
            code
        }
        Err(e) => {
            let code = e.exit_code();
            let mut err = Map::new();
            err.insert("kind".into(), json!(e.kind()));
            err.insert("message".into(), json!(e.to_string()));
            if let CliError::Parse { source, .. } = &e {
                err.insert("position".into(), json!(source.position()));
            }
            report.insert("status".into(), json!(if code == 3 { "infeasible" } else { "error" }));
            report.insert("error".into(), Value::Object(err));
            code
        }
    };
    report.insert("exit_code".into(), json!(exit_code));
    if opts.timing {
        report.insert("timing_ms".into(), Value::Object(timer.phases));
    }
    Outcome { report: Value::Object(report), exit_code }
}

/// Runs the bundled demo `name` end to end.
pub fn run_demo(name: &str, opts: &RunOptions) -> Outcome {
    match demos::demo_spec(name) {
        Some(text) => run(Command::Demo, &format!("demo:{name}"), text, opts),
        None => {
            let e = CliError::Spec(format!("unknown demo `{name}`; available: {}", demos::names().join(", ")));
            let report = json!({
                "command": "demo",
                "source": format!("demo:{name}"),
                "status": "error",
                "error": { "kind": e.kind(), "message": e.to_string() },
                "exit_code": e.exit_code(),
            });
            Outcome { report, exit_code: e.exit_code() }
        }
    }
}

fn execute(command: Command, p: &Problem, order: u32, opts: &RunOptions, timer: &mut Timer) -> Result<Body, CliError> {
    let mut body = Body::default();
    if command == Command::Validate {
        validate(p, &mut body);
        timer.lap("validate");
        return Ok(body);
    }
    body.order = Some(order);
    if matches!(p.geometry, Geometry::Infeasible(_) | Geometry::Unavailable(_)) {
        validate(p, &mut body);
        return Ok(body);
    }
    let fns = selected_functions(p, &opts.functions)?;
    if matches!(command, Command::Check | Command::Demo) {
        validate(p, &mut body);
        timer.lap("validate");
    }
    let sol = solve(p, order)?;
    timer.lap("solve");
    match command {
        Command::Solve => {
            solver_checks(&sol, &mut body)?;
            body.outputs.insert("solution".into(), solution_json(&sol, &p.names));
        }
        Command::Lift => {
            lift_outputs(p, &sol, &fns, &mut body)?;
        }
        Command::Groupoid => {
            let maps = build_change_of_variables(&sol, &p.pq)?;
            groupoid_outputs(p, &sol, &maps, &fns, &mut body)?;
        }
        Command::Check | Command::Demo => {
            solver_checks(&sol, &mut body)?;
            timer.lap("invariants");
            lift_checks(p, &sol, &fns, order, &mut body)?;
            timer.lap("lift");
            let maps = build_change_of_variables(&sol, &p.pq)?;
            let polys: Vec<BasePolynomial> = fns.iter().map(|(_, f)| f.clone()).collect();
            let rep = groupoid_checks(&sol, &maps, &polys)?;
            body.checks.push(Check::flag("groupoid zero section", rep.zero_section_ok));
            for c in &rep.checks {
                let residuals = if c.residual.is_zero() { vec![] } else { vec![ser::series(&c.residual, &p.names)] };
                body.checks.push(Check::from_residuals(
                    format!("groupoid {} ({}, {})", c.kind.name(), fns[c.f].0, fns[c.g].0),
                    residuals,
                ));
            }
            if p.kahler_pq {
                let k = p.kahler.as_ref().expect("kahler projectors come with Kähler data");
                let sep = separation_check(&sol, &maps, k)?;
                let nonzero = |rs: &[FibreSeries]| {
                    rs.iter()
                        .enumerate()
                        .filter(|(_, r)| !r.is_zero())
                        .map(|(i, r)| ser::residual(&[i], ser::series(r, &p.names)))
                        .collect::<Vec<_>>()
                };
                body.checks.push(Check::from_residuals("separation S z = z", nonzero(&sep.source_residuals)));
                body.checks.push(Check::from_residuals("separation T zb = zb", nonzero(&sep.target_residuals)));
                body.checks.push(Check::flag("separation holomorphic lifts", sep.holomorphic_lifts_in_ideal));
                body.checks.push(Check::flag("separation antiholomorphic lifts", sep.antiholomorphic_lifts_in_ideal));
                body.checks.push(Check::flag("separation potentials in both ideals", sep.potentials_in_both_ideals));
            }
            timer.lap("groupoid");
            if command == Command::Demo {
                lift_outputs(p, &sol, &fns, &mut body)?;
                let mut source = Map::new();
                let mut target = Map::new();
                for ((name, _), (s, t)) in fns.iter().zip(&rep.images) {
                    source.insert(name.clone(), ser::series(&s.value, &p.names));
                    target.insert(name.clone(), ser::series(&t.value, &p.names));
                }
                body.outputs.insert("identity_change_of_variables".into(), json!(maps.is_identity()));
                body.outputs.insert("source".into(), Value::Object(source));
                body.outputs.insert("target".into(), Value::Object(target));
            }
        }
        Command::Validate => unreachable!(),
    }
    timer.lap("outputs");
    Ok(body)
}

fn selected_functions(p: &Problem, wanted: &[String]) -> Result<Vec<(String, BasePolynomial)>, CliError> {
    let all: Vec<(String, BasePolynomial)> = if p.functions.is_empty() {
        p.names.iter().enumerate().map(|(i, n)| (n.clone(), BasePolynomial::var(p.dim(), i))).collect()
    } else {
        p.functions.clone()
    };
    if wanted.is_empty() {
        return Ok(all);
    }
    wanted
        .iter()
        .map(|w| {
            all.iter().find(|(n, _)| n == w).cloned().ok_or_else(|| CliError::Spec(format!("unknown function `{w}`")))
        })
        .collect()
}

fn certificate_json(cert: &ObstructionCertificate) -> Value {
    let multipliers: Vec<Value> = cert
        .certificate
        .multipliers
        .iter()
        .map(|(r, y)| json!({ "row": cert.row_labels[*r], "multiplier": ser::scalar(y) }))
        .collect();
    json!({
        "status": "INFEASIBLE",
        "value": ser::scalar(&cert.certificate.value),
        "multipliers": multipliers,
        "verified": cert.verify(),
    })
}

fn validate(p: &Problem, body: &mut Body) {
    let names = &p.names;
    let pr = validate_poisson(&p.poisson);
    body.checks.push(Check::from_residuals(
        "poisson antisymmetric",
        pr.antisymmetry_residuals
            .iter()
            .map(|((i, j), r)| ser::residual(&[*i, *j], ser::polynomial(r, names)))
            .collect(),
    ));
    body.checks.push(Check::from_residuals(
        "poisson jacobi",
        pr.jacobi_residuals
            .iter()
            .map(|((i, j, k), r)| ser::residual(&[*i, *j, *k], ser::polynomial(r, names)))
            .collect(),
    ));
    if let Some(k) = &p.kahler {
        body.checks.push(Check::from_residuals(
            "kahler jacobi",
            k.jacobi_residuals()
                .iter()
                .map(|(kind, idx, r)| json!({ "kind": kind, "index": idx.iter().map(|i| i + 1).collect::<Vec<_>>(), "value": ser::polynomial(r, names) }))
                .collect(),
        ));
    }
    let tensor = |t: &fedosov_core::poisson_geometry::Tensor3| -> Vec<Value> {
        nonzero_entries3(t).iter().map(|(idx, r)| ser::residual(idx, ser::polynomial(r, names))).collect()
    };
    match &p.geometry {
        Geometry::Pair { connection, dagger } => {
            body.checks.push(Check::flag("connection exists", true));
            match conn_analyze(connection, Some(dagger)) {
                Ok(rep) => {
                    body.checks.push(Check::from_residuals("connection torsion-free", tensor(&rep.torsion)));
                    body.checks
                        .push(Check::from_residuals("connection respects poisson", tensor(&rep.poisson_residual)));
                    body.checks.push(Check::from_residuals("connection associated", tensor(&rep.association_residual)));
                    body.checks.push(Check::from_residuals("dagger torsion-free", tensor(&rep.dagger_torsion)));
                }
                Err(e) => body.checks.push(Check::flag(format!("connection analysis: {e}"), false)),
            }
            match validate_pq(connection, &p.pq) {
                Ok(rep) => {
                    let matrix = |m: &[Vec<BasePolynomial>]| -> Vec<Value> {
                        let mut out = Vec::new();
                        for (i, row) in m.iter().enumerate() {
                            for (j, r) in row.iter().enumerate() {
                                if !r.is_zero() {
                                    out.push(ser::residual(&[i, j], ser::polynomial(r, names)));
                                }
                            }
                        }
                        out
                    };
                    body.checks.push(Check::from_residuals("pq sum", matrix(&rep.sum_residual)));
                    body.checks.push(Check::from_residuals("pq compatible", matrix(&rep.compatibility_residual)));
                    let mut parallel = tensor(&rep.p_derivative);
                    parallel.extend(tensor(&rep.q_derivative));
                    body.checks.push(Check::from_residuals("pq parallel", parallel));
                }
                Err(e) => body.checks.push(Check::flag(format!("pq analysis: {e}"), false)),
            }
        }
        Geometry::Infeasible(cert) => {
            body.checks.push(Check::flag("connection exists", false));
            body.outputs.insert("obstruction".into(), certificate_json(cert));
            body.infeasible = true;
        }
        Geometry::Unavailable(reason) => {
            body.checks.push(Check::flag("connection exists", false));
            body.outputs.insert("connection_error".into(), json!(reason));
        }
    }
}

fn solve(p: &Problem, order: u32) -> Result<FundamentalSolution, CliError> {
    let Geometry::Pair { connection, dagger } = &p.geometry else { unreachable!("callers handle missing connections") };
    Ok(solve_fundamental(connection, dagger, SolveOptions::order(order))?)
}

fn solver_checks(sol: &FundamentalSolution, body: &mut Body) -> Result<(), CliError> {
    for c in check_invariants(sol)? {
        body.checks.push(Check {
            name: format!("solver {}", c.name),
            passed: c.passed,
            failures: c.failures,
            residuals: vec![],
        });
    }
    Ok(())
}

fn solution_json(sol: &FundamentalSolution, names: &[String]) -> Value {
    let audit: Vec<Value> = sol
        .audit()
        .iter()
        .map(|a| {
            json!({
                "step": a.step,
                "path": match a.path { StepPath::Recursion => "recursion", StepPath::Elimination => "elimination" },
                "alpha_antisymmetric": a.alpha_antisymmetric,
                "reconstruction": a.reconstruction,
                "b_reconstruction": a.b_reconstruction,
                "potentials_consistent": a.potentials_consistent,
            })
        })
        .collect();
    json!({
        "order": sol.order(),
        "u": ser::series_list(sol.u(), names),
        "u_low": ser::series_list(sol.u_low(), names),
        "v": ser::series_matrix(sol.v(), names),
        "audit": audit,
    })
}

fn lift_outputs(
    p: &Problem,
    sol: &FundamentalSolution,
    fns: &[(String, BasePolynomial)],
    body: &mut Body,
) -> Result<(), CliError> {
    let mut lifts = Map::new();
    for (name, f) in fns {
        let theta = lift(sol, f, sol.order())?;
        body.checks.push(Check::flag(format!("lift hamiltonian ({name})"), theta.is_valid(sol.poisson())));
        lifts.insert(
            name.clone(),
            json!({
                "function": ser::polynomial(f, &p.names),
                "value": ser::series(&theta.value, &p.names),
                "potential": ser::series_list(&theta.potential, &p.names),
            }),
        );
    }
    body.outputs.insert("lifts".into(), Value::Object(lifts));
    Ok(())
}

fn lift_checks(
    p: &Problem,
    sol: &FundamentalSolution,
    fns: &[(String, BasePolynomial)],
    order: u32,
    body: &mut Body,
) -> Result<(), CliError> {
    let names = &p.names;
    for a in 0..fns.len() {
        for b in a + 1..fns.len() {
            let (fa, f) = &fns[a];
            let (gb, g) = &fns[b];
            let r = poisson_morphism_residual(sol, f, g, order)?;
            let residuals = if r.is_zero() { vec![] } else { vec![ser::series(&r, names)] };
            body.checks.push(Check::from_residuals(format!("lift poisson morphism ({fa}, {gb})"), residuals));
            let tf = lift(sol, f, order)?;
            let tg = lift(sol, g, order)?;
            let tfg = lift(sol, &(f * g), order)?;
            body.checks
                .push(Check::flag(format!("lift multiplicative ({fa}, {gb})"), tfg.value == &tf.value * &tg.value));
        }
    }
    Ok(())
}

fn groupoid_outputs(
    p: &Problem,
    sol: &FundamentalSolution,
    maps: &GroupoidMaps,
    fns: &[(String, BasePolynomial)],
    body: &mut Body,
) -> Result<(), CliError> {
    let residual_tensor = change_of_variables_residual(sol.poisson(), maps);
    let mut residuals = Vec::new();
    for (i, row) in residual_tensor.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            if !r.is_zero() {
                residuals.push(ser::residual(&[i, j], ser::series(r, &p.names)));
            }
        }
    }
    body.checks.push(Check::from_residuals("groupoid change of variables", residuals));
    let mut source = Map::new();
    let mut target = Map::new();
    for (name, f) in fns {
        let (s, t) = source_target(sol, maps, f)?;
        let zero_ok = s.value.zero_section() == *f && t.value.zero_section() == *f;
        body.checks.push(Check::flag(format!("groupoid zero section ({name})"), zero_ok));
        source.insert(name.clone(), ser::series(&s.value, &p.names));
        target.insert(name.clone(), ser::series(&t.value, &p.names));
    }
    body.outputs.insert(
        "maps".into(),
        json!({
            "identity": maps.is_identity(),
            "xi_of_zeta": ser::series_list(maps.xizeta().components(), &p.names),
            "zeta_of_xi": ser::series_list(maps.zetaxi().components(), &p.names),
        }),
    );
    body.outputs.insert("source".into(), Value::Object(source));
    body.outputs.insert("target".into(), Value::Object(target));
    Ok(())
}
