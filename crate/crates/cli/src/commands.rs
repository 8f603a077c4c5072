use std::sync::Arc;

use volmaj_core::algebraic_majorant::uniform_grid;
use volmaj_core::conditions::Sampler;
use volmaj_core::corpus::{self, CATALOG};
use volmaj_core::integral_majorant::DEFAULT_IMPROPER_TOL;
use volmaj_core::problem::max_abs;
use volmaj_core::{
    check_convexity, check_upper_solution, classify_blowup, graded_mesh, solve_lyapunov, solve_main, solve_majorant_with,
    verify_domination, verify_pair_domination, BGrid, Checker, ConditionStatus, MajorantOptions, MajorantSolution,
    MajorantSpec, Mesh, SolveOptions, SolveStatus, TangencyMethod,
};

use crate::config::{Resolved, RunConfig, DEFAULT_THETA};
use crate::output::{num, Csv, Report, Summary};
use crate::CliError;

/// Grid size per axis of the convexity check, as in the core solver.
const CONVEXITY_POINTS: usize = 101;

/// Outcome of a run: what to print and write, and the exit code.
pub struct RunOutput {
    pub report: Report,
    pub code: i32,
}

fn finish(summary: Summary, mut report: Report, timestamp: bool, code: i32) -> RunOutput {
    report.stdout = summary.render(false);
    report.files.insert(0, ("summary.txt".into(), summary.render(timestamp)));
    RunOutput { report, code }
}

fn mesh_end(cfg: &RunConfig, horizon: f64, fallback: Option<f64>) -> Result<f64, CliError> {
    if let Some(t) = cfg.mesh.t_end {
        return Ok(t);
    }
    if horizon.is_finite() {
        return Ok(cfg.mesh.theta.unwrap_or(DEFAULT_THETA) * horizon);
    }
    if cfg.mesh.theta.is_some() {
        return Err(CliError::invalid("mesh: theta needs a finite horizon; give t_end"));
    }
    Ok(fallback.unwrap_or(1.0))
}

fn build_mesh(cfg: &RunConfig, t_end: f64) -> Result<Arc<Mesh>, CliError> {
    Ok(Arc::new(graded_mesh(t_end, cfg.mesh.n, cfg.mesh.ratio)?))
}

fn need_majorant(res: &Resolved) -> Result<&MajorantSpec, CliError> {
    res.majorant
        .as_ref()
        .ok_or_else(|| CliError::invalid("no integral majorant: add a [majorant] section or a corpus problem"))
}

fn majorant_on_mesh(cfg: &RunConfig, res: &Resolved, spec: &MajorantSpec) -> Result<MajorantSolution, CliError> {
    let blowup = classify_blowup(spec, DEFAULT_IMPROPER_TOL)?;
    let t_end = mesh_end(cfg, blowup.horizon, res.default_t_end)?;
    let mesh = build_mesh(cfg, t_end)?;
    Ok(solve_majorant_with(spec, blowup, mesh, MajorantOptions::default())?)
}

fn warn_cost(res: &Resolved) {
    if let Some(p) = &res.problem {
        if p.max_folds() >= 3 {
            eprintln!(
                "warning: a kernel with {} folds costs O(N^{}) evaluations per iterate",
                p.max_folds(),
                p.max_folds()
            );
        }
    }
}

fn header(s: &mut Summary, command: &str, res: &Resolved) {
    s.text("command", command).text("source", res.source.clone());
    if let Some(e) = &res.entry {
        for (k, v) in &e.params {
            s.text(&format!("param.{k}"), num(*v));
        }
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn majorant(cfg: &RunConfig, timestamp: bool) -> Result<RunOutput, CliError> {
    let res = cfg.resolve()?;
    let spec = need_majorant(&res)?;
    let sol = majorant_on_mesh(cfg, &res, spec)?;
    let mesh = &sol.mesh;
    let last = mesh.len() - 1;
    let z_last = sol.chain.last();
    let gap = sol.z_plus.iter().zip(z_last).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut s = Summary::new();
    header(&mut s, "majorant", &res);
    s.text("f", spec.f.label().to_string())
        .text("gamma", spec.gamma.label().to_string())
        .text("classification", sol.classification().name())
        .num("t_plus", sol.horizon());
    if let Some(p) = sol.blowup.pole {
        s.num("pole", p);
    }
    s.text("degenerate", flag(sol.blowup.degenerate))
        .num("t_end", mesh.end())
        .int("intervals", last)
        .num("omega_end", sol.omega[last])
        .num("z_end", sol.z_plus[last])
        .int("chain_iterations", sol.chain.iterations())
        .text("chain_converged", flag(sol.chain.converged))
        .num("chain_last_change", sol.chain.last_change)
        .num("chain_gap", gap);
    if let Some(upper) = &spec.upper {
        let r = check_upper_solution(spec, upper, mesh)?;
        s.text("upper_solution", if r.holds { "holds" } else { "fails" });
        if let Some(v) = r.first_violation {
            s.text("upper_violation", format!("node {} t = {}: {} < {}", v.node, num(v.t), num(v.lhs), num(v.rhs)));
        }
    }

    let mut csv = Csv::new(&["t", "omega", "z", "z_last"]);
    for (j, &t) in mesh.nodes().iter().enumerate() {
        csv.row(&[t, sol.omega[j], sol.z_plus[j], z_last[j]]);
    }
    let mut report = Report::default();
    report.file("majorant.csv", csv.as_str());
    Ok(finish(s, report, timestamp, 0))
}

pub fn lyapunov(cfg: &RunConfig, timestamp: bool) -> Result<RunOutput, CliError> {
    let res = cfg.resolve()?;
    let spec = res
        .lyapunov
        .as_ref()
        .ok_or_else(|| CliError::invalid("no algebraic majorant: add a [lyapunov] section or a corpus problem"))?;
    let convexity = check_convexity(
        spec,
        &uniform_grid(0.0, spec.r_max, CONVEXITY_POINTS),
        &uniform_grid(0.0, spec.t_max, CONVEXITY_POINTS),
    )?;
    let mut s = Summary::new();
    header(&mut s, "lyapunov", &res);
    s.text("f", spec.f.label().to_string()).num("c", spec.c);
    if let Some(v) = &convexity.first_violation {
        s.text("convexity", "fails")
            .int("convexity_points", convexity.points)
            .text("convexity_violation", format!("{:?}", v.kind))
            .num("violation_r", v.r)
            .num("violation_t", v.t)
            .num("violation_value", v.value);
        eprintln!("error: hypothesis G fails on the convexity grid: {:?} at r = {}, t = {}", v.kind, v.r, v.t);
        return Ok(finish(s, Report::default(), timestamp, crate::EXIT_INVALID));
    }
    let sol = solve_lyapunov(spec, cfg.mesh.n)?;
    s.text("convexity", "holds")
        .num("r_plus", sol.r_plus())
        .num("t_plus", sol.t_plus())
        .text(
            "method",
            match sol.tangency.method {
                TangencyMethod::Newton => "newton",
                TangencyMethod::Bisection => "bisection",
            },
        )
        .int("tangency_iterations", sol.tangency.iterations)
        .int("convexity_points", sol.convexity.points)
        .text("convexity_degenerate", flag(sol.convexity.degenerate))
        .int("branch_nodes", sol.branch.t.len())
        .int("branch_polished", sol.branch.polished.iter().filter(|&&p| p).count());

    let mut csv = Csv::new(&["t", "r"]);
    for (t, r) in sol.branch.t.iter().zip(&sol.branch.r) {
        csv.row(&[*t, *r]);
    }
    let mut report = Report::default();
    report.file("branch.csv", csv.as_str());
    Ok(finish(s, report, timestamp, 0))
}

pub fn solve(cfg: &RunConfig, timestamp: bool) -> Result<RunOutput, CliError> {
    let res = cfg.resolve()?;
    let problem = res
        .problem
        .as_ref()
        .ok_or_else(|| CliError::invalid("solve needs a problem: add a [problem] section"))?;
    warn_cost(&res);
    let majorant = match &res.majorant {
        Some(spec) => Some(majorant_on_mesh(cfg, &res, spec)?),
        None => None,
    };
    let mesh = match &majorant {
        Some(m) => m.mesh.clone(),
        None => build_mesh(cfg, mesh_end(cfg, f64::INFINITY, res.default_t_end)?)?,
    };
    let opts = SolveOptions {
        tol: cfg.solver.tol,
        n_max: cfg.solver.n_max,
        ..SolveOptions::default()
    };
    let rep = solve_main(problem, mesh.clone(), opts, majorant.as_ref())?;
    let converged = rep.status == SolveStatus::Converged;

    let mut s = Summary::new();
    header(&mut s, "solve", &res);
    s.num("t_end", mesh.end())
        .int("intervals", mesh.len() - 1)
        .int("dim", problem.dim())
        .text("status", if converged { "converged" } else { "not converged" })
        .text("main_solution", flag(rep.main))
        .int("iterations", rep.iterations)
        .num("last_step", rep.last_step)
        .text("step_criterion", flag(rep.step_criterion))
        .num("max_residual", rep.max_residual())
        .num("max_norm", rep.trajectory.max_norm());
    if let Some(t) = rep.tail_criterion {
        s.text("tail_criterion", flag(t));
    }
    if let Some(m) = &majorant {
        s.text("majorant_classification", m.classification().name())
            .num("majorant_t_plus", m.horizon());
        let d = verify_domination(&rep, m)?;
        let pd = verify_pair_domination(&rep, m)?;
        s.text("domination", if d.holds { "holds" } else { "fails" })
            .text("increment_domination", if pd.holds { "holds" } else { "fails" });
        if let Some(b) = &rep.certified_bound {
            s.num("certified_bound_end", *b.last().unwrap_or(&0.0));
        }
    }
    if let Some(sol) = res.entry.as_ref().and_then(|e| e.solution.clone()) {
        let err: Vec<f64> = mesh
            .nodes()
            .iter()
            .enumerate()
            .map(|(j, &t)| rep.trajectory.norm(j) - sol(t).abs())
            .collect();
        s.num("max_error_vs_closed_form", max_abs(&err));
    }

    let mut report = Report::default();
    let bound = rep.certified_bound.as_deref();
    let mut head = vec!["t", "norm", "residual"];
    if bound.is_some() {
        head.push("bound");
    }
    let mut csv = Csv::new(&head);
    for (j, &t) in mesh.nodes().iter().enumerate() {
        let mut row = vec![t, rep.trajectory.norm(j), rep.residual[j]];
        if let Some(b) = bound {
            row.push(b[j]);
        }
        csv.row(&row);
    }
    report.file("solution.csv", csv.as_str());
    if let Some(a) = &res.second_difference {
        let mut d = Csv::new(&["t", "u_max", "du_max", "d2u_max"]);
        for (j, v) in corpus::example2_diagnostics(a, &rep.trajectory).iter().enumerate() {
            d.row(&[mesh.nodes()[j], v[0], v[1], v[2]]);
        }
        report.file("diagnostics.csv", d.as_str());
    }
    Ok(finish(s, report, timestamp, if converged { 0 } else { crate::EXIT_NOT_CONVERGED }))
}

fn csv_cell(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

pub fn verify(cfg: &RunConfig, timestamp: bool) -> Result<RunOutput, CliError> {
    let res = cfg.resolve()?;
    let spec = need_majorant(&res)?;
    warn_cost(&res);
    let sol = majorant_on_mesh(cfg, &res, spec)?;
    let last = sol.mesh.len() - 1;
    let grid = BGrid {
        t_max: sol.mesh.end(),
        w_max: sol.omega[last],
        z_max: sol.z_plus[last],
        points: 41,
    };
    let mut checker = Checker::new(spec, sol.mesh.clone(), grid)
        .with_sampler(Sampler::new(cfg.verify.seed, cfg.verify.bound), cfg.verify.samples);
    if let Some(p) = &res.problem {
        checker = checker.with_problem(p);
    }
    if let Some(l) = &res.lyapunov {
        checker = checker.with_lyapunov(l);
    }
    let rep = checker.run();

    let mut s = Summary::new();
    header(&mut s, "verify", &res);
    s.num("t_end", sol.mesh.end())
        .int("intervals", last)
        .text("seed", rep.seed.to_string())
        .int("samples", rep.samples);
    let mut csv = Csv::new(&["condition", "status", "checks", "worst_margin", "detail"]);
    for e in &rep.entries {
        let detail = match &e.status {
            ConditionStatus::Pass => e.note.to_string(),
            ConditionStatus::Fail(w) => w.to_string(),
            ConditionStatus::Skipped(why) => why.clone(),
        };
        s.text(&format!("condition.{}", e.condition.name()), e.status.label());
        csv.raw_row(&[
            e.condition.name().to_string(),
            e.status.label().to_string(),
            e.checks.to_string(),
            e.worst_margin.map(num).unwrap_or_default(),
            csv_cell(&detail),
        ]);
    }
    s.int("violations", rep.violations.len());
    if let Some(w) = rep.violations.first() {
        s.text("first_violation", format!("{} at {w}", w.condition.name()));
    }
    let mut report = Report::default();
    report.file("conditions.csv", csv.as_str());
    if !rep.violations.is_empty() {
        let mut wcsv = Csv::new(&["condition", "witness"]);
        for w in &rep.violations {
            wcsv.raw_row(&[w.condition.name().to_string(), csv_cell(&w.to_string())]);
        }
        report.file("witnesses.csv", wcsv.as_str());
    }
    let code = if rep.any_failed() { crate::EXIT_CONDITION_FAILED } else { 0 };
    Ok(finish(s, report, timestamp, code))
}

pub fn corpus_list() -> String {
    let mut out = String::new();
    for c in CATALOG {
        out.push_str(c.name);
        out.push('\n');
        for p in c.params {
            out.push_str(&format!("  {} = {} ({})\n", p.name, p.default, p.description));
        }
        out.push_str(&format!("  {}\n", c.notes));
    }
    out
}
