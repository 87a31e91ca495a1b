//! `qes`: polynomial solutions of `X S'' + Y S' + Z S = 0` from the command
//! line.
//!
//! Exit status: 0 on success, 1 when a certification or acceptance check
//! fails, 2 on invalid input.

/// Spec, form and solution files.
mod input;
/// JSON, CSV and text output.
mod io;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[cfg(feature = "parallel")]
use anyhow::Context;
use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qes_core::apps::{decatic, dirac, phi6, rn, two_electron, Quantity, Transcription};
use qes_core::augmented::AugmentedSolution;
use qes_core::bethe::{certify_ode, solve_all_with_stats, sort_solutions, BetheSolution};
use qes_core::count::{run_count, SpecFamily};
use qes_core::oracle::{coeff_system_solve, sl2_solutions};
use qes_core::validation::run_report;
use qes_core::{OdeSpec, QesError, SolverConfig, C64};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{bad, InputError};
use crate::io::{Document, Format, Table};

#[derive(Parser)]
#[command(name = "qes", version, about = "Polynomial solutions of X S'' + Y S' + Z S = 0 via Bethe ansatz equations")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// RNG seed for multistart runs
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Newton starts per solve
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Certification tolerance (also caps the Newton tolerance)
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// All certified degree-n solutions of a spec
    Solve(ProblemArgs),
    /// Re-certify claimed solutions against a spec
    Verify {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        solutions: PathBuf,
    },
    /// Independent solvers, same output schema as `solve`
    Oracle {
        #[arg(value_enum)]
        method: OracleMethod,
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Solution counts for random specs against binom(n + deg X - 2, n)
    Count {
        #[arg(long, value_parser = parse_family)]
        family: SpecFamily,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        /// Draw specs with b3 = -2(n-1) a4, where n + 1 solutions are expected
        #[arg(long)]
        dependent: bool,
    },
    /// Physical systems
    #[command(subcommand)]
    App(App),
    /// Run the full validation suite
    Report,
}

#[derive(Args)]
struct ProblemArgs {
    /// JSON file with a raw spec `{a, b, n}` or a canonical form
    #[arg(long)]
    spec: PathBuf,
    /// heun, gheun1, gheun2, gheun3, gheun4 or raw
    #[arg(long)]
    form: Option<String>,
    /// Degree of S; overrides the file
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMethod {
    /// Eigenvectors of the (n+1)x(n+1) operator matrix (dependent specs only)
    Sl2,
    /// Newton on the coefficient system of S (n <= 4)
    Coeffs,
}

#[derive(Subcommand)]
enum App {
    /// Two electrons on a sphere, Heun form
    TwoElectron {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = RadiusArg::Positive)]
        branch: RadiusArg,
    },
    /// Sextic phi^6 kink fluctuations, 1/eps^2 solved for
    Phi6 {
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long)]
        n: usize,
    },
    /// Reissner-Nordstrom background; each quantity is `value` or `lo:hi`
    Rn {
        #[arg(long, allow_hyphen_values = true, value_parser = input::parse_quantity, default_value = "-0.35:0.35")]
        a: Quantity,
        #[arg(long, allow_hyphen_values = true, value_parser = input::parse_quantity, default_value = "0:2")]
        m_s: Quantity,
        #[arg(long, allow_hyphen_values = true, value_parser = input::parse_quantity, default_value = "1")]
        g_m: Quantity,
        #[arg(long, value_enum, default_value_t = BranchArg::Both)]
        mu_branch: BranchArg,
        #[arg(long, default_value_t = 0)]
        n: usize,
    },
    /// Dirac electron in a magnetic field with a Coulomb centre
    Dirac {
        #[arg(long, default_value_t = 1.0)]
        m_e: f64,
        #[arg(long, default_value_t = 0)]
        l: i32,
        /// defaults to the box [-0.9 m, -0.05 m]
        #[arg(long, allow_hyphen_values = true, value_parser = input::parse_quantity)]
        energy: Option<Quantity>,
        #[arg(long, allow_hyphen_values = true, value_parser = input::parse_quantity, default_value = "50")]
        charge: Quantity,
        /// defaults to the box [-1.5 m^2, -0.01 m^2]
        #[arg(long, allow_hyphen_values = true, value_parser = input::parse_quantity)]
        e_b: Option<Quantity>,
        #[arg(long, default_value_t = 0)]
        n: usize,
        /// Try the n = 0 closed form as the first start
        #[arg(long)]
        closed_form_start: bool,
    },
    /// Decatic radial oscillator in N dimensions
    Decatic {
        #[arg(long, allow_hyphen_values = true)]
        lambda1: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda2: f64,
        #[arg(long, default_value_t = 3)]
        dim: u32,
        #[arg(long, default_value_t = 0)]
        l: u32,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RadiusArg {
    Positive,
    All,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
    Both,
}

fn parse_family(s: &str) -> std::result::Result<SpecFamily, String> {
    SpecFamily::parse(s).ok_or_else(|| format!("unknown family {s:?}; use heun or gheun1"))
}

/// What a command produced: the rendered text and whether its checks held.
struct Outcome {
    text: String,
    ok: bool,
}

struct Ctx<'a> {
    global: &'a Global,
    cfg: SolverConfig,
}

impl Ctx<'_> {
    fn render<I: Serialize, R: Serialize>(
        &self,
        command: &str,
        input: I,
        result: &R,
        table: impl FnOnce() -> Table,
        pretty: impl FnOnce() -> String,
    ) -> Result<String> {
        match self.global.format {
            Format::Json => io::to_json(&Document { schema_version: io::SCHEMA_VERSION, command, input, result }),
            Format::Csv => table().to_csv(),
            Format::Pretty => Ok(pretty()),
        }
    }
}

fn solver_config(g: &Global) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::default().with_seed(g.seed);
    if let Some(r) = g.restarts {
        cfg = cfg.with_restarts(r);
    }
    if let Some(t) = g.tol {
        cfg.cert_tol = t;
        cfg.newton_tol = cfg.newton_tol.min(t);
    }
    cfg.validate().map_err(|e| bad(e.to_string()))?;
    Ok(cfg)
}

fn config_threads() -> Result<()> {
    let Ok(v) = std::env::var("QES_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| bad(format!("QES_THREADS must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(bad("QES_THREADS must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("building thread pool")?;
    Ok(())
}

fn problem_input(p: &ProblemArgs, spec: &OdeSpec, cfg: &SolverConfig) -> Value {
    json!({
        "spec_file": p.spec.display().to_string(),
        "form": p.form.as_deref().unwrap_or("raw"),
        "spec": spec,
        "config": cfg,
    })
}

fn solutions_text(header: &str, sols: &[BetheSolution]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{header}");
    for (i, s) in sols.iter().enumerate() {
        io::pretty_solution(&mut out, i + 1, s);
    }
    out
}

fn plain_table(sols: &[BetheSolution]) -> Table {
    let rows: Vec<_> = sols.iter().enumerate().map(|(i, s)| (vec![(i + 1).to_string()], s)).collect();
    io::solutions_table(&["index"], &rows)
}

fn cmd_solve(ctx: &Ctx, p: &ProblemArgs) -> Result<Outcome> {
    let (spec, form) = input::load_problem(&p.spec, p.form.as_deref(), p.n)?;
    let out = solve_all_with_stats(&spec, &ctx.cfg)?;
    let result = json!({ "form": form, "solutions": out.solutions, "stats": out.stats });
    let header = format!(
        "n = {}: {} certified solutions from {} starts{}",
        spec.n(),
        out.solutions.len(),
        out.stats.starts,
        if out.stats.x_multiple_roots { " (X has a multiple root)" } else { "" }
    );
    let text = ctx.render(
        "solve",
        problem_input(p, &spec, &ctx.cfg),
        &result,
        || plain_table(&out.solutions),
        || solutions_text(&header, &out.solutions),
    )?;
    Ok(Outcome { text, ok: true })
}

fn rel_diff(a: C64, b: C64) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

#[derive(Serialize)]
struct Verdict {
    index: usize,
    certified: bool,
    solution: BetheSolution,
    /// largest relative gap between claimed and recomputed `c` coefficients
    #[serde(skip_serializing_if = "Option::is_none")]
    coeff_mismatch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    problem: Option<String>,
}

const COEFF_MATCH: f64 = 1e-8;

fn cmd_verify(ctx: &Ctx, p: &ProblemArgs, solutions: &Path) -> Result<Outcome> {
    let (spec, _) = input::load_problem(&p.spec, p.form.as_deref(), p.n)?;
    let claims = input::load_claims(solutions)?;
    if claims.is_empty() {
        eprintln!("warning: {} contains no solutions; nothing to verify", solutions.display());
    }
    let verdicts: Vec<Verdict> = claims
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let solution = BetheSolution::evaluate(&spec, c.roots.clone(), &ctx.cfg);
            let mut problem = None;
            if c.roots.len() != spec.n() {
                problem = Some(format!("{} roots for n = {}", c.roots.len(), spec.n()));
            }
            let coeff_mismatch = c
                .coeffs
                .map(|claimed| claimed.iter().zip(solution.coeffs()).map(|(&a, b)| rel_diff(a, b)).fold(0.0, f64::max));
            if coeff_mismatch.is_some_and(|d| !(d <= COEFF_MATCH)) {
                problem.get_or_insert_with(|| "claimed c coefficients disagree with the roots".into());
            }
            let certified = solution.certified && problem.is_none();
            Verdict { index: i + 1, certified, solution, coeff_mismatch, problem }
        })
        .collect();
    let ok = verdicts.iter().all(|v| v.certified);
    let input = json!({
        "spec_file": p.spec.display().to_string(),
        "solutions_file": solutions.display().to_string(),
        "spec": spec,
        "config": ctx.cfg,
    });
    let result = json!({ "all_certified": ok, "verdicts": verdicts });
    let text = ctx.render(
        "verify",
        input,
        &result,
        || {
            let rows: Vec<_> = verdicts
                .iter()
                .map(|v| (vec![v.index.to_string(), v.problem.clone().unwrap_or_default()], &v.solution))
                .collect();
            io::solutions_table(&["index", "problem"], &rows)
        },
        || {
            let mut out = format!(
                "{} of {} claimed solutions certified\n",
                verdicts.iter().filter(|v| v.certified).count(),
                verdicts.len()
            );
            for v in &verdicts {
                io::pretty_solution(&mut out, v.index, &v.solution);
                if let Some(why) = &v.problem {
                    let _ = writeln!(out, "  problem: {why}");
                }
            }
            out
        },
    )?;
    Ok(Outcome { text, ok })
}

fn cmd_oracle(ctx: &Ctx, method: OracleMethod, p: &ProblemArgs) -> Result<Outcome> {
    let (spec, form) = input::load_problem(&p.spec, p.form.as_deref(), p.n)?;
    let (name, solutions, extra) = match method {
        OracleMethod::Sl2 => {
            let mut sols: Vec<BetheSolution> =
                sl2_solutions(&spec, &ctx.cfg).map_err(input_if_spec)?.into_iter().map(|s| s.solution).collect();
            sort_solutions(&mut sols);
            // c0 = -eigenvalue by construction
            let eig: Vec<C64> = sols.iter().map(|s| -s.c0).collect();
            ("sl2", sols, json!({ "eigenvalues": eig }))
        }
        OracleMethod::Coeffs => {
            let sols = coeff_system_solve(&spec, &ctx.cfg).map_err(input_if_spec)?;
            let mut out: Vec<BetheSolution> = sols
                .iter()
                .map(|o| {
                    let mut s = BetheSolution::evaluate(&spec, o.roots.clone(), &ctx.cfg);
                    let c = [o.c2, o.c1, o.c0];
                    s.ode_residual = certify_ode(&spec, s.roots.as_slice(), c);
                    [s.c2, s.c1, s.c0] = c;
                    s.certified &= s.ode_residual <= ctx.cfg.cert_tol;
                    s
                })
                .collect();
            sort_solutions(&mut out);
            let worst = sols.iter().map(|o| o.residual).fold(0.0, f64::max);
            ("coeffs", out, json!({ "max_coefficient_residual": worst }))
        }
    };
    let result = json!({ "method": name, "form": form, "solutions": solutions, "oracle": extra });
    let header = format!("oracle {name}, n = {}: {} solutions", spec.n(), solutions.len());
    let text = ctx.render(
        "oracle",
        problem_input(p, &spec, &ctx.cfg),
        &result,
        || plain_table(&solutions),
        || solutions_text(&header, &solutions),
    )?;
    Ok(Outcome { text, ok: true })
}

/// Spec-shape errors from the oracles are bad input, not failures.
fn input_if_spec(e: QesError) -> anyhow::Error {
    match e {
        QesError::NotDependent { .. } | QesError::DegreeTooLarge { .. } | QesError::InvalidSpec(_) => {
            bad(e.to_string())
        }
        other => other.into(),
    }
}

fn cmd_count(ctx: &Ctx, family: SpecFamily, n: usize, trials: usize, dependent: bool) -> Result<Outcome> {
    let reports = run_count(family, n, trials, dependent, &ctx.cfg)?;
    let matched = reports.iter().filter(|r| r.matches()).count();
    let input = json!({ "family": family, "n": n, "trials": trials, "dependent": dependent, "config": ctx.cfg });
    let result = json!({ "matched": matched, "trials": reports });
    let text = ctx.render(
        "count",
        input,
        &result,
        || {
            let mut t = Table::new(&[
                "trial",
                "deg_x",
                "n",
                "found",
                "expected",
                "restarts_used",
                "dependence_gap",
                "max_bae",
                "max_ode",
            ]);
            for (i, r) in reports.iter().enumerate() {
                let worst =
                    |f: fn(&qes_core::count::SolutionResidual) -> f64| r.residuals.iter().map(f).fold(0.0, f64::max);
                t.rows.push(vec![
                    (i + 1).to_string(),
                    r.deg_x.to_string(),
                    r.n.to_string(),
                    r.found.to_string(),
                    r.expected.to_string(),
                    r.restarts_used.iter().map(usize::to_string).collect::<Vec<_>>().join("/"),
                    io::num(r.dependence_gap),
                    io::num(worst(|s| s.bae)),
                    io::num(worst(|s| s.ode)),
                ]);
            }
            t
        },
        || {
            let mut out = format!("{matched} of {} trials found the expected count\n", reports.len());
            for (i, r) in reports.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "trial {}: found {} of {} (restarts {:?}){}",
                    i + 1,
                    r.found,
                    r.expected,
                    r.restarts_used,
                    if r.matches() { "" } else { "  MISMATCH" }
                );
            }
            out
        },
    )?;
    // shortfalls are data here, not failures
    Ok(Outcome { text, ok: true })
}

/// One output row per state: status, the named parameters and the energy.
struct AppRow<'a> {
    status: String,
    values: Vec<(String, C64)>,
    solution: &'a BetheSolution,
}

fn aug_row<'a>(status: &str, s: &'a AugmentedSolution, extra: &[(&str, C64)]) -> AppRow<'a> {
    let mut values: Vec<(String, C64)> = s.params.iter().map(|p| (p.name.clone(), p.value)).collect();
    values.extend(extra.iter().map(|(k, v)| (k.to_string(), *v)));
    AppRow { status: status.into(), values, solution: &s.solution }
}

fn app_table(rows: &[AppRow]) -> Table {
    let mut names: Vec<String> = Vec::new();
    for r in rows {
        for (k, _) in &r.values {
            if !names.contains(k) {
                names.push(k.clone());
            }
        }
    }
    let mut lead = vec!["status".to_string()];
    for k in &names {
        lead.push(format!("{k}_re"));
        lead.push(format!("{k}_im"));
    }
    let lead_ref: Vec<&str> = lead.iter().map(String::as_str).collect();
    let data: Vec<_> = rows
        .iter()
        .map(|r| {
            let mut cells = vec![r.status.clone()];
            for k in &names {
                match r.values.iter().find(|(n, _)| n == k) {
                    Some((_, v)) => {
                        cells.push(io::num(v.re));
                        cells.push(io::num(v.im));
                    }
                    None => cells.extend([String::new(), String::new()]),
                }
            }
            (cells, r.solution)
        })
        .collect();
    io::solutions_table(&lead_ref, &data)
}

fn app_pretty(title: &str, rows: &[AppRow]) -> String {
    let mut out = format!("{title}\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(out, "[{}] {}", i + 1, r.status);
        for (k, v) in &r.values {
            let _ = writeln!(out, "  {k} = {}", io::complex(*v));
        }
        io::pretty_solution(&mut out, i + 1, r.solution);
    }
    out
}

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn cmd_app(ctx: &Ctx, app: &App) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let params_err = |e: QesError| match e {
        QesError::InvalidParams(_) | QesError::InvalidSpec(_) | QesError::CoincidentPoles { .. } => bad(e.to_string()),
        other => other.into(),
    };
    let text = match *app {
        App::TwoElectron { delta, gamma, n, branch } => {
            let p = two_electron::TwoElectronParams { delta, gamma, n };
            let b = match branch {
                RadiusArg::Positive => two_electron::RadiusBranch::Positive,
                RadiusArg::All => two_electron::RadiusBranch::All,
            };
            let r = two_electron::solve(&p, b, cfg).map_err(params_err)?;
            let closed = two_electron::closed_form(&p);
            let mut rows: Vec<AppRow> = Vec::new();
            for (status, list) in [("state", &r.states), ("discarded", &r.discarded)] {
                for s in list {
                    let status = match &s.discarded {
                        Some(why) => format!("{status}: {why}"),
                        None => status.to_string(),
                    };
                    rows.push(AppRow {
                        status,
                        values: vec![("radius".into(), s.radius), ("energy".into(), s.energy)],
                        solution: &s.solution,
                    });
                }
            }
            let result = json!({ "app": r, "closed_form": closed });
            ctx.render("app two-electron", &p, &result, || app_table(&rows), || app_pretty("two-electron", &rows))?
        }
        App::Phi6 { mu, n } => {
            let p = phi6::Phi6Params { mu, n };
            let r = phi6::solve(&p, cfg).map_err(params_err)?;
            let mut rows: Vec<AppRow> = r
                .states
                .iter()
                .map(|s| {
                    let status = match (s.inv_eps_sq, s.stable) {
                        (None, _) => "state: 1/eps^2 free",
                        (_, true) => "state: stable",
                        (_, false) => "state: unstable",
                    };
                    aug_row(status, &s.solution, &[("energy", re(s.energy))])
                })
                .collect();
            rows.extend(r.discarded.iter().map(|d| aug_row(&format!("discarded: {}", d.reason), &d.solution, &[])));
            ctx.render("app phi6", &p, &json!({ "app": r }), || app_table(&rows), || app_pretty("phi6", &rows))?
        }
        App::Rn { a, m_s, g_m, mu_branch, n } => {
            let branches: Vec<rn::MuBranch> = match mu_branch {
                BranchArg::Plus => vec![rn::MuBranch::Plus],
                BranchArg::Minus => vec![rn::MuBranch::Minus],
                BranchArg::Both => vec![rn::MuBranch::Minus, rn::MuBranch::Plus],
            };
            let mut results = Vec::new();
            for branch in branches {
                let p = rn::RnParams { a, m_s, g_m, branch, n };
                results.push(rn::solve(&p, cfg).map_err(params_err)?);
            }
            let mut rows: Vec<AppRow> = Vec::new();
            for r in &results {
                let tag = format!("{:?}", r.params.branch).to_lowercase();
                for s in &r.states {
                    rows.push(aug_row(
                        &format!("state ({tag})"),
                        &s.solution,
                        &[("mu", s.point.mu), ("r_minus", s.point.r_minus)],
                    ));
                }
                for d in &r.discarded {
                    rows.push(aug_row(&format!("discarded ({tag}): {}", d.reason), &d.solution, &[]));
                }
            }
            let input = json!({ "a": a, "m_s": m_s, "g_m": g_m, "mu_branch": format!("{}", match mu_branch { BranchArg::Plus => "plus", BranchArg::Minus => "minus", BranchArg::Both => "both" }), "n": n });
            ctx.render(
                "app rn",
                input,
                &json!({ "branches": results }),
                || app_table(&rows),
                || app_pretty("reissner-nordstrom", &rows),
            )?
        }
        App::Dirac { m_e, l, energy, charge, e_b, n, closed_form_start } => {
            let base = dirac::DiracParams::with_fixed_charge(m_e, l, 1.0, n);
            let p = dirac::DiracParams {
                energy: energy.unwrap_or(base.energy),
                e_b: e_b.unwrap_or(base.e_b),
                charge,
                closed_form_start,
                ..base
            };
            let r = dirac::solve(&p, cfg).map_err(params_err)?;
            let closed = match (n, charge) {
                (0, Quantity::Fixed { value }) => Some(dirac::closed_form_n0(m_e, l, value)),
                _ => None,
            };
            let mut rows: Vec<AppRow> = r.states.iter().map(|s| aug_row("state", &s.solution, &[])).collect();
            rows.extend(r.discarded.iter().map(|d| aug_row(&format!("discarded: {}", d.reason), &d.solution, &[])));
            let result = json!({ "app": r, "closed_form_n0": closed });
            ctx.render("app dirac", &p, &result, || app_table(&rows), || app_pretty("dirac", &rows))?
        }
        App::Decatic { lambda1, lambda2, dim, l, n } => {
            let p = decatic::DecaticParams { lambda1, lambda2, dim, l, n };
            let r = decatic::solve(&p, cfg).map_err(params_err)?;
            let references = json!({
                "corrected": decatic::reference(&p, Transcription::Corrected),
                "printed": decatic::reference(&p, Transcription::Printed),
            });
            let mut rows: Vec<AppRow> =
                r.states.iter().map(|s| aug_row("state", &s.solution, &[("energy", re(s.energy))])).collect();
            rows.extend(r.discarded.iter().map(|d| aug_row(&format!("discarded: {}", d.reason), &d.solution, &[])));
            let result = json!({ "app": r, "references": references });
            ctx.render("app decatic", &p, &result, || app_table(&rows), || app_pretty("decatic", &rows))?
        }
    };
    Ok(Outcome { text, ok: true })
}

fn cmd_report(ctx: &Ctx) -> Result<Outcome> {
    let report = run_report(&ctx.cfg)?;
    let text = ctx.render(
        "report",
        json!({ "config": ctx.cfg }),
        &report,
        || {
            let mut t = Table::new(&["criterion", "name", "passed", "seconds", "budget_seconds", "notes"]);
            for c in &report.criteria {
                t.rows.push(vec![
                    c.id.to_string(),
                    c.name.to_string(),
                    c.passed.to_string(),
                    format!("{:.3}", c.seconds),
                    format!("{:.0}", c.budget_seconds),
                    c.notes.join("; "),
                ]);
            }
            t
        },
        || {
            let mut out = String::new();
            for c in &report.criteria {
                let _ = writeln!(out, "{}", c.line());
            }
            let _ = writeln!(
                out,
                "determinism: seeds agree {}, parallel = sequential {}",
                report.determinism.seeds_agree, report.determinism.parallel_matches_sequential
            );
            let _ = writeln!(out, "{} in {:.1}s", if report.passed { "PASS" } else { "FAIL" }, report.total_seconds);
            out
        },
    )?;
    Ok(Outcome { text, ok: report.passed })
}

fn run(cli: &Cli) -> Result<Outcome> {
    config_threads()?;
    let ctx = Ctx { global: &cli.global, cfg: solver_config(&cli.global)? };
    match &cli.command {
        Command::Solve(p) => cmd_solve(&ctx, p),
        Command::Verify { problem, solutions } => cmd_verify(&ctx, problem, solutions),
        Command::Oracle { method, problem } => cmd_oracle(&ctx, *method, problem),
        Command::Count { family, n, trials, dependent } => cmd_count(&ctx, *family, *n, *trials, *dependent),
        Command::App(app) => cmd_app(&ctx, app),
        Command::Report => cmd_report(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = io::emit(cli.global.output.as_deref(), &out.text) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let input = e.downcast_ref::<InputError>().is_some()
                || matches!(
                    e.downcast_ref::<QesError>(),
                    Some(QesError::InvalidSpec(_) | QesError::InvalidConfig(_) | QesError::InvalidParams(_))
                );
            ExitCode::from(if input { 2 } else { 1 })
        }
    }
}
