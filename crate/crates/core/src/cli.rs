//! The `bolza` command line.
//!
//! Every subcommand writes one JSON document to stdout (or `--out`) and, with
//! `--csv`, a table of samples:
//!
//! | command            | CSV columns |
//! |--------------------|-------------|
//! | `solve`, `ode`     | `t,x_1..x_d` (two rows at each atom: before and after the jump) |
//! | `dual`             | `t,y_1..y_d` at the grid nodes |
//! | `gap`              | `t,x_1..x_d,y_1..y_d` |
//! | `certify`          | `hamiltonian_residual_l1,singular_residual,transversality_residual,fenchel_gap,verdict` |
//! | `sweep`            | `eps,value,dual_value,slope` |
//! | `lineality`        | `index,value,negated_value,passes,negation_passes` |
//! | `conjugate`        | `lo,hi,a,p,q` (exact) or `w,value` (sampled) |
//! | `check-regularity` | `map,node,t,outer_regular,inner_semicontinuous` |
//!
//! Exit codes: 0 success, 2 invalid input, 3 infeasible, 4 certification
//! failed, 5 no convergence (the best iterate is still written).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::convex::{ext_real, llt_conjugate, Axis, Plq, SampledConvex};
use crate::error::{BolzaError, Result};
use crate::integrand::{check_regularity, domain_maps, DomainMap, RegularityReport, Side};
use crate::io::{
    read_json, to_json, ArcSpec, ContinuousArcSpec, DriverSpec, FieldSpec, MeasureSpec, PlqSpec, Problem, ProblemSpec,
    Wrapped,
};
use crate::measure::{BVArc, BaseMeasure, ContinuousArc};
use crate::ode::{picard_solve_from, DriverMeasure};
use crate::optimality::{certify, Verdict};
use crate::solver::{self, SolveConfig};

#[derive(Parser, Debug)]
#[command(name = "bolza", version, about = "Convex problems of Bolza over arcs of bounded variation")]
struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write sampled trajectories or result tables here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimise the primal problem.
    Solve(SolveArgs),
    /// Maximise the dual problem.
    Dual(SolveArgs),
    /// Solve both and report the duality gap.
    Gap(SolveArgs),
    /// Residuals of the optimality system for a candidate pair.
    Certify(CertifyArgs),
    /// Value function along `eps * u1`.
    Sweep(SweepArgs),
    /// Sampled lineality test of the recession functional.
    Lineality(LinealityArgs),
    /// Measure-driven ODE by Picard iteration.
    Ode(OdeArgs),
    /// Conjugate of an exact PLQ function or of sampled values.
    Conjugate(ConjugateArgs),
    /// Outer regularity and inner semicontinuity of domain maps.
    CheckRegularity(RegularityArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Measure file replacing the problem's perturbation.
    #[arg(long)]
    u: Option<PathBuf>,
    /// Re-grid uniformly with this many cells.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Primal arc (or a `solve` output).
    #[arg(long)]
    x: PathBuf,
    /// Dual arc (or a `dual` output).
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Measure file holding the direction `u1`.
    #[arg(long)]
    family: PathBuf,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long)]
    eps: String,
}

#[derive(Args, Debug)]
struct LinealityArgs {
    #[arg(long)]
    problem: PathBuf,
    /// JSON list of arcs.
    #[arg(long)]
    directions: PathBuf,
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args, Debug)]
struct OdeArgs {
    #[arg(long)]
    field: PathBuf,
    /// Driver measure; defaults to Lebesgue measure on the field grid.
    #[arg(long)]
    driver: Option<PathBuf>,
    /// Continuous forcing arc; defaults to zero.
    #[arg(long)]
    v: Option<PathBuf>,
    /// Initial value, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ConjugateArgs {
    /// PLQ term, or `{"samples": .., "dual": ..}` for the sampled transform.
    #[arg(long)]
    function: PathBuf,
}

#[derive(Args, Debug)]
struct RegularityArgs {
    /// Check both domain maps of a problem's integrand.
    #[arg(long, conflicts_with = "map", required_unless_present = "map")]
    problem: Option<PathBuf>,
    /// Check a single domain map.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long, value_enum)]
    side: Option<SideArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    TwoSided,
    Left,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::TwoSided => Side::TwoSided,
            SideArg::Left => Side::Left,
        }
    }
}

/// JSON text, CSV text and exit code.
struct Output {
    json: String,
    csv: Option<String>,
    code: i32,
}

impl Output {
    fn ok(json: String, csv: String) -> Self {
        Output { json, csv: Some(csv), code: 0 }
    }
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn run() -> i32 {
    run_with(std::env::args_os())
}

pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    let result = dispatch(&cli.command).and_then(|out| {
        emit(cli.out.as_deref(), &out.json)?;
        if let (Some(path), Some(csv)) = (&cli.csv, &out.csv) {
            std::fs::write(path, csv).map_err(|e| BolzaError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(out.code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            if let BolzaError::Infeasible(msg) = &e {
                let _ = emit(cli.out.as_deref(), &to_json(&json!({"value": "inf", "infeasible": msg})));
            }
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("BOLZA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        BolzaError::invalid(format!("BOLZA_THREADS must be a positive integer, got {raw:?}"))
    })?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn emit(out: Option<&Path>, json: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{json}\n")).map_err(|e| BolzaError::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{json}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn dispatch(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::Dual(a) => cmd_dual(a),
        Command::Gap(a) => cmd_gap(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Lineality(a) => cmd_lineality(a),
        Command::Ode(a) => cmd_ode(a),
        Command::Conjugate(a) => cmd_conjugate(a),
        Command::CheckRegularity(a) => cmd_regularity(a),
    }
}

fn load_problem(args: &SolveArgs) -> Result<(Problem, SolveConfig)> {
    let spec: ProblemSpec = read_json(&args.problem)?;
    let mut p = spec.build(args.grid)?;
    if let Some(path) = &args.u {
        let m: MeasureSpec = read_json(path)?;
        let m = if args.grid.is_some() { MeasureSpec { grid: None, ..m } } else { m };
        p.u = m.build(Some(p.base()))?;
    }
    let mut cfg = p.config.clone();
    if let Some(t) = args.tol {
        cfg.tol = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(m) = args.max_iters {
        cfg.max_iters = m;
    }
    cfg.validate()?;
    Ok((p, cfg))
}

fn code_for(converged: bool) -> i32 {
    if converged {
        0
    } else {
        BolzaError::NonConvergence(String::new()).exit_code()
    }
}

#[derive(Serialize)]
struct SolveOutput<D> {
    value: f64,
    decision: D,
    iterations: usize,
    converged: bool,
}

fn cmd_solve(args: &SolveArgs) -> Result<Output> {
    let (p, cfg) = load_problem(args)?;
    let r = solver::solve_primal(&p.k, &p.end, &p.u, &cfg)?;
    let out = SolveOutput {
        value: r.value,
        decision: ArcSpec::from_arc(&r.decision),
        iterations: r.summary.iterations,
        converged: r.converged,
    };
    Ok(Output { json: to_json(&out), csv: Some(r.decision.to_csv()), code: code_for(r.converged) })
}

fn cmd_dual(args: &SolveArgs) -> Result<Output> {
    let (p, cfg) = load_problem(args)?;
    let r = solver::solve_dual(&p.k, &p.end, &p.u, &cfg)?;
    let out = SolveOutput {
        value: r.value,
        decision: ContinuousArcSpec::from_arc(&r.decision),
        iterations: r.summary.iterations,
        converged: r.converged,
    };
    Ok(Output { json: to_json(&out), csv: Some(r.decision.to_csv()), code: code_for(r.converged) })
}

fn pair_csv(x: &BVArc, y: &ContinuousArc) -> Result<String> {
    let mut lines = x.to_csv().lines().map(str::to_owned).collect::<Vec<_>>().into_iter();
    let mut out = lines.next().unwrap_or_default();
    for c in 1..=y.dim() {
        write!(out, ",y_{c}").unwrap();
    }
    out.push('\n');
    for line in lines {
        let t: f64 = line.split(',').next().and_then(|s| s.parse().ok()).expect("arc samples start with t");
        out.push_str(&line);
        for v in y.eval(t)? {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

fn cmd_gap(args: &SolveArgs) -> Result<Output> {
    let (p, cfg) = load_problem(args)?;
    let r = solver::duality_gap(&p.k, &p.end, &p.u, &cfg)?;
    let converged = r.primal.converged && r.dual.converged;
    let out = json!({
        "primal": r.primal.value,
        "dual": r.dual.value,
        "gap": r.gap,
        "converged": converged,
        "iterations": {"primal": r.primal.summary.iterations, "dual": r.dual.summary.iterations},
        "primal_decision": ArcSpec::from_arc(&r.primal.decision),
        "dual_decision": ContinuousArcSpec::from_arc(&r.dual.decision),
    });
    let csv = pair_csv(&r.primal.decision, &r.dual.decision)?;
    Ok(Output { json: to_json(&out), csv: Some(csv), code: code_for(converged) })
}

fn load_pair(problem: &Problem, x: &Path, y: &Path) -> Result<(BVArc, ContinuousArc)> {
    let xs: Wrapped<ArcSpec> = read_json(x)?;
    let ys: Wrapped<ContinuousArcSpec> = read_json(y)?;
    let x = xs.into_inner().build(Some(problem.base()))?;
    let y = ys.into_inner().build(Some(problem.k.grid()))?;
    if x.base() != problem.base() {
        return Err(BolzaError::GridMismatch("primal arc and problem use different base measures".into()));
    }
    Ok((x, y))
}

fn fmt_ext(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        to_json(&ext_real::Wrapper(v)).trim_matches('"').to_owned()
    }
}

fn cmd_certify(args: &CertifyArgs) -> Result<Output> {
    let spec: ProblemSpec = read_json(&args.problem)?;
    let p = spec.build(args.grid)?;
    let (x, y) = load_pair(&p, &args.x, &args.y)?;
    let r = certify(&p.k, &p.end, &x, &y, args.tol)?;
    let csv = format!(
        "hamiltonian_residual_l1,singular_residual,transversality_residual,fenchel_gap,verdict\n{},{},{},{},{}\n",
        fmt_ext(r.hamiltonian_residual_l1),
        fmt_ext(r.singular_residual),
        fmt_ext(r.transversality_residual),
        fmt_ext(r.fenchel_gap),
        if r.verdict == Verdict::Pass { "pass" } else { "fail" }
    );
    let code = match r.verdict {
        Verdict::Pass => 0,
        Verdict::Fail => BolzaError::CertificationFailed(String::new()).exit_code(),
    };
    Ok(Output { json: to_json(&r), csv: Some(csv), code })
}

/// `a:b:step` (inclusive of `b` up to rounding) or `e1,e2,...`.
pub fn parse_eps(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| -> Result<f64> {
        t.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| BolzaError::invalid(format!("not a number: {t:?}")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, h) = (num(a)?, num(b)?, num(step)?);
            if !(h > 0.0) || b < a {
                return Err(BolzaError::invalid("eps range needs start <= stop and a positive step"));
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            if n > 100_000 {
                return Err(BolzaError::invalid("eps range has too many points"));
            }
            Ok((0..=n).map(|i| a + i as f64 * h).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(BolzaError::invalid("eps must be start:stop:step or a comma-separated list")),
    }
}

#[derive(Serialize)]
struct SweepRow {
    eps: f64,
    value: f64,
    dual_value: f64,
    slope: f64,
    y: ContinuousArcSpec,
}

fn cmd_sweep(args: &SweepArgs) -> Result<Output> {
    let (p, cfg) = load_problem(&args.solve)?;
    let m: MeasureSpec = read_json(&args.family)?;
    let m = if args.solve.grid.is_some() { MeasureSpec { grid: None, ..m } } else { m };
    let u1 = m.build(Some(p.base()))?;
    let eps = parse_eps(&args.eps)?;
    let r = solver::value_sweep(&p.k, &p.end, &u1, &eps, &cfg)?;
    let mut csv = String::from("eps,value,dual_value,slope\n");
    for q in &r.points {
        writeln!(csv, "{},{},{},{}", q.eps, q.value, q.dual_value, q.slope).unwrap();
    }
    let rows: Vec<SweepRow> = r
        .points
        .iter()
        .map(|q| SweepRow { eps: q.eps, value: q.value, dual_value: q.dual_value, slope: q.slope, y: ContinuousArcSpec::from_arc(&q.y) })
        .collect();
    let out = json!({
        "points": rows,
        "convexity_violation": r.convexity_violation,
        "subgradient_violation": r.subgradient_violation,
    });
    Ok(Output::ok(to_json(&out), csv))
}

fn cmd_lineality(args: &LinealityArgs) -> Result<Output> {
    let spec: ProblemSpec = read_json(&args.problem)?;
    let p = spec.build(args.grid)?;
    let specs: Vec<Wrapped<ArcSpec>> = read_json(&args.directions)?;
    let dirs = specs.into_iter().map(|s| s.into_inner().build(Some(p.base()))).collect::<Result<Vec<_>>>()?;
    let r = solver::check_lineality(&p.k, &p.end, &dirs)?;
    let mut csv = String::from("index,value,negated_value,passes,negation_passes\n");
    for (i, e) in r.entries.iter().enumerate() {
        writeln!(csv, "{i},{},{},{},{}", fmt_ext(e.value), fmt_ext(e.negated_value), e.passes, e.negation_passes).unwrap();
    }
    Ok(Output::ok(to_json(&r), csv))
}

fn parse_vector(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| BolzaError::invalid(format!("not a number: {t:?}"))))
        .collect()
}

fn cmd_ode(args: &OdeArgs) -> Result<Output> {
    let fs: FieldSpec = read_json(&args.field)?;
    let field = fs.build()?;
    let grid = field.grid().clone();
    let driver = match &args.driver {
        Some(path) => read_json::<DriverSpec>(path)?.build(&grid)?,
        None => DriverMeasure::atomless(&BaseMeasure::lebesgue(grid.clone())),
    };
    let v = match &args.v {
        Some(path) => read_json::<Wrapped<ContinuousArcSpec>>(path)?.into_inner().build(Some(&grid))?,
        None => ContinuousArc::constant(grid.clone(), vec![0.0; grid.dim()])?,
    };
    let a = parse_vector(&args.a)?;
    let (sol, residual) = picard_solve_from(&field, &driver, &v, &a, args.tol, None)?;
    let out = json!({
        "arc": ArcSpec::from_arc(&sol.arc),
        "iterations": sol.iterations,
        "last_step": sol.last_step,
        "fixed_point_residual": residual,
        "gronwall_bound": sol.gronwall_bound,
    });
    Ok(Output::ok(to_json(&out), sol.arc.to_csv()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConjugateInput {
    Sampled { samples: SampledConvex, dual: Axis },
    Exact(PlqSpec),
}

fn cmd_conjugate(args: &ConjugateArgs) -> Result<Output> {
    match read_json::<ConjugateInput>(&args.function)? {
        ConjugateInput::Exact(spec) => {
            let f: Plq = spec.build()?;
            let g = f.conjugate();
            let mut csv = String::from("lo,hi,a,p,q\n");
            let (dom_lo, dom_hi) = (g.lo(), g.hi());
            let mut lo = dom_lo;
            for (i, piece) in g.pieces().iter().enumerate() {
                let hi = g.breaks().get(i).copied().unwrap_or(dom_hi);
                writeln!(csv, "{},{},{},{},{}", fmt_ext(lo), fmt_ext(hi), piece.a, piece.p, piece.q).unwrap();
                lo = hi;
            }
            Ok(Output::ok(to_json(&g), csv))
        }
        ConjugateInput::Sampled { samples, dual } => {
            let g = llt_conjugate(&samples, &dual)?;
            let mut csv = String::from("w,value\n");
            for (w, v) in g.axis.points().zip(&g.values) {
                writeln!(csv, "{w},{}", fmt_ext(*v)).unwrap();
            }
            Ok(Output::ok(to_json(&g), csv))
        }
    }
}

fn regularity_rows(csv: &mut String, name: &str, r: &RegularityReport) {
    for b in &r.breakpoints {
        writeln!(csv, "{name},{},{},{},{}", b.node, b.t, b.outer_regular, b.inner_semicontinuous).unwrap();
    }
}

fn cmd_regularity(args: &RegularityArgs) -> Result<Output> {
    let mut csv = String::from("map,node,t,outer_regular,inner_semicontinuous\n");
    if let Some(path) = &args.map {
        let map: DomainMap = read_json::<DomainMap>(path)?.validate()?;
        let r = check_regularity(&map, args.side.map_or(Side::TwoSided, Side::from));
        regularity_rows(&mut csv, "map", &r);
        return Ok(Output::ok(to_json(&r), csv));
    }
    let path = args.problem.as_ref().expect("clap requires --problem or --map");
    let p = read_json::<ProblemSpec>(path)?.build(None)?;
    let (dom1, dom2) = domain_maps(&p.k);
    let state = check_regularity(&dom1, args.side.map_or(Side::Left, Side::from));
    let velocity = check_regularity(&dom2, args.side.map_or(Side::TwoSided, Side::from));
    regularity_rows(&mut csv, "state", &state);
    regularity_rows(&mut csv, "dual_velocity", &velocity);
    let out = json!({
        "state_domain": state,
        "dual_velocity_domain": velocity,
        "hypotheses_verified": state.outer_regular && velocity.outer_regular,
    });
    Ok(Output::ok(to_json(&out), csv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_ranges() {
        assert_eq!(parse_eps("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_eps("0:1:0.1").unwrap().len(), 11);
        assert_eq!(parse_eps("0.5, 2").unwrap(), vec![0.5, 2.0]);
        assert!(parse_eps("1:0:0.1").is_err());
        assert!(parse_eps("0:1:0").is_err());
        assert!(parse_eps("a").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
