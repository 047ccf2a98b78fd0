use std::fmt;
use std::io::{self, Write};

use nfunc::general::{general_solve, Branch, Form, GeneralProblem};
use nfunc::oracle::{check_identity, newton_solve, Identity};
use nfunc::tables::{reproduce, table, Cell, RowReport, TableKind};
use nfunc::transforms::{canonicalize, solve_transformed, Shape, TransformableEquation};
use nfunc::{
    nfunc, solve_method1, solve_method2, solve_method3, Error, Method, SolveConfig, SolveResult,
    Status,
};
use serde::Serialize;

use crate::output::{emit, sig10, Format, Human, OutputRecord};
use crate::{BranchArg, Cli, Command, FormArg, GlobalOpts, PlotKind};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solve(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Solve(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Solve(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Bad input maps to a usage error, anything else to a solve failure.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. }
            | Error::NonFinite { .. }
            | Error::InvalidConfig(_)
            | Error::Untransformable(_) => CliError::Usage(e.to_string()),
            _ => CliError::Solve(e.to_string()),
        }
    }
}

type CmdResult = Result<i32, CliError>;

pub fn parse_method(s: &str) -> Result<Method, String> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "method1" => Ok(Method::Method1),
        "2" | "method2" => Ok(Method::Method2),
        "3" | "method3" => Ok(Method::Method3),
        "auto" => Ok(Method::Auto),
        _ => Err(format!("unknown method '{s}' (expected 1, 2, 3 or auto)")),
    }
}

/// A finite number, optionally written as `X=…`.
pub fn parse_number(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    let t = t
        .strip_prefix("X=")
        .or_else(|| t.strip_prefix("x="))
        .unwrap_or(t);
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Usage(format!("'{s}' is not a finite number"))),
    }
}

/// A number or a fraction `a/b`.
pub fn parse_ratio(s: &str) -> Result<f64, CliError> {
    match s.split_once('/') {
        Some((a, b)) => {
            let (a, b) = (parse_number(a)?, parse_number(b)?);
            if b == 0.0 {
                return Err(CliError::Usage(format!("'{s}' divides by zero")));
            }
            Ok(a / b)
        }
        None => parse_number(s),
    }
}

fn config(g: &GlobalOpts) -> Result<SolveConfig, CliError> {
    let guess = match (g.z1, g.y1) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("give at most one of --z1 and --y1".into()))
        }
        (a, b) => a.or(b),
    };
    let cfg = SolveConfig {
        initial_guess: guess,
        tol: g.tol,
        max_iter: g.max_iter,
        method: g.method,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn branch(b: BranchArg) -> Branch {
    match b {
        BranchArg::Lower => Branch::Lower,
        BranchArg::Upper => Branch::Upper,
    }
}

fn status_code(results: impl IntoIterator<Item = bool>) -> i32 {
    if results.into_iter().all(|ok| ok) {
        0
    } else {
        2
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    let g = &cli.global;
    let format = g.format.unwrap_or(Format::Human);
    match &cli.command {
        Command::Solve { x } => cmd_solve(g, format, x, out),
        Command::General { p, x, form } => cmd_general(g, format, p, x, *form, out),
        Command::Transform { shape, params } => cmd_transform(g, format, shape, params, out),
        Command::Table { n } => cmd_table(g, format, *n, out),
        Command::SweepInit { x, guesses } => cmd_sweep_init(g, format, x, guesses, out),
        Command::CompareNewton { x, guesses } => cmd_compare_newton(g, format, x, guesses, out),
        Command::PlotData { what } => {
            let format = g.format.unwrap_or(Format::Csv);
            match what {
                PlotKind::Curve { lo, hi, samples } => {
                    cmd_plot_curve(g, format, lo, hi, *samples, out)
                }
                PlotKind::Trace { x } => cmd_plot_trace(g, format, x, out),
            }
        }
        Command::Identities => cmd_identities(format, out),
    }
}

fn method_used(x: f64, m: Method) -> &'static str {
    if x == 0.0 {
        "exact"
    } else if x < 0.0 {
        "method3"
    } else if m == Method::Method1 {
        "method1"
    } else {
        "method2"
    }
}

fn record(command: &str, x: f64, method: &str, r: &SolveResult) -> OutputRecord {
    OutputRecord {
        command: command.into(),
        x,
        p: None,
        form: None,
        method: method.into(),
        branch: None,
        initial_guess: (!r.trace.is_empty()).then_some(r.initial_guess),
        y: r.y,
        residual: r.final_residual,
        relative_error: r.relative_error_estimate,
        iterations: r.iterations(),
        status: r.status.name().into(),
        precision_limited: r.precision_limited,
        retried: r.retried,
    }
}

fn cmd_solve(g: &GlobalOpts, format: Format, xs: &[String], out: &mut dyn Write) -> CmdResult {
    let cfg = config(g)?;
    let xs = xs
        .iter()
        .map(|s| parse_number(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for x in xs {
        let r = nfunc(x, &cfg)?;
        rows.push(record("solve", x, method_used(x, cfg.method), &r));
    }
    emit(format, &rows, out)?;
    Ok(status_code(
        rows.iter().map(|r| r.status == Status::Converged.name()),
    ))
}

fn cmd_general(
    g: &GlobalOpts,
    format: Format,
    p: &str,
    x: &str,
    form: FormArg,
    out: &mut dyn Write,
) -> CmdResult {
    let cfg = config(g)?;
    let p = parse_ratio(p.trim_start_matches("p="))?;
    let x = parse_number(x)?;
    let form = match form {
        FormArg::Positive => Form::PositiveExp,
        FormArg::Negative => Form::NegativeExp,
    };
    let prob = GeneralProblem::new(p, x, form)?;
    let branches: Vec<Option<Branch>> = if prob.has_two_branches() {
        match g.branch {
            Some(b) => vec![Some(branch(b))],
            None => vec![Some(Branch::Lower), Some(Branch::Upper)],
        }
    } else {
        vec![None]
    };
    let mut rows = Vec::new();
    let mut code = 0;
    for b in branches {
        let prob = b.map_or(prob, |b| prob.on_branch(b));
        match general_solve(&prob, &cfg) {
            Ok(r) => {
                let mut rec = record("general", x, "general", &r);
                rec.p = Some(p);
                rec.form = Some(
                    match form {
                        Form::PositiveExp => "positive",
                        Form::NegativeExp => "negative",
                    }
                    .into(),
                );
                rec.branch = b.map(|b| b.name().to_string());
                if !r.converged() {
                    code = 2;
                }
                rows.push(rec);
            }
            Err(e @ Error::NoSolutionOnBranch { .. }) => {
                eprintln!("{e}");
                code = 2;
            }
            Err(e) => return Err(e.into()),
        }
    }
    emit(format, &rows, out)?;
    Ok(code)
}

#[derive(Debug, Serialize)]
struct TransformRecord {
    shape: &'static str,
    equation: &'static str,
    params: String,
    canonical_p: f64,
    canonical_x: f64,
    back_map: String,
    z: f64,
    residual: f64,
    iterations: usize,
    status: String,
}

impl Human for TransformRecord {
    fn human(&self) -> String {
        format!(
            "{} [{}]  canonical: y^{} e^(e^y) = {}, {}\n  z = {}  residual = {:.2e}  iterations = {}  status = {}",
            self.equation,
            self.params,
            sig10(self.canonical_p),
            sig10(self.canonical_x),
            self.back_map,
            sig10(self.z),
            self.residual,
            self.iterations,
            self.status
        )
    }
}

fn cmd_transform(
    g: &GlobalOpts,
    format: Format,
    shape: &str,
    params: &[String],
    out: &mut dyn Write,
) -> CmdResult {
    if shape == "list" {
        for s in Shape::ALL {
            writeln!(
                out,
                "{:<20} {:<26} params: {}",
                s.name(),
                s.equation(),
                s.params().join(", ")
            )?;
        }
        return Ok(0);
    }
    let cfg = config(g)?;
    let shape = Shape::from_name(shape).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown shape '{shape}'; `transform list` shows the shapes"
        ))
    })?;
    let mut parsed = Vec::new();
    for kv in params {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("parameter '{kv}' is not name=value")))?;
        parsed.push((k.trim(), parse_ratio(v)?));
    }
    let mut eq = TransformableEquation::new(shape, &parsed)?;
    if let Some(b) = g.branch {
        eq = eq.on_branch(branch(b));
    }
    let c = canonicalize(&eq)?;
    let r = solve_transformed(&eq, &cfg)?;
    let rec = TransformRecord {
        shape: shape.name(),
        equation: shape.equation(),
        params: eq
            .params()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" "),
        canonical_p: c.p,
        canonical_x: c.x,
        back_map: c.back_map.description.clone(),
        z: r.y,
        residual: r.final_residual,
        iterations: r.iterations(),
        status: r.status.name().into(),
    };
    emit(format, std::slice::from_ref(&rec), out)?;
    Ok(status_code([r.converged()]))
}

#[derive(Debug, Serialize)]
struct TableCellRecord {
    table: u8,
    row: usize,
    x: f64,
    p: Option<&'static str>,
    branch: Option<&'static str>,
    start: f64,
    cell: String,
    printed: f64,
    computed: f64,
    relative_difference: f64,
    flag: &'static str,
}

impl Human for TableCellRecord {
    fn human(&self) -> String {
        format!(
            "{} {} {} {}",
            self.cell,
            sig10(self.computed),
            sig10(self.printed),
            self.flag
        )
    }
}

fn cell_record(n: u8, i: usize, rep: &RowReport, c: &Cell) -> TableCellRecord {
    TableCellRecord {
        table: n,
        row: i + 1,
        x: rep.row.x,
        p: rep.row.p_label,
        branch: rep.row.branch.map(|b| b.name()),
        start: rep.row.start,
        cell: c.label.clone(),
        printed: c.printed,
        computed: c.computed,
        relative_difference: nfunc::tables::relative_difference(c.computed, c.printed),
        flag: c.status.name(),
    }
}

fn cmd_table(g: &GlobalOpts, format: Format, n: u8, out: &mut dyn Write) -> CmdResult {
    let t = table(n).ok_or_else(|| CliError::Usage(format!("no table {n}")))?;
    let cfg = SolveConfig {
        tol: g.tol,
        max_iter: g.max_iter,
        ..SolveConfig::default()
    };
    cfg.validate()?;
    let reports = reproduce(&t, &cfg);
    if format != Format::Human {
        let rows: Vec<TableCellRecord> = reports
            .iter()
            .enumerate()
            .flat_map(|(i, rep)| {
                rep.cells
                    .iter()
                    .chain(std::iter::once(&rep.actual))
                    .map(move |c| cell_record(n, i, rep, c))
            })
            .collect();
        emit(format, &rows, out)?;
        return Ok(0);
    }
    let sym = match t.kind {
        TableKind::Method3 | TableKind::NegativeExp => "y",
        _ => "z",
    };
    writeln!(out, "Table {n}: {}", t.title)?;
    writeln!(
        out,
        "columns: computed (printed) flag; flags: ok ≤ 1e-8, NEAR ≤ 1e-6, FAIL above"
    )?;
    for (i, rep) in reports.iter().enumerate() {
        let mut head = format!("row {}: X = {}", i + 1, sig10(rep.row.x));
        if let Some(p) = rep.row.p_label {
            head += &format!("  p = {p}");
        }
        if let Some(b) = rep.row.branch {
            head += &format!("  branch = {}", b.name());
        }
        head += &format!("  {sym}1 = {}", sig10(rep.row.start));
        match &rep.result {
            Ok(r) if r.retried => {
                head += &format!(
                    "  [left the domain; restarted from {} so iterates are not comparable]",
                    sig10(r.initial_guess)
                )
            }
            Ok(r) => head += &format!("  [{}, {} corrections]", r.status.name(), r.iterations()),
            Err(e) => head += &format!("  [error: {e}]"),
        }
        writeln!(out, "{head}")?;
        for c in rep.cells.iter().chain(std::iter::once(&rep.actual)) {
            writeln!(
                out,
                "  {:<7} {:>18} ({}) {}",
                c.label,
                sig10(c.computed),
                sig10(c.printed),
                c.status.name()
            )?;
        }
    }
    Ok(0)
}

fn positive_method(m: Method) -> Result<Method, CliError> {
    match m {
        Method::Method1 => Ok(Method::Method1),
        Method::Method2 | Method::Auto => Ok(Method::Method2),
        Method::Method3 => Err(CliError::Usage(
            "this command takes --method 1 or --method 2".into(),
        )),
    }
}

fn solve_positive(x: f64, m: Method, cfg: &SolveConfig) -> nfunc::Result<SolveResult> {
    match m {
        Method::Method1 => solve_method1(x, cfg),
        _ => solve_method2(x, cfg),
    }
}

#[derive(Debug, Serialize)]
struct SweepRecord {
    x: f64,
    method: &'static str,
    guess: f64,
    y: f64,
    iterations: usize,
    status: String,
    retried: bool,
    max_deviation: f64,
}

impl Human for SweepRecord {
    fn human(&self) -> String {
        format!(
            "z1 = {:<12} y = {}  iterations = {}  status = {}{}  max deviation = {:.2e}",
            sig10(self.guess),
            sig10(self.y),
            self.iterations,
            self.status,
            if self.retried { " (restarted)" } else { "" },
            self.max_deviation
        )
    }
}

fn cmd_sweep_init(
    g: &GlobalOpts,
    format: Format,
    x: &str,
    guesses: &[String],
    out: &mut dyn Write,
) -> CmdResult {
    let cfg = config(g)?;
    let m = positive_method(cfg.method)?;
    let x = parse_number(x)?;
    if x <= 0.0 {
        return Err(CliError::Usage("sweep-init needs X > 0".into()));
    }
    let guesses = guesses
        .iter()
        .map(|s| parse_number(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut runs = Vec::new();
    for &z1 in &guesses {
        if z1 <= 0.0 {
            return Err(CliError::Usage(format!("guess {z1} must be positive")));
        }
        runs.push((z1, solve_positive(x, m, &cfg.clone().with_guess(z1))));
    }
    let ys: Vec<f64> = runs
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok().filter(|r| r.converged()).map(|r| r.y))
        .collect();
    let deviation = match (
        ys.iter().cloned().reduce(f64::max),
        ys.iter().cloned().reduce(f64::min),
    ) {
        (Some(hi), Some(lo)) => hi - lo,
        _ => f64::NAN,
    };
    let rows: Vec<SweepRecord> = runs
        .iter()
        .map(|(z1, r)| match r {
            Ok(r) => SweepRecord {
                x,
                method: m.name(),
                guess: *z1,
                y: r.y,
                iterations: r.iterations(),
                status: r.status.name().into(),
                retried: r.retried,
                max_deviation: deviation,
            },
            Err(e) => SweepRecord {
                x,
                method: m.name(),
                guess: *z1,
                y: f64::NAN,
                iterations: 0,
                status: format!("error: {e}"),
                retried: false,
                max_deviation: deviation,
            },
        })
        .collect();
    emit(format, &rows, out)?;
    Ok(if ys.is_empty() { 2 } else { 0 })
}

#[derive(Debug, Serialize)]
struct CompareRecord {
    x: f64,
    method: &'static str,
    guess: f64,
    quadratic_iterations: usize,
    quadratic_status: String,
    quadratic_retried: bool,
    quadratic_y: f64,
    newton_iterations: usize,
    newton_status: String,
    newton_y: f64,
}

impl Human for CompareRecord {
    fn human(&self) -> String {
        format!(
            "z1 = {:<12} quadratic: {} in {}{} -> y = {}   newton: {} in {} -> y = {}",
            sig10(self.guess),
            self.quadratic_status,
            self.quadratic_iterations,
            if self.quadratic_retried {
                " (restarted)"
            } else {
                ""
            },
            sig10(self.quadratic_y),
            self.newton_status,
            self.newton_iterations,
            sig10(self.newton_y)
        )
    }
}

/// Newton's method on the same equation in `z` the quadratic scheme uses.
fn newton_row(x: f64, m: Method, z1: f64, cfg: &SolveConfig) -> (usize, String, f64) {
    let run = match m {
        Method::Method1 => newton_solve(
            |z: f64| z * z.ln().ln() - x,
            |z: f64| z.ln().ln() + 1.0 / z.ln(),
            z1,
            cfg.tol,
            cfg.max_iter,
        ),
        _ => {
            let ln_x = x.ln();
            newton_solve(
                |z: f64| z + z.ln().ln() - ln_x,
                |z: f64| 1.0 + 1.0 / (z * z.ln()),
                z1,
                cfg.tol,
                cfg.max_iter,
            )
        }
    };
    match run {
        Ok(r) => {
            let y = match m {
                Method::Method1 => r.y.ln().ln(),
                _ => r.y.ln(),
            };
            let status = if r.converged() && y.is_finite() {
                "converged".to_string()
            } else if r.converged() || r.status == Status::LeftDomain {
                "diverged".to_string()
            } else {
                r.status.name().to_string()
            };
            (r.iterations(), status, y)
        }
        Err(Error::DerivativeZero { .. }) => (0, "zero derivative".into(), f64::NAN),
        Err(e) => (0, format!("error: {e}"), f64::NAN),
    }
}

fn cmd_compare_newton(
    g: &GlobalOpts,
    format: Format,
    x: &str,
    guesses: &[String],
    out: &mut dyn Write,
) -> CmdResult {
    let cfg = config(g)?;
    let m = positive_method(cfg.method)?;
    let x = parse_number(x)?;
    if x <= 0.0 {
        return Err(CliError::Usage("compare-newton needs X > 0".into()));
    }
    let mut rows = Vec::new();
    for s in guesses {
        let z1 = parse_number(s)?;
        let (qi, qs, qr, qy) = match solve_positive(x, m, &cfg.clone().with_guess(z1)) {
            Ok(r) => (r.iterations(), r.status.name().to_string(), r.retried, r.y),
            Err(e) => (0, format!("error: {e}"), false, f64::NAN),
        };
        let (ni, ns, ny) = newton_row(x, m, z1, &cfg);
        rows.push(CompareRecord {
            x,
            method: m.name(),
            guess: z1,
            quadratic_iterations: qi,
            quadratic_status: qs,
            quadratic_retried: qr,
            quadratic_y: qy,
            newton_iterations: ni,
            newton_status: ns,
            newton_y: ny,
        });
    }
    emit(format, &rows, out)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct CurveRecord {
    x: f64,
    y: f64,
    status: &'static str,
}

impl Human for CurveRecord {
    fn human(&self) -> String {
        format!("{} {}", sig10(self.x), sig10(self.y))
    }
}

fn cmd_plot_curve(
    g: &GlobalOpts,
    format: Format,
    lo: &str,
    hi: &str,
    samples: usize,
    out: &mut dyn Write,
) -> CmdResult {
    let cfg = config(g)?;
    let (lo, hi) = (parse_number(lo)?, parse_number(hi)?);
    if samples == 0 {
        return Err(CliError::Usage("sample count must be at least 1".into()));
    }
    if hi < lo {
        return Err(CliError::Usage(format!("empty range [{lo}, {hi}]")));
    }
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let x = if samples == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (samples - 1) as f64
        };
        let r = nfunc(x, &cfg)?;
        rows.push(CurveRecord {
            x,
            y: r.y,
            status: r.status.name(),
        });
    }
    emit(format, &rows, out)?;
    Ok(status_code(
        rows.iter().map(|r| r.status == Status::Converged.name()),
    ))
}

#[derive(Debug, Serialize)]
struct TraceRecord {
    iteration: usize,
    iterate: f64,
    correction: Option<f64>,
    residual: Option<f64>,
}

impl Human for TraceRecord {
    fn human(&self) -> String {
        format!("{} {}", self.iteration, sig10(self.iterate))
    }
}

fn cmd_plot_trace(g: &GlobalOpts, format: Format, x: &str, out: &mut dyn Write) -> CmdResult {
    let cfg = config(g)?;
    let x = parse_number(x)?;
    let r = match cfg.method {
        Method::Method3 => solve_method3(x.abs(), &cfg)?,
        Method::Auto if x < 0.0 => solve_method3(-x, &cfg)?,
        _ => nfunc(x, &cfg)?,
    };
    if r.retried {
        eprintln!(
            "note: left the domain; trace restarts from {}",
            r.initial_guess
        );
    }
    let mut rows = Vec::new();
    if let Some(first) = r.trace.first() {
        rows.push(TraceRecord {
            iteration: 1,
            iterate: first.iterate_before,
            correction: None,
            residual: None,
        });
    }
    for s in &r.trace {
        rows.push(TraceRecord {
            iteration: s.index + 1,
            iterate: s.iterate_after,
            correction: Some(s.a),
            residual: Some(s.residual),
        });
    }
    emit(format, &rows, out)?;
    Ok(status_code([r.converged()]))
}

#[derive(Debug, Serialize)]
struct IdentityRecord {
    identity: String,
    argument: f64,
    n_value: f64,
    expected: f64,
    relative_error: f64,
    pass: bool,
}

impl Human for IdentityRecord {
    fn human(&self) -> String {
        format!(
            "{:<44} N = {:<14} expected {:<14} rel err {:.1e}  {}",
            self.identity,
            sig10(self.n_value),
            sig10(self.expected),
            self.relative_error,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

fn cmd_identities(format: Format, out: &mut dyn Write) -> CmdResult {
    let rows: Vec<IdentityRecord> = Identity::standard_set()
        .into_iter()
        .map(|id| {
            let c = check_identity(id);
            IdentityRecord {
                identity: c.label,
                argument: c.argument,
                n_value: c.lhs,
                expected: c.rhs,
                relative_error: c.relative_error,
                pass: c.pass,
            }
        })
        .collect();
    emit(format, &rows, out)?;
    Ok(status_code(rows.iter().map(|r| r.pass)))
}
