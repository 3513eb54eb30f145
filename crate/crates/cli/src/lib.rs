//! Command dispatch and report rendering for the `hyperres` binary.
//!
//! Every command builds one [`Report`], which renders either as fixed
//! 6-decimal text or as JSON with 12 significant digits. Vertex indices are
//! 1-based on both sides of this boundary.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use hyperres::bounds::{certify, l1_norm_sandwich, BoundsReport, NormSandwich};
use hyperres::hd_laplacian::{hd_pinv_laplacian, penrose_residuals, HDMatrix};
use hyperres::hessian::{assemble_hessian, fd_hessian_oracle, Method, Target};
use hyperres::resistance::{
    biharmonic_distance, hd_kirchhoff, hd_resistance, hd_resistance_all, kirchhoff, resistance,
};
use hyperres::{GraphContext, HyperDual, Perturbation, RealMatrix, WeightedGraph};
use serde_json::{Map, Number, Value};

/// Residual ceiling for the `check` self-verification suite.
pub const CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Hessian,
    Bounds,
    Check,
    Perturb,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Hessian => "hessian",
            Command::Bounds => "bounds",
            Command::Check => "check",
            Command::Perturb => "perturb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetKind {
    Resistance,
    #[default]
    Kirchhoff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub graph_path: PathBuf,
    pub perturbation_path: Option<PathBuf>,
    /// 1-based vertex pair.
    pub pair: Option<(usize, usize)>,
    pub format: Format,
    pub rank_tol: Option<f64>,
    pub fd_step: Option<f64>,
    pub method: Method,
    pub target: TargetKind,
}

impl RunConfig {
    pub fn new(command: Command, graph_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            graph_path: graph_path.into(),
            perturbation_path: None,
            pair: None,
            format: Format::Text,
            rank_tol: None,
            fd_step: None,
            method: Method::ClosedForm,
            target: TargetKind::Kirchhoff,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit code 1.
    Input(String),
    /// Numerical failure or violated invariant: exit code 2.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<hyperres::Error> for CliError {
    fn from(e: hyperres::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

/// Runs one command, writing the report to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let rendered = execute(config).and_then(|report| {
        let text = match config.format {
            Format::Json => report.to_json()?,
            Format::Text => report.to_text()?,
        };
        Ok((report, text))
    });
    match rendered {
        Ok((report, text)) => {
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                let _ = writeln!(err, "error: failed to write output");
                return 2;
            }
            if report.violations.is_empty() {
                0
            } else {
                for v in &report.violations {
                    let _ = writeln!(err, "violation: {v}");
                }
                2
            }
        }
        Err(e) => {
            let kind = if e.exit_code() == 1 { "input error" } else { "numerical error" };
            let _ = writeln!(err, "{kind}: {}", e.message());
            e.exit_code()
        }
    }
}

/// Computes the report for `config` without rendering it.
pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    let graph = read_graph(config)?;
    let ctx = match config.rank_tol {
        Some(tol) => GraphContext::with_rank_tol(&graph, tol)?,
        None => GraphContext::new(&graph)?,
    };
    let pair = config.pair.map(|p| to_zero_based(p, graph.vertex_count())).transpose()?;
    let perturbation = config
        .perturbation_path
        .as_ref()
        .map(|path| read_text(path).and_then(|t| Ok(Perturbation::parse(&t, &graph)?)))
        .transpose()?;

    let mut report = Report::new(config.command, &graph);
    match config.command {
        Command::Analyze => analyze(&ctx, pair, &mut report)?,
        Command::Hessian => hessian(&ctx, config, pair, &mut report)?,
        Command::Bounds => bounds(&ctx, perturbation.as_ref(), &mut report)?,
        Command::Check => {
            let p = perturbation.unwrap_or_else(|| Perturbation::zeros(graph.edge_count()));
            check(&ctx, &p, &mut report)?
        }
        Command::Perturb => {
            let p = perturbation.ok_or_else(|| CliError::Input("perturb requires --perturbation".into()))?;
            perturb(&ctx, &p, pair, &mut report)?
        }
    }
    Ok(report)
}

fn read_text(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_graph(config: &RunConfig) -> Result<WeightedGraph, CliError> {
    Ok(WeightedGraph::parse(&read_text(&config.graph_path)?)?)
}

fn to_zero_based((i, j): (usize, usize), n: usize) -> Result<(usize, usize), CliError> {
    for v in [i, j] {
        if v == 0 || v > n {
            return Err(CliError::Input(format!("vertex {v} out of range 1..={n}")));
        }
    }
    Ok((i - 1, j - 1))
}

fn analyze(ctx: &GraphContext, pair: Option<(usize, usize)>, r: &mut Report) -> Result<(), CliError> {
    let kf = kirchhoff(ctx);
    r.result("kirchhoff", Field::Num(kf));
    r.text(format!("Kf = {}", fixed(kf)));
    if let Some((i, j)) = pair {
        let res = resistance(ctx, i, j)?;
        let bh = biharmonic_distance(ctx, i, j)?;
        r.result("pair", pair_field((i, j)));
        r.result("resistance", Field::Num(res));
        r.result("biharmonic_distance", Field::Num(bh));
        r.text(format!("R({},{}) = {}", i + 1, j + 1, fixed(res)));
        r.text(format!("biharmonic({},{}) = {}", i + 1, j + 1, fixed(bh)));
    }
    let spectrum = ctx.spectrum();
    r.result(
        "spectrum",
        Field::obj([
            ("eigenvalues", Field::nums(&spectrum.eigenvalues)),
            ("lambda_max", Field::Num(ctx.lambda_max())),
            ("algebraic_connectivity", Field::Num(ctx.algebraic_connectivity())),
        ]),
    );
    r.text(format!("lambda_max = {}", fixed(ctx.lambda_max())));
    r.text(format!("algebraic_connectivity = {}", fixed(ctx.algebraic_connectivity())));
    r.text(format!("eigenvalues = {}", fixed_list(&spectrum.eigenvalues)));
    Ok(())
}

fn hessian(
    ctx: &GraphContext,
    config: &RunConfig,
    pair: Option<(usize, usize)>,
    r: &mut Report,
) -> Result<(), CliError> {
    let target = match config.target {
        TargetKind::Kirchhoff => Target::Kirchhoff,
        TargetKind::Resistance => {
            let (i, j) = pair.ok_or_else(|| CliError::Input("--target resistance requires --pair".into()))?;
            Target::Resistance { i, j }
        }
    };
    let h = assemble_hessian(ctx, target, config.method)?;
    let (mu_min, mu_max) = h.extreme_eigs()?;
    let step = config.fd_step.unwrap_or_else(|| hyperres::hessian::default_fd_step(ctx.graph()));
    let fd = fd_hessian_oracle(ctx.graph(), target, Some(step))?;
    let fd_diff = h.max_abs_diff(&fd);

    let method = match config.method {
        Method::ClosedForm => "closed_form",
        Method::Polarization => "polarization",
    };
    match target {
        Target::Resistance { i, j } => {
            r.result("target", Field::Str("resistance".into()));
            r.result("pair", pair_field((i, j)));
        }
        Target::Kirchhoff => r.result("target", Field::Str("kirchhoff".into())),
    }
    r.result("method", Field::Str(method.into()));
    r.result("matrix", matrix_field(&h.matrix));
    r.result("eigenvalues", Field::obj([("min", Field::Num(mu_min)), ("max", Field::Num(mu_max))]));
    r.result("fd_step", Field::Num(step));
    r.residual("fd_max_abs_diff", Field::Num(fd_diff));

    r.text(format!("hessian of {target} ({method})"));
    for row in h.matrix.row_iter() {
        r.text(format!("  {}", fixed_list(&row.iter().copied().collect::<Vec<_>>())));
    }
    r.text(format!("mu_min = {}", fixed(mu_min)));
    r.text(format!("mu_max = {}", fixed(mu_max)));
    r.text(format!("fd_max_abs_diff = {:.3e} (h = {:.3e})", fd_diff, step));
    Ok(())
}

fn bounds(ctx: &GraphContext, p: Option<&Perturbation>, r: &mut Report) -> Result<(), CliError> {
    let b: BoundsReport = certify(ctx, p)?;
    let pairs: Vec<Field> = b
        .pairs
        .iter()
        .map(|pb| {
            Field::obj([
                ("pair", pair_field(pb.pair)),
                ("biharmonic_distance", Field::Num(pb.biharmonic)),
                ("bound", Field::Num(pb.bound)),
                ("observed_min", Field::Num(pb.observed_min)),
                ("observed_max", Field::Num(pb.observed_max)),
            ])
        })
        .collect();
    r.result("lambda_max", Field::Num(b.lambda_max));
    r.result("algebraic_connectivity", Field::Num(b.algebraic_connectivity));
    r.result("max_degree", Field::Int(b.max_degree as i64));
    r.result("max_weighted_degree", Field::Num(b.max_weighted_degree));
    r.result("resistance_pairs", Field::List(pairs));
    r.result("resistance_coarse_bound", Field::Num(b.resistance_coarse_bound));
    r.result("kirchhoff_bounds", Field::nums(&[b.kirchhoff_bounds.0, b.kirchhoff_bounds.1]));
    r.result("kirchhoff_observed", Field::nums(&[b.kirchhoff_observed.0, b.kirchhoff_observed.1]));
    r.result("weight_cap", Field::Num(b.weight_cap));
    r.result("strong_convexity_alpha", Field::Num(b.strong_convexity_alpha));
    if let Some(s) = b.sandwich {
        r.result("l1_sandwich", sandwich_field(&s));
    }

    r.text(format!("lambda_max = {}", fixed(b.lambda_max)));
    r.text(format!("algebraic_connectivity = {}", fixed(b.algebraic_connectivity)));
    r.text(format!("max_degree = {}", b.max_degree));
    r.text(format!("max_weighted_degree = {}", fixed(b.max_weighted_degree)));
    for pb in &b.pairs {
        r.text(format!(
            "R({},{}): mu_max = {} <= bound {} (coarse {})",
            pb.pair.0 + 1,
            pb.pair.1 + 1,
            fixed(pb.observed_max),
            fixed(pb.bound),
            fixed(b.resistance_coarse_bound)
        ));
    }
    r.text(format!(
        "Kf: {} <= mu in [{}, {}] <= {}",
        fixed(b.kirchhoff_bounds.0),
        fixed(b.kirchhoff_observed.0),
        fixed(b.kirchhoff_observed.1),
        fixed(b.kirchhoff_bounds.1)
    ));
    r.text(format!("strong_convexity_alpha = {} (M = {})", fixed(b.strong_convexity_alpha), fixed(b.weight_cap)));
    if let Some(s) = b.sandwich {
        r.text(sandwich_text(&s));
    }
    r.violations.extend(b.violations);
    Ok(())
}

fn check(ctx: &GraphContext, p: &Perturbation, r: &mut Report) -> Result<(), CliError> {
    ctx.graph().check_perturbation(p)?;
    let a = HDMatrix::graph_laplacian(ctx, p)?;
    let x = hd_pinv_laplacian(ctx, &a.eps)?;
    let pen = penrose_residuals(&a, &x)?;

    let n = ctx.n();
    let jn = RealMatrix::from_element(n, n, 1.0 / n as f64);
    let shifted =
        (ctx.laplacian() + &jn).try_inverse().ok_or_else(|| CliError::Numerical("L + J/n is singular".into()))?;
    let identity_residual = (ctx.pinv() - (shifted - jn)).norm();
    let sandwich = l1_norm_sandwich(ctx.graph(), p)?;

    let named = [
        ("axa_minus_a", pen.axa_minus_a),
        ("xax_minus_x", pen.xax_minus_x),
        ("ax_symmetry", pen.ax_symmetry),
        ("xa_symmetry", pen.xa_symmetry),
    ];
    r.residual("penrose", Field::obj(named.map(|(k, v)| (k, Field::Num(v)))));
    r.residual("projector", Field::Num(pen.projector));
    r.residual("pseudoinverse_identity", Field::Num(identity_residual));
    r.result("l1_sandwich", sandwich_field(&sandwich));

    for (k, v) in named.into_iter().chain([("projector", pen.projector), ("pseudoinverse_identity", identity_residual)])
    {
        r.text(format!("{k} = {v:.3e}"));
        if !(v <= CHECK_TOL) {
            r.violations.push(format!("{k} residual {v:e} exceeds {CHECK_TOL:e}"));
        }
    }
    r.text(sandwich_text(&sandwich));
    if !sandwich.holds {
        r.violations
            .push(format!("L1 norm sandwich fails: {} <= {} <= {}", sandwich.lower, sandwich.value, sandwich.upper));
    }
    Ok(())
}

fn perturb(ctx: &GraphContext, p: &Perturbation, pair: Option<(usize, usize)>, r: &mut Report) -> Result<(), CliError> {
    let kf = hd_kirchhoff(ctx, p)?.value;
    let reports = match pair {
        Some((i, j)) => vec![hd_resistance(ctx, p, i, j)?],
        None => hd_resistance_all(ctx, p)?,
    };
    r.result("kirchhoff", hd_field(kf));
    r.text(format!("Kf = {}", hd_text(kf)));
    let list = reports
        .iter()
        .map(|rep| {
            r.text(format!("R({},{}) = {}", rep.pair.0 + 1, rep.pair.1 + 1, hd_text(rep.value)));
            Field::obj([("pair", pair_field(rep.pair)), ("value", hd_field(rep.value))])
        })
        .collect();
    r.result("resistances", Field::List(list));
    Ok(())
}

fn pair_field((i, j): (usize, usize)) -> Field {
    Field::List(vec![Field::Int(i as i64 + 1), Field::Int(j as i64 + 1)])
}

fn hd_field(v: HyperDual) -> Field {
    Field::obj([
        ("re", Field::Num(v.re)),
        ("eps", Field::Num(v.eps)),
        ("eps_star", Field::Num(v.eps_star)),
        ("eps_eps_star", Field::Num(v.eps_eps_star)),
    ])
}

fn hd_text(v: HyperDual) -> String {
    let signed = |x: f64| {
        let s = fixed(x);
        match s.strip_prefix('-') {
            Some(abs) => format!("- {abs}"),
            None => format!("+ {s}"),
        }
    };
    format!("{} {}(eps + eps*) {} eps eps*", fixed(v.re), signed(v.eps), signed(v.eps_eps_star))
}

fn matrix_field(m: &RealMatrix) -> Field {
    Field::List(m.row_iter().map(|row| Field::nums(&row.iter().copied().collect::<Vec<_>>())).collect())
}

fn sandwich_field(s: &NormSandwich) -> Field {
    Field::obj([
        ("lower", Field::Num(s.lower)),
        ("value", Field::Num(s.value)),
        ("upper", Field::Num(s.upper)),
        ("holds", Field::Bool(s.holds)),
    ])
}

fn sandwich_text(s: &NormSandwich) -> String {
    format!(
        "l1_sandwich: {} <= {} <= {} ({})",
        fixed(s.lower),
        fixed(s.value),
        fixed(s.upper),
        if s.holds { "holds" } else { "FAILS" }
    )
}

fn fixed(v: f64) -> String {
    // Avoid printing "-0.000000".
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn fixed_list(v: &[f64]) -> String {
    v.iter().map(|x| fixed(*x)).collect::<Vec<_>>().join(" ")
}

/// Report value tree; converted to JSON only after a finiteness check.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    List(Vec<Field>),
    Obj(Vec<(String, Field)>),
}

impl Field {
    fn obj<const N: usize>(entries: [(&str, Field); N]) -> Field {
        Field::Obj(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    fn nums(v: &[f64]) -> Field {
        Field::List(v.iter().copied().map(Field::Num).collect())
    }

    fn to_json(&self) -> Result<Value, CliError> {
        Ok(match self {
            Field::Num(x) => json_number(*x)?,
            Field::Int(i) => Value::from(*i),
            Field::Bool(b) => Value::Bool(*b),
            Field::Str(s) => Value::String(s.clone()),
            Field::List(items) => Value::Array(items.iter().map(Field::to_json).collect::<Result<_, _>>()?),
            Field::Obj(entries) => Value::Object(to_map(entries)?),
        })
    }

    fn all_finite(&self) -> bool {
        match self {
            Field::Num(x) => x.is_finite(),
            Field::List(items) => items.iter().all(Field::all_finite),
            Field::Obj(entries) => entries.iter().all(|(_, v)| v.all_finite()),
            _ => true,
        }
    }
}

fn to_map(entries: &[(String, Field)]) -> Result<Map<String, Value>, CliError> {
    let mut map = Map::new();
    for (k, v) in entries {
        map.insert(k.clone(), v.to_json()?);
    }
    Ok(map)
}

/// Rounds to 12 significant digits.
pub fn json_number(x: f64) -> Result<Value, CliError> {
    if !x.is_finite() {
        return Err(CliError::Numerical(format!("refusing to serialize non-finite value {x}")));
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    Ok(Value::Number(Number::from_f64(rounded).expect("finite")))
}

/// One command's output, renderable as text or JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub n: usize,
    pub m: usize,
    pub results: Vec<(String, Field)>,
    pub residuals: Vec<(String, Field)>,
    pub violations: Vec<String>,
    lines: Vec<String>,
}

impl Report {
    fn new(command: Command, g: &WeightedGraph) -> Self {
        Report {
            command,
            n: g.vertex_count(),
            m: g.edge_count(),
            results: Vec::new(),
            residuals: Vec::new(),
            violations: Vec::new(),
            lines: Vec::new(),
        }
    }

    fn result(&mut self, key: &str, v: Field) {
        self.results.push((key.into(), v));
    }

    fn residual(&mut self, key: &str, v: Field) {
        self.residuals.push((key.into(), v));
    }

    fn text(&mut self, line: String) {
        self.lines.push(line);
    }

    pub fn result_field(&self, key: &str) -> Option<&Field> {
        self.results.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn check_finite(&self) -> Result<(), CliError> {
        let ok = self.results.iter().chain(&self.residuals).all(|(_, v)| v.all_finite());
        if ok {
            Ok(())
        } else {
            Err(CliError::Numerical("report contains non-finite values".into()))
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        self.check_finite()?;
        let mut graph = Map::new();
        graph.insert("n".into(), Value::from(self.n));
        graph.insert("m".into(), Value::from(self.m));
        let mut top = Map::new();
        top.insert("command".into(), Value::String(self.command.name().into()));
        top.insert("graph".into(), Value::Object(graph));
        top.insert("results".into(), Value::Object(to_map(&self.results)?));
        top.insert("residuals".into(), Value::Object(to_map(&self.residuals)?));
        top.insert("violations".into(), Value::Array(self.violations.iter().cloned().map(Value::String).collect()));
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("JSON values serialize");
        s.push('\n');
        Ok(s)
    }

    pub fn to_text(&self) -> Result<String, CliError> {
        self.check_finite()?;
        let mut s = format!("{} (n = {}, m = {})\n", self.command.name(), self.n, self.m);
        for line in &self.lines {
            s.push_str(line);
            s.push('\n');
        }
        for v in &self.violations {
            s.push_str("violation: ");
            s.push_str(v);
            s.push('\n');
        }
        Ok(s)
    }
}
