//! Command-line front end: file-based workflows over series tables and
//! realization nodes with deterministic JSON reports.
//!
//! Exit codes: 0 = success / property holds, 1 = classification negative,
//! 2 = input or usage error, 3 = numerical failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use freeseries::circle::{
    associated_h_circle, cayley, complete_from_ab_circle, complete_from_ca_circle,
    is_matrix_j_unitary_circle, CircleResiduals,
};
use freeseries::error::Error;
use freeseries::factorization::{
    enumerate_invariant_families, minimal_junitary_factorize_circle,
    minimal_junitary_factorize_line, SubspaceFamily,
};
use freeseries::fps::FpsTable;
use freeseries::grnode::GrNode;
use freeseries::inner::{
    balance_disk, balance_line, is_j_inner_disk, is_j_inner_line, schur_agler_sample,
    schur_agler_sample_table,
};
use freeseries::io::{
    block_diag_value, canonical_json, family_from_json, family_to_json, fps_from_json,
    fps_to_json, kernel_to_json, matrix_value, node_from_json, node_to_json,
};
use freeseries::kernels::{
    kernel_formal_derivative, kernel_from_node, kernel_from_series, model_realization,
    KernelTable,
};
use freeseries::line::{
    associated_h_line, complete_from_ab_line, complete_from_ca_line, is_matrix_j_unitary_line,
    LineResiduals,
};
use freeseries::linalg::{self, CMat};
use freeseries::minimal::{hankel_ranks, reduce_to_minimal};
use freeseries::sampling;
use freeseries::selfadjoint::{
    circle_selfadjoint_decompose, is_matrix_selfadjoint_circle, is_matrix_selfadjoint_line,
    selfadjoint_decompose, SaCircleResiduals, SaLineResiduals,
};
use freeseries::structured::StructuredHermitian;

#[derive(Parser)]
#[command(name = "freeseries", version, about = "Realization-theory toolkit \
for rational series in non-commuting variables")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Input document (node or series JSON)
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Truncation degree where one is needed
    #[arg(long, global = true)]
    degree: Option<usize>,

    /// Override the singular-value rank threshold
    #[arg(long, global = true)]
    rank_tol: Option<f64>,

    /// Residual tolerance for sampled verdicts
    #[arg(long, global = true)]
    res_tol: Option<f64>,

    /// Number of random samples
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Matrix size (or size cap) for sampling and evaluation
    #[arg(long, global = true)]
    matrix_size: Option<usize>,

    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the command's primary artifact (node/series/kernel/…) here
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a node into its series coefficients
    Expand,
    /// Evaluate a node or series at a seeded random matrix tuple
    Eval,
    /// Compress a node to a minimal realization
    Minimize,
    /// Classify a node (J-unitary, inner, or selfadjoint)
    Check {
        #[arg(long, value_enum)]
        case: CheckCase,
    },
    /// Compute the associated structured Hermitian matrix
    AssocH {
        #[arg(long, value_enum, default_value_t = CurveCase::Line)]
        case: CurveCase,
    },
    /// Complete output (C,A) or input (A,B) data to a J-unitary node
    Complete {
        #[arg(long, value_enum)]
        from: CompleteFrom,
        #[arg(long, value_enum, default_value_t = CurveCase::Line)]
        case: CurveCase,
        /// Unimodular parameter for the circle case, as "re,im"
        #[arg(long, value_parser = parse_complex)]
        a: Option<Complex64>,
    },
    /// Transform a circle-case node to a line-case node
    Cayley {
        /// Unimodular parameter, as "re,im"
        #[arg(long, value_parser = parse_complex, default_value = "1,0")]
        a: Complex64,
    },
    /// Bring an inner node to the form whose certificate is the identity
    Balance {
        #[arg(long, value_enum, default_value_t = CurveCase::Line)]
        case: CurveCase,
    },
    /// Factor a J-unitary node minimally over an invariant subspace family
    Factorize {
        #[arg(long, value_enum, default_value_t = CurveCase::Line)]
        case: CurveCase,
        /// Subspace-family document
        #[arg(long)]
        subspace: Option<PathBuf>,
        /// Search for an admissible family instead of reading one
        #[arg(long)]
        search: bool,
        /// Unimodular parameter for the circle case, as "re,im"
        #[arg(long, value_parser = parse_complex)]
        a: Option<Complex64>,
    },
    /// Split a selfadjoint node into an additive decomposition
    Decompose {
        #[arg(long, value_enum)]
        case: SaCase,
        #[arg(long)]
        subspace: PathBuf,
    },
    /// Tabulate reproducing-kernel coefficients
    Kernel {
        #[arg(long, value_enum, default_value_t = KernelRoute::Node)]
        route: KernelRoute,
        /// Kernel component (1-based)
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Realize a series on its backward-shift kernel spaces
    Model,
    /// Sample evaluations over strict-contraction tuples
    SchurSample,
    /// Hankel ranks of a series
    Hankel,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Expand => "expand",
            Command::Eval => "eval",
            Command::Minimize => "minimize",
            Command::Check { .. } => "check",
            Command::AssocH { .. } => "assoc-h",
            Command::Complete { .. } => "complete",
            Command::Cayley { .. } => "cayley",
            Command::Balance { .. } => "balance",
            Command::Factorize { .. } => "factorize",
            Command::Decompose { .. } => "decompose",
            Command::Kernel { .. } => "kernel",
            Command::Model => "model",
            Command::SchurSample => "schur-sample",
            Command::Hankel => "hankel",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckCase {
    Line,
    Circle,
    InnerLine,
    InnerDisk,
    SaLine,
    SaCircle,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum CurveCase {
    Line,
    Circle,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompleteFrom {
    Ca,
    Ab,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelRoute {
    Node,
    Series,
    Formal,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let re: f64 = re.trim().parse().map_err(|_| format!("bad real part in {s:?}"))?;
    let im: f64 = im.trim().parse().map_err(|_| format!("bad imaginary part in {s:?}"))?;
    Ok(Complex64::new(re, im))
}

struct Outcome {
    result: Value,
    residuals: Value,
    exit: u8,
    payload: Option<String>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            result,
            residuals: Value::Null,
            exit: 0,
            payload: None,
        }
    }

    fn with_residuals(mut self, residuals: Value) -> Self {
        self.residuals = residuals;
        self
    }

    fn with_payload(mut self, payload: String) -> Self {
        self.payload = Some(payload);
        self
    }

    fn with_exit(mut self, exit: u8) -> Self {
        self.exit = exit;
        self
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NotInClass(_) => 1,
        Error::DimensionMismatch(_)
        | Error::InvalidWord(_)
        | Error::InsufficientDegree(_)
        | Error::NotMinimal(_)
        | Error::InvalidSignature(_)
        | Error::InvalidSubspace(_)
        | Error::InvalidInput(_) => 2,
        Error::SingularConstantTerm
        | Error::Singular(_)
        | Error::NoAdmissibleParameter(_)
        | Error::Numerical(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    let inputs = inputs_value(&cli);
    let outcome = run(&cli).unwrap_or_else(|err| {
        let mut result = json!({ "error": err.to_string() });
        if matches!(err, Error::NotMinimal(_)) {
            result["hint"] = Value::String("run `minimize` first".into());
        }
        Outcome {
            result,
            residuals: Value::Null,
            exit: exit_code_for(&err),
            payload: None,
        }
    });
    let report = json!({
        "command": command,
        "inputs": inputs,
        "result": outcome.result,
        "residuals": outcome.residuals,
        "seed": cli.seed,
    });
    println!("{}", canonical_json(&report));
    if let (Some(path), Some(payload)) = (&cli.output, &outcome.payload) {
        if let Err(e) = fs::write(path, payload) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(outcome.exit)
}

/// The flags that went into this invocation, echoed for reproducibility.
fn inputs_value(cli: &Cli) -> Value {
    let mut map = serde_json::Map::new();
    if let Some(p) = &cli.input {
        map.insert("input".into(), Value::String(p.display().to_string()));
    }
    if let Some(d) = cli.degree {
        map.insert("degree".into(), json!(d));
    }
    if let Some(t) = cli.rank_tol {
        map.insert("rank_tol".into(), json!(t));
    }
    if let Some(t) = cli.res_tol {
        map.insert("res_tol".into(), json!(t));
    }
    if let Some(s) = cli.samples {
        map.insert("samples".into(), json!(s));
    }
    if let Some(n) = cli.matrix_size {
        map.insert("matrix_size".into(), json!(n));
    }
    match &cli.command {
        Command::Check { case } => {
            map.insert("case".into(), json!(check_case_name(*case)));
        }
        Command::AssocH { case } | Command::Balance { case } => {
            map.insert("case".into(), json!(curve_case_name(*case)));
        }
        Command::Complete { from, case, a } => {
            map.insert(
                "from".into(),
                json!(match from {
                    CompleteFrom::Ca => "ca",
                    CompleteFrom::Ab => "ab",
                }),
            );
            map.insert("case".into(), json!(curve_case_name(*case)));
            if let Some(a) = a {
                map.insert("a".into(), json!([a.re, a.im]));
            }
        }
        Command::Cayley { a } => {
            map.insert("a".into(), json!([a.re, a.im]));
        }
        Command::Factorize {
            case,
            subspace,
            search,
            a,
        } => {
            map.insert("case".into(), json!(curve_case_name(*case)));
            if let Some(p) = subspace {
                map.insert("subspace".into(), Value::String(p.display().to_string()));
            }
            if *search {
                map.insert("search".into(), json!(true));
            }
            if let Some(a) = a {
                map.insert("a".into(), json!([a.re, a.im]));
            }
        }
        Command::Decompose { case, subspace } => {
            map.insert(
                "case".into(),
                json!(match case {
                    SaCase::SaLine => "sa-line",
                    SaCase::SaCircle => "sa-circle",
                }),
            );
            map.insert("subspace".into(), Value::String(subspace.display().to_string()));
        }
        Command::Kernel { route, k } => {
            map.insert(
                "route".into(),
                json!(match route {
                    KernelRoute::Node => "node",
                    KernelRoute::Series => "series",
                    KernelRoute::Formal => "formal",
                }),
            );
            map.insert("k".into(), json!(k));
        }
        _ => {}
    }
    Value::Object(map)
}

#[derive(Clone, Copy, ValueEnum)]
enum SaCase {
    SaLine,
    SaCircle,
}

fn check_case_name(case: CheckCase) -> &'static str {
    match case {
        CheckCase::Line => "line",
        CheckCase::Circle => "circle",
        CheckCase::InnerLine => "inner-line",
        CheckCase::InnerDisk => "inner-disk",
        CheckCase::SaLine => "sa-line",
        CheckCase::SaCircle => "sa-circle",
    }
}

fn curve_case_name(case: CurveCase) -> &'static str {
    match case {
        CurveCase::Line => "line",
        CurveCase::Circle => "circle",
    }
}

// ---------------------------------------------------------------------
// Input loading
// ---------------------------------------------------------------------

enum Doc {
    Node(GrNode, Option<CMat>),
    Series(FpsTable),
}

fn load_text(path: &Option<PathBuf>) -> Result<String, Error> {
    let path = path
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("--input is required".into()))?;
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn load_doc(cli: &Cli) -> Result<Doc, Error> {
    let text = load_text(&cli.input)?;
    let probe: Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))?;
    if probe.get("terms").is_some() {
        Ok(Doc::Series(fps_from_json(&text)?))
    } else if probe.get("A").is_some() {
        let (node, j) = node_from_json(&text)?;
        Ok(Doc::Node(node, j))
    } else {
        Err(Error::InvalidInput(
            "input is neither a node document (with \"A\") nor a series document \
             (with \"terms\")"
                .into(),
        ))
    }
}

fn load_node(cli: &Cli) -> Result<(GrNode, Option<CMat>), Error> {
    match load_doc(cli)? {
        Doc::Node(n, j) => Ok((n, j)),
        Doc::Series(_) => Err(Error::InvalidInput(
            "this command needs a node document".into(),
        )),
    }
}

fn signature_or_identity(node: &GrNode, j: Option<CMat>) -> Result<CMat, Error> {
    match j {
        Some(j) => Ok(j),
        None => {
            if node.output_dim() != node.input_dim() {
                return Err(Error::InvalidInput(
                    "a non-square node needs an explicit signature matrix \"J\"".into(),
                ));
            }
            Ok(CMat::identity(node.output_dim(), node.output_dim()))
        }
    }
}

// ---------------------------------------------------------------------
// Report fragments
// ---------------------------------------------------------------------

fn node_value(node: &GrNode, j: Option<&CMat>) -> Value {
    serde_json::from_str(&node_to_json(node, j)).expect("node value")
}

fn fps_value(f: &FpsTable) -> Value {
    serde_json::from_str(&fps_to_json(f)).expect("series value")
}

fn kernel_value(t: &KernelTable) -> Value {
    serde_json::from_str(&kernel_to_json(t)).expect("kernel value")
}

fn family_value(fam: &SubspaceFamily) -> Value {
    serde_json::from_str(&family_to_json(fam)).expect("family value")
}

fn h_value(h: &StructuredHermitian) -> Value {
    block_diag_value(h.h())
}

fn nu_value(h: &StructuredHermitian) -> Value {
    json!(h.negative_squares())
}

fn line_residuals_value(r: &LineResiduals) -> Value {
    json!({
        "d_j_unitary": r.d_j_unitary,
        "lyapunov": r.lyapunov,
        "input_coupling": r.input_coupling,
        "dual_lyapunov": r.dual_lyapunov,
        "output_coupling": r.output_coupling,
    })
}

fn circle_residuals_value(r: &CircleResiduals) -> Value {
    json!({
        "colligation": r.colligation,
        "dual_colligation": r.dual_colligation,
        "stein": r.stein,
        "coupling": r.coupling,
        "d_identity": r.d_identity,
    })
}

fn sa_line_residuals_value(r: &SaLineResiduals) -> Value {
    json!({
        "d_hermitian": r.d_hermitian,
        "lyapunov": r.lyapunov,
        "coupling": r.coupling,
    })
}

fn sa_circle_residuals_value(r: &SaCircleResiduals) -> Value {
    json!({
        "stein": r.stein,
        "d_identity": r.d_identity,
        "coupling": r.coupling,
    })
}

// ---------------------------------------------------------------------
// Command implementations
// ---------------------------------------------------------------------

fn run(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Expand => cmd_expand(cli),
        Command::Eval => cmd_eval(cli),
        Command::Minimize => cmd_minimize(cli),
        Command::Check { case } => cmd_check(cli, *case),
        Command::AssocH { case } => cmd_assoc_h(cli, *case),
        Command::Complete { from, case, a } => cmd_complete(cli, *from, *case, *a),
        Command::Cayley { a } => cmd_cayley(cli, *a),
        Command::Balance { case } => cmd_balance(cli, *case),
        Command::Factorize {
            case,
            subspace,
            search,
            a,
        } => cmd_factorize(cli, *case, subspace.as_ref(), *search, *a),
        Command::Decompose { case, subspace } => cmd_decompose(cli, *case, subspace),
        Command::Kernel { route, k } => cmd_kernel(cli, *route, *k),
        Command::Model => cmd_model(cli),
        Command::SchurSample => cmd_schur_sample(cli),
        Command::Hankel => cmd_hankel(cli),
    }
}

fn cmd_expand(cli: &Cli) -> Result<Outcome, Error> {
    let (node, _) = load_node(cli)?;
    let degree = cli.degree.unwrap_or(6);
    let series = node.expand(degree);
    let payload = fps_to_json(&series);
    Ok(Outcome::ok(json!({
        "degree": degree,
        "n_terms": series.n_terms(),
        "series": fps_value(&series),
    }))
    .with_payload(payload))
}

fn cmd_eval(cli: &Cli) -> Result<Outcome, Error> {
    let n = cli.matrix_size.unwrap_or(2);
    if n == 0 {
        return Err(Error::InvalidInput("--matrix-size must be ≥ 1".into()));
    }
    let mut rng = sampling::rng_from_seed(cli.seed);
    let (value, point, kind) = match load_doc(cli)? {
        Doc::Node(node, _) => {
            let eps = 1.0 / (linalg::spectral_norm(node.a()) + 1.0);
            let z = sampling::tuple_in_domain(&mut rng, node.n_vars(), n, eps);
            (node.eval_closed(&z)?, z, "node")
        }
        Doc::Series(f) => {
            let z = sampling::tuple_in_domain(&mut rng, f.n_vars(), n, 1.0);
            (f.eval(&z)?, z, "series")
        }
    };
    Ok(Outcome::ok(json!({
        "kind": kind,
        "size": n,
        "point": point.iter().map(matrix_value).collect::<Vec<_>>(),
        "value": matrix_value(&value),
    })))
}

fn cmd_minimize(cli: &Cli) -> Result<Outcome, Error> {
    let (node, j) = load_node(cli)?;
    let (reduced, _) = reduce_to_minimal(&node, cli.rank_tol)?;
    let payload = node_to_json(&reduced, j.as_ref());
    Ok(Outcome::ok(json!({
        "dims_before": node.dims(),
        "dims_after": reduced.dims(),
        "node": node_value(&reduced, j.as_ref()),
    }))
    .with_payload(payload))
}

fn cmd_check(cli: &Cli, case: CheckCase) -> Result<Outcome, Error> {
    let (node, j) = load_node(cli)?;
    match case {
        CheckCase::Line => {
            let j = signature_or_identity(&node, j)?;
            let cls = is_matrix_j_unitary_line(&node, &j, cli.rank_tol)?;
            let mut result = json!({ "j_unitary": cls.holds });
            let mut residuals = Value::Null;
            if let Some(cert) = &cls.certificate {
                result["H"] = h_value(&cert.h);
                result["nu"] = nu_value(&cert.h);
                residuals = line_residuals_value(&cert.residuals);
            }
            if let Some(reason) = &cls.reason {
                result["reason"] = json!(reason);
            }
            Ok(Outcome::ok(result)
                .with_residuals(residuals)
                .with_exit(u8::from(!cls.holds)))
        }
        CheckCase::Circle => {
            let j = signature_or_identity(&node, j)?;
            let cls = is_matrix_j_unitary_circle(&node, &j, cli.rank_tol)?;
            let mut result = json!({ "j_unitary": cls.holds });
            let mut residuals = Value::Null;
            if let Some(cert) = &cls.certificate {
                result["H"] = h_value(&cert.h);
                result["nu"] = nu_value(&cert.h);
                if let Some(a) = cert.cayley_parameter {
                    result["cayley_parameter"] = json!([a.re, a.im]);
                }
                residuals = circle_residuals_value(&cert.residuals);
            }
            if let Some(reason) = &cls.reason {
                result["reason"] = json!(reason);
            }
            Ok(Outcome::ok(result)
                .with_residuals(residuals)
                .with_exit(u8::from(!cls.holds)))
        }
        CheckCase::InnerLine => {
            let j = signature_or_identity(&node, j)?;
            let cls = is_j_inner_line(&node, &j, cli.rank_tol)?;
            let mut result = json!({ "j_unitary": cls.j_unitary, "inner": cls.holds });
            let mut residuals = Value::Null;
            if let Some(cert) = &cls.certificate {
                result["H"] = h_value(&cert.h);
                result["nu"] = nu_value(&cert.h);
                residuals = line_residuals_value(&cert.residuals);
            }
            if let Some(reason) = &cls.reason {
                result["reason"] = json!(reason);
            }
            Ok(Outcome::ok(result)
                .with_residuals(residuals)
                .with_exit(u8::from(!cls.holds)))
        }
        CheckCase::InnerDisk => {
            let j = signature_or_identity(&node, j)?;
            let cls = is_j_inner_disk(&node, &j, cli.rank_tol)?;
            let mut result = json!({ "j_unitary": cls.j_unitary, "inner": cls.holds });
            let mut residuals = Value::Null;
            if let Some(cert) = &cls.certificate {
                result["H"] = h_value(&cert.h);
                result["nu"] = nu_value(&cert.h);
                residuals = circle_residuals_value(&cert.residuals);
            }
            if let Some(reason) = &cls.reason {
                result["reason"] = json!(reason);
            }
            Ok(Outcome::ok(result)
                .with_residuals(residuals)
                .with_exit(u8::from(!cls.holds)))
        }
        CheckCase::SaLine => {
            let cls = is_matrix_selfadjoint_line(&node, cli.rank_tol)?;
            let mut result = json!({ "selfadjoint": cls.holds });
            let mut residuals = Value::Null;
            if let Some(h) = &cls.h {
                result["H"] = h_value(h);
                result["nu"] = nu_value(h);
            }
            if let Some(r) = &cls.residuals {
                residuals = sa_line_residuals_value(r);
            }
            if let Some(reason) = &cls.reason {
                result["reason"] = json!(reason);
            }
            Ok(Outcome::ok(result)
                .with_residuals(residuals)
                .with_exit(u8::from(!cls.holds)))
        }
        CheckCase::SaCircle => {
            let cls = is_matrix_selfadjoint_circle(&node, cli.rank_tol)?;
            let mut result = json!({ "selfadjoint": cls.holds });
            let mut residuals = Value::Null;
            if let Some(h) = &cls.h {
                result["H"] = h_value(h);
                result["nu"] = nu_value(h);
            }
            if let Some(r) = &cls.residuals {
                residuals = sa_circle_residuals_value(r);
            }
            if let Some(reason) = &cls.reason {
                result["reason"] = json!(reason);
            }
            Ok(Outcome::ok(result)
                .with_residuals(residuals)
                .with_exit(u8::from(!cls.holds)))
        }
    }
}

fn cmd_assoc_h(cli: &Cli, case: CurveCase) -> Result<Outcome, Error> {
    let (node, j) = load_node(cli)?;
    let j = signature_or_identity(&node, j)?;
    match case {
        CurveCase::Line => {
            let cert = associated_h_line(&node, &j, cli.rank_tol)?;
            Ok(Outcome::ok(json!({
                "H": h_value(&cert.h),
                "nu": nu_value(&cert.h),
            }))
            .with_residuals(line_residuals_value(&cert.residuals)))
        }
        CurveCase::Circle => {
            let cert = associated_h_circle(&node, &j, cli.rank_tol)?;
            let mut result = json!({
                "H": h_value(&cert.h),
                "nu": nu_value(&cert.h),
            });
            if let Some(a) = cert.cayley_parameter {
                result["cayley_parameter"] = json!([a.re, a.im]);
            }
            Ok(Outcome::ok(result).with_residuals(circle_residuals_value(&cert.residuals)))
        }
    }
}

fn cmd_complete(
    cli: &Cli,
    from: CompleteFrom,
    case: CurveCase,
    a_param: Option<Complex64>,
) -> Result<Outcome, Error> {
    let (data, j) = load_node(cli)?;
    let j = signature_or_identity(&data, j)?;
    let dims = data.dims().to_vec();
    let (node, h, residuals) = match (from, case) {
        (CompleteFrom::Ca, CurveCase::Line) => {
            let (node, cert) =
                complete_from_ca_line(data.c(), data.a(), &dims, &j, cli.rank_tol)?;
            (node, cert.h, line_residuals_value(&cert.residuals))
        }
        (CompleteFrom::Ab, CurveCase::Line) => {
            let (node, cert) =
                complete_from_ab_line(data.a(), data.b(), &dims, &j, cli.rank_tol)?;
            (node, cert.h, line_residuals_value(&cert.residuals))
        }
        (CompleteFrom::Ca, CurveCase::Circle) => {
            let (node, cert) =
                complete_from_ca_circle(data.c(), data.a(), &dims, &j, a_param, cli.rank_tol)?;
            (node, cert.h, circle_residuals_value(&cert.residuals))
        }
        (CompleteFrom::Ab, CurveCase::Circle) => {
            let (node, cert) =
                complete_from_ab_circle(data.a(), data.b(), &dims, &j, a_param, cli.rank_tol)?;
            (node, cert.h, circle_residuals_value(&cert.residuals))
        }
    };
    let payload = node_to_json(&node, Some(&j));
    Ok(Outcome::ok(json!({
        "node": node_value(&node, Some(&j)),
        "H": h_value(&h),
        "nu": nu_value(&h),
    }))
    .with_residuals(residuals)
    .with_payload(payload))
}

fn cmd_cayley(cli: &Cli, a: Complex64) -> Result<Outcome, Error> {
    let (node, j) = load_node(cli)?;
    let transformed = cayley(&node, a)?;
    let payload = node_to_json(&transformed, j.as_ref());
    Ok(Outcome::ok(json!({
        "node": node_value(&transformed, j.as_ref()),
    }))
    .with_payload(payload))
}

fn cmd_balance(cli: &Cli, case: CurveCase) -> Result<Outcome, Error> {
    let (node, j) = load_node(cli)?;
    let j = signature_or_identity(&node, j)?;
    let (balanced, residuals) = match case {
        CurveCase::Line => {
            let (balanced, cert) = balance_line(&node, &j, cli.rank_tol)?;
            (balanced, line_residuals_value(&cert.residuals))
        }
        CurveCase::Circle => {
            let (balanced, cert) = balance_disk(&node, &j, cli.rank_tol)?;
            (balanced, circle_residuals_value(&cert.residuals))
        }
    };
    let payload = node_to_json(&balanced, Some(&j));
    Ok(Outcome::ok(json!({
        "node": node_value(&balanced, Some(&j)),
    }))
    .with_residuals(residuals)
    .with_payload(payload))
}

fn cmd_factorize(
    cli: &Cli,
    case: CurveCase,
    subspace: Option<&PathBuf>,
    search: bool,
    a_param: Option<Complex64>,
) -> Result<Outcome, Error> {
    let (node, j) = load_node(cli)?;
    let j = signature_or_identity(&node, j)?;

    let try_family = |fam: &SubspaceFamily| -> Result<(GrNode, GrNode), Error> {
        match case {
            CurveCase::Line => minimal_junitary_factorize_line(&node, &j, fam, None),
            CurveCase::Circle => minimal_junitary_factorize_circle(&node, &j, fam, a_param),
        }
    };

    let (fam, f1, f2) = if let Some(path) = subspace {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        let fam = family_from_json(&text)?;
        let (f1, f2) = try_family(&fam)?;
        (fam, f1, f2)
    } else if search {
        let cert = match case {
            CurveCase::Line => associated_h_line(&node, &j, cli.rank_tol)?.h,
            CurveCase::Circle => associated_h_circle(&node, &j, cli.rank_tol)?.h,
        };
        let total: usize = node.dims().iter().sum();
        let mut found = None;
        for tagged in enumerate_invariant_families(&node, &cert, 64)? {
            if !tagged.nondegenerate {
                continue;
            }
            let dim = tagged.family.total_dim();
            if dim == 0 || dim == total {
                continue;
            }
            if let Ok((f1, f2)) = try_family(&tagged.family) {
                found = Some((tagged.family, f1, f2));
                break;
            }
        }
        found.ok_or_else(|| {
            Error::NotInClass(
                "no nondegenerate invariant family yields a minimal factorization".into(),
            )
        })?
    } else {
        return Err(Error::InvalidInput(
            "factorize needs --subspace <file> or --search".into(),
        ));
    };

    Ok(Outcome::ok(json!({
        "family": family_value(&fam),
        "factor1": node_value(&f1, Some(&j)),
        "factor2": node_value(&f2, Some(&j)),
        "dims1": f1.dims(),
        "dims2": f2.dims(),
    }))
    .with_payload(canonical_json(&json!({
        "factor1": node_value(&f1, Some(&j)),
        "factor2": node_value(&f2, Some(&j)),
    }))))
}

fn cmd_decompose(cli: &Cli, case: SaCase, subspace: &PathBuf) -> Result<Outcome, Error> {
    let (node, _) = load_node(cli)?;
    let text = fs::read_to_string(subspace)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", subspace.display())))?;
    let fam = family_from_json(&text)?;
    let (s1, s2, h, residuals) = match case {
        SaCase::SaLine => {
            let cls = is_matrix_selfadjoint_line(&node, cli.rank_tol)?;
            if !cls.holds {
                return Err(Error::NotInClass(
                    cls.reason.unwrap_or_else(|| "not matrix-selfadjoint".into()),
                ));
            }
            let h = cls.h.expect("certificate present when holds");
            let half = node.d() * freeseries::linalg::re(0.5);
            let (s1, s2) = selfadjoint_decompose(&node, &h, &fam, (half.clone(), half))?;
            let residuals = cls
                .residuals
                .as_ref()
                .map(sa_line_residuals_value)
                .unwrap_or(Value::Null);
            (s1, s2, h, residuals)
        }
        SaCase::SaCircle => {
            let cls = is_matrix_selfadjoint_circle(&node, cli.rank_tol)?;
            if !cls.holds {
                return Err(Error::NotInClass(
                    cls.reason.unwrap_or_else(|| "not matrix-selfadjoint".into()),
                ));
            }
            let h = cls.h.expect("certificate present when holds");
            let (s1, s2) = circle_selfadjoint_decompose(&node, &h, &fam, None)?;
            let residuals = cls
                .residuals
                .as_ref()
                .map(sa_circle_residuals_value)
                .unwrap_or(Value::Null);
            (s1, s2, h, residuals)
        }
    };
    Ok(Outcome::ok(json!({
        "H": h_value(&h),
        "nu": nu_value(&h),
        "summand1": node_value(&s1, None),
        "summand2": node_value(&s2, None),
    }))
    .with_residuals(residuals)
    .with_payload(canonical_json(&json!({
        "summand1": node_value(&s1, None),
        "summand2": node_value(&s2, None),
    }))))
}

fn cmd_kernel(cli: &Cli, route: KernelRoute, k: usize) -> Result<Outcome, Error> {
    if k == 0 {
        return Err(Error::InvalidInput("--k is 1-based".into()));
    }
    let degree = cli.degree.unwrap_or(3);
    let table = match route {
        KernelRoute::Node => {
            let (node, j) = load_node(cli)?;
            let j = signature_or_identity(&node, j)?;
            let cert = associated_h_line(&node, &j, cli.rank_tol)?;
            kernel_from_node(&node, &cert.h, k - 1, degree)?
        }
        KernelRoute::Formal => {
            let (node, j) = load_node(cli)?;
            let j = signature_or_identity(&node, j)?;
            kernel_formal_derivative(&node, &j, k - 1, degree)?
        }
        KernelRoute::Series => match load_doc(cli)? {
            Doc::Series(f) => {
                let j = CMat::identity(f.rows(), f.rows());
                kernel_from_series(&f, &j, k - 1, degree)?
            }
            Doc::Node(node, j) => {
                let j = signature_or_identity(&node, j)?;
                let f = node.expand(2 * degree + 1);
                kernel_from_series(&f, &j, k - 1, degree)?
            }
        },
    };
    let payload = kernel_to_json(&table);
    Ok(Outcome::ok(json!({
        "component": k,
        "degree": degree,
        "hermitian_defect": table.hermitian_defect(),
        "kernel": kernel_value(&table),
    }))
    .with_payload(payload))
}

fn cmd_model(cli: &Cli) -> Result<Outcome, Error> {
    let f = match load_doc(cli)? {
        Doc::Series(f) => f,
        Doc::Node(node, _) => node.expand(cli.degree.unwrap_or(8)),
    };
    let j = CMat::identity(f.rows(), f.rows());
    let (node, h) = model_realization(&f, &j)?;
    let payload = node_to_json(&node, Some(&j));
    Ok(Outcome::ok(json!({
        "node": node_value(&node, Some(&j)),
        "H": h_value(&h),
        "nu": nu_value(&h),
        "dims": node.dims(),
    }))
    .with_payload(payload))
}

fn cmd_schur_sample(cli: &Cli) -> Result<Outcome, Error> {
    let n_max = cli.matrix_size.unwrap_or(4);
    let samples = cli.samples.unwrap_or(100);
    let tol = cli.res_tol.unwrap_or(1.0e-8);
    let report = match load_doc(cli)? {
        Doc::Node(node, _) => schur_agler_sample(&node, n_max, samples, cli.seed)?,
        Doc::Series(f) => schur_agler_sample_table(&f, n_max, samples, cli.seed)?,
    };
    let within = report.max_norm <= 1.0 + tol;
    Ok(Outcome::ok(json!({
        "max_norm": report.max_norm,
        "used": report.used,
        "skipped": report.skipped,
        "within_unit_ball": within,
    }))
    .with_exit(u8::from(!within)))
}

fn cmd_hankel(cli: &Cli) -> Result<Outcome, Error> {
    let f = match load_doc(cli)? {
        Doc::Series(f) => f,
        Doc::Node(node, _) => node.expand(cli.degree.unwrap_or(8)),
    };
    let ranks = hankel_ranks(&f, cli.rank_tol)?;
    Ok(Outcome::ok(json!({
        "ranks": ranks,
        "degree": f.degree(),
    })))
}
