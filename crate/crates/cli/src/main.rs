use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use commdist_core::census::{self, CensusMode};
use commdist_core::commute::{
    self, sampled_minors_check, DistanceOptions, PcCertificate, PcOptions, ZiMode,
};
use commdist_core::graph::{self, BfsLimits};
use commdist_core::{fixtures, Error, Field, FieldSpec, Matrix, Rationals};
use serde_json::{json, Map, Value};

mod verify;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    Distance,
    Dist2,
    Centralizer,
    Derogatory,
    PcSearch,
    PcVerify,
    Zi,
    Bfs,
    Diameter,
    Components,
    Census,
    VerifyPaper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Quantity {
    Commuting,
    Dist2,
    Derogatory,
    Zi,
    Distance,
}

/// Commuting distances between square matrices over QQ and small finite fields.
///
/// Matrices are given as a JSON file, inline JSON (`[[1,2],[3,4]]` or
/// `{"field": "qq", "rows": [...]}`) or the name of a bundled example
/// (`ex25_A`, `ex46_B`, ...). Field specs: `qq`, `gf(p)`, `gf(p^k):c0,...,ck`.
#[derive(Debug, Parser)]
#[command(name = "commdist", version)]
struct Cli {
    command: Command,
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    /// Candidate idempotent for `zi`.
    #[arg(long)]
    p: Option<String>,
    /// Certificate JSON for `pc-verify`.
    #[arg(long)]
    cert: Option<String>,
    /// Idempotent rank for `zi` and `census --quantity zi`.
    #[arg(long)]
    i: Option<usize>,
    /// Matrix size for whole-space commands.
    #[arg(long)]
    n: Option<usize>,
    /// Search cap: BFS states, projective pairs, or restricted candidates.
    #[arg(long)]
    cap: Option<u64>,
    /// BFS radius limit.
    #[arg(long)]
    radius: Option<u32>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also evaluate a sample of maximal minors of the stacked lift.
    #[arg(long)]
    minors: bool,
    /// Only accept certificates with nonscalar p(A) and q(B).
    #[arg(long)]
    nonscalar: bool,
    #[arg(long, value_enum)]
    quantity: Option<Quantity>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Lib(Error),
    Failed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Lib(Error::CapExceeded(_)) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("commdist: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    if cli.command == Command::VerifyPaper {
        let table = verify::run_all();
        let failed: Vec<String> = table.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
        let text = match cli.format.unwrap_or(Format::Table) {
            Format::Table => verify::render(&table),
            Format::Json => serde_json::to_string_pretty(&verify::to_json(&table)).expect("plain data") + "\n",
        };
        emit(cli, &text)?;
        if !failed.is_empty() {
            return Err(CliError::Failed(format!("failing checks: {}", failed.join(", "))));
        }
        return Ok(());
    }
    let spec = resolve_field(cli)?;
    let mut report = match &spec {
        FieldSpec::Rationals(f) => dispatch(f, cli)?,
        FieldSpec::Finite(f) => dispatch(f, cli)?,
    };
    report["config"] = config(cli, &spec);
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string(&report).expect("plain data") + "\n",
        Format::Table => render_table(&report),
    };
    emit(cli, &text)
}

fn emit(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Every option that influenced the run, so the report can be replayed.
fn config(cli: &Cli, spec: &FieldSpec) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), json!(cli.command.to_possible_value().expect("not skipped").get_name()));
    m.insert("field".into(), json!(spec.to_string()));
    for (k, v) in [("a", &cli.a), ("b", &cli.b), ("p", &cli.p), ("cert", &cli.cert)] {
        if let Some(v) = v {
            m.insert(k.into(), json!(v));
        }
    }
    for (k, v) in [("i", cli.i.map(|x| x as u64)), ("n", cli.n.map(|x| x as u64)), ("cap", cli.cap), ("samples", cli.samples)] {
        if let Some(v) = v {
            m.insert(k.into(), json!(v));
        }
    }
    if let Some(r) = cli.radius {
        m.insert("radius".into(), json!(r));
    }
    if let Some(q) = cli.quantity {
        m.insert("quantity".into(), json!(q.to_possible_value().expect("not skipped").get_name()));
    }
    m.insert("seed".into(), json!(cli.seed));
    m.insert("minors".into(), json!(cli.minors));
    m.insert("nonscalar".into(), json!(cli.nonscalar));
    Value::Object(m)
}

fn render_table(v: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(m) = v {
        let width = m.keys().map(String::len).max().unwrap_or(0);
        for (k, val) in m {
            let shown = match val {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k:<width$}  {shown}\n"));
        }
    }
    out
}

/// Reads a matrix argument: a file, inline JSON, or a bundled example name.
fn load_value(arg: &str) -> CliResult<Value> {
    let path = std::path::Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{arg}: {e}")))?;
        return serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{arg}: {e}")));
    }
    if let Ok(v) = serde_json::from_str::<Value>(arg) {
        return Ok(v);
    }
    let stem = arg.strip_suffix(".json").unwrap_or(arg);
    let stem = std::path::Path::new(stem).file_name().and_then(|s| s.to_str()).unwrap_or(stem);
    fixtures::raw(stem).map_err(|_| CliError::Usage(format!("`{arg}` is not a file, JSON, or bundled example")))
}

fn resolve_field(cli: &Cli) -> CliResult<FieldSpec> {
    if let Some(f) = &cli.field {
        return Ok(FieldSpec::parse(f)?);
    }
    for arg in [&cli.a, &cli.b].into_iter().flatten() {
        if let Some(f) = load_value(arg)?.get("field").and_then(Value::as_str) {
            return Ok(FieldSpec::parse(f)?);
        }
    }
    Err(CliError::Usage("--field is required".into()))
}

/// Parses a matrix over `field`; rational inputs are reduced into finite
/// fields entrywise.
fn read_matrix<F: Field>(field: &F, arg: &Option<String>, name: &str) -> CliResult<Matrix<F>> {
    let arg = arg.as_ref().ok_or_else(|| CliError::Usage(format!("--{name} is required")))?;
    let v = load_value(arg)?;
    let (stored, rows) = match &v {
        Value::Array(_) => (None, &v),
        Value::Object(o) => (
            o.get("field").and_then(Value::as_str).map(FieldSpec::parse).transpose()?,
            o.get("rows").ok_or_else(|| CliError::Usage(format!("--{name}: missing `rows`")))?,
        ),
        _ => return Err(CliError::Usage(format!("--{name}: expected rows"))),
    };
    match stored {
        None => Ok(Matrix::from_json_rows(field, rows)?),
        Some(s) if s == field.spec() => Ok(Matrix::from_json_rows(field, rows)?),
        Some(FieldSpec::Rationals(_)) => {
            let q = Matrix::from_json_rows(&Rationals, rows)?;
            let data = q
                .data()
                .iter()
                .map(|x| field.from_rational(x).ok_or(Error::DivisionByZero))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Matrix::new(field.clone(), q.rows(), q.cols(), data)?)
        }
        Some(_) => Err(CliError::Lib(Error::FieldMismatch)),
    }
}

fn rows_json<F: Field>(m: &Matrix<F>) -> Value {
    m.to_json()["rows"].clone()
}

fn need_n(cli: &Cli) -> CliResult<usize> {
    cli.n.ok_or_else(|| CliError::Usage("--n is required".into()))
}

fn dispatch<F: Field>(f: &F, cli: &Cli) -> CliResult<Value> {
    let a = || read_matrix(f, &cli.a, "a");
    let b = || read_matrix(f, &cli.b, "b");
    let pc_opts = || {
        let mut o = PcOptions { require_nonscalar: cli.nonscalar, ..PcOptions::default() };
        if let Some(c) = cli.cap {
            o.cap = c;
        }
        o
    };
    Ok(match cli.command {
        Command::Distance => {
            let mut opts = DistanceOptions { pc: pc_opts(), ..DistanceOptions::default() };
            if let Some(c) = cli.cap {
                opts.bfs_states = c;
                opts.restricted_cap = c;
            }
            commute::distance_with(&a()?, &b()?, &opts)?.to_json(f)
        }
        Command::Dist2 => {
            let (a, b) = (a()?, b()?);
            let stack = commute::stack_m(&a, &b)?.matrix;
            let rank = stack.rank();
            let mut v = json!({
                "dist_le_2": commute::dist_le_2(&a, &b)?,
                "rank": rank,
                "nullity": stack.cols() - rank,
                "threshold": stack.cols() - 2,
            });
            if let Some(c) = commute::common_nonscalar(&a, &b)? {
                v["witness"] = rows_json(&c);
            }
            if cli.minors {
                let r = sampled_minors_check(&a, &b, cli.samples.unwrap_or(200) as usize, cli.seed)?;
                v["minors"] = serde_json::to_value(r).expect("plain data");
            }
            v
        }
        Command::Centralizer => {
            let basis = commute::centralizer_basis(&a()?)?;
            json!({"dimension": basis.len(), "basis": basis.iter().map(rows_json).collect::<Vec<_>>()})
        }
        Command::Derogatory => {
            let a = a()?;
            let mp = a.min_poly()?;
            json!({
                "derogatory": commute::derogatory(&a)?,
                "min_poly": mp.iter().map(|c| f.elem_to_json(c)).collect::<Vec<_>>(),
            })
        }
        Command::PcSearch => commute::pc_search_with(&a()?, &b()?, &pc_opts())?.to_json(f),
        Command::PcVerify => {
            let cert_arg = cli.cert.as_ref().ok_or_else(|| CliError::Usage("--cert is required".into()))?;
            let cert = PcCertificate::from_json(f, &load_value(cert_arg)?)?;
            json!({"valid": commute::pc_verify(&a()?, &b()?, &cert)?})
        }
        Command::Zi => {
            let i = cli.i.ok_or_else(|| CliError::Usage("--i is required".into()))?;
            let mode = match &cli.p {
                Some(_) => ZiMode::Witness(read_matrix(f, &cli.p, "p")?),
                None => ZiMode::Enumerate,
            };
            let w = commute::zi_membership(&a()?, &b()?, i, &mode)?;
            json!({"i": i, "member": w.is_some(), "witness": w.as_ref().map(rows_json)})
        }
        Command::Bfs => {
            let limits = BfsLimits {
                max_radius: cli.radius,
                max_states: cli.cap.unwrap_or(graph::BFS_STATE_CAP),
            };
            let b = match &cli.b {
                Some(_) => Some(b()?),
                None => None,
            };
            graph::bfs(&a()?, b.as_ref(), limits)?.to_json()
        }
        Command::Diameter => {
            let stats = graph::diameter(f, need_n(cli)?)?;
            json!({"diameter": stats.diameter(), "histogram": stats.histogram, "unreachable_pairs": stats.unreachable})
        }
        Command::Components => {
            let sizes = graph::components(f, need_n(cli)?)?;
            json!({"count": sizes.len(), "sizes": sizes})
        }
        Command::Census => census_report(f, cli)?,
        Command::VerifyPaper => unreachable!("handled before field resolution"),
    })
}

fn census_report<F: Field>(f: &F, cli: &Cli) -> CliResult<Value> {
    let n = need_n(cli)?;
    let mode = match cli.samples {
        Some(samples) => CensusMode::Sampled { samples, seed: cli.seed },
        None => CensusMode::Exhaustive,
    };
    let quantity = cli.quantity.ok_or_else(|| CliError::Usage("--quantity is required".into()))?;
    Ok(match quantity {
        Quantity::Commuting => census::count_commuting_pairs(f, n)?.to_json(),
        Quantity::Dist2 => census::count_dist_le_2(f, n, mode)?.to_json(),
        Quantity::Derogatory => census::derogatory_count(f, n)?.to_json(),
        Quantity::Zi => {
            let i = cli.i.ok_or_else(|| CliError::Usage("--i is required".into()))?;
            let z = census::zi_pair_census(f, n, i, cli.samples.unwrap_or(1000), cli.seed)?;
            serde_json::to_value(z).expect("plain data")
        }
        Quantity::Distance => census::distance_census(f, n)?.to_json(),
    })
}
