use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use canvar::bounds::{reduce_pair_with, verify_lemma_grid, LemmaId, Policy};
use canvar::classify::{classify, in_r};
use canvar::geometry::{decide_with, decide_relaxed, scan_family, threshold, threshold_sign, write_scan_csv, Family, ScanOptions};
use canvar::repcalc::{self, euler_test, ext1_dim, ext1_probe, ext2_dim, hom_dim, z_dim, Rep, Setting, DEFAULT_PRIME};
use canvar::witnesses::{sincere_lift, witness_for_type, Scale};
use canvar::{CanonicalType, DimVector, Error, TubeParams, Vertex};

const EXIT_USAGE: u8 = 1;
const EXIT_INCONSISTENT: u8 = 2;
const EXIT_NOT_APPLICABLE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "canvar", version, about = "Module varieties of canonical algebras")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for scans and lemma grids (0 = all cores).
    #[arg(long, global = true, default_value_t = 0, env = "CANVAR_JOBS")]
    jobs: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Threshold value `(Σ 1/(m_i - 1) - (2n - 5), Σ 1/m_i - (n - 2))` and its sign.
    Threshold {
        #[arg(long = "type")]
        ty: String,
    },
    /// Membership in P, Q, R, R' and the canonical presentation.
    Classify(VectorArgs),
    /// Complete intersection, irreducibility and normality of mod(d).
    Decide {
        #[command(flatten)]
        v: VectorArgs,
        /// Maximal splits to report.
        #[arg(long, default_value_t = 4)]
        witness_cap: usize,
    },
    /// Decide every vector of a family with entries up to a bound.
    Scan {
        #[arg(long = "type")]
        ty: String,
        #[arg(long)]
        bound: i64,
        #[arg(long, value_enum, default_value_t = FamilyArg::Regular)]
        family: FamilyArg,
        /// Stop once every predicted failure kind is seen.
        #[arg(long)]
        early_stop: bool,
        /// Maximal number of candidate vectors.
        #[arg(long, default_value_t = 2_000_000_000, env = "CANVAR_SCAN_BUDGET")]
        budget: u128,
        /// Also write one CSV row per vector to this file.
        #[arg(long)]
        csv: Option<String>,
    },
    /// Explicit split with nonnegative form value at or below the threshold.
    Witness {
        #[arg(long = "type")]
        ty: String,
        /// Use the least integral scale.
        #[arg(long)]
        minimal: bool,
    },
    /// Reduction chain bounding <d - d', d'> by a base case.
    Certify {
        #[command(flatten)]
        v: VectorArgs,
        #[arg(long)]
        dprime: String,
        #[arg(long, value_enum, default_value_t = PolicyArg::Greedy)]
        policy: PolicyArg,
    },
    /// Exhaustive grids for the one-variable inequalities.
    VerifyLemmas {
        /// Lemma ids such as 5.2; all when omitted.
        #[arg(long = "lemma")]
        lemmas: Vec<String>,
        #[arg(long = "max", default_value_t = 12)]
        max_total: i64,
    },
    /// Representations over a prime field.
    Rep {
        #[command(flatten)]
        field: FieldArgs,
        #[command(subcommand)]
        op: RepOp,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
struct VectorArgs {
    #[arg(long = "type")]
    #[serde(rename = "type")]
    ty: String,
    /// JSON `{"alpha":..,"arms":[[..],..],"omega":..}` or a flat comma list.
    #[arg(long)]
    d: String,
}

#[derive(Args, Debug, Clone, Serialize)]
struct FieldArgs {
    #[arg(long = "type", global = true)]
    #[serde(rename = "type")]
    ty: Option<String>,
    #[arg(long, global = true, default_value_t = DEFAULT_PRIME, env = "CANVAR_PRIME")]
    prime: u64,
    /// Tube parameters of arms 2.., comma separated.
    #[arg(long, global = true)]
    lambda: Option<String>,
    #[arg(long, global = true, default_value_t = 0, env = "CANVAR_SEED")]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum RepOp {
    /// Build a representation and check the relations.
    Check { rep: String },
    Hom { x: String, y: String },
    Ext1 { x: String, y: String },
    Ext2 { x: String, y: String },
    /// All homological dimensions of a pair.
    Dims { x: String, y: String },
    /// A seeded random point of mod(d).
    Sample {
        #[arg(long)]
        d: String,
    },
    /// Check hom - ext1 + ext2 = <x, y> on random pairs.
    EulerTest {
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 3)]
        max_entry: i64,
    },
    /// Minimum of ext1(M'', M') at sampled points against -<d'', d'>.
    Ext1Probe {
        #[arg(long)]
        dprime: String,
        #[arg(long)]
        dsecond: String,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
enum FamilyArg {
    Regular,
    SincereRegular,
    Rprime,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
enum PolicyArg {
    Greedy,
    Bfs,
}

/// Failure of a run, mapped to an exit code.
enum Fail {
    Usage(String),
    Inconsistent(Value),
    NotApplicable(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::NotApplicable(m) => Fail::NotApplicable(m),
            Error::BelowThreshold => Fail::NotApplicable(e.to_string()),
            Error::Internal(m) => Fail::Inconsistent(json!({ "error": m })),
            other => Fail::Usage(other.to_string()),
        }
    }
}

type Run = std::result::Result<Output, Fail>;

/// Result of a run: a JSON value and whether it is consistent with the
/// predictions it checks.
struct Output {
    value: Value,
    consistent: bool,
    csv: Option<Vec<u8>>,
}

impl Output {
    fn ok(value: impl Serialize) -> Self {
        Self { value: to_value(value), consistent: true, csv: None }
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn parse_type(s: &str) -> Result<CanonicalType, Fail> {
    CanonicalType::parse(s).map_err(|e| Fail::Usage(format!("--type {s:?}: {e}")))
}

fn parse_vector(t: &CanonicalType, s: &str) -> Result<DimVector, Fail> {
    let s = s.trim();
    let d = if s.starts_with('{') {
        serde_json::from_str::<DimVector>(s).map_err(|e| Fail::Usage(format!("dimension vector {s:?}: {e}")))?
    } else {
        let flat = s
            .split(',')
            .map(|x| x.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Fail::Usage(format!("dimension vector {s:?}: {e}")))?;
        DimVector::from_flat(t, &flat)?
    };
    d.check_shape(t)?;
    Ok(d)
}

fn run_decide(v: &VectorArgs, cap: usize) -> Run {
    let t = parse_type(&v.ty)?;
    let d = parse_vector(&t, &v.d)?;
    if in_r(&t, &d)? {
        Ok(Output::ok(decide_with(&t, &d, cap)?))
    } else {
        Ok(Output::ok(decide_relaxed(&t, &d, cap)?))
    }
}

fn run_scan(ty: &str, bound: i64, family: FamilyArg, early: bool, budget: u128, csv: Option<&str>, format: Format) -> Run {
    let t = parse_type(ty)?;
    let family = match family {
        FamilyArg::Regular => Family::Regular,
        FamilyArg::SincereRegular => Family::SincereRegular,
        FamilyArg::Rprime => Family::Rprime,
    };
    let mut opts = ScanOptions::new(bound, family);
    opts.stop_early = early;
    opts.budget = budget;
    opts.collect_rows = csv.is_some() || format == Format::Csv;
    let report = scan_family(&t, &opts)?;
    let mut rows = Vec::new();
    if opts.collect_rows {
        write_scan_csv(&t, &report.rows, &mut rows).map_err(|e| Fail::Usage(e.to_string()))?;
    }
    if let Some(path) = csv {
        std::fs::write(path, &rows).map_err(|e| Fail::Usage(format!("{path}: {e}")))?;
    }
    Ok(Output {
        consistent: report.consistent,
        value: to_value(&report),
        csv: (format == Format::Csv).then_some(rows),
    })
}

fn run_witness(ty: &str, minimal: bool) -> Run {
    let t = parse_type(ty)?;
    let scale = if minimal { Scale::Minimal } else { Scale::Formula };
    let w = witness_for_type(&t, scale)?;
    let lift = if w.value > 0 { Some(sincere_lift(&t, &w.dprime, &w.dsecond)?) } else { None };
    let m = &w.memberships;
    let consistent = m.dprime_in_p && m.dsecond_in_q && m.sum_in_r && w.value >= 0;
    Ok(Output { value: json!({ "witness": w, "lift": lift }), consistent, csv: None })
}

fn run_certify(v: &VectorArgs, dprime: &str, policy: PolicyArg) -> Run {
    let t = parse_type(&v.ty)?;
    let d = parse_vector(&t, &v.d)?;
    let dp = parse_vector(&t, dprime)?;
    let policy = match policy {
        PolicyArg::Greedy => Policy::Greedy,
        PolicyArg::Bfs => Policy::BreadthFirst,
    };
    Ok(Output::ok(reduce_pair_with(&t, &d, &dp, policy)?))
}

fn run_lemmas(ids: &[String], max_total: i64) -> Run {
    let lemmas = if ids.is_empty() {
        LemmaId::ALL.to_vec()
    } else {
        ids.iter().map(|s| LemmaId::parse(s)).collect::<canvar::Result<Vec<_>>>()?
    };
    let reports = lemmas
        .into_iter()
        .map(|l| verify_lemma_grid(l, max_total))
        .collect::<canvar::Result<Vec<_>>>()?;
    let consistent = reports.iter().all(|r| r.passed);
    Ok(Output { value: json!({ "passed": consistent, "reports": reports }), consistent, csv: None })
}

fn setting(field: &FieldArgs) -> Result<Setting, Fail> {
    let ty = field.ty.as_deref().ok_or_else(|| Fail::Usage("rep commands need --type".into()))?;
    let t = parse_type(ty)?;
    let params = match &field.lambda {
        Some(s) => {
            let lambdas = s
                .split(',')
                .map(|x| x.trim().parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Fail::Usage(format!("--lambda {s:?}: {e}")))?;
            Some(TubeParams::new(&t, lambdas, field.prime)?)
        }
        None => None,
    };
    Ok(Setting::new(t, params, field.prime)?)
}

fn parse_pair(s: &str) -> Result<(u64, u64), Fail> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => match (a.trim().parse(), b.trim().parse()) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            _ => Err(Fail::Usage(format!("expected two integers, got {s:?}"))),
        },
        _ => Err(Fail::Usage(format!("expected two integers, got {s:?}"))),
    }
}

/// `simple:alpha`, `simple:omega`, `simple:I,J`, `arm:I,J`, `homog:A,B`,
/// `sample:D` (seeded by `--seed`) or `@FILE` holding a representation in
/// JSON.
fn build_rep(s: &Setting, desc: &str, seed: u64) -> Result<Rep, Fail> {
    let (kind, arg) = desc.split_once(':').unwrap_or((desc, ""));
    match kind {
        "simple" => {
            let v = match arg {
                "alpha" => Vertex::Alpha,
                "omega" => Vertex::Omega,
                _ => {
                    let (i, j) = parse_pair(arg)?;
                    Vertex::Arm(i as usize, j as usize)
                }
            };
            Ok(s.build_simple(v)?)
        }
        "arm" => {
            let (i, j) = parse_pair(arg)?;
            Ok(s.build_arm_regular(i as usize, j as usize)?)
        }
        "homog" => {
            let (a, b) = parse_pair(arg)?;
            Ok(s.build_homogeneous(a, b)?)
        }
        "sample" => {
            let d = parse_vector(&s.ty, arg)?;
            s.sample_point(&d, seed)?
                .ok_or_else(|| Fail::NotApplicable(format!("no point of dimension {d} found")))
        }
        _ if desc.starts_with('@') => {
            let text = std::fs::read_to_string(&desc[1..]).map_err(|e| Fail::Usage(format!("{desc}: {e}")))?;
            let r: Rep = serde_json::from_str(&text).map_err(|e| Fail::Usage(format!("{desc}: {e}")))?;
            if r.setting != *s {
                return Err(Error::FieldMismatch.into());
            }
            Ok(Rep::new(r.setting, r.dim, r.mats)?)
        }
        _ => Err(Fail::Usage(format!("unknown representation {desc:?}"))),
    }
}

fn run_rep(field: &FieldArgs, op: &RepOp) -> Run {
    let s = setting(field)?;
    let seed = field.seed;
    // the second representation of a pair gets its own stream
    let pair = |x: &str, y: &str| -> Result<(Rep, Rep), Fail> {
        Ok((build_rep(&s, x, seed)?, build_rep(&s, y, seed.wrapping_add(1))?))
    };
    match op {
        RepOp::Check { rep } => {
            let r = build_rep(&s, rep, seed)?;
            Ok(Output::ok(json!({ "relations_hold": r.relations_hold(), "rep": r })))
        }
        RepOp::Hom { x, y } => {
            let (x, y) = pair(x, y)?;
            Ok(Output::ok(json!({ "hom": hom_dim(&x, &y)? })))
        }
        RepOp::Ext1 { x, y } => {
            let (x, y) = pair(x, y)?;
            Ok(Output::ok(json!({ "ext1": ext1_dim(&x, &y)? })))
        }
        RepOp::Ext2 { x, y } => {
            let (x, y) = pair(x, y)?;
            Ok(Output::ok(json!({ "ext2": ext2_dim(&x, &y)? })))
        }
        RepOp::Dims { x, y } => {
            let (x, y) = pair(x, y)?;
            let c = repcalc::euler_check(&x, &y)?;
            Ok(Output {
                consistent: c.holds,
                value: json!({
                    "dim_x": x.dim,
                    "dim_y": y.dim,
                    "z": z_dim(&x, &y)?,
                    "euler": c,
                }),
                csv: None,
            })
        }
        RepOp::Sample { d } => {
            let d = parse_vector(&s.ty, d)?;
            let r = s.sample_point(&d, seed)?;
            Ok(Output::ok(json!({ "absent": r.is_none(), "rep": r })))
        }
        RepOp::EulerTest { pairs, max_entry } => {
            let r = euler_test(&s, *pairs, seed, *max_entry)?;
            Ok(Output { consistent: r.passed, value: to_value(&r), csv: None })
        }
        RepOp::Ext1Probe { dprime, dsecond, samples } => {
            let dp = parse_vector(&s.ty, dprime)?;
            let ds = parse_vector(&s.ty, dsecond)?;
            Ok(Output::ok(ext1_probe(&s, &dp, &ds, *samples, seed)?))
        }
    }
}

fn config(cli: &Cli) -> Value {
    let mut c = match &cli.command {
        Command::Threshold { ty } => json!({ "command": "threshold", "type": ty }),
        Command::Classify(v) => json!({ "command": "classify", "args": v }),
        Command::Decide { v, witness_cap } => json!({ "command": "decide", "args": v, "witness_cap": witness_cap }),
        Command::Scan { ty, bound, family, early_stop, budget, csv } => json!({
            "command": "scan", "type": ty, "bound": bound, "family": family,
            "early_stop": early_stop, "budget": budget.to_string(), "csv": csv,
        }),
        Command::Witness { ty, minimal } => json!({ "command": "witness", "type": ty, "minimal": minimal }),
        Command::Certify { v, dprime, policy } => {
            json!({ "command": "certify", "args": v, "dprime": dprime, "policy": policy })
        }
        Command::VerifyLemmas { lemmas, max_total } => {
            json!({ "command": "verify-lemmas", "lemmas": lemmas, "max": max_total })
        }
        Command::Rep { field, op } => json!({ "command": "rep", "field": field, "op": format!("{op:?}") }),
    };
    c["format"] = to_value(cli.global.format);
    c["jobs"] = json!(cli.global.jobs);
    c
}

fn dispatch(cli: &Cli) -> Run {
    match &cli.command {
        Command::Threshold { ty } => {
            let t = parse_type(ty)?;
            let (a, b) = threshold(&t);
            Ok(Output::ok(json!({ "threshold": [a.to_string(), b.to_string()], "sign": threshold_sign(&t) })))
        }
        Command::Classify(v) => {
            let t = parse_type(&v.ty)?;
            let d = parse_vector(&t, &v.d)?;
            Ok(Output::ok(classify(&t, &d)?))
        }
        Command::Decide { v, witness_cap } => run_decide(v, *witness_cap),
        Command::Scan { ty, bound, family, early_stop, budget, csv } => {
            run_scan(ty, *bound, *family, *early_stop, *budget, csv.as_deref(), cli.global.format)
        }
        Command::Witness { ty, minimal } => run_witness(ty, *minimal),
        Command::Certify { v, dprime, policy } => run_certify(v, dprime, *policy),
        Command::VerifyLemmas { lemmas, max_total } => run_lemmas(lemmas, *max_total),
        Command::Rep { field, op } => run_rep(field, op),
    }
}

fn print_text(out: &mut impl Write, v: &Value) -> io::Result<()> {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                writeln!(out, "{k}: {x}")?;
            }
            Ok(())
        }
        other => writeln!(out, "{other}"),
    }
}

fn emit(cli: &Cli, status: &str, result: Value, csv: Option<Vec<u8>>) -> io::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match (cli.global.format, csv) {
        (Format::Csv, Some(rows)) => out.write_all(&rows),
        (Format::Text, _) => {
            writeln!(out, "status: {status}")?;
            print_text(&mut out, &result)
        }
        _ => {
            let doc = json!({ "config": config(cli), "status": status, "result": result });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.global.format == Format::Csv && !matches!(cli.command, Command::Scan { .. }) {
        eprintln!("error: --format csv is only available for scan");
        return ExitCode::from(EXIT_USAGE);
    }
    if cli.global.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build_global() {
            eprintln!("error: cannot start {} workers: {e}", cli.global.jobs);
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let (status, result, csv, code) = match dispatch(&cli) {
        Ok(o) if o.consistent => ("ok", o.value, o.csv, 0),
        Ok(o) => ("inconsistent", o.value, o.csv, EXIT_INCONSISTENT),
        Err(Fail::Inconsistent(v)) => ("inconsistent", v, None, EXIT_INCONSISTENT),
        Err(Fail::NotApplicable(m)) => ("not_applicable", json!({ "reason": m }), None, EXIT_NOT_APPLICABLE),
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match emit(&cli, status, result, csv) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
        _ => {}
    }
    ExitCode::from(code)
}
