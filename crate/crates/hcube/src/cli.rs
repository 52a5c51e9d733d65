//! Command line: argument definitions, execution, and the run manifest.
//!
//! Every run produces a result value. JSON output wraps it together with a
//! [`RunManifest`] holding the parameters, seed, tool version, input digests
//! and a SHA-256 of the compact result; CSV output prints a table only. The
//! thread count is deliberately absent from the manifest because results do
//! not depend on it.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hcube_core::bounds::{self, BoundError, BoundRow};
use hcube_core::cube::{
    f_sampled, AffineCube, FValue, SearchError, DEFAULT_NODE_BUDGET, EXHAUSTIVE_CELLS,
};
use hcube_core::lll::{
    self, ConstructOptions, ConstructStatus, Construction, LllError, SamplingMeasure, Verification,
};
use hcube_core::toric::{build_code, code_rank, polytope_m_value, stats_from_parts, ToricError};
use hcube_core::{CubeNotion, GridParams, PointSet, Rational};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::drivers::{f_exhaustive_par, m_value_par, minimum_distance_par, with_threads};
use crate::formats::{parse_point_set, parse_polytope, write_point_set};
use crate::suites::{run_suite, Suite, DEFAULT_SEED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "hcube",
    version,
    about = "Affine cubes in grids, density bounds, cube-free constructions and toric codes"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Node budget for each cube search.
    #[arg(long, global = true, default_value_t = DEFAULT_NODE_BUDGET)]
    pub budget: u64,
    /// Random seed.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Also write the run manifest to this file.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// M(S) of a point-set file, with a witness cube.
    Mvalue(MvalueArgs),
    /// f_N(n, c) by exhaustive enumeration (or a sampled upper bound).
    Fexact(FexactArgs),
    /// Iterated and closed-form lower bounds on f_N(n, c).
    Bound(BoundArgs),
    /// Cube-free sets by resampling, with certificates.
    Construct(ConstructArgs),
    /// Toric code parameters of a polytope file.
    Toric(ToricArgs),
    /// Property suites: lemmas, oracle, nesting, monotonicity, invariance, all.
    Verify(VerifyArgs),
    /// Re-run a manifest and check the result checksum.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MvalueArgs {
    pub file: PathBuf,
    /// vertex-injective, independent or unimodular.
    #[arg(long, default_value = "independent")]
    pub notion: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FexactArgs {
    #[arg(long = "base", short = 'N', default_value_t = 2)]
    pub base: u32,
    #[arg(long, short = 'n')]
    pub n: u32,
    /// Density thresholds, comma separated (a/b, integers or decimals).
    #[arg(
        long,
        short = 'c',
        value_delimiter = ',',
        default_value = "1/4,1/2,3/4,1"
    )]
    pub c: Vec<String>,
    #[arg(long, default_value = "independent")]
    pub notion: String,
    /// Random subsets per threshold for an upper bound when the grid is too
    /// large to enumerate.
    #[arg(long)]
    pub samples: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BoundArgs {
    #[arg(long = "base", short = 'N', default_value_t = 2)]
    pub base: u32,
    /// Grid dimensions, comma separated.
    #[arg(long, short = 'n', value_delimiter = ',', required = true)]
    pub n: Vec<u64>,
    #[arg(long, short = 'c')]
    pub c: String,
    #[arg(long, short = 'e', default_value = "1/2")]
    pub epsilon: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Bernoulli,
    FixedSize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ConstructArgs {
    #[arg(value_enum)]
    pub mode: Mode,
    #[arg(long, short = 'n')]
    pub n: u32,
    #[arg(long = "base", short = 'N', default_value_t = 2)]
    pub base: u32,
    #[arg(long, short = 'e')]
    pub epsilon: String,
    /// Sampling measure; dense defaults to bernoulli, sparse to fixed-size.
    #[arg(long, value_enum)]
    pub measure: Option<Measure>,
    /// Independent runs with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
    #[arg(long, default_value_t = 100_000)]
    pub max_rounds: u64,
    #[arg(long, default_value = "independent")]
    pub notion: String,
    /// Write the constructed set here (with a `.SEED` suffix when runs > 1).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ToricArgs {
    pub file: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    pub suite: String,
    /// Random instances per check.
    #[arg(long, default_value_t = 1000)]
    pub instances: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub params: Command,
    pub format: Format,
    pub budget: u64,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
    /// SHA-256 of the compact JSON result.
    pub checksum: String,
}

/// Why a run stopped without a normal result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Input(String),
    Inconclusive(String),
    Construction(String),
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Inconclusive(_) => 3,
            Failure::Construction(_) => 4,
            Failure::Check(_) => 1,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Input(m) => format!("error: {m}"),
            Failure::Inconclusive(m) => format!("inconclusive: {m}"),
            Failure::Construction(m) => format!("construction failed: {m}"),
            Failure::Check(m) => format!("check failed: {m}"),
        }
    }
}

fn search_failure(e: SearchError) -> Failure {
    match e {
        SearchError::BudgetExceeded { .. } => Failure::Inconclusive(e.to_string()),
        e => Failure::Input(e.to_string()),
    }
}

/// Result of executing one command, before rendering.
pub struct Execution {
    pub result: Value,
    pub csv: String,
    pub exit: i32,
    pub inputs: Vec<InputDigest>,
}

/// What the process prints and returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub stdout: String,
    pub stderr: String,
    pub exit: i32,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn checksum(result: &Value) -> String {
    sha256_hex(
        serde_json::to_string(result)
            .expect("serializable")
            .as_bytes(),
    )
}

pub fn parse_rational(s: &str) -> Result<Rational, Failure> {
    let bad = || Failure::Input(format!("cannot parse {s:?} as a rational"));
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        return Ok(Rational::new(
            num,
            BigInt::from(10u8).pow(frac.len() as u32),
        ));
    }
    let r = Rational::from_str(s).map_err(|_| bad())?;
    Ok(r)
}

fn parse_notion(s: &str) -> Result<CubeNotion, Failure> {
    CubeNotion::from_str(s).map_err(|e| Failure::Input(e.to_string()))
}

fn read_input(path: &PathBuf) -> Result<(String, InputDigest), Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let digest = InputDigest {
        path: path.clone(),
        sha256: sha256_hex(text.as_bytes()),
    };
    Ok((text, digest))
}

fn csv_table(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flushed")).expect("utf-8")
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn cube_json(notion: CubeNotion, cube: &AffineCube) -> Value {
    json!({
        "notion": notion.as_str(),
        "m": cube.dim(),
        "base": cube.base(),
        "generators": cube.generators(),
        "canonical": cube.canonical_text(),
    })
}

fn points_json(set: &PointSet) -> Value {
    Value::Array(
        set.lex_sorted()
            .into_iter()
            .map(|(p, _)| json!(p))
            .collect(),
    )
}

fn ok(result: Value, csv: String) -> Result<Execution, Failure> {
    Ok(Execution {
        result,
        csv,
        exit: 0,
        inputs: Vec::new(),
    })
}

fn cmd_mvalue(args: &MvalueArgs, cli: &Cli) -> Result<Execution, Failure> {
    let notion = parse_notion(&args.notion)?;
    let (text, digest) = read_input(&args.file)?;
    let set = parse_point_set(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.file.display())))?;
    let v = m_value_par(&set, notion, cli.budget).map_err(search_failure)?;
    let grid = set.grid();
    let result = json!({
        "grid": grid.to_string(),
        "cardinality": set.len(),
        "notion": notion.as_str(),
        "m": v.m,
        "witness": cube_json(notion, &v.witness),
    });
    let csv = csv_table(
        &["grid", "cardinality", "notion", "m", "witness"],
        vec![vec![
            grid.to_string(),
            set.len().to_string(),
            notion.to_string(),
            v.m.to_string(),
            v.witness.canonical_text(),
        ]],
    );
    let mut exec = ok(result, csv)?;
    exec.inputs.push(digest);
    Ok(exec)
}

fn cmd_fexact(args: &FexactArgs, cli: &Cli) -> Result<Execution, Failure> {
    let notion = parse_notion(&args.notion)?;
    let grid = GridParams::new(args.base, args.n).map_err(|e| Failure::Input(e.to_string()))?;
    let cs: Vec<Rational> = args
        .c
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<_, _>>()?;
    let exhaustive = grid.size() <= EXHAUSTIVE_CELLS;
    if !exhaustive && args.samples.is_none() {
        return Err(Failure::Input(format!(
            "{grid} has {} cells; exhaustive enumeration allows {EXHAUSTIVE_CELLS} (pass --samples for an upper bound)",
            grid.size()
        )));
    }
    let method = if exhaustive {
        "exhaustive"
    } else {
        "sampled-upper-bound"
    };
    let values: Vec<FValue> = cs
        .iter()
        .map(|c| {
            if exhaustive {
                f_exhaustive_par(args.base, args.n, c, notion, cli.budget)
            } else {
                f_sampled(
                    args.base,
                    args.n,
                    c,
                    notion,
                    cli.budget,
                    args.samples.unwrap_or(1),
                    cli.seed,
                )
            }
            .map_err(search_failure)
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<Value> = cs
        .iter()
        .zip(&values)
        .map(|(c, v)| {
            json!({
                "c": c.to_string(),
                "value": v.value,
                "subsets": v.subsets,
                "argmin": points_json(&v.argmin),
            })
        })
        .collect();
    let result = json!({
        "grid": grid.to_string(),
        "notion": notion.as_str(),
        "method": method,
        "rows": rows,
    });
    let csv = csv_table(
        &["N", "n", "c", "notion", "method", "value", "subsets"],
        cs.iter()
            .zip(&values)
            .map(|(c, v)| {
                vec![
                    args.base.to_string(),
                    args.n.to_string(),
                    c.to_string(),
                    notion.to_string(),
                    method.to_string(),
                    v.value.to_string(),
                    v.subsets.to_string(),
                ]
            })
            .collect(),
    );
    ok(result, csv)
}

fn bound_failure(e: BoundError) -> Failure {
    Failure::Input(e.to_string())
}

fn row_json(row: &BoundRow, eps: &Rational) -> Value {
    json!({
        "N": row.base,
        "n": row.n,
        "c": row.c.to_string(),
        "epsilon": eps.to_string(),
        "iterated_bound": row.iterated,
        "closed_form_bound": row.closed_form.as_ref().map(|c| c.value),
        "closed_form_raw": row.closed_form.as_ref().map(|c| c.raw),
        "closed_form_exact": row.closed_form.as_ref().map(|c| c.exact),
        "alpha": row.alpha.to_string(),
        "beta": row.beta,
    })
}

fn cmd_bound(args: &BoundArgs) -> Result<Execution, Failure> {
    let c = parse_rational(&args.c)?;
    let eps = parse_rational(&args.epsilon)?;
    let rows = bounds::bound_table(args.base, &args.n, &c, &eps).map_err(bound_failure)?;
    let result = json!({
        "rows": rows.iter().map(|r| row_json(r, &eps)).collect::<Vec<_>>(),
        "closed_form_note": if c == Rational::from_integer(1.into()) {
            Some("log c = 0: the closed form is undefined at c = 1")
        } else {
            None
        },
    });
    let csv = csv_table(
        &[
            "N",
            "n",
            "c",
            "iterated_bound",
            "closed_form_bound",
            "alpha",
            "beta",
        ],
        rows.iter()
            .map(|r| {
                vec![
                    r.base.to_string(),
                    r.n.to_string(),
                    r.c.to_string(),
                    r.iterated.to_string(),
                    opt(&r.closed_form.as_ref().map(|c| c.value)),
                    r.alpha.to_string(),
                    opt(&r.beta),
                ]
            })
            .collect(),
    );
    ok(result, csv)
}

fn status_str(s: ConstructStatus) -> &'static str {
    match s {
        ConstructStatus::Verified => "verified",
        ConstructStatus::SamplerExhausted => "sampler-exhausted",
        ConstructStatus::BelowTarget => "below-target",
        ConstructStatus::Inconclusive => "inconclusive",
    }
}

fn construction_json(c: &Construction, set_file: Option<&PathBuf>) -> Value {
    let cert = &c.certificate;
    let density = &cert.density;
    let mut certificate = json!({
        "grid": cert.grid.to_string(),
        "r": cert.r,
        "notion": cert.notion.as_str(),
        "p": opt(&cert.p),
        "seed": cert.seed,
        "rounds": cert.rounds,
        "density_num": density.numer().to_string(),
        "density_den": density.denom().to_string(),
        "cardinality": cert.cardinality,
        "verified": cert.verified(),
    });
    if let Verification::ContainsCube(w) = &cert.verification {
        certificate["witness"] = cube_json(cert.notion, w);
    }
    let mut out = json!({
        "seed": c.seed,
        "status": status_str(c.status),
        "rounds": c.rounds,
        "certificate": certificate,
    });
    if let Some(v) = &c.last_violation {
        out["last_violation"] = cube_json(cert.notion, v);
    }
    if let Some(d) = &c.dense {
        out["dense"] = json!({
            "target_density": d.target_density.to_string(),
            "tolerance": d.tolerance,
            "meets_density": d.meets_density,
            "eq_ep": {
                "c_n": d.eq_ep.c_n.to_string(),
                "holds": d.eq_ep.base_n.holds,
                "lhs": d.eq_ep.base_n.lhs,
                "rhs": d.eq_ep.base_n.rhs,
                "natural_log_holds": d.eq_ep.natural.holds,
                "degenerate": d.eq_ep.degenerate,
            },
        });
    }
    if let Some(s) = &c.sparse {
        out["sparse"] = json!({
            "meets_size": s.meets_size,
            "lll_holds": s.lll_holds,
            "chain_exponents": s.chain.exponents.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "chain_steps_hold": s.chain.steps_hold,
            "chain_below_one": s.chain.below_one,
        });
    }
    if let Some(p) = set_file {
        out["set_file"] = json!(p);
    }
    out
}

fn cmd_construct(args: &ConstructArgs, cli: &Cli) -> Result<Execution, Failure> {
    let eps = parse_rational(&args.epsilon)?;
    let notion = parse_notion(&args.notion)?;
    if args.runs == 0 {
        return Err(Failure::Input("--runs must be at least 1".into()));
    }
    let measure = match (args.measure, args.mode) {
        (Some(Measure::Bernoulli), _) | (None, Mode::Dense) => SamplingMeasure::Bernoulli,
        (Some(Measure::FixedSize), _) | (None, Mode::Sparse) => SamplingMeasure::FixedSize,
    };
    let opts = ConstructOptions {
        max_rounds: args.max_rounds,
        node_budget: cli.budget,
        notion,
    };
    let seeds: Vec<u64> = (0..args.runs).map(|i| cli.seed.wrapping_add(i)).collect();
    let runs: Vec<Result<Construction, LllError>> = seeds
        .par_iter()
        .map(|&seed| match args.mode {
            Mode::Dense => {
                lll::construct_dense_with_measure(args.n, args.base, &eps, seed, &opts, measure)
            }
            Mode::Sparse => {
                lll::construct_sparse_with_measure(args.n, args.base, &eps, seed, &opts, measure)
            }
        })
        .collect();
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut exit = 0;
    for run in runs {
        let c = match run {
            Ok(c) => c,
            Err(e @ LllError::NoValidR { .. }) => return Err(Failure::Construction(e.to_string())),
            Err(e @ LllError::Search(SearchError::BudgetExceeded { .. })) => {
                return Err(Failure::Inconclusive(e.to_string()))
            }
            Err(e) => return Err(Failure::Input(e.to_string())),
        };
        let set_file = args.out.as_ref().map(|p| {
            if args.runs == 1 {
                p.clone()
            } else {
                PathBuf::from(format!("{}.{}", p.display(), c.seed))
            }
        });
        if let Some(path) = &set_file {
            fs::write(path, write_point_set(&c.set))
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        }
        exit = exit.max(match c.status {
            ConstructStatus::Verified => 0,
            ConstructStatus::Inconclusive => 3,
            ConstructStatus::SamplerExhausted | ConstructStatus::BelowTarget => 4,
        });
        rows.push(vec![
            c.seed.to_string(),
            status_str(c.status).to_string(),
            c.rounds.to_string(),
            c.r.to_string(),
            c.certificate.cardinality.to_string(),
            c.certificate.density.to_string(),
            c.certificate.verified().to_string(),
        ]);
        records.push((
            c.r,
            c.p.clone(),
            construction_json(&c, set_file.as_ref()),
            c.status,
        ));
    }
    let verified = records
        .iter()
        .filter(|r| r.3 == ConstructStatus::Verified)
        .count();
    let result = json!({
        "mode": match args.mode { Mode::Dense => "dense", Mode::Sparse => "sparse" },
        "grid": format!("[{}]^{}", args.base, args.n),
        "epsilon": eps.to_string(),
        "measure": match measure { SamplingMeasure::Bernoulli => "bernoulli", SamplingMeasure::FixedSize => "fixed-size" },
        "r": records[0].0,
        "p": records[0].1.to_string(),
        "verified_runs": verified,
        "total_runs": records.len(),
        "runs": records.into_iter().map(|r| r.2).collect::<Vec<_>>(),
    });
    let csv = csv_table(
        &[
            "seed",
            "status",
            "rounds",
            "r",
            "cardinality",
            "density",
            "verified",
        ],
        rows,
    );
    Ok(Execution {
        result,
        csv,
        exit,
        inputs: Vec::new(),
    })
}

fn cmd_toric(args: &ToricArgs, cli: &Cli) -> Result<Execution, Failure> {
    let (text, digest) = read_input(&args.file)?;
    let input = |e: String| Failure::Input(format!("{}: {e}", args.file.display()));
    let (q, polytope) = parse_polytope(&text).map_err(|e| input(e.to_string()))?;
    let toric = |e: ToricError| match e {
        ToricError::Search(SearchError::BudgetExceeded { .. }) => {
            Failure::Inconclusive(e.to_string())
        }
        e => input(e.to_string()),
    };
    let code = build_code(&polytope, q).map_err(toric)?;
    let rank = code_rank(&code);
    let dmin = minimum_distance_par(&code).map_err(toric)?;
    let m = polytope_m_value(&polytope, q, cli.budget).map_err(toric)?;
    let s = stats_from_parts(&code, dmin, m);
    let result = json!({
        "q": s.q,
        "n": s.n,
        "lattice_points": polytope.lattice_points().len(),
        "block_length": s.block_length,
        "k": s.k,
        "rank": rank,
        "dmin": s.dmin,
        "relative_distance": s.relative_distance.to_string(),
        "rate": s.rate.to_string(),
        "m": s.m,
    });
    let csv = csv_table(
        &[
            "q",
            "n",
            "block_length",
            "k",
            "dmin",
            "relative_distance",
            "rate",
            "m",
        ],
        vec![vec![
            s.q.to_string(),
            s.n.to_string(),
            s.block_length.to_string(),
            s.k.to_string(),
            s.dmin.to_string(),
            s.relative_distance.to_string(),
            s.rate.to_string(),
            s.m.to_string(),
        ]],
    );
    let mut exec = ok(result, csv)?;
    exec.inputs.push(digest);
    Ok(exec)
}

fn cmd_verify(args: &VerifyArgs, cli: &Cli) -> Result<Execution, Failure> {
    let suite = Suite::from_str(&args.suite).map_err(Failure::Input)?;
    let report = run_suite(suite, cli.seed, args.instances);
    let csv = csv_table(
        &[
            "suite",
            "check",
            "instances",
            "vacuous",
            "inconclusive",
            "violations",
        ],
        report
            .checks
            .iter()
            .map(|c| {
                vec![
                    report.suite.clone(),
                    c.name.clone(),
                    c.instances.to_string(),
                    c.vacuous.to_string(),
                    c.inconclusive.to_string(),
                    c.violations.to_string(),
                ]
            })
            .collect(),
    );
    let exit = if report.passed { 0 } else { 1 };
    Ok(Execution {
        result: serde_json::to_value(&report).expect("serializable"),
        csv,
        exit,
        inputs: Vec::new(),
    })
}

/// Runs one non-replay command on the current thread pool.
pub fn execute(cli: &Cli) -> Result<Execution, Failure> {
    match &cli.command {
        Command::Mvalue(a) => cmd_mvalue(a, cli),
        Command::Fexact(a) => cmd_fexact(a, cli),
        Command::Bound(a) => cmd_bound(a),
        Command::Construct(a) => cmd_construct(a, cli),
        Command::Toric(a) => cmd_toric(a, cli),
        Command::Verify(a) => cmd_verify(a, cli),
        Command::Replay(_) => Err(Failure::Input(
            "a manifest cannot replay another replay".into(),
        )),
    }
}

pub fn manifest_for(cli: &Cli, exec: &Execution) -> RunManifest {
    RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        params: cli.command.clone(),
        format: cli.format,
        budget: cli.budget,
        seed: cli.seed,
        inputs: exec.inputs.clone(),
        checksum: checksum(&exec.result),
    }
}

fn render_execution(cli: &Cli, exec: &Execution) -> Result<(String, RunManifest), Failure> {
    let manifest = manifest_for(cli, exec);
    let stdout = match cli.format {
        Format::Json => {
            let envelope = json!({ "manifest": &manifest, "result": &exec.result });
            serde_json::to_string_pretty(&envelope).expect("serializable") + "\n"
        }
        Format::Csv => exec.csv.clone(),
    };
    if let Some(path) = &cli.manifest {
        let text = serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
        fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    Ok((stdout, manifest))
}

fn replay(args: &ReplayArgs, cli: &Cli) -> Result<Rendered, Failure> {
    let (text, _) = read_input(&args.manifest)?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.manifest.display())))?;
    let rerun = Cli {
        format: manifest.format,
        threads: cli.threads,
        budget: manifest.budget,
        seed: manifest.seed,
        manifest: cli.manifest.clone(),
        command: manifest.params.clone(),
    };
    let exec = execute(&rerun)?;
    for (old, new) in manifest.inputs.iter().zip(&exec.inputs) {
        if old.sha256 != new.sha256 {
            return Err(Failure::Input(format!(
                "input {} changed since the manifest was written",
                old.path.display()
            )));
        }
    }
    let (stdout, fresh) = render_execution(&rerun, &exec)?;
    if fresh.checksum != manifest.checksum {
        return Ok(Rendered {
            stdout,
            stderr: format!(
                "check failed: result checksum {} differs from manifest {}\n",
                fresh.checksum, manifest.checksum
            ),
            exit: 1,
        });
    }
    Ok(Rendered {
        stdout,
        stderr: String::new(),
        exit: exec.exit,
    })
}

/// Runs the command line on a pool of `cli.threads` workers.
pub fn run(cli: &Cli) -> Rendered {
    let outcome = with_threads(cli.threads, || match &cli.command {
        Command::Replay(args) => replay(args, cli),
        _ => execute(cli).and_then(|exec| {
            let (stdout, _) = render_execution(cli, &exec)?;
            Ok(Rendered {
                stdout,
                stderr: String::new(),
                exit: exec.exit,
            })
        }),
    });
    outcome.unwrap_or_else(|f| Rendered {
        stdout: String::new(),
        stderr: f.message() + "\n",
        exit: f.exit_code(),
    })
}
