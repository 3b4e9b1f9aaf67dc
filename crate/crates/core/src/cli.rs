//! Command-line front end. Every number leaves as an exact integer or
//! `p/q` string.
//!
//! Exit codes: 0 success, 2 parse or usage error, 3 domain error,
//! 4 verification mismatch, 5 search budget exceeded.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{normal_order, Process};
use crate::enumerate::{
    count_by_search, probabilities, EnumerateError, HistoryTable, DEFAULT_SEARCH_BUDGET,
};
use crate::parser::{parse, pretty, ParseError};
use crate::series::{
    b_series, driven_oscillator_closed_form, g_series, oscillator_process, pde_residual, Bounds,
};
use crate::{fraction_string, parse_fraction, BiPoly, Rational};

pub const SCHEMA_VERSION: &str = "1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "urnweyl",
    version,
    about = "Normal ordering and urn-history counting with exact arithmetic"
)]
pub struct Cli {
    /// Output format; csv is available for tables only
    #[arg(
        long,
        value_enum,
        global = true,
        env = "URNWEYL_FORMAT",
        default_value = "json"
    )]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normal-order an expression, e.g. "D^2 X^2"
    NormalOrder {
        /// Expression, or "-" to read it from stdin
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Count histories G^(n)_{l->k} for every start size in a range
    Histories {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(short = 'n', long = "steps")]
        n: u32,
        /// Start size `L` or inclusive range `A-B`
        #[arg(short = 'l', long = "start")]
        l: String,
        /// Cross-check with the labelled-ball search
        #[arg(long)]
        oracle: bool,
        /// Node ceiling for the search
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
    },
    /// Probabilities P^(n)_{l->k} for one start size
    Probabilities {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(short = 'n', long = "steps")]
        n: u32,
        #[arg(short = 'l', long = "start")]
        l: u32,
    },
    /// B_n(x, y) up to order N and the truncated G(x, y, λ)
    Series {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(short = 'N', long = "order", default_value_t = 6)]
        order: u32,
        #[arg(long, default_value_t = 10)]
        dx: u32,
        #[arg(long, default_value_t = 10)]
        dy: u32,
        /// Verify that B satisfies ∂_λ B = H(x, ∂_x + y) B
        #[arg(long)]
        check_pde: bool,
    },
    /// Compare the driven-oscillator closed form with the series of XD + gX + gD
    Oscillator {
        #[arg(short = 'g', allow_hyphen_values = true)]
        g: String,
        #[arg(short = 'N', long = "order", default_value_t = 6)]
        order: u32,
        #[arg(long, default_value_t = 10)]
        dx: u32,
        #[arg(long, default_value_t = 10)]
        dy: u32,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Budget(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Usage(_) => EXIT_PARSE,
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Io(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse_error",
            CliError::Usage(_) => "usage_error",
            CliError::Domain(_) => "domain_error",
            CliError::Budget(_) => "budget_exceeded",
            CliError::Io(_) => "io_error",
        }
    }
}

impl From<EnumerateError> for CliError {
    fn from(e: EnumerateError) -> Self {
        match e {
            EnumerateError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

/// What a command produced: the record to print and whether a verification
/// inside it failed.
pub struct Outcome {
    pub record: Value,
    pub csv: Option<String>,
    pub mismatch: Option<String>,
}

fn read_expr(expr: &str, stdin: &mut dyn Read) -> Result<String, CliError> {
    if expr == "-" {
        let mut s = String::new();
        stdin.read_to_string(&mut s)?;
        Ok(s.trim().to_string())
    } else {
        Ok(expr.to_string())
    }
}

fn parse_process(expr: &str) -> Result<Process, CliError> {
    Ok(parse(expr)?)
}

fn parse_range(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Usage(format!("invalid start range {s:?}, expected L or A-B"));
    let (a, b) = match s.split_once('-') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), s.trim()),
    };
    let a: u32 = a.parse().map_err(|_| bad())?;
    let b: u32 = b.parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn rat(r: &Rational) -> Value {
    Value::String(fraction_string(r))
}

/// Terms sorted by `k` descending, then `l` descending.
fn normal_form_json(nf: &BiPoly) -> Value {
    Value::Array(
        nf.terms()
            .rev()
            .map(|(&(k, l), c)| json!({ "k": k, "l": l, "coeff": rat(c) }))
            .collect(),
    )
}

fn cmd_normal_order(expr: &str) -> Result<Outcome, CliError> {
    let p = parse_process(expr)?;
    let nf = normal_order(&p);
    let mut csv = String::from("k,l,coeff\n");
    for (&(k, l), c) in nf.terms().rev() {
        csv.push_str(&format!("{k},{l},{}\n", fraction_string(c)));
    }
    Ok(Outcome {
        record: json!({
            "command": { "name": "normal-order", "expr": expr },
            "result": {
                "process": pretty(&p),
                "normal_form": normal_form_json(&nf),
                "polynomial": nf.to_string(),
            },
        }),
        csv: Some(csv),
        mismatch: None,
    })
}

fn cmd_histories(
    expr: &str,
    n: u32,
    range: &str,
    oracle: bool,
    budget: u64,
) -> Result<Outcome, CliError> {
    let p = parse_process(expr)?;
    let (lo, hi) = parse_range(range)?;
    let table = HistoryTable::from_operator(&p, n, lo..=hi);

    let mut rows = Vec::new();
    let mut csv = String::from("n,l,k,count\n");
    for l in table.rows() {
        let row = table.row(l);
        for (k, c) in &row {
            csv.push_str(&format!("{n},{l},{k},{}\n", fraction_string(c)));
        }
        rows.push(json!({
            "l": l,
            "counts": row.iter().map(|(k, c)| json!({ "k": k, "count": rat(c) })).collect::<Vec<_>>(),
        }));
    }

    let mut result = json!({ "n": n, "rows": rows });
    let mut mismatch = None;
    if oracle {
        let scale = p
            .denominator_lcm()
            .to_u64()
            .ok_or_else(|| CliError::Domain("weight denominators too large for search".into()))?;
        let factor = Rational::from_integer(BigInt::from(scale).pow(n));
        let mut agreement = true;
        let mut first = Value::Null;
        for l in lo..=hi {
            let searched = count_by_search(&p, n, l, scale, budget)?;
            let searched: BTreeMap<u32, Rational> = searched
                .into_iter()
                .map(|(k, c)| (k, Rational::from_integer(c.into())))
                .collect();
            let expected: BTreeMap<u32, Rational> = table
                .row(l)
                .into_iter()
                .map(|(k, c)| (k, c * &factor))
                .collect();
            if searched != expected && agreement {
                agreement = false;
                first = json!({ "l": l });
                mismatch = Some(format!("search disagrees with operator action at l = {l}"));
            }
        }
        result["oracle"] = json!({
            "weight_scale": scale.to_string(),
            "agreement": agreement,
            "first_disagreement": first,
        });
    }

    Ok(Outcome {
        record: json!({
            "command": {
                "name": "histories", "expr": expr, "n": n,
                "l_range": [lo, hi], "oracle": oracle,
            },
            "result": result,
        }),
        csv: Some(csv),
        mismatch,
    })
}

fn cmd_probabilities(expr: &str, n: u32, l: u32) -> Result<Outcome, CliError> {
    let p = parse_process(expr)?;
    let table = HistoryTable::from_operator(&p, n, [l]);
    let row = probabilities(&table, l)?;
    let mut csv = String::from("n,l,k,p\n");
    for (k, q) in &row.probs {
        csv.push_str(&format!("{n},{l},{k},{}\n", fraction_string(q)));
    }
    Ok(Outcome {
        record: json!({
            "command": { "name": "probabilities", "expr": expr, "n": n, "l": l },
            "result": {
                "n": n,
                "l": l,
                "probs": row.probs.iter().map(|(k, q)| json!({ "k": k, "p": rat(q) })).collect::<Vec<_>>(),
            },
        }),
        csv: Some(csv),
        mismatch: None,
    })
}

fn cmd_series(
    expr: &str,
    order: u32,
    dx: u32,
    dy: u32,
    check_pde: bool,
) -> Result<Outcome, CliError> {
    let p = parse_process(expr)?;
    let b = b_series(&p, order);
    let b_terms: Vec<Value> = b
        .terms()
        .iter()
        .enumerate()
        .map(|(n, t)| json!({ "n": n, "polynomial": t.to_string(), "coeffs": normal_form_json(t) }))
        .collect();
    let g = g_series(&p, order, dx, dy);
    let g_coeffs: Vec<Value> = {
        let mut entries: Vec<_> = g.entries().collect();
        entries.sort_by_key(|(&(i, j, n), _)| (n, j, i));
        entries
            .into_iter()
            .map(|(&(k, l, n), c)| json!({ "n": n, "k": k, "l": l, "coeff": rat(c) }))
            .collect()
    };

    let mut result = json!({
        "order": order,
        "bounds": { "n": order, "x": dx, "y": dy },
        "b_terms": b_terms,
        "g_coeffs": g_coeffs,
    });
    let mut mismatch = None;
    if check_pde {
        let residual = pde_residual(&p, &b).map_err(|e| CliError::Domain(e.to_string()))?;
        let zero = residual.is_zero();
        result["residual_zero"] = json!(zero);
        if !zero {
            mismatch = Some("B(x, y, λ) does not satisfy the λ-equation".to_string());
        }
    }
    Ok(Outcome {
        record: json!({
            "command": {
                "name": "series", "expr": expr, "order": order,
                "dx": dx, "dy": dy, "check_pde": check_pde,
            },
            "result": result,
        }),
        csv: None,
        mismatch,
    })
}

/// Upper limit on listed differing indices; `mismatch_count` has the total.
const MAX_REPORTED_MISMATCHES: usize = 50;

fn cmd_oscillator(g: &str, order: u32, dx: u32, dy: u32) -> Result<Outcome, CliError> {
    let g_val = parse_fraction(g)
        .ok_or_else(|| CliError::Usage(format!("invalid rational {g:?} for -g")))?;
    let process = oscillator_process(&g_val).map_err(|e| CliError::Domain(e.to_string()))?;
    let closed = driven_oscillator_closed_form(&g_val, order, dx, dy);
    let series = g_series(&process, order, dx, dy);
    let window = Bounds::new(order, dx, dy);
    let diffs = closed.differences(&series, window);
    let compared = (order as u64 + 1) * (dx as u64 + 1) * (dy as u64 + 1);

    let report: Vec<Value> = diffs
        .iter()
        .take(MAX_REPORTED_MISMATCHES)
        .map(|&((k, l, n), ref a, ref b)| {
            json!({ "n": n, "k": k, "l": l, "closed_form": rat(a), "series": rat(b) })
        })
        .collect();
    let mismatch = diffs
        .first()
        .map(|((k, l, n), _, _)| format!("first differing index: n = {n}, k = {k}, l = {l}"));

    Ok(Outcome {
        record: json!({
            "command": { "name": "oscillator", "g": fraction_string(&g_val), "order": order, "dx": dx, "dy": dy },
            "result": {
                "process": pretty(&process),
                "bounds": { "n": order, "x": dx, "y": dy },
                "compared": compared,
                "nonzero_coefficients": closed.entries().filter(|(_, c)| !c.is_zero()).count(),
                "match": diffs.is_empty(),
                "mismatch_count": diffs.len(),
                "mismatches": report,
            },
        }),
        csv: None,
        mismatch,
    })
}

pub fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::NormalOrder { expr } => cmd_normal_order(&read_expr(expr, stdin)?),
        Command::Histories {
            expr,
            n,
            l,
            oracle,
            budget,
        } => cmd_histories(&read_expr(expr, stdin)?, *n, l, *oracle, *budget),
        Command::Probabilities { expr, n, l } => {
            cmd_probabilities(&read_expr(expr, stdin)?, *n, *l)
        }
        Command::Series {
            expr,
            order,
            dx,
            dy,
            check_pde,
        } => cmd_series(&read_expr(expr, stdin)?, *order, *dx, *dy, *check_pde),
        Command::Oscillator { g, order, dx, dy } => cmd_oscillator(g, *order, *dx, *dy),
    }
}

fn with_schema(mut record: Value) -> Value {
    record["schema_version"] = json!(SCHEMA_VERSION);
    record
}

/// Runs a parsed command line, writing the record to `out` and diagnostics
/// to `err`. Returns the process exit code.
pub fn run(cli: &Cli, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let outcome = match execute(cli, stdin) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if cli.format == Format::Json {
                let record = with_schema(json!({
                    "error": { "kind": e.kind(), "message": e.to_string() },
                }));
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&record).unwrap());
            }
            return e.exit_code();
        }
    };

    match cli.format {
        Format::Json => {
            let record = with_schema(outcome.record);
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&record).unwrap());
        }
        Format::Csv => match &outcome.csv {
            Some(csv) => {
                let _ = write!(out, "{csv}");
            }
            None => {
                let _ = writeln!(
                    err,
                    "error: csv output is only available for table commands"
                );
                return EXIT_PARSE;
            }
        },
    }
    match outcome.mismatch {
        Some(msg) => {
            let _ = writeln!(err, "verification failed: {msg}");
            EXIT_MISMATCH
        }
        None => EXIT_OK,
    }
}

/// Parses `args` (including the program name) and runs them.
pub fn run_args<I, T>(
    args: I,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, stdin, out, err),
        Err(e) => {
            let _ = write!(err, "{e}");
            if e.use_stderr() {
                EXIT_PARSE
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            }
        }
    }
}
