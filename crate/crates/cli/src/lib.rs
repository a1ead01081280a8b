//! `modkernel` command-line front end.
//!
//! Every command renders as JSON (default), CSV or plain text. Floats carry
//! 17 significant digits and JSON fields come out in a fixed order, so a
//! given command line and cache state always produce the same bytes.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::value::RawValue;

use modkernel::arith::cache::CACHE_FILE_NAME;
use modkernel::arith::{divisor_count, selberg_sides, KloostermanCache, KloostermanKey, KloostermanValue};
use modkernel::borcherds::{verify_identity_with, ExponentSource, VerificationReport, VerifyOptions};
use modkernel::hauptmodul::hauptmodul;
use modkernel::hecke::{eta_square_form, hecke_apply, ModularFormExpansion};
use modkernel::kernels::{eisenstein_exact, eisenstein_numeric, nonholomorphic_coefficient, poincare_coeff};
use modkernel::qseries::LaurentSeries;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable naming the default Kloosterman cache directory.
pub const CACHE_DIR_ENV: &str = "MODKERNEL_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(name = "modkernel", version, about = "Hauptmoduls, Kloosterman-Bessel sums and product identity checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalArgs {
    /// Output format (each command has its own default).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Directory holding the Kloosterman value cache.
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Report wall time in elapsed_ms instead of null.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Exponents {
    Theorem,
    Replicable,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Coefficients of the normalized Hauptmodul J_N.
    Haupt {
        #[arg(long, default_value_t = 1)]
        level: u64,
        /// Print exponents -1 <= r < PREC.
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(i64).range(1..))]
        prec: i64,
    },
    /// Check the product formula for J_N(p) - J_N(q) on a box.
    VerifyBorcherds {
        /// One or more levels, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "1")]
        level: Vec<u64>,
        /// Box size A or A,B.
        #[arg(long = "box", value_delimiter = ',', num_args = 1..=2, default_values_t = [6u64])]
        box_size: Vec<u64>,
        #[arg(long, value_enum, default_value_t = Exponents::Theorem)]
        exponents: Exponents,
        /// Add DELTA to the exponent at (R, R'): R,R',DELTA.
        #[arg(long, hide = true, value_delimiter = ',', allow_negative_numbers = true)]
        perturb: Option<Vec<i64>>,
    },
    /// Truncated Kloosterman-Bessel sum p_{r',N}(r).
    Poincare {
        #[arg(long, default_value_t = 1)]
        level: u64,
        #[arg(long, allow_negative_numbers = true)]
        rprime: i64,
        #[arg(long)]
        r: u64,
        #[arg(long, default_value_t = 10_000)]
        cmax: u64,
    },
    /// Eisenstein coefficient e_{r,N}, exact or as the truncated sum.
    Eisenstein {
        #[arg(long, default_value_t = 1)]
        level: u64,
        #[arg(long)]
        r: u64,
        #[arg(long, conflicts_with = "cmax")]
        exact: bool,
        #[arg(long)]
        cmax: Option<u64>,
    },
    /// Kloosterman sum K(a, b; c).
    #[command(allow_negative_numbers = true)]
    Kloosterman { a: i64, b: i64, c: u64 },
    /// Both sides of the Selberg identity for K(r, r'; c).
    #[command(allow_negative_numbers = true)]
    Selberg {
        #[arg(long)]
        r: i64,
        #[arg(long)]
        rprime: i64,
        #[arg(long)]
        c: u64,
        /// Accept |lhs - rhs| <= TOL * d(c) * sqrt(c).
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Apply T_k(m) to a q-expansion (default: the level-11 cusp form).
    HeckeApply {
        #[arg(long)]
        m: u64,
        /// Number of output coefficients.
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(i64).range(1..))]
        prec: i64,
        #[arg(long, default_value_t = 2)]
        weight: u32,
        /// Level of the input form (the built-in fixture has level 11).
        #[arg(long)]
        level: Option<u64>,
        /// Series JSON: {"valuation", "precision", "coefficients": ["num/den", ...]}.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Parses `args` and runs the command, writing results to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.threads {
        builder = builder.num_threads(n as usize);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker threads: {e}");
            return EXIT_USAGE;
        }
    };
    let mut warnings = Vec::new();
    let result = pool.install(|| dispatch(&cli, &mut warnings));
    for w in &warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    match result {
        Ok(outcome) => {
            if out.write_all(outcome.text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return EXIT_USAGE;
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: EXIT_OK }
    }
}

type CmdResult = Result<Outcome, Box<dyn std::error::Error + Send + Sync>>;

fn dispatch(cli: &Cli, warnings: &mut Vec<String>) -> CmdResult {
    let g = &cli.global;
    let fmt = |default| g.format.unwrap_or(default);
    match &cli.command {
        Command::Haupt { level, prec } => cmd_haupt(*level, *prec, fmt(Format::Json)),
        Command::VerifyBorcherds { level, box_size, exponents, perturb } => {
            cmd_verify_borcherds(level, box_size, *exponents, perturb.as_deref(), g.timing, fmt(Format::Json))
        }
        Command::Poincare { level, rprime, r, cmax } => {
            cmd_poincare(*level, *rprime, *r, *cmax, g.timing, fmt(Format::Json))
        }
        Command::Eisenstein { level, r, exact, cmax } => cmd_eisenstein(*level, *r, *exact, *cmax, fmt(Format::Json)),
        Command::Kloosterman { a, b, c } => cmd_kloosterman(*a, *b, *c, g.cache_dir.as_deref(), warnings, fmt(Format::Json)),
        Command::Selberg { r, rprime, c, tol } => cmd_selberg(*r, *rprime, *c, *tol, fmt(Format::Json)),
        Command::HeckeApply { m, prec, weight, level, input } => {
            cmd_hecke_apply(*m, *prec, *weight, *level, input.as_deref(), fmt(Format::Csv))
        }
    }
}

/// Float as a JSON number with 17 significant digits.
fn float(x: f64) -> Box<RawValue> {
    let s = if x.is_finite() { format!("{x:.16e}") } else { "null".to_string() };
    RawValue::from_string(s).expect("valid JSON number")
}

/// Integer or rational given as a decimal string: raw JSON number when
/// integral, quoted "num/den" otherwise.
fn exact(s: &str) -> Box<RawValue> {
    let text = if s.contains('/') { serde_json::to_string(s).expect("string") } else { s.to_string() };
    RawValue::from_string(text).expect("valid JSON")
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn text(pairs: &[(&str, String)]) -> String {
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    pairs.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn elapsed(start: Instant, timing: bool) -> Option<u64> {
    timing.then(|| start.elapsed().as_millis() as u64)
}

#[derive(Serialize)]
struct HauptRow {
    r: i64,
    a: Box<RawValue>,
}

#[derive(Serialize)]
struct HauptOut {
    level: u64,
    precision: i64,
    coefficients: Vec<HauptRow>,
}

fn cmd_haupt(level: u64, prec: i64, format: Format) -> CmdResult {
    let s = hauptmodul(level, prec)?;
    let rows: Vec<(i64, String)> = (-1..prec).map(|r| (r, s.coefficient(r).expect("below precision").to_string())).collect();
    let text_out = match format {
        Format::Json => to_json(&HauptOut {
            level,
            precision: prec,
            coefficients: rows.iter().map(|(r, a)| HauptRow { r: *r, a: exact(a) }).collect(),
        }),
        Format::Csv => csv(&["r", "a"], &rows.iter().map(|(r, a)| vec![r.to_string(), a.clone()]).collect::<Vec<_>>()),
        Format::Text => rows.iter().map(|(r, a)| format!("{r:>4}  {a}\n")).collect(),
    };
    Ok(Outcome::ok(text_out))
}

fn cmd_verify_borcherds(
    levels: &[u64],
    box_size: &[u64],
    exponents: Exponents,
    perturb: Option<&[i64]>,
    timing: bool,
    format: Format,
) -> CmdResult {
    let (a, b) = match box_size {
        [a] => (*a, *a),
        [a, b] => (*a, *b),
        _ => return Err("--box takes A or A,B".into()),
    };
    let perturb = match perturb {
        None => None,
        Some([r, rp, d]) if *r > 0 && *rp > 0 => Some((*r as u64, *rp as u64, *d)),
        Some(_) => return Err("--perturb takes R,R',DELTA with R, R' >= 1".into()),
    };
    let source = match exponents {
        Exponents::Theorem => ExponentSource::Theorem,
        Exponents::Replicable => ExponentSource::Replicates,
    };
    let options = VerifyOptions { source, perturb };
    let reports: Vec<VerificationReport> = levels
        .par_iter()
        .map(|&n| {
            verify_identity_with(n, a, b, &options).map(|mut rep| {
                if !timing {
                    rep.elapsed_ms = None;
                }
                rep
            })
        })
        .collect::<Result<_, _>>()?;
    let all_pass = reports.iter().all(|r| r.pass);
    let text_out = match format {
        Format::Json if reports.len() == 1 => to_json(&reports[0]),
        Format::Json => to_json(&reports),
        Format::Csv => {
            let mut rows = Vec::new();
            for rep in &reports {
                for m in &rep.mismatches {
                    rows.push(vec![rep.level.to_string(), m.i.to_string(), m.j.to_string(), m.lhs.clone(), m.rhs.clone()]);
                }
            }
            let mut s = csv(
                &["level", "box_a", "box_b", "pass", "checked", "mismatches", "max_discrepancy", "exponent_source"],
                &reports
                    .iter()
                    .map(|r| {
                        vec![
                            r.level.to_string(),
                            r.box_size.0.to_string(),
                            r.box_size.1.to_string(),
                            r.pass.to_string(),
                            r.checked.to_string(),
                            r.mismatches.len().to_string(),
                            r.max_discrepancy.clone(),
                            r.exponent_source.to_string(),
                        ]
                    })
                    .collect::<Vec<_>>(),
            );
            if !rows.is_empty() {
                s.push('\n');
                s.push_str(&csv(&["level", "i", "j", "lhs", "rhs"], &rows));
            }
            s
        }
        Format::Text => reports
            .iter()
            .map(|r| {
                let mut s = format!(
                    "level {} box ({}, {}) exponents {}: {} ({} monomials, {} mismatches, max discrepancy {})\n",
                    r.level,
                    r.box_size.0,
                    r.box_size.1,
                    r.exponent_source,
                    if r.pass { "PASS" } else { "FAIL" },
                    r.checked,
                    r.mismatches.len(),
                    r.max_discrepancy
                );
                for m in &r.mismatches {
                    s.push_str(&format!("  p^{} q^{}: lhs {} rhs {}\n", m.i, m.j, m.lhs, m.rhs));
                }
                s
            })
            .collect(),
    };
    Ok(Outcome { text: text_out, code: if all_pass { EXIT_OK } else { EXIT_MISMATCH } })
}

#[derive(Serialize)]
struct PoincareOut {
    level: u64,
    rprime: i64,
    r: u64,
    c_max: u64,
    value: Box<RawValue>,
    tail_bound: Box<RawValue>,
    rounding_bound: Box<RawValue>,
    elapsed_ms: Option<u64>,
}

fn cmd_poincare(level: u64, rprime: i64, r: u64, c_max: u64, timing: bool, format: Format) -> CmdResult {
    let start = Instant::now();
    let p = poincare_coeff(level, rprime, r, c_max)?;
    let ms = elapsed(start, timing);
    let text_out = match format {
        Format::Json => to_json(&PoincareOut {
            level,
            rprime,
            r,
            c_max,
            value: float(p.value),
            tail_bound: float(p.tail_bound),
            rounding_bound: float(p.rounding_bound),
            elapsed_ms: ms,
        }),
        Format::Csv => csv(
            &["level", "rprime", "r", "c_max", "value", "tail_bound", "rounding_bound"],
            &[vec![
                level.to_string(),
                rprime.to_string(),
                r.to_string(),
                c_max.to_string(),
                fmt_float(p.value),
                fmt_float(p.tail_bound),
                fmt_float(p.rounding_bound),
            ]],
        ),
        Format::Text => text(&[
            ("p", format!("p_{{{rprime},{level}}}({r})")),
            ("value", fmt_float(p.value)),
            ("c_max", c_max.to_string()),
            ("tail_bound", fmt_float(p.tail_bound)),
            ("rounding_bound", fmt_float(p.rounding_bound)),
        ]),
    };
    Ok(Outcome::ok(text_out))
}

#[derive(Serialize)]
struct EisensteinExactOut {
    level: u64,
    r: u64,
    exact: bool,
    value: Box<RawValue>,
    nonholo_coefficient: Box<RawValue>,
}

#[derive(Serialize)]
struct EisensteinNumericOut {
    level: u64,
    r: u64,
    exact: bool,
    c_max: u64,
    value: Box<RawValue>,
    tail_bound: Box<RawValue>,
}

fn cmd_eisenstein(level: u64, r: u64, want_exact: bool, c_max: Option<u64>, format: Format) -> CmdResult {
    match c_max {
        Some(c_max) if !want_exact => {
            let e = eisenstein_numeric(level, r, c_max)?;
            let text_out = match format {
                Format::Json => to_json(&EisensteinNumericOut {
                    level,
                    r,
                    exact: false,
                    c_max,
                    value: float(e.value),
                    tail_bound: float(e.tail_bound),
                }),
                Format::Csv => csv(
                    &["level", "r", "c_max", "value", "tail_bound"],
                    &[vec![level.to_string(), r.to_string(), c_max.to_string(), fmt_float(e.value), fmt_float(e.tail_bound)]],
                ),
                Format::Text => text(&[
                    ("e", format!("e_{{{r},{level}}}")),
                    ("value", fmt_float(e.value)),
                    ("c_max", c_max.to_string()),
                    ("tail_bound", fmt_float(e.tail_bound)),
                ]),
            };
            Ok(Outcome::ok(text_out))
        }
        _ => {
            let v = eisenstein_exact(level, r)?.to_string();
            let nh = nonholomorphic_coefficient(level)?.to_string();
            let text_out = match format {
                Format::Json => to_json(&EisensteinExactOut {
                    level,
                    r,
                    exact: true,
                    value: exact(&v),
                    nonholo_coefficient: exact(&nh),
                }),
                Format::Csv => csv(&["level", "r", "value", "nonholo_coefficient"], &[vec![level.to_string(), r.to_string(), v, nh]]),
                Format::Text => text(&[("e", format!("e_{{{r},{level}}}")), ("value", v), ("exact", "true".into()), ("nonholo_coefficient", nh)]),
            };
            Ok(Outcome::ok(text_out))
        }
    }
}

fn load_cache(dir: &Path, warnings: &mut Vec<String>) -> KloostermanCache {
    let path = dir.join(CACHE_FILE_NAME);
    if !path.exists() {
        return KloostermanCache::new();
    }
    match KloostermanCache::load(&path) {
        Ok(c) => c,
        Err(e) => {
            warnings.push(format!("ignoring Kloosterman cache {}: {e}", path.display()));
            KloostermanCache::new()
        }
    }
}

fn save_cache(cache: &KloostermanCache, dir: &Path, warnings: &mut Vec<String>) {
    let path = dir.join(CACHE_FILE_NAME);
    let result = fs::create_dir_all(dir).map_err(modkernel::Error::from).and_then(|_| cache.save(&path));
    if let Err(e) = result {
        warnings.push(format!("could not write Kloosterman cache {}: {e}", path.display()));
    }
}

#[derive(Serialize)]
struct KloostermanOut {
    a: i64,
    b: i64,
    c: u64,
    value: Box<RawValue>,
    term_count: u64,
    error_bound: Box<RawValue>,
}

fn cmd_kloosterman(a: i64, b: i64, c: u64, cache_dir: Option<&Path>, warnings: &mut Vec<String>, format: Format) -> CmdResult {
    let key = KloostermanKey::new(a, b, c)?;
    let computed = modkernel::arith::kloosterman_value(key);
    let value = match cache_dir {
        Some(dir) => {
            let mut cache = load_cache(dir, warnings);
            match cache.get(&key) {
                Some(v) => v,
                None => {
                    cache.insert(key, computed.value);
                    save_cache(&cache, dir, warnings);
                    computed.value
                }
            }
        }
        None => computed.value,
    };
    let kv = KloostermanValue { value, term_count: computed.term_count };
    let text_out = match format {
        Format::Json => to_json(&KloostermanOut {
            a,
            b,
            c,
            value: float(kv.value),
            term_count: kv.term_count,
            error_bound: float(kv.error_bound()),
        }),
        Format::Csv => csv(
            &["a", "b", "c", "value", "term_count", "error_bound"],
            &[vec![a.to_string(), b.to_string(), c.to_string(), fmt_float(kv.value), kv.term_count.to_string(), fmt_float(kv.error_bound())]],
        ),
        Format::Text => text(&[
            ("K", format!("K({a}, {b}; {c})")),
            ("value", fmt_float(kv.value)),
            ("term_count", kv.term_count.to_string()),
            ("error_bound", fmt_float(kv.error_bound())),
        ]),
    };
    Ok(Outcome::ok(text_out))
}

#[derive(Serialize)]
struct SelbergOut {
    r: i64,
    rprime: i64,
    c: u64,
    lhs: Box<RawValue>,
    rhs: Box<RawValue>,
    difference: Box<RawValue>,
    tolerance: Box<RawValue>,
    pass: bool,
}

fn cmd_selberg(r: i64, rprime: i64, c: u64, tol: f64, format: Format) -> CmdResult {
    if !(tol >= 0.0) {
        return Err("--tol must be nonnegative".into());
    }
    let (lhs, rhs) = selberg_sides(r, rprime, c)?;
    let diff = (lhs - rhs).abs();
    let allowed = tol * divisor_count(c)? as f64 * (c as f64).sqrt();
    let pass = diff <= allowed;
    let text_out = match format {
        Format::Json => to_json(&SelbergOut {
            r,
            rprime,
            c,
            lhs: float(lhs),
            rhs: float(rhs),
            difference: float(diff),
            tolerance: float(allowed),
            pass,
        }),
        Format::Csv => csv(
            &["r", "rprime", "c", "lhs", "rhs", "difference", "tolerance", "pass"],
            &[vec![
                r.to_string(),
                rprime.to_string(),
                c.to_string(),
                fmt_float(lhs),
                fmt_float(rhs),
                fmt_float(diff),
                fmt_float(allowed),
                pass.to_string(),
            ]],
        ),
        Format::Text => text(&[
            ("lhs", fmt_float(lhs)),
            ("rhs", fmt_float(rhs)),
            ("difference", fmt_float(diff)),
            ("tolerance", fmt_float(allowed)),
            ("pass", pass.to_string()),
        ]),
    };
    Ok(Outcome { text: text_out, code: if pass { EXIT_OK } else { EXIT_MISMATCH } })
}

#[derive(Serialize)]
struct HeckeRow {
    n: i64,
    before: Box<RawValue>,
    after: Box<RawValue>,
}

#[derive(Serialize)]
struct HeckeOut {
    weight: u32,
    level: u64,
    m: u64,
    precision: i64,
    coefficients: Vec<HeckeRow>,
}

fn cmd_hecke_apply(m: u64, prec: i64, weight: u32, level: Option<u64>, input: Option<&Path>, format: Format) -> CmdResult {
    if m == 0 {
        return Err("--m must be positive".into());
    }
    let needed = prec.checked_mul(m as i64).ok_or("--prec times --m overflows")?;
    let f = match input {
        Some(path) => {
            let text_in = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let series: LaurentSeries =
                serde_json::from_str(&text_in).map_err(|e| format!("bad series in {}: {e}", path.display()))?;
            ModularFormExpansion::new(weight, level.unwrap_or(1), series)?
        }
        None => {
            if weight != 2 || level.is_some_and(|n| n != 11) {
                return Err("the built-in form has weight 2 and level 11; pass --input for other forms".into());
            }
            eta_square_form(needed)?
        }
    };
    let g = hecke_apply(weight, m, &f)?;
    let p_out = g.precision().min(prec);
    let rows: Vec<(i64, String, String)> = (0..p_out)
        .map(|n| (n, f.series.coefficient(n).expect("n < precision").to_string(), g.series.coefficient(n).expect("n < precision").to_string()))
        .collect();
    let text_out = match format {
        Format::Json => to_json(&HeckeOut {
            weight,
            level: f.level,
            m,
            precision: p_out,
            coefficients: rows.iter().map(|(n, a, b)| HeckeRow { n: *n, before: exact(a), after: exact(b) }).collect(),
        }),
        Format::Csv => csv(&["n", "before", "after"], &rows.iter().map(|(n, a, b)| vec![n.to_string(), a.clone(), b.clone()]).collect::<Vec<_>>()),
        Format::Text => rows.iter().map(|(n, a, b)| format!("{n:>4}  {a:>12}  {b:>12}\n")).collect(),
    };
    Ok(Outcome::ok(text_out))
}
