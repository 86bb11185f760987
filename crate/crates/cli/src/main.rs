//! `smithpow` command-line front end.
//!
//! Machine output goes to standard output (or `--out`), diagnostics to
//! standard error. Exit codes: 0 success, 1 computation or suite failure,
//! 2 usage, parse or input error.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};

use smithpow::gen::{self, Instance};
use smithpow::ntkit::{self, PolyProbe, Prime};
use smithpow::powertrace::{self, TraceReport};
use smithpow::seqlab::{self, DEFAULT_CONFIRM_FACTOR};
use smithpow::{selftest, smith, Error, IntMatrix, Rational};

#[derive(Parser)]
#[command(
    name = "smithpow",
    version,
    about = "Smith normal forms of integer matrix powers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Smith normal form of a matrix.
    Snf {
        #[command(flatten)]
        source: Source,
        /// Include unimodular U, V with U·S·V = M.
        #[arg(long)]
        witnesses: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Smith forms of A^0..A^N, the quotients D_n and their period.
    Trace {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        window: Window,
        #[command(flatten)]
        primes: PrimeArg,
        #[command(flatten)]
        output: Output,
    },
    /// Ratios gcd(A^{n+1}) / gcd(A^n).
    GcdSeq {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        window: Window,
        #[command(flatten)]
        output: Output,
    },
    /// p-adic valuations of A^n split as a·n + h(n).
    Valuation {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        window: Window,
        #[command(flatten)]
        primes: PrimeArg,
        #[command(flatten)]
        output: Output,
    },
    /// Newton polygon of a polynomial, or of a matrix's characteristic polynomial.
    Newton {
        /// Integer coefficients, constant term first, comma separated.
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["matrix", "family"])]
        poly: Option<String>,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        primes: PrimeArg,
        #[command(flatten)]
        output: Output,
    },
    /// Samples f(n) = min{0, ν_p(q(n)) − c} for a rational polynomial q.
    Probe {
        /// Rational coefficients, constant term first, comma separated (e.g. 1/2,0,3).
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        /// Threshold c, an integer or fraction.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        c: String,
        #[arg(long)]
        prime: u64,
        /// Last sampled n; defaults to 4·p^D.
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_CONFIRM_FACTOR)]
        confirm: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Period candidates (p^f − 1)·p^L.
    Candidates {
        #[arg(long)]
        prime: u64,
        #[arg(long, default_value_t = 2)]
        max_f: u32,
        #[arg(long, default_value_t = 3)]
        max_l: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Emit a generated instance as JSON (usable with --matrix).
    Generate {
        #[command(flatten)]
        source: FamilyArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Run the acceptance suites.
    Selftest {
        /// Suite to run; repeat to run several. Default: all.
        #[arg(long)]
        suite: Vec<String>,
    },
}

#[derive(Args)]
struct FamilyArgs {
    /// Named family: jordan (p, pad), bruner (m), random (size, bound), companion (coeffs).
    #[arg(long, required = true)]
    family: Option<String>,
    /// Family parameter as KEY=VALUE; repeatable.
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    /// Seed for the random family.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// `--matrix FILE` or `--family NAME` with its parameters.
#[derive(Args)]
struct Source {
    /// Matrix file: text ("rows cols" then rows), matrix JSON or a generated instance.
    #[arg(long, conflicts_with = "family")]
    matrix: Option<PathBuf>,
    /// Named family: jordan (p, pad), bruner (m), random (size, bound), companion (coeffs).
    #[arg(long)]
    family: Option<String>,
    /// Family parameter as KEY=VALUE; repeatable.
    #[arg(long = "param", value_name = "K=V", requires = "family")]
    params: Vec<String>,
    /// Seed for the random family.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct Window {
    /// Largest power computed.
    #[arg(long, default_value_t = 40)]
    horizon: u64,
    /// Full periods required to confirm a detection.
    #[arg(long, default_value_t = DEFAULT_CONFIRM_FACTOR)]
    confirm: usize,
}

#[derive(Args)]
struct PrimeArg {
    /// Comma-separated primes, or "auto".
    #[arg(long, default_value = "auto")]
    primes: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CorruptDivisors(_)
            | Error::MismatchedParts(_)
            | Error::InsufficientSamples(_)
            | Error::EmptySequence
            | Error::DivisionByZero(_)
            | Error::InfiniteOperand { .. } => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Outcome<u8> {
    match command {
        Command::Snf {
            source,
            witnesses,
            output,
        } => {
            let m = source.load()?;
            let form = smith::smith_form(&m, witnesses);
            let csv = || {
                let mut s = String::from("i,d\n");
                for (i, d) in form.diag().iter().enumerate() {
                    let _ = writeln!(s, "{},{d}", i + 1);
                }
                s
            };
            emit(&output, &form, csv)?;
        }
        Command::Trace {
            source,
            window,
            primes,
            output,
        } => {
            let a = source.load()?;
            check_window(&window)?;
            let explicit = primes.explicit()?;
            let report =
                powertrace::trace_report(&a, window.horizon, explicit.as_deref(), window.confirm)?;
            if a.is_nilpotent()? {
                eprintln!("notice: matrix is nilpotent; per-prime valuation sections omitted");
            } else if report.per_prime.is_empty() {
                eprintln!("notice: no prime divides an invariant factor; per-prime sections empty");
            }
            if !report.period.is_found() {
                eprintln!(
                    "notice: no period confirmed within horizon {}",
                    window.horizon
                );
            }
            emit(&output, &report, || trace_csv(&report))?;
        }
        Command::GcdSeq {
            source,
            window,
            output,
        } => {
            let a = source.load()?;
            check_window(&window)?;
            let g = powertrace::gcd_ratio_seq(&a, window.horizon)?;
            let period = seqlab::detect_period(&g, window.confirm)?;
            let body = json!({ "g": g.samples(), "period": period });
            let csv = || {
                let mut s = String::from("n,g\n");
                for (n, v) in g.samples().iter().enumerate() {
                    let _ = writeln!(s, "{n},{v}");
                }
                s
            };
            emit(&output, &body, csv)?;
        }
        Command::Valuation {
            source,
            window,
            primes,
            output,
        } => {
            let a = source.load()?;
            check_window(&window)?;
            if a.is_nilpotent()? {
                return Err(Error::Nilpotent.into());
            }
            let primes = resolve_primes(&primes, &a)?;
            let sections = primes
                .iter()
                .map(|&p| powertrace::decompose_valuation(&a, p, window.horizon, window.confirm))
                .collect::<smithpow::Result<Vec<_>>>()?;
            let body: Vec<Value> = sections
                .iter()
                .map(|d| {
                    json!({
                        "p": d.p,
                        "a": fraction(&d.a),
                        "nu": d.valuations.samples(),
                        "h": d.h_samples.samples(),
                        "h_period": d.h_report,
                        "diff_period": d.diff_report,
                    })
                })
                .collect();
            let csv = || {
                let mut s = String::from("n");
                for d in &sections {
                    let _ = write!(s, ",nu_{0},h_{0}", d.p);
                }
                s.push('\n');
                for n in 0..=window.horizon {
                    s.push_str(&n.to_string());
                    for d in &sections {
                        let nu = d.valuations.get(n).expect("sampled");
                        let h = d.h_samples.get(n).expect("sampled");
                        let _ = write!(s, ",{nu},{h}");
                    }
                    s.push('\n');
                }
                s
            };
            emit(&output, &body, csv)?;
        }
        Command::Newton {
            poly,
            source,
            primes,
            output,
        } => {
            let (coeffs, matrix) = match poly {
                Some(text) => (parse_list(&text, parse_int)?, None),
                None => {
                    let a = source.load()?;
                    (a.charpoly()?, Some(a))
                }
            };
            let primes = match primes.explicit()? {
                Some(list) => list,
                None => match &matrix {
                    Some(a) => powertrace::relevant_primes(a)?,
                    None => auto_poly_primes(&coeffs)?,
                },
            };
            if primes.is_empty() {
                return Err(usage("no relevant primes; pass --primes"));
            }
            let polygons = primes
                .iter()
                .map(|&p| ntkit::newton_polygon(&coeffs, p))
                .collect::<smithpow::Result<Vec<_>>>()?;
            let body = json!({
                "coeffs": coeffs.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "polygons": polygons,
            });
            let csv = || {
                let mut s = String::from("p,valuation,multiplicity\n");
                for poly in &polygons {
                    for slope in &poly.slopes {
                        let _ = writeln!(
                            s,
                            "{},{},{}",
                            poly.p,
                            fraction(&slope.valuation),
                            slope.multiplicity
                        );
                    }
                    if poly.zero_roots > 0 {
                        let _ = writeln!(s, "{},inf,{}", poly.p, poly.zero_roots);
                    }
                }
                s
            };
            emit(&output, &body, csv)?;
        }
        Command::Probe {
            coeffs,
            c,
            prime,
            horizon,
            confirm,
            output,
        } => {
            let coeffs = parse_list(&coeffs, parse_rational)?;
            let probe = PolyProbe::new(coeffs, parse_rational(&c)?, Prime::new(prime)?)?;
            let d = probe.exponent_bound();
            let bound = prime
                .checked_pow(d as u32)
                .ok_or_else(|| usage("p^D overflows 64 bits"))?;
            let horizon = horizon.unwrap_or(4 * bound);
            let (seq, report) = ntkit::poly_probe_seq(&probe, horizon, confirm)?;
            let body = json!({
                "theta": probe.clearing_scalar().to_string(),
                "D": d,
                "bound": bound,
                "samples": seq.samples(),
                "period": report,
            });
            let csv = || {
                let mut s = String::from("n,f\n");
                for (n, v) in seq.samples().iter().enumerate() {
                    let _ = writeln!(s, "{n},{v}");
                }
                s
            };
            emit(&output, &body, csv)?;
        }
        Command::Candidates {
            prime,
            max_f,
            max_l,
            output,
        } => {
            let list = ntkit::period_candidates(Prime::new(prime)?, max_f, max_l)?;
            let csv = || {
                let mut s = String::from("T\n");
                for t in &list {
                    let _ = writeln!(s, "{t}");
                }
                s
            };
            emit(&output, &list, csv)?;
        }
        Command::Generate { source, output } => {
            if output.format == Format::Csv {
                return Err(usage("generate supports --format json only"));
            }
            let family = source.family.as_deref().expect("required by clap");
            let instance = build_family(family, &source.params, source.seed)?;
            emit(&output, &instance, String::new)?;
        }
        Command::Selftest { suite } => {
            let names: Vec<String> = if suite.is_empty() {
                selftest::suite_names().map(String::from).collect()
            } else {
                suite
            };
            for name in &names {
                if !selftest::suite_names().any(|n| n == name) {
                    let known: Vec<_> = selftest::suite_names().collect();
                    return Err(usage(format!(
                        "unknown suite {name:?}; known suites: {}",
                        known.join(", ")
                    )));
                }
            }
            let mut failed = 0;
            for name in &names {
                let outcome = selftest::run_suite(name)?;
                println!("{}", outcome.line());
                failed += (!outcome.passed) as usize;
            }
            println!("{} of {} suites passed", names.len() - failed, names.len());
            return Ok(if failed == 0 { 0 } else { 1 });
        }
    }
    Ok(0)
}

fn check_window(w: &Window) -> Outcome {
    if w.horizon < 2 {
        return Err(usage(format!(
            "horizon too small: {} (need ≥ 2)",
            w.horizon
        )));
    }
    if w.confirm < 2 {
        return Err(usage(format!(
            "confirm factor must be ≥ 2, got {}",
            w.confirm
        )));
    }
    Ok(())
}

impl PrimeArg {
    /// `None` for "auto".
    fn explicit(&self) -> Outcome<Option<Vec<Prime>>> {
        if self.primes.trim() == "auto" {
            return Ok(None);
        }
        let list = parse_list(&self.primes, |s| {
            let v: u64 = s
                .parse()
                .map_err(|_| usage(format!("not a prime: {s:?}")))?;
            Ok(Prime::new(v)?)
        })?;
        Ok(Some(list))
    }
}

fn resolve_primes(arg: &PrimeArg, a: &IntMatrix) -> Outcome<Vec<Prime>> {
    let primes = match arg.explicit()? {
        Some(list) => list,
        None => powertrace::relevant_primes(a)?,
    };
    if primes.is_empty() {
        return Err(usage("no relevant primes for this matrix; pass --primes"));
    }
    Ok(primes)
}

/// Primes of the lowest and highest nonzero coefficients.
fn auto_poly_primes(coeffs: &[BigInt]) -> Outcome<Vec<Prime>> {
    let nonzero: Vec<&BigInt> = coeffs
        .iter()
        .filter(|c| c.sign() != num_bigint::Sign::NoSign)
        .collect();
    let mut primes = Vec::new();
    for c in [nonzero.first(), nonzero.last()].into_iter().flatten() {
        primes.extend(ntkit::prime_divisors(c)?);
    }
    primes.sort();
    primes.dedup();
    Ok(primes)
}

fn parse_list<T>(text: &str, item: impl Fn(&str) -> Outcome<T>) -> Outcome<Vec<T>> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(usage(format!("malformed list {text:?}")));
    }
    items.into_iter().map(item).collect()
}

fn parse_int(s: &str) -> Outcome<BigInt> {
    s.parse()
        .map_err(|_| usage(format!("not an integer: {s:?}")))
}

fn parse_rational(s: &str) -> Outcome<Rational> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (parse_int(n.trim())?, parse_int(d.trim())?),
        None => (parse_int(s.trim())?, BigInt::from(1)),
    };
    if den == BigInt::from(0) {
        return Err(usage(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

fn fraction(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn param<'a>(params: &'a [(String, String)], key: &str) -> Option<&'a str> {
    params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

fn numeric<T: std::str::FromStr>(
    params: &[(String, String)],
    key: &str,
    default: Option<T>,
) -> Outcome<T> {
    match param(params, key) {
        Some(v) => v
            .parse()
            .map_err(|_| usage(format!("parameter {key}: cannot parse {v:?}"))),
        None => default.ok_or_else(|| usage(format!("missing parameter {key}"))),
    }
}

fn build_family(name: &str, raw: &[String], seed: u64) -> Outcome<Instance> {
    let mut params = Vec::new();
    for kv in raw {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("parameter {kv:?} is not KEY=VALUE")))?;
        params.push((k.trim().to_string(), v.trim().to_string()));
    }
    let allowed: &[&str] = match name {
        "jordan" => &["p", "pad"],
        "bruner" => &["m"],
        "random" => &["size", "bound"],
        "companion" => &["coeffs"],
        other => {
            return Err(usage(format!(
                "unknown family {other:?}; known families: jordan, bruner, random, companion"
            )))
        }
    };
    if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(usage(format!("family {name} has no parameter {k:?}")));
    }
    Ok(match name {
        "jordan" => {
            let p = Prime::new(numeric(&params, "p", None)?)?;
            gen::jordan_example(p, numeric(&params, "pad", Some(0))?).to_instance()
        }
        "bruner" => gen::bruner_counterexample(numeric(&params, "m", None)?)?.to_instance(),
        "random" => gen::random_as_instance(
            numeric(&params, "size", Some(3))?,
            numeric(&params, "bound", Some(9))?,
            seed,
        )?,
        _ => {
            let text = param(&params, "coeffs").ok_or_else(|| usage("missing parameter coeffs"))?;
            let coeffs = parse_list(text, parse_int)?;
            Instance {
                family: "companion".into(),
                params: [("coeffs".to_string(), Value::from(text))]
                    .into_iter()
                    .collect(),
                matrix: gen::companion(&coeffs)?,
            }
        }
    })
}

fn read_matrix_file(path: &PathBuf) -> Outcome<IntMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let located = |e: Error| usage(format!("{}: {e}", path.display()));
    if text.trim_start().starts_with('{') {
        // a generated instance carries the matrix under "matrix"
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| usage(format!("{}: line {}: {e}", path.display(), e.line())))?;
        let inner = match value.get("matrix") {
            Some(m) => m.clone(),
            None => value,
        };
        return serde_json::from_value(inner)
            .map_err(|e| usage(format!("{}: {e}", path.display())));
    }
    IntMatrix::parse_text(&text).map_err(located)
}

impl Source {
    fn load(&self) -> Outcome<IntMatrix> {
        match (&self.matrix, &self.family) {
            (Some(path), _) => read_matrix_file(path),
            (None, Some(name)) => Ok(build_family(name, &self.params, self.seed)?.matrix),
            (None, None) => Err(usage(
                "a matrix source is required: --matrix FILE or --family NAME",
            )),
        }
    }
}

fn trace_csv(report: &TraceReport) -> String {
    let size = report.matrix.rows();
    let mut s = String::from("n");
    for i in 1..=size {
        let _ = write!(s, ",s{i}");
    }
    for i in 1..=size {
        let _ = write!(s, ",d{i}");
    }
    for sec in &report.per_prime {
        let _ = write!(s, ",nu_{}", sec.p);
    }
    s.push('\n');
    for (n, diag) in report.smith.iter().enumerate() {
        s.push_str(&n.to_string());
        for v in diag {
            let _ = write!(s, ",{v}");
        }
        match report.d.get(n) {
            Some(d) => d.iter().for_each(|v| {
                let _ = write!(s, ",{v}");
            }),
            None => s.push_str(&",".repeat(size)),
        }
        for sec in &report.per_prime {
            let _ = write!(s, ",{}", sec.valuations[n]);
        }
        s.push('\n');
    }
    s
}

fn emit<T: Serialize>(output: &Output, body: &T, csv: impl FnOnce() -> String) -> Outcome {
    let text = match output.format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(body).expect("serializable");
            t.push('\n');
            t
        }
        Format::Csv => csv(),
    };
    match &output.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
