//! Command-line frontend: p-adic expansions, Haar integrals, the Vladimirov
//! derivative, and the Schrodinger eigenvalue solver, with JSON/CSV output.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 domain or resonance
//! error, 3 divergence, 4 bracket failure.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use padic::haar::{self, RadialFunction, ShellRegion};
use padic::padic::PAdicApprox;
use padic::rational::{decimal_string, parse_rational, BigRational};
use padic::schrodinger::{self, EigenResult};
use padic::vladimirov::{self, BasisTerm, PiecewiseRadial};

#[derive(Parser)]
#[command(name = "padic", version, about = "Exact p-adic calculus toolkit")]
struct Cli {
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the p-adic digit expansion of a rational.
    Expand {
        /// The rational to expand, e.g. `4/3` or `-0.25`.
        #[arg(allow_hyphen_values = true)]
        value: String,
        #[arg(long)]
        p: u64,
        /// Number of digits to compute.
        #[arg(long, default_value_t = 12)]
        digits: usize,
    },
    /// Exact Haar-measure integrals of radial functions.
    Integrate {
        #[arg(long)]
        p: u64,
        /// Measure of the single shell |x| = p^GAMMA.
        #[arg(long, allow_hyphen_values = true)]
        shell: Option<i64>,
        /// Measure of the ball p^M Z_p.
        #[arg(long, allow_hyphen_values = true)]
        ball: Option<i64>,
        /// Closed form of int_{Z_p} |x|^S dx.
        #[arg(long = "moment-zp", allow_hyphen_values = true)]
        moment_zp: Option<i64>,
        /// Closed form of int_{Q_p \ Z_p} |x|^S dx.
        #[arg(long = "moment-complement", allow_hyphen_values = true)]
        moment_complement: Option<i64>,
        /// Truncated shell sum of |x|^S over --region.
        #[arg(long, allow_hyphen_values = true)]
        power: Option<i64>,
        /// Region for --power: zp, complement, or all.
        #[arg(long, default_value = "zp")]
        region: String,
        #[arg(long = "tail-tol", default_value = "1e-30")]
        tail_tol: String,
    },
    /// Closed forms of the derivative D^alpha on the power bases.
    Dalpha {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        alpha: u32,
        /// D^alpha |x|^N on all of Q_p.
        #[arg(long, allow_hyphen_values = true)]
        monomial: Option<i64>,
        /// D^alpha f_N (|x|^N on Z_p, zero outside).
        #[arg(long, allow_hyphen_values = true)]
        f: Option<i64>,
        /// D^alpha g_N (zero on Z_p, |x|^N outside).
        #[arg(long, allow_hyphen_values = true)]
        g: Option<i64>,
        /// Evaluate the result on the shell |x| = p^T.
        #[arg(long = "at-shell", allow_hyphen_values = true)]
        at_shell: Option<i64>,
        /// Also run the shell-sum oracle and compare.
        #[arg(long)]
        verify: bool,
        #[arg(long = "tail-tol", default_value = "1e-30")]
        tail_tol: String,
    },
    /// Solve the determinant condition for the eigenvalue E.
    Solve {
        #[arg(long)]
        p: u64,
        #[arg(long = "B", allow_hyphen_values = true)]
        coupling: String,
        #[arg(long = "N", default_value_t = 60)]
        truncation: usize,
        /// Bisection stops when the bracket is narrower than this.
        #[arg(long, default_value = "1e-12")]
        tol: String,
        /// Override the root bracket as `lo,hi`.
        #[arg(long, allow_hyphen_values = true)]
        bracket: Option<String>,
    },
    /// Solve across several primes and emit a CSV table.
    Sweep {
        #[arg(long = "B", allow_hyphen_values = true)]
        coupling: String,
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[arg(long = "N", default_value_t = 60)]
        truncation: usize,
        #[arg(long, default_value = "1e-12")]
        tol: String,
    },
}

enum AppError {
    Usage(String),
    Lib(padic::Error),
}

impl From<padic::Error> for AppError {
    fn from(e: padic::Error) -> Self {
        AppError::Lib(e)
    }
}

impl AppError {
    fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Lib(padic::Error::InvalidArgument(_)) => 1,
            AppError::Lib(padic::Error::Divergence) => 3,
            AppError::Lib(padic::Error::BracketFailure { .. }) => 4,
            AppError::Lib(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            AppError::Usage(m) => m.clone(),
            AppError::Lib(e) => e.to_string(),
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // keep clap's rendered message but pin the exit code for usage errors
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            std::process::exit(if is_help { 0 } else { 1 });
        }
    };
    let out = cli.out.clone();
    match run(cli.command) {
        Ok(text) => {
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    std::process::exit(1);
                }
            } else {
                print!("{text}");
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.exit_code());
        }
    }
}

fn parse_arg(name: &str, s: &str) -> Result<BigRational, AppError> {
    parse_rational(s).map_err(|_| AppError::Usage(format!("cannot parse --{name} value `{s}`")))
}

fn rational_str(q: &BigRational) -> String {
    q.to_string()
}

fn json_line(v: Value) -> String {
    let mut s = serde_json::to_string(&v).expect("serializable");
    s.push('\n');
    s
}

fn run(command: Command) -> Result<String, AppError> {
    match command {
        Command::Expand { value, p, digits } => {
            let q = parse_rational(&value)
                .map_err(|_| AppError::Usage(format!("cannot parse value `{value}`")))?;
            let x = PAdicApprox::expand(&q, p, digits)?;
            if x.is_zero() {
                Ok(json_line(json!({"zero": true})))
            } else {
                Ok(json_line(json!({
                    "valuation": x.valuation(),
                    "digits": x.digits(),
                })))
            }
        }
        Command::Integrate {
            p,
            shell,
            ball,
            moment_zp,
            moment_complement,
            power,
            region,
            tail_tol,
        } => {
            let chosen = [
                shell.is_some(),
                ball.is_some(),
                moment_zp.is_some(),
                moment_complement.is_some(),
                power.is_some(),
            ]
            .iter()
            .filter(|b| **b)
            .count();
            if chosen != 1 {
                return Err(AppError::Usage(
                    "choose exactly one of --shell, --ball, --moment-zp, --moment-complement, --power"
                        .into(),
                ));
            }
            if let Some(gamma) = shell {
                return Ok(value_json(&haar::shell_measure(p, gamma)?));
            }
            if let Some(m) = ball {
                return Ok(value_json(&haar::ball_measure(p, m)?));
            }
            if let Some(s) = moment_zp {
                return Ok(value_json(&haar::moment_zp(p, s)?));
            }
            if let Some(s) = moment_complement {
                return Ok(value_json(&haar::moment_complement(p, s)?));
            }
            let s = power.expect("checked above");
            let tol = parse_arg("tail-tol", &tail_tol)?;
            let region = match region.as_str() {
                "zp" => ShellRegion::Ball(0),
                "complement" => ShellRegion::Complement,
                "all" => ShellRegion::All,
                other => {
                    return Err(AppError::Usage(format!(
                        "unknown region `{other}` (expected zp, complement, or all)"
                    )))
                }
            };
            let r = haar::integrate_radial(p, &RadialFunction::norm_power(p, s), region, &tol)?;
            Ok(json_line(json!({
                "value_rational": rational_str(&r.value),
                "value_decimal": decimal_string(&r.value, 15),
                "truncation": r.shells_used,
            })))
        }
        Command::Dalpha {
            p,
            alpha,
            monomial,
            f,
            g,
            at_shell,
            verify,
            tail_tol,
        } => {
            let chosen = [monomial.is_some(), f.is_some(), g.is_some()]
                .iter()
                .filter(|b| **b)
                .count();
            if chosen != 1 {
                return Err(AppError::Usage(
                    "choose exactly one of --monomial, --f, --g".into(),
                ));
            }
            if let Some(n) = monomial {
                let (coeff, exponent) = vladimirov::d_alpha_monomial(p, alpha, n)?;
                return Ok(json_line(json!({
                    "value_rational": rational_str(&coeff),
                    "value_decimal": decimal_string(&coeff, 15),
                    "exponent": exponent,
                })));
            }
            let (form, term) = if let Some(n) = f {
                (vladimirov::d_alpha_f(p, alpha, n)?, BasisTerm::FInside(n))
            } else {
                let n = g.expect("checked above");
                (vladimirov::d_alpha_g(p, alpha, n)?, BasisTerm::GOutside(n))
            };
            match at_shell {
                None => Ok(json_line(piecewise_json(&form))),
                Some(t) => {
                    let closed = form.eval_shell(t)?;
                    if !verify {
                        return Ok(value_json(&closed));
                    }
                    let tol = parse_arg("tail-tol", &tail_tol)?;
                    let oracle = vladimirov::d_alpha_oracle(p, alpha, &term.radial(p), t, &tol)?;
                    let matches = num_abs(&closed - &oracle.value) <= oracle.tail_bound;
                    Ok(json_line(json!({
                        "value_rational": rational_str(&closed),
                        "value_decimal": decimal_string(&closed, 15),
                        "oracle_rational": rational_str(&oracle.value),
                        "oracle_decimal": decimal_string(&oracle.value, 15),
                        "match": matches,
                    })))
                }
            }
        }
        Command::Solve {
            p,
            coupling,
            truncation,
            tol,
            bracket,
        } => {
            let b = parse_arg("B", &coupling)?;
            let tol = parse_arg("tol", &tol)?;
            let bracket = resolve_bracket(p, &b, bracket.as_deref())?;
            let r = schrodinger::solve_e(p, &b, bracket, &tol, truncation)?;
            Ok(json_line(solve_json(p, &b, &r)))
        }
        Command::Sweep {
            coupling,
            primes,
            truncation,
            tol,
        } => {
            let b = parse_arg("B", &coupling)?;
            let tol = parse_arg("tol", &tol)?;
            let mut primes = primes;
            primes.sort_unstable();
            primes.dedup();
            // grid points are independent; solve them in parallel and emit
            // rows in sorted prime order
            let results: Vec<Result<String, padic::Error>> = std::thread::scope(|scope| {
                let handles: Vec<_> = primes
                    .iter()
                    .map(|&p| {
                        let b = b.clone();
                        let tol = tol.clone();
                        scope.spawn(move || -> Result<String, padic::Error> {
                            let bracket = schrodinger::default_bracket(p, &b)?;
                            let r = schrodinger::solve_e(p, &b, bracket, &tol, truncation)?;
                            Ok(csv_row(p, &b, &r))
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("solver thread panicked"))
                    .collect()
            });
            let mut out = String::from(
                "p,B,E_rational,E_decimal,asymptotic_rational,asymptotic_decimal,scaled_error\n",
            );
            for row in results {
                out.push_str(&row?);
            }
            Ok(out)
        }
    }
}

fn num_abs(q: BigRational) -> BigRational {
    if q < BigRational::new(0.into(), 1.into()) {
        -q
    } else {
        q
    }
}

fn value_json(q: &BigRational) -> String {
    json_line(json!({
        "value_rational": rational_str(q),
        "value_decimal": decimal_string(q, 15),
    }))
}

fn piecewise_json(form: &PiecewiseRadial) -> Value {
    let branch = |terms: &[(i64, BigRational)]| -> Value {
        terms
            .iter()
            .map(|(e, c)| {
                json!({
                    "exponent": e,
                    "coefficient_rational": rational_str(c),
                    "coefficient_decimal": decimal_string(c, 15),
                })
            })
            .collect()
    };
    let mut v = json!({
        "inside": branch(&form.inside),
        "outside": branch(&form.outside),
        "analytically_continued": form.analytically_continued,
    });
    if form.degenerate_outside {
        v["degenerate_outside"] = json!(true);
    }
    v
}

fn resolve_bracket(
    p: u64,
    b: &BigRational,
    bracket: Option<&str>,
) -> Result<(BigRational, BigRational), AppError> {
    match bracket {
        Some(s) => {
            let (lo, hi) = s.split_once(',').ok_or_else(|| {
                AppError::Usage("bracket must be given as `lo,hi`".into())
            })?;
            Ok((parse_arg("bracket", lo)?, parse_arg("bracket", hi)?))
        }
        None => schrodinger::default_bracket(p, b).map_err(AppError::from),
    }
}

fn scaled_error(p: u64, b: &BigRational, r: &EigenResult) -> Option<BigRational> {
    let power = if *b == padic::rational::int(1) {
        2
    } else if *b == padic::rational::int(-1) {
        4
    } else {
        return None;
    };
    r.comparison
        .as_ref()
        .map(|c| c * padic::rational::prime_pow(p, power))
}

fn solve_json(p: u64, b: &BigRational, r: &EigenResult) -> Value {
    json!({
        "E_rational": rational_str(&r.energy),
        "E_decimal": decimal_string(&r.energy, 15),
        "residual": decimal_string(&num_abs(r.determinant_residual.clone()), 15),
        "truncation": r.truncation,
        "asymptotic": r.asymptotic.as_ref().map(rational_str),
        "scaled_error": scaled_error(p, b, r).map(|s| decimal_string(&s, 15)),
    })
}

fn csv_row(p: u64, b: &BigRational, r: &EigenResult) -> String {
    let asym = r
        .asymptotic
        .as_ref()
        .map(rational_str)
        .unwrap_or_default();
    let asym_dec = r
        .asymptotic
        .as_ref()
        .map(|a| decimal_string(a, 15))
        .unwrap_or_default();
    let scaled = scaled_error(p, b, r)
        .map(|s| decimal_string(&s, 15))
        .unwrap_or_default();
    let mut row = String::new();
    let _ = writeln!(
        row,
        "{},{},{},{},{},{},{}",
        p,
        rational_str(b),
        rational_str(&r.energy),
        decimal_string(&r.energy, 15),
        asym,
        asym_dec,
        scaled,
    );
    row
}
