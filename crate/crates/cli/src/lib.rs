//! The `sig` command line.
//!
//! Exit codes: 0 success, 1 a contract failed (a residual was nonzero or two
//! methods disagreed), 2 usage error, 3 numeric failure (certification or
//! depth).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sigtqft::dedekind::{dedekind_s, dedekind_s_reciprocity, smoothed_s};
use sigtqft::genus2::{sigma2_auto, sigma2_by, sigma2_trig, auto_method, Sigma2Method, TrigEvalConfig};
use sigtqft::harness::{
    asymptotics_csv, asymptotics_run, conjecture_sweep, figure_data, identity_sweeps, method_bench, witten_check,
    AsymptoticsRow, BenchBudget, FigureKind, SweepReport,
};
use sigtqft::modular::{arg_g_track, lambda_eval_bits};
use sigtqft::numtheory::{CfExpansion, Rational, ThetaSpec};
use sigtqft::polytrace::sigma_gn_fast;
use sigtqft::verlinde::FrobeniusAlgebra;
use sigtqft::{Error, ErrorKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRACT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Plain,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "sig", version, about = "Signatures of SU(2) TQFT Hermitian forms and related modular quantities")]
pub struct Cli {
    #[command(flatten)]
    pub config: CliConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CliConfig {
    /// Mantissa width for floating evaluations.
    #[arg(long, global = true, default_value_t = 128, value_parser = clap::value_parser!(u32).range(64..))]
    pub precision_bits: u32,
    /// Worker threads (default: all logical cores).
    #[arg(long, global = true, env = "SIGTQFT_THREADS", value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Plain)]
    pub output: OutputFormat,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Lattice,
    Trig,
    Charpoly,
    Oracle,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Genus-two signature sigma_2(q/p).
    Genus2 {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        q: i64,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Signature for genus g with colored points.
    General {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        q: i64,
        #[arg(long)]
        g: u32,
        /// Comma-separated colors, e.g. `2,2`.
        #[arg(long, value_delimiter = ',')]
        colors: Vec<usize>,
    },
    /// Dedekind sum s(q, p), or S(q/p) with --smoothed.
    Dedekind {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        q: i64,
        #[arg(long)]
        smoothed: bool,
    },
    /// Lambda(theta) with a certified tail bound.
    Lambda {
        /// `a/b` with b even.
        #[arg(long, conflicts_with = "cf", required_unless_present = "cf")]
        rational: Option<String>,
        /// Continued fraction, e.g. `0;(1)`, `1,2,(3)` or `golden`.
        #[arg(long)]
        cf: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
    },
    /// Boundary value -(2/pi) arg g(q/2p + i t_min).
    Argg {
        #[arg(long)]
        p: i64,
        #[arg(long)]
        q: i64,
        #[arg(long, default_value_t = 1e-4)]
        tmin: f64,
    },
    /// Batch verification sweeps.
    Sweep {
        #[command(subcommand)]
        which: SweepCommand,
    },
    /// sigma_2 at convergents against Lambda(theta).
    Asymptotics {
        #[arg(long)]
        cf: String,
        #[arg(long)]
        depth: usize,
    },
    /// Data (CSV) and optional SVG for the three figures.
    Figure {
        #[arg(long)]
        which: FigureArg,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        pmax: i64,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Times sigma_2 methods and checks that they agree.
    Bench {
        /// Comma-separated `p` or `q/p` entries (bare `p` means q = 1).
        #[arg(long)]
        plist: String,
        #[arg(long, default_value = "lattice,trig,charpoly")]
        methods: String,
        #[arg(long)]
        lattice_max_p: Option<i64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureArg {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Debug, Subcommand)]
pub enum SweepCommand {
    /// sigma_2(q/(2q+p)) - sigma_2(q/p) = 2q^2 + 2pq + p^2 - 1.
    Conjecture {
        #[arg(long)]
        pmax: i64,
    },
    /// Dedekind-sum identities.
    Identities {
        #[arg(long)]
        pmax: i64,
    },
    /// sigma_2(1/p)/p^3 against 1/6.
    Witten {
        #[arg(long)]
        pmax: i64,
    },
}

/// Parses `argv` (including the program name) and runs it against the
/// process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Usage => EXIT_USAGE,
        ErrorKind::Numeric => EXIT_NUMERIC,
        ErrorKind::Contract => EXIT_CONTRACT,
        ErrorKind::Other => EXIT_USAGE,
    }
}

fn sink<'a>(cfg: &CliConfig, out: &'a mut dyn Write) -> sigtqft::Result<Box<dyn Write + 'a>> {
    Ok(match &cfg.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(out),
    })
}

fn json_line(v: serde_json::Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(&v).expect("json value"))
}

/// Writes a single record in the chosen format.
fn emit_record(cfg: &CliConfig, out: &mut dyn Write, fields: &[(&str, String)], plain: String) -> sigtqft::Result<()> {
    let mut w = sink(cfg, out)?;
    match cfg.output {
        OutputFormat::Plain => writeln!(w, "{plain}")?,
        OutputFormat::Csv => {
            let mut wr = csv::Writer::from_writer(&mut w);
            wr.write_record(fields.iter().map(|(k, _)| *k))?;
            wr.write_record(fields.iter().map(|(_, v)| v.as_str()))?;
            wr.flush()?;
        }
        OutputFormat::Json => {
            let m: serde_json::Map<String, serde_json::Value> =
                fields.iter().map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone()))).collect();
            w.write_all(json_line(serde_json::Value::Object(m)).as_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn emit_report(cfg: &CliConfig, out: &mut dyn Write, report: &SweepReport) -> sigtqft::Result<i32> {
    let mut w = sink(cfg, out)?;
    match cfg.output {
        OutputFormat::Plain => {
            writeln!(w, "{}", report.summary_line())?;
            for n in &report.notes {
                writeln!(w, "  {n}")?;
            }
            for it in report.items.iter().filter(|i| i.status == sigtqft::harness::Status::Fail).take(20) {
                let inputs: Vec<String> = it.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(w, "  FAIL {} residual={}", inputs.join(" "), it.residual)?;
            }
        }
        OutputFormat::Csv => report.write_csv(&mut w)?,
        OutputFormat::Json => {
            w.write_all(report.to_json()?.as_bytes())?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(if report.contract_ok() { EXIT_OK } else { EXIT_CONTRACT })
}

fn parse_rational(s: &str) -> sigtqft::Result<Rational> {
    s.trim()
        .parse::<Rational>()
        .map_err(|_| Error::InvalidInput(format!("expected a rational `a/b`, got `{s}`")))
}

fn parse_pairs(s: &str) -> sigtqft::Result<Vec<(i64, i64)>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let t = t.trim();
            let bad = || Error::InvalidInput(format!("bad entry `{t}` (expected `p` or `q/p`)"));
            match t.split_once('/') {
                Some((q, p)) => Ok((q.trim().parse().map_err(|_| bad())?, p.trim().parse().map_err(|_| bad())?)),
                None => Ok((1, t.parse().map_err(|_| bad())?)),
            }
        })
        .collect()
}

fn execute(cli: &Cli, out: &mut dyn Write) -> sigtqft::Result<i32> {
    let cfg = &cli.config;
    let bits = cfg.precision_bits as usize;
    let threads = cfg.threads.map(|t| t as usize);
    match &cli.command {
        Command::Genus2 { p, q, method } => {
            let (p, q) = (*p, *q);
            sigtqft::numtheory::check_coprime(q, p)?;
            let trig_cfg = TrigEvalConfig { mantissa_bits: bits, ..Default::default() };
            let (used, value, extra) = match method {
                MethodArg::Auto => {
                    let m = auto_method(p, q);
                    let v = if m == Sigma2Method::Trig {
                        sigma2_trig(p, q, &trig_cfg)?.value
                    } else {
                        sigma2_auto(p, q)?
                    };
                    (m, v, String::new())
                }
                MethodArg::Trig => {
                    let c = sigma2_trig(p, q, &trig_cfg)?;
                    (Sigma2Method::Trig, c.value, format!("{:e}", c.residual))
                }
                MethodArg::Lattice => (Sigma2Method::Lattice, sigma2_by(Sigma2Method::Lattice, p, q, &trig_cfg)?, String::new()),
                MethodArg::Charpoly => {
                    (Sigma2Method::Charpoly, sigma2_by(Sigma2Method::Charpoly, p, q, &trig_cfg)?, String::new())
                }
                MethodArg::Oracle => (Sigma2Method::Oracle, sigma2_by(Sigma2Method::Oracle, p, q, &trig_cfg)?, String::new()),
            };
            emit_record(
                cfg,
                out,
                &[
                    ("q", q.to_string()),
                    ("p", p.to_string()),
                    ("method", used.to_string()),
                    ("sigma2", value.to_string()),
                    ("trig_residual", extra),
                ],
                value.to_string(),
            )?;
            Ok(EXIT_OK)
        }
        Command::General { p, q, g, colors } => {
            let v = if *g == 0 {
                FrobeniusAlgebra::new(*q, *p)?.signature_oracle(0, colors)?
            } else {
                sigma_gn_fast(*p, *q, *g, colors)?
            };
            let cs: Vec<String> = colors.iter().map(|c| c.to_string()).collect();
            emit_record(
                cfg,
                out,
                &[
                    ("q", q.to_string()),
                    ("p", p.to_string()),
                    ("g", g.to_string()),
                    ("colors", cs.join(" ")),
                    ("signature", v.to_string()),
                ],
                v.to_string(),
            )?;
            Ok(EXIT_OK)
        }
        Command::Dedekind { p, q, smoothed } => {
            if *smoothed {
                let s = smoothed_s(*q, *p)?;
                let fields = [
                    ("q", q.to_string()),
                    ("p", p.to_string()),
                    ("S", s.to_string()),
                    ("formal", (*q < 0).to_string()),
                ];
                emit_record(cfg, out, &fields, s.to_string())?;
            } else {
                let s = dedekind_s(*q, *p)?;
                if s != dedekind_s_reciprocity(*q, *p)? {
                    return Err(Error::MethodDisagreement { q: *q, p: *p, detail: "sawtooth vs reciprocity".into() });
                }
                emit_record(cfg, out, &[("q", q.to_string()), ("p", p.to_string()), ("s", s.to_string())], s.to_string())?;
            }
            Ok(EXIT_OK)
        }
        Command::Lambda { rational, cf, eps } => {
            let theta = match (rational, cf) {
                (Some(r), _) => ThetaSpec::Rational(parse_rational(r)?),
                (None, Some(c)) => ThetaSpec::from_cf(CfExpansion::parse(c)?),
                (None, None) => unreachable!("clap enforces one of --rational/--cf"),
            };
            let (v, tail) = lambda_eval_bits(&theta, *eps, bits)?;
            let digits = (-(eps.log10()).floor() as i64 + 2).clamp(4, v.natural_digits() as i64) as usize;
            let fields = [
                ("theta", theta.label()),
                ("lambda", v.to_decimal(digits)),
                ("tail_bound", format!("{:e}", tail.value.to_f64())),
                ("n_truncated", tail.n_truncated.to_string()),
                ("bits", bits.to_string()),
            ];
            let plain = format!(
                "{} (tail <= {:e}, {} terms, {} bits)",
                v.to_decimal(digits),
                tail.value.to_f64(),
                tail.n_truncated,
                bits
            );
            emit_record(cfg, out, &fields, plain)?;
            Ok(EXIT_OK)
        }
        Command::Argg { p, q, tmin } => {
            let mut cps: Vec<f64> = [1e-2, 1e-3].into_iter().filter(|t| t > tmin).collect();
            cps.push(*tmin);
            let track = arg_g_track(*q, *p, &cps, bits)?;
            let last = track.last().expect("at least one checkpoint");
            let seq: Vec<String> = track.iter().map(|s| format!("{:e}:{}", s.t, s.boundary_value)).collect();
            let fields = [
                ("q", q.to_string()),
                ("p", p.to_string()),
                ("t_min", format!("{:e}", last.t)),
                ("boundary_value", format!("{}", last.boundary_value)),
                ("sequence", seq.join(" ")),
                ("bits", bits.to_string()),
            ];
            let plain = format!("{:.12} (t = {:e}, {} bits)", last.boundary_value, last.t, bits);
            emit_record(cfg, out, &fields, plain)?;
            Ok(EXIT_OK)
        }
        Command::Sweep { which } => {
            let report = match which {
                SweepCommand::Conjecture { pmax } => conjecture_sweep(*pmax, threads)?,
                SweepCommand::Identities { pmax } => identity_sweeps(*pmax, threads)?,
                SweepCommand::Witten { pmax } => witten_check(*pmax, threads)?,
            };
            emit_report(cfg, out, &report)
        }
        Command::Asymptotics { cf, depth } => {
            let theta = CfExpansion::parse(cf)?;
            let rows = asymptotics_run(&theta, *depth, threads)?;
            let mut w = sink(cfg, out)?;
            match cfg.output {
                OutputFormat::Csv => asymptotics_csv(&rows, &mut w)?,
                OutputFormat::Json => {
                    let v: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|r| {
                            let m = AsymptoticsRow::COLUMNS
                                .iter()
                                .zip(r.record())
                                .map(|(k, v)| (k.to_string(), serde_json::Value::String(v)))
                                .collect();
                            serde_json::Value::Object(m)
                        })
                        .collect();
                    w.write_all(json_line(serde_json::Value::Array(v)).as_bytes())?;
                }
                OutputFormat::Plain => {
                    writeln!(w, "{:>4} {:>12} {:>12} {:>16} {:>20} {:>12}", "k", "q_k", "p_k", "sigma2", "sigma2/p^2", "rel_diff")?;
                    for r in &rows {
                        let rec = r.record();
                        writeln!(w, "{:>4} {:>12} {:>12} {:>16} {:>20} {:>12}", rec[0], rec[2], rec[3], rec[4], rec[5], rec[8])?;
                    }
                    if let Some(r) = rows.first() {
                        writeln!(w, "Lambda(theta) = {}", r.lambda.to_decimal(12))?;
                    }
                }
            }
            w.flush()?;
            Ok(EXIT_OK)
        }
        Command::Figure { which, k, pmax, svg } => {
            let kind = match which {
                FigureArg::Fig1 => FigureKind::Fig1,
                FigureArg::Fig2 => FigureKind::Fig2,
                FigureArg::Fig3 => FigureKind::Fig3,
            };
            let data = figure_data(kind, *pmax, *k, threads)?;
            if let Some(path) = svg {
                std::fs::write(path, data.to_svg())?;
            }
            let mut w = sink(cfg, out)?;
            data.write_csv(&mut w)?;
            w.flush()?;
            Ok(EXIT_OK)
        }
        Command::Bench { plist, methods, lattice_max_p } => {
            let pairs = parse_pairs(plist)?;
            let methods: Vec<Sigma2Method> =
                methods.split(',').filter(|m| !m.trim().is_empty()).map(str::parse).collect::<sigtqft::Result<_>>()?;
            let mut budget = BenchBudget::default();
            if let Some(m) = lattice_max_p {
                budget.lattice_max_p = *m;
            }
            let report = method_bench(&pairs, &methods, &budget)?;
            emit_report(cfg, out, &report)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut o = Vec::new();
        let mut e = Vec::new();
        let argv = std::iter::once("sig").chain(args.iter().copied());
        let code = run_with(argv, &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn parses_pairs() {
        assert_eq!(parse_pairs("61, 3/101").unwrap(), vec![(1, 61), (3, 101)]);
        assert!(parse_pairs("x").is_err());
    }

    #[test]
    fn genus2_plain_and_errors() {
        assert_eq!(call(&["genus2", "--p", "5", "--q", "3"]), (0, "12\n".into(), String::new()));
        let (code, _, err) = call(&["genus2", "--p", "4", "--q", "4"]);
        assert_eq!(code, 2);
        assert!(err.contains("gcd"));
        let (code, _, err) = call(&["genus2", "--p", "5", "--bogus"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"));
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(exit_code(&Error::NotCoprime { q: 2, p: 4 }), 2);
        assert_eq!(exit_code(&Error::CertificationFailed { attempts: 1, best_residual: 0.4, bits: 128 }), 3);
        assert_eq!(exit_code(&Error::MethodDisagreement { q: 1, p: 3, detail: String::new() }), 1);
    }
}
