//! Batch front end for `cosrigid`.
//!
//! [`run`] parses an argument list, executes one subcommand and returns the
//! exit code together with everything that would be written to stdout and
//! stderr, so tests can drive the CLI without spawning processes.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use cosrigid::algebra::{prop25_truncation, simulate, zero_law_harness};
use cosrigid::cyclic::{gamma_symbolic, sup_distance, Threshold};
use cosrigid::k_constant::{k_of_angle, omega, triple_angle_report};
use cosrigid::real_sup::{taylor_tables, trig_diff_sup, TaylorRow, DEFAULT_TARGET_WIDTH};
use cosrigid::{Config, Error, RationalAngle, SymbolicAngle};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;
pub const SCHEMA_NAME: &str = "cosrigid-report";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFICATION_FAILED: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

pub const SUBCOMMANDS: [&str; 11] = [
    "k", "sup", "gamma", "omega", "tables", "realsup", "lemma38", "simulate", "prop25", "harness",
    "verify",
];

const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "cosrigid",
    version,
    about = "Certified extremal constants for cosine sequences"
)]
struct Cli {
    /// Starting working precision in bits.
    #[arg(
        long,
        global = true,
        env = "COSRIGID_PRECISION_BITS",
        default_value_t = 128
    )]
    precision_bits: u32,
    /// Precision at which escalation gives up.
    #[arg(
        long,
        global = true,
        env = "COSRIGID_PRECISION_CAP",
        default_value_t = 4096
    )]
    precision_cap: u32,
    #[arg(long, global = true, env = "COSRIGID_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for every randomized command.
    #[arg(long, global = true, env = "COSRIGID_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The constant k(a) for a = pi p/q, or for an irrational multiple of pi.
    K(KArgs),
    /// sup_n |cos(na) - cos(nb)|.
    Sup {
        #[arg(long)]
        a: RationalAngle,
        #[arg(long)]
        b: RationalAngle,
    },
    /// Gamma(a, m): angles within m of a in sup distance.
    Gamma {
        #[arg(long, value_parser = parse_symbolic)]
        a: SymbolicAngle,
        /// Decimal, or one of three-halves, sqrt2, sqrt5-over-2.
        #[arg(long)]
        m: Threshold,
    },
    /// Omega(m): angles with k(a) <= m.
    Omega {
        #[arg(long)]
        m: Threshold,
    },
    /// Both threshold tables at m = 1.5.
    Tables,
    /// sup_x |cos(px) - cos(qx)|.
    Realsup {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = DEFAULT_TARGET_WIDTH)]
        width: f64,
    },
    /// Classification of sup_n |cos(na) - cos(3na)| by order.
    Lemma38 {
        #[arg(long, default_value_t = 34)]
        full_to: u64,
        #[arg(long, default_value_t = 60)]
        sample_to: u64,
    },
    /// Build a conjugated matrix cosine sequence and compare it with cos(n target).
    Simulate {
        #[arg(long, value_delimiter = ',', required = true)]
        angles: Vec<RationalAngle>,
        #[arg(long)]
        target: RationalAngle,
        /// Matrix dimension; defaults to the number of distinct angles.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Truncated idempotent family on (Z/3Z)^N.
    Prop25 {
        #[arg(long)]
        n: usize,
    },
    /// Randomized zero-sqrt5/2 law trials.
    Harness {
        #[arg(long, default_value_t = 200)]
        trials: u64,
    },
    /// Run the full self-check ledger.
    Verify,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct KArgs {
    #[arg(long)]
    angle: Option<RationalAngle>,
    #[arg(long)]
    irrational: bool,
}

fn parse_symbolic(s: &str) -> Result<SymbolicAngle, String> {
    match s {
        "irrational" => Ok(SymbolicAngle::IrrationalMultipleOfPi),
        _ => s
            .parse()
            .map(SymbolicAngle::Rational)
            .map_err(|e: Error| e.to_string()),
    }
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Header shared by every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub schema: String,
    pub schema_version: u32,
    pub command: String,
    pub config: ConfigEcho,
    pub report: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub precision_bits: u32,
    pub precision_cap: u32,
    pub seed: u64,
}

struct Report {
    command: &'static str,
    body: Value,
    text: String,
    csv: Option<String>,
    /// A verification inside the report failed.
    failed: bool,
}

impl Report {
    fn new(command: &'static str, body: Value, text: String) -> Self {
        Report {
            command,
            body,
            text,
            csv: None,
            failed: false,
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn table_csv(rows: &[&TaylorRow]) -> String {
    let mut out = String::from("family,s,theta_s,delta_s,l_s,u_s,reference_u_s\n");
    for r in rows {
        out.push_str(&format!(
            "{:?},{},{:.12},{},{:.12},{},{}\n",
            r.family,
            r.s,
            r.theta_s.mid_f64(),
            r.delta_s.mid_f64(),
            r.l_s.lo_f64(),
            r.u_s,
            r.reference_u_s
        ));
    }
    out
}

/// Flattens a JSON value into `path,value` rows.
fn flatten_csv(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    walk(
                        &if prefix.is_empty() {
                            k.clone()
                        } else {
                            format!("{prefix}.{k}")
                        },
                        x,
                        out,
                    );
                }
            }
            Value::Array(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            Value::String(s) => out.push_str(&format!("{prefix},\"{}\"\n", s.replace('"', "\"\""))),
            other => out.push_str(&format!("{prefix},{other}\n")),
        }
    }
    let mut out = String::from("path,value\n");
    walk("", v, &mut out);
    out
}

fn execute(cli: &Cli, cfg: &Config) -> cosrigid::Result<Report> {
    let prec = cfg.precision_bits;
    Ok(match &cli.command {
        Command::K(args) => {
            let a = match args.angle {
                Some(a) => SymbolicAngle::Rational(a),
                None => SymbolicAngle::IrrationalMultipleOfPi,
            };
            let k = k_of_angle(&a, cfg)?;
            let v = k.value(prec);
            let label = args
                .angle
                .map_or("irrational".to_string(), |a| a.to_string());
            Report::new(
                "k",
                json!({ "angle": label, "k": to_value(&k) }),
                format!("k({label} pi) in {v}"),
            )
        }
        Command::Sup { a, b } => {
            let s = sup_distance(a, b, cfg)?;
            let text = format!(
                "sup = {} at n = {} (period {})",
                s.value, s.witness_n, s.period
            );
            Report::new("sup", to_value(&s), text)
        }
        Command::Gamma { a, m } => {
            let g = gamma_symbolic(a, m, cfg)?;
            let list: Vec<String> = g.members.iter().map(|x| x.to_string()).collect();
            Report::new(
                "gamma",
                to_value(&g),
                format!("Gamma({}, {m}) = {{{}}}", g.base, list.join(", ")),
            )
        }
        Command::Omega { m } => {
            let o = omega(m, cfg)?;
            let list: Vec<String> = o.members.iter().map(|x| x.angle.to_string()).collect();
            let mut text = format!(
                "Omega({m}): {} angles, orders {:?}\n{}",
                list.len(),
                o.orders,
                list.join(", ")
            );
            for d in &o.discrepancies {
                text.push_str(&format!(
                    "\ndiscrepancy {} ({:?}): oracle k = {:.6}",
                    d.angle, d.kind, d.oracle_k
                ));
            }
            let mut r = Report::new("omega", to_value(&o), text);
            r.failed = !o.certified;
            r
        }
        Command::Tables => {
            let t = taylor_tables(cfg)?;
            let rows: Vec<&TaylorRow> = t.f_rows.iter().chain(&t.g_rows).collect();
            let csv = table_csv(&rows);
            let mut r = Report::new("tables", to_value(&t), csv.clone());
            r.csv = Some(csv);
            r.failed = !rows.iter().all(|x| x.within_reference());
            r
        }
        Command::Realsup { p, q, width } => {
            if width.is_nan() || *width <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "width must be positive, got {width}"
                )));
            }
            let r = trig_diff_sup(*p, *q, *width, cfg)?;
            let text = format!("sup |cos({p}x) - cos({q}x)| in {}", r.value);
            Report::new("realsup", to_value(&r), text)
        }
        Command::Lemma38 { full_to, sample_to } => {
            if full_to > sample_to {
                return Err(Error::InvalidInput(
                    "full-to must not exceed sample-to".into(),
                ));
            }
            let t = triple_angle_report(*full_to, *sample_to, cfg)?;
            let text = t
                .rows
                .iter()
                .map(|r| {
                    format!(
                        "{:>3} {:<6} {:.12} {}",
                        r.order,
                        r.sup
                            .value
                            .closed_form()
                            .map_or("-".into(), |c| c.to_string()),
                        r.sup.value.mid_f64(),
                        if r.pass { "ok" } else { "FAIL" }
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            let mut r = Report::new("lemma38", to_value(&t), text);
            r.failed = !t.all_pass();
            r
        }
        Command::Simulate {
            angles,
            target,
            dim,
        } => {
            let distinct = angles
                .iter()
                .collect::<std::collections::BTreeSet<_>>()
                .len();
            let s = simulate(angles, target, dim.unwrap_or(distinct), cli.seed, cfg)?;
            let text = format!(
                "dim {}: sup = {} (k = {}), d'Alembert residual {:.2e}, recovered {:?}",
                s.dim,
                s.distance.sup.value,
                s.k.value(prec),
                s.dalembert_residual,
                s.recovered_angles
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
            );
            let mut r = Report::new("simulate", to_value(&s), text);
            r.failed = !s.law_holds;
            r
        }
        Command::Prop25 { n } => {
            let rep = prop25_truncation(*n)?.report(prec);
            let text = format!(
                "N = {}: sup = {} over {} elements, {} idempotents recovered",
                rep.n, rep.sup, rep.elements_checked, rep.idempotents_recovered
            );
            let mut r = Report::new("prop25", to_value(&rep), text);
            r.failed = !(rep.sup_is_three_halves
                && rep.separates_coordinates
                && rep.subset_identities_hold);
            r
        }
        Command::Harness { trials } => {
            let h = zero_law_harness(*trials, cli.seed, cfg)?;
            let text = format!(
                "{} trials, min gap {:.3e}, {} violations, witnesses {}",
                h.trials,
                h.min_gap,
                h.violations.len(),
                if h.witnesses.iter().all(|w| w.equal) {
                    "equal to k"
                } else {
                    "FAIL"
                }
            );
            let mut r = Report::new("harness", to_value(&h), text);
            r.failed = !h.pass;
            r
        }
        Command::Verify => {
            let ledger = cosrigid::verify::run(cfg, cli.seed);
            if let Some(e) = ledger.precision_failure() {
                return Err(Error::PrecisionExhausted {
                    cap: cfg.precision_cap,
                    context: format!("{}: {}", e.key, e.detail),
                });
            }
            let text = ledger
                .entries
                .iter()
                .map(|e| {
                    format!(
                        "{} {}{}",
                        if e.pass { "PASS" } else { "FAIL" },
                        e.key,
                        if e.detail.is_empty() {
                            String::new()
                        } else {
                            format!(" ({})", e.detail)
                        }
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            let mut csv = String::from("key,pass,detail\n");
            for e in &ledger.entries {
                csv.push_str(&format!(
                    "\"{}\",{},\"{}\"\n",
                    e.key,
                    e.pass,
                    e.detail.replace('"', "\"\"")
                ));
            }
            let mut r = Report::new("verify", to_value(&ledger), text);
            r.csv = Some(csv);
            r.failed = !ledger.all_pass();
            r
        }
    })
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let mut text = e.render().to_string();
            if code == EXIT_USAGE {
                text.push_str(&format!("valid subcommands: {}\n", SUBCOMMANDS.join(", ")));
            }
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    if cli.precision_bits < 32 || cli.precision_bits > cli.precision_cap {
        return Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!(
                "error: need 32 <= precision-bits ({}) <= precision-cap ({})\n",
                cli.precision_bits, cli.precision_cap
            ),
        };
    }
    let cfg = Config {
        precision_bits: cli.precision_bits,
        precision_cap: cli.precision_cap,
        ..Config::default()
    };
    let report = match execute(&cli, &cfg) {
        Ok(r) => r,
        Err(e @ Error::PrecisionExhausted { .. }) => {
            return Outcome {
                code: EXIT_PRECISION,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
        Err(e) => {
            return Outcome {
                code: EXIT_USAGE,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    let stdout = match cli.format {
        Format::Json => {
            let env = Envelope {
                schema: SCHEMA_NAME.into(),
                schema_version: SCHEMA_VERSION,
                command: report.command.into(),
                config: ConfigEcho {
                    precision_bits: cfg.precision_bits,
                    precision_cap: cfg.precision_cap,
                    seed: cli.seed,
                },
                report: report.body,
            };
            serde_json::to_string_pretty(&env).expect("envelope serializes") + "\n"
        }
        Format::Csv => report.csv.unwrap_or_else(|| flatten_csv(&report.body)),
        Format::Text => report.text + "\n",
    };
    let code = if report.failed {
        EXIT_VERIFICATION_FAILED
    } else {
        EXIT_OK
    };
    Outcome {
        code,
        stdout,
        stderr: String::new(),
    }
}
