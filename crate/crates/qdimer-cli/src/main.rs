//! Command-line driver for the qdimer engine.
//!
//! Exit status: 0 on success, 1 on parse or validation errors, 2 when a
//! computed identity fails.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use qdimer::connection::{build_quantum_identity, DiagonalConnection};
use qdimer::density::{self, GreenTable};
use qdimer::generators::{CiliationMode, Family, FamilySpec};
use qdimer::kasteleyn::{build_signs, kdet, verify_kasteleyn};
use qdimer::multiweb::{count_multiwebs, enumerate_multiwebs, Multiweb};
use qdimer::pgraph::CiliatedPlanarGraph;
use qdimer::{par, qalgebra, qtrace, rteval, stats};

const THREADS_ENV: &str = "QDIMER_THREADS";
const FORMAT_VERSION: &str = "v1";

#[derive(Debug)]
enum CliError {
    Input(String),
    Consistency(String),
}

type CliResult<T> = Result<T, CliError>;

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "qdimer",
    version,
    about = "Exact computations for the quantum n-dimer model"
)]
struct Cli {
    /// Seed for every random choice; recorded in output headers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (overrides QDIMER_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the result to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit a graph as JSON.
    Gen(GraphArgs),
    /// List or count n-multiwebs.
    Webs {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long)]
        count: bool,
    },
    /// Quantum partition function.
    Zq {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[command(flatten)]
        conn: ConnArgs,
    },
    /// q-Kasteleyn determinant.
    Kdet {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[command(flatten)]
        conn: ConnArgs,
    },
    /// Compare Kdet_q with Z_q for I_q and random diagonal connections.
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// Also test random diagonal monomial connections.
        #[arg(long)]
        random_diagonal: bool,
        #[arg(long, default_value_t = 5)]
        trials: usize,
    },
    /// Per-multiweb twist and measures.
    Stats {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 2)]
        n: u32,
    },
    /// Honeycomb loop density.
    Density {
        #[arg(long, default_value_t = 300)]
        cutoff: usize,
        /// Dump the Green coefficient table as CSV.
        #[arg(long)]
        table: bool,
        /// Also run the finite-patch cross-check on an AxB honeycomb patch.
        #[arg(long)]
        patch: Option<String>,
    },
    /// Reshetikhin–Turaev evaluation.
    #[command(subcommand)]
    Rt(RtCommand),
    /// Quantum matrix and Grassmann algebra checks.
    #[command(subcommand)]
    Qalgebra(QalgebraCommand),
    /// Same as `qalgebra selftest`.
    #[command(name = "qalgebra-selftest")]
    QalgebraSelftest,
}

#[derive(Subcommand, Debug)]
enum RtCommand {
    /// Evaluate a diagram file.
    Eval {
        file: PathBuf,
        #[arg(long)]
        n: Option<u32>,
    },
    /// Lay out multiwebs of a graph as diagrams and evaluate them.
    FromGraph {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// Comma-separated edge multiplicities; all multiwebs when omitted.
        #[arg(long)]
        multiweb: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum QalgebraCommand {
    Selftest,
}

#[derive(Args, Debug, Clone)]
struct GraphArgs {
    /// cycle | grid2xm | zigzag | square | honeycomb
    #[arg(long)]
    family: Option<String>,
    /// Graph JSON file, instead of a family.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Cycle size (2N vertices).
    #[arg(long = "N")]
    big_n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    h: Option<usize>,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    /// positive | trivial | comma-separated corner indices.
    #[arg(long)]
    cilia: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct ConnArgs {
    /// Use the quantum identity connection (the default).
    #[arg(long)]
    identity_q: bool,
    /// Diagonal connection JSON file.
    #[arg(long)]
    connection: Option<PathBuf>,
    /// A random diagonal monomial connection from the seed.
    #[arg(long)]
    random_diagonal: bool,
}

struct Ctx {
    seed: u64,
    format: Format,
    rng: ChaCha8Rng,
}

impl Ctx {
    fn header(&self, cmd: &str) -> String {
        format!("# qdimer {cmd} {FORMAT_VERSION} seed={}", self.seed)
    }
}

fn need(v: Option<usize>, name: &str) -> CliResult<usize> {
    v.ok_or_else(|| CliError::Input(format!("--{name} is required for this family")))
}

fn build_graph(a: &GraphArgs, ctx: &mut Ctx) -> CliResult<CiliatedPlanarGraph> {
    let ciliation = match &a.cilia {
        Some(c) => c.parse::<CiliationMode>().map_err(input)?,
        None => CiliationMode::Positive,
    };
    if let Some(path) = &a.graph {
        let text = std::fs::read_to_string(path).map_err(input)?;
        let g = CiliatedPlanarGraph::from_json_str(&text).map_err(input)?;
        return match (&a.cilia, ciliation) {
            (None, _) => Ok(g),
            (_, CiliationMode::Custom(c)) => g.with_cilia(c).map_err(input),
            (_, CiliationMode::Trivial) => g.trivial_ciliation(&mut ctx.rng).map_err(input),
            (_, CiliationMode::Positive) => stats::positive_version(&g).map_err(input),
        };
    }
    let name = a
        .family
        .as_deref()
        .ok_or_else(|| CliError::Input("give --family or --graph".into()))?;
    let family = match name {
        "cycle" => Family::Cycle {
            n: need(a.big_n, "N")?,
        },
        "grid2xm" => Family::Grid2xm { m: need(a.m, "m")? },
        "zigzag" => Family::Zigzag { m: need(a.m, "m")? },
        "square" | "square_grid" => Family::SquareGrid {
            w: need(a.w, "w")?,
            h: need(a.h, "h")?,
        },
        "honeycomb" | "honeycomb_patch" => Family::HoneycombPatch {
            a: need(a.a, "a")?,
            b: need(a.b, "b")?,
        },
        other => other.parse::<Family>().map_err(input)?,
    };
    FamilySpec::new(family, ciliation)
        .build(&mut ctx.rng)
        .map_err(input)
}

fn build_connection(
    c: &ConnArgs,
    g: &CiliatedPlanarGraph,
    n: u32,
    ctx: &mut Ctx,
) -> CliResult<DiagonalConnection> {
    if [c.identity_q, c.connection.is_some(), c.random_diagonal]
        .iter()
        .filter(|&&x| x)
        .count()
        > 1
    {
        return Err(CliError::Input("choose one connection source".into()));
    }
    let phi = if let Some(path) = &c.connection {
        let text = std::fs::read_to_string(path).map_err(input)?;
        DiagonalConnection::from_json_str(&text).map_err(input)?
    } else if c.random_diagonal {
        DiagonalConnection::random_monomial(n, g.num_edges(), 3, &mut ctx.rng)
    } else {
        build_quantum_identity(g, n).map_err(input)?
    };
    phi.validate(g).map_err(input)?;
    if phi.n != n {
        return Err(CliError::Input(format!(
            "connection has rank {}, expected {n}",
            phi.n
        )));
    }
    Ok(phi)
}

fn mult_text(m: &Multiweb) -> String {
    m.mult
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_patch(s: &str) -> CliResult<(usize, usize)> {
    let (a, b) = s
        .split_once('x')
        .ok_or_else(|| CliError::Input(format!("bad patch `{s}`, expected AxB")))?;
    Ok((
        a.trim().parse().map_err(input)?,
        b.trim().parse().map_err(input)?,
    ))
}

fn run(cli: Cli) -> CliResult<String> {
    let mut ctx = Ctx {
        seed: cli.seed,
        format: cli.format,
        rng: ChaCha8Rng::seed_from_u64(cli.seed),
    };
    let mut out = String::new();
    match cli.command {
        Command::Gen(a) => {
            let g = build_graph(&a, &mut ctx)?;
            out = g.to_json_string();
            out.push('\n');
        }
        Command::Webs { graph, n, count } => {
            let g = build_graph(&graph, &mut ctx)?;
            if count {
                let c = count_multiwebs(&g, n);
                out = match ctx.format {
                    Format::Json => format!("{}\n", json!({ "n": n, "count": c })),
                    _ => format!("{c}\n"),
                };
            } else {
                let webs = enumerate_multiwebs(&g, n);
                match ctx.format {
                    Format::Json => {
                        out = format!("{}\n", serde_json::to_string(&webs).map_err(input)?)
                    }
                    Format::Csv => {
                        writeln!(out, "{}", ctx.header("webs")).unwrap();
                        writeln!(out, "id,multiplicities").unwrap();
                        for (i, m) in webs.iter().enumerate() {
                            writeln!(out, "{i},\"{}\"", mult_text(m)).unwrap();
                        }
                    }
                    Format::Text => {
                        for (i, m) in webs.iter().enumerate() {
                            writeln!(out, "{i}: {}", mult_text(m)).unwrap();
                        }
                    }
                }
            }
        }
        Command::Zq { graph, n, conn } => {
            let g = build_graph(&graph, &mut ctx)?;
            let phi = build_connection(&conn, &g, n, &mut ctx)?;
            let z = qtrace::partition_function(&phi, &g, n).map_err(input)?;
            out = match ctx.format {
                Format::Json => format!(
                    "{}\n",
                    json!({ "n": n, "seed": ctx.seed, "z": z.to_text() })
                ),
                _ => format!("{}\n", z.to_pretty()),
            };
        }
        Command::Kdet { graph, n, conn } => {
            let g = build_graph(&graph, &mut ctx)?;
            let phi = build_connection(&conn, &g, n, &mut ctx)?;
            let eps = build_signs(&g, n).map_err(input)?;
            let k = kdet(&phi, &g, n, &eps);
            out = match ctx.format {
                Format::Json => format!(
                    "{}\n",
                    json!({ "n": n, "seed": ctx.seed, "signs": eps.signs, "kdet": k.to_text() })
                ),
                _ => format!("{}\n", k.to_pretty()),
            };
        }
        Command::Verify {
            graph,
            n,
            random_diagonal,
            trials,
        } => {
            let g = build_graph(&graph, &mut ctx)?;
            let mut conns = vec![(
                "I_q".to_string(),
                build_quantum_identity(&g, n).map_err(input)?,
            )];
            if random_diagonal {
                for t in 0..trials {
                    conns.push((
                        format!("random {t}"),
                        DiagonalConnection::random_monomial(n, g.num_edges(), 3, &mut ctx.rng),
                    ));
                }
            }
            let mut rows = Vec::new();
            let mut failed = Vec::new();
            for (name, phi) in &conns {
                let v = verify_kasteleyn(phi, &g, n).map_err(input)?;
                if !v.matches {
                    failed.push(name.clone());
                }
                rows.push((name.clone(), v.matches, v.sign));
            }
            let matches = rows.iter().filter(|r| r.1).count();
            match ctx.format {
                Format::Json => {
                    let list: Vec<_> = rows
                        .iter()
                        .map(|(c, ok, s)| json!({ "connection": c, "matches": ok, "sign": s }))
                        .collect();
                    out = format!(
                        "{}\n",
                        json!({ "seed": ctx.seed, "n": n, "matches": matches, "trials": list })
                    );
                }
                _ => {
                    writeln!(out, "{}", ctx.header("verify")).unwrap();
                    for (c, ok, s) in &rows {
                        let s = s.map(|s| s.to_string()).unwrap_or_else(|| "none".into());
                        writeln!(
                            out,
                            "{c}: {} sign={s}",
                            if *ok { "match" } else { "MISMATCH" }
                        )
                        .unwrap();
                    }
                    writeln!(out, "{matches}/{} match", rows.len()).unwrap();
                }
            }
            if !failed.is_empty() {
                emit(&out, None)?;
                return Err(CliError::Consistency(format!(
                    "Kdet_q differs from Z_q for {}",
                    failed.join(", ")
                )));
            }
        }
        Command::Stats { graph, n } => {
            let g = build_graph(&graph, &mut ctx)?;
            let e = match stats::expected_twist(&g, n) {
                Err(stats::StatsError::Inconsistent(s)) => return Err(CliError::Consistency(s)),
                r => r.map_err(input)?,
            };
            let rep = stats::measure_report(&g, n).map_err(input)?;
            match ctx.format {
                Format::Json => {
                    out = format!(
                        "{}\n",
                        serde_json::to_string(&json!({ "report": rep, "expectation": e }))
                            .map_err(input)?
                    )
                }
                _ => {
                    writeln!(out, "{}", ctx.header("stats")).unwrap();
                    writeln!(out, "multiweb,tr1,X_n,P,P_u").unwrap();
                    for (i, r) in rep.rows.iter().enumerate() {
                        writeln!(out, "{i},{},{},{},{}", r.tr1, r.twist, r.p, r.p_uniform).unwrap();
                    }
                    writeln!(out, "E,{},{},1,", rep.z1, e.by_definition).unwrap();
                    writeln!(out, "E_u,{},{},,1", rep.rows.len(), e.uniform).unwrap();
                }
            }
        }
        Command::Density {
            cutoff,
            table,
            patch,
        } => {
            if cutoff < 10 {
                return Err(CliError::Input(format!(
                    "cutoff must be at least 10, got {cutoff}"
                )));
            }
            let t = GreenTable::for_cutoff(cutoff).map_err(input)?;
            if table {
                return Ok(t.to_csv());
            }
            let r = density::rho_from_table(&t).map_err(input)?;
            let patch_report = match patch {
                Some(p) => {
                    let (a, b) = parse_patch(&p)?;
                    let g = qdimer::generators::honeycomb_patch(a, b).map_err(input)?;
                    Some(density::finite_patch_expected_loops(&g).map_err(input)?)
                }
                None => None,
            };
            match ctx.format {
                Format::Json => {
                    let mut v = serde_json::to_value(&r).map_err(input)?;
                    v["patch"] = serde_json::to_value(&patch_report).map_err(input)?;
                    v.as_object_mut().unwrap().remove("partial");
                    out = format!("{v}\n");
                }
                _ => {
                    writeln!(out, "cutoff = {}", r.cutoff).unwrap();
                    writeln!(out, "rho = {:.12}", r.rho).unwrap();
                    writeln!(out, "1/rho = {:.9}", 1.0 / r.rho).unwrap();
                    writeln!(
                        out,
                        "constant term = {:.15} (-1/54 + 1/(6 sqrt(3) pi))",
                        r.constant_term
                    )
                    .unwrap();
                    writeln!(out, "series = {:.15}", r.series).unwrap();
                    writeln!(
                        out,
                        "tail estimate rho(R) - rho(R/2) = {:.3e}",
                        r.tail_estimate
                    )
                    .unwrap();
                    writeln!(
                        out,
                        "relative deviation from 1/27 = {:.3e}",
                        r.relative_deviation
                    )
                    .unwrap();
                    writeln!(out, "B(0,0) = {:.15}, B(-1,0) = {:.15}", r.b00, r.b_m1_0).unwrap();
                    writeln!(out, "B(1,0) = {:.15}, B(-2,0) = {:.15}", r.b_1_0, r.b_m2_0).unwrap();
                    writeln!(out, "recurrence residual = {:.3e}", r.recurrence_residual).unwrap();
                    writeln!(out, "quadrature error = {:.3e}", r.quadrature_error).unwrap();
                    if let Some(p) = &patch_report {
                        writeln!(
                            out,
                            "patch E(L): enumeration = {}, pair correlation = {}",
                            p.enumeration, p.pair_correlation
                        )
                        .unwrap();
                    }
                }
            }
            if r.recurrence_residual > 1e-9 {
                emit(&out, None)?;
                return Err(CliError::Consistency(format!(
                    "Green recurrence residual {:.3e}",
                    r.recurrence_residual
                )));
            }
            if let Some(p) = &patch_report {
                if !p.passed(1e-10) {
                    emit(&out, None)?;
                    return Err(CliError::Consistency(
                        "finite-patch methods disagree".into(),
                    ));
                }
            }
        }
        Command::Rt(RtCommand::Eval { file, n }) => {
            let text = std::fs::read_to_string(&file).map_err(input)?;
            let d = rteval::WebDiagram::parse(&text, n).map_err(input)?;
            let v = rteval::evaluate(&d).map_err(input)?;
            out = match ctx.format {
                Format::Json => format!("{}\n", json!({ "n": d.n, "value": v.to_text() })),
                _ => format!("{}\n", v.to_pretty()),
            };
        }
        Command::Rt(RtCommand::FromGraph { graph, n, multiweb }) => {
            let g = build_graph(&graph, &mut ctx)?;
            let webs = match multiweb {
                Some(s) => {
                    let mult: Result<Vec<u32>, _> =
                        s.split(',').map(|t| t.trim().parse()).collect();
                    let m = Multiweb {
                        n,
                        mult: mult.map_err(input)?,
                    };
                    if !m.is_valid(&g) {
                        return Err(CliError::Input(
                            "multiplicities do not form an n-multiweb".into(),
                        ));
                    }
                    vec![m]
                }
                None => enumerate_multiwebs(&g, n),
            };
            let phi = build_quantum_identity(&g, n).map_err(input)?;
            let mut bad = Vec::new();
            let single = webs.len() == 1;
            for (i, m) in webs.iter().enumerate() {
                let d = rteval::from_multiweb(&g, m).map_err(input)?;
                let v = match rteval::rt_trace(&g, m) {
                    Err(rteval::RtError::NotDivisible(r)) => {
                        return Err(CliError::Consistency(format!(
                            "multiweb {i}: remainder {r} after dividing by [m_e]!"
                        )))
                    }
                    r => r.map_err(input)?,
                };
                let t = qtrace::trace_diagonal(&phi, &g, m).map_err(input)?;
                if v != t {
                    bad.push(i);
                }
                if single {
                    writeln!(out, "{}", d.to_text()).unwrap();
                }
                writeln!(out, "{i} [{}]: {}", mult_text(m), v.to_pretty()).unwrap();
            }
            if !bad.is_empty() {
                emit(&out, None)?;
                return Err(CliError::Consistency(format!(
                    "RT value differs from trace for multiwebs {bad:?}"
                )));
            }
        }
        Command::Qalgebra(QalgebraCommand::Selftest) | Command::QalgebraSelftest => {
            let rep = qalgebra::selftest().map_err(input)?;
            match ctx.format {
                Format::Json => out = format!("{}\n", serde_json::to_string(&rep).map_err(input)?),
                _ => {
                    for c in &rep.checks {
                        writeln!(out, "{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name)
                            .unwrap();
                    }
                }
            }
            if !rep.passed() {
                emit(&out, None)?;
                return Err(CliError::Consistency("qalgebra self-test failed".into()));
            }
        }
    }
    Ok(out)
}

/// Writes to `path` through a temporary file in the same directory, or to
/// standard output.
fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut tmp = p.as_os_str().to_owned();
            tmp.push(".tmp");
            std::fs::write(&tmp, text).map_err(input)?;
            std::fs::rename(&tmp, p).map_err(input)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = cli
        .threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|s| s.parse().ok()));
    if let Some(t) = threads {
        if let Err(e) = par::configure_threads(t) {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let output = cli.output.clone();
    match run(cli).and_then(|text| emit(&text, output.as_deref())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Consistency(e)) => {
            eprintln!("consistency violation: {e}");
            ExitCode::from(2)
        }
    }
}
