use clap::{Parser, Subcommand};
use std::path::PathBuf;
use svpforge::caps::Caps;
use svpforge::commands::{
    decompose_cmd, gen_cr, gen_subexp, pvp_analyze, size_report, svp_solve, usvp_check,
    verify_complete, DecomposeArgs, GenCrArgs, GenSubexpArgs, PvpAnalyzeArgs, SizeReportArgs,
    VerifyArgs,
};
use svpforge::Outcome;

/// Compiles 3SAT / Unambiguous-3SAT / 3COL instances into GapSVP and
/// uSVP lattice instances and checks them with exact desk-scale
/// oracles. Exit codes: 0 success, 2 the-math-said-no (violations,
/// promise failures, Fail-as-data), 1 tool error.
#[derive(Parser)]
#[command(name = "svpforge", version)]
struct Cli {
    /// Worker threads (default: available parallelism). Outputs are
    /// identical for every value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a 3SAT formula with the plane-family construction over F^3.
    GenSubexp {
        /// DIMACS CNF input (strict 3-literal clauses).
        #[arg(long)]
        cnf: PathBuf,
        /// Prime field size (must exceed 3·(|H|-1)).
        #[arg(long)]
        q: u64,
        /// Grid size |H| (default ⌈n^(1/3)⌉).
        #[arg(long)]
        h: Option<u64>,
        /// Norm index, an integer above 2.
        #[arg(long, default_value_t = 4)]
        p: u32,
        /// Add the unique-shortest-vector constraints.
        #[arg(long)]
        usvp: bool,
        /// Materialize the kernel instance (micro parameters only).
        #[arg(long)]
        materialize: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile 3COL or Unambiguous-3SAT with the composition-recursion
    /// construction over F^t.
    GenCr {
        /// Edge-list graph input (3COL mode).
        #[arg(long)]
        graph: Option<PathBuf>,
        /// DIMACS CNF input (Unambiguous-3SAT mode).
        #[arg(long)]
        cnf: Option<PathBuf>,
        #[arg(long)]
        q: u64,
        /// Ambient dimension (even, at least 4).
        #[arg(long, default_value_t = 4)]
        t: usize,
        #[arg(long)]
        h: Option<u64>,
        #[arg(long, default_value_t = 4)]
        p: u32,
        /// Embed base for the power map.
        #[arg(long, default_value_t = 2)]
        c: u64,
        #[arg(long, default_value_t = 1)]
        depth_cap: usize,
        /// Override the 10·t² recursion stop threshold.
        #[arg(long)]
        stop_threshold: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify a witness against every constraint of a reduction and
    /// report the exact norm.
    VerifyComplete {
        /// "subexp" or "cr".
        #[arg(long)]
        mode: String,
        #[arg(long)]
        cnf: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 4)]
        t: usize,
        #[arg(long)]
        h: Option<u64>,
        #[arg(long, default_value_t = 4)]
        p: u32,
        #[arg(long, default_value_t = 2)]
        c: u64,
        #[arg(long)]
        usvp: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact shortest-vector oracle on an instance directory.
    SvpSolve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// λ1/λ2 oracle plus the uniqueness promise check.
    UsvpCheck {
        #[arg(long)]
        instance: PathBuf,
        /// γ^p as an exact rational "num/den".
        #[arg(long)]
        gamma_pow: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plane-vs-Plane expansion table and the Cayley spectral checks.
    PvpAnalyze {
        #[arg(long, default_value_t = 3)]
        q: u64,
        #[arg(long, default_value_t = 3)]
        t: usize,
        #[arg(long, default_value_t = 100)]
        subsets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        cayley_characters: usize,
        #[arg(long, default_value_t = 0)]
        mixing_subsets: usize,
        #[arg(long, default_value_t = 0)]
        star_subsets: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover a super-assignment as an integer combination of natural
    /// assignments (Fail is reported as data).
    Decompose {
        /// JSON assignment over the full plane family.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 3)]
        t: usize,
        /// Individual-degree bound of the global candidates.
        #[arg(long)]
        d: u32,
        /// Family total-degree bound (default t·d).
        #[arg(long)]
        family_bound: Option<u32>,
        #[arg(long, default_value_t = 8)]
        k_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact size accounting against the printed bounds.
    SizeReport {
        /// "subexp" or "cr".
        #[arg(long)]
        mode: String,
        #[arg(long)]
        cnf: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 4)]
        t: usize,
        #[arg(long)]
        h: Option<u64>,
        #[arg(long, default_value_t = 4)]
        p: u32,
        #[arg(long, default_value_t = 2)]
        c: u64,
        #[arg(long, default_value_t = 1)]
        depth_cap: usize,
        #[arg(long)]
        stop_threshold: Option<u64>,
        #[arg(long)]
        usvp: bool,
        /// Cap for the streamed variable-count cross-check.
        #[arg(long, default_value_t = 1 << 20)]
        stream_cap: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // outputs are independent of the pool size; ignore re-init races
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let caps = match Caps::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: SVPFORGE_CAPS: {e}");
            std::process::exit(1);
        }
    };
    let result = run(cli.cmd, &caps);
    match result {
        Ok(outcome) => std::process::exit(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

fn run(cmd: Cmd, caps: &Caps) -> Result<Outcome, svpforge::CliError> {
    match cmd {
        Cmd::GenSubexp {
            cnf,
            q,
            h,
            p,
            usvp,
            materialize,
            out,
        } => gen_subexp(
            &GenSubexpArgs {
                cnf,
                q,
                h,
                p,
                usvp,
                materialize,
                out,
            },
            caps,
        ),
        Cmd::GenCr {
            graph,
            cnf,
            q,
            t,
            h,
            p,
            c,
            depth_cap,
            stop_threshold,
            out,
        } => gen_cr(
            &GenCrArgs {
                graph,
                cnf,
                q,
                t,
                h,
                p,
                c,
                depth_cap,
                stop_threshold,
                out,
            },
            caps,
        ),
        Cmd::VerifyComplete {
            mode,
            cnf,
            graph,
            witness,
            q,
            t,
            h,
            p,
            c,
            usvp,
            out,
        } => {
            let args = match mode.as_str() {
                "subexp" => VerifyArgs::Subexp {
                    cnf: cnf.ok_or_else(|| {
                        svpforge::CliError::Other("--cnf is required in subexp mode".into())
                    })?,
                    witness,
                    q,
                    h,
                    p,
                    usvp,
                },
                "cr" => VerifyArgs::Cr {
                    graph,
                    cnf,
                    witness,
                    q,
                    t,
                    h,
                    p,
                    c,
                },
                other => {
                    return Err(svpforge::CliError::Other(format!(
                        "unknown mode {other:?}, want subexp or cr"
                    )))
                }
            };
            verify_complete(&args, caps, out.as_deref())
        }
        Cmd::SvpSolve { instance, out } => svp_solve(&instance, caps, out.as_deref()),
        Cmd::UsvpCheck {
            instance,
            gamma_pow,
            out,
        } => usvp_check(&instance, gamma_pow.as_deref(), caps, out.as_deref()),
        Cmd::PvpAnalyze {
            q,
            t,
            subsets,
            seed,
            cayley_characters,
            mixing_subsets,
            star_subsets,
            out,
        } => pvp_analyze(
            &PvpAnalyzeArgs {
                q,
                t,
                subsets,
                seed,
                cayley_characters,
                mixing_subsets,
                star_subsets,
                out,
            },
            caps,
        ),
        Cmd::Decompose {
            input,
            q,
            t,
            d,
            family_bound,
            k_max,
            out,
        } => decompose_cmd(
            &DecomposeArgs {
                input,
                q,
                t,
                d,
                family_bound,
                k_max,
                out,
            },
            caps,
        ),
        Cmd::SizeReport {
            mode,
            cnf,
            graph,
            q,
            t,
            h,
            p,
            c,
            depth_cap,
            stop_threshold,
            usvp,
            stream_cap,
        } => {
            let args = match mode.as_str() {
                "subexp" => SizeReportArgs::Subexp {
                    cnf: cnf.ok_or_else(|| {
                        svpforge::CliError::Other("--cnf is required in subexp mode".into())
                    })?,
                    q,
                    h,
                    p,
                    usvp,
                    stream_cap,
                },
                "cr" => SizeReportArgs::Cr(GenCrArgs {
                    graph,
                    cnf,
                    q,
                    t,
                    h,
                    p,
                    c,
                    depth_cap,
                    stop_threshold,
                    out: PathBuf::new(),
                }),
                other => {
                    return Err(svpforge::CliError::Other(format!(
                        "unknown mode {other:?}, want subexp or cr"
                    )))
                }
            };
            size_report(&args, caps)
        }
    }
}
