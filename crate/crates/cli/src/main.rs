use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pzeta_cli::commands::{self, exit_code_for, Outcome, SearchConfig};
use pzeta_cli::{parse_tuple, parse_tuple_list, AnalyzeOptions, VarietyFile};
use pzeta_core::CountConfig;

#[derive(Parser)]
#[command(name = "pzeta", version, about = "Partial zeta functions of affine varieties over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include wall-clock timings in the JSON report (breaks byte stability).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Args, Clone)]
struct Common {
    /// Variety file.
    file: PathBuf,
    /// Subfield degrees, e.g. 1,2,4 (default: all 1).
    #[arg(long)]
    d: Option<String>,
    /// Branch-node budget for counting.
    #[arg(long, default_value_t = 100_000_000)]
    budget: u128,
    /// Enumerate every variable instead of root counting the last one.
    #[arg(long)]
    no_leaf_roots: bool,
    /// Enumerate variables with small d_i first instead of in file order.
    #[arg(long)]
    reorder: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Count N_1..N_kmax.
    Count {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        /// Cross-check every count with the brute-force oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Counts, recurrence, roots, weights, classification and theorem checks.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        kmax: usize,
        /// Largest recurrence order tried (default: largest L with 2L + 2 ≤ kmax).
        #[arg(long)]
        max_order: Option<usize>,
        #[arg(long)]
        oracle: bool,
        /// Skip counting N_{kmax+1} for the extrapolation check.
        #[arg(long)]
        no_predict: bool,
        /// Skip the twisted fixed-point cross-check at k = 1.
        #[arg(long)]
        no_faltings: bool,
    },
    /// Random small curves with non-dividing d; logs non-rational outcomes.
    Search {
        #[arg(long, default_value_t = 8)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Characteristics, comma separated.
        #[arg(long, default_value = "2")]
        primes: String,
        /// d tuples separated by ';', e.g. "2,3;3,4".
        #[arg(long, default_value = "2,3")]
        d: String,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        #[arg(long)]
        max_order: Option<usize>,
        #[arg(long, default_value_t = 3)]
        max_degree: u32,
        #[arg(long, default_value_t = 4)]
        max_terms: usize,
        #[arg(long, default_value_t = 100_000_000)]
        budget: u128,
    },
    /// Checks the Sym/∧ trace identity on random spectra and matrices.
    IdentityCheck {
        #[arg(long, default_value_t = 6)]
        h_max: usize,
        #[arg(long, default_value_t = 6)]
        dim_max: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 50)]
        matrices: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Compares N_k with the fixed points of sigma∘Frob^k.
    FaltingsVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Checks ord_q N_k ≥ k·mu for k = 1..kmax.
    Axkatz {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn load(common: &Common) -> Result<(VarietyFile, Vec<usize>, CountConfig), ExitCode> {
    let text = fs::read_to_string(&common.file).map_err(|e| fail(1, format!("{}: {e}", common.file.display())))?;
    let file = VarietyFile::parse(&text).map_err(|e| fail(1, format!("{}: {e}", common.file.display())))?;
    if let Err(e) = file.to_variety() {
        return Err(fail(1, format!("{}: {e}", common.file.display())));
    }
    let d = match &common.d {
        Some(s) => parse_tuple(s).map_err(|e| fail(1, e))?,
        None => vec![1; file.n()],
    };
    if d.len() != file.n() {
        return Err(fail(1, format!("--d has {} entries but the file declares {} variables", d.len(), file.n())));
    }
    let cfg = CountConfig {
        node_budget: common.budget,
        leaf_root_count: !common.no_leaf_roots,
        reorder: common.reorder,
        ..CountConfig::default()
    };
    Ok((file, d, cfg))
}

fn emit(out: &Option<PathBuf>, o: Outcome) -> ExitCode {
    eprint!("{}", o.human);
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, &o.json) {
                return fail(1, format!("{}: {e}", path.display()));
            }
        }
        None => print!("{}", o.json),
    }
    ExitCode::from(o.code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Count { common, kmax, oracle } => match load(common) {
            Ok((file, d, cfg)) => commands::cmd_count(&file, &d, *kmax, &cfg, *oracle, cli.timings),
            Err(code) => return code,
        },
        Command::Analyze { common, kmax, max_order, oracle, no_predict, no_faltings } => match load(common) {
            Ok((file, d, cfg)) => {
                let opts = AnalyzeOptions {
                    max_order: *max_order,
                    count: cfg,
                    oracle: *oracle,
                    check_prediction: !no_predict,
                    faltings: !no_faltings,
                    timings: cli.timings,
                    ..AnalyzeOptions::default()
                };
                commands::cmd_analyze(&file, &d, *kmax, &opts)
            }
            Err(code) => return code,
        },
        Command::Search { trials, seed, primes, d, kmax, max_order, max_degree, max_terms, budget } => {
            let primes: Result<Vec<u64>, _> = primes.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse::<u64>()).collect();
            let Ok(primes) = primes else { return fail(1, "invalid --primes") };
            let d_tuples = match parse_tuple_list(d) {
                Ok(t) => t,
                Err(e) => return fail(1, e),
            };
            if let Some(bad) = d_tuples.iter().find(|t| t.len() != 2) {
                return fail(1, format!("search generates curves in two variables; d tuple {bad:?} has {} entries", bad.len()));
            }
            let mut cfg = SearchConfig { trials: *trials, seed: *seed, primes, d_tuples, max_degree: *max_degree, max_terms: *max_terms, k_max: *kmax, ..SearchConfig::default() };
            cfg.analyze.max_order = *max_order;
            cfg.analyze.count.node_budget = *budget;
            cfg.analyze.timings = cli.timings;
            Ok(commands::cmd_search(&cfg))
        }
        Command::IdentityCheck { h_max, dim_max, trials, matrices, seed } => {
            Ok(commands::cmd_identity_check(*h_max, *dim_max, *trials, *matrices, *seed))
        }
        Command::FaltingsVerify { common, k } => match load(common) {
            Ok((file, d, cfg)) => commands::cmd_faltings_verify(&file, &d, *k, &cfg),
            Err(code) => return code,
        },
        Command::Axkatz { common, kmax } => match load(common) {
            Ok((file, d, cfg)) => commands::cmd_axkatz(&file, &d, *kmax, &cfg),
            Err(code) => return code,
        },
    };
    match result {
        Ok(o) => emit(&cli.out, o),
        Err(e) => fail(exit_code_for(&e) as u8, e),
    }
}
