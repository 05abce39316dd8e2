use blma::harness::{self, ExperimentConfig, MarketSource, StateFile};
use blma::radio::{GeneratedMarketSpec, TimeDomain, UtilityModel};
use blma::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "blma",
    version,
    about = "Blind matching with aspiration levels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the replications described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Seed of the first replication.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replications: Option<u64>,
        /// Output directory (default: the config's `out`, else `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a per-run trace CSV.
        #[arg(long)]
        trace: bool,
    },
    /// Re-check ε-pairwise stability of a saved final state.
    Verify {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        market: PathBuf,
    },
    /// Draw a cognitive-radio market and write it as explicit JSON.
    GenMarket {
        #[arg(long, value_enum, ignore_case = true)]
        model: Model,
        #[arg(short = 'K')]
        num_k: usize,
        #[arg(short = 'L')]
        num_l: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    A,
    B,
}

fn run(
    config: &Path,
    seed: Option<u64>,
    replications: Option<u64>,
    out: Option<PathBuf>,
    trace: bool,
) -> Result<()> {
    let mut cfg: ExperimentConfig = harness::load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = replications {
        cfg.replications = r;
    }
    if trace {
        cfg.trace = true;
    }
    let dir = out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let result = harness::run_experiment(&cfg)?;
    for r in &result.records {
        if let Some(e) = &r.error {
            eprintln!("run with seed {} failed: {e}", r.seed);
        }
    }
    harness::write_outputs(&result, &dir)?;
    let s = &result.stats;
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(
        stdout,
        "{} replications, {} converged ({:.1}%), mean rounds {:.1}, median {:.1}",
        s.replications,
        s.converged,
        100.0 * s.convergence_rate,
        s.mean_rounds,
        s.median_rounds
    );
    let _ = writeln!(
        stdout,
        "mean per-PU utility {:.6}, mean per-SU utility {:.6}",
        s.mean_pu_utility, s.mean_su_utility
    );
    let _ = writeln!(stdout, "outputs written to {}", dir.display());
    Ok(())
}

fn verify(state: &Path, market: &Path) -> Result<bool> {
    let file = StateFile::read(state)?;
    let source = MarketSource::from_file(market)?;
    let built = source.build(None)?;
    let domain = file.tau_fixed.map_or(TimeDomain::Full, TimeDomain::Fixed);
    let verdict = harness::verify(&built, &file.to_state()?, file.epsilon, domain)?;
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "stable: {}", verdict.stable);
    if let Some(g) = verdict.grid_stable {
        let _ = writeln!(stdout, "stable (grid oracle): {g}");
    }
    Ok(verdict.stable && verdict.grid_stable.unwrap_or(true))
}

fn gen_market(model: Model, num_k: usize, num_l: usize, seed: u64, out: &Path) -> Result<()> {
    let model = match model {
        Model::A => UtilityModel::A,
        Model::B => UtilityModel::B,
    };
    let spec = GeneratedMarketSpec::new(model, seed, num_k, num_l);
    let market = blma::radio::CognitiveMarket::generate(&spec)?;
    let text = serde_json::to_string_pretty(market.spec()).expect("serializable");
    std::fs::write(out, text + "\n").map_err(|e| Error::io(out, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            seed,
            replications,
            out,
            trace,
        } => run(&config, seed, replications, out, trace).map(|_| true),
        Command::Verify { state, market } => verify(&state, &market),
        Command::GenMarket {
            model,
            num_k,
            num_l,
            seed,
            out,
        } => gen_market(model, num_k, num_l, seed, &out).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
