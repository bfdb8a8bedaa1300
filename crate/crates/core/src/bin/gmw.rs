use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gmw_core::experiment::{
    aggregate, compare, read_result, run, trace_export, write_outputs, Algorithm, Overrides, RunConfig,
};
use gmw_core::{Error, Result};

#[derive(Parser)]
#[command(name = "gmw", version, about = "Train networks with GMW-SGD and its baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write result.json, trace.csv (and pareto.csv).
    Train(TrainArgs),
    /// Tabulate train/test accuracy and test CE of saved results.
    Compare {
        results: Vec<PathBuf>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write the convergence trace of a saved result as CSV.
    ExportTrace {
        result: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// TOML (or JSON) run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluation budget (epochs for sgd).
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    np: Option<usize>,
    #[arg(long)]
    ngen: Option<usize>,
    #[arg(long)]
    nevol: Option<usize>,
    #[arg(long)]
    nepoch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    pmut: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long = "eta-m")]
    eta_m: Option<f64>,
    /// Run seeds seed..seed+N and write an aggregate.
    #[arg(long, default_value_t = 1)]
    repeat: usize,
}

fn train(args: TrainArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let algorithm = args.algorithm.as_deref().map(str::parse::<Algorithm>).transpose()?;
    cfg.apply(&Overrides {
        algorithm,
        seed: args.seed,
        out: args.out,
        budget: args.budget,
        np: args.np,
        n_gen: args.ngen,
        n_evol: args.nevol,
        n_epoch: args.nepoch,
        lr: args.lr,
        p_mut: args.pmut,
        patience: args.patience,
        eta_m: args.eta_m,
    });
    if args.repeat == 0 {
        return Err(Error::usage("--repeat must be at least 1"));
    }
    cfg.validate()?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(cfg.algorithm.name()));
    let mut results = Vec::new();
    for k in 0..args.repeat {
        let mut c = cfg.clone();
        c.seed = cfg.seed + k as u64;
        let dir = if args.repeat == 1 {
            out.clone()
        } else {
            out.join(format!("seed-{}", c.seed))
        };
        c.out = Some(dir.clone());
        let start = Instant::now();
        let result = run(&c)?;
        write_outputs(&result, start.elapsed().as_secs_f64(), &dir)?;
        let m = result.metrics;
        println!(
            "{} seed {}: train {:.2}%  test {:.2}%  test CE {:.4}  ({} evaluations) -> {}",
            result.algorithm.label(),
            result.seed,
            100.0 * m.train_accuracy,
            100.0 * m.test_accuracy,
            m.test_ce,
            result.evaluations,
            dir.display()
        );
        results.push(result);
    }
    if args.repeat > 1 {
        let agg = aggregate(&results)?;
        let json = serde_json::to_string_pretty(&agg).map_err(|e| Error::usage(e.to_string()))?;
        std::fs::write(out.join("aggregate.json"), json + "\n")?;
        print!("{}", compare(&results)?.to_text());
        println!(
            "test accuracy mean {:.2}% (min {:.2}%, max {:.2}%)",
            100.0 * agg.test_accuracy.mean,
            100.0 * agg.test_accuracy.min,
            100.0 * agg.test_accuracy.max
        );
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => train(args),
        Command::Compare { results, csv } => {
            let loaded = results.iter().map(|p| read_result(p)).collect::<Result<Vec<_>>>()?;
            let table = compare(&loaded)?;
            print!("{}", table.to_text());
            if let Some(path) = csv {
                std::fs::write(path, table.to_csv())?;
            }
            Ok(())
        }
        Command::ExportTrace { result, out } => {
            let csv = trace_export(&read_result(&result)?)?;
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
