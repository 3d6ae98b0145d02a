use std::path::PathBuf;
use std::process::ExitCode;

use bmolab_cli::config::ExperimentConfig;
use bmolab_cli::{catalogue, run_file, RunOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bmolab", version, about = "Bellman function and semigroup BMO experiments")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment and write its report.
    Run {
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// List experiment kinds.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match cli.cmd {
        Cmd::List => {
            for (k, d) in catalogue() {
                println!("{:<10} {d}", k.as_str());
            }
            ExitCode::SUCCESS
        }
        Cmd::Validate { config } => {
            let r = ExperimentConfig::load(&config).and_then(|c| c.validate(&config.display().to_string()).map(|_| c));
            match r {
                Ok(c) => {
                    println!("{}: ok ({} experiment \"{}\")", config.display(), c.kind.as_str(), c.name);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Cmd::Run { config, seed, out_dir } => match run_file(&config, &RunOptions { seed, out_dir }) {
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
            Ok(o) => {
                for r in &o.report.records {
                    let mark = if r.pass { "PASS" } else { "FAIL" };
                    match &r.error {
                        Some(e) => println!("{mark} {}: {e}", r.item),
                        None => println!("{mark} {}", r.item),
                    }
                }
                let s = &o.report.summary;
                println!("{} of {} passed; report {}", s.passed, s.total, o.report_path.display());
                if s.pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
        },
    }
}
