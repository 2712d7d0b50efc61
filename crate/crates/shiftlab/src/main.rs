use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shiftlab::commands::{self, Status};

#[derive(Parser)]
#[command(name = "shiftlab", version, about = "Weighted shifts on echelon and power series spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every property check on the operator of a config file.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the built-in catalog against its expected verdicts.
    Catalog {
        #[arg(long)]
        entry: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        budget_scale: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write seminorm trajectories of iterates and Cesàro means as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// `e:R` or `i:coef,i:coef,...`
        #[arg(long)]
        x0: String,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
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
    let res = match cli.cmd {
        Cmd::Analyze { config, out } => commands::analyze(&config, out.as_deref()),
        Cmd::Catalog { entry, budget_scale, out } => commands::catalog(entry.as_deref(), budget_scale, out.as_deref()),
        Cmd::Simulate { config, x0, n_max, out } => commands::simulate(&config, &x0, n_max, out.as_deref()),
    };
    match res {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Contradiction) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
