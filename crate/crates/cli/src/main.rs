use std::path::PathBuf;
use std::process::ExitCode;

use circle_thermo_cli::{corpus, run, Command, RunOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "circle-thermo", version, about = "Thermodynamic formalism experiments for expanding circle maps")]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(Subcommand)]
enum Action {
    /// Run one experiment.
    #[command(flatten)]
    Run(RunCommand),
    /// Run every configuration in a directory and check its thresholds.
    Corpus {
        /// Directory of `*.json` configurations.
        #[arg(long)]
        dir: PathBuf,
        /// Directory for the CSV reports (default `<dir>/out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Omit the `# generated` line from CSV output.
        #[arg(long)]
        no_timestamp: bool,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// CSV report path (default: the config's `output`, else `<case>_<command>.csv`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the `# generated` line from CSV output.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum RunCommand {
    /// Pressure, equilibrium data and periodic-orbit check.
    Pressure(RunArgs),
    /// Pressure derivative along map and potential perturbations.
    Response(RunArgs),
    /// Asymptotic variance by correlation series and resolvent.
    Variance(RunArgs),
    /// Free energy, rate function and large-deviation checks.
    Ldp(RunArgs),
    /// Level-set pressure over a grid of levels.
    Multifractal(RunArgs),
    /// Cone invariance and contraction of the transfer operator.
    ConeCheck(RunArgs),
    /// Kolmogorov-Smirnov test of normalized Birkhoff sums.
    Clt(RunArgs),
}

impl RunCommand {
    fn split(self) -> (Command, RunArgs) {
        match self {
            RunCommand::Pressure(a) => (Command::Pressure, a),
            RunCommand::Response(a) => (Command::Response, a),
            RunCommand::Variance(a) => (Command::Variance, a),
            RunCommand::Ldp(a) => (Command::Ldp, a),
            RunCommand::Multifractal(a) => (Command::Multifractal, a),
            RunCommand::ConeCheck(a) => (Command::ConeCheck, a),
            RunCommand::Clt(a) => (Command::Clt, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = match cli.action {
        Action::Run(cmd) => {
            let (command, args) = cmd.split();
            let opts = RunOptions { config: args.config, out: args.out, timestamp: !args.no_timestamp };
            match run(command, &opts) {
                Ok(summary) => {
                    println!("{summary}");
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Action::Corpus { dir, out, no_timestamp } => {
            let out = out.unwrap_or_else(|| dir.join("out"));
            match corpus(&dir, &out, !no_timestamp) {
                Ok(Some(report)) => {
                    for line in report.lines() {
                        println!("{line}");
                    }
                    let failures = report.failures();
                    if !failures.is_empty() {
                        let names: Vec<&str> = failures.iter().map(|c| c.case_id.as_str()).collect();
                        eprintln!("failed cases: {}", names.join(", "));
                    }
                    report.exit_code()
                }
                Ok(None) => {
                    eprintln!("error: no configurations in {}", dir.display());
                    2
                }
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", dir.display());
                    2
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
