//! Configuration-driven experiment harness behind the `homog` binary.
//!
//! `homog <scenario> --config <path> [--out <dir>] [--seed <int>]`
//!
//! Exit codes: 0 when every configured tolerance holds, 2 on a tolerance
//! failure (including solver non-convergence), 1 on any error.

pub mod config;
pub mod plot;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

pub use config::{load_config, parse_config, ExperimentConfig, Scenario};
pub use run::{run, RunReport};

#[derive(Debug, Parser)]
#[command(name = "homog", version, about = "Cell problems, oscillating energies and two-scale checks")]
struct Args {
    /// nfunc-check | cell | fhom-table | eps-sweep | recovery | twoscale-check
    scenario: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
}

/// Parses `args`, runs the scenario and returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            // --help and --version exit cleanly
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return 1;
            }
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    let Some(scenario) = Scenario::parse(&args.scenario) else {
        let _ = writeln!(stderr, "error: unknown scenario `{}`", args.scenario);
        return 1;
    };
    let mut config = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    if config.scenario != scenario {
        let _ = writeln!(
            stderr,
            "error: command line asks for `{scenario}` but the config declares `{}`",
            config.scenario
        );
        return 1;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    match run(&config, &args.out) {
        Ok(report) => {
            let _ = write!(stdout, "{}", report.render());
            report.exit_code()
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
