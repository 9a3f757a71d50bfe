//! `adbench` — derivative overhead factors as CSV.
//!
//! Exit codes: 0 success, 1 usage error, 2 a record was unreliable and
//! `--strict` was set.

use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

use adbench::{run_suite, write_csv, Op, SuiteConfig};

#[derive(Parser, Debug)]
#[command(
    name = "adbench",
    about = "Measures derivative/primal overhead factors for the ad library",
    disable_help_flag = false
)]
struct Args {
    /// Comma-separated operation names, or 'all'.
    #[arg(long, value_delimiter = ',')]
    ops: Vec<String>,

    /// Comma-separated input dimensions.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,

    /// Timed repetitions per measurement (median is reported).
    #[arg(long, default_value_t = 5)]
    reps: usize,

    /// RNG seed for instance generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Exit nonzero if any record is flagged unreliable.
    #[arg(long)]
    strict: bool,

    /// Measure (op, n) cells on separate threads. Each timed region
    /// stays single-threaded.
    #[arg(long)]
    parallel: bool,

    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("adbench: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            // Help/version requests are not errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    if args.reps < 3 {
        return usage_error(&format!("--reps must be at least 3, got {}", args.reps));
    }
    if args.n.iter().any(|&n| n < 1) {
        return usage_error("--n entries must be at least 1");
    }

    let mut ops = Vec::new();
    for name in &args.ops {
        if name == "all" {
            ops.extend(Op::ALL);
        } else {
            match name.parse::<Op>() {
                Ok(op) => ops.push(op),
                Err(e) => return usage_error(&e),
            }
        }
    }

    let cfg = SuiteConfig {
        ops,
        sizes: args.n.clone(),
        reps: args.reps,
        seed: args.seed,
        parallel: args.parallel,
    };
    let records = run_suite(&cfg);

    let result = match &args.out {
        Some(path) => File::create(path)
            .and_then(|mut fh| write_csv(&records, &mut fh)),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_csv(&records, &mut lock).and_then(|_| lock.flush())
        }
    };
    if let Err(e) = result {
        eprintln!("adbench: failed to write report: {e}");
        return ExitCode::from(1);
    }

    if args.strict && records.iter().any(|r| !r.reliable) {
        eprintln!("adbench: unreliable measurement under --strict");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
