use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tangent_verify::{exit, run, suite_catalogue, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "tangent-verify", version, about = "Verify tangent bundle geometry against closed forms and a numeric oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites named in a config file.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the config's suite list; repeatable.
        #[arg(long = "suite")]
        suites: Vec<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        h: Option<f64>,
        /// Report path; the extension is replaced by `.json` / `.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        format: Format,
    },
    /// Print every suite with what it checks and its default tolerance.
    ListSuites,
}

const DEFAULT_OUTPUT: &str = "tangent-verify-report";

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListSuites => {
            for line in suite_catalogue() {
                println!("{line}");
            }
            ExitCode::from(exit::ALL_PASS as u8)
        }
        Command::Verify {
            config,
            suites,
            samples,
            seed,
            h,
            out,
            format,
        } => {
            let overrides = Overrides {
                suites,
                samples,
                seed,
                h,
                output: out,
            };
            ExitCode::from(verify(&config, &overrides, format) as u8)
        }
    }
}

fn verify(path: &Path, overrides: &Overrides, format: Format) -> i32 {
    let mut raw = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error at {e}");
            return exit::CONFIG_ERROR;
        }
    };
    raw.apply(overrides);
    let cfg = match raw.validate() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error at {e}");
            return exit::CONFIG_ERROR;
        }
    };
    let report = run(&cfg);
    print!("{}", report.summary());
    let stem = cfg.raw.output.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    let mut written = Vec::new();
    if matches!(format, Format::Json | Format::Both) {
        let p = stem.with_extension("json");
        if let Err(e) = report.save_json(&p) {
            eprintln!("{e}");
            return exit::SOME_FAIL;
        }
        written.push(p);
    }
    if matches!(format, Format::Csv | Format::Both) {
        let p = stem.with_extension("csv");
        if let Err(e) = report.save_csv(&p) {
            eprintln!("{e}");
            return exit::SOME_FAIL;
        }
        written.push(p);
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    if report.pass {
        exit::ALL_PASS
    } else {
        exit::SOME_FAIL
    }
}
