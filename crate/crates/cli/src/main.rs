use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dkit::report::canonical_string;
use dkit::{exit, run_file, Format, RunOptions, Scenario, Suite};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "dkit",
    version,
    about = "Checks causality and metric recovery from a Lorentzian distance function"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write one report per suite plus summary.json.
    Run {
        scenario: PathBuf,
        /// Output directory (default: the scenario's `output_dir`, else reports/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override; `DKIT_SEED` is used when neither this nor the scenario sets one.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run matrix-level suites on a distance matrix CSV.
    Matrix {
        file: PathBuf,
        /// Comma-separated suites: axioms, distinction, reflectivity, topology, gate.
        #[arg(long, value_delimiter = ',', required = true)]
        suite: Vec<String>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write reports here instead of printing them.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn matrix_command(file: PathBuf, suites: Vec<String>, tol: f64, out: Option<PathBuf>, format: Format) -> u8 {
    let mut parsed = Vec::new();
    for s in &suites {
        match Suite::parse(s.trim()) {
            Ok(x) => parsed.push(x),
            Err(e) => {
                eprintln!("{e}");
                return exit::PARSE;
            }
        }
    }
    let name = file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "matrix".into());
    let doc = json!({
        "name": name,
        "source": {"type": "matrix", "path": file.file_name().map(|f| f.to_string_lossy().into_owned())},
        "suites": parsed.iter().map(|s| s.name()).collect::<Vec<_>>(),
        "tolerances": {"d": tol},
    });
    let text = doc.to_string();
    let scenario = match Scenario::from_json(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let raw = std::fs::read(&file).unwrap_or_default();
    let opts = RunOptions {
        dry: out.is_none(),
        out,
        format,
        check_expectations: false,
        ..RunOptions::default()
    };
    let base = file.parent().unwrap_or(std::path::Path::new("."));
    match dkit::run(&scenario, &raw, base, &opts) {
        Ok(outcome) => {
            if outcome.out_dir.is_none() {
                let reports: BTreeMap<_, _> = outcome.reports.into_iter().collect();
                print!("{}", canonical_string(&json!(reports)));
            } else {
                print!("{}", canonical_string(&outcome.summary));
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            format,
        } => {
            let opts = RunOptions {
                out,
                seed,
                format,
                ..RunOptions::from_env()
            };
            let outcome = run_file(&scenario, &opts);
            if let Some(err) = outcome.summary.get("error") {
                eprintln!("{}", err.as_str().unwrap_or_default());
            } else {
                if let Some(e) = outcome.summary.get("source_error") {
                    eprintln!("source failed: {}", e.as_str().unwrap_or_default());
                }
                if let Some(suites) = outcome.summary["suites"].as_object() {
                    for (name, s) in suites {
                        println!("{name:<14} {}", s["status"].as_str().unwrap_or("?"));
                        for m in s["mismatches"].as_array().into_iter().flatten() {
                            println!("    {}", m.as_str().unwrap_or_default());
                        }
                        if let Some(e) = s["error"].as_str() {
                            println!("    {e}");
                        }
                    }
                }
                if let Some(v) = outcome.summary["verdict"].as_str() {
                    println!("verdict        {v}");
                }
                if let Some(dir) = &outcome.out_dir {
                    println!("reports        {}", dir.display());
                }
            }
            outcome.exit_code
        }
        Command::Matrix {
            file,
            suite,
            tol,
            out,
            format,
        } => matrix_command(file, suite, tol, out, format),
    };
    ExitCode::from(code)
}
