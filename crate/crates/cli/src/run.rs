//! Runs a scenario end to end and writes its reports.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::report::{canonicalize, flatten, write_csv, write_json};
use crate::scenario::{Scenario, Suite};
use crate::suites::{build_source, run_suite, Built, SuiteOutput};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SEED_ENV: &str = "DKIT_SEED";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the scenario's output directory.
    pub out: Option<PathBuf>,
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
    pub format: Format,
    /// Seed fallback, normally read from `DKIT_SEED`.
    pub env_seed: Option<String>,
    /// Write nothing; only return the reports.
    pub dry: bool,
    /// Compare observations against declared expectations.
    pub check_expectations: bool,
}

impl RunOptions {
    pub fn from_env() -> Self {
        Self {
            env_seed: std::env::var(SEED_ENV).ok(),
            check_expectations: true,
            ..Self::default()
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: u8,
    pub out_dir: Option<PathBuf>,
    pub summary: Value,
    pub reports: BTreeMap<String, Value>,
}

pub mod exit {
    pub const OK: u8 = 0;
    pub const MISMATCH: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const CRASH: u8 = 3;
    pub const OUTPUT: u8 = 4;
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => exit::PARSE,
            CliError::Suite(_) => exit::CRASH,
            CliError::Output(_) => exit::OUTPUT,
        }
    }
}

fn resolve_seed(scenario: &Scenario, opts: &RunOptions) -> Result<u64, CliError> {
    let env = match &opts.env_seed {
        Some(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Parse(format!("{SEED_ENV}={s} is not an unsigned integer")))?,
        ),
        None => None,
    };
    match opts.seed.or(scenario.seed).or(env) {
        Some(s) => Ok(s),
        None if scenario.needs_seed() => Err(CliError::Parse(format!(
            "scenario `{}` is stochastic and needs a seed (scenario `seed`, --seed, or {SEED_ENV})",
            scenario.name
        ))),
        None => Ok(0),
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Loads and runs a scenario file. Every failure is folded into the exit code.
pub fn run_file(path: &Path, opts: &RunOptions) -> RunOutcome {
    let fail = |e: CliError| RunOutcome {
        exit_code: e.exit_code(),
        out_dir: None,
        summary: json!({ "error": e.to_string() }),
        reports: BTreeMap::new(),
    };
    let (scenario, bytes) = match Scenario::load(path) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    let base = path.parent().unwrap_or(Path::new("."));
    run(&scenario, &bytes, base, opts).unwrap_or_else(fail)
}

/// Checks that every expected key was observed with exactly that value.
fn compare(expected: &BTreeMap<String, Value>, observed: &BTreeMap<String, Value>) -> Vec<String> {
    let mut out = Vec::new();
    for (k, want) in expected {
        match observed.get(k) {
            None => out.push(format!("{k}: not reported by this suite")),
            Some(got) => {
                let (want, got) = (canonicalize(want.clone()), canonicalize(got.clone()));
                let same = match (want.as_f64(), got.as_f64()) {
                    (Some(a), Some(b)) => a == b,
                    _ => want == got,
                };
                if !same {
                    out.push(format!("{k}: expected {want}, observed {got}"));
                }
            }
        }
    }
    out
}

fn write_source_artifacts(built: &Built, dir: &Path) -> Result<(), CliError> {
    let out = |p: &Path| {
        let p = p.to_path_buf();
        move |e: dkit_core::DkitError| CliError::Output(format!("{}: {e}", p.display()))
    };
    let matrix_path = dir.join("matrix.csv");
    let f = fs::File::create(&matrix_path).map_err(|e| CliError::Output(format!("{}: {e}", matrix_path.display())))?;
    built.matrix().write_csv(f).map_err(out(&matrix_path))?;
    match built {
        Built::Sample(s) => {
            let p = dir.join("coordinates.csv");
            s.write_coordinates_csv(&p).map_err(out(&p))?;
        }
        Built::CausalSet(c, _) => {
            let p = dir.join("coordinates.csv");
            let f = fs::File::create(&p).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?;
            c.write_coordinates(f).map_err(out(&p))?;
            let p = dir.join("links.txt");
            let f = fs::File::create(&p).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?;
            c.write_links(f).map_err(out(&p))?;
        }
        Built::Matrix(_) => {}
    }
    Ok(())
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "suite panicked".into())
}

fn write_suite(dir: &Path, suite: Suite, format: Format, doc: &Value, out: &SuiteOutput) -> Result<(), CliError> {
    match format {
        Format::Json => write_json(&dir.join(format!("{suite}.json")), doc),
        Format::Csv => {
            if out.tables.is_empty() {
                let mut rows = flatten(&Value::Object(
                    out.observed
                        .iter()
                        .map(|(k, v)| (k.clone(), v.clone()))
                        .collect::<Map<_, _>>(),
                ));
                for r in &mut rows {
                    r.insert(0, "observed".into());
                }
                write_csv(&dir.join(format!("{suite}.csv")), &["section", "key", "value"], &rows)
            } else {
                for t in &out.tables {
                    write_csv(&dir.join(&t.file), &t.header, &t.rows)?;
                }
                Ok(())
            }
        }
    }
}

/// Runs an already parsed scenario. `raw` is hashed into the summary and
/// `base_dir` resolves relative matrix paths.
pub fn run(scenario: &Scenario, raw: &[u8], base_dir: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let seed = resolve_seed(scenario, opts)?;
    let out_dir = if opts.dry {
        None
    } else {
        let dir = opts
            .out
            .clone()
            .or_else(|| scenario.output_dir.clone())
            .unwrap_or_else(|| Path::new("reports").join(&scenario.name));
        fs::create_dir_all(&dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
        Some(dir)
    };
    let mut summary = json!({
        "tool": "dkit",
        "version": VERSION,
        "scenario": scenario.name,
        "scenario_sha256": hex(&Sha256::digest(raw)),
        "seed": seed,
        "source": scenario.source.kind(),
        "format": match opts.format { Format::Json => "json", Format::Csv => "csv" },
    });
    let mut reports = BTreeMap::new();
    let mut code = exit::OK;
    let finish = |mut summary: Value, code: u8, reports| -> Result<RunOutcome, CliError> {
        summary["exit_code"] = json!(code);
        if let Some(dir) = &out_dir {
            write_json(&dir.join("summary.json"), &summary)?;
        }
        Ok(RunOutcome {
            exit_code: code,
            out_dir: out_dir.clone(),
            summary: canonicalize(summary),
            reports,
        })
    };

    let built = match catch_unwind(AssertUnwindSafe(|| build_source(scenario, base_dir, seed))) {
        Ok(Ok(b)) => b,
        Ok(Err(e)) => {
            summary["source_error"] = json!(e.to_string());
            return finish(summary, e.exit_code(), reports);
        }
        Err(p) => {
            summary["source_error"] = json!(panic_message(p));
            return finish(summary, exit::CRASH, reports);
        }
    };
    if let Some(dir) = &out_dir {
        write_source_artifacts(&built, dir)?;
    }
    summary["events"] = json!(built.matrix().len());

    let mut suites = Map::new();
    let mut verdict = Value::Null;
    for suite in scenario.ordered_suites() {
        let result = catch_unwind(AssertUnwindSafe(|| run_suite(suite, scenario, &built, seed)));
        let result = match result {
            Ok(r) => r,
            Err(p) => Err(CliError::Suite(panic_message(p))),
        };
        let entry = match result {
            Ok(out) => {
                let expected = scenario
                    .expect
                    .get(&suite)
                    .cloned()
                    .unwrap_or_else(|| BTreeMap::from([("passed".to_string(), json!(true))]));
                let mismatches = if opts.check_expectations {
                    compare(&expected, &out.observed)
                } else {
                    Vec::new()
                };
                let matched = mismatches.is_empty();
                if !matched && code == exit::OK {
                    code = exit::MISMATCH;
                }
                if suite == Suite::Gate {
                    verdict = out.observed["verdict"].clone();
                }
                let doc = json!({
                    "suite": suite.name(),
                    "scenario": scenario.name,
                    "observed": out.observed,
                    "report": out.report,
                });
                if let Some(dir) = &out_dir {
                    write_suite(dir, suite, opts.format, &doc, &out)?;
                }
                reports.insert(suite.name().to_string(), canonicalize(doc));
                let mut e = json!({
                    "status": if !opts.check_expectations { "ran" } else if matched { "matched" } else { "mismatched" },
                    "observed": out.observed,
                });
                if opts.check_expectations {
                    e["expected"] = json!(expected);
                    if !matched {
                        e["mismatches"] = json!(mismatches);
                    }
                }
                e
            }
            Err(err) => {
                code = exit::CRASH;
                json!({ "status": "crashed", "error": err.to_string() })
            }
        };
        suites.insert(suite.name().to_string(), entry);
    }
    summary["suites"] = Value::Object(suites);
    summary["verdict"] = verdict;
    finish(summary, code, reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(text: &str) -> Scenario {
        Scenario::from_json(text).unwrap()
    }

    const F1: &str = r#"{
        "name": "f1",
        "source": {"type": "matrix", "fixture": "f1"},
        "suites": ["distinction"],
        "expect": {"distinction": {"future_d_distinction": false, "past_d_distinction": true}}
    }"#;

    #[test]
    fn matched_expectation_exits_zero() {
        let opts = RunOptions {
            dry: true,
            check_expectations: true,
            ..RunOptions::default()
        };
        let out = run(&scenario(F1), F1.as_bytes(), Path::new("."), &opts).unwrap();
        assert_eq!(out.exit_code, exit::OK, "{}", out.summary);
        assert_eq!(out.summary["suites"]["distinction"]["status"], "matched");
    }

    #[test]
    fn mismatch_exits_one() {
        let text = F1.replace("\"past_d_distinction\": true", "\"past_d_distinction\": false");
        let opts = RunOptions {
            dry: true,
            check_expectations: true,
            ..RunOptions::default()
        };
        let out = run(&scenario(&text), text.as_bytes(), Path::new("."), &opts).unwrap();
        assert_eq!(out.exit_code, exit::MISMATCH);
        assert!(out.summary["suites"]["distinction"]["mismatches"][0]
            .as_str()
            .unwrap()
            .contains("past_d_distinction"));
    }

    #[test]
    fn seed_resolution_order() {
        let text = r#"{
            "name": "c",
            "source": {"type": "causal_set", "model": {"kind": "minkowski", "box": [[-3,3],[-3,3]]},
                       "region": {"shape": "unit_diamond"}, "density": 20},
            "suites": ["axioms"]
        }"#;
        let s = scenario(text);
        let mut opts = RunOptions::default();
        assert!(matches!(resolve_seed(&s, &opts), Err(CliError::Parse(_))));
        opts.env_seed = Some("11".into());
        assert_eq!(resolve_seed(&s, &opts).unwrap(), 11);
        opts.seed = Some(3);
        assert_eq!(resolve_seed(&s, &opts).unwrap(), 3);
        opts.env_seed = Some("x".into());
        assert!(resolve_seed(&s, &opts).is_err());
    }

    #[test]
    fn float_comparison_uses_rounded_values() {
        let e = BTreeMap::from([("r".to_string(), json!(2.0))]);
        let o = BTreeMap::from([("r".to_string(), json!(2.0000000000000004))]);
        assert!(compare(&e, &o).is_empty());
        let o = BTreeMap::from([("s".to_string(), json!(1))]);
        assert_eq!(compare(&e, &o).len(), 1);
    }
}
