use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hel::dual;
use hel::energy::energy_report;
use hel::generators::FamilySpec;
use hel::harness::{self, Input, Suite};
use hel::spectral::{self, build_symmetric, OperatorKind};
use hel::structure;
use hel::{FiniteSet, GroupFunction};

#[derive(Parser)]
#[command(name = "hel", version, about = "Higher energies, convolution spectra and structure extraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct Source {
    /// Set file: {"group": ..., "elements": [...]}.
    #[arg(long)]
    set: Option<PathBuf>,
    /// Family spec, e.g. `convex:kind=squares:n=64`.
    #[arg(long)]
    family: Option<String>,
}

impl Source {
    fn load(&self) -> Result<Input> {
        if let Some(spec) = &self.family {
            return Ok(Input::from_spec(&FamilySpec::parse(spec)?)?);
        }
        let path = self.set.as_ref().expect("clap enforces one source");
        load_set_file(path)
    }
}

fn load_set_file(path: &PathBuf) -> Result<Input> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(spec) = v.get("spec").and_then(Value::as_str) {
        let parsed = FamilySpec::parse(spec)?;
        let input = Input::from_spec(&parsed)?;
        let (set, _) = FiniteSet::from_json(&v)?;
        if set == input.set {
            return Ok(input);
        }
    }
    let (set, warnings) = FiniteSet::from_json(&v)?;
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(Input::from_set(path.display().to_string(), set))
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Identities,
    Explicit,
    Asymptotic,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Identities => Suite::Identities,
            SuiteArg::Explicit => Suite::Explicit,
            SuiteArg::Asymptotic => Suite::Asymptotic,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Pipeline {
    E3,
    E4m,
    E4t4,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceKind {
    Convex,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a set from a family spec.
    Gen {
        spec: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energies, moments and doubling of a set.
    Compute {
        #[command(flatten)]
        source: Source,
        /// Extra moments E_s to report.
        #[arg(long)]
        s: Vec<f64>,
    },
    /// Spectrum of the symmetric operator T^g_A.
    Spectrum {
        #[command(flatten)]
        source: Source,
        /// `autocorr` for g = A∘A, or a weight file.
        #[arg(long, default_value = "autocorr")]
        weight: String,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Dual pair and its bounds for E_k.
    Dual {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Structure extraction with certificate.
    Extract {
        pipeline: Pipeline,
        #[command(flatten)]
        source: Source,
        /// Moment exponent for the e4m pipeline.
        #[arg(long, default_value_t = 2.0)]
        s: f64,
    },
    /// Step-by-step trace of the convex energy argument.
    Trace {
        kind: TraceKind,
        #[command(flatten)]
        source: Source,
    },
    /// Run a check suite and write a report.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long)]
        family: Vec<String>,
        #[arg(long)]
        set: Vec<PathBuf>,
        /// Glob over check ids.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Record wall-clock time per check.
        #[arg(long)]
        timing: bool,
    },
    /// List registered checks.
    Checks,
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn print_json(v: &Value) -> Result<()> {
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn relations_json(rel: &[hel::relation::Relation]) -> Value {
    Value::Array(rel.iter().map(|r| r.to_json()).collect())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { spec, out } => {
            let spec = FamilySpec::parse(&spec)?;
            let g = spec.generate()?;
            let mut v = g.set.to_json();
            v["spec"] = spec.to_string().into();
            v["tags"] = json!(g.tags);
            v["digest"] = g.set.digest().into();
            emit(out.as_ref(), &(serde_json::to_string_pretty(&v)? + "\n"))?;
        }
        Command::Compute { source, s } => {
            let input = source.load()?;
            let mut v = serde_json::to_value(energy_report(&input.set, &s)?)?;
            v["input_digest"] = input.digest.into();
            v["tags"] = json!(input.tags);
            print_json(&v)?;
        }
        Command::Spectrum { source, weight, top } => {
            let input = source.load()?;
            let a = &input.set;
            let g = if weight == "autocorr" {
                hel::convolution::autocorrelation(a).to_real()
            } else {
                let text = std::fs::read_to_string(&weight).with_context(|| format!("reading {weight}"))?;
                GroupFunction::<f64>::from_json(&serde_json::from_str(&text)?)?
            };
            let op = build_symmetric(OperatorKind::SymDifference, a, &g)?;
            let dec = op.decompose()?;
            let mut checks = spectral::audit(&op, &dec);
            checks.extend(spectral::trace_laws(&op, &dec));
            print_json(&json!({
                "input_digest": input.digest,
                "size": a.len(),
                "eigenvalues": dec.values.iter().take(top).collect::<Vec<_>>(),
                "means": dec.means.iter().take(top).collect::<Vec<_>>(),
                "main_vector": dec.main_vector(),
                "sweeps": dec.sweeps,
                "relations": relations_json(&checks),
            }))?;
        }
        Command::Dual { source, k } => {
            let input = source.load()?;
            let (pair, rel) = dual::dual_bounds_check(&input.set, k)?;
            print_json(&json!({
                "input_digest": input.digest,
                "pair": pair.to_json(),
                "relations": relations_json(&rel),
            }))?;
        }
        Command::Extract { pipeline, source, s } => {
            let input = source.load()?;
            let cert = match pipeline {
                Pipeline::E3 => structure::pipeline_e3(&input.set)?,
                Pipeline::E4m => structure::pipeline_e4m(&input.set, s)?,
                Pipeline::E4t4 => structure::pipeline_e4t4(&input.set)?,
            };
            print_json(&cert.to_json())?;
        }
        Command::Trace { kind: TraceKind::Convex, source } => {
            let input = source.load()?;
            print_json(&structure::convex_pipeline_trace(&input.set)?.to_json())?;
        }
        Command::Verify { suite, family, set, filter, out, format, timing } => {
            if family.is_empty() && set.is_empty() {
                bail!("verify needs at least one --family or --set");
            }
            let mut inputs = Vec::new();
            for f in &family {
                inputs.push(Input::from_spec(&FamilySpec::parse(f)?)?);
            }
            for p in &set {
                inputs.push(load_set_file(p)?);
            }
            let results = harness::run_suite(suite.into(), &inputs, filter.as_deref(), timing)?;
            let text = match format {
                Format::Json => harness::report_json(&results),
                Format::Csv => harness::report_csv(&results)?,
            };
            emit(out.as_ref(), &text)?;
            let failed = results.iter().filter(|r| r.failed()).count();
            let skipped = results.iter().filter(|r| r.skipped.is_some()).count();
            eprintln!("{} rows, {failed} failed, {skipped} skipped", results.len());
            return Ok(ExitCode::from(harness::exit_code(&results) as u8));
        }
        Command::Checks => {
            let mut out = std::io::stdout().lock();
            for d in harness::registry() {
                if writeln!(out, "{:<34} {:<10} {}", d.check_id, d.kind.as_str(), d.paper_ref).is_err() {
                    break;
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
