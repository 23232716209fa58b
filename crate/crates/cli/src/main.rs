use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use b1calc_core::dsl::report::SCHEMA_VERSION;
use b1calc_core::dsl::{demos, run_source, Format, RunConfig};
use b1calc_core::finite_space::{
    check_fsigma_characterization, functions_from_json, is_continuous, zero_set_is_gdelta, FiniteTopology,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "b1calc", version, about = "Pointwise limits of continuous functions: scripts, demos and finite-space checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        }
    }
}

#[derive(clap::Args)]
struct RunOpts {
    /// Evaluation tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Deepest term index probed when a sequence has no modulus.
    #[arg(long, env = "B1CALC_DEPTH_CAP", default_value_t = 1 << 20)]
    depth_cap: u64,
    /// Grid spacing for interval domains.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

impl RunOpts {
    fn config(&self, base_dir: PathBuf, default_step: Option<f64>) -> RunConfig {
        let d = RunConfig::default();
        RunConfig {
            tol: self.tol,
            depth_cap: self.depth_cap,
            step: self.step.or(default_step).unwrap_or(d.step),
            seed: self.seed,
            format: self.format.into(),
            base_dir,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a script and print one report per command.
    Run {
        script: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a built-in example script.
    Demo {
        #[arg(value_parser = ["xn", "extension", "intersection"])]
        name: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Validation utilities.
    Check {
        #[command(subcommand)]
        what: CheckCmd,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Validate a finite topology and analyse the functions listed with it.
    Finite { topology: PathBuf },
}

fn run_script(src: &str, cfg: &RunConfig) -> ExitCode {
    let out = run_source(src, cfg);
    print!("{}", out.render(cfg.format));
    if out.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn check_finite(path: &Path) -> Result<ExitCode> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let t = FiniteTopology::from_json(&v)?;
    if let Err(violation) = t.validate() {
        let report = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "cmd": "check",
            "kind": "finite",
            "valid": false,
            "violation": violation,
        });
        println!("{report}");
        return Ok(ExitCode::FAILURE);
    }
    let labels = |s: u64| t.labels(s);
    let mut functions = serde_json::Map::new();
    for (name, f) in functions_from_json(&t, &v)? {
        let fs = check_fsigma_characterization(&f, &t);
        functions.insert(
            name,
            serde_json::json!({
                "values": f.values,
                "continuous": is_continuous(&f, &t),
                "fsigma": fs.pass,
                "intervals": fs.intervals,
                "zero_set": labels(f.zero_set()),
                "zero_set_gdelta": zero_set_is_gdelta(&f, &t),
            }),
        );
    }
    // point -> points whose closure contains it
    let specialization: serde_json::Map<String, serde_json::Value> = t
        .points()
        .iter()
        .zip(t.specialization())
        .map(|(p, above)| (p.clone(), serde_json::json!(labels(above))))
        .collect();
    let components: Vec<Vec<String>> = t.components().into_iter().map(labels).collect();
    let report = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "cmd": "check",
        "kind": "finite",
        "valid": true,
        "points": t.points(),
        "closed_sets": t.opens().iter().map(|&o| labels(t.full() & !o)).collect::<Vec<_>>(),
        "specialization": specialization,
        "components": components,
        "functions": functions,
    });
    println!("{report}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Run { script, opts } => {
            let src = std::fs::read_to_string(&script).with_context(|| format!("reading {}", script.display()))?;
            let base = script.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok(run_script(&src, &opts.config(base, None)))
        }
        Cmd::Demo { name, opts } => {
            let (src, step) = demos::by_name(&name).context("unknown demo")?;
            Ok(run_script(src, &opts.config(PathBuf::from("."), step)))
        }
        Cmd::Check { what: CheckCmd::Finite { topology } } => check_finite(&topology),
    }
}
