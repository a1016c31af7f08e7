//! Command-line interface.
//!
//! Four subcommands: `gsa1` and `gsa2` execute studies described by a TOML
//! run file and emit a JSON artifact; `bench` runs the bundled calibration
//! scenarios and emits CSV; `validate` checks a run file without spending
//! model evaluations.
//!
//! Exit codes: `0` success, `2` missing input file, `3` configuration or
//! schema violation, `4` degenerate statistics (a study that cannot be
//! estimated from the given data), `1` anything else.

use crate::bench::{self, BenchOptions, Scenario};
use crate::config::{build_product, RunConfig};
use crate::dist::ProductDist;
use crate::error::{Error, Result};
use crate::gsa2::{self, double_loop, single_loop, DoubleLoopConfig, LawDraws, SingleLoopConfig};
use crate::hsic::SampleSet;
use crate::io;
use crate::rng::stream;
use crate::weighted::{self, make_weights};
use clap::{Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Seed used when neither the run file nor `--seed` provides one.
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "sensic",
    version,
    about = "Kernel-based global sensitivity analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a first-level study (per-input HSIC indices and tests).
    Gsa1 {
        /// TOML run file with a [gsa1] section.
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON artifact here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the run file's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a second-level study (sensitivity to the input laws).
    Gsa2 {
        /// TOML run file with a [gsa2] section.
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON artifact here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the run file's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the bundled benchmark scenarios and emit CSV.
    Bench {
        /// One scenario (gsa1-convergence, gsa2-convergence,
        /// budget-comparison, bootstrap-stability); default: all.
        #[arg(long)]
        scenario: Option<String>,
        /// Replicates per cell (default 50).
        #[arg(long)]
        reps: Option<usize>,
        /// Run the full-scale grids instead of the desk-scale defaults.
        #[arg(long)]
        full: bool,
        /// Master seed for the replicate streams.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the CSV report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Size of the worker thread pool (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a run file and report what it resolves to.
    Validate {
        /// TOML run file.
        #[arg(long)]
        config: PathBuf,
    },
}

/// Map an error to the documented process exit code.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(e) if e.kind() == std::io::ErrorKind::NotFound => 2,
        Error::Config(_)
        | Error::CsvData { .. }
        | Error::InvalidParameter(_)
        | Error::UnsupportedEnumeration(_) => 3,
        Error::DegenerateSample(_)
        | Error::TestDegenerate(_)
        | Error::SupportMismatch(_)
        | Error::SupportViolation(_)
        | Error::HeavyTailWeights(_)
        | Error::SampleSize(_)
        | Error::Domain(_) => 4,
        _ => 1,
    }
}

/// Parse the process arguments, execute, and return the exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gsa1 { config, out, seed } => run_gsa1(&config, out.as_deref(), seed),
        Command::Gsa2 { config, out, seed } => run_gsa2(&config, out.as_deref(), seed),
        Command::Bench {
            scenario,
            reps,
            full,
            seed,
            out,
            threads,
        } => run_bench(scenario, reps, full, seed, out.as_deref(), threads),
        Command::Validate { config } => run_validate(&config),
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    RunConfig::from_toml(&io::read_to_string(path)?)
}

/// Emit a JSON artifact to a file (atomically) or stdout.
fn emit_json<T: Serialize>(out: Option<&Path>, artifact: &T) -> Result<()> {
    match out {
        Some(path) => io::write_json_atomic(path, artifact),
        None => {
            let text = serde_json::to_string_pretty(artifact)
                .map_err(|e| Error::Config(format!("artifact serialization failed: {e}")))?;
            println!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Gsa1InputReport {
    name: String,
    hsic: f64,
    r2: f64,
    gamma_pvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    perm_pvalue: Option<f64>,
}

#[derive(Serialize)]
struct Gsa1Artifact {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    n: usize,
    reweighted: bool,
    inputs: Vec<Gsa1InputReport>,
    config: RunConfig,
}

fn run_gsa1(config_path: &Path, out: Option<&Path>, seed_flag: Option<u64>) -> Result<()> {
    let mut cfg = load_config(config_path)?;
    let g = cfg
        .gsa1
        .clone()
        .ok_or_else(|| Error::Config("run file has no [gsa1] section".into()))?;
    let seed = seed_flag.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    cfg.seed = Some(seed);

    let target = build_product(&g.target)?;
    let sampling: ProductDist = match &g.sampling {
        Some(specs) => build_product(specs)?,
        None => target.clone(),
    };
    if sampling.dim() != target.dim() {
        return Err(Error::Config(format!(
            "target has {} coordinates but sampling has {}",
            target.dim(),
            sampling.dim()
        )));
    }

    let (sample, input_names) = match &cfg.data {
        Some(data) => {
            let csv = io::read_sample_csv(Path::new(&data.path))?;
            if csv.inputs.ncols() != target.dim() {
                return Err(Error::Config(format!(
                    "{} has {} input columns but the run file declares {} laws",
                    data.path,
                    csv.inputs.ncols(),
                    target.dim()
                )));
            }
            (
                SampleSet::new(csv.inputs, csv.outputs, sampling.clone())?,
                csv.input_names,
            )
        }
        None => {
            let model = cfg
                .model
                .as_ref()
                .ok_or_else(|| {
                    Error::Config("run file needs [model] or [data] to obtain a sample".into())
                })?
                .build()?;
            let n = g.n.ok_or_else(|| {
                Error::Config("gsa1.n is required when generating from a model".into())
            })?;
            let mut rng = stream(seed, &[10]);
            let inputs = sampling.sample(n, &mut rng);
            let outputs = gsa2::evaluate_model(&model, inputs.view())?;
            let names = (1..=target.dim()).map(|k| format!("x{k}")).collect();
            (SampleSet::new(inputs, outputs, sampling.clone())?, names)
        }
    };

    let reweighted = target != sampling;
    let weights = make_weights(target, sampling, sample.inputs())?;
    let b = g.b.unwrap_or(0);
    let mut inputs_report = Vec::with_capacity(sample.dim());
    for k in 0..sample.dim() {
        let hsic = weighted::whsic(&sample, &weights, k)?.value;
        let r2 = weighted::wr2_hsic(&sample, &weights, k)?;
        let gamma_pvalue = weighted::wgamma_pvalue(&sample, &weights, k)?;
        let perm_pvalue = if b > 0 {
            let mut rng = stream(seed, &[11, k as u64]);
            Some(weighted::wperm_pvalue(&sample, &weights, k, b, &mut rng)?)
        } else {
            None
        };
        inputs_report.push(Gsa1InputReport {
            name: input_names[k].clone(),
            hsic,
            r2,
            gamma_pvalue,
            perm_pvalue,
        });
    }

    emit_json(
        out,
        &Gsa1Artifact {
            tool: "sensic",
            version: env!("CARGO_PKG_VERSION"),
            command: "gsa1",
            seed,
            n: sample.n(),
            reweighted,
            inputs: inputs_report,
            config: cfg,
        },
    )
}

#[derive(Serialize)]
struct Gsa2Artifact {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    loop_kind: &'static str,
    law_tuples: usize,
    model_evals: usize,
    hsic2: Vec<f64>,
    r2_2: Vec<f64>,
    ranking: Vec<String>,
    config: RunConfig,
}

fn run_gsa2(config_path: &Path, out: Option<&Path>, seed_flag: Option<u64>) -> Result<()> {
    let mut cfg = load_config(config_path)?;
    let g = cfg
        .gsa2
        .clone()
        .ok_or_else(|| Error::Config("run file has no [gsa2] section".into()))?;
    let seed = seed_flag.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    cfg.seed = Some(seed);

    let model = cfg
        .model
        .as_ref()
        .ok_or_else(|| Error::Config("second-level studies need a [model]".into()))?
        .build()?;
    let priors = g
        .priors
        .iter()
        .map(|p| p.build())
        .collect::<Result<Vec<_>>>()?;
    if priors.is_empty() {
        return Err(Error::Config("gsa2.priors must not be empty".into()));
    }
    let qoi = g.qoi_kind()?;
    let law_draws = if g.exhaustive.unwrap_or(false) {
        LawDraws::Exhaustive
    } else {
        let n1 = g
            .n1
            .ok_or_else(|| Error::Config("gsa2.n1 is required unless exhaustive = true".into()))?;
        LawDraws::Random(n1)
    };
    let dispersion = g.dispersion_convention()?;
    let mut rng = stream(seed, &[20]);
    let loop_kind = g.loop_kind.unwrap_or(crate::config::LoopKind::Single);
    let result = match loop_kind {
        crate::config::LoopKind::Single => {
            let mut slc = SingleLoopConfig::new(g.reference_spec()?, qoi, law_draws, g.n2);
            slc.dispersion = dispersion;
            single_loop(&priors, &model, &slc, &mut rng)?
        }
        crate::config::LoopKind::Double => {
            let mut dlc = DoubleLoopConfig::new(qoi, law_draws, g.n2);
            dlc.dispersion = dispersion;
            double_loop(&priors, &model, &dlc, &mut rng)?
        }
    };

    let ranking = result
        .ranking()
        .indices()
        .iter()
        .map(|&k| format!("x{}", k + 1))
        .collect();
    emit_json(
        out,
        &Gsa2Artifact {
            tool: "sensic",
            version: env!("CARGO_PKG_VERSION"),
            command: "gsa2",
            seed,
            loop_kind: match loop_kind {
                crate::config::LoopKind::Single => "single",
                crate::config::LoopKind::Double => "double",
            },
            law_tuples: result.audit.laws.len(),
            model_evals: result.audit.model_evals,
            hsic2: result.hsic2.clone(),
            r2_2: result.r2_2.clone(),
            ranking,
            config: cfg,
        },
    )
}

fn run_bench(
    scenario: Option<String>,
    reps: Option<usize>,
    full: bool,
    seed: Option<u64>,
    out: Option<&Path>,
    threads: Option<usize>,
) -> Result<()> {
    if let Some(t) = threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .is_err()
        {
            eprintln!("warning: worker pool already initialized; --threads ignored");
        }
    }
    let mut opts = BenchOptions {
        full,
        ..BenchOptions::default()
    };
    if let Some(r) = reps {
        opts.reps = r;
    }
    if let Some(s) = seed {
        opts.seed = s;
    }
    let report = match scenario {
        Some(name) => bench::run_scenario(name.parse::<Scenario>()?, &opts)?,
        None => bench::run_all(&opts)?,
    };
    match out {
        Some(path) => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            io::write_atomic(path, &buf)
        }
        None => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            print!("{}", String::from_utf8_lossy(&buf));
            Ok(())
        }
    }
}

fn run_validate(config_path: &Path) -> Result<()> {
    let cfg = load_config(config_path)?;
    let mut checked = 0usize;
    if let Some(model) = &cfg.model {
        let m = model.build()?;
        println!("ok: model '{}' (coef {})", model.builtin, m.coef);
        checked += 1;
    }
    if let Some(data) = &cfg.data {
        let csv = io::read_sample_csv(Path::new(&data.path))?;
        println!(
            "ok: data '{}' ({} rows, {} input columns, output '{}')",
            data.path,
            csv.outputs.len(),
            csv.inputs.ncols(),
            csv.output_name
        );
        checked += 1;
    }
    if let Some(g) = &cfg.gsa1 {
        let target = build_product(&g.target)?;
        let sampling = match &g.sampling {
            Some(specs) => build_product(specs)?,
            None => target.clone(),
        };
        if sampling.dim() != target.dim() {
            return Err(Error::Config(format!(
                "target has {} coordinates but sampling has {}",
                target.dim(),
                sampling.dim()
            )));
        }
        if let Some(data) = &cfg.data {
            let csv = io::read_sample_csv(Path::new(&data.path))?;
            if csv.inputs.ncols() != target.dim() {
                return Err(Error::Config(format!(
                    "{} has {} input columns but the run file declares {} laws",
                    data.path,
                    csv.inputs.ncols(),
                    target.dim()
                )));
            }
        } else {
            if cfg.model.is_none() {
                return Err(Error::Config(
                    "run file needs [model] or [data] to obtain a sample".into(),
                ));
            }
            if g.n.is_none() {
                return Err(Error::Config(
                    "gsa1.n is required when generating from a model".into(),
                ));
            }
        }
        println!(
            "ok: gsa1 ({} inputs, {})",
            target.dim(),
            if g.sampling.is_some() {
                "reweighted estimation"
            } else {
                "direct estimation"
            }
        );
        checked += 1;
    }
    if let Some(g) = &cfg.gsa2 {
        if cfg.model.is_none() {
            return Err(Error::Config("second-level studies need a [model]".into()));
        }
        let priors = g
            .priors
            .iter()
            .map(|p| p.build())
            .collect::<Result<Vec<_>>>()?;
        if priors.is_empty() {
            return Err(Error::Config("gsa2.priors must not be empty".into()));
        }
        let qoi = g.qoi_kind()?;
        g.reference_spec()?;
        g.dispersion_convention()?;
        if !g.exhaustive.unwrap_or(false) && g.n1.is_none() {
            return Err(Error::Config(
                "gsa2.n1 is required unless exhaustive = true".into(),
            ));
        }
        println!(
            "ok: gsa2 ({} priors, qoi {:?}, n2 {})",
            priors.len(),
            qoi,
            g.n2
        );
        checked += 1;
    }
    if checked == 0 {
        return Err(Error::Config(
            "run file declares nothing to do (no [model], [data], [gsa1], or [gsa2])".into(),
        ));
    }
    println!("valid: {config_path:?}");
    Ok(())
}
