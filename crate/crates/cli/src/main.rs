//! `da-thermo`: batch front end writing JSON/CSV artifacts and run manifests.

// `!(x > y)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod store;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::Command;
use config::JobConfig;
use error::CliError;
use store::{config_hash, Manifest, Store, Versions};

const OUT_ENV: &str = "DA_THERMO_OUT";
const OUT_DEFAULT: &str = "da-thermo-out";

#[derive(Parser)]
#[command(name = "da-thermo", version, about = "Thermodynamic formalism for derived-from-Anosov maps")]
struct Cli {
    /// JSON job configuration; built-in demo defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root (falls back to the config, then $DA_THERMO_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Recompute even when a manifest for this command and config exists.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigen-splitting of the base automorphism.
    Spectral,
    /// Build the map and audit class membership.
    BuildMap,
    /// Pressure `P(φ)` by separated sets.
    Pressure,
    /// `t ↦ P(tφ)` on the configured grid, with its root.
    PressureCurve,
    /// Orbit decompositions and the collection-pressure bound.
    DecomposeAudit,
    Criteria {
        #[command(subcommand)]
        which: CriteriaCmd,
    },
    /// Lyapunov spectrum by QR iteration.
    Lyapunov,
    /// Empirical SRB histogram and split-half test.
    Srb,
    /// Legendre spectrum of the geometric pressure curve.
    Spectrum,
    /// Large-deviation fractions of Birkhoff averages.
    Ldp,
    /// Shadow random pseudo-orbits of the base automorphism.
    Shadow,
    /// Glue orbit segments with the measured transition time.
    Glue,
}

#[derive(Subcommand)]
enum CriteriaCmd {
    TheoremA,
    BoundedRange,
    Srb,
    #[command(name = "threshold-T")]
    ThresholdT,
    DeltaGap,
}

impl Cmd {
    fn command(&self) -> Command {
        match self {
            Cmd::Spectral => Command::Spectral,
            Cmd::BuildMap => Command::BuildMap,
            Cmd::Pressure => Command::Pressure,
            Cmd::PressureCurve => Command::PressureCurve,
            Cmd::DecomposeAudit => Command::DecomposeAudit,
            Cmd::Criteria { which } => match which {
                CriteriaCmd::TheoremA => Command::TheoremA,
                CriteriaCmd::BoundedRange => Command::BoundedRange,
                CriteriaCmd::Srb => Command::SrbCriterion,
                CriteriaCmd::ThresholdT => Command::ThresholdT,
                CriteriaCmd::DeltaGap => Command::DeltaGap,
            },
            Cmd::Lyapunov => Command::Lyapunov,
            Cmd::Srb => Command::Srb,
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Ldp => Command::Ldp,
            Cmd::Shadow => Command::Shadow,
            Cmd::Glue => Command::Glue,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => JobConfig::load(p)?,
        None => JobConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    cfg.validate()?;
    let root = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(OUT_DEFAULT));
    let store = Store::open(&root)?;
    let command = cli.cmd.command();
    let hash = config_hash(&cfg);
    let mut stdout = std::io::stdout().lock();

    if !cli.no_cache {
        if let Some(p) = store.cached(command.name(), &hash) {
            eprintln!("cached: {}", p.display());
            stdout.write_all(&std::fs::read(&p)?)?;
            return Ok(());
        }
    }

    let workers = cfg.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(format!("worker pool: {e}")))?;
    let start = Instant::now();
    let out = pool.install(|| command.run(&cfg))?;
    let wall = start.elapsed().as_secs_f64();

    let artifacts = out.artifacts.iter().map(|a| store.put(a)).collect::<Result<Vec<_>, _>>()?;
    let manifest = Manifest {
        command: command.name().into(),
        config: cfg.canonical(),
        config_hash: hash,
        versions: Versions { core: da_thermo::VERSION.into(), cli: env!("CARGO_PKG_VERSION").into() },
        seed: cfg.seed,
        workers,
        wall_time_s: wall,
        artifacts,
        summary: out.summary,
    };
    let path = store.put_manifest(&manifest)?;
    if let Some(text) = out.text {
        stdout.write_all(text.as_bytes())?;
    }
    writeln!(stdout, "{}", serde_json::to_string_pretty(&manifest.summary).expect("serialisable"))?;
    eprintln!("manifest: {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
