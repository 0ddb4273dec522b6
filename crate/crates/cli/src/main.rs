mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Ctx;
use crate::config::WcBlock;
use crate::output::Output;

#[derive(Debug)]
pub enum CliError {
    /// Bad or incomplete configuration (exit 2).
    Config(String),
    /// Numerical or I/O failure after validation (exit 3).
    Runtime(String),
}

#[derive(Parser)]
#[command(name = "hopfduet", version, about = "Two coupled Hopf oscillators: normal form and Wilson-Cowan pair")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named Wilson-Cowan parameter set (only `paperP`).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory (overrides HOPFDUET_OUTDIR and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand)]
enum Group {
    /// Truncated normal form.
    #[command(subcommand)]
    Nf(NfCmd),
    /// Wilson-Cowan pair.
    #[command(subcommand)]
    Wc(WcCmd),
}

#[derive(Subcommand, Clone, Copy)]
enum NfCmd {
    /// Analytic boundary curves and region predicates.
    Curves,
    /// Trajectories from one or more initial conditions.
    Sim,
    /// Attractor labels at a point, or over a (lambda, eps) grid.
    Classify,
}

#[derive(Subcommand, Clone, Copy)]
enum WcCmd {
    /// Normal-form coefficients at the Hopf point.
    Extract,
    Sim,
    /// Two-parameter attractor map.
    Sweep,
    /// Follow one periodic orbit in a parameter.
    Branch,
    /// Attractor map of the periodically forced pair.
    ForcedSweep,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (mut cfg, base) = config::load(cli.config.as_deref())?;
    let command = match cli.group {
        Group::Nf(c) => match c {
            NfCmd::Curves => "nf-curves",
            NfCmd::Sim => "nf-sim",
            NfCmd::Classify => "nf-classify",
        },
        Group::Wc(c) => match c {
            WcCmd::Extract => "wc-extract",
            WcCmd::Sim => "wc-sim",
            WcCmd::Sweep => "wc-sweep",
            WcCmd::Branch => "wc-branch",
            WcCmd::ForcedSweep => "wc-forced-sweep",
        },
    };
    if let Some(p) = cli.preset {
        if matches!(cli.group, Group::Nf(_)) {
            return Err(CliError::Config("--preset: applies to wc commands only".into()));
        }
        let wc = cfg.wc.get_or_insert_with(WcBlock::default);
        match &wc.preset {
            Some(q) if *q != p => {
                return Err(CliError::Config(format!("--preset: '{p}' conflicts with wc.preset '{q}'")));
            }
            _ => wc.preset = Some(p),
        }
    }
    let jobs = match cli.jobs {
        Some(0) => return Err(CliError::Config("--jobs: must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let dir = cli
        .out
        .or_else(|| std::env::var_os("HOPFDUET_OUTDIR").map(PathBuf::from))
        .or_else(|| cfg.output_dir())
        .unwrap_or_else(|| PathBuf::from("."));
    let hash = cfg.hash(command);
    let mut ctx = Ctx {
        cfg,
        base,
        out: Output::new(command, hash),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    pool.install(|| match cli.group {
        Group::Nf(NfCmd::Curves) => commands::nf_curves(&mut ctx),
        Group::Nf(NfCmd::Sim) => commands::nf_sim(&mut ctx),
        Group::Nf(NfCmd::Classify) => commands::nf_classify(&mut ctx),
        Group::Wc(WcCmd::Extract) => commands::wc_extract(&mut ctx),
        Group::Wc(WcCmd::Sim) => commands::wc_sim(&mut ctx),
        Group::Wc(WcCmd::Sweep) => commands::wc_sweep(&mut ctx),
        Group::Wc(WcCmd::Branch) => commands::wc_branch(&mut ctx),
        Group::Wc(WcCmd::ForcedSweep) => commands::wc_forced_sweep(&mut ctx),
    })?;
    for f in ctx.out.commit(&dir)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
