use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use nvps::io::{replay, run, Command, RunConfig, RunOptions};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Simulate ODMR, time traces and emission spectra of an NV centre near a
/// metal nanoparticle.
#[derive(Parser)]
#[command(name = "nvps", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stationary PL versus microwave frequency.
    Odmr(Common),
    /// PL transients after spin-0 and spin-±1 preparation.
    Trace(Common),
    /// Stationary emission spectrum.
    Spectrum(Common),
    /// ODMR figures of merit versus intensity, or PL versus tilt angle.
    Sweep(Common),
    /// Figures of merit of an existing ODMR curve.
    Fom {
        #[command(flatten)]
        common: Common,
        /// ODMR CSV (columns freq_GHz, PL); overrides [fom] curve.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Reference ODMR CSV for enhancement ratios.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Re-run a manifest and check that every output is byte-identical.
    Replay {
        manifest: PathBuf,
        /// Where to write the re-run outputs (default: a fresh temporary directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Also write a matplotlib script per CSV.
    #[arg(long)]
    plot: bool,
    /// Also dump H, the collapse channels and the generator as CSV.
    #[arg(long)]
    dump_matrices: bool,
}

fn set_threads(n: Option<usize>) -> anyhow::Result<()> {
    if let Some(n) = n {
        if n == 0 {
            bail!(nvps::Error::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn load_config(path: Option<&Path>) -> anyhow::Result<RunConfig> {
    match path {
        Some(p) => Ok(RunConfig::from_path(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn execute(command: Command, c: &Common, config: RunConfig) -> anyhow::Result<()> {
    set_threads(c.threads)?;
    let options = RunOptions {
        plot: c.plot,
        dump_matrices: c.dump_matrices,
    };
    let report = run(command, &config, &c.out, options)?;
    for o in &report.outputs {
        println!("wrote {}", c.out.join(&o.file).display());
    }
    println!("wrote {}", c.out.join(nvps::io::MANIFEST).display());
    println!("{}", serde_json::to_string_pretty(&report.summary)?);
    Ok(())
}

fn main_inner(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Cmd::Odmr(c) => execute(Command::Odmr, &c, load_config(c.config.as_deref())?),
        Cmd::Trace(c) => execute(Command::Trace, &c, load_config(c.config.as_deref())?),
        Cmd::Spectrum(c) => execute(Command::Spectrum, &c, load_config(c.config.as_deref())?),
        Cmd::Sweep(c) => execute(Command::Sweep, &c, load_config(c.config.as_deref())?),
        Cmd::Fom { common, curve, reference } => {
            let mut config = load_config(common.config.as_deref())?;
            let abs = |p: PathBuf| std::path::absolute(&p).with_context(|| format!("resolving {}", p.display()));
            if let Some(p) = curve {
                config.fom.curve = Some(abs(p)?);
            }
            if let Some(p) = reference {
                config.fom.reference = Some(abs(p)?);
            }
            execute(Command::Fom, &common, config)
        }
        Cmd::Replay { manifest, out, threads } => {
            set_threads(threads)?;
            let out = out.unwrap_or_else(|| std::env::temp_dir().join(format!("nvps-replay-{}", std::process::id())));
            let report = replay(&manifest, &out)?;
            println!("replayed into {}", out.display());
            if report.is_identical() {
                println!("all {} outputs identical", report.checked);
                Ok(())
            } else {
                for m in &report.mismatches {
                    println!("MISMATCH {m}");
                }
                bail!("replay differs from the manifest in {} place(s)", report.mismatches.len())
            }
        }
    }
}

/// 2 for bad input, 3 for solver failures, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    use nvps::Error as E;
    match err.downcast_ref::<E>() {
        Some(e) if e.is_solver() => 3,
        Some(E::AtPoint { .. }) => 3,
        Some(E::Config(_) | E::Usage(_) | E::Domain(_) | E::Range(_) | E::Consistency(_) | E::Data { .. }) => 2,
        Some(E::Assembly(_)) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
