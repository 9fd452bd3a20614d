use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qnet_cli::analysis::{pst, rates, reconstruct, simulate};
use qnet_cli::{process, read_records, storage, table1, write_records, write_report, CliError, CliResult, RunContext, RunManifest};
use qnet_core::netsim::{ExperimentKind, SettingsPlan};
use qnet_core::tomo::dump::write_matrix;
use qnet_core::tomo::settings::default_phase_count;

#[derive(Parser, Debug)]
#[command(name = "qnet", version, about = "Two-node trapped-ion network simulator and analysis")]
struct Cli {
    /// Calibration file (TOML); the shipped calibration when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Shot count; the meaning depends on the subcommand.
    #[arg(long, global = true)]
    shots: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "QNET_OUT", default_value = "qnet-out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Plan {
    Partial,
    Full,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate shots and write a record file.
    Simulate {
        kind: ExperimentKind,
        #[arg(long, value_enum, default_value = "partial")]
        plan: Plan,
        /// Parity phases for the partial plan.
        #[arg(long)]
        phases: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        storage_ms: f64,
    },
    /// Full maximum-likelihood tomography of a record file.
    Reconstruct {
        records: PathBuf,
        #[arg(long, default_value_t = 0)]
        resamples: usize,
    },
    /// Partial tomography (population + parity) of a record file.
    Pst {
        records: PathBuf,
        #[arg(long, default_value_t = 200)]
        resamples: usize,
    },
    /// Gate process tomography and transfer metrics.
    Process {
        #[arg(long, default_value_t = 10_000)]
        mc_samples: usize,
    },
    /// Storage sweeps with decay fits.
    Storage {
        #[arg(long, default_value_t = 0)]
        resamples: usize,
    },
    /// Every row of the entanglement summary table.
    Table1 {
        #[arg(long, default_value_t = 200)]
        resamples: usize,
    },
    /// Rate statistics of a record file.
    Rates { records: PathBuf },
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate { .. } => "simulate",
        Command::Reconstruct { .. } => "reconstruct",
        Command::Pst { .. } => "pst",
        Command::Process { .. } => "process",
        Command::Storage { .. } => "storage",
        Command::Table1 { .. } => "table1",
        Command::Rates { .. } => "rates",
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Infeasible("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(e.to_string()))?;
    }
    let ctx = RunContext::load(cli.config.as_deref(), cli.seed)?;
    for w in &ctx.cal.warnings {
        eprintln!("warning: {w}");
    }
    let out: &Path = &cli.out;
    std::fs::create_dir_all(out).map_err(|e| CliError::Other(format!("{}: {e}", out.display())))?;
    let mut manifest = RunManifest::start(command_name(&cli.command), &ctx);

    match cli.command {
        Command::Simulate {
            kind,
            plan,
            phases,
            storage_ms,
        } => {
            let shots = cli.shots.unwrap_or(10_000);
            let plan = match plan {
                Plan::Full => SettingsPlan::Full,
                Plan::Partial => SettingsPlan::Partial {
                    n_phases: phases.unwrap_or_else(|| default_phase_count(kind.n_qubits())),
                },
            };
            let set = simulate(&ctx, kind, plan, shots, storage_ms)?;
            let path = out.join(format!("{kind}.jsonl"));
            write_records(&path, &set)?;
            manifest.kind = Some(kind.to_string());
            manifest = manifest.shots(kind.name(), shots);
            manifest.outputs.push(path);
        }
        Command::Reconstruct { records, resamples } => {
            let set = read_records(&records)?;
            let (report, rho) = reconstruct(&ctx, &set, resamples)?;
            let stem = format!("reconstruct-{}", set.header.kind);
            let rho_path = out.join(format!("{stem}-rho.txt"));
            let mut f = std::io::BufWriter::new(std::fs::File::create(&rho_path)?);
            write_matrix(
                &mut f,
                &rho,
                &[("kind", set.header.kind.to_string()), ("fidelity", format!("{:.17e}", report.fidelity))],
            )?;
            print!("{}", report.text());
            manifest.kind = Some(set.header.kind.to_string());
            manifest = manifest.shots(set.header.kind.name(), set.records.len());
            manifest.outputs = write_report(out, &stem, &report.text(), &report)?;
            manifest.outputs.push(rho_path);
        }
        Command::Pst { records, resamples } => {
            let set = read_records(&records)?;
            let report = pst(&ctx, &set, resamples)?;
            print!("{}", report.text());
            manifest.kind = Some(set.header.kind.to_string());
            manifest = manifest.shots(set.header.kind.name(), set.records.len());
            manifest.outputs = write_report(out, &format!("pst-{}", set.header.kind), &report.text(), &report)?;
        }
        Command::Rates { records } => {
            let set = read_records(&records)?;
            let report = rates(&ctx, &set)?;
            print!("{}", report.text());
            manifest.kind = Some(set.header.kind.to_string());
            manifest = manifest.shots(set.header.kind.name(), set.records.len());
            manifest.outputs = write_report(out, &format!("rates-{}", set.header.kind), &report.text(), &report)?;
        }
        Command::Process { mc_samples } => {
            let shots = cli.shots.unwrap_or(25);
            let report = process::process(&ctx, shots, mc_samples)?;
            let text = report.text()?;
            print!("{text}");
            manifest = manifest.shots("per input and setting", shots).shots("haar samples", mc_samples);
            manifest.outputs = write_report(out, "process", &text, &report)?;
        }
        Command::Storage { resamples } => {
            let shots = cli.shots.unwrap_or(4_000);
            let report = storage::storage(&ctx, shots, resamples)?;
            print!("{}", report.text());
            manifest = manifest.shots("per point", shots);
            manifest.outputs = write_report(out, "storage", &report.text(), &report)?;
        }
        Command::Table1 { resamples } => {
            let shots = cli.shots.unwrap_or(10_000);
            let report = table1::table1(&ctx, shots, resamples)?;
            let text = report.text()?;
            print!("{text}");
            for k in table1::ROW_KINDS {
                manifest = manifest.shots(k.name(), shots);
            }
            manifest.outputs = write_report(out, "table1", &text, &report)?;
        }
    }
    manifest.finish(out)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { qnet_cli::exit::INFEASIBLE as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
