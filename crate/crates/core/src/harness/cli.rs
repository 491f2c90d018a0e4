use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use super::{
    compute_metrics, load_configs, read_records, replay_log, report_csv, run_suite, HarnessError, NrpDenominator,
    SCHEMA_VERSION,
};

#[derive(Parser)]
#[command(name = "monolab", version, about = "Seeded Monopoly trials with novelty injection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the trials of a config file (one config or a list).
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override every config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses all cores.
        #[arg(long)]
        parallel: Option<usize>,
        /// Output directory (else the config's `out`, then $MONOLAB_OUT, then ./out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute metrics from the trial records in a directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Override the focal seat stored in the records.
        #[arg(long)]
        focal: Option<usize>,
        #[arg(long, value_enum, default_value_t = Denominator::Own)]
        nrp_denominator: Denominator,
    },
    /// Play a logged game again and check the log matches.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Denominator {
    Own,
    Baseline,
}

/// Entry point for the binary.
pub fn run_cli() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(std::env::args(), &mut stdout.lock(), &mut stderr.lock())
}

/// Parse `args` (program name first) and run. Returns the exit code: 0 on
/// success, 1 for bad input, 2 for failures while running.
pub fn run_cli_with<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            parallel,
            out,
        } => run(config, seed, parallel, out, stdout),
        Command::Report {
            input,
            format,
            focal,
            nrp_denominator,
        } => report(input, format, focal, nrp_denominator, stdout),
        Command::Replay { log } => replay(log, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "monolab: {e}");
            e.exit_code()
        }
    }
}

fn io(e: std::io::Error) -> HarnessError {
    HarnessError::Io(e.to_string())
}

fn run(
    path: PathBuf,
    seed: Option<u64>,
    parallel: Option<usize>,
    out: Option<PathBuf>,
    stdout: &mut dyn Write,
) -> Result<(), HarnessError> {
    let mut configs = load_configs(&path)?;
    if configs.is_empty() {
        return Err(HarnessError::Config(format!("{} holds no configs", path.display())));
    }
    for c in &mut configs {
        if let Some(s) = seed {
            c.seed = s;
        }
        c.validate()?;
    }
    let out = out
        .or_else(|| configs[0].out.clone())
        .or_else(|| std::env::var_os("MONOLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let parallel = parallel.unwrap_or(configs[0].parallel);
    let suite = run_suite(&configs, Some(&out), parallel)?;
    write!(stdout, "{}", suite.summary).map_err(io)?;
    writeln!(stdout, "records written to {}", out.display()).map_err(io)?;
    Ok(())
}

fn report(
    input: PathBuf,
    format: Format,
    focal: Option<usize>,
    denominator: Denominator,
    stdout: &mut dyn Write,
) -> Result<(), HarnessError> {
    let records = read_records(&input)?;
    if records.is_empty() {
        return Err(HarnessError::Config(format!("no trial records in {}", input.display())));
    }
    let denominator = match denominator {
        Denominator::Own => NrpDenominator::Own,
        Denominator::Baseline => NrpDenominator::Baseline,
    };
    let mut groups: BTreeMap<String, Vec<_>> = BTreeMap::new();
    for r in records {
        groups.entry(r.header.config.clone()).or_default().push(r);
    }
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (label, rs) in groups {
        let seat = focal.unwrap_or(rs[0].header.focal);
        match compute_metrics(&rs, seat, denominator) {
            Ok(r) => ok.push((label, r)),
            Err(e) => failed.push((label, e.to_string())),
        }
    }
    match format {
        Format::Json => {
            let mut rows: Vec<serde_json::Value> = ok
                .iter()
                .map(|(label, r)| serde_json::json!({"config": label, "report": r}))
                .collect();
            rows.extend(
                failed
                    .iter()
                    .map(|(label, e)| serde_json::json!({"config": label, "error": e})),
            );
            let body = serde_json::json!({"schema_version": SCHEMA_VERSION, "reports": rows});
            writeln!(
                stdout,
                "{}",
                serde_json::to_string_pretty(&body).expect("report serializes")
            )
            .map_err(io)?;
        }
        Format::Csv => {
            let text = report_csv(&ok).map_err(|e| HarnessError::Io(e.to_string()))?;
            write!(stdout, "{text}").map_err(io)?;
        }
    }
    match failed.first() {
        Some((label, e)) if ok.is_empty() => Err(HarnessError::Record(format!("{label}: {e}"))),
        _ => Ok(()),
    }
}

fn replay(log: PathBuf, stdout: &mut dyn Write) -> Result<(), HarnessError> {
    let text = std::fs::read_to_string(&log)
        .map_err(|e| HarnessError::Config(format!("cannot read log {}: {e}", log.display())))?;
    let r = replay_log(&text)?;
    writeln!(
        stdout,
        "replay ok: game {} reproduced {} events",
        r.game_index, r.events
    )
    .map_err(io)?;
    Ok(())
}
