use std::path::PathBuf;
use std::process::ExitCode;

use bsr_cli::cache::Status;
use bsr_cli::{fixture, selftest, CliError, FeatureName, Pipeline, PipelineConfig, StageReport};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bsrkit", version, about = "Bit-sequence and spectral audio features, noise conditions, classifiers and score fusion")]
struct Cli {
    /// Pipeline config file (TOML)
    #[arg(long, global = true, default_value = "bsrkit.toml")]
    config: PathBuf,

    /// Override the master seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0 = one per core)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Override the output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract feature files for the clean data and every noise condition
    Extract {
        /// Feature kinds to extract (default: all configured)
        #[arg(long = "kind")]
        kinds: Vec<String>,
    },
    /// Write PCM16 copies of the dataset under every noise condition
    Synthesize,
    /// Train one classifier per feature kind
    Train,
    /// Score the test split of every condition
    Score,
    /// Fuse score files for every configured subset
    Fuse,
    /// Write the accuracy table, confusion matrices and confusion diffs
    Report,
    /// Run every stage in order
    Run,
    /// Run the built-in invariant checks
    Selftest,
    /// Write a config with the four-feature, nine-condition layout
    InitConfig {
        /// Dataset root recorded in the config
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Write a synthetic tone / chirp / noise-burst clip tree and a background recording
    GenFixture {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 20)]
        per_class: usize,
        #[arg(long, default_value_t = 0)]
        fixture_seed: u64,
    },
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut cfg = PipelineConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    if let Some(out) = &cli.out {
        let cwd = std::env::current_dir().map_err(|e| CliError::Config(e.to_string()))?;
        cfg.output_dir = cwd.join(out);
    }
    Ok(cfg)
}

fn log(reports: &[StageReport]) -> usize {
    for r in reports {
        eprintln!("{}", r.summary());
        for (name, status) in &r.items {
            let tag = match status {
                Status::Computed => "computed",
                Status::Cached => "cache hit",
            };
            eprintln!("  {tag}: {name}");
        }
    }
    reports.iter().map(|r| r.failures).sum()
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Selftest => {
            let checks = selftest::run_all();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            return if failed == 0 { Ok(()) } else { Err(CliError::Partial(failed)) };
        }
        Command::InitConfig { dataset } => {
            let text = PipelineConfig::standard(dataset).to_toml()?;
            std::fs::write(&cli.config, text).map_err(|e| CliError::Config(format!("{}: {e}", cli.config.display())))?;
            eprintln!("wrote {}", cli.config.display());
            return Ok(());
        }
        Command::GenFixture { dir, per_class, fixture_seed } => {
            if *per_class < 5 {
                return Err(CliError::Config("per-class count must be at least 5".into()));
            }
            fixture::write_synthetic_dataset(dir, *per_class, *fixture_seed)?;
            return fixture::write_background_recording(dir, *fixture_seed);
        }
        _ => {}
    }
    let pipeline = Pipeline::new(load_config(cli)?)?;
    let reports = match &cli.command {
        Command::Extract { kinds } => {
            let kinds = if kinds.is_empty() {
                pipeline.config().features.clone()
            } else {
                kinds.iter().map(|k| k.parse()).collect::<Result<Vec<FeatureName>, _>>()?
            };
            vec![pipeline.extract(&kinds)?]
        }
        Command::Synthesize => vec![pipeline.synthesize()?],
        Command::Train => vec![pipeline.train()?],
        Command::Score => vec![pipeline.score()?],
        Command::Fuse => vec![pipeline.fuse()?],
        Command::Report => {
            let r = pipeline.report()?;
            if let Ok(table) = std::fs::read_to_string(pipeline.report_path()) {
                print!("{table}");
            }
            vec![r]
        }
        Command::Run => pipeline.run()?,
        _ => unreachable!("handled above"),
    };
    match log(&reports) {
        0 => Ok(()),
        n => Err(CliError::Partial(n)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
