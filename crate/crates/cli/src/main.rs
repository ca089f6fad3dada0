use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use modshift_core::pipeline::{run, PipelineConfig, RunOptions, RunSummary, Stage, StageStatus};
use modshift_core::synth::{generate_synthetic, SynthSpec};
use modshift_core::Error;

/// Environment variable that overrides the output directory of the config.
const OUT_ENV: &str = "MODSHIFT_OUT";

#[derive(Parser)]
#[command(
    name = "modshift",
    version,
    about = "Measure how hateful content and its network change around a moderation-policy change"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config and its input files without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a synthetic two-regime corpus and a matching config.toml.
    Synth(SynthArgs),
    /// Load, filter and select key contributors.
    Ingest(StageArgs),
    /// Log-odds word shift and category composition shift.
    Lexshift(StageArgs),
    /// Per-period skip-gram models and phrase similarity shift.
    Embedshift(StageArgs),
    /// Temporal retweet network and growth metrics.
    Graph(StageArgs),
    /// PageRank series, Moving PageRank scores and influencers.
    Mpr(StageArgs),
    /// Profile and text features against MPR rank.
    Earlydetect(StageArgs),
    /// Every enabled stage.
    Run(StageArgs),
}

#[derive(Args)]
struct StageArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides MODSHIFT_OUT and the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Abort on the first malformed input line.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    users: usize,
    #[arg(long, default_value_t = 20)]
    bridges: usize,
    /// Same edge rate on both sides of the takeover and nothing planted.
    #[arg(long)]
    null: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    };
    ExitCode::from(code)
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) => 1,
        Error::Io { .. } => 3,
        _ => 2,
    }
}

fn dispatch(cmd: Command) -> modshift_core::Result<u8> {
    let (args, only) = match cmd {
        Command::Validate { config } => {
            PipelineConfig::load(&config)?.validate()?;
            println!("{}: ok", config.display());
            return Ok(0);
        }
        Command::Synth(a) => return synth(&a).map(|()| 0),
        Command::Ingest(a) => (a, Some(Stage::Corpus)),
        Command::Lexshift(a) => (a, Some(Stage::Lexshift)),
        Command::Embedshift(a) => (a, Some(Stage::Embedshift)),
        Command::Graph(a) => (a, Some(Stage::Graph)),
        Command::Mpr(a) => (a, Some(Stage::Influence)),
        Command::Earlydetect(a) => (a, Some(Stage::Earlydetect)),
        Command::Run(a) => (a, None),
    };
    let cfg = load_config(&args)?;
    let summary = run(&cfg, &RunOptions { only })?;
    print_summary(&summary);
    Ok(summary.exit_code() as u8)
}

fn load_config(args: &StageArgs) -> modshift_core::Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(&args.config)?;
    if let Some(out) = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
    {
        cfg.paths.output = out;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.corpus.strict |= args.strict;
    Ok(cfg)
}

fn print_summary(summary: &RunSummary) {
    for r in &summary.stages {
        let status = match r.status {
            StageStatus::Ok => "ok",
            StageStatus::Failed => "FAILED",
            StageStatus::Skipped => "skipped",
        };
        match &r.message {
            Some(m) => println!("{:<12} {status:<8} {m}", r.stage.as_str()),
            None => println!("{:<12} {status}", r.stage.as_str()),
        }
    }
    println!("outputs in {}", summary.out_dir.display());
}

fn synth(a: &SynthArgs) -> modshift_core::Result<()> {
    let mut spec = if a.null {
        SynthSpec::null_regime(a.seed)
    } else {
        SynthSpec {
            n_planted_bridges: a.bridges,
            seed: a.seed,
            ..Default::default()
        }
    };
    spec.n_users = a.users;
    let corpus = generate_synthetic(&spec)?;
    corpus.write(&a.out)?;

    // Paths are written relative to the bundle so it can be moved.
    let mut cfg = PipelineConfig::for_data_dir(Path::new(""), spec.start_date, spec.takeover_day, spec.days - 1);
    cfg.seed = a.seed;
    cfg.paths.pairs = corpus
        .truth
        .similarity_pair
        .is_some()
        .then(|| PathBuf::from("pairs.csv"));
    cfg.paths.output = PathBuf::from("out");
    cfg.influence.top_k = corpus.truth.suggested_top_k;
    let path = a.out.join("config.toml");
    std::fs::write(&path, cfg.to_toml()?).map_err(|e| Error::io(&path, e))?;
    println!(
        "wrote {} tweets and {} users to {}",
        corpus.tweets.len(),
        corpus.users.len(),
        a.out.display()
    );
    Ok(())
}
