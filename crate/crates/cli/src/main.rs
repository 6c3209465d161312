//! `waggle`: segment honeybee dance trajectories, extract per-move features,
//! train and evaluate classifiers, and replay recordings through the live
//! decision circuit.
//!
//! Exit codes: 0 success, 1 usage problems, 2 unreadable or malformed data,
//! 3 training that failed to converge. Diagnostics go to stderr; results go
//! to `-o` files or stdout.

use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use waggle_core::classifiers::{deserialize_model, serialize_model};
use waggle_core::eval::pool_tables;
use waggle_core::features::build_feature_table;
use waggle_core::io as wio;
use waggle_core::signal::DEFAULT_RATE_HZ;
use waggle_core::synth::{generate_corpus, CorpusRanges};
use waggle_core::{
    cross_validate, replay_stream, segment_trajectory, train, ClassifierKind, FeatureTable,
    MonitorConfig, Pace, TrainConfig, TrainedModel, Trajectory,
};

fn parse_kind(s: &str) -> Result<ClassifierKind, waggle_core::Error> {
    s.parse()
}

#[derive(Parser)]
#[command(
    name = "waggle",
    version,
    about = "Segment and classify honeybee dance recordings"
)]
struct Cli {
    /// key=value file consulted for every flag left unset (flags win).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic corpus of dance trajectories.
    Synth(SynthArgs),
    /// Split a trajectory into moves with the threshold monitor.
    Segment(SegmentArgs),
    /// Compute the per-segment feature pair from a trajectory.
    Extract(ExtractArgs),
    /// Fit a classifier on one or more feature tables (pooled).
    Train(TrainArgs),
    /// Cross-validate a classifier on feature tables.
    Eval(EvalArgs),
    /// Replay a trajectory through the live monitor and a trained model.
    Stream(StreamArgs),
    /// Project feature tables to plot-ready x1,x2,label scatter rows.
    Report(ReportArgs),
}

/// Monitor knobs shared by `segment` and `stream`.
#[derive(Args)]
struct MonitorFlags {
    /// Moving-average window, in samples.
    #[arg(long)]
    window: Option<usize>,
    /// Crossing threshold on the averaged sine of the heading.
    #[arg(long, allow_negative_numbers = true)]
    threshold: Option<f64>,
    /// Minimum samples between crossings; doubles as the minimum segment length.
    #[arg(long)]
    refractory: Option<usize>,
    /// Most trailing samples a trigger hands to the classifier.
    #[arg(long)]
    lookback: Option<usize>,
}

/// How to read trajectory files.
#[derive(Args)]
struct InputFlags {
    /// Treat input angles as degrees instead of radians.
    #[arg(long)]
    degrees: bool,
    /// Sampling rate of the recording, in Hz.
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory that receives dance-NN.csv trajectory files.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// How many dances to generate.
    #[arg(long, default_value_t = 20)]
    dances: usize,
    /// Heading noise (standard deviation, radians).
    #[arg(long)]
    noise: Option<f64>,
    /// Corpus seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SegmentArgs {
    /// Trajectory file (index,x,y,theta,label).
    trajectory: PathBuf,
    #[command(flatten)]
    monitor: MonitorFlags,
    #[command(flatten)]
    input: InputFlags,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Trajectory file the segments refer to.
    trajectory: PathBuf,
    /// Segment boundaries produced by `segment`.
    #[arg(long)]
    segments: PathBuf,
    /// Smoothing window for the features.
    #[arg(long)]
    window: Option<usize>,
    /// Recording tag stored with every row (default: trajectory file stem).
    #[arg(long)]
    source: Option<String>,
    #[command(flatten)]
    input: InputFlags,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Feature tables; several are pooled into one training set.
    #[arg(required = true)]
    features: Vec<PathBuf>,
    /// Classifier to fit: logistic, mlp, or svm.
    #[arg(long, value_parser = parse_kind)]
    kind: Option<ClassifierKind>,
    /// Seed for fold shuffling and network initialization.
    #[arg(long)]
    seed: Option<u64>,
    /// Model file (stdout when omitted).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Feature tables; one result row per table unless --pool is given.
    #[arg(required = true)]
    features: Vec<PathBuf>,
    /// Classifier to evaluate: logistic, mlp, or svm.
    #[arg(long, value_parser = parse_kind)]
    kind: Option<ClassifierKind>,
    /// Number of cross-validation folds.
    #[arg(long)]
    k: Option<usize>,
    /// Seed for fold shuffling and network initialization.
    #[arg(long)]
    seed: Option<u64>,
    /// Concatenate all tables into one dataset labeled "pooled".
    #[arg(long)]
    pool: bool,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StreamArgs {
    /// Trajectory file to replay in sample order.
    trajectory: PathBuf,
    /// Model file written by `train`.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    monitor: MonitorFlags,
    #[command(flatten)]
    input: InputFlags,
    /// Replay as fast as possible instead of at the recorded rate.
    #[arg(long)]
    max_speed: bool,
    /// Event-log file (stdout when omitted).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Feature tables to pool into one scatter.
    #[arg(required = true)]
    features: Vec<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

/// Anything that should stop the program, tagged with its exit code.
enum CliError {
    /// Bad invocation: unknown config key, missing required setting, ...
    Usage(String),
    /// Unreadable or malformed input/output files.
    Data(String),
    /// Errors from the pipeline itself (keep their own exit codes).
    Core(waggle_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Core(e) => e.exit_code() as u8,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<waggle_core::Error> for CliError {
    fn from(e: waggle_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// Defaults read from a `--config` file; every field can still be overridden
/// by the matching flag.
#[derive(Default)]
struct FileDefaults {
    window: Option<usize>,
    threshold: Option<f64>,
    refractory: Option<usize>,
    lookback: Option<usize>,
    k: Option<usize>,
    seed: Option<u64>,
    kind: Option<ClassifierKind>,
    rate: Option<f64>,
    degrees: Option<bool>,
}

fn load_defaults(path: Option<&Path>) -> Result<FileDefaults, CliError> {
    let mut out = FileDefaults::default();
    let Some(path) = path else {
        return Ok(out);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| {
            CliError::Usage(format!(
                "config {} line {}: {what}: {line}",
                path.display(),
                lineno + 1
            ))
        };
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key=value"))?;
        let (key, value) = (key.trim(), value.trim());
        macro_rules! set {
            ($field:ident) => {
                out.$field = Some(value.parse().map_err(|_| bad("bad value"))?)
            };
        }
        match key {
            "window" => set!(window),
            "threshold" => set!(threshold),
            "refractory" => set!(refractory),
            "lookback" => set!(lookback),
            "k" => set!(k),
            "seed" => set!(seed),
            "rate" => set!(rate),
            "degrees" => set!(degrees),
            "kind" => out.kind = Some(parse_kind(value).map_err(|_| bad("bad value"))?),
            _ => return Err(bad("unknown key")),
        }
    }
    Ok(out)
}

fn monitor_config(flags: &MonitorFlags, file: &FileDefaults) -> MonitorConfig {
    let d = MonitorConfig::default();
    MonitorConfig {
        window: flags.window.or(file.window).unwrap_or(d.window),
        threshold: flags.threshold.or(file.threshold).unwrap_or(d.threshold),
        refractory: flags.refractory.or(file.refractory).unwrap_or(d.refractory),
        lookback: flags.lookback.or(file.lookback).unwrap_or(d.lookback),
    }
}

fn rate_of(input: &InputFlags, file: &FileDefaults) -> f64 {
    input.rate.or(file.rate).unwrap_or(DEFAULT_RATE_HZ)
}

fn degrees_of(input: &InputFlags, file: &FileDefaults) -> bool {
    input.degrees || file.degrees.unwrap_or(false)
}

fn kind_of(flag: Option<ClassifierKind>, file: &FileDefaults) -> Result<ClassifierKind, CliError> {
    flag.or(file.kind)
        .ok_or_else(|| CliError::Usage("--kind is required (logistic, mlp, or svm)".into()))
}

fn open_input(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Adds the file name to core parse errors so the user knows which input broke.
fn with_path<T>(path: &Path, r: waggle_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_trajectory_file(path: &Path, rate_hz: f64, degrees: bool) -> Result<Trajectory, CliError> {
    with_path(path, wio::read_trajectory(open_input(path)?, rate_hz, degrees))
}

fn read_features_file(path: &Path) -> Result<FeatureTable, CliError> {
    with_path(path, wio::read_feature_table(open_input(path)?))
}

fn read_pooled(paths: &[PathBuf]) -> Result<FeatureTable, CliError> {
    let tables = paths
        .iter()
        .map(|p| read_features_file(p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(pool_tables(&tables))
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Writes through `f` to the given file, or to stdout when there is none.
fn write_output(
    out: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> waggle_core::Result<()>,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            with_path(path, f(&mut w))?;
            with_path(path, w.flush().map_err(waggle_core::Error::from))
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            f(&mut w).map_err(CliError::Core)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version are successes; everything else is misuse.
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = load_defaults(cli.config.as_deref())?;
    match cli.command {
        Command::Synth(args) => run_synth(args, &file),
        Command::Segment(args) => run_segment(args, &file),
        Command::Extract(args) => run_extract(args, &file),
        Command::Train(args) => run_train(args, &file),
        Command::Eval(args) => run_eval(args, &file),
        Command::Stream(args) => run_stream(args, &file),
        Command::Report(args) => run_report(args),
    }
}

fn run_synth(args: SynthArgs, file: &FileDefaults) -> Result<(), CliError> {
    let defaults = CorpusRanges::default();
    let ranges = CorpusRanges {
        n_dances: args.dances,
        noise_sd: args.noise.unwrap_or(defaults.noise_sd),
        seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
        ..defaults
    };
    let corpus = generate_corpus(&ranges)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out_dir.display())))?;
    for (i, (_, traj)) in corpus.iter().enumerate() {
        let path = args.out_dir.join(format!("dance-{i:02}.csv"));
        write_output(Some(&path), |w| wio::write_trajectory(w, traj))?;
    }
    eprintln!(
        "wrote {} dances to {}",
        corpus.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn run_segment(args: SegmentArgs, file: &FileDefaults) -> Result<(), CliError> {
    let cfg = monitor_config(&args.monitor, file);
    let traj = read_trajectory_file(
        &args.trajectory,
        rate_of(&args.input, file),
        degrees_of(&args.input, file),
    )?;
    let segments = segment_trajectory(&traj, &cfg)?;
    write_output(args.out.as_deref(), |w| wio::write_segments(w, &segments))
}

fn run_extract(args: ExtractArgs, file: &FileDefaults) -> Result<(), CliError> {
    let window = args
        .window
        .or(file.window)
        .unwrap_or(MonitorConfig::default().window);
    let traj = read_trajectory_file(
        &args.trajectory,
        rate_of(&args.input, file),
        degrees_of(&args.input, file),
    )?;
    let segments = with_path(&args.segments, wio::read_segments(open_input(&args.segments)?))?;
    let source = args.source.unwrap_or_else(|| stem_of(&args.trajectory));
    let table = build_feature_table(&traj, &segments, window, &source)?;
    write_output(args.out.as_deref(), |w| wio::write_feature_table(w, &table))
}

fn train_config(seed: Option<u64>, file: &FileDefaults) -> TrainConfig {
    let mut cfg = TrainConfig::default();
    cfg.seed = seed.or(file.seed).unwrap_or(cfg.seed);
    cfg
}

fn run_train(args: TrainArgs, file: &FileDefaults) -> Result<(), CliError> {
    let kind = kind_of(args.kind, file)?;
    let pooled = read_pooled(&args.features)?;
    let cfg = train_config(args.seed, file);
    let model = train(kind, &pooled, &cfg)?;
    write_output(args.out.as_deref(), |w| {
        w.write_all(serialize_model(&model).as_bytes())
            .map_err(waggle_core::Error::from)
    })
}

fn run_eval(args: EvalArgs, file: &FileDefaults) -> Result<(), CliError> {
    let kind = kind_of(args.kind, file)?;
    let k = args.k.or(file.k).unwrap_or(5);
    let cfg = train_config(args.seed, file);

    let mut rows = Vec::new();
    if args.pool {
        let pooled = read_pooled(&args.features)?;
        rows.push(("pooled".to_string(), cross_validate(&pooled, kind, k, &cfg)?));
    } else {
        for path in &args.features {
            let table = read_features_file(path)?;
            rows.push((stem_of(path), cross_validate(&table, kind, k, &cfg)?));
        }
    }
    write_output(args.out.as_deref(), |w| wio::write_eval_csv(w, &rows))
}

fn run_stream(args: StreamArgs, file: &FileDefaults) -> Result<(), CliError> {
    let cfg = monitor_config(&args.monitor, file);
    let traj = read_trajectory_file(
        &args.trajectory,
        rate_of(&args.input, file),
        degrees_of(&args.input, file),
    )?;
    let mut text = String::new();
    open_input(&args.model)?
        .read_to_string(&mut text)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.model.display())))?;
    let model: TrainedModel = with_path(&args.model, deserialize_model(&text))?;

    let pace = if args.max_speed {
        Pace::MaxSpeed
    } else {
        Pace::RealTime
    };
    let log = replay_stream(&traj, &cfg, &model, pace)?;
    write_output(args.out.as_deref(), |w| wio::write_event_log(w, &log))?;
    eprintln!(
        "{} samples, {} triggers ({} skipped), {:.3e} samples/s",
        log.samples_processed,
        log.events.len(),
        log.skipped_triggers,
        log.throughput()
    );
    Ok(())
}

fn run_report(args: ReportArgs) -> Result<(), CliError> {
    let pooled = read_pooled(&args.features)?;
    write_output(args.out.as_deref(), |w| wio::write_scatter(w, &pooled))
}
