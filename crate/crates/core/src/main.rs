use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use botdyn::cssr::{count_histories, reconstruct};
use botdyn::error::{Error, Result};
use botdyn::features::{feature_table, read_features, TimeVarianceMode};
use botdyn::ingest::{
    read_records, score_with, write_records, write_records_to, ConstantScorer, Emotion, FileScorer, Format,
    MockScorer, Scorer, Scores,
};
use botdyn::measures::read_measures;
use botdyn::pipeline::{
    bin_corpus, measure_all, read_sequences, run_pipeline, write_features_file, write_machines,
    write_measures_file, write_regression, write_sequences, PipelineConfig, FEATURES_FILE, MACHINES_DIR,
    MEASURES_FILE, SEQUENCES_DIR,
};
use botdyn::regression::{run_models, CovarianceKind};
use botdyn::report::report;
use botdyn::sequencing::{BinningKind, SymbolSequence, ALPHABET_SIZE};
use botdyn::simulate::{generate_corpus, CorpusSpec};

#[derive(Parser)]
#[command(name = "botdyn", version, about = "Epsilon-machine analysis of scored message streams")]
struct Cli {
    /// JSON pipeline configuration; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output file or bundle directory, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and normalize a scored corpus, or score raw texts.
    Ingest(IngestArgs),
    /// Generate a synthetic corpus from a JSON spec.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Discretize emotion windows into `<out>/sequences`.
    Bin(StageArgs),
    /// Reconstruct one machine from a sequence file, or all machines of a bundle.
    Reconstruct(StageArgs),
    /// Compute C, h and E for every sequence of a bundle.
    Measures(StageArgs),
    /// Compute per-window covariates into `<out>/features.csv`.
    Features(StageArgs),
    /// Fit the models from a bundle's measures and features.
    Regress(StageArgs),
    /// Run every stage end to end.
    Pipeline(StageArgs),
    /// Print the regression tables of a bundle.
    Report {
        /// Bundle directory; defaults to --out.
        bundle: Option<PathBuf>,
    },
}

#[derive(Args)]
struct IngestArgs {
    /// Pre-scored records (CSV or JSONL).
    #[arg(long, conflicts_with = "texts")]
    input: Option<PathBuf>,
    /// Raw texts, one message per line.
    #[arg(long)]
    texts: Option<PathBuf>,
    /// `mock`, `constant:<value>`, or a JSONL score file keyed by text.
    #[arg(long, default_value = "mock")]
    scorer: String,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimeVarianceArg {
    Gap,
    Span,
}

#[derive(Clone, Copy, ValueEnum)]
enum CovarianceArg {
    Classical,
    Hc1,
}

#[derive(Args, Default)]
struct StageArgs {
    /// Corpus file for `bin`, `features` and `pipeline`; a sequence file or
    /// directory for `reconstruct`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    window_len: Option<usize>,
    #[arg(long)]
    strategy: Option<BinningKind>,
    #[arg(long)]
    exp_base: Option<f64>,
    /// History window length.
    #[arg(long = "L", visible_alias = "max-len")]
    max_len: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    min_count: Option<u64>,
    /// Restrict to these emotions (repeatable).
    #[arg(long = "emotion")]
    emotions: Vec<Emotion>,
    #[arg(long, value_enum)]
    time_variance: Option<TimeVarianceArg>,
    /// Add emotion indicator columns to both models.
    #[arg(long)]
    emotion_effects: bool,
    #[arg(long, value_enum)]
    covariance: Option<CovarianceArg>,
    /// Measures CSV for `regress` (defaults to `<out>/measures.csv`).
    #[arg(long)]
    measures: Option<PathBuf>,
    /// Features CSV for `regress` (defaults to `<out>/features.csv`).
    #[arg(long)]
    features: Option<PathBuf>,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&body)?
        }
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = jobs;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    Ok(config)
}

fn apply(config: &mut PipelineConfig, args: &StageArgs) -> Result<()> {
    if let Some(v) = &args.input {
        config.input = v.clone();
    }
    if let Some(v) = args.format {
        config.format = Some(v);
    }
    if let Some(v) = args.window_len {
        config.window_len = v;
    }
    if let Some(v) = args.strategy {
        config.strategy.kind = v;
    }
    if let Some(v) = args.exp_base {
        config.strategy.exp_base = v;
    }
    if let Some(v) = args.max_len {
        config.max_len = v;
    }
    if let Some(v) = args.alpha {
        config.alpha = v;
    }
    if let Some(v) = args.min_count {
        config.min_count = v;
    }
    if !args.emotions.is_empty() {
        config.emotions = args.emotions.clone();
    }
    if let Some(v) = args.time_variance {
        config.time_variance = match v {
            TimeVarianceArg::Gap => TimeVarianceMode::GapVariance,
            TimeVarianceArg::Span => TimeVarianceMode::ElapsedSpan,
        };
    }
    if args.emotion_effects {
        config.models.emotion_effects = true;
    }
    if let Some(v) = args.covariance {
        config.models.covariance = match v {
            CovarianceArg::Classical => CovarianceKind::Classical,
            CovarianceArg::Hc1 => CovarianceKind::Hc1,
        };
    }
    config.validate()
}

fn require_input(config: &PipelineConfig) -> Result<()> {
    if config.input.as_os_str().is_empty() {
        return Err(Error::validation("input", "an input file is required (--input)"));
    }
    Ok(())
}

fn load_corpus(config: &PipelineConfig) -> Result<botdyn::ingest::Corpus> {
    require_input(config)?;
    read_records(&config.input, config.input_format()?)
}

fn make_scorer(spec: &str) -> Result<Box<dyn Scorer>> {
    if spec == "mock" {
        return Ok(Box::new(MockScorer));
    }
    if let Some(v) = spec.strip_prefix("constant:") {
        let value: f64 = v
            .parse()
            .map_err(|_| Error::validation("scorer", format!("`{v}` is not a number")))?;
        return Ok(Box::new(ConstantScorer(Scores {
            emotions: botdyn::ingest::EmotionScores::uniform(value),
            bot_score: value,
        })));
    }
    Ok(Box::new(FileScorer::load(spec)?))
}

fn write_corpus(corpus: &botdyn::ingest::Corpus, out: Option<&Path>, format: Option<Format>) -> Result<()> {
    match out {
        Some(path) => {
            let format = format
                .or_else(|| Format::from_path(path))
                .ok_or_else(|| Error::validation("format", "cannot infer output format; pass --format"))?;
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            write_records(corpus, path, format)
        }
        None => write_records_to(corpus, io::stdout().lock(), format.unwrap_or(Format::Csv)),
    }
}

fn ingest(cli: &Cli, args: &IngestArgs) -> Result<()> {
    let corpus = match (&args.input, &args.texts) {
        (Some(path), _) => {
            let format = args
                .format
                .or_else(|| Format::from_path(path))
                .ok_or_else(|| Error::validation("format", "cannot infer input format; pass --format"))?;
            read_records(path, format)?
        }
        (None, Some(path)) => {
            let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
            let texts = BufReader::new(file)
                .lines()
                .collect::<io::Result<Vec<String>>>()
                .map_err(|e| Error::io(path, e))?;
            score_with(&texts, make_scorer(&args.scorer)?.as_ref())?
        }
        (None, None) => return Err(Error::validation("input", "pass --input or --texts")),
    };
    log::info!("ingested {} records", corpus.len());
    write_corpus(&corpus, cli.out.as_deref(), None)
}

fn simulate(cli: &Cli, spec_path: &Path, format: Option<Format>) -> Result<()> {
    let body = fs::read_to_string(spec_path).map_err(|e| Error::io(spec_path, e))?;
    let mut spec: CorpusSpec = serde_json::from_str(&body)?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let corpus = generate_corpus(&spec)?;
    write_corpus(&corpus, cli.out.as_deref(), format)
}

fn run_reconstruct(config: &PipelineConfig) -> Result<()> {
    require_input(config)?;
    let input = &config.input;
    if input.is_dir() {
        let sequences = read_sequences(input)?;
        let measured = measure_all(&sequences, &config.measure_params(), config.jobs)?;
        return write_machines(&config.out_dir.join(MACHINES_DIR), &measured);
    }
    let seq = SymbolSequence::read_from(input)?;
    let counts = count_histories(&seq.symbols, ALPHABET_SIZE, config.max_len)?;
    let machine = reconstruct(&counts, &config.measure_params().reconstruct_options())?;
    let json = machine.to_json()? + "\n";
    let mut stdout = io::stdout().lock();
    stdout.write_all(json.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest(args) => ingest(&cli, args),
        Command::Simulate { spec, format } => simulate(&cli, spec, *format),
        Command::Report { bundle } => {
            let dir = bundle
                .clone()
                .or_else(|| cli.out.clone())
                .ok_or_else(|| Error::validation("bundle", "pass a bundle directory"))?;
            print!("{}", report(&dir)?);
            Ok(())
        }
        Command::Bin(args)
        | Command::Reconstruct(args)
        | Command::Measures(args)
        | Command::Features(args)
        | Command::Regress(args)
        | Command::Pipeline(args) => {
            let mut config = load_config(&cli)?;
            apply(&mut config, args)?;
            let out = config.out_dir.clone();
            match &cli.command {
                Command::Bin(_) => {
                    let corpus = load_corpus(&config)?;
                    let seqs = bin_corpus(&corpus, config.window_len, &config.strategy, &config.emotions)?;
                    write_sequences(&out.join(SEQUENCES_DIR), &seqs)?;
                    log::info!("wrote {} sequences", seqs.len());
                }
                Command::Reconstruct(_) => run_reconstruct(&config)?,
                Command::Measures(_) => {
                    let seqs = read_sequences(&out.join(SEQUENCES_DIR))?;
                    let measured = measure_all(&seqs, &config.measure_params(), config.jobs)?;
                    write_machines(&out.join(MACHINES_DIR), &measured)?;
                    let rows: Vec<_> = measured.into_iter().map(|m| m.outcome).collect();
                    write_measures_file(&out.join(MEASURES_FILE), &rows)?;
                }
                Command::Features(_) => {
                    let corpus = load_corpus(&config)?;
                    let rows: Vec<_> = if corpus.len() >= config.window_len {
                        feature_table(&corpus, config.window_len, config.time_variance)?
                            .into_iter()
                            .filter(|f| config.emotions.contains(&f.emotion))
                            .collect()
                    } else {
                        Vec::new()
                    };
                    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
                    write_features_file(&out.join(FEATURES_FILE), &rows)?;
                }
                Command::Regress(_) => {
                    let mpath = args.measures.clone().unwrap_or_else(|| out.join(MEASURES_FILE));
                    let fpath = args.features.clone().unwrap_or_else(|| out.join(FEATURES_FILE));
                    let mfile = fs::File::open(&mpath).map_err(|e| Error::io(&mpath, e))?;
                    let ffile = fs::File::open(&fpath).map_err(|e| Error::io(&fpath, e))?;
                    let measures = read_measures(mfile, config.max_len)?;
                    let features = read_features(ffile)?;
                    let fits = run_models(&measures, &features, &config.models)?;
                    write_regression(&out, &fits)?;
                }
                Command::Pipeline(_) => {
                    require_input(&config)?;
                    let bundle = run_pipeline(&config)?;
                    for e in &bundle.manifest.errors {
                        log::warn!("{e}");
                    }
                    println!(
                        "{} sequences, {} artifacts in {}",
                        bundle.manifest.n_sequences,
                        bundle.manifest.artifacts.len(),
                        bundle.out_dir.display()
                    );
                }
                _ => unreachable!(),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
