//! End-to-end orchestration: corpus → windows → symbols → machines →
//! measures → features → regression, with every stage boundary written to
//! disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cssr::{EpsilonMachine, DEFAULT_ALPHA, DEFAULT_MAX_LEN, DEFAULT_MIN_COUNT};
use crate::error::{Error, Result};
use crate::features::{feature_table, write_features, SequenceFeatures, TimeVarianceMode};
use crate::ingest::{read_records, Corpus, Emotion, Format};
use crate::measures::{measure_sequence, write_measures, MeasureOutcome, MeasureParams, SequenceKey};
use crate::regression::{confidence_intervals, run_models, ModelFit, ModelOptions};
use crate::report::coefficient_plot_svg;
use crate::sequencing::{discretize, segment, BinningStrategy, SymbolSequence, DEFAULT_WINDOW_LEN};

pub const SEQUENCES_DIR: &str = "sequences";
pub const MACHINES_DIR: &str = "machines";
pub const MEASURES_FILE: &str = "measures.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const REGRESSION_JSON: &str = "regression.json";
pub const REGRESSION_CSV: &str = "regression.csv";
pub const PLOT_FILE: &str = "coefficients.svg";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub input: PathBuf,
    /// Inferred from the input extension when absent.
    pub format: Option<Format>,
    pub window_len: usize,
    pub strategy: BinningStrategy,
    /// Total history window length `L`.
    pub max_len: usize,
    pub alpha: f64,
    pub min_count: u64,
    pub emotions: Vec<Emotion>,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
    pub time_variance: TimeVarianceMode,
    pub models: ModelOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: PathBuf::new(),
            format: None,
            window_len: DEFAULT_WINDOW_LEN,
            strategy: BinningStrategy::default(),
            max_len: DEFAULT_MAX_LEN,
            alpha: DEFAULT_ALPHA,
            min_count: DEFAULT_MIN_COUNT,
            emotions: Emotion::ALL.to_vec(),
            out_dir: PathBuf::from("out"),
            seed: 0,
            jobs: 0,
            time_variance: TimeVarianceMode::default(),
            models: ModelOptions::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_len == 0 {
            return Err(Error::validation("max_len", "must be at least 1"));
        }
        if self.window_len < 2 * self.max_len {
            return Err(Error::validation(
                "window_len",
                format!("{} is shorter than 2·L = {}", self.window_len, 2 * self.max_len),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::validation("alpha", format!("{} is not in (0, 1)", self.alpha)));
        }
        if self.emotions.is_empty() {
            return Err(Error::validation("emotions", "at least one emotion is required"));
        }
        self.strategy.validate()
    }

    pub fn measure_params(&self) -> MeasureParams {
        MeasureParams {
            max_len: self.max_len,
            alpha: self.alpha,
            min_count: self.min_count,
        }
    }

    pub fn input_format(&self) -> Result<Format> {
        self.format
            .or_else(|| Format::from_path(&self.input))
            .ok_or_else(|| Error::validation("format", "cannot infer input format; pass --format"))
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::validation("jobs", e.to_string()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Discretizes every window of the selected emotions.
pub fn bin_corpus(
    corpus: &Corpus,
    window_len: usize,
    strategy: &BinningStrategy,
    emotions: &[Emotion],
) -> Result<Vec<SymbolSequence>> {
    segment(corpus, window_len)?
        .iter()
        .filter(|w| emotions.contains(&w.emotion))
        .map(|w| discretize(w, strategy))
        .collect()
}

pub fn write_sequences(dir: &Path, sequences: &[SymbolSequence]) -> Result<()> {
    create_dir(dir)?;
    for seq in sequences {
        seq.write_to_dir(dir)?;
    }
    Ok(())
}

/// Reads every `*.txt` sequence (with its sidecar) in a directory, ordered
/// by key.
pub fn read_sequences(dir: &Path) -> Result<Vec<SymbolSequence>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    paths.sort();
    let mut seqs = paths
        .iter()
        .map(|p| SymbolSequence::read_from(p))
        .collect::<Result<Vec<_>>>()?;
    seqs.sort_by_key(SequenceKey::of);
    Ok(seqs)
}

pub struct MeasuredSequence {
    pub outcome: MeasureOutcome,
    pub machine: Option<EpsilonMachine>,
    pub stem: String,
}

/// Reconstructs and measures every sequence; failures become error rows.
pub fn measure_all(sequences: &[SymbolSequence], params: &MeasureParams, jobs: usize) -> Result<Vec<MeasuredSequence>> {
    let pool = thread_pool(jobs)?;
    let mut out: Vec<MeasuredSequence> = pool.install(|| {
        sequences
            .par_iter()
            .map(|seq| {
                let stem = seq.file_stem();
                match measure_sequence(seq, params) {
                    Ok((set, machine)) => MeasuredSequence {
                        outcome: Ok(set),
                        machine: Some(machine),
                        stem,
                    },
                    Err(e) => {
                        log::warn!("{stem}: {e}");
                        MeasuredSequence {
                            outcome: Err((SequenceKey::of(seq), e.to_string())),
                            machine: None,
                            stem,
                        }
                    }
                }
            })
            .collect()
    });
    out.sort_by_key(|m| match &m.outcome {
        Ok(s) => s.key,
        Err((k, _)) => *k,
    });
    Ok(out)
}

pub fn write_machines(dir: &Path, measured: &[MeasuredSequence]) -> Result<()> {
    create_dir(dir)?;
    for m in measured {
        if let Some(machine) = &m.machine {
            write_file(&dir.join(format!("{}.json", m.stem)), machine.to_json()? + "\n")?;
        }
    }
    Ok(())
}

pub fn write_measures_file(path: &Path, rows: &[MeasureOutcome]) -> Result<()> {
    let mut buf = Vec::new();
    write_measures(rows, &mut buf)?;
    write_file(path, buf)
}

pub fn write_features_file(path: &Path, rows: &[SequenceFeatures]) -> Result<()> {
    let mut buf = Vec::new();
    write_features(rows, &mut buf)?;
    write_file(path, buf)
}

/// Writes `regression.json`, `regression.csv` and `coefficients.svg`.
pub fn write_regression(dir: &Path, fits: &[ModelFit]) -> Result<()> {
    create_dir(dir)?;
    write_file(&dir.join(REGRESSION_JSON), serde_json::to_string_pretty(fits)? + "\n")?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "model", "fit", "term", "estimate", "std_estimate", "std_error", "t_value", "p_value", "ci_lo", "ci_hi",
    ])?;
    for fit in fits {
        for (label, result) in [("raw", &fit.raw), ("standardized", &fit.standardized)] {
            for (c, iv) in result.coefficients.iter().zip(confidence_intervals(result, 0.95)) {
                wtr.write_record([
                    fit.model.clone(),
                    label.to_string(),
                    c.name.clone(),
                    c.estimate.to_string(),
                    c.std_estimate.to_string(),
                    c.std_error.to_string(),
                    c.t_value.to_string(),
                    c.p_value.to_string(),
                    iv.lo.to_string(),
                    iv.hi.to_string(),
                ])?;
            }
        }
    }
    let buf = wtr.into_inner().map_err(|e| Error::io(dir, std::io::Error::other(e.to_string())))?;
    write_file(&dir.join(REGRESSION_CSV), buf)?;
    write_file(&dir.join(PLOT_FILE), coefficient_plot_svg(fits))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: PipelineConfig,
    /// Seconds since the Unix epoch when the run finished.
    pub created_at: u64,
    pub n_records: usize,
    pub n_sequences: usize,
    /// Relative artifact path → SHA-256 of its contents.
    pub artifacts: BTreeMap<String, String>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn collect_hashes(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_hashes(root, &path, out)?;
        } else if path.file_name().is_some_and(|n| n != MANIFEST_FILE) {
            let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
            out.insert(rel, sha256_file(&path)?);
        }
    }
    Ok(())
}

/// Runs every stage and writes the bundle. Only input-level failures abort;
/// per-sequence and regression failures are recorded in the manifest.
pub fn run_pipeline(config: &PipelineConfig) -> Result<Bundle> {
    config.validate()?;
    let format = config.input_format()?;
    let corpus = read_records(&config.input, format)?;
    run_pipeline_on(config, &corpus)
}

pub fn run_pipeline_on(config: &PipelineConfig, corpus: &Corpus) -> Result<Bundle> {
    config.validate()?;
    let out = &config.out_dir;
    create_dir(out)?;
    let mut errors = Vec::new();

    let sequences = bin_corpus(corpus, config.window_len, &config.strategy, &config.emotions)?;
    if sequences.is_empty() {
        errors.push(format!(
            "corpus of {} records yields no window of {} records",
            corpus.len(),
            config.window_len
        ));
    }
    write_sequences(&out.join(SEQUENCES_DIR), &sequences)?;

    let measured = measure_all(&sequences, &config.measure_params(), config.jobs)?;
    write_machines(&out.join(MACHINES_DIR), &measured)?;
    let rows: Vec<MeasureOutcome> = measured.into_iter().map(|m| m.outcome).collect();
    for row in &rows {
        if let Err((key, reason)) = row {
            errors.push(format!("{}/{}/{}: {reason}", key.emotion, key.window_index, key.strategy));
        }
    }
    write_measures_file(&out.join(MEASURES_FILE), &rows)?;

    let features: Vec<SequenceFeatures> = if corpus.len() >= config.window_len {
        feature_table(corpus, config.window_len, config.time_variance)?
            .into_iter()
            .filter(|f| config.emotions.contains(&f.emotion))
            .collect()
    } else {
        Vec::new()
    };
    write_features_file(&out.join(FEATURES_FILE), &features)?;

    match run_models(&rows, &features, &config.models) {
        Ok(fits) => write_regression(out, &fits)?,
        Err(e) => {
            log::warn!("regression skipped: {e}");
            errors.push(format!("regression: {e}"));
        }
    }

    let mut artifacts = BTreeMap::new();
    collect_hashes(out, out, &mut artifacts)?;
    let manifest = Manifest {
        config: config.clone(),
        created_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        n_records: corpus.len(),
        n_sequences: sequences.len(),
        artifacts,
        errors,
    };
    write_file(&out.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(Bundle {
        out_dir: out.clone(),
        manifest,
    })
}
