//! Per-window covariates: bot level and the text/timing controls.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Corpus, Emotion, MessageRecord};

/// How timing irregularity within a window is summarized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeVarianceMode {
    /// Population variance of consecutive inter-arrival gaps (seconds²).
    #[default]
    GapVariance,
    /// Seconds between the first and last record.
    ElapsedSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceFeatures {
    pub emotion: Emotion,
    pub window_index: usize,
    pub bot_level: f64,
    pub word_count_mean: f64,
    pub word_complexity: f64,
    pub time_variance: f64,
}

pub fn bot_level(window: &[MessageRecord]) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::validation("window", "empty window"));
    }
    Ok(window.iter().map(|r| r.bot_score).sum::<f64>() / window.len() as f64)
}

/// Mean word count and mean per-record characters-per-word. Records with
/// no words are left out of the second mean.
pub fn word_stats(window: &[MessageRecord]) -> Result<(f64, f64)> {
    if window.is_empty() {
        return Err(Error::validation("window", "empty window"));
    }
    let word_mean = window.iter().map(|r| f64::from(r.word_count)).sum::<f64>() / window.len() as f64;
    let ratios: Vec<f64> = window
        .iter()
        .filter(|r| r.word_count > 0)
        .map(|r| f64::from(r.char_count) / f64::from(r.word_count))
        .collect();
    let skipped = window.len() - ratios.len();
    if skipped > 0 {
        log::warn!("{skipped} record(s) with zero words excluded from word complexity");
    }
    let complexity = if ratios.is_empty() {
        0.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    Ok((word_mean, complexity))
}

pub fn time_variance(window: &[MessageRecord]) -> Result<f64> {
    time_variance_with(window, TimeVarianceMode::GapVariance)
}

pub fn time_variance_with(window: &[MessageRecord], mode: TimeVarianceMode) -> Result<f64> {
    if window.len() < 3 {
        return Err(Error::validation(
            "window",
            format!("time variance needs at least 3 records, got {}", window.len()),
        ));
    }
    let gaps: Vec<f64> = window.windows(2).map(|w| w[1].timestamp - w[0].timestamp).collect();
    Ok(match mode {
        TimeVarianceMode::GapVariance => {
            let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
            gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gaps.len() as f64
        }
        TimeVarianceMode::ElapsedSpan => window[window.len() - 1].timestamp - window[0].timestamp,
    })
}

/// One row per (emotion, window); the five emotions of a window share the
/// same records and therefore the same values.
pub fn feature_table(corpus: &Corpus, window_len: usize, mode: TimeVarianceMode) -> Result<Vec<SequenceFeatures>> {
    if window_len < 3 {
        return Err(Error::validation("window_len", "must be at least 3 to compute time variance"));
    }
    let mut per_window = Vec::new();
    for chunk in corpus.records().chunks_exact(window_len) {
        let (word_count_mean, word_complexity) = word_stats(chunk)?;
        per_window.push((bot_level(chunk)?, word_count_mean, word_complexity, time_variance_with(chunk, mode)?));
    }
    let mut rows = Vec::with_capacity(per_window.len() * Emotion::ALL.len());
    for emotion in Emotion::ALL {
        for (window_index, &(bot_level, word_count_mean, word_complexity, time_variance)) in
            per_window.iter().enumerate()
        {
            rows.push(SequenceFeatures {
                emotion,
                window_index,
                bot_level,
                word_count_mean,
                word_complexity,
                time_variance,
            });
        }
    }
    Ok(rows)
}

pub fn write_features<W: Write>(rows: &[SequenceFeatures], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record([
        "emotion",
        "window_index",
        "bot_level",
        "word_count_mean",
        "word_complexity",
        "time_variance",
    ])?;
    for r in rows {
        wtr.write_record([
            r.emotion.to_string(),
            r.window_index.to_string(),
            r.bot_level.to_string(),
            r.word_count_mean.to_string(),
            r.word_complexity.to_string(),
            r.time_variance.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<features>", e))?;
    Ok(())
}

pub fn read_features<R: Read>(input: R) -> Result<Vec<SequenceFeatures>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize().enumerate() {
        let row: SequenceFeatures = rec.map_err(|e| Error::Parse {
            line: i + 2,
            field: "<row>".into(),
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}
