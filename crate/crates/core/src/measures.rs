//! Statistical complexity `C`, entropy rate `h` and predictable
//! information `E`, all in bits.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::cssr::{count_histories, reconstruct, EpsilonMachine, ReconstructOptions, DEFAULT_MAX_LEN};
use crate::error::{Error, Result};
use crate::ingest::Emotion;
use crate::sequencing::{BinningKind, SymbolSequence, ALPHABET_SIZE};

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// `-Σ p log2 p`, with `0 log 0 = 0`.
pub fn shannon_entropy(dist: &[f64]) -> Result<f64> {
    if let Some(p) = dist.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::InvalidDistribution(format!("entry {p} is negative or non-finite")));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
    }
    Ok(dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0))
}

fn entropy_of_counts<'a>(counts: impl Iterator<Item = &'a u64>) -> f64 {
    let counts: Vec<u64> = counts.copied().filter(|&c| c > 0).collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of the stationary distribution over causal states.
pub fn statistical_complexity(machine: &EpsilonMachine) -> Result<f64> {
    shannon_entropy(&machine.stationary)
}

/// Stationary average of the per-state next-symbol entropies.
pub fn entropy_rate(machine: &EpsilonMachine) -> Result<f64> {
    let mut h = 0.0;
    for (state, &w) in machine.states.iter().zip(&machine.stationary) {
        h += w * shannon_entropy(&state.next_dist)?;
    }
    Ok(h)
}

/// Entropy of the empirical distribution of length-`l` windows.
pub fn block_entropy(symbols: &[u8], l: usize) -> Result<f64> {
    if l == 0 {
        return Ok(0.0);
    }
    if l > symbols.len() {
        return Err(Error::SequenceTooShort {
            len: symbols.len(),
            required: l,
        });
    }
    let mut counts: HashMap<&[u8], u64> = HashMap::new();
    for w in symbols.windows(l) {
        *counts.entry(w).or_default() += 1;
    }
    let mut values: Vec<u64> = counts.into_values().collect();
    // fixed summation order
    values.sort_unstable();
    Ok(entropy_of_counts(values.iter()))
}

/// Finite-length estimate `H(L) - L·h` of the information shared between
/// past and future, floored at zero.
pub fn predictable_information(symbols: &[u8], machine: &EpsilonMachine, max_len: usize) -> Result<f64> {
    if max_len == 0 {
        return Err(Error::validation("max_len", "must be at least 1"));
    }
    let h = entropy_rate(machine)?;
    let block = block_entropy(symbols, max_len)?;
    Ok((block - max_len as f64 * h).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureParams {
    /// Total window length `L` used for history counting.
    pub max_len: usize,
    pub alpha: f64,
    pub min_count: u64,
}

impl Default for MeasureParams {
    fn default() -> Self {
        let opts = ReconstructOptions::default();
        MeasureParams {
            max_len: DEFAULT_MAX_LEN,
            alpha: opts.alpha,
            min_count: opts.min_count,
        }
    }
}

impl MeasureParams {
    pub fn reconstruct_options(&self) -> ReconstructOptions {
        ReconstructOptions {
            alpha: self.alpha,
            min_count: self.min_count,
        }
    }
}

/// Measures for a bare symbol string, together with the fitted machine.
#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub complexity: f64,
    pub entropy_rate: f64,
    pub predictable_information: f64,
    pub machine: EpsilonMachine,
}

pub fn measure_symbols(symbols: &[u8], alphabet_size: usize, params: &MeasureParams) -> Result<Measured> {
    let counts = count_histories(symbols, alphabet_size, params.max_len)?;
    let machine = reconstruct(&counts, &params.reconstruct_options())?;
    Ok(Measured {
        complexity: statistical_complexity(&machine)?,
        entropy_rate: entropy_rate(&machine)?,
        predictable_information: predictable_information(symbols, &machine, params.max_len)?,
        machine,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SequenceKey {
    pub emotion: Emotion,
    pub window_index: usize,
    pub strategy: BinningKind,
}

impl SequenceKey {
    pub fn of(seq: &SymbolSequence) -> Self {
        SequenceKey {
            emotion: seq.emotion,
            window_index: seq.window_index,
            strategy: seq.strategy.kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSet {
    pub key: SequenceKey,
    pub complexity: f64,
    pub entropy_rate: f64,
    pub predictable_information: f64,
    pub n_states: usize,
    pub max_len: usize,
}

/// One row of the measures table: either a result or the reason the
/// sequence could not be measured.
pub type MeasureOutcome = std::result::Result<MeasureSet, (SequenceKey, String)>;

pub fn measure_sequence(seq: &SymbolSequence, params: &MeasureParams) -> Result<(MeasureSet, EpsilonMachine)> {
    let m = measure_symbols(&seq.symbols, ALPHABET_SIZE, params)?;
    let set = MeasureSet {
        key: SequenceKey::of(seq),
        complexity: m.complexity,
        entropy_rate: m.entropy_rate,
        predictable_information: m.predictable_information,
        n_states: m.machine.num_states(),
        max_len: params.max_len,
    };
    Ok((set, m.machine))
}

const MEASURE_HEADER: [&str; 8] = ["emotion", "window_index", "strategy", "C", "h", "E", "n_states", "error"];

pub fn write_measures<W: Write>(rows: &[MeasureOutcome], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(MEASURE_HEADER)?;
    for row in rows {
        let record: Vec<String> = match row {
            Ok(m) => vec![
                m.key.emotion.to_string(),
                m.key.window_index.to_string(),
                m.key.strategy.to_string(),
                m.complexity.to_string(),
                m.entropy_rate.to_string(),
                m.predictable_information.to_string(),
                m.n_states.to_string(),
                String::new(),
            ],
            Err((key, reason)) => vec![
                key.emotion.to_string(),
                key.window_index.to_string(),
                key.strategy.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                reason.clone(),
            ],
        };
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<measures>", e))?;
    Ok(())
}

pub fn read_measures<R: Read>(input: R, max_len: usize) -> Result<Vec<MeasureOutcome>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            field: name.into(),
            message: "missing column in header".into(),
        })
    };
    let idx: Vec<usize> = MEASURE_HEADER.iter().map(|h| col(h)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let field = |j: usize| rec.get(idx[j]).unwrap_or("");
        let parse_err = |name: &str, message: String| Error::Parse {
            line,
            field: name.into(),
            message,
        };
        let key = SequenceKey {
            emotion: field(0).parse().map_err(|e: Error| parse_err("emotion", e.to_string()))?,
            window_index: field(1)
                .parse()
                .map_err(|e: std::num::ParseIntError| parse_err("window_index", e.to_string()))?,
            strategy: field(2).parse().map_err(|e: Error| parse_err("strategy", e.to_string()))?,
        };
        if !field(7).is_empty() {
            rows.push(Err((key, field(7).to_string())));
            continue;
        }
        let num = |j: usize| {
            field(j)
                .parse::<f64>()
                .map_err(|e| parse_err(MEASURE_HEADER[j], e.to_string()))
        };
        rows.push(Ok(MeasureSet {
            key,
            complexity: num(3)?,
            entropy_rate: num(4)?,
            predictable_information: num(5)?,
            n_states: field(6)
                .parse()
                .map_err(|e: std::num::ParseIntError| parse_err("n_states", e.to_string()))?,
            max_len,
        }));
    }
    Ok(rows)
}
