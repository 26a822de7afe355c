//! Windowing of a corpus into fixed-length temporal sequences and
//! discretization of each window's scores onto a four-symbol alphabet.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Corpus, Emotion};

pub const ALPHABET_SIZE: usize = 4;
pub const DEFAULT_WINDOW_LEN: usize = 3000;
pub const DEFAULT_EXP_BASE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinningKind {
    Quartile,
    RankUniform,
    Exponential,
}

impl BinningKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BinningKind::Quartile => "quartile",
            BinningKind::RankUniform => "rank_uniform",
            BinningKind::Exponential => "exponential",
        }
    }
}

impl fmt::Display for BinningKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BinningKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quartile" => Ok(BinningKind::Quartile),
            "rank_uniform" => Ok(BinningKind::RankUniform),
            "exponential" => Ok(BinningKind::Exponential),
            other => Err(Error::validation(
                "strategy",
                format!("unknown binning strategy `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningStrategy {
    pub kind: BinningKind,
    /// Only consulted by [`BinningKind::Exponential`].
    #[serde(default = "default_exp_base")]
    pub exp_base: f64,
}

fn default_exp_base() -> f64 {
    DEFAULT_EXP_BASE
}

impl BinningStrategy {
    pub fn new(kind: BinningKind) -> Self {
        BinningStrategy {
            kind,
            exp_base: DEFAULT_EXP_BASE,
        }
    }

    pub fn exponential(base: f64) -> Result<Self> {
        let s = BinningStrategy {
            kind: BinningKind::Exponential,
            exp_base: base,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.exp_base.is_finite() && self.exp_base > 1.0) {
            return Err(Error::validation(
                "exp_base",
                format!("{} must be a finite number > 1", self.exp_base),
            ));
        }
        Ok(())
    }
}

impl Default for BinningStrategy {
    fn default() -> Self {
        BinningStrategy::new(BinningKind::Quartile)
    }
}

/// Raw scores of one emotion over one window of consecutive records.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub emotion: Emotion,
    pub window_index: usize,
    /// Offset of the first record in the corpus.
    pub start: usize,
    pub raw: Vec<f64>,
    pub record_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolSequence {
    pub emotion: Emotion,
    pub window_index: usize,
    pub strategy: BinningStrategy,
    pub symbols: Vec<u8>,
    pub source_record_ids: Vec<String>,
}

/// Splits the corpus into non-overlapping windows of `window_len` records,
/// dropping any trailing partial window. Output is ordered by emotion, then
/// window index.
pub fn segment(corpus: &Corpus, window_len: usize) -> Result<Vec<Window>> {
    if window_len < 2 {
        return Err(Error::validation("window_len", "must be at least 2"));
    }
    let records = corpus.records();
    let n_windows = records.len() / window_len;
    let mut windows = Vec::with_capacity(n_windows * Emotion::ALL.len());
    for emotion in Emotion::ALL {
        for (window_index, chunk) in records.chunks_exact(window_len).enumerate() {
            windows.push(Window {
                emotion,
                window_index,
                start: window_index * window_len,
                raw: chunk.iter().map(|r| r.emotions.get(emotion)).collect(),
                record_ids: chunk.iter().map(|r| r.id.clone()).collect(),
            });
        }
    }
    Ok(windows)
}

/// Linear-interpolation quantile of sorted data (the "type 7" rule).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quartile_boundaries(raw: &[f64]) -> [f64; 3] {
    let mut sorted = raw.to_vec();
    sorted.sort_by(f64::total_cmp);
    [0.25, 0.5, 0.75].map(|p| quantile_sorted(&sorted, p))
}

fn symbol_for(value: f64, boundaries: &[f64; 3]) -> u8 {
    boundaries.iter().take_while(|&&b| value >= b).count() as u8
}

/// Bins by within-window quartiles using half-open intervals `[Q_k, Q_{k+1})`.
pub fn bin_quartile(raw: &[f64]) -> Vec<u8> {
    if raw.is_empty() {
        return Vec::new();
    }
    let bounds = quartile_boundaries(raw);
    raw.iter().map(|&v| symbol_for(v, &bounds)).collect()
}

/// Ranks values (ties broken by position) and cuts the ranks into four
/// equal-sized groups, returning symbols in the original order.
pub fn bin_rank_uniform(raw: &[f64]) -> Vec<u8> {
    let n = raw.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
    let mut out = vec![0u8; n];
    for (rank, &pos) in order.iter().enumerate() {
        out[pos] = (ALPHABET_SIZE * rank / n) as u8;
    }
    out
}

/// Upper boundaries of the first three exponential-width bins on `[0, 1]`.
/// Bin `k` has width proportional to `base^k`.
pub fn exponential_boundaries(base: f64) -> [f64; 3] {
    let widths: Vec<f64> = (0..ALPHABET_SIZE as i32).map(|k| base.powi(k)).collect();
    let total: f64 = widths.iter().sum();
    let mut acc = 0.0;
    [0, 1, 2].map(|k| {
        acc += widths[k];
        acc / total
    })
}

pub fn bin_exponential(raw: &[f64], base: f64) -> Result<Vec<u8>> {
    BinningStrategy::exponential(base)?;
    let bounds = exponential_boundaries(base);
    raw.iter()
        .enumerate()
        .map(|(index, &v)| {
            if (0.0..=1.0).contains(&v) {
                Ok(symbol_for(v, &bounds))
            } else {
                Err(Error::OutOfRange { index, value: v })
            }
        })
        .collect()
}

pub fn bin(raw: &[f64], strategy: &BinningStrategy) -> Result<Vec<u8>> {
    strategy.validate()?;
    match strategy.kind {
        BinningKind::Quartile => Ok(bin_quartile(raw)),
        BinningKind::RankUniform => Ok(bin_rank_uniform(raw)),
        BinningKind::Exponential => bin_exponential(raw, strategy.exp_base),
    }
}

pub fn discretize(window: &Window, strategy: &BinningStrategy) -> Result<SymbolSequence> {
    Ok(SymbolSequence {
        emotion: window.emotion,
        window_index: window.window_index,
        strategy: *strategy,
        symbols: bin(&window.raw, strategy)?,
        source_record_ids: window.record_ids.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SequenceSidecar {
    emotion: Emotion,
    window_index: usize,
    strategy: BinningStrategy,
    length: usize,
    alphabet_size: usize,
    source_record_ids: Vec<String>,
}

impl SymbolSequence {
    /// File stem shared by the symbol file and its JSON sidecar.
    pub fn file_stem(&self) -> String {
        format!(
            "{}_{:04}_{}",
            self.emotion, self.window_index, self.strategy.kind
        )
    }

    pub fn symbols_string(&self) -> String {
        self.symbols.iter().map(|&s| char::from(b'0' + s)).collect()
    }

    /// Writes `<stem>.txt` (one line of symbol digits) and `<stem>.json`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<PathBuf> {
        let txt = dir.join(format!("{}.txt", self.file_stem()));
        let json = dir.join(format!("{}.json", self.file_stem()));
        fs::write(&txt, format!("{}\n", self.symbols_string())).map_err(|e| Error::io(&txt, e))?;
        let sidecar = SequenceSidecar {
            emotion: self.emotion,
            window_index: self.window_index,
            strategy: self.strategy,
            length: self.symbols.len(),
            alphabet_size: ALPHABET_SIZE,
            source_record_ids: self.source_record_ids.clone(),
        };
        let body = serde_json::to_string_pretty(&sidecar)?;
        fs::write(&json, body + "\n").map_err(|e| Error::io(&json, e))?;
        Ok(txt)
    }

    /// Reads a symbol file and its sidecar; `path` may name either.
    pub fn read_from(path: &Path) -> Result<SymbolSequence> {
        let txt = path.with_extension("txt");
        let json = path.with_extension("json");
        let body = fs::read_to_string(&txt).map_err(|e| Error::io(&txt, e))?;
        let symbols = parse_symbols(&body)?;
        let meta = fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
        let sidecar: SequenceSidecar = serde_json::from_str(&meta)?;
        if sidecar.length != symbols.len() {
            return Err(Error::validation(
                "length",
                format!(
                    "sidecar says {} symbols, file has {}",
                    sidecar.length,
                    symbols.len()
                ),
            ));
        }
        Ok(SymbolSequence {
            emotion: sidecar.emotion,
            window_index: sidecar.window_index,
            strategy: sidecar.strategy,
            symbols,
            source_record_ids: sidecar.source_record_ids,
        })
    }
}

/// Parses a string of decimal symbol digits, ignoring whitespace.
pub fn parse_symbols(text: &str) -> Result<Vec<u8>> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .enumerate()
        .map(|(i, c)| match c.to_digit(10) {
            Some(d) => Ok(d as u8),
            _ => Err(Error::Parse {
                line: 1,
                field: "symbols".into(),
                message: format!("character {i} (`{c}`) is not a digit"),
            }),
        })
        .collect()
}
