//! Seeded generators: symbol strings from known unifilar machines, and
//! synthetic scored corpora that mix a "human" and a "bot" mechanism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::cssr::EpsilonMachine;
use crate::error::{Error, Result};
use crate::ingest::{Corpus, Emotion, EmotionScores, MessageRecord};
use crate::sequencing::ALPHABET_SIZE;

/// Machine given explicitly as per-state emission probabilities and
/// successor tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineSpec {
    pub alphabet_size: usize,
    pub next_dist: Vec<Vec<f64>>,
    pub transitions: Vec<Vec<Option<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Process {
    IidUniform {
        #[serde(default = "default_alphabet")]
        alphabet_size: usize,
    },
    /// Binary i.i.d. with `P(1) = p`.
    BiasedCoin { p: f64 },
    /// Emits `0, 1, …, k − 1` cyclically.
    PeriodK { k: usize },
    /// Binary process without consecutive 1s; `p` is the probability of a 1
    /// after a 0.
    GoldenMean {
        #[serde(default = "half")]
        p: f64,
    },
    /// Blocks of 1s of even length separated by 0s.
    EvenProcess {
        #[serde(default = "half")]
        p: f64,
    },
    Custom { machine: MachineSpec },
}

fn default_alphabet() -> usize {
    ALPHABET_SIZE
}

fn half() -> f64 {
    0.5
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::validation(name, format!("{p} is not a probability")))
    }
}

impl Process {
    pub fn alphabet_size(&self) -> usize {
        match self {
            Process::IidUniform { alphabet_size } => *alphabet_size,
            Process::BiasedCoin { .. } | Process::GoldenMean { .. } | Process::EvenProcess { .. } => 2,
            Process::PeriodK { k } => *k,
            Process::Custom { machine } => machine.alphabet_size,
        }
    }

    /// The generating machine, with its stationary distribution.
    pub fn machine(&self) -> Result<EpsilonMachine> {
        match self {
            Process::IidUniform { alphabet_size: k } => {
                if !(1..=10).contains(k) {
                    return Err(Error::validation("alphabet_size", "must be in 1..=10"));
                }
                EpsilonMachine::from_parts(*k, vec![vec![1.0 / *k as f64; *k]], vec![vec![Some(0); *k]])
            }
            Process::BiasedCoin { p } => {
                check_probability("p", *p)?;
                let emits = |q: f64| (q > 0.0).then_some(0);
                EpsilonMachine::from_parts(2, vec![vec![1.0 - p, *p]], vec![vec![emits(1.0 - p), emits(*p)]])
            }
            Process::PeriodK { k } => {
                if !(1..=10).contains(k) {
                    return Err(Error::validation("k", "period must be in 1..=10"));
                }
                let next_dist = (0..*k)
                    .map(|i| (0..*k).map(|s| if s == i { 1.0 } else { 0.0 }).collect())
                    .collect();
                let transitions = (0..*k)
                    .map(|i| (0..*k).map(|s| (s == i).then_some((i + 1) % k)).collect())
                    .collect();
                EpsilonMachine::from_parts(*k, next_dist, transitions)
            }
            Process::GoldenMean { p } => {
                check_probability("p", *p)?;
                EpsilonMachine::from_parts(
                    2,
                    vec![vec![1.0 - p, *p], vec![1.0, 0.0]],
                    vec![vec![(*p < 1.0).then_some(0), Some(1)], vec![Some(0), None]],
                )
            }
            Process::EvenProcess { p } => {
                check_probability("p", *p)?;
                EpsilonMachine::from_parts(
                    2,
                    vec![vec![1.0 - p, *p], vec![0.0, 1.0]],
                    vec![vec![(*p < 1.0).then_some(0), Some(1)], vec![None, Some(0)]],
                )
            }
            Process::Custom { machine } => EpsilonMachine::from_parts(
                machine.alphabet_size,
                machine.next_dist.clone(),
                machine.transitions.clone(),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub process: Process,
    pub seed: u64,
}

fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // rounding left u beyond the last cumulative sum
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Walks a machine, emitting one symbol per step.
#[derive(Debug, Clone)]
pub struct MachineWalker {
    machine: EpsilonMachine,
    state: usize,
}

impl MachineWalker {
    /// Starts in a state drawn from the stationary distribution.
    pub fn new<R: Rng + ?Sized>(machine: EpsilonMachine, rng: &mut R) -> Self {
        let state = sample_index(rng, &machine.stationary);
        MachineWalker { machine, state }
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u8 {
        let s = &self.machine.states[self.state];
        let symbol = sample_index(rng, &s.next_dist);
        self.state = s.transitions[symbol].expect("positive-probability symbol has a successor");
        symbol as u8
    }
}

pub fn generate_symbols(spec: &ProcessSpec, n: usize) -> Result<Vec<u8>> {
    if n == 0 {
        return Err(Error::validation("n", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut walker = MachineWalker::new(spec.process.machine()?, &mut rng);
    Ok((0..n).map(|_| walker.step(&mut rng)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreDistribution {
    Beta { alpha: f64, beta: f64 },
    Uniform { low: f64, high: f64 },
    Constant { value: f64 },
}

impl ScoreDistribution {
    fn validate(&self, name: &str) -> Result<()> {
        let ok = match *self {
            ScoreDistribution::Beta { alpha, beta } => alpha > 0.0 && beta > 0.0,
            ScoreDistribution::Uniform { low, high } => (0.0..=1.0).contains(&low) && (0.0..=1.0).contains(&high) && low <= high,
            ScoreDistribution::Constant { value } => (0.0..=1.0).contains(&value),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::validation(name, format!("{self:?} is not a distribution on [0, 1]")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ScoreDistribution::Beta { alpha, beta } => alpha / (alpha + beta),
            ScoreDistribution::Uniform { low, high } => 0.5 * (low + high),
            ScoreDistribution::Constant { value } => value,
        }
    }

    pub fn sd(&self) -> f64 {
        match *self {
            ScoreDistribution::Beta { alpha, beta } => {
                let s = alpha + beta;
                (alpha * beta / (s * s * (s + 1.0))).sqrt()
            }
            ScoreDistribution::Uniform { low, high } => (high - low) / 12f64.sqrt(),
            ScoreDistribution::Constant { .. } => 0.0,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ScoreDistribution::Beta { alpha, beta } => Beta::new(alpha, beta).expect("validated").sample(rng),
            ScoreDistribution::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            ScoreDistribution::Constant { value } => value,
        }
        .clamp(0.0, 1.0)
    }
}

/// Per-record word and character counts, drawn uniformly from the ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WordModel {
    pub min_words: u32,
    pub max_words: u32,
    pub min_chars_per_word: u32,
    pub max_chars_per_word: u32,
}

impl Default for WordModel {
    fn default() -> Self {
        WordModel {
            min_words: 10,
            max_words: 32,
            min_chars_per_word: 3,
            max_chars_per_word: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n_records: usize,
    pub bot_fraction: f64,
    pub human_process: Process,
    pub bot_process: Process,
    pub human_bot_score: ScoreDistribution,
    pub bot_bot_score: ScoreDistribution,
    /// Rate λ of the exponential inter-arrival gaps, per second.
    pub arrival_rate: f64,
    #[serde(default)]
    pub start_time: f64,
    #[serde(default)]
    pub words: WordModel,
    pub seed: u64,
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        check_probability("bot_fraction", self.bot_fraction)?;
        if !(self.arrival_rate.is_finite() && self.arrival_rate > 0.0) {
            return Err(Error::validation("arrival_rate", "must be positive"));
        }
        for (name, p) in [("human_process", &self.human_process), ("bot_process", &self.bot_process)] {
            if p.alphabet_size() > ALPHABET_SIZE {
                return Err(Error::validation(name, format!("alphabet larger than {ALPHABET_SIZE}")));
            }
        }
        self.human_bot_score.validate("human_bot_score")?;
        self.bot_bot_score.validate("bot_bot_score")?;
        let w = &self.words;
        if w.min_words > w.max_words || w.min_chars_per_word == 0 || w.min_chars_per_word > w.max_chars_per_word {
            return Err(Error::validation("words", "invalid ranges"));
        }
        Ok(())
    }
}

/// Draws a corpus record by record: pick the mechanism, advance its walker
/// for each emotion, and map symbol `k` to a uniform score in
/// `[k/4, (k+1)/4)`.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let human_machine = spec.human_process.machine()?;
    let bot_machine = spec.bot_process.machine()?;
    let mut human: Vec<MachineWalker> = Emotion::ALL
        .iter()
        .map(|_| MachineWalker::new(human_machine.clone(), &mut rng))
        .collect();
    let mut bot: Vec<MachineWalker> = Emotion::ALL
        .iter()
        .map(|_| MachineWalker::new(bot_machine.clone(), &mut rng))
        .collect();
    let gaps = Exp::new(spec.arrival_rate).map_err(|e| Error::validation("arrival_rate", e.to_string()))?;
    let width = 1.0 / ALPHABET_SIZE as f64;

    let mut t = spec.start_time;
    let mut records = Vec::with_capacity(spec.n_records);
    for i in 0..spec.n_records {
        let is_bot = rng.random::<f64>() < spec.bot_fraction;
        let (walkers, scores) = if is_bot {
            (&mut bot, &spec.bot_bot_score)
        } else {
            (&mut human, &spec.human_bot_score)
        };
        let mut emotions = EmotionScores::default();
        for (emotion, walker) in Emotion::ALL.into_iter().zip(walkers.iter_mut()) {
            let symbol = walker.step(&mut rng);
            let v = (f64::from(symbol) + rng.random::<f64>()) * width;
            emotions.set(emotion, v.min(1.0));
        }
        let bot_score = scores.sample(&mut rng);
        let w = &spec.words;
        let word_count = rng.random_range(w.min_words..=w.max_words);
        let char_count: u32 = (0..word_count)
            .map(|_| rng.random_range(w.min_chars_per_word..=w.max_chars_per_word))
            .sum();
        t += gaps.sample(&mut rng);
        records.push(MessageRecord {
            id: format!("m{i:07}"),
            timestamp: t,
            emotions,
            bot_score,
            word_count,
            char_count,
        });
    }
    Corpus::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(process: Process, seed: u64) -> ProcessSpec {
        ProcessSpec { process, seed }
    }

    #[test]
    fn golden_mean_never_emits_11() {
        for seed in 0..5 {
            let s = generate_symbols(&spec(Process::GoldenMean { p: 0.5 }, seed), 5000).unwrap();
            assert!(!s.windows(2).any(|w| w == [1, 1]));
        }
    }

    #[test]
    fn period_two_short_output() {
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..20 {
            let s = generate_symbols(&spec(Process::PeriodK { k: 2 }, seed), 6).unwrap();
            seen.insert(s);
        }
        let allowed = [vec![0, 1, 0, 1, 0, 1], vec![1, 0, 1, 0, 1, 0]];
        assert!(seen.iter().all(|s| allowed.contains(s)));
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn same_seed_same_output() {
        let s = spec(Process::EvenProcess { p: 0.5 }, 42);
        assert_eq!(generate_symbols(&s, 1000).unwrap(), generate_symbols(&s, 1000).unwrap());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(generate_symbols(&spec(Process::BiasedCoin { p: 1.5 }, 0), 10).is_err());
        assert!(generate_symbols(&spec(Process::GoldenMean { p: 0.0 }, 0), 10).is_err());
        assert!(generate_symbols(&spec(Process::IidUniform { alphabet_size: 4 }, 0), 0).is_err());
        let custom = MachineSpec {
            alphabet_size: 2,
            next_dist: vec![vec![0.6, 0.6]],
            transitions: vec![vec![Some(0), Some(0)]],
        };
        assert!(generate_symbols(&spec(Process::Custom { machine: custom }, 0), 10).is_err());
    }

    #[test]
    fn process_spec_json() {
        let s: ProcessSpec = serde_json::from_str(r#"{"process":{"name":"golden_mean"},"seed":7}"#).unwrap();
        assert_eq!(s.process, Process::GoldenMean { p: 0.5 });
    }

    fn corpus_spec(bot_fraction: f64, seed: u64) -> CorpusSpec {
        CorpusSpec {
            n_records: 9000,
            bot_fraction,
            human_process: Process::PeriodK { k: 4 },
            bot_process: Process::IidUniform { alphabet_size: 4 },
            human_bot_score: ScoreDistribution::Beta { alpha: 2.0, beta: 18.0 },
            bot_bot_score: ScoreDistribution::Beta { alpha: 8.0, beta: 2.0 },
            arrival_rate: 2.0,
            start_time: 1.56e9,
            words: WordModel::default(),
            seed,
        }
    }

    #[test]
    fn corpus_is_deterministic_and_valid() {
        let a = generate_corpus(&corpus_spec(0.3, 9)).unwrap();
        let b = generate_corpus(&corpus_spec(0.3, 9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 9000);
        assert!(a.records().windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }

    #[test]
    fn human_only_bot_level_near_human_mean() {
        let s = corpus_spec(0.0, 3);
        let corpus = generate_corpus(&s).unwrap();
        let mean = s.human_bot_score.mean();
        let sd_of_mean = s.human_bot_score.sd() / 3000f64.sqrt();
        for chunk in corpus.records().chunks_exact(3000) {
            let level = crate::features::bot_level(chunk).unwrap();
            assert!((level - mean).abs() < 3.0 * sd_of_mean, "{level} vs {mean}");
        }
    }

    #[test]
    fn bad_corpus_spec() {
        let mut s = corpus_spec(1.2, 0);
        assert!(generate_corpus(&s).is_err());
        s.bot_fraction = 0.5;
        s.arrival_rate = 0.0;
        assert!(generate_corpus(&s).is_err());
    }
}
