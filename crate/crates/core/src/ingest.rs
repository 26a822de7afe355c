//! Scored message corpora: the record schema, CSV/JSONL readers and
//! writers, and the [`Scorer`] contract used to attach emotion and bot
//! scores to raw text.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Fear,
    Sadness,
    Joy,
    Disgust,
}

impl Emotion {
    pub const ALL: [Emotion; 5] = [
        Emotion::Anger,
        Emotion::Fear,
        Emotion::Sadness,
        Emotion::Joy,
        Emotion::Disgust,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Fear => "fear",
            Emotion::Sadness => "sadness",
            Emotion::Joy => "joy",
            Emotion::Disgust => "disgust",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Emotion::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::validation("emotion", format!("unknown emotion label `{s}`")))
    }
}

/// Scores for the five emotion labels, indexed by [`Emotion`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EmotionScores(pub [f64; 5]);

impl EmotionScores {
    pub fn uniform(value: f64) -> Self {
        EmotionScores([value; 5])
    }

    pub fn get(&self, emotion: Emotion) -> f64 {
        self.0[emotion.index()]
    }

    pub fn set(&mut self, emotion: Emotion, value: f64) {
        self.0[emotion.index()] = value;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MessageRecord {
    pub id: String,
    /// Seconds since the Unix epoch.
    pub timestamp: f64,
    pub emotions: EmotionScores,
    pub bot_score: f64,
    pub word_count: u32,
    /// Non-whitespace characters.
    pub char_count: u32,
}

fn check_unit(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::validation(field, format!("{value} is outside [0, 1]")))
    }
}

impl MessageRecord {
    pub fn validate(&self) -> Result<()> {
        if !self.timestamp.is_finite() {
            return Err(Error::validation("timestamp", "must be finite"));
        }
        for emotion in Emotion::ALL {
            check_unit(emotion.as_str(), self.emotions.get(emotion))?;
        }
        check_unit("bot_score", self.bot_score)?;
        if self.word_count >= 1 && self.char_count < self.word_count {
            return Err(Error::validation(
                "char_count",
                format!(
                    "{} characters cannot hold {} words",
                    self.char_count, self.word_count
                ),
            ));
        }
        Ok(())
    }
}

/// Time-ordered list of records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    records: Vec<MessageRecord>,
}

impl Corpus {
    /// Validates every record and sorts by timestamp. The sort is stable, so
    /// records sharing a timestamp keep their input order.
    pub fn new(mut records: Vec<MessageRecord>) -> Result<Self> {
        for record in &records {
            record.validate()?;
        }
        records.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        Ok(Corpus { records })
    }

    pub fn records(&self) -> &[MessageRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn into_records(self) -> Vec<MessageRecord> {
        self.records
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "jsonl" | "ndjson" => Some(Format::Jsonl),
            _ => None,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(Error::validation("format", format!("unknown format `{other}`"))),
        }
    }
}

const CSV_HEADER: [&str; 10] = [
    "id",
    "timestamp",
    "anger",
    "fear",
    "sadness",
    "joy",
    "disgust",
    "bot_score",
    "word_count",
    "char_count",
];

/// Parses an ISO-8601 / RFC 3339 timestamp or a numeric epoch value.
pub fn parse_timestamp(raw: &str) -> std::result::Result<f64, String> {
    let raw = raw.trim();
    if let Ok(secs) = raw.parse::<f64>() {
        return if secs.is_finite() {
            Ok(secs)
        } else {
            Err(format!("non-finite timestamp `{raw}`"))
        };
    }
    let to_secs = |dt: chrono::DateTime<chrono::Utc>| {
        dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_nanos()) * 1e-9
    };
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(raw) {
        return Ok(to_secs(dt.with_timezone(&chrono::Utc)));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(naive) = chrono::NaiveDateTime::parse_from_str(raw, fmt) {
            return Ok(to_secs(naive.and_utc()));
        }
    }
    Err(format!("`{raw}` is neither epoch seconds nor an ISO-8601 timestamp"))
}

fn parse_field<T: FromStr>(line: usize, field: &str, raw: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.trim().parse::<T>().map_err(|e| Error::Parse {
        line,
        field: field.to_string(),
        message: format!("`{raw}`: {e}"),
    })
}

fn with_line(line: usize, err: Error) -> Error {
    match err {
        Error::Validation { field, message } => Error::Parse {
            line,
            field,
            message,
        },
        other => other,
    }
}

pub fn read_records(path: impl AsRef<Path>, format: Format) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let records = match format {
        Format::Csv => read_csv(reader)?,
        Format::Jsonl => read_jsonl(reader, path)?,
    };
    Corpus::new(records)
}

fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<MessageRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::Headers).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut columns = HashMap::new();
    for name in CSV_HEADER {
        let idx = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                line: 1,
                field: name.to_string(),
                message: "missing column in header".into(),
            })?;
        columns.insert(name, idx);
    }

    let mut records = Vec::new();
    for (row, result) in rdr.records().enumerate() {
        // header is line 1
        let line = row + 2;
        let rec = result?;
        let get = |name: &str| rec.get(columns[name]).unwrap_or("");
        let mut emotions = EmotionScores::default();
        for emotion in Emotion::ALL {
            let name = emotion.as_str();
            emotions.set(emotion, parse_field(line, name, get(name))?);
        }
        let timestamp = parse_timestamp(get("timestamp")).map_err(|message| Error::Parse {
            line,
            field: "timestamp".into(),
            message,
        })?;
        let record = MessageRecord {
            id: get("id").to_string(),
            timestamp,
            emotions,
            bot_score: parse_field(line, "bot_score", get("bot_score"))?,
            word_count: parse_field(line, "word_count", get("word_count"))?,
            char_count: parse_field(line, "char_count", get("char_count"))?,
        };
        record.validate().map_err(|e| with_line(line, e))?;
        records.push(record);
    }
    Ok(records)
}

fn json_number(line: usize, field: &str, value: Option<&Value>) -> Result<f64> {
    let missing = || Error::Parse {
        line,
        field: field.to_string(),
        message: "missing".into(),
    };
    match value.ok_or_else(missing)? {
        Value::Number(n) => n.as_f64().ok_or_else(missing),
        Value::String(s) => parse_field(line, field, s),
        other => Err(Error::Parse {
            line,
            field: field.to_string(),
            message: format!("expected a number, found {other}"),
        }),
    }
}

fn json_count(line: usize, field: &str, value: Option<&Value>) -> Result<u32> {
    let raw = json_number(line, field, value)?;
    if raw < 0.0 || raw.fract() != 0.0 || raw > f64::from(u32::MAX) {
        return Err(Error::Parse {
            line,
            field: field.to_string(),
            message: format!("{raw} is not a nonnegative integer"),
        });
    }
    Ok(raw as u32)
}

fn parse_json_record(line: usize, obj: &Map<String, Value>) -> Result<MessageRecord> {
    let id = match obj.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => {
            return Err(Error::Parse {
                line,
                field: "id".into(),
                message: "missing or not a string".into(),
            })
        }
    };
    let timestamp = match obj.get("timestamp") {
        Some(Value::Number(n)) => n.as_f64().unwrap_or(f64::NAN),
        Some(Value::String(s)) => parse_timestamp(s).map_err(|message| Error::Parse {
            line,
            field: "timestamp".into(),
            message,
        })?,
        _ => {
            return Err(Error::Parse {
                line,
                field: "timestamp".into(),
                message: "missing".into(),
            })
        }
    };
    let nested = obj.get("emotions").and_then(Value::as_object);
    let mut emotions = EmotionScores::default();
    for emotion in Emotion::ALL {
        let name = emotion.as_str();
        let value = nested.and_then(|m| m.get(name)).or_else(|| obj.get(name));
        emotions.set(emotion, json_number(line, name, value)?);
    }
    let record = MessageRecord {
        id,
        timestamp,
        emotions,
        bot_score: json_number(line, "bot_score", obj.get("bot_score"))?,
        word_count: json_count(line, "word_count", obj.get("word_count"))?,
        char_count: json_count(line, "char_count", obj.get("char_count"))?,
    };
    record.validate().map_err(|e| with_line(line, e))?;
    Ok(record)
}

fn read_jsonl<R: BufRead>(reader: R, path: &Path) -> Result<Vec<MessageRecord>> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|e| Error::io(path, e))?;
        if text.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: line_no,
            field: "<line>".into(),
            message: e.to_string(),
        })?;
        let obj = value.as_object().ok_or_else(|| Error::Parse {
            line: line_no,
            field: "<line>".into(),
            message: "expected a JSON object".into(),
        })?;
        records.push(parse_json_record(line_no, obj)?);
    }
    Ok(records)
}

pub fn write_records(corpus: &Corpus, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_records_to(corpus, &mut out, format).map_err(|e| match e {
        Error::Csv(c) if c.is_io_error() => Error::io(path, std::io::Error::other(c.to_string())),
        other => other,
    })?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_records_to<W: Write>(corpus: &Corpus, out: W, format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut wtr = csv::Writer::from_writer(out);
            wtr.write_record(CSV_HEADER)?;
            for r in corpus.records() {
                let mut row = vec![r.id.clone(), r.timestamp.to_string()];
                row.extend(r.emotions.0.iter().map(f64::to_string));
                row.push(r.bot_score.to_string());
                row.push(r.word_count.to_string());
                row.push(r.char_count.to_string());
                wtr.write_record(&row)?;
            }
            wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        }
        Format::Jsonl => {
            let mut out = out;
            for r in corpus.records() {
                let mut obj = Map::new();
                obj.insert("id".into(), Value::from(r.id.clone()));
                obj.insert("timestamp".into(), Value::from(r.timestamp));
                for emotion in Emotion::ALL {
                    obj.insert(emotion.as_str().into(), Value::from(r.emotions.get(emotion)));
                }
                obj.insert("bot_score".into(), Value::from(r.bot_score));
                obj.insert("word_count".into(), Value::from(r.word_count));
                obj.insert("char_count".into(), Value::from(r.char_count));
                serde_json::to_writer(&mut out, &Value::Object(obj))?;
                out.write_all(b"\n").map_err(|e| Error::io("<jsonl>", e))?;
            }
        }
    }
    Ok(())
}

/// Output of a [`Scorer`] for a single text.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub emotions: EmotionScores,
    pub bot_score: f64,
}

/// Anything that maps a message text to five emotion scores and a bot score.
///
/// Implementations for hosted classification services live outside this
/// crate; [`MockScorer`], [`ConstantScorer`] and [`FileScorer`] cover offline
/// use.
pub trait Scorer {
    fn score(&self, text: &str) -> std::result::Result<Scores, String>;
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantScorer(pub Scores);

impl Scorer for ConstantScorer {
    fn score(&self, _text: &str) -> std::result::Result<Scores, String> {
        Ok(self.0)
    }
}

/// Deterministic scorer deriving every score from a SHA-256 digest of the
/// text.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockScorer;

impl Scorer for MockScorer {
    fn score(&self, text: &str) -> std::result::Result<Scores, String> {
        let digest = Sha256::digest(text.as_bytes());
        let unit = |i: usize| {
            let bytes: [u8; 4] = digest[4 * i..4 * i + 4].try_into().expect("4 bytes");
            f64::from(u32::from_le_bytes(bytes)) / f64::from(u32::MAX)
        };
        let mut emotions = EmotionScores::default();
        for (i, slot) in emotions.0.iter_mut().enumerate() {
            *slot = unit(i);
        }
        Ok(Scores {
            emotions,
            bot_score: unit(5),
        })
    }
}

/// Looks scores up by exact text in a pre-scored JSONL file whose lines
/// carry `text`, the five emotion keys (flat or nested under `emotions`) and
/// `bot_score`.
#[derive(Debug, Clone, Default)]
pub struct FileScorer {
    table: HashMap<String, Scores>,
}

impl FileScorer {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut table = HashMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line_no = i + 1;
            let text = line.map_err(|e| Error::io(path, e))?;
            if text.trim().is_empty() {
                continue;
            }
            let value: Value = serde_json::from_str(&text)?;
            let obj = value.as_object().ok_or_else(|| Error::Parse {
                line: line_no,
                field: "<line>".into(),
                message: "expected a JSON object".into(),
            })?;
            let key = obj
                .get("text")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    field: "text".into(),
                    message: "missing".into(),
                })?;
            let nested = obj.get("emotions").and_then(Value::as_object);
            let mut emotions = EmotionScores::default();
            for emotion in Emotion::ALL {
                let name = emotion.as_str();
                let v = nested.and_then(|m| m.get(name)).or_else(|| obj.get(name));
                let v = json_number(line_no, name, v)?;
                check_unit(name, v).map_err(|e| with_line(line_no, e))?;
                emotions.set(emotion, v);
            }
            let bot_score = json_number(line_no, "bot_score", obj.get("bot_score"))?;
            check_unit("bot_score", bot_score).map_err(|e| with_line(line_no, e))?;
            table.insert(key.to_string(), Scores { emotions, bot_score });
        }
        Ok(FileScorer { table })
    }

    pub fn insert(&mut self, text: impl Into<String>, scores: Scores) {
        self.table.insert(text.into(), scores);
    }
}

impl Scorer for FileScorer {
    fn score(&self, text: &str) -> std::result::Result<Scores, String> {
        self.table
            .get(text)
            .copied()
            .ok_or_else(|| format!("no pre-computed scores for text `{text}`"))
    }
}

/// Whitespace-delimited token count.
pub fn word_count(text: &str) -> u32 {
    text.split_whitespace().count() as u32
}

/// Count of non-whitespace characters.
pub fn char_count(text: &str) -> u32 {
    text.chars().filter(|c| !c.is_whitespace()).count() as u32
}

/// A raw message awaiting scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMessage {
    pub id: String,
    pub timestamp: f64,
    pub text: String,
}

/// Scores bare texts; ids and timestamps are the input positions.
pub fn score_with<S: Scorer + ?Sized>(texts: &[impl AsRef<str>], scorer: &S) -> Result<Corpus> {
    let messages: Vec<RawMessage> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| RawMessage {
            id: i.to_string(),
            timestamp: i as f64,
            text: t.as_ref().to_string(),
        })
        .collect();
    score_messages(&messages, scorer)
}

pub fn score_messages<S: Scorer + ?Sized>(messages: &[RawMessage], scorer: &S) -> Result<Corpus> {
    let mut records = Vec::with_capacity(messages.len());
    for (index, msg) in messages.iter().enumerate() {
        let scores = scorer
            .score(&msg.text)
            .map_err(|message| Error::Scorer { index, message })?;
        let record = MessageRecord {
            id: msg.id.clone(),
            timestamp: msg.timestamp,
            emotions: scores.emotions,
            bot_score: scores.bot_score,
            word_count: word_count(&msg.text),
            char_count: char_count(&msg.text),
        };
        record.validate().map_err(|e| match e {
            Error::Validation { message, field } => Error::Scorer {
                index,
                message: format!("{field}: {message}"),
            },
            other => other,
        })?;
        records.push(record);
    }
    Corpus::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, ts: f64) -> MessageRecord {
        MessageRecord {
            id: id.into(),
            timestamp: ts,
            emotions: EmotionScores([0.1, 0.2, 0.3, 0.4, 0.5]),
            bot_score: 0.05,
            word_count: 3,
            char_count: 12,
        }
    }

    fn write_tmp(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_three_row_csv() {
        let f = write_tmp(
            "id,timestamp,anger,fear,sadness,joy,disgust,bot_score,word_count,char_count\n\
             a,1,0.1,0.2,0.3,0.4,0.5,0.01,3,10\n\
             b,2,0.1,0.2,0.3,0.4,0.5,0.02,4,12\n\
             c,3,0.1,0.2,0.3,0.4,0.5,0.03,5,20\n",
            ".csv",
        );
        let corpus = read_records(f.path(), Format::Csv).unwrap();
        let ids: Vec<_> = corpus.records().iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn header_order_is_free() {
        let f = write_tmp(
            "bot_score,id,char_count,word_count,disgust,joy,sadness,fear,anger,timestamp\n\
             0.5,x,9,2,0.1,0.1,0.1,0.1,0.9,2019-06-27T01:00:00Z\n",
            ".csv",
        );
        let corpus = read_records(f.path(), Format::Csv).unwrap();
        let r = &corpus.records()[0];
        assert_eq!(r.emotions.get(Emotion::Anger), 0.9);
        assert_eq!(r.timestamp, 1_561_597_200.0);
    }

    #[test]
    fn bot_score_out_of_range_is_named() {
        let f = write_tmp(
            "id,timestamp,anger,fear,sadness,joy,disgust,bot_score,word_count,char_count\n\
             a,1,0.1,0.2,0.3,0.4,0.5,1.5,3,10\n",
            ".csv",
        );
        let err = read_records(f.path(), Format::Csv).unwrap_err();
        match err {
            Error::Parse { line, field, .. } => {
                assert_eq!(field, "bot_score");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_field_names_row_and_field() {
        let f = write_tmp(
            "id,timestamp,anger,fear,sadness,joy,disgust,bot_score,word_count,char_count\n\
             a,1,0.1,0.2,0.3,0.4,0.5,0.1,3,10\n\
             b,2,0.1,zero,0.3,0.4,0.5,0.1,3,10\n",
            ".csv",
        );
        let err = read_records(f.path(), Format::Csv).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("fear"), "{err}");
    }

    #[test]
    fn missing_emotion_label_in_jsonl() {
        let f = write_tmp(
            r#"{"id":"a","timestamp":1,"anger":0.1,"fear":0.1,"sadness":0.1,"joy":0.1,"bot_score":0.1,"word_count":1,"char_count":1}"#,
            ".jsonl",
        );
        let err = read_records(f.path(), Format::Jsonl).unwrap_err().to_string();
        assert!(err.contains("disgust"), "{err}");
    }

    #[test]
    fn jsonl_nested_emotions() {
        let f = write_tmp(
            "{\"id\":\"a\",\"timestamp\":\"2019-06-27T01:00:00.5Z\",\"emotions\":{\"anger\":0.1,\"fear\":0.2,\"sadness\":0.3,\"joy\":0.4,\"disgust\":0.5},\"bot_score\":0.1,\"word_count\":2,\"char_count\":7}\n",
            ".jsonl",
        );
        let corpus = read_records(f.path(), Format::Jsonl).unwrap();
        let r = &corpus.records()[0];
        assert_eq!(r.emotions.get(Emotion::Disgust), 0.5);
        assert_eq!(r.timestamp, 1_561_597_200.5);
    }

    #[test]
    fn swapped_timestamps_are_resorted() {
        let input = vec![record("late", 20.0), record("early", 10.0), record("tie", 20.0)];
        let mut reference = input.clone();
        reference.sort_by(|a, b| a.timestamp.partial_cmp(&b.timestamp).unwrap());
        let corpus = Corpus::new(input).unwrap();
        assert_eq!(corpus.records(), reference.as_slice());
        assert_eq!(corpus.records()[1].id, "late");
    }

    #[test]
    fn parsing_never_clamps() {
        let mut r = record("a", 0.0);
        r.emotions.set(Emotion::Joy, -0.01);
        assert!(Corpus::new(vec![r]).is_err());
        let mut r = record("a", 0.0);
        r.char_count = 2;
        assert!(Corpus::new(vec![r]).is_err());
    }

    #[test]
    fn counting_rules() {
        assert_eq!(word_count("hello world"), 2);
        assert_eq!(char_count("hello world"), 10);
        assert_eq!(word_count("#demdebate https://t.co/x  now"), 3);
        assert_eq!(word_count(""), 0);
    }

    #[test]
    fn constant_scorer_fills_records() {
        let scorer = ConstantScorer(Scores {
            emotions: EmotionScores::uniform(0.5),
            bot_score: 0.5,
        });
        let corpus = score_with(&["one two", "three"], &scorer).unwrap();
        assert_eq!(corpus.len(), 2);
        assert!(corpus.records().iter().all(|r| r.emotions == EmotionScores::uniform(0.5)));
    }

    #[test]
    fn empty_text_scores_with_zero_words() {
        let scorer = ConstantScorer(Scores {
            emotions: EmotionScores::uniform(0.25),
            bot_score: 0.75,
        });
        let corpus = score_with(&[""], &scorer).unwrap();
        let r = &corpus.records()[0];
        assert_eq!((r.word_count, r.char_count), (0, 0));
        assert_eq!(r.bot_score, 0.75);
    }

    #[test]
    fn mock_scorer_is_deterministic() {
        let texts = ["a debate tweet", "another one"];
        let a = score_with(&texts, &MockScorer).unwrap();
        let b = score_with(&texts, &MockScorer).unwrap();
        assert_eq!(a, b);
    }

    struct Failing;
    impl Scorer for Failing {
        fn score(&self, text: &str) -> std::result::Result<Scores, String> {
            if text == "bad" {
                Err("service unavailable".into())
            } else {
                MockScorer.score(text)
            }
        }
    }

    #[test]
    fn scorer_failure_carries_index() {
        let err = score_with(&["ok", "fine", "bad"], &Failing).unwrap_err();
        assert!(matches!(err, Error::Scorer { index: 2, .. }));
    }

    #[test]
    fn file_scorer_lookup() {
        let f = write_tmp(
            "{\"text\":\"hi there\",\"anger\":0.1,\"fear\":0.2,\"sadness\":0.3,\"joy\":0.4,\"disgust\":0.5,\"bot_score\":0.9}\n",
            ".jsonl",
        );
        let scorer = FileScorer::load(f.path()).unwrap();
        let corpus = score_with(&["hi there"], &scorer).unwrap();
        assert_eq!(corpus.records()[0].bot_score, 0.9);
        assert!(score_with(&["unknown"], &scorer).is_err());
    }
}
