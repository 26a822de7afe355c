use botdyn::ingest::{read_records, write_records, Corpus, EmotionScores, Format, MessageRecord};
use proptest::prelude::*;

fn record() -> impl Strategy<Value = MessageRecord> {
    (
        "[A-Za-z0-9_,\" -]{1,12}",
        0.0f64..2.0e9,
        prop::array::uniform5(0.0f64..=1.0),
        0.0f64..=1.0,
        0u32..60,
        0u32..5,
    )
        .prop_map(|(id, timestamp, scores, bot_score, word_count, extra)| MessageRecord {
            id,
            timestamp,
            emotions: EmotionScores(scores),
            bot_score,
            word_count,
            char_count: word_count * (1 + extra),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn write_then_read_is_identity(records in prop::collection::vec(record(), 0..25)) {
        let corpus = Corpus::new(records).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for (name, format) in [("c.csv", Format::Csv), ("c.jsonl", Format::Jsonl)] {
            let path = dir.path().join(name);
            write_records(&corpus, &path, format).unwrap();
            let back = read_records(&path, format).unwrap();
            prop_assert_eq!(back.records(), corpus.records());
        }
    }
}

#[test]
fn iso_timestamps_become_epoch_seconds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("iso.jsonl");
    std::fs::write(
        &path,
        concat!(
            r#"{"id":"b","timestamp":"2020-01-01T00:00:01.5Z","emotions":{"anger":0.1,"fear":0.2,"sadness":0.3,"joy":0.4,"disgust":0.5},"bot_score":0.2,"word_count":2,"char_count":9}"#,
            "\n",
            r#"{"id":"a","timestamp":1577836800,"anger":0.1,"fear":0.2,"sadness":0.3,"joy":0.4,"disgust":0.5,"bot_score":0.2,"word_count":2,"char_count":9}"#,
            "\n"
        ),
    )
    .unwrap();
    let corpus = read_records(&path, Format::Jsonl).unwrap();
    let ids: Vec<&str> = corpus.records().iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ["a", "b"]);
    assert_eq!(corpus.records()[1].timestamp, 1_577_836_801.5);
}
