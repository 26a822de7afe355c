use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use botdyn::error::Error;
use botdyn::features::SequenceFeatures;
use botdyn::ingest::Emotion;
use botdyn::measures::{MeasureOutcome, MeasureSet, SequenceKey};
use botdyn::regression::{fit_ols, run_models, DesignMatrix, ModelOptions};
use botdyn::sequencing::BinningKind;

fn noisy(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

#[test]
fn response_equal_to_predictor() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = noisy(&mut rng, 40);
    let z = noisy(&mut rng, 40);
    let d = DesignMatrix::new(vec![("x".into(), x.clone()), ("z".into(), z)], "y", x).unwrap();
    let r = fit_ols(&d).unwrap();
    assert!((r.coefficient("x").unwrap().estimate - 1.0).abs() < 1e-10);
    assert!(r.coefficient("z").unwrap().estimate.abs() < 1e-10);
    assert!((r.r_squared - 1.0).abs() < 1e-12);
}

#[test]
fn shuffled_response_is_rarely_significant() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 120;
    let x: Vec<Vec<f64>> = (0..4).map(|_| noisy(&mut rng, n)).collect();
    let y: Vec<f64> = (0..n).map(|i| 2.0 * x[0][i] - x[1][i] + 0.3 * rng.random::<f64>()).collect();
    let mut significant = 0;
    for _ in 0..100 {
        let mut shuffled = y.clone();
        shuffled.shuffle(&mut rng);
        let predictors = x.iter().enumerate().map(|(j, c)| (format!("x{j}"), c.clone())).collect();
        let r = fit_ols(&DesignMatrix::new(predictors, "y", shuffled).unwrap()).unwrap();
        if r.f_p_value < 0.01 {
            significant += 1;
        }
    }
    assert!(significant <= 5, "{significant} of 100 shuffles significant");
}

fn tables(rng: &mut ChaCha8Rng, effect: f64) -> (Vec<MeasureOutcome>, Vec<SequenceFeatures>) {
    let mut measures = Vec::new();
    let mut features = Vec::new();
    for emotion in Emotion::ALL {
        for w in 0..30 {
            let bot_level = rng.random::<f64>();
            let f = SequenceFeatures {
                emotion,
                window_index: w,
                bot_level,
                word_count_mean: 15.0 + 5.0 * rng.random::<f64>(),
                word_complexity: 4.0 + rng.random::<f64>(),
                time_variance: 10.0 * rng.random::<f64>(),
            };
            let noise = 0.2 * (rng.random::<f64>() - 0.5);
            measures.push(Ok(MeasureSet {
                key: SequenceKey {
                    emotion,
                    window_index: w,
                    strategy: BinningKind::Quartile,
                },
                complexity: 1.0 + effect * bot_level + noise,
                entropy_rate: 1.5 + noise,
                predictable_information: 0.1,
                n_states: 3,
                max_len: 3,
            }));
            features.push(f);
        }
    }
    (measures, features)
}

#[test]
fn planted_bot_effect_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (measures, features) = tables(&mut rng, 0.4);
    let fits = run_models(&measures, &features, &ModelOptions::default()).unwrap();
    assert_eq!(fits.len(), 2);
    let c = fits[0].raw.coefficient("bot_level").unwrap();
    assert!(c.estimate > 0.0 && c.p_value < 0.05, "{c:?}");
    assert!((c.estimate - 0.4).abs() < 0.1);
    assert_eq!(fits[0].raw.n, 150);
    assert_eq!(fits[0].raw.df_model, 4);

    let with_effects = ModelOptions {
        emotion_effects: true,
        ..Default::default()
    };
    let fits = run_models(&measures, &features, &with_effects).unwrap();
    assert_eq!(fits[0].raw.df_model, 8);
    assert!(fits[0].raw.coefficient("emotion_fear").is_some());
    assert!(fits[0].raw.coefficient("emotion_anger").is_none());
}

#[test]
fn error_rows_dropped_and_unmatched_keys_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut measures, mut features) = tables(&mut rng, 0.0);
    let key = match &measures[0] {
        Ok(m) => m.key,
        Err(_) => unreachable!(),
    };
    measures[0] = Err((key, "sequence too short".into()));
    let fits = run_models(&measures, &features, &ModelOptions::default()).unwrap();
    assert_eq!(fits[0].raw.n, 149);

    features.remove(5);
    match run_models(&measures, &features, &ModelOptions::default()) {
        Err(Error::JoinMismatch { keys }) => assert_eq!(keys, ["anger/5"]),
        other => panic!("unexpected {other:?}"),
    }
}
