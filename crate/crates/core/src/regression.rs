//! Ordinary least squares with classical inference, standardized
//! coefficients, and the two measure-on-covariate models.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};
use crate::features::SequenceFeatures;
use crate::ingest::Emotion;
use crate::measures::MeasureOutcome;
use crate::sequencing::BinningKind;

pub const INTERCEPT: &str = "(Intercept)";

/// Predictor columns plus a response; the intercept is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub predictors: Vec<String>,
    /// Column-major predictor values, one vector per predictor.
    pub columns: Vec<Vec<f64>>,
    pub response_name: String,
    pub response: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(predictors: Vec<(String, Vec<f64>)>, response_name: impl Into<String>, response: Vec<f64>) -> Result<Self> {
        let (names, columns) = predictors.into_iter().unzip();
        let d = DesignMatrix {
            predictors: names,
            columns,
            response_name: response_name.into(),
            response,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.response.len();
        if self.predictors.len() != self.columns.len() {
            return Err(Error::validation("design", "predictor names and columns differ in count"));
        }
        let mut seen = BTreeSet::new();
        for name in self.predictors.iter().chain([&self.response_name]) {
            if name == INTERCEPT || !seen.insert(name) {
                return Err(Error::validation("design", format!("duplicate column name `{name}`")));
            }
        }
        for (name, col) in self.predictors.iter().zip(&self.columns) {
            if col.len() != n {
                return Err(Error::validation(name.clone(), format!("has {} rows, response has {n}", col.len())));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation(name.clone(), "missing or non-finite value"));
            }
        }
        if self.response.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation(self.response_name.clone(), "missing or non-finite value"));
        }
        if n <= self.predictors.len() + 1 {
            return Err(Error::validation(
                "design",
                format!("{n} observations cannot support {} columns", self.predictors.len() + 1),
            ));
        }
        Ok(())
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn sample_sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
}

fn zscore(name: &str, v: &[f64]) -> Result<Vec<f64>> {
    let sd = sample_sd(v);
    if sd.is_nan() || sd <= 0.0 {
        return Err(Error::ZeroVariance(name.to_string()));
    }
    let m = mean(v);
    Ok(v.iter().map(|x| (x - m) / sd).collect())
}

/// Centers and scales every predictor and the response to mean 0, sd 1.
pub fn standardize(design: &DesignMatrix) -> Result<DesignMatrix> {
    design.validate()?;
    let columns = design
        .predictors
        .iter()
        .zip(&design.columns)
        .map(|(name, col)| zscore(name, col))
        .collect::<Result<_>>()?;
    Ok(DesignMatrix {
        predictors: design.predictors.clone(),
        columns,
        response_name: design.response_name.clone(),
        response: zscore(&design.response_name, &design.response)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    /// Homoskedastic `σ² (XᵀX)⁻¹`.
    #[default]
    Classical,
    /// White heteroskedasticity-consistent estimator with the `n / (n − k)`
    /// small-sample factor.
    Hc1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    /// `estimate · sd(x) / sd(y)`; zero for the intercept.
    pub std_estimate: f64,
    #[serde(with = "nullable")]
    pub std_error: f64,
    #[serde(with = "nullable")]
    pub t_value: f64,
    #[serde(with = "nullable")]
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub response: String,
    pub n: usize,
    pub df_model: usize,
    pub df_resid: usize,
    /// Intercept first, then predictors in design order.
    pub coefficients: Vec<Coefficient>,
    #[serde(with = "nullable")]
    pub f_statistic: f64,
    #[serde(with = "nullable")]
    pub f_p_value: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub sigma: f64,
    pub covariance: CovarianceKind,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// Non-finite floats serialize as `null` and read back as NaN.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            ser.serialize_f64(*v)
        } else {
            ser.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(de)?.unwrap_or(f64::NAN))
    }
}

const RANK_TOLERANCE: f64 = 1e-10;

pub fn fit_ols(design: &DesignMatrix) -> Result<RegressionResult> {
    fit_ols_with(design, CovarianceKind::Classical)
}

pub fn fit_ols_with(design: &DesignMatrix, covariance: CovarianceKind) -> Result<RegressionResult> {
    design.validate()?;
    let n = design.n();
    let p = design.predictors.len();
    let k = p + 1;
    let x = DMatrix::from_fn(n, k, |i, j| if j == 0 { 1.0 } else { design.columns[j - 1][i] });
    let y = DVector::from_column_slice(&design.response);

    let qr = x.clone().qr();
    let r = qr.r();
    let collinear: Vec<String> = (0..k)
        .filter(|&j| r[(j, j)].abs() <= RANK_TOLERANCE * x.column(j).norm().max(1.0))
        .map(|j| if j == 0 { INTERCEPT.to_string() } else { design.predictors[j - 1].clone() })
        .collect();
    if !collinear.is_empty() {
        return Err(Error::RankDeficient { columns: collinear });
    }
    let qty = qr.q().transpose() * &y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient { columns: vec!["<unknown>".into()] })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::RankDeficient { columns: vec!["<unknown>".into()] })?;
    let xtx_inv = &r_inv * r_inv.transpose();

    let fitted = &x * &beta;
    let resid = &y - &fitted;
    let rss = resid.norm_squared();
    let y_mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    if tss.is_nan() || tss <= 0.0 {
        return Err(Error::ZeroVariance(design.response_name.clone()));
    }
    let df_resid = n - k;
    let sigma2 = rss / df_resid as f64;
    let cov = match covariance {
        CovarianceKind::Classical => &xtx_inv * sigma2,
        CovarianceKind::Hc1 => {
            let mut meat = DMatrix::zeros(k, k);
            for i in 0..n {
                let row = x.row(i).transpose();
                meat += &row * row.transpose() * resid[i].powi(2);
            }
            &xtx_inv * meat * &xtx_inv * (n as f64 / df_resid as f64)
        }
    };

    let t_dist = StudentsT::new(0.0, 1.0, df_resid as f64).expect("df_resid > 0");
    let sd_y = sample_sd(&design.response);
    let coefficients = (0..k)
        .map(|j| {
            let estimate = beta[j];
            let se = cov[(j, j)].max(0.0).sqrt();
            let (t_value, p_value) = if se > 0.0 {
                let t = estimate / se;
                (t, (2.0 * t_dist.sf(t.abs())).min(1.0))
            } else if estimate == 0.0 {
                (f64::NAN, 1.0)
            } else {
                (estimate.signum() * f64::INFINITY, 0.0)
            };
            let (name, std_estimate) = if j == 0 {
                (INTERCEPT.to_string(), 0.0)
            } else {
                let sd_x = sample_sd(&design.columns[j - 1]);
                (design.predictors[j - 1].clone(), estimate * sd_x / sd_y)
            };
            Coefficient {
                name,
                estimate,
                std_estimate,
                std_error: se,
                t_value,
                p_value,
            }
        })
        .collect();

    let r_squared = (1.0 - rss / tss).clamp(0.0, 1.0);
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / df_resid as f64;
    let (f_statistic, f_p_value) = if p == 0 {
        (f64::NAN, f64::NAN)
    } else if r_squared >= 1.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = (r_squared / p as f64) / ((1.0 - r_squared) / df_resid as f64);
        let dist = FisherSnedecor::new(p as f64, df_resid as f64).expect("positive df");
        (f, dist.sf(f))
    };

    Ok(RegressionResult {
        response: design.response_name.clone(),
        n,
        df_model: p,
        df_resid,
        coefficients,
        f_statistic,
        f_p_value,
        r_squared,
        adj_r_squared,
        sigma: sigma2.sqrt(),
        covariance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

/// `estimate ± t_crit · SE` for every coefficient.
pub fn confidence_intervals(result: &RegressionResult, level: f64) -> Vec<Interval> {
    let t = StudentsT::new(0.0, 1.0, result.df_resid as f64).expect("df_resid > 0");
    let crit = t.inverse_cdf(1.0 - (1.0 - level) / 2.0);
    result
        .coefficients
        .iter()
        .map(|c| Interval {
            name: c.name.clone(),
            lo: c.estimate - crit * c.std_error,
            hi: c.estimate + crit * c.std_error,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    /// Adds indicator columns for every emotion except the first present.
    #[serde(default)]
    pub emotion_effects: bool,
    #[serde(default)]
    pub covariance: CovarianceKind,
    /// Restrict to one binning strategy when the measures table mixes several.
    #[serde(default)]
    pub strategy: Option<BinningKind>,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            emotion_effects: false,
            covariance: CovarianceKind::Classical,
            strategy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    /// "complexity" or "entropy_rate".
    pub model: String,
    pub raw: RegressionResult,
    /// Fit on the standardized design; its estimates are the standardized
    /// coefficients.
    pub standardized: RegressionResult,
}

pub const PREDICTORS: [&str; 4] = ["bot_level", "word_count_mean", "word_complexity", "time_variance"];

/// Fits `C` and `h` on bot level and the controls, joined on
/// `(emotion, window_index)`.
pub fn run_models(
    measures: &[MeasureOutcome],
    features: &[SequenceFeatures],
    options: &ModelOptions,
) -> Result<Vec<ModelFit>> {
    let strategies: BTreeSet<BinningKind> = measures
        .iter()
        .map(|m| match m {
            Ok(m) => m.key.strategy,
            Err((k, _)) => k.strategy,
        })
        .collect();
    let strategy = match options.strategy {
        Some(s) => s,
        None if strategies.len() <= 1 => strategies.first().copied().unwrap_or(BinningKind::Quartile),
        None => {
            return Err(Error::validation(
                "strategy",
                "measures mix several binning strategies; choose one",
            ))
        }
    };

    let mut ok = BTreeMap::new();
    let mut failed = BTreeSet::new();
    for m in measures {
        match m {
            Ok(m) if m.key.strategy == strategy => {
                ok.insert((m.key.emotion, m.key.window_index), m);
            }
            Err((k, _)) if k.strategy == strategy => {
                failed.insert((k.emotion, k.window_index));
            }
            _ => {}
        }
    }
    let feats: BTreeMap<(Emotion, usize), &SequenceFeatures> =
        features.iter().map(|f| ((f.emotion, f.window_index), f)).collect();

    let fmt_key = |(e, w): &(Emotion, usize)| format!("{e}/{w}");
    let mut unmatched: Vec<String> = ok.keys().filter(|k| !feats.contains_key(k)).map(fmt_key).collect();
    unmatched.extend(
        feats
            .keys()
            .filter(|k| !ok.contains_key(k) && !failed.contains(k))
            .map(fmt_key),
    );
    if !unmatched.is_empty() {
        return Err(Error::JoinMismatch { keys: unmatched });
    }
    if !failed.is_empty() {
        log::warn!("dropped {} sequence(s) without measures", failed.len());
    }

    let rows: Vec<(&(Emotion, usize), _, &SequenceFeatures)> =
        ok.iter().map(|(k, m)| (k, *m, feats[k])).collect();
    let mut predictors: Vec<(String, Vec<f64>)> = vec![
        ("bot_level".into(), rows.iter().map(|r| r.2.bot_level).collect()),
        ("word_count_mean".into(), rows.iter().map(|r| r.2.word_count_mean).collect()),
        ("word_complexity".into(), rows.iter().map(|r| r.2.word_complexity).collect()),
        ("time_variance".into(), rows.iter().map(|r| r.2.time_variance).collect()),
    ];
    if options.emotion_effects {
        let present: BTreeSet<Emotion> = rows.iter().map(|r| r.0 .0).collect();
        for &emotion in present.iter().skip(1) {
            predictors.push((
                format!("emotion_{emotion}"),
                rows.iter().map(|r| f64::from(u8::from(r.0 .0 == emotion))).collect(),
            ));
        }
    }

    let models = [
        ("complexity", "C", rows.iter().map(|r| r.1.complexity).collect::<Vec<_>>()),
        ("entropy_rate", "h", rows.iter().map(|r| r.1.entropy_rate).collect::<Vec<_>>()),
    ];
    models
        .into_iter()
        .map(|(model, response_name, response)| {
            let design = DesignMatrix::new(predictors.clone(), response_name, response)?;
            Ok(ModelFit {
                model: model.to_string(),
                raw: fit_ols_with(&design, options.covariance)?,
                standardized: fit_ols_with(&standardize(&design)?, options.covariance)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple(x: Vec<f64>, y: Vec<f64>) -> DesignMatrix {
        DesignMatrix::new(vec![("x".into(), x)], "y", y).unwrap()
    }

    #[test]
    fn perfect_fit() {
        let r = fit_ols(&simple(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0])).unwrap();
        assert!((r.coefficients[1].estimate - 1.0).abs() < 1e-12);
        assert!(r.coefficients[0].estimate.abs() < 1e-12);
        assert_eq!(r.r_squared, 1.0);
    }

    #[test]
    fn closed_form_simple_regression() {
        // Sxy = 3, Sxx = 5 → slope 0.6, intercept 2 − 0.6·2.5 = 0.5
        let r = fit_ols(&simple(vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 2.0, 3.0])).unwrap();
        assert!((r.coefficients[1].estimate - 0.6).abs() < 1e-12);
        assert!((r.coefficients[0].estimate - 0.5).abs() < 1e-12);
        assert_eq!((r.df_model, r.df_resid), (1, 2));
    }

    #[test]
    fn rank_deficiency_names_column() {
        let d = DesignMatrix::new(
            vec![
                ("a".into(), vec![1.0, 2.0, 3.0, 4.0, 5.0]),
                ("b".into(), vec![2.0, 4.0, 6.0, 8.0, 10.0]),
            ],
            "y",
            vec![1.0, 3.0, 2.0, 5.0, 4.0],
        )
        .unwrap();
        match fit_ols(&d).unwrap_err() {
            Error::RankDeficient { columns } => assert_eq!(columns, vec!["b".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn standardize_examples() {
        let d = simple(vec![1.0, 2.0, 3.0], vec![3.0, 1.0, 2.0]);
        let s = standardize(&d).unwrap();
        assert_eq!(s.columns[0], vec![-1.0, 0.0, 1.0]);
        let again = standardize(&s).unwrap();
        for (a, b) in again.columns[0].iter().zip(&s.columns[0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let c = simple(vec![2.0, 2.0, 2.0], vec![1.0, 2.0, 3.0]);
        assert!(matches!(standardize(&c), Err(Error::ZeroVariance(name)) if name == "x"));
    }

    #[test]
    fn interval_examples() {
        let r = fit_ols(&simple(vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0])).unwrap();
        for iv in confidence_intervals(&r, 0.95) {
            assert!((iv.hi - iv.lo).abs() < 1e-9);
        }
        let mut r = fit_ols(&simple(vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 2.0, 3.0])).unwrap();
        r.df_resid = 1_000_000;
        r.coefficients[1].estimate = 0.6;
        r.coefficients[1].std_error = 0.1;
        let iv = &confidence_intervals(&r, 0.95)[1];
        assert!((iv.lo - 0.404).abs() < 1e-3 && (iv.hi - 0.796).abs() < 1e-3);
        assert!(iv.lo <= 0.6 && 0.6 <= iv.hi);
    }

    #[test]
    fn duplicate_names_and_small_n_rejected() {
        assert!(DesignMatrix::new(
            vec![("x".into(), vec![1.0, 2.0, 3.0]), ("x".into(), vec![3.0, 1.0, 2.0])],
            "y",
            vec![1.0, 2.0, 3.0],
        )
        .is_err());
        assert!(DesignMatrix::new(vec![("x".into(), vec![1.0, 2.0])], "y", vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn hc1_differs_but_keeps_estimates() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 0.5 * v + if (*v as i32) % 3 == 0 { v * 0.3 } else { -0.2 }).collect();
        let d = simple(x, y);
        let a = fit_ols(&d).unwrap();
        let b = fit_ols_with(&d, CovarianceKind::Hc1).unwrap();
        assert_eq!(a.coefficients[1].estimate, b.coefficients[1].estimate);
        assert_ne!(a.coefficients[1].std_error, b.coefficients[1].std_error);
    }

    #[test]
    fn json_keeps_non_finite_as_null() {
        let mut r = fit_ols(&simple(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.5])).unwrap();
        r.coefficients[1].t_value = f64::INFINITY;
        let json = serde_json::to_string(&r).unwrap();
        let back: RegressionResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back.coefficients[1].estimate, r.coefficients[1].estimate);
        assert!(json.contains("null"));
        assert!(back.coefficients[1].t_value.is_nan());
    }
}
