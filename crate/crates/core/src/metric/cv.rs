use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::AnnotatedExample;
use super::features::{FeatureMask, FeatureVector, Featurizer};
use super::model::{train_with_dev, Hyper};
use super::spearman::spearman;
use super::MetricError;

pub const DEFAULT_FOLDS: usize = 10;

/// Example indices of one cross-validation rotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles `0..n` once by `seed` and cuts it into `folds` contiguous
/// blocks. Rotation `k` tests on block `k`, early-stops on block `k + 1`
/// (wrapping) and trains on the rest. With two folds there is no dev block.
pub fn fold_plan(n: usize, folds: usize, seed: u64) -> Result<Vec<Fold>, MetricError> {
    if folds < 2 {
        return Err(MetricError::Config(format!("need at least 2 folds, got {folds}")));
    }
    let min = 3 * folds;
    if n < min {
        return Err(MetricError::TooFewExamples { got: n, min });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let blocks: Vec<&[usize]> = (0..folds).map(|k| &order[k * n / folds..(k + 1) * n / folds]).collect();
    Ok((0..folds)
        .map(|k| {
            let dev_block = if folds > 2 { Some((k + 1) % folds) } else { None };
            let mut train = Vec::new();
            for (b, block) in blocks.iter().enumerate() {
                if b != k && Some(b) != dev_block {
                    train.extend_from_slice(block);
                }
            }
            Fold {
                train,
                dev: dev_block.map(|b| blocks[b].to_vec()).unwrap_or_default(),
                test: blocks[k].to_vec(),
            }
        })
        .collect())
}

/// Rho and p-value of one split; `None` when the correlation is undefined
/// (for example, constant predictions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSummary {
    pub rho: Option<f64>,
    pub p: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub rho: Option<f64>,
    pub p: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub pooled: CorrelationSummary,
    pub folds: Vec<FoldSummary>,
    pub mask: FeatureMask,
}

fn summarize(preds: &[f64], truth: &[f64]) -> CorrelationSummary {
    match spearman(preds, truth) {
        Ok(c) => CorrelationSummary {
            rho: Some(c.rho),
            p: Some(c.p),
            n: c.n,
        },
        Err(_) => CorrelationSummary {
            rho: None,
            p: None,
            n: preds.len(),
        },
    }
}

/// Out-of-fold predictions, aligned with `data`.
pub fn cross_predict(
    data: &[(FeatureVector, f64)],
    mask: FeatureMask,
    folds: usize,
    hyper: &Hyper,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Fold>), MetricError> {
    let plan = fold_plan(data.len(), folds, seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| data[i]).collect::<Vec<_>>();
    // Folds are independent and each is deterministic, so running them in
    // parallel does not change any result.
    let per_fold: Vec<Vec<f64>> = plan
        .par_iter()
        .enumerate()
        .map(|(k, fold)| {
            let dev = pick(&fold.dev);
            let model = train_with_dev(
                &pick(&fold.train),
                (!dev.is_empty()).then_some(dev.as_slice()),
                mask,
                hyper,
                seed.wrapping_add(k as u64),
            )?;
            Ok(fold.test.iter().map(|&i| model.predict(&data[i].0)).collect())
        })
        .collect::<Result<_, MetricError>>()?;
    let mut preds = vec![f64::NAN; data.len()];
    for (fold, p) in plan.iter().zip(per_fold) {
        for (&i, v) in fold.test.iter().zip(p) {
            preds[i] = v;
        }
    }
    Ok((preds, plan))
}

/// Cross-validated Spearman correlation between predictions and human
/// scores, per fold and pooled over every test prediction.
pub fn cross_validate_features(
    data: &[(FeatureVector, f64)],
    mask: FeatureMask,
    folds: usize,
    hyper: &Hyper,
    seed: u64,
) -> Result<EvaluationReport, MetricError> {
    let (preds, plan) = cross_predict(data, mask, folds, hyper, seed)?;
    let truth: Vec<f64> = data.iter().map(|(_, y)| *y).collect();
    let folds_out = plan
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let p: Vec<f64> = f.test.iter().map(|&i| preds[i]).collect();
            let t: Vec<f64> = f.test.iter().map(|&i| truth[i]).collect();
            let s = summarize(&p, &t);
            FoldSummary {
                fold: k,
                rho: s.rho,
                p: s.p,
                n: s.n,
            }
        })
        .collect();
    Ok(EvaluationReport {
        pooled: summarize(&preds, &truth),
        folds: folds_out,
        mask,
    })
}

/// Featurizes `dataset` and cross-validates it.
pub fn cross_validate(
    dataset: &[AnnotatedExample],
    featurizer: &Featurizer<'_>,
    mask: FeatureMask,
    folds: usize,
    hyper: &Hyper,
    seed: u64,
) -> Result<EvaluationReport, MetricError> {
    let data = featurize_dataset(dataset, featurizer)?;
    cross_validate_features(&data, mask, folds, hyper, seed)
}

/// Feature vectors paired with human scores.
pub fn featurize_dataset(
    dataset: &[AnnotatedExample],
    featurizer: &Featurizer<'_>,
) -> Result<Vec<(FeatureVector, f64)>, MetricError> {
    let pairs: Vec<_> = dataset.iter().map(|e| (e.history.as_slice(), &e.response)).collect();
    let fvs = featurizer.featurize_many(&pairs)?;
    Ok(fvs.into_iter().zip(dataset.iter().map(|e| e.human_score)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_folds_partition() {
        let plan = fold_plan(1000, 10, 5).unwrap();
        let mut seen = vec![0; 1000];
        for f in &plan {
            assert_eq!(f.test.len(), 100);
            assert_eq!(f.dev.len(), 100);
            assert_eq!(f.train.len(), 800);
            for &i in &f.test {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn two_folds_have_no_dev() {
        let plan = fold_plan(10, 2, 0).unwrap();
        assert!(plan.iter().all(|f| f.dev.is_empty() && f.train.len() == 5));
    }

    #[test]
    fn minimum_size() {
        let err = fold_plan(29, 10, 0).unwrap_err();
        assert!(err.to_string().contains("at least 30"), "{err}");
        assert!(fold_plan(30, 10, 0).is_ok());
        assert!(fold_plan(30, 1, 0).is_err());
    }

    #[test]
    fn report_json_shape() {
        let r = EvaluationReport {
            pooled: CorrelationSummary {
                rho: Some(0.5),
                p: Some(0.01),
                n: 30,
            },
            folds: vec![FoldSummary {
                fold: 0,
                rho: None,
                p: None,
                n: 3,
            }],
            mask: FeatureMask::Symbolic,
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"pooled":{"rho":0.5,"p":0.01,"n":30},"folds":[{"fold":0,"rho":null,"p":null,"n":3}],"mask":"symbolic"}"#
        );
    }
}
