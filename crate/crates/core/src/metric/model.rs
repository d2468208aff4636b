use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::features::{Feature, FeatureMask, FeatureVector};
use super::mlp::{Adam, Mlp, Workspace};
use super::MetricError;

pub const SCHEMA_VERSION: u32 = 1;
pub const MIN_SCORE: f64 = 1.0;
pub const MAX_SCORE: f64 = 10.0;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without dev-loss improvement before stopping.
    pub patience: usize,
    /// Share of examples [`train`] holds out for early stopping.
    pub dev_fraction: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            hidden: vec![32, 32],
            learning_rate: 1e-3,
            batch_size: 32,
            max_epochs: 500,
            patience: 25,
            dev_fraction: 0.1,
        }
    }
}

/// Mean and population standard deviation of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: f64,
    pub std: f64,
}

impl Standardizer {
    /// A constant column gets `std = 1` and `mean` equal to the constant.
    pub fn fit(values: impl Iterator<Item = f64> + Clone) -> Self {
        let mut it = values.clone();
        let first = it.next().unwrap_or(0.0);
        if it.all(|v| v == first) {
            return Standardizer { mean: first, std: 1.0 };
        }
        let n = values.clone().count() as f64;
        let mean = values.clone().sum::<f64>() / n;
        let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        Standardizer {
            mean,
            std: if std > 0.0 { std } else { 1.0 },
        }
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    pub fn invert(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStandardization {
    pub feature: Feature,
    pub mean: f64,
    pub std: f64,
}

/// What happened during training, in standardized target units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub epochs: usize,
    pub best_epoch: usize,
    pub initial_train_loss: f64,
    pub final_train_loss: f64,
    /// Best loss on the early-stopping set (dev split, or train without one).
    pub best_monitor_loss: f64,
}

/// A trained regressor: standardization, network, and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorModel {
    mask: FeatureMask,
    features: Vec<Standardizer>,
    target: Standardizer,
    mlp: Mlp,
    seed: u64,
    hyper: Hyper,
    training: TrainingSummary,
}

fn validate(examples: &[(FeatureVector, f64)]) -> Result<(), MetricError> {
    for (i, (fv, y)) in examples.iter().enumerate() {
        if !(MIN_SCORE..=MAX_SCORE).contains(y) {
            return Err(MetricError::ScoreOutOfRange { index: i, score: *y });
        }
        if Feature::ALL.iter().any(|&f| !fv.get(f).is_finite()) {
            return Err(MetricError::NonFinite { index: i });
        }
    }
    Ok(())
}

/// Trains on `examples`, holding out `hyper.dev_fraction` of them (seeded)
/// for early stopping when there are at least 10; otherwise every example
/// trains and the training loss drives early stopping.
pub fn train(
    examples: &[(FeatureVector, f64)],
    mask: FeatureMask,
    hyper: &Hyper,
    seed: u64,
) -> Result<RegressorModel, MetricError> {
    if examples.len() < 2 {
        return Err(MetricError::TooFewExamples {
            got: examples.len(),
            min: 2,
        });
    }
    validate(examples)?;
    let n_dev = if examples.len() >= 10 {
        ((examples.len() as f64 * hyper.dev_fraction).round() as usize).clamp(1, examples.len() - 2)
    } else {
        0
    };
    if n_dev == 0 {
        return train_with_dev(examples, None, mask, hyper, seed);
    }
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    order.shuffle(&mut rng);
    let dev: Vec<_> = order[..n_dev].iter().map(|&i| examples[i]).collect();
    let tr: Vec<_> = order[n_dev..].iter().map(|&i| examples[i]).collect();
    train_with_dev(&tr, Some(&dev), mask, hyper, seed)
}

/// Trains on `train_set`, early-stopping on `dev` when given. The best
/// parameters seen are kept.
pub fn train_with_dev(
    train_set: &[(FeatureVector, f64)],
    dev: Option<&[(FeatureVector, f64)]>,
    mask: FeatureMask,
    hyper: &Hyper,
    seed: u64,
) -> Result<RegressorModel, MetricError> {
    if train_set.len() < 2 {
        return Err(MetricError::TooFewExamples {
            got: train_set.len(),
            min: 2,
        });
    }
    validate(train_set)?;
    if let Some(d) = dev {
        validate(d)?;
    }
    if hyper.batch_size == 0 || hyper.hidden.iter().any(|&h| h == 0) {
        return Err(MetricError::Config(
            "batch size and hidden widths must be positive".into(),
        ));
    }

    let active = mask.features();
    let features: Vec<Standardizer> = active
        .iter()
        .map(|&f| Standardizer::fit(train_set.iter().map(move |(fv, _)| fv.get(f))))
        .collect();
    let target = Standardizer::fit(train_set.iter().map(|(_, y)| *y));
    let prep = |set: &[(FeatureVector, f64)]| -> (Vec<Vec<f64>>, Vec<f64>) {
        set.iter()
            .map(|(fv, y)| {
                let x = active.iter().zip(&features).map(|(&f, s)| s.apply(fv.get(f))).collect();
                (x, target.apply(*y))
            })
            .unzip()
    };
    let (xs, ys) = prep(train_set);
    let xs_ref: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let dev_data = dev.map(prep);
    let dev_ref: Option<(Vec<&[f64]>, &[f64])> = dev_data
        .as_ref()
        .map(|(x, y)| (x.iter().map(Vec::as_slice).collect(), y.as_slice()));

    let mut sizes = vec![active.len()];
    sizes.extend(&hyper.hidden);
    sizes.push(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mlp = Mlp::init(&sizes, &mut rng);
    let initial_train_loss = mlp.loss(&xs_ref, &ys);

    let constant_target = train_set.iter().all(|(_, y)| *y == train_set[0].1);
    let mut summary = TrainingSummary {
        epochs: 0,
        best_epoch: 0,
        initial_train_loss,
        final_train_loss: initial_train_loss,
        best_monitor_loss: initial_train_loss,
    };
    if constant_target {
        // Standardized targets are all zero: silence the output layer so the
        // model predicts the constant exactly.
        let last = sizes.len() - 2;
        let off = mlp.layer_offset(last);
        mlp.params_mut()[off..].fill(0.0);
        summary.final_train_loss = mlp.loss(&xs_ref, &ys);
        summary.best_monitor_loss = summary.final_train_loss;
    } else {
        let monitor = |m: &Mlp| match &dev_ref {
            Some((dx, dy)) => m.loss(dx, dy),
            None => m.loss(&xs_ref, &ys),
        };
        let mut opt = Adam::new(mlp.params().len(), hyper.learning_rate);
        let mut grad = vec![0.0; mlp.params().len()];
        let mut ws = Workspace::default();
        let mut order: Vec<usize> = (0..xs.len()).collect();
        let mut best = mlp.params().to_vec();
        let mut best_loss = monitor(&mlp);
        let mut since_best = 0;
        let mut bx: Vec<&[f64]> = Vec::with_capacity(hyper.batch_size);
        let mut by: Vec<f64> = Vec::with_capacity(hyper.batch_size);
        for epoch in 1..=hyper.max_epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(hyper.batch_size) {
                bx.clear();
                by.clear();
                for &i in batch {
                    bx.push(&xs[i]);
                    by.push(ys[i]);
                }
                mlp.loss_and_gradient(&bx, &by, &mut grad, &mut ws);
                opt.step(mlp.params_mut(), &grad);
            }
            summary.epochs = epoch;
            let loss = monitor(&mlp);
            if loss < best_loss {
                best_loss = loss;
                best.copy_from_slice(mlp.params());
                summary.best_epoch = epoch;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= hyper.patience {
                    break;
                }
            }
        }
        mlp.params_mut().copy_from_slice(&best);
        summary.best_monitor_loss = best_loss;
        summary.final_train_loss = mlp.loss(&xs_ref, &ys);
    }

    Ok(RegressorModel {
        mask,
        features,
        target,
        mlp,
        seed,
        hyper: hyper.clone(),
        training: summary,
    })
}

impl RegressorModel {
    pub fn mask(&self) -> FeatureMask {
        self.mask
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn hyper(&self) -> &Hyper {
        &self.hyper
    }

    pub fn training(&self) -> &TrainingSummary {
        &self.training
    }

    pub fn mlp(&self) -> &Mlp {
        &self.mlp
    }

    pub fn standardization(&self) -> Vec<FeatureStandardization> {
        self.mask
            .features()
            .iter()
            .zip(&self.features)
            .map(|(&feature, s)| FeatureStandardization {
                feature,
                mean: s.mean,
                std: s.std,
            })
            .collect()
    }

    /// Standardized network input for `fv`; only masked-in features are read.
    pub fn standardize(&self, fv: &FeatureVector) -> Vec<f64> {
        self.mask
            .features()
            .iter()
            .zip(&self.features)
            .map(|(&f, s)| s.apply(fv.get(f)))
            .collect()
    }

    pub fn predict(&self, fv: &FeatureVector) -> f64 {
        self.target.invert(self.mlp.forward(&self.standardize(fv)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MetricError> {
        let value: Value = serde_json::from_str(text).map_err(|e| MetricError::Schema(e.to_string()))?;
        match value.get("schema_version").and_then(Value::as_u64) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => return Err(MetricError::Schema(format!("unsupported schema_version {v}"))),
            None => return Err(MetricError::Schema("missing schema_version".into())),
        }
        let file: ModelFile = serde_json::from_value(value).map_err(|e| MetricError::Schema(e.to_string()))?;
        Self::from_file(file)
    }

    fn to_file(&self) -> ModelFile {
        let layers = (0..self.mlp.sizes().len() - 1)
            .map(|l| {
                let (w, b) = self.mlp.layer(l);
                LayerFile {
                    rows: self.mlp.sizes()[l + 1],
                    cols: self.mlp.sizes()[l],
                    weights: w.to_vec(),
                    bias: b.to_vec(),
                }
            })
            .collect();
        ModelFile {
            schema_version: SCHEMA_VERSION,
            mask: self.mask,
            standardization: self.standardization(),
            target: self.target,
            layers,
            seed: self.seed,
            hyper: self.hyper.clone(),
            training: self.training,
        }
    }

    fn from_file(file: ModelFile) -> Result<Self, MetricError> {
        let bad = |m: String| MetricError::Schema(m);
        let expected: Vec<Feature> = file.mask.features().to_vec();
        let got: Vec<Feature> = file.standardization.iter().map(|s| s.feature).collect();
        if expected != got {
            return Err(bad(format!(
                "standardization features {got:?} do not match mask {}",
                file.mask
            )));
        }
        if file
            .standardization
            .iter()
            .any(|s| !(s.std > 0.0) || !s.mean.is_finite())
        {
            return Err(bad("standardization std must be positive and mean finite".into()));
        }
        let mut sizes = vec![expected.len()];
        let mut params = Vec::new();
        for (i, layer) in file.layers.iter().enumerate() {
            if layer.cols != *sizes.last().unwrap() {
                return Err(bad(format!(
                    "layer {i} has {} columns, expected {}",
                    layer.cols,
                    sizes.last().unwrap()
                )));
            }
            if layer.weights.len() != layer.rows * layer.cols || layer.bias.len() != layer.rows {
                return Err(bad(format!("layer {i} weight or bias length does not match its shape")));
            }
            sizes.push(layer.rows);
            params.extend(&layer.weights);
            params.extend(&layer.bias);
        }
        let mlp = Mlp::from_parts(sizes, params).ok_or_else(|| bad("network must end in a single output".into()))?;
        Ok(RegressorModel {
            mask: file.mask,
            features: file
                .standardization
                .iter()
                .map(|s| Standardizer {
                    mean: s.mean,
                    std: s.std,
                })
                .collect(),
            target: file.target,
            mlp,
            seed: file.seed,
            hyper: file.hyper,
            training: file.training,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerFile {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    schema_version: u32,
    mask: FeatureMask,
    standardization: Vec<FeatureStandardization>,
    target: Standardizer,
    layers: Vec<LayerFile>,
    seed: u64,
    hyper: Hyper,
    training: TrainingSummary,
}
