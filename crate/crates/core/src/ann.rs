//! Feed-forward ReLU regressor from the ratio sequence `S(2..=q_max)` to
//! the GME, trained with mini-batch ADAM on the mean squared error.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{substream_rng, DatasetRecord};
use crate::error::{Error, Result};
use crate::gme::{GmeEstimate, Method};
use crate::moments::MomentSequence;

/// Version of the model file format.
pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Hidden widths of the fixed architecture `(q_max-1, 512, 256, 128, 64, 32, 1)`.
pub const HIDDEN_WIDTHS: [usize; 5] = [512, 256, 128, 64, 32];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub q_max: usize,
    pub n_qubits: usize,
    pub seed: u64,
    pub epochs_trained: usize,
    pub final_train_loss: Option<f64>,
    pub final_test_loss: Option<f64>,
}

/// Dense layers; `weights[l]` is `out x in`.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub activations: Vec<Activation>,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub meta: ModelMeta,
}

/// Gradients laid out like the model parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl MlpModel {
    /// ReLU hidden layers and a linear output, He-normal weights, zero biases.
    pub fn new(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::InvalidInput(format!("bad layer sizes {layer_sizes:?}")));
        }
        let mut rng = substream_rng(seed, "init", 0);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).unwrap();
            weights.push(Array2::from_shape_simple_fn((fan_out, fan_in), || normal.sample(&mut rng)));
            biases.push(Array1::zeros(fan_out));
        }
        let n_layers = layer_sizes.len() - 1;
        let activations = (0..n_layers)
            .map(|l| if l + 1 == n_layers { Activation::Identity } else { Activation::Relu })
            .collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            activations,
            weights,
            biases,
            meta: ModelMeta {
                q_max: layer_sizes[0] + 1,
                seed,
                ..Default::default()
            },
        })
    }

    /// The fixed `(q_max-1, 512, 256, 128, 64, 32, 1)` network.
    pub fn for_q_max(q_max: usize, seed: u64) -> Result<Self> {
        if q_max < 2 {
            return Err(Error::InvalidInput("q_max must be >= 2".into()));
        }
        let mut sizes = vec![q_max - 1];
        sizes.extend(HIDDEN_WIDTHS);
        sizes.push(1);
        Self::new(&sizes, seed)
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn check(&self) -> Result<()> {
        let n_layers = self.layer_sizes.len().saturating_sub(1);
        if n_layers == 0
            || self.weights.len() != n_layers
            || self.biases.len() != n_layers
            || self.activations.len() != n_layers
        {
            return Err(Error::Schema("layer count mismatch".into()));
        }
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let (out, inp) = (self.layer_sizes[l + 1], self.layer_sizes[l]);
            if w.dim() != (out, inp) || b.len() != out {
                return Err(Error::Schema(format!("layer {l} has inconsistent shape")));
            }
        }
        if *self.layer_sizes.last().unwrap() != 1 {
            return Err(Error::Schema("output layer must have width 1".into()));
        }
        let finite = self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::Schema("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Output for a single input vector.
    pub fn forward(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.input_width() {
            return Err(Error::ShapeMismatch {
                expected: self.input_width(),
                got: input.len(),
            });
        }
        let x = ArrayView2::from_shape((1, input.len()), input).unwrap();
        Ok(self.forward_batch(x)?[0])
    }

    /// Outputs for each row of `inputs`.
    pub fn forward_batch(&self, inputs: ArrayView2<f64>) -> Result<Array1<f64>> {
        if inputs.ncols() != self.input_width() {
            return Err(Error::ShapeMismatch {
                expected: self.input_width(),
                got: inputs.ncols(),
            });
        }
        let acts = self.activations_of(inputs);
        Ok(acts.last().unwrap().column(0).to_owned())
    }

    /// Post-activation outputs of every layer, the input first.
    fn activations_of(&self, inputs: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let mut acts = Vec::with_capacity(self.weights.len() + 1);
        acts.push(inputs.to_owned());
        for ((w, b), act) in self.weights.iter().zip(&self.biases).zip(&self.activations) {
            let mut z = acts.last().unwrap().dot(&w.t());
            z += b;
            if *act == Activation::Relu {
                z.mapv_inplace(|v| v.max(0.0));
            }
            acts.push(z);
        }
        acts
    }

    /// Batch-mean squared error and its gradient with respect to every
    /// parameter.
    pub fn backward(&self, inputs: ArrayView2<f64>, targets: ArrayView1<f64>) -> Result<(f64, Gradients)> {
        let batch = inputs.nrows();
        if batch == 0 {
            return Err(Error::EmptyInput);
        }
        if targets.len() != batch {
            return Err(Error::ShapeMismatch {
                expected: batch,
                got: targets.len(),
            });
        }
        if inputs.ncols() != self.input_width() {
            return Err(Error::ShapeMismatch {
                expected: self.input_width(),
                got: inputs.ncols(),
            });
        }
        let acts = self.activations_of(inputs);
        let out = acts.last().unwrap().column(0);
        let residual = &out - &targets;
        let loss = residual.mapv(|r| r * r).sum() / batch as f64;

        let n_layers = self.weights.len();
        let mut grad_w = vec![Array2::zeros((0, 0)); n_layers];
        let mut grad_b = vec![Array1::zeros(0); n_layers];
        let mut delta = (residual * (2.0 / batch as f64)).insert_axis(Axis(1));
        for l in (0..n_layers).rev() {
            grad_w[l] = delta.t().dot(&acts[l]);
            grad_b[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut back = delta.dot(&self.weights[l]);
                if self.activations[l - 1] == Activation::Relu {
                    back.zip_mut_with(&acts[l], |d, &a| {
                        if a <= 0.0 {
                            *d = 0.0;
                        }
                    });
                }
                delta = back;
            }
        }
        Ok((
            loss,
            Gradients {
                weights: grad_w,
                biases: grad_b,
            },
        ))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, &ModelFile::from(self))?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: ModelFile = serde_json::from_reader(BufReader::new(File::open(path)?))
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        file.try_into()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<ModelFile>(s)?.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    /// Row-major `out x in`.
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema_version: u32,
    arch: Vec<usize>,
    activations: Vec<Activation>,
    layers: Vec<LayerFile>,
    meta: ModelMeta,
}

impl From<&MlpModel> for ModelFile {
    fn from(m: &MlpModel) -> Self {
        ModelFile {
            schema_version: MODEL_SCHEMA_VERSION,
            arch: m.layer_sizes.clone(),
            activations: m.activations.clone(),
            layers: m
                .weights
                .iter()
                .zip(&m.biases)
                .map(|(w, b)| LayerFile {
                    weights: w.outer_iter().map(|row| row.to_vec()).collect(),
                    bias: b.to_vec(),
                })
                .collect(),
            meta: m.meta.clone(),
        }
    }
}

impl TryFrom<ModelFile> for MlpModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "model schema version {} (expected {MODEL_SCHEMA_VERSION})",
                f.schema_version
            )));
        }
        let mut weights = Vec::with_capacity(f.layers.len());
        let mut biases = Vec::with_capacity(f.layers.len());
        for layer in f.layers {
            let rows = layer.weights.len();
            let cols = layer.weights.first().map_or(0, |r| r.len());
            if layer.weights.iter().any(|r| r.len() != cols) {
                return Err(Error::Schema("ragged weight matrix".into()));
            }
            let flat: Vec<f64> = layer.weights.into_iter().flatten().collect();
            weights.push(Array2::from_shape_vec((rows, cols), flat).unwrap());
            biases.push(Array1::from(layer.bias));
        }
        let model = MlpModel {
            layer_sizes: f.arch,
            activations: f.activations,
            weights,
            biases,
            meta: f.meta,
        };
        model.check()?;
        Ok(model)
    }
}

/// ADAM moment estimates for every parameter.
struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    m: Gradients,
    v: Gradients,
}

impl Adam {
    fn new(model: &MlpModel, cfg: &TrainConfig) -> Self {
        let zeros = Gradients {
            weights: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            biases: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        };
        Self {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.epsilon,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    fn update(&mut self, model: &mut MlpModel, grads: &Gradients) {
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let (lr, eps) = (self.lr, self.eps);
        let apply = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for l in 0..model.weights.len() {
            ndarray::Zip::from(&mut model.weights[l])
                .and(&grads.weights[l])
                .and(&mut self.m.weights[l])
                .and(&mut self.v.weights[l])
                .for_each(|p, &g, m, v| apply(p, g, m, v));
            ndarray::Zip::from(&mut model.biases[l])
                .and(&grads.biases[l])
                .and(&mut self.m.biases[l])
                .and(&mut self.v.biases[l])
                .for_each(|p, &g, m, v| apply(p, g, m, v));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Evaluate the held-out loss every this many epochs (and at the end).
    pub eval_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 500,
            epochs: 5000,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            eval_every: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_loss: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub history: Vec<EpochLoss>,
    /// Loss of always predicting the mean training target.
    pub baseline_loss: f64,
}

/// Feature matrix `S(2..=q_max)` and GME targets.
pub fn features(records: &[DatasetRecord], q_max: usize) -> Result<(Array2<f64>, Array1<f64>)> {
    let width = q_max - 1;
    let mut x = Array2::zeros((records.len(), width));
    let mut y = Array1::zeros(records.len());
    for (i, r) in records.iter().enumerate() {
        if r.moments.q_max() < q_max {
            return Err(Error::ShapeMismatch {
                expected: q_max,
                got: r.moments.q_max(),
            });
        }
        x.row_mut(i).assign(&ArrayView1::from(r.moments.ratios_up_to(q_max)));
        y[i] = r.gme;
    }
    Ok((x, y))
}

fn mse(model: &MlpModel, x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<f64> {
    let pred = model.forward_batch(x)?;
    Ok((&pred - &y).mapv(|r| r * r).mean().unwrap_or(0.0))
}

/// Trains the fixed-architecture network on `S(2..=q_max) -> gme`.
///
/// Batches are drawn from a seeded per-epoch shuffle; the held-out loss is
/// tracked when `test_set` is given. Single-threaded and deterministic for a
/// fixed configuration.
pub fn train(
    train_set: &[DatasetRecord],
    q_max: usize,
    cfg: &TrainConfig,
    test_set: Option<&[DatasetRecord]>,
) -> Result<TrainOutcome> {
    let model = MlpModel::for_q_max(q_max, cfg.seed)?;
    train_model(model, train_set, cfg, test_set)
}

/// Trains an existing model in place of the fixed architecture.
pub fn train_model(
    mut model: MlpModel,
    train_set: &[DatasetRecord],
    cfg: &TrainConfig,
    test_set: Option<&[DatasetRecord]>,
) -> Result<TrainOutcome> {
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(Error::InvalidInput("epochs and batch_size must be positive".into()));
    }
    if train_set.len() < cfg.batch_size {
        return Err(Error::InsufficientData {
            available: train_set.len(),
            required: cfg.batch_size,
        });
    }
    let n_qubits = train_set[0].n_qubits();
    if train_set.iter().any(|r| r.n_qubits() != n_qubits) {
        return Err(Error::InvalidInput("training records mix qubit numbers".into()));
    }
    let q_max = model.input_width() + 1;
    let (x, y) = features(train_set, q_max)?;
    let test = test_set.map(|t| features(t, q_max)).transpose()?;

    let mean = y.mean().unwrap();
    let baseline_loss = y.mapv(|v| (v - mean).powi(2)).mean().unwrap();

    let mut adam = Adam::new(&model, cfg);
    let mut shuffle_rng = substream_rng(cfg.seed, "shuffle", 0);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut weighted = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let xb = x.select(Axis(0), chunk);
            let yb = y.select(Axis(0), chunk);
            let (loss, grads) = model.backward(xb.view(), yb.view())?;
            adam.update(&mut model, &grads);
            weighted += loss * chunk.len() as f64;
        }
        let evaluate = epoch % cfg.eval_every.max(1) == 0 || epoch == cfg.epochs;
        let test_loss = match (&test, evaluate) {
            (Some((xt, yt)), true) => Some(mse(&model, xt.view(), yt.view())?),
            _ => None,
        };
        history.push(EpochLoss {
            epoch,
            train_loss: weighted / train_set.len() as f64,
            test_loss,
        });
    }

    model.meta = ModelMeta {
        q_max,
        n_qubits,
        seed: cfg.seed,
        epochs_trained: model.meta.epochs_trained + cfg.epochs,
        final_train_loss: Some(mse(&model, x.view(), y.view())?),
        final_test_loss: history.last().and_then(|h| h.test_loss),
    };
    Ok(TrainOutcome {
        model,
        history,
        baseline_loss,
    })
}

/// Regressor output on `S(2..=q_max)`, clamped to `[0, 1 - 1/(N+1)]`.
pub fn predict_gme(model: &MlpModel, seq: &MomentSequence) -> Result<GmeEstimate> {
    let q_max = model.input_width() + 1;
    if seq.q_max() < q_max {
        return Err(Error::ShapeMismatch {
            expected: q_max,
            got: seq.q_max(),
        });
    }
    let raw = model.forward(seq.ratios_up_to(q_max))?;
    Ok(GmeEstimate::clamped_to_bound(raw, seq.n_qubits, Method::Ann, Some(q_max)))
}

pub fn write_loss_csv(path: &Path, history: &[EpochLoss]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "train_loss", "test_loss"])?;
    for h in history {
        w.write_record([
            h.epoch.to_string(),
            h.train_loss.to_string(),
            h.test_loss.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
