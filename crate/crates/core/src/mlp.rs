//! Lightweight sign classifier over pre-extracted features.
//!
//! Four affine layers with LeakyReLU in between and a residual connection
//! around the first (`F -> F`) layer:
//!
//! ```text
//! h1 = leaky(A1 x + b1) + x
//! h2 = leaky(A2 h1 + b2)
//! h3 = leaky(A3 h2 + b3)
//! p  = softmax(A4 h3 + b4)
//! ```
//!
//! Parameters live in 64-bit; model files store them as 32-bit reals.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{FeatureSequence, Spotting};
use crate::pseudo::PredictionSequence;

pub const N_LAYERS: usize = 4;
pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;
pub const DEFAULT_HIDDEN: [usize; 2] = [512, 256];

fn leaky(z: f64, slope: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        slope * z
    }
}

fn leaky_grad(z: f64, slope: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else {
        slope
    }
}

fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `out x in`
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<Layer>,
    leaky_slope: f64,
    vocab: Vec<String>,
}

/// Intermediate activations of one batch, kept for backprop.
struct Cache {
    z: Vec<Array2<f64>>,
    h: Vec<Array2<f64>>,
    probs: Array2<f64>,
}

/// Parameter gradients, one entry per layer.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl MlpModel {
    /// Random model with Glorot-uniform weights and zero biases.
    pub fn init<R: Rng>(
        input_dim: usize,
        hidden: [usize; 2],
        vocab: Vec<String>,
        leaky_slope: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if input_dim == 0 || hidden.contains(&0) || vocab.is_empty() {
            return Err(Error::Argument("model dimensions must be positive".into()));
        }
        let dims = [input_dim, input_dim, hidden[0], hidden[1], vocab.len()];
        let layers = dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                Layer {
                    weight: Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-limit..limit)),
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(MlpModel {
            layers,
            leaky_slope,
            vocab,
        })
    }

    pub fn from_layers(layers: Vec<Layer>, leaky_slope: f64, vocab: Vec<String>) -> Result<Self> {
        if layers.len() != N_LAYERS {
            return Err(Error::Shape(format!(
                "expected {N_LAYERS} layers, got {}",
                layers.len()
            )));
        }
        let f = layers[0].weight.ncols();
        if layers[0].weight.nrows() != f {
            return Err(Error::Shape("first layer must map F -> F for the residual".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.weight.nrows() {
                return Err(Error::Shape(format!("layer {i} bias length mismatch")));
            }
            if i > 0 && l.weight.ncols() != layers[i - 1].weight.nrows() {
                return Err(Error::Shape(format!("layer {i} input does not match previous output")));
            }
            if l.weight.iter().chain(l.bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("layer {i} has non-finite parameters")));
            }
        }
        if layers[N_LAYERS - 1].weight.nrows() != vocab.len() {
            return Err(Error::Shape("last layer size differs from vocabulary".into()));
        }
        if !leaky_slope.is_finite() {
            return Err(Error::Data("non-finite leaky slope".into()));
        }
        Ok(MlpModel {
            layers,
            leaky_slope,
            vocab,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn leaky_slope(&self) -> f64 {
        self.leaky_slope
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// Class probabilities for one feature vector.
    pub fn forward(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} values, model expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let s = self.leaky_slope;
        let mut h = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.weight.dot(&h) + &layer.bias;
            h = match i {
                0 => z.mapv(|v| leaky(v, s)) + &h,
                3 => z,
                _ => z.mapv(|v| leaky(v, s)),
            };
        }
        let m = h.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        h.mapv_inplace(|v| (v - m).exp());
        let sum = h.sum();
        h.mapv_inplace(|v| v / sum);
        Ok(h)
    }

    fn forward_batch(&self, x: ArrayView2<'_, f64>) -> Cache {
        let s = self.leaky_slope;
        let mut z = Vec::with_capacity(N_LAYERS);
        let mut h = Vec::with_capacity(N_LAYERS);
        let mut input = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let zi = input.dot(&layer.weight.t()) + &layer.bias;
            let hi = match i {
                0 => zi.mapv(|v| leaky(v, s)) + &input,
                3 => zi.clone(),
                _ => zi.mapv(|v| leaky(v, s)),
            };
            z.push(zi);
            h.push(input);
            input = hi;
        }
        softmax_rows(&mut input);
        Cache { z, h, probs: input }
    }

    fn check_batch(&self, x: ArrayView2<'_, f64>, labels: &[usize]) -> Result<()> {
        if x.ncols() != self.input_dim() || x.nrows() != labels.len() || labels.is_empty() {
            return Err(Error::Shape("batch does not match model or labels".into()));
        }
        if labels.iter().any(|&y| y >= self.n_classes()) {
            return Err(Error::Argument("label outside the vocabulary".into()));
        }
        Ok(())
    }

    /// Mean cross-entropy of the batch.
    pub fn loss(&self, x: ArrayView2<'_, f64>, labels: &[usize]) -> Result<f64> {
        self.check_batch(x, labels)?;
        let cache = self.forward_batch(x);
        Ok(cross_entropy(&cache.probs, labels))
    }

    /// Mean cross-entropy and its gradient with respect to every parameter.
    pub fn gradients(&self, x: ArrayView2<'_, f64>, labels: &[usize]) -> Result<(f64, Gradients)> {
        self.check_batch(x, labels)?;
        let cache = self.forward_batch(x);
        let loss = cross_entropy(&cache.probs, labels);
        let n = labels.len() as f64;
        let s = self.leaky_slope;

        // d loss / d logits
        let mut delta = cache.probs.clone();
        for (mut row, &y) in delta.rows_mut().into_iter().zip(labels) {
            row[y] -= 1.0;
        }
        delta.mapv_inplace(|v| v / n);

        let mut grads: Vec<Layer> = Vec::with_capacity(N_LAYERS);
        for i in (0..N_LAYERS).rev() {
            let input = &cache.h[i];
            grads.push(Layer {
                weight: delta.t().dot(input),
                bias: delta.sum_axis(Axis(0)),
            });
            if i == 0 {
                break;
            }
            // gradient w.r.t. this layer's input, which is h_{i} = f(z_{i-1})
            let d_input = delta.dot(&self.layers[i].weight);
            let z_prev = &cache.z[i - 1];
            let mut d_z = d_input.clone();
            ndarray::Zip::from(&mut d_z)
                .and(z_prev)
                .for_each(|d, &z| *d *= leaky_grad(z, s));
            // the residual path of layer 0 does not depend on its parameters
            delta = d_z;
        }
        grads.reverse();
        Ok((loss, Gradients { layers: grads }))
    }
}

fn cross_entropy(probs: &Array2<f64>, labels: &[usize]) -> f64 {
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| -probs[[i, y]].max(f64::MIN_POSITIVE).ln())
        .sum();
    total / labels.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub lr: f64,
    /// Epoch indices (0-based) at whose start the rate is divided by `decay_factor`.
    pub decay_epochs: Vec<usize>,
    pub decay_factor: f64,
    pub momentum: f64,
    pub seed: u64,
    pub hidden: [usize; 2],
    pub leaky_slope: f64,
    /// Draw a fresh covering feature for every spotting each epoch.
    pub redraw_each_epoch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 128,
            epochs: 15,
            lr: 1e-2,
            decay_epochs: vec![5, 10],
            decay_factor: 10.0,
            momentum: 0.9,
            seed: 0,
            hidden: DEFAULT_HIDDEN,
            leaky_slope: DEFAULT_LEAKY_SLOPE,
            redraw_each_epoch: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lr.is_nan() || self.lr <= 0.0 || self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Config("lr, batch size and epochs must be positive".into()));
        }
        if self.decay_epochs.iter().any(|&e| e < 1 || e > self.epochs) {
            return Err(Error::Config(format!(
                "decay epochs {:?} outside [1, {}]",
                self.decay_epochs, self.epochs
            )));
        }
        if self.decay_factor.is_nan() || self.decay_factor <= 0.0 || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config("bad decay factor or momentum".into()));
        }
        Ok(())
    }

    /// Learning rate used throughout 0-based `epoch`.
    pub fn lr_at_epoch(&self, epoch: usize) -> f64 {
        let decays = self.decay_epochs.iter().filter(|&&e| e <= epoch).count();
        self.lr / self.decay_factor.powi(decays as i32)
    }
}

/// A uniformly chosen feature position whose receptive field contains the
/// spotting frame. Falls back to the nearest position when none covers it.
pub fn sample_training_feature<R: Rng>(spotting: &Spotting, seq: &FeatureSequence, rng: &mut R) -> usize {
    let stride = seq.stride() as u64;
    let rf = seq.receptive_field() as u64;
    let f = spotting.frame;
    let lo = if f >= rf { (f - rf) / stride + 1 } else { 0 };
    let hi = (f / stride).min(seq.len() as u64 - 1);
    if lo > hi {
        return seq.frame_to_feature_index(f);
    }
    rng.random_range(lo..=hi) as usize
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub loss_history: Vec<f64>,
    pub lr_history: Vec<f64>,
}

/// SGD with momentum on cross-entropy over features sampled around spottings.
pub fn train(
    spottings: &[Spotting],
    features: &BTreeMap<String, FeatureSequence>,
    vocab: &[String],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if spottings.is_empty() {
        return Err(Error::Argument("empty training set".into()));
    }
    let class_of: BTreeMap<&str, usize> = vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let mut samples = Vec::with_capacity(spottings.len());
    for s in spottings {
        let class = *class_of
            .get(s.keyword.as_str())
            .ok_or_else(|| Error::Argument(format!("keyword {:?} not in vocabulary", s.keyword)))?;
        let seq = features
            .get(&s.video_id)
            .ok_or_else(|| Error::Argument(format!("no features for video {:?}", s.video_id)))?;
        samples.push((s, seq, class));
    }
    let dim = samples[0].1.dim();
    if samples.iter().any(|(_, seq, _)| seq.dim() != dim) {
        return Err(Error::Shape("feature dims differ across videos".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = MlpModel::init(dim, cfg.hidden, vocab.to_vec(), cfg.leaky_slope, &mut rng)?;
    let mut velocity: Vec<Layer> = model
        .layers
        .iter()
        .map(|l| Layer {
            weight: Array2::zeros(l.weight.raw_dim()),
            bias: Array1::zeros(l.bias.raw_dim()),
        })
        .collect();

    let mut positions: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    let mut lr_history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        if epoch == 0 || cfg.redraw_each_epoch {
            positions = samples
                .iter()
                .map(|(s, seq, _)| sample_training_feature(s, seq, &mut rng))
                .collect();
        }
        order.shuffle(&mut rng);
        let lr = cfg.lr_at_epoch(epoch);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut x = Array2::<f64>::zeros((batch.len(), dim));
            let mut labels = Vec::with_capacity(batch.len());
            for (r, &k) in batch.iter().enumerate() {
                let (_, seq, class) = samples[k];
                for (dst, &v) in x.row_mut(r).iter_mut().zip(seq.row(positions[k])) {
                    *dst = v as f64;
                }
                labels.push(class);
            }
            let (loss, grads) = model.gradients(x.view(), &labels)?;
            epoch_loss += loss * batch.len() as f64;
            for ((layer, vel), g) in model.layers.iter_mut().zip(&mut velocity).zip(&grads.layers) {
                vel.weight.zip_mut_with(&g.weight, |v, &g| *v = cfg.momentum * *v + g);
                vel.bias.zip_mut_with(&g.bias, |v, &g| *v = cfg.momentum * *v + g);
                layer.weight.scaled_add(-lr, &vel.weight);
                layer.bias.scaled_add(-lr, &vel.bias);
            }
        }
        let mean = epoch_loss / samples.len() as f64;
        log::debug!("epoch {epoch}: lr {lr:e}, loss {mean:.6}");
        loss_history.push(mean);
        lr_history.push(lr);
    }
    Ok(TrainOutcome {
        model,
        loss_history,
        lr_history,
    })
}

/// One probability row per feature position; row `p` is `forward(row p)` cast to 32 bits.
pub fn predict_sliding(model: &MlpModel, seq: &FeatureSequence) -> Result<PredictionSequence> {
    if seq.dim() != model.input_dim() {
        return Err(Error::Shape(format!(
            "features have dim {}, model expects {}",
            seq.dim(),
            model.input_dim()
        )));
    }
    let rows: Vec<Vec<f32>> = (0..seq.len())
        .into_par_iter()
        .map(|t| {
            let x: Array1<f64> = seq.row(t).iter().map(|&v| v as f64).collect();
            model.forward(x.view()).map(|p| p.iter().map(|&v| v as f32).collect())
        })
        .collect::<Result<_>>()?;
    PredictionSequence::new(
        seq.video_id(),
        seq.stride(),
        model.vocab.clone(),
        rows.into_iter().flatten().collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Source;
    use approx::assert_abs_diff_eq;

    fn vocab(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    fn tiny(f: usize, v: usize, seed: u64) -> MlpModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = MlpModel::init(f, [6, 5], vocab(v), 0.01, &mut rng).unwrap();
        for l in m.layers_mut() {
            l.bias.mapv_inplace(|_| rng.random_range(-0.5..0.5));
        }
        m
    }

    /// Straight-line evaluation with explicit loops.
    fn hand_forward(m: &MlpModel, x: &[f64]) -> Vec<f64> {
        let s = m.leaky_slope();
        let affine = |l: &Layer, input: &[f64]| -> Vec<f64> {
            (0..l.weight.nrows())
                .map(|r| {
                    let mut acc = l.bias[r];
                    for (c, v) in input.iter().enumerate() {
                        acc += l.weight[[r, c]] * v;
                    }
                    acc
                })
                .collect()
        };
        let act = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|z| if z > 0.0 { z } else { s * z }).collect() };
        let l = m.layers();
        let h1: Vec<f64> = act(affine(&l[0], x)).iter().zip(x).map(|(a, b)| a + b).collect();
        let h2 = act(affine(&l[1], &h1));
        let h3 = act(affine(&l[2], &h2));
        let logits = affine(&l[3], &h3);
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
        let sum: f64 = e.iter().sum();
        e.iter().map(|v| v / sum).collect()
    }

    #[test]
    fn forward_matches_hand_evaluation() {
        let m = tiny(4, 3, 3);
        for x in [[0.3, -1.2, 0.5, 2.0], [0.0; 4], [-0.7, 0.1, 0.9, -0.4]] {
            let p = m.forward(Array1::from(x.to_vec()).view()).unwrap();
            let h = hand_forward(&m, &x);
            for (a, b) in p.iter().zip(&h) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
            assert_abs_diff_eq!(p.sum(), 1.0, epsilon = 1e-6);
            assert!(p.iter().all(|&v| v > 0.0));
        }
        assert!(matches!(m.forward(Array1::zeros(3).view()), Err(Error::Shape(_))));
    }

    #[test]
    fn zero_model_is_uniform() {
        let mut m = tiny(4, 5, 1);
        for l in m.layers_mut() {
            l.weight.fill(0.0);
            l.bias.fill(0.0);
        }
        let p = m.forward(Array1::from(vec![1.0, 2.0, 3.0, 4.0]).view()).unwrap();
        assert!(p.iter().all(|&v| (v - 0.2).abs() < 1e-15));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut m = tiny(5, 3, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Array2::from_shape_fn((4, 5), |_| rng.random_range(-1.0..1.0));
        let labels = [0, 2, 1, 2];
        let (_, g) = m.gradients(x.view(), &labels).unwrap();
        let eps = 1e-6;
        let mut worst: f64 = 0.0;
        for li in 0..N_LAYERS {
            let (rows, cols) = m.layers()[li].weight.dim();
            for r in 0..rows {
                for c in 0..cols {
                    let orig = m.layers()[li].weight[[r, c]];
                    m.layers_mut()[li].weight[[r, c]] = orig + eps;
                    let up = m.loss(x.view(), &labels).unwrap();
                    m.layers_mut()[li].weight[[r, c]] = orig - eps;
                    let down = m.loss(x.view(), &labels).unwrap();
                    m.layers_mut()[li].weight[[r, c]] = orig;
                    let numeric = (up - down) / (2.0 * eps);
                    let analytic = g.layers[li].weight[[r, c]];
                    let denom = analytic.abs().max(numeric.abs()).max(1e-6);
                    worst = worst.max((analytic - numeric).abs() / denom);
                }
                let orig = m.layers()[li].bias[r];
                m.layers_mut()[li].bias[r] = orig + eps;
                let up = m.loss(x.view(), &labels).unwrap();
                m.layers_mut()[li].bias[r] = orig - eps;
                let down = m.loss(x.view(), &labels).unwrap();
                m.layers_mut()[li].bias[r] = orig;
                let numeric = (up - down) / (2.0 * eps);
                let analytic = g.layers[li].bias[r];
                let denom = analytic.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max((analytic - numeric).abs() / denom);
            }
        }
        assert!(worst < 1e-4, "max relative error {worst}");
    }

    #[test]
    fn training_samples_cover_the_frame() {
        let seq = FeatureSequence::new("v", 4, 16, 1, vec![0.0; 100]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = Spotting::new("v", "w0", 40, 1.0, Source::M).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            seen.insert(sample_training_feature(&s, &seq, &mut rng));
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![7, 8, 9, 10]);
        let s0 = Spotting::new("v", "w0", 0, 1.0, Source::M).unwrap();
        assert_eq!(sample_training_feature(&s0, &seq, &mut rng), 0);
        let draw = |seed| sample_training_feature(&s, &seq, &mut ChaCha8Rng::seed_from_u64(seed));
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn learning_rate_schedule() {
        let cfg = TrainConfig::default();
        let lrs: Vec<f64> = (0..15).map(|e| cfg.lr_at_epoch(e)).collect();
        assert_eq!(lrs[0], 1e-2);
        assert_eq!(lrs[4], 1e-2);
        assert_abs_diff_eq!(lrs[5], 1e-3, epsilon = 1e-15);
        assert_abs_diff_eq!(lrs[9], 1e-3, epsilon = 1e-15);
        assert_abs_diff_eq!(lrs[10], 1e-4, epsilon = 1e-15);
        assert_abs_diff_eq!(lrs[14], 1e-4, epsilon = 1e-15);
        assert!(TrainConfig {
            decay_epochs: vec![0],
            ..cfg.clone()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            decay_epochs: vec![16],
            ..cfg.clone()
        }
        .validate()
        .is_err());
        assert!(TrainConfig { lr: 0.0, ..cfg }.validate().is_err());
    }

    #[test]
    fn memorizes_a_single_sample() {
        let seq =
            FeatureSequence::new("v", 4, 16, 8, (0..8 * 8).map(|i| ((i * 7) % 5) as f32 - 2.0).collect()).unwrap();
        let features = BTreeMap::from([("v".to_string(), seq)]);
        let spots = [Spotting::new("v", "w1", 12, 1.0, Source::M).unwrap()];
        let cfg = TrainConfig {
            epochs: 100,
            decay_epochs: vec![],
            redraw_each_epoch: false,
            ..TrainConfig::default()
        };
        let out = train(&spots, &features, &vocab(3), &cfg).unwrap();
        let h = &out.loss_history;
        assert!(h.windows(2).all(|w| w[1] < w[0]), "loss not strictly decreasing: {h:?}");
        assert!(*h.last().unwrap() < 1e-3, "final loss {}", h.last().unwrap());
    }

    #[test]
    fn training_is_deterministic_and_validates() {
        let seq = FeatureSequence::new("v", 4, 16, 4, (0..40 * 4).map(|i| (i % 9) as f32 * 0.1).collect()).unwrap();
        let features = BTreeMap::from([("v".to_string(), seq)]);
        let spots: Vec<_> = (0..20)
            .map(|i| Spotting::new("v", format!("w{}", i % 2), 8 * i, 1.0, Source::M).unwrap())
            .collect();
        let cfg = TrainConfig {
            epochs: 3,
            decay_epochs: vec![2],
            hidden: [8, 8],
            batch_size: 7,
            ..Default::default()
        };
        let a = train(&spots, &features, &vocab(2), &cfg).unwrap();
        let b = train(&spots, &features, &vocab(2), &cfg).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.loss_history, b.loss_history);
        assert!(matches!(
            train(&[], &features, &vocab(2), &cfg),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            train(&spots, &features, &vocab(1), &cfg),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn sliding_prediction_matches_forward() {
        let m = tiny(3, 4, 2);
        let data: Vec<f32> = (0..10 * 3).map(|i| (i as f32 * 0.37).sin()).collect();
        let seq = FeatureSequence::new("v", 4, 16, 3, data).unwrap();
        let preds = predict_sliding(&m, &seq).unwrap();
        assert_eq!(preds.len(), 10);
        for t in 0..10 {
            let x: Array1<f64> = seq.row(t).iter().map(|&v| v as f64).collect();
            let p = m.forward(x.view()).unwrap();
            let row: Vec<f32> = p.iter().map(|&v| v as f32).collect();
            assert_eq!(preds.row(t), row.as_slice());
            assert!((preds.row(t).iter().map(|&v| v as f64).sum::<f64>() - 1.0).abs() < 1e-6);
        }
        let constant = FeatureSequence::new("v", 4, 16, 3, vec![0.25; 12]).unwrap();
        let p = predict_sliding(&m, &constant).unwrap();
        assert!((1..4).all(|t| p.row(t) == p.row(0)));
        let wrong = FeatureSequence::new("v", 4, 16, 2, vec![0.25; 4]).unwrap();
        assert!(matches!(predict_sliding(&m, &wrong), Err(Error::Shape(_))));
    }
}
