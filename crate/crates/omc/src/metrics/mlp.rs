//! Small fully connected binary classifier trained with Adam.
//!
//! Two ReLU hidden layers and a sigmoid output head, trained on
//! cross-entropy with mini-batches. Everything is seeded and f64, so a
//! fixed configuration always reproduces the same classifier.

use crate::core::unit_f64;
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub struct MlpClassifier {
    dims: [usize; 3], // input, hidden, hidden
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
    w3: Vec<f64>,
    b3: f64,
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u32,
}

impl AdamState {
    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let bc1 = 1.0 - B1.powi(self.t as i32);
        let bc2 = 1.0 - B2.powi(self.t as i32);
        for k in 0..params.len() {
            self.m[k] = B1 * self.m[k] + (1.0 - B1) * grads[k];
            self.v[k] = B2 * self.v[k] + (1.0 - B2) * grads[k] * grads[k];
            params[k] -= lr * (self.m[k] / bc1) / ((self.v[k] / bc2).sqrt() + EPS);
        }
    }
}

fn glorot(rng: &mut dyn RngCore, fan_in: usize, fan_out: usize, n: usize) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| limit * (2.0 * unit_f64(rng) - 1.0)).collect()
}

impl MlpClassifier {
    pub fn new(input_dim: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(0x31_1);
        Self {
            dims: [input_dim, hidden, hidden],
            w1: glorot(&mut rng, input_dim, hidden, input_dim * hidden),
            b1: vec![0.0; hidden],
            w2: glorot(&mut rng, hidden, hidden, hidden * hidden),
            b2: vec![0.0; hidden],
            w3: glorot(&mut rng, hidden, 1, hidden),
            b3: 0.0,
        }
    }

    /// Probability of label 1.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let (_, _, p) = self.forward(x);
        p
    }

    fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let [d, h, _] = self.dims;
        let mut a1 = vec![0.0; h];
        for j in 0..h {
            let mut s = self.b1[j];
            for i in 0..d {
                s += self.w1[i * h + j] * x[i];
            }
            a1[j] = s.max(0.0);
        }
        let mut a2 = vec![0.0; h];
        for j in 0..h {
            let mut s = self.b2[j];
            for i in 0..h {
                s += self.w2[i * h + j] * a1[i];
            }
            a2[j] = s.max(0.0);
        }
        let mut logit = self.b3;
        for i in 0..h {
            logit += self.w3[i] * a2[i];
        }
        (a1, a2, 1.0 / (1.0 + (-logit).exp()))
    }

    /// One epoch of mini-batch Adam on binary cross-entropy; returns the
    /// mean training loss. Batch order comes from the caller's shuffle.
    fn train_epoch(
        &mut self,
        features: &[Vec<f64>],
        labels: &[u8],
        order: &[usize],
        batch: usize,
        lr: f64,
        opt: &mut MlpAdam,
    ) -> f64 {
        let [d, h, _] = self.dims;
        let mut total_loss = 0.0;
        for chunk in order.chunks(batch) {
            let scale = 1.0 / chunk.len() as f64;
            let mut gw1 = vec![0.0; d * h];
            let mut gb1 = vec![0.0; h];
            let mut gw2 = vec![0.0; h * h];
            let mut gb2 = vec![0.0; h];
            let mut gw3 = vec![0.0; h];
            let mut gb3 = 0.0;
            for &idx in chunk {
                let x = &features[idx];
                let y = labels[idx] as f64;
                let (a1, a2, p) = self.forward(x);
                let p_safe = p.clamp(1e-12, 1.0 - 1e-12);
                total_loss -= (y * p_safe.ln() + (1.0 - y) * (1.0 - p_safe).ln())
                    / order.len() as f64;
                // dL/dlogit for sigmoid + BCE
                let dlogit = (p - y) * scale;
                gb3 += dlogit;
                let mut da2 = vec![0.0; h];
                for i in 0..h {
                    gw3[i] += dlogit * a2[i];
                    da2[i] = dlogit * self.w3[i];
                }
                let mut da1 = vec![0.0; h];
                for j in 0..h {
                    if a2[j] <= 0.0 {
                        continue;
                    }
                    let g = da2[j];
                    gb2[j] += g;
                    for i in 0..h {
                        gw2[i * h + j] += g * a1[i];
                        da1[i] += g * self.w2[i * h + j];
                    }
                }
                for j in 0..h {
                    if a1[j] <= 0.0 {
                        continue;
                    }
                    let g = da1[j];
                    gb1[j] += g;
                    for i in 0..d {
                        gw1[i * h + j] += g * x[i];
                    }
                }
            }
            opt.w1.step(&mut self.w1, &gw1, lr);
            opt.b1.step(&mut self.b1, &gb1, lr);
            opt.w2.step(&mut self.w2, &gw2, lr);
            opt.b2.step(&mut self.b2, &gb2, lr);
            opt.w3.step(&mut self.w3, &gw3, lr);
            let mut b3 = [self.b3];
            opt.b3.step(&mut b3, &[gb3], lr);
            self.b3 = b3[0];
        }
        total_loss
    }
}

struct MlpAdam {
    w1: AdamState,
    b1: AdamState,
    w2: AdamState,
    b2: AdamState,
    w3: AdamState,
    b3: AdamState,
}

/// Training settings for [`train_classifier`].
#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

pub struct TrainedClassifier {
    pub model: MlpClassifier,
    pub final_loss: f64,
    pub loss_trace: Vec<f64>,
    /// Training hit a non-finite loss and aborted.
    pub diverged: bool,
}

/// Train the two-hidden-layer classifier on (features, labels).
pub fn train_classifier(
    features: &[Vec<f64>],
    labels: &[u8],
    cfg: &TrainConfig,
) -> TrainedClassifier {
    assert_eq!(features.len(), labels.len());
    assert!(!features.is_empty());
    let input_dim = features[0].len();
    let mut model = MlpClassifier::new(input_dim, cfg.hidden, cfg.seed);
    let mut opt = MlpAdam {
        w1: AdamState::new(model.w1.len()),
        b1: AdamState::new(model.b1.len()),
        w2: AdamState::new(model.w2.len()),
        b2: AdamState::new(model.b2.len()),
        w3: AdamState::new(model.w3.len()),
        b3: AdamState::new(1),
    };
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(0x31_2);
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut diverged = false;
    for _ in 0..cfg.epochs {
        // Fisher–Yates with the seeded stream
        for i in (1..order.len()).rev() {
            let j = ((unit_f64(&mut rng) * (i + 1) as f64) as usize).min(i);
            order.swap(i, j);
        }
        let loss =
            model.train_epoch(features, labels, &order, cfg.batch_size, cfg.learning_rate, &mut opt);
        if !loss.is_finite() {
            diverged = true;
            break;
        }
        trace.push(loss);
    }
    let final_loss = trace.last().copied().unwrap_or(f64::NAN);
    TrainedClassifier { model, final_loss, loss_trace: trace, diverged }
}

/// Hard labels at the 0.5 threshold.
pub fn classify(model: &MlpClassifier, features: &[Vec<f64>]) -> Vec<u8> {
    features.iter().map(|x| u8::from(model.predict(x) >= 0.5)).collect()
}
