//! Classifier two-sample test between posterior sample sets.
//!
//! Label the sets 0 and 1, standardize features jointly, and train the MLP
//! of [`mlp`] under stratified k-fold cross-validation. The score is the
//! mean held-out accuracy: 0.5 means the classifier cannot tell the sets
//! apart (best), 1.0 means full separation (worst).

pub mod mlp;

use crate::core::ParamVector;
use crate::error::{Error, Result};
use mlp::{train_classifier, TrainConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Classifier and cross-validation settings.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct C2stConfig {
    /// Hidden width is `10 × input dim`, capped here.
    pub width_cap: usize,
    pub folds: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for C2stConfig {
    fn default() -> Self {
        Self { width_cap: 128, folds: 5, epochs: 100, learning_rate: 1e-3, batch_size: 100, seed: 0 }
    }
}

impl C2stConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config("c2st needs at least 2 folds".into()));
        }
        if self.width_cap < 1 || self.epochs < 1 || self.batch_size < 1 {
            return Err(Error::Config("c2st widths, epochs and batches must be positive".into()));
        }
        Ok(())
    }
}

/// Mean held-out accuracy and its per-fold breakdown.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct C2stScore {
    pub value: f64,
    pub per_fold: Vec<f64>,
    /// Folds that hit non-finite training loss and were scored as 0.5.
    pub diverged_folds: usize,
}

/// Classifier two-sample test between equally sized sample sets.
pub fn c2st(x: &[ParamVector], y: &[ParamVector], cfg: &C2stConfig) -> Result<C2stScore> {
    cfg.validate()?;
    if x.len() != y.len() {
        return Err(Error::Config("c2st needs equally sized sets".into()));
    }
    if x.len() < 100 {
        return Err(Error::Config("c2st needs at least 100 samples per set".into()));
    }
    let dim = x[0].dim();
    if x.iter().chain(y).any(|t| t.dim() != dim) {
        return Err(Error::Config("c2st sets disagree on dimension".into()));
    }

    // joint standardization, dropping features degenerate in the pooled set
    let n_total = 2 * x.len();
    let mut mean = vec![0.0; dim];
    for t in x.iter().chain(y) {
        for (m, v) in mean.iter_mut().zip(t.values()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n_total as f64;
    }
    let mut var = vec![0.0; dim];
    for t in x.iter().chain(y) {
        for (s, (v, m)) in var.iter_mut().zip(t.values().iter().zip(&mean)) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut var {
        *s /= n_total as f64;
    }
    let live: Vec<usize> = (0..dim).filter(|&k| var[k] > 1e-24).collect();
    if live.is_empty() {
        return Err(Error::Config("every feature is degenerate in both sets".into()));
    }
    let standardize = |t: &ParamVector| -> Vec<f64> {
        live.iter().map(|&k| (t.values()[k] - mean[k]) / var[k].sqrt()).collect()
    };

    // interleave the two sets so every label-0 sample sits right before its
    // label-1 counterpart: assigning fold i % folds is then stratified
    let mut features = Vec::with_capacity(n_total);
    let mut labels = Vec::with_capacity(n_total);
    for (a, b) in x.iter().zip(y) {
        features.push(standardize(a));
        labels.push(0u8);
        features.push(standardize(b));
        labels.push(1u8);
    }
    let fold_of: Vec<usize> = (0..n_total).map(|i| (i / 2) % cfg.folds).collect();

    let hidden = (10 * live.len()).clamp(1, cfg.width_cap);
    let per_fold: Vec<(f64, bool)> = (0..cfg.folds)
        .into_par_iter()
        .map(|fold| {
            let train_idx: Vec<usize> =
                (0..n_total).filter(|&i| fold_of[i] != fold).collect();
            let test_idx: Vec<usize> = (0..n_total).filter(|&i| fold_of[i] == fold).collect();
            let train_x: Vec<Vec<f64>> =
                train_idx.iter().map(|&i| features[i].clone()).collect();
            let train_y: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();
            let trained = train_classifier(
                &train_x,
                &train_y,
                &TrainConfig {
                    hidden,
                    epochs: cfg.epochs,
                    learning_rate: cfg.learning_rate,
                    batch_size: cfg.batch_size,
                    seed: cfg.seed.wrapping_add(fold as u64),
                },
            );
            if trained.diverged {
                return (0.5, true);
            }
            let correct = test_idx
                .iter()
                .filter(|&&i| u8::from(trained.model.predict(&features[i]) >= 0.5) == labels[i])
                .count();
            (correct as f64 / test_idx.len() as f64, false)
        })
        .collect();

    let diverged_folds = per_fold.iter().filter(|(_, d)| *d).count();
    let scores: Vec<f64> = per_fold.into_iter().map(|(s, _)| s).collect();
    let value = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(C2stScore { value, per_fold: scores, diverged_folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::standard_normal;
    use crate::streams::{substream, StreamKind};

    fn gaussian_set(
        n: usize,
        dim: usize,
        shift: f64,
        seed_tag: u64,
    ) -> Vec<ParamVector> {
        let mut rng = substream(1000 + seed_tag, StreamKind::Classifier, 0, 0);
        (0..n)
            .map(|_| {
                ParamVector::new(
                    (0..dim).map(|_| shift + standard_normal(&mut rng)).collect(),
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn identical_distributions_score_near_half() {
        let x = gaussian_set(1000, 2, 0.0, 0);
        let y = gaussian_set(1000, 2, 0.0, 1);
        let s = c2st(&x, &y, &C2stConfig::with_seed(7)).unwrap();
        assert!((0.45..=0.55).contains(&s.value), "score {}", s.value);
    }

    #[test]
    fn distant_distributions_fully_separate() {
        let x = gaussian_set(1000, 2, 0.0, 2);
        let y = gaussian_set(1000, 2, 5.0, 3);
        let s = c2st(&x, &y, &C2stConfig::with_seed(7)).unwrap();
        assert!(s.value >= 0.99, "score {}", s.value);
    }

    #[test]
    fn unit_gap_matches_the_bayes_accuracy_band() {
        // 1-D N(0,1) vs N(1,1): optimal accuracy Φ(1/2) ≈ 0.691.
        let x = gaussian_set(1000, 1, 0.0, 4);
        let y = gaussian_set(1000, 1, 1.0, 5);
        let s = c2st(&x, &y, &C2stConfig::with_seed(7)).unwrap();
        assert!((0.64..=0.74).contains(&s.value), "score {}", s.value);
    }

    #[test]
    fn label_order_is_symmetric() {
        let x = gaussian_set(500, 2, 0.0, 6);
        let y = gaussian_set(500, 2, 0.8, 7);
        let cfg = C2stConfig::with_seed(9);
        let a = c2st(&x, &y, &cfg).unwrap();
        let b = c2st(&y, &x, &cfg).unwrap();
        assert!((a.value - b.value).abs() <= 0.01, "{} vs {}", a.value, b.value);
    }

    #[test]
    fn monotone_in_the_mean_gap() {
        let cfg = C2stConfig::with_seed(11);
        let mut prev = 0.0;
        for (tag, gap) in [(10u64, 0.0), (12, 1.0), (14, 3.0)] {
            let x = gaussian_set(600, 1, 0.0, tag);
            let y = gaussian_set(600, 1, gap, tag + 1);
            let s = c2st(&x, &y, &cfg).unwrap().value;
            assert!(s >= prev - 0.02, "gap {gap} scored {s}, below {prev}");
            prev = s;
        }
    }

    #[test]
    fn degenerate_features_are_dropped() {
        // second coordinate constant in both sets: should not break scoring
        let x: Vec<ParamVector> = gaussian_set(500, 1, 0.0, 20)
            .into_iter()
            .map(|t| ParamVector::new(vec![t[0], 3.0]).unwrap())
            .collect();
        let y: Vec<ParamVector> = gaussian_set(500, 1, 3.0, 21)
            .into_iter()
            .map(|t| ParamVector::new(vec![t[0], 3.0]).unwrap())
            .collect();
        let s = c2st(&x, &y, &C2stConfig::with_seed(1)).unwrap();
        assert!(s.value > 0.9);

        let flat_x: Vec<ParamVector> =
            (0..200).map(|_| ParamVector::new(vec![1.0]).unwrap()).collect();
        let flat_y: Vec<ParamVector> =
            (0..200).map(|_| ParamVector::new(vec![1.0]).unwrap()).collect();
        assert!(c2st(&flat_x, &flat_y, &C2stConfig::default()).is_err());
    }

    #[test]
    fn deterministic_under_fixed_seed() {
        let x = gaussian_set(300, 2, 0.0, 30);
        let y = gaussian_set(300, 2, 0.5, 31);
        let cfg = C2stConfig::with_seed(42);
        let a = c2st(&x, &y, &cfg).unwrap();
        let b = c2st(&x, &y, &cfg).unwrap();
        assert_eq!(a.per_fold, b.per_fold);
    }
}
