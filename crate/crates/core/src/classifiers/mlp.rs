//! A small feed-forward network: 2 inputs, one sigmoid hidden layer of 3
//! units, softmax over the 3 classes. Full-batch gradient descent with
//! classical momentum; weights initialize uniformly from a seeded RNG, so a
//! fixed seed reproduces training bit for bit.
//!
//! Expects standardized features — the [`train`](super::train) dispatcher
//! fits and bundles the standardizer automatically.

use super::{argmax3, softmax3, training_views, Prediction, TrainConfig};
use crate::error::Result;
use crate::features::FeatureVector;
use crate::signal::MoveLabel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Network parameters. Also doubles as the gradient container, since the
/// gradient has exactly the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// Hidden weights, `w1[hidden][input]`.
    pub w1: [[f64; 2]; 3],
    pub b1: [f64; 3],
    /// Output weights, `w2[class][hidden]`.
    pub w2: [[f64; 3]; 3],
    pub b2: [f64; 3],
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

impl MlpModel {
    fn zeroed() -> MlpModel {
        MlpModel {
            w1: [[0.0; 2]; 3],
            b1: [0.0; 3],
            w2: [[0.0; 3]; 3],
            b2: [0.0; 3],
        }
    }

    /// Fresh parameters drawn uniformly from `[-range, range]`, in a fixed
    /// order (w1 row-major, b1, w2 row-major, b2) so a seed pins the init.
    fn seeded(seed: u64, range: f64) -> MlpModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = move || rng.random_range(-range..range);
        let mut m = MlpModel::zeroed();
        for row in m.w1.iter_mut() {
            for w in row.iter_mut() {
                *w = draw();
            }
        }
        for b in m.b1.iter_mut() {
            *b = draw();
        }
        for row in m.w2.iter_mut() {
            for w in row.iter_mut() {
                *w = draw();
            }
        }
        for b in m.b2.iter_mut() {
            *b = draw();
        }
        m
    }

    fn forward(&self, x: [f64; 2]) -> ([f64; 3], [f64; 3]) {
        let mut h = [0.0; 3];
        for j in 0..3 {
            h[j] = sigmoid(self.w1[j][0] * x[0] + self.w1[j][1] * x[1] + self.b1[j]);
        }
        let mut z = [0.0; 3];
        for c in 0..3 {
            z[c] = self.w2[c][0] * h[0] + self.w2[c][1] * h[1] + self.w2[c][2] * h[2] + self.b2[c];
        }
        (h, softmax3(z))
    }

    /// Class probabilities for a feature vector (already standardized if the
    /// model was trained on standardized data).
    pub fn probabilities(&self, f: FeatureVector) -> [f64; 3] {
        self.forward([f.x1, f.x2]).1
    }

    pub fn predict(&self, f: FeatureVector) -> Prediction {
        let scores = self.probabilities(f);
        Prediction {
            label: MoveLabel::from_class_index(argmax3(&scores)).expect("argmax is in 0..3"),
            scores,
        }
    }

    /// Parameters as one flat vector: w1 row-major, b1, w2 row-major, b2.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(21);
        for row in &self.w1 {
            out.extend_from_slice(row);
        }
        out.extend_from_slice(&self.b1);
        for row in &self.w2 {
            out.extend_from_slice(row);
        }
        out.extend_from_slice(&self.b2);
        out
    }

    /// Inverse of [`flatten`](MlpModel::flatten). Panics if `flat` is not 21
    /// entries long.
    pub fn from_flat(flat: &[f64]) -> MlpModel {
        assert_eq!(flat.len(), 21, "expected 21 parameters");
        let mut m = MlpModel::zeroed();
        let mut it = flat.iter().copied();
        let mut next = move || it.next().unwrap();
        for row in m.w1.iter_mut() {
            for w in row.iter_mut() {
                *w = next();
            }
        }
        for b in m.b1.iter_mut() {
            *b = next();
        }
        for row in m.w2.iter_mut() {
            for w in row.iter_mut() {
                *w = next();
            }
        }
        for b in m.b2.iter_mut() {
            *b = next();
        }
        m
    }
}

/// Mean cross-entropy of the network over the samples.
pub fn loss(model: &MlpModel, xs: &[[f64; 2]], ys: &[usize]) -> f64 {
    let n = xs.len() as f64;
    let mut total = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let (_, p) = model.forward(*x);
        total -= p[y].ln();
    }
    total / n
}

/// Gradient of [`loss`], in model shape.
pub fn gradient(model: &MlpModel, xs: &[[f64; 2]], ys: &[usize]) -> MlpModel {
    let n = xs.len() as f64;
    let mut g = MlpModel::zeroed();
    for (x, &y) in xs.iter().zip(ys) {
        let (h, p) = model.forward(*x);
        let mut dz = [0.0; 3];
        for c in 0..3 {
            dz[c] = (p[c] - if c == y { 1.0 } else { 0.0 }) / n;
        }
        let mut dh = [0.0; 3];
        for c in 0..3 {
            for j in 0..3 {
                g.w2[c][j] += dz[c] * h[j];
                dh[j] += model.w2[c][j] * dz[c];
            }
            g.b2[c] += dz[c];
        }
        for j in 0..3 {
            let dpre = dh[j] * h[j] * (1.0 - h[j]);
            g.w1[j][0] += dpre * x[0];
            g.w1[j][1] += dpre * x[1];
            g.b1[j] += dpre;
        }
    }
    g
}

/// Trains the network. The seed in `cfg` pins the weight init; a zero epoch
/// count returns that init untouched.
pub fn train_mlp(table: &crate::features::FeatureTable, cfg: &TrainConfig) -> Result<MlpModel> {
    let (xs, ys) = training_views(table)?;
    let p = cfg.mlp;

    let mut model = MlpModel::seeded(cfg.seed, p.init_range);
    let mut vel = MlpModel::zeroed();

    for _ in 0..p.epochs {
        let g = gradient(&model, &xs, &ys);
        for j in 0..3 {
            for k in 0..2 {
                vel.w1[j][k] = p.momentum * vel.w1[j][k] - p.learning_rate * g.w1[j][k];
                model.w1[j][k] += vel.w1[j][k];
            }
            vel.b1[j] = p.momentum * vel.b1[j] - p.learning_rate * g.b1[j];
            model.b1[j] += vel.b1[j];
        }
        for c in 0..3 {
            for j in 0..3 {
                vel.w2[c][j] = p.momentum * vel.w2[c][j] - p.learning_rate * g.w2[c][j];
                model.w2[c][j] += vel.w2[c][j];
            }
            vel.b2[c] = p.momentum * vel.b2[c] - p.learning_rate * g.b2[c];
            model.b2[c] += vel.b2[c];
        }
    }

    Ok(model)
}
