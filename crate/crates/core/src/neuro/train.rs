//! Training classifiers from effect vectors alone.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::transition_loss_grad;
use super::mlp::{sigmoid, Mlp};
use crate::error::{Error, Result};
use crate::grounding::{enumerate_groundings, ground_effect_vector};
use crate::types::*;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub val_fraction: f64,
    pub eps: f64,
    pub hidden: Vec<usize>,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 100, learning_rate: 1e-3, val_fraction: 0.2, eps: 1e-7, hidden: vec![128, 128], threshold: 0.005, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::Config("validation fraction must lie strictly between 0 and 1".into()));
        }
        if self.learning_rate <= 0.0 || self.eps <= 0.0 || self.eps >= 0.5 {
            return Err(Error::Config("learning rate and clamp epsilon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainedCandidate {
    pub predicate: LiftedPredicate,
    pub effect_vector: EffectVector,
    pub mlp: Mlp,
    pub train_loss: Vec<f64>,
    pub val_loss: f64,
    pub consistent: bool,
}

/// One transition encoded for a single predicate: row-major inputs per grounding.
#[derive(Clone, Debug)]
pub struct EncodedTransition {
    pub controller: String,
    pub pre: Vec<f64>,
    pub post: Vec<f64>,
    pub t: Vec<i8>,
}

/// Concatenated feature vectors of each atom's arguments, row-major.
pub fn encode_atoms(state: &State, atoms: &[GroundAtom], width: Option<usize>) -> Result<(Vec<f64>, usize)> {
    let mut out = Vec::new();
    let mut w = width;
    for a in atoms {
        let start = out.len();
        for o in &a.args {
            let f = state.get(o).ok_or_else(|| Error::Input(format!("state lacks object `{o}`")))?;
            out.extend_from_slice(f);
        }
        let len = out.len() - start;
        match w {
            None => w = Some(len),
            Some(x) if x != len => {
                return Err(Error::Config(format!("atom {a} encodes to {len} features, expected {x}")));
            }
            _ => {}
        }
    }
    Ok((out, w.unwrap_or(0)))
}

/// Classifier probabilities for every grounding, in canonical order.
pub fn ground(state: &State, predicate: &LiftedPredicate, mlp: &Mlp, objects: &[ObjectInstance]) -> Result<Vec<f64>> {
    let atoms = enumerate_groundings(predicate, objects);
    let (x, w) = encode_atoms(state, &atoms, Some(mlp.input_dim()))?;
    if atoms.is_empty() {
        return Ok(Vec::new());
    }
    if w == 0 {
        return Ok(vec![mlp.prob(&[]); atoms.len()]);
    }
    Ok(x.chunks(w).map(|row| mlp.prob(row)).collect())
}

/// Encode every transition of every demo for one predicate/effect vector.
pub fn encode_demos(predicate: &LiftedPredicate, ev: &EffectVector, demos: &[Demonstration]) -> Result<(Vec<Vec<EncodedTransition>>, usize)> {
    let mut width = None;
    let mut out = Vec::with_capacity(demos.len());
    for d in demos {
        let atoms = enumerate_groundings(predicate, &d.task.objects);
        let mut rows = Vec::with_capacity(d.transitions.len());
        for tr in &d.transitions {
            let (pre, w) = encode_atoms(&tr.pre, &atoms, width)?;
            let (post, _) = encode_atoms(&tr.post, &atoms, Some(w))?;
            if !atoms.is_empty() {
                width = Some(w);
            }
            let t = ground_effect_vector(predicate, ev, &tr.action, &d.task.objects)?;
            rows.push(EncodedTransition { controller: tr.action.controller.clone(), pre, post, t });
        }
        out.push(rows);
    }
    let width = width.unwrap_or(predicate.arg_types.len());
    Ok((out, width))
}

fn probs(mlp: &Mlp, x: &[f64], n: usize) -> Vec<f64> {
    let w = mlp.input_dim();
    (0..n).map(|i| mlp.prob(&x[i * w..(i + 1) * w])).collect()
}

fn one_loss(mlp: &Mlp, tr: &EncodedTransition, eps: f64) -> f64 {
    let n = tr.t.len();
    transition_loss_grad(&probs(mlp, &tr.pre, n), &probs(mlp, &tr.post, n), &tr.t, eps, None)
}

/// Loss of one transition; accumulates `scale * gradient` into `grad`.
fn one_loss_grad(mlp: &Mlp, tr: &EncodedTransition, eps: f64, scale: f64, grad: &mut [f64]) -> f64 {
    let n = tr.t.len();
    if n == 0 {
        return 0.0;
    }
    let w = mlp.input_dim();
    let mut caches = Vec::with_capacity(2 * n);
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for (x, out) in [(&tr.pre, &mut p), (&tr.post, &mut q)] {
        for i in 0..n {
            let (logit, c) = mlp.forward(&x[i * w..(i + 1) * w]);
            out.push(sigmoid(logit));
            caches.push(c);
        }
    }
    let mut dl = vec![0.0; 2 * n];
    let loss = transition_loss_grad(&p, &q, &tr.t, eps, Some(&mut dl));
    for (c, d) in caches.iter().zip(&dl) {
        if *d != 0.0 {
            mlp.backward(c, scale * d, grad);
        }
    }
    loss
}

fn by_controller<'a>(data: impl Iterator<Item = &'a EncodedTransition>) -> BTreeMap<&'a str, Vec<&'a EncodedTransition>> {
    let mut m: BTreeMap<&str, Vec<&EncodedTransition>> = BTreeMap::new();
    for t in data {
        m.entry(t.controller.as_str()).or_default().push(t);
    }
    m
}

/// Sum over controllers of the mean transition loss.
pub fn encoded_loss<'a>(mlp: &Mlp, data: impl Iterator<Item = &'a EncodedTransition>, eps: f64) -> f64 {
    by_controller(data)
        .values()
        .map(|ts| ts.iter().map(|t| one_loss(mlp, t, eps)).sum::<f64>() / ts.len() as f64)
        .sum()
}

/// Gradient of `encoded_loss` with respect to the flat parameters.
pub fn encoded_loss_grad<'a>(mlp: &Mlp, data: impl Iterator<Item = &'a EncodedTransition>, eps: f64) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; mlp.params.len()];
    let mut total = 0.0;
    for ts in by_controller(data).values() {
        let scale = 1.0 / ts.len() as f64;
        for t in ts {
            total += scale * one_loss_grad(mlp, t, eps, scale, &mut grad);
        }
    }
    (total, grad)
}

pub fn dataset_loss(demos: &[Demonstration], predicate: &LiftedPredicate, ev: &EffectVector, mlp: &Mlp, eps: f64) -> Result<f64> {
    if demos.is_empty() {
        return Err(Error::Input("dataset loss needs at least one demonstration".into()));
    }
    let (data, _) = encode_demos(predicate, ev, demos)?;
    Ok(encoded_loss(mlp, data.iter().flatten(), eps))
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    fn new(n: usize, lr: f64) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0, lr }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t);
        let c2 = 1.0 - B2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * g;
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * g * g;
            params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + 1e-8);
        }
    }
}

/// Demo indices held out for validation (by trajectory).
pub fn validation_split(n_demos: usize, frac: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n_demos).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5011));
    let n_val = if n_demos >= 2 { ((n_demos as f64 * frac).round() as usize).clamp(1, n_demos - 1) } else { 0 };
    let mut val = idx[..n_val].to_vec();
    let mut train = idx[n_val..].to_vec();
    val.sort_unstable();
    train.sort_unstable();
    (train, val)
}

pub fn train_candidate(predicate: &LiftedPredicate, ev: &EffectVector, demos: &[Demonstration], cfg: &TrainConfig) -> Result<TrainedCandidate> {
    cfg.validate()?;
    let (data, width) = encode_demos(predicate, ev, demos)?;
    let (train_idx, val_idx) = validation_split(demos.len(), cfg.val_fraction, cfg.seed);
    let mut train: Vec<&EncodedTransition> = train_idx.iter().flat_map(|&i| data[i].iter()).collect();
    if train.is_empty() {
        return Err(Error::Train(format!("empty training split for `{}`", predicate.name)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut mlp = Mlp::new(width, &cfg.hidden, &mut rng);
    let mut adam = Adam::new(mlp.params.len(), cfg.learning_rate);
    let mut grad = vec![0.0; mlp.params.len()];
    let mut curve = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        train.shuffle(&mut rng);
        let mut epoch = 0.0;
        for tr in &train {
            grad.iter_mut().for_each(|g| *g = 0.0);
            epoch += one_loss_grad(&mlp, tr, cfg.eps, 1.0, &mut grad);
            adam.step(&mut mlp.params, &grad);
        }
        curve.push(epoch / train.len() as f64);
    }
    let val_loss = if val_idx.is_empty() {
        log::warn!("no validation demos; reporting training loss for `{}`", predicate.name);
        encoded_loss(&mlp, train.iter().copied(), cfg.eps)
    } else {
        encoded_loss(&mlp, val_idx.iter().flat_map(|&i| data[i].iter()), cfg.eps)
    };
    Ok(TrainedCandidate {
        predicate: predicate.clone(),
        effect_vector: ev.clone(),
        mlp,
        train_loss: curve,
        val_loss,
        consistent: val_loss < cfg.threshold,
    })
}

/// Linear normalization of a group of validation losses to [0, 100]; lower loss scores higher.
pub fn score(val_losses: &[f64]) -> Vec<f64> {
    let lo = val_losses.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = val_losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    val_losses
        .iter()
        .map(|&l| if hi - lo <= 0.0 || !(hi - lo).is_finite() { 100.0 } else { (100.0 * ((hi - l) / (hi - lo))).clamp(0.0, 100.0) })
        .collect()
}
