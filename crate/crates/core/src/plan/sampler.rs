//! Gaussian samplers for continuous controller parameters: a linear mean over the
//! bound objects' features and a diagonal covariance.

use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::*;

pub const VAR_FLOOR: f64 = 1e-6;
const RIDGE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSampler {
    pub controller: String,
    pub input_dim: usize,
    pub omega_dim: usize,
    /// Row-major `[omega_dim][input_dim + 1]`; the last column is the intercept.
    pub weights: Vec<f64>,
    pub variance: Vec<f64>,
}

impl GaussianSampler {
    pub fn features(state: &State, args: &[String]) -> Result<Vec<f64>> {
        let mut x = Vec::new();
        for a in args {
            x.extend_from_slice(state.get(a).ok_or_else(|| Error::Input(format!("state lacks object `{a}`")))?);
        }
        Ok(x)
    }

    pub fn mean(&self, x: &[f64]) -> Vec<f64> {
        let w = self.input_dim + 1;
        (0..self.omega_dim)
            .map(|k| {
                let row = &self.weights[k * w..(k + 1) * w];
                row[..self.input_dim].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + row[self.input_dim]
            })
            .collect()
    }

    pub fn sample(&self, state: &State, args: &[String], rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        let x = Self::features(state, args)?;
        if x.len() != self.input_dim {
            return Err(Error::Input(format!("sampler for `{}` expects {} features, got {}", self.controller, self.input_dim, x.len())));
        }
        let mut m = self.mean(&x);
        for (v, var) in m.iter_mut().zip(&self.variance) {
            let z: f64 = StandardNormal.sample(rng);
            *v += var.sqrt() * z;
        }
        Ok(m)
    }

    /// Least-squares fit of ω on features of the bound objects.
    pub fn fit(controller: &str, xs: &[Vec<f64>], ys: &[Vec<f64>], omega_dim: usize) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::Input(format!("no data to fit a sampler for `{controller}`")));
        }
        let d = xs[0].len();
        let n = xs.len();
        let mut weights = vec![0.0; omega_dim * (d + 1)];
        if n < d + 1 {
            log::warn!("sampler for `{controller}`: {n} examples for {} coefficients; fitting the mean only", d + 1);
            let mut variance = Vec::with_capacity(omega_dim);
            for k in 0..omega_dim {
                let mean = ys.iter().map(|y| y[k]).sum::<f64>() / n as f64;
                weights[k * (d + 1) + d] = mean;
                variance.push((ys.iter().map(|y| (y[k] - mean).powi(2)).sum::<f64>() / n as f64).max(VAR_FLOOR));
            }
            return Ok(Self { controller: controller.to_string(), input_dim: d, omega_dim, weights, variance });
        }
        // Ridge on centred data: constant and collinear columns get (near) zero weight.
        let mean_x: Vec<f64> = (0..d).map(|j| xs.iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let xc = DMatrix::from_fn(n, d, |i, j| xs[i][j] - mean_x[j]);
        let gram = xc.transpose() * &xc + DMatrix::identity(d, d) * RIDGE;
        let chol = gram.cholesky().ok_or_else(|| Error::Train(format!("sampler fit for `{controller}`: singular system")))?;
        let mut variance = Vec::with_capacity(omega_dim);
        for k in 0..omega_dim {
            let mean_y = ys.iter().map(|y| y[k]).sum::<f64>() / n as f64;
            let yc = DVector::from_fn(n, |i, _| ys[i][k] - mean_y);
            let w = chol.solve(&(xc.transpose() * &yc));
            let resid = &yc - &xc * &w;
            variance.push((resid.norm_squared() / n as f64).max(VAR_FLOOR));
            let row = &mut weights[k * (d + 1)..(k + 1) * (d + 1)];
            row[..d].copy_from_slice(w.as_slice());
            row[d] = mean_y - w.iter().zip(&mean_x).map(|(a, b)| a * b).sum::<f64>();
        }
        Ok(Self { controller: controller.to_string(), input_dim: d, omega_dim, weights, variance })
    }
}

/// One sampler per controller with continuous parameters and at least two demo transitions.
pub fn learn_samplers(demos: &[Demonstration], controllers: &[ControllerSchema]) -> Result<Vec<GaussianSampler>> {
    let mut out = Vec::new();
    for c in controllers.iter().filter(|c| c.omega_dim > 0) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for t in demos.iter().flat_map(|d| &d.transitions).filter(|t| t.action.controller == c.name) {
            xs.push(GaussianSampler::features(&t.pre, &t.action.args)?);
            ys.push(t.action.omega.clone());
        }
        if xs.len() < 2 {
            log::warn!("controller `{}` has {} demonstration transitions; no sampler fitted", c.name, xs.len());
            continue;
        }
        out.push(GaussianSampler::fit(&c.name, &xs, &ys, c.omega_dim)?);
    }
    Ok(out)
}
