//! Fully connected ReLU network with a logistic output, parameters in one flat vector.

use rand::{Rng, RngCore};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"PINVMLP\0";
const BLOB_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    /// Layer widths from input to the scalar output, e.g. `[in, 128, 128, 1]`.
    pub dims: Vec<usize>,
    pub params: Vec<f64>,
}

/// Per-layer activations kept for the backward pass.
pub struct Cache {
    acts: Vec<Vec<f64>>,
}

impl Mlp {
    /// Uniform init in ±1/sqrt(fan_in) for weights and biases.
    pub fn new(input: usize, hidden: &[usize], rng: &mut dyn RngCore) -> Self {
        let mut dims = vec![input];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let n = Self::count(&dims);
        let mut params = Vec::with_capacity(n);
        for w in dims.windows(2) {
            let bound = 1.0 / (w[0].max(1) as f64).sqrt();
            for _ in 0..(w[0] * w[1] + w[1]) {
                params.push(rng.random_range(-bound..bound));
            }
        }
        Self { dims, params }
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = Self::count(&dims);
        Self { dims, params: vec![0.0; n] }
    }

    fn count(dims: &[usize]) -> usize {
        dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    /// Offsets of (weights, biases) for layer `l`; weights are row-major `[out][in]`.
    fn offsets(&self, l: usize) -> (usize, usize) {
        let mut off = 0;
        for w in self.dims.windows(2).take(l) {
            off += w[0] * w[1] + w[1];
        }
        (off, off + self.dims[l] * self.dims[l + 1])
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        self.forward(x).0
    }

    pub fn prob(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Returns the output logit and the cache.
    pub fn forward(&self, x: &[f64]) -> (f64, Cache) {
        assert_eq!(x.len(), self.dims[0], "input width mismatch");
        let layers = self.dims.len() - 1;
        let mut acts = Vec::with_capacity(layers + 1);
        acts.push(x.to_vec());
        for l in 0..layers {
            let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
            let (wo, bo) = self.offsets(l);
            let w = &self.params[wo..wo + n_in * n_out];
            let b = &self.params[bo..bo + n_out];
            let a = acts.last().unwrap();
            let mut z = b.to_vec();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &w[o * n_in..(o + 1) * n_in];
                *zo += row.iter().zip(a).map(|(p, q)| p * q).sum::<f64>();
            }
            if l + 1 < layers {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            }
            acts.push(z);
        }
        let out = acts.last().unwrap()[0];
        (out, Cache { acts })
    }

    /// Accumulate `dlogit * d(logit)/d(params)` into `grad`.
    pub fn backward(&self, cache: &Cache, dlogit: f64, grad: &mut [f64]) {
        let layers = self.dims.len() - 1;
        let mut delta = vec![dlogit];
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
            let (wo, bo) = self.offsets(l);
            let a_in = &cache.acts[l];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                grad[bo + o] += d;
                let g = &mut grad[wo + o * n_in..wo + (o + 1) * n_in];
                for (gi, ai) in g.iter_mut().zip(a_in) {
                    *gi += d * ai;
                }
            }
            if l == 0 {
                break;
            }
            let w = &self.params[wo..wo + n_in * n_out];
            let mut prev = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                for (p, wi) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                    *p += d * wi;
                }
            }
            for (p, a) in prev.iter_mut().zip(a_in) {
                if *a <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }

    /// Flat little-endian blob: magic, version, layer count, dims, parameters.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * self.dims.len() + 8 * self.params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&BLOB_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for &d in &self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &p in &self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Input(format!("weight blob: {m}"));
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(bad("bad magic"));
        }
        let u32_at = |i: usize| -> Result<u32> {
            bytes.get(i..i + 4).map(|b| u32::from_le_bytes(b.try_into().unwrap())).ok_or_else(|| bad("truncated"))
        };
        let version = u32_at(8)?;
        if version != BLOB_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let n = u32_at(12)? as usize;
        let mut dims = Vec::with_capacity(n);
        for i in 0..n {
            dims.push(u32_at(16 + 4 * i)? as usize);
        }
        if dims.len() < 2 || dims.iter().any(|&d| d == 0 && dims[0] != 0) {
            return Err(bad("bad layer dims"));
        }
        let start = 16 + 4 * n;
        let count = Self::count(&dims);
        if bytes.len() != start + 8 * count {
            return Err(bad("parameter count does not match dims"));
        }
        let params =
            bytes[start..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Self { dims, params })
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_sigmoid_of_bias() {
        let mut m = Mlp::zeros(vec![3, 4, 4, 1]);
        *m.params.last_mut().unwrap() = 0.7;
        assert!((m.prob(&[1.0, -2.0, 3.0]) - sigmoid(0.7)).abs() < 1e-15);
    }

    #[test]
    fn blob_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = Mlp::new(5, &[7, 3], &mut rng);
        let back = Mlp::from_bytes(&m.to_bytes()).unwrap();
        assert_eq!(m, back);
        assert!(Mlp::from_bytes(&m.to_bytes()[..20]).is_err());
    }

    #[test]
    fn backward_matches_finite_differences_on_logit() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = Mlp::new(4, &[6, 5], &mut rng);
        let x = [0.3, -0.7, 1.1, 0.05];
        let (_, cache) = m.forward(&x);
        let mut g = vec![0.0; m.params.len()];
        m.backward(&cache, 1.0, &mut g);
        for i in 0..m.params.len() {
            let mut a = m.clone();
            a.params[i] += 1e-6;
            let mut b = m.clone();
            b.params[i] -= 1e-6;
            let fd = (a.logit(&x) - b.logit(&x)) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-6, "param {i}: {fd} vs {}", g[i]);
        }
    }
}
