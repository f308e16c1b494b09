//! Parameterized differentiable mapping: affine layer over concatenated inputs
//! followed by tanh, with an optional tanh hidden layer.
//!
//! Parameters live in one flat vector. Layout without a hidden layer is
//! `[W (out x in, row-major), b (out)]`; with one it is
//! `[W1 (hid x in), b1 (hid), W2 (out x hid), b2 (out)]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::pattern::{ActivityPattern, PatternError};

type Layer<'a> = (&'a [f64], &'a [f64]);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferentiableMap {
    in_dims: Vec<usize>,
    out_dim: usize,
    hidden: Option<usize>,
    params: Vec<f64>,
}

/// Intermediate values kept from one forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    pub x: Vec<f64>,
    pub hidden: Option<Vec<f64>>,
    pub y: Vec<f64>,
}

impl DifferentiableMap {
    pub fn zeros(in_dims: &[usize], out_dim: usize, hidden: Option<usize>) -> Self {
        assert!(out_dim > 0 && !in_dims.is_empty(), "map needs inputs and outputs");
        let n_in: usize = in_dims.iter().sum();
        let n = match hidden {
            None => out_dim * n_in + out_dim,
            Some(h) => h * n_in + h + out_dim * h + out_dim,
        };
        Self { in_dims: in_dims.to_vec(), out_dim, hidden, params: vec![0.0; n] }
    }

    /// Uniform(-scale, scale) initialization.
    pub fn random<R: Rng>(in_dims: &[usize], out_dim: usize, hidden: Option<usize>, scale: f64, rng: &mut R) -> Self {
        let mut m = Self::zeros(in_dims, out_dim, hidden);
        for p in &mut m.params {
            *p = rng.gen_range(-scale..=scale);
        }
        m
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn in_total(&self) -> usize {
        self.in_dims.iter().sum()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn hidden(&self) -> Option<usize> {
        self.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, p: Vec<f64>) {
        assert_eq!(p.len(), self.params.len());
        self.params = p;
    }

    /// Output-layer bias slice.
    pub fn output_bias_mut(&mut self) -> &mut [f64] {
        let n = self.params.len();
        &mut self.params[n - self.out_dim..]
    }

    /// Offset (within the input vector) of input block `k`.
    pub fn block_offset(&self, k: usize) -> usize {
        self.in_dims[..k].iter().sum()
    }

    /// Concatenate patterns in declared order, checking each block's dimension.
    pub fn concat(&self, parts: &[&ActivityPattern]) -> Result<Vec<f64>, PatternError> {
        if parts.len() != self.in_dims.len() {
            return Err(PatternError::DimensionMismatch { expected: self.in_dims.len(), got: parts.len() });
        }
        let mut x = Vec::with_capacity(self.in_total());
        for (p, &d) in parts.iter().zip(&self.in_dims) {
            p.check_dim(d)?;
            x.extend_from_slice(p.values());
        }
        Ok(x)
    }

    fn layer(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
        b.iter()
            .enumerate()
            .map(|(i, bi)| {
                let row = &w[i * x.len()..(i + 1) * x.len()];
                (bi + row.iter().zip(x).map(|(a, c)| a * c).sum::<f64>()).tanh()
            })
            .collect()
    }

    /// Weights and biases of the first layer, then of the output layer if hidden.
    fn split(&self) -> (&[f64], &[f64], Option<Layer<'_>>) {
        let n_in = self.in_total();
        match self.hidden {
            None => {
                let (w, b) = self.params.split_at(self.out_dim * n_in);
                (w, b, None)
            }
            Some(h) => {
                let (w1, rest) = self.params.split_at(h * n_in);
                let (b1, rest) = rest.split_at(h);
                let (w2, b2) = rest.split_at(self.out_dim * h);
                (w1, b1, Some((w2, b2)))
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Forward {
        assert_eq!(x.len(), self.in_total(), "input length");
        let (w1, b1, second) = self.split();
        let first = Self::layer(w1, b1, x);
        match second {
            None => Forward { x: x.to_vec(), hidden: None, y: first },
            Some((w2, b2)) => {
                let y = Self::layer(w2, b2, &first);
                Forward { x: x.to_vec(), hidden: Some(first), y }
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x).y
    }

    pub fn evaluate(&self, parts: &[&ActivityPattern]) -> Result<ActivityPattern, PatternError> {
        let x = self.concat(parts)?;
        ActivityPattern::new(self.eval(&x))
    }

    fn tanh_back(y: &[f64], v: &[f64]) -> Vec<f64> {
        y.iter().zip(v).map(|(y, v)| v * (1.0 - y * y)).collect()
    }

    fn transpose_mul(w: &[f64], g: &[f64], n_cols: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_cols];
        for (i, gi) in g.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o += w[i * n_cols + j] * gi;
            }
        }
        out
    }

    /// Vector-Jacobian product with respect to the input: (d y / d x)^T v.
    pub fn input_vjp(&self, fw: &Forward, v: &[f64]) -> Vec<f64> {
        let (w1, _, second) = self.split();
        let gz = Self::tanh_back(&fw.y, v);
        match second {
            None => Self::transpose_mul(w1, &gz, fw.x.len()),
            Some((w2, _)) => {
                let h = fw.hidden.as_ref().expect("hidden activations");
                let gh = Self::transpose_mul(w2, &gz, h.len());
                let ga = Self::tanh_back(h, &gh);
                Self::transpose_mul(w1, &ga, fw.x.len())
            }
        }
    }

    /// Jacobian-vector product with respect to the input: (d y / d x) dx.
    pub fn input_jvp(&self, fw: &Forward, dx: &[f64]) -> Vec<f64> {
        let lin = |w: &[f64], v: &[f64], rows: usize| -> Vec<f64> {
            (0..rows).map(|i| w[i * v.len()..(i + 1) * v.len()].iter().zip(v).map(|(a, b)| a * b).sum()).collect()
        };
        let (w1, _, second) = self.split();
        match second {
            None => Self::tanh_back(&fw.y, &lin(w1, dx, self.out_dim)),
            Some((w2, _)) => {
                let h = fw.hidden.as_ref().expect("hidden activations");
                let dh = Self::tanh_back(h, &lin(w1, dx, h.len()));
                Self::tanh_back(&fw.y, &lin(w2, &dh, self.out_dim))
            }
        }
    }

    /// Full input Jacobian, `out_dim` rows of `in_total` entries.
    pub fn input_jacobian(&self, fw: &Forward) -> Vec<Vec<f64>> {
        (0..self.out_dim)
            .map(|i| {
                let mut e = vec![0.0; self.out_dim];
                e[i] = 1.0;
                self.input_vjp(fw, &e)
            })
            .collect()
    }

    /// Gradient of v . y with respect to the flat parameter vector.
    pub fn param_vjp(&self, fw: &Forward, v: &[f64]) -> Vec<f64> {
        let outer = |g: &[f64], x: &[f64], out: &mut Vec<f64>| {
            for gi in g {
                out.extend(x.iter().map(|xj| gi * xj));
            }
        };
        let gz = Self::tanh_back(&fw.y, v);
        let mut grad = Vec::with_capacity(self.params.len());
        match self.hidden {
            None => {
                outer(&gz, &fw.x, &mut grad);
                grad.extend_from_slice(&gz);
            }
            Some(hd) => {
                let h = fw.hidden.as_ref().expect("hidden activations");
                let (_, _, second) = self.split();
                let (w2, _) = second.unwrap();
                let gh = Self::transpose_mul(w2, &gz, hd);
                let ga = Self::tanh_back(h, &gh);
                outer(&ga, &fw.x, &mut grad);
                grad.extend_from_slice(&ga);
                outer(&gz, h, &mut grad);
                grad.extend_from_slice(&gz);
            }
        }
        grad
    }

    /// One descent step along the parameter gradient of v . y.
    pub fn descend(&mut self, fw: &Forward, v: &[f64], lr: f64) {
        let g = self.param_vjp(fw, v);
        for (p, gi) in self.params.iter_mut().zip(g) {
            *p -= lr * gi;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{central_gradient, central_jacobian, max_relative_error};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const H: f64 = 1e-6;
    const FLOOR: f64 = 1e-6;
    const TOL: f64 = 1e-4;

    fn probe_maps() -> Vec<DifferentiableMap> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        vec![
            DifferentiableMap::random(&[3, 2], 4, None, 1.0, &mut rng),
            DifferentiableMap::random(&[1, 1], 1, None, 1.0, &mut rng),
            DifferentiableMap::random(&[5, 2, 3], 5, Some(6), 1.0, &mut rng),
        ]
    }

    #[test]
    fn zero_map_outputs_zero() {
        let m = DifferentiableMap::zeros(&[4], 3, None);
        assert_eq!(m.eval(&[0.3, -1.0, 2.0, 5.0]), vec![0.0; 3]);
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for map in probe_maps() {
            let n = map.in_total();
            for _ in 0..100 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let v: Vec<f64> = (0..map.out_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let fw = map.forward(&x);

                let num = central_jacobian(|p| map.eval(p), &x, H);
                let ana = map.input_jacobian(&fw);
                for (a, b) in ana.iter().zip(&num) {
                    assert!(max_relative_error(a, b, FLOOR) < TOL);
                }

                let dx: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let jvp_num: Vec<f64> = num.iter().map(|row| row.iter().zip(&dx).map(|(a, b)| a * b).sum()).collect();
                assert!(max_relative_error(&map.input_jvp(&fw, &dx), &jvp_num, FLOOR) < TOL);

                let theta = map.params().to_vec();
                let pnum = central_gradient(
                    |p| {
                        let mut m = map.clone();
                        m.set_params(p.to_vec());
                        m.eval(&x).iter().zip(&v).map(|(a, b)| a * b).sum()
                    },
                    &theta,
                    H,
                );
                assert!(max_relative_error(&map.param_vjp(&fw, &v), &pnum, FLOOR) < TOL);
            }
        }
    }

    #[test]
    fn concat_rejects_wrong_block() {
        let m = DifferentiableMap::zeros(&[2, 3], 1, None);
        let a = ActivityPattern::zeros(2);
        let b = ActivityPattern::zeros(2);
        assert!(m.concat(&[&a, &b]).is_err());
    }
}
