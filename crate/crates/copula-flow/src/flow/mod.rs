//! The diffeomorphic transform: a stack of masked affine autoregressive
//! layers, each preceded by a reverse permutation.
//!
//! `forward` maps data to the base distribution (the density-estimation
//! direction): per layer, `z_i = (y_i - μ_i(y_{<i})) exp(-α_i(y_{<i}))`
//! on the permuted input y, contributing `-Σ_i α_i` to the
//! log-determinant. `inverse` reconstructs coordinates in autoregressive
//! order. With freshly constructed parameters the output heads are zero,
//! so the whole flow starts as the identity map (up to the stacked
//! permutations) and the model density starts at exactly the base.

pub mod made;

pub use made::{MadeCache, MadeNet};

use crate::coupling::CopulaBase;
use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Log-scales are clamped to this band; hitting it raises the saturation
/// flag instead of silently overflowing exp().
pub const ALPHA_CLAMP: f64 = 15.0;

/// One flow layer: reverse permutation followed by the masked affine
/// autoregressive transform.
#[derive(Debug, Clone)]
pub struct MafLayer {
    net: MadeNet,
}

impl MafLayer {
    pub fn conditioner(&self) -> &MadeNet {
        &self.net
    }
}

/// Result of a forward pass.
#[derive(Debug, Clone)]
pub struct FlowOutput {
    pub z: Vec<f64>,
    pub log_det: f64,
    /// True when any log-scale hit the ±15 clamp.
    pub saturated: bool,
}

/// A composition of MAF layers with a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Flow {
    dim: usize,
    hidden: usize,
    layers: Vec<MafLayer>,
    params: Vec<f64>,
}

impl Flow {
    /// Build with the default architecture of the study: 3 layers, 4
    /// hidden features.
    pub fn standard(dim: usize, rng: &mut Rng) -> Self {
        Self::new(dim, 3, 4, rng)
    }

    /// Hidden weights and biases are drawn from the uniform fan-in scheme
    /// U(-1/√D, 1/√D); output heads start at zero, so the flow is the
    /// identity transform (modulo permutations) at initialization.
    pub fn new(dim: usize, n_layers: usize, hidden: usize, rng: &mut Rng) -> Self {
        assert!(dim >= 2);
        assert!(n_layers >= 1);
        let block = MadeNet::param_len(dim, hidden);
        let mut params = vec![0.0; block * n_layers];
        let mut layers = Vec::with_capacity(n_layers);
        let bound = 1.0 / (dim as f64).sqrt();
        for l in 0..n_layers {
            let net = MadeNet::new(dim, hidden, l * block);
            for idx in net.w1_offset()..net.w_mu_offset() {
                params[idx] = (2.0 * rng.uniform() - 1.0) * bound;
            }
            net.zero_masked(&mut params);
            layers.push(MafLayer { net });
        }
        Self {
            dim,
            hidden,
            layers,
            params,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[MafLayer] {
        &self.layers
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::LayoutMismatch(format!(
                "expected {} parameters, got {}",
                self.params.len(),
                params.len()
            )));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    /// Data → latent, with the exact log|det J|.
    pub fn forward(&self, x: &[f64]) -> FlowOutput {
        assert_eq!(x.len(), self.dim);
        let d = self.dim;
        let mut cur = x.to_vec();
        let mut mu = vec![0.0; d];
        let mut alpha = vec![0.0; d];
        let mut log_det = 0.0;
        let mut saturated = false;
        for layer in &self.layers {
            cur.reverse();
            layer.net.forward(&self.params, &cur, &mut mu, &mut alpha, None);
            for i in 0..d {
                let a = alpha[i].clamp(-ALPHA_CLAMP, ALPHA_CLAMP);
                if a != alpha[i] {
                    saturated = true;
                }
                cur[i] = (cur[i] - mu[i]) * (-a).exp();
                log_det -= a;
            }
        }
        FlowOutput {
            z: cur,
            log_det,
            saturated,
        }
    }

    /// Latent → data; the exact algebraic inverse of [`Flow::forward`].
    pub fn inverse(&self, z: &[f64]) -> FlowOutput {
        assert_eq!(z.len(), self.dim);
        let d = self.dim;
        let mut cur = z.to_vec();
        let mut mu = vec![0.0; d];
        let mut alpha = vec![0.0; d];
        let mut y = vec![0.0; d];
        let mut log_det = 0.0;
        let mut saturated = false;
        for layer in self.layers.iter().rev() {
            y.fill(0.0);
            // coordinates resolve in autoregressive order: head i only
            // reads y_{<i}, which is already final
            for i in 0..d {
                layer.net.forward(&self.params, &y, &mut mu, &mut alpha, None);
                let a = alpha[i].clamp(-ALPHA_CLAMP, ALPHA_CLAMP);
                if a != alpha[i] {
                    saturated = true;
                }
                y[i] = cur[i] * a.exp() + mu[i];
                log_det += a;
            }
            y.reverse();
            std::mem::swap(&mut cur, &mut y);
        }
        FlowOutput {
            z: cur,
            log_det,
            saturated,
        }
    }

    /// ln p_θ(x) = ln p_z(T(x)) + ln|det J_T(x)|, with diagnostics.
    pub fn model_log_pdf_flagged(&self, base: &CopulaBase, x: &[f64]) -> (f64, bool, bool) {
        let out = self.forward(x);
        let (lp, clamped) = base.log_pdf_flagged(&out.z);
        (lp + out.log_det, out.saturated, clamped)
    }

    pub fn model_log_pdf(&self, base: &CopulaBase, x: &[f64]) -> f64 {
        self.model_log_pdf_flagged(base, x).0
    }

    /// Forward pass that records every per-layer activation needed by the
    /// reverse-mode adjoint. Returns (final z view, log_det, saturated).
    pub fn forward_cached<'c>(
        &self,
        x: &[f64],
        cache: &'c mut FlowCache,
    ) -> (&'c [f64], f64, bool) {
        assert_eq!(x.len(), self.dim);
        debug_assert_eq!(cache.layers.len(), self.layers.len());
        let d = self.dim;
        let mut log_det = 0.0;
        let mut saturated = false;
        for (l, layer) in self.layers.iter().enumerate() {
            // y_l = reverse(previous z)
            let (head, tail) = cache.layers.split_at_mut(l);
            let lc = &mut tail[0];
            lc.y.clear();
            let prev: &[f64] = if l == 0 { x } else { &head[l - 1].z };
            lc.y.extend(prev.iter().rev());
            layer.net.forward(
                &self.params,
                &lc.y,
                &mut lc.mu,
                &mut lc.alpha_raw,
                Some(&mut lc.made),
            );
            lc.z.clear();
            for i in 0..d {
                let a = lc.alpha_raw[i].clamp(-ALPHA_CLAMP, ALPHA_CLAMP);
                if a != lc.alpha_raw[i] {
                    saturated = true;
                }
                lc.alpha_clamped[i] = a;
                lc.z.push((lc.y[i] - lc.mu[i]) * (-a).exp());
                log_det -= a;
            }
        }
        (&cache.layers.last().unwrap().z, log_det, saturated)
    }

    /// Adjoint of the cached forward pass for one sample of the NLL.
    ///
    /// `gz` must hold ∂f/∂z at the final layer output, already scaled by
    /// the sample weight; `weight` scales the direct log-determinant
    /// terms (∂f/∂α_i += weight from f = ... + Σ α_i). Parameter
    /// gradients accumulate into `grad`.
    pub fn backward_nll(&self, cache: &mut FlowCache, gz: &[f64], weight: f64, grad: &mut [f64]) {
        let d = self.dim;
        debug_assert_eq!(gz.len(), d);
        cache.gz.clear();
        cache.gz.extend_from_slice(gz);
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let lc = &cache.layers[l];
            for i in 0..d {
                let gzi = cache.gz[i];
                let sat = lc.alpha_clamped[i] != lc.alpha_raw[i];
                let e = (-lc.alpha_clamped[i]).exp();
                cache.g_alpha[i] = if sat { 0.0 } else { weight - lc.z[i] * gzi };
                cache.g_mu[i] = -gzi * e;
                cache.gy_direct[i] = gzi * e;
            }
            layer.net.backward(
                &self.params,
                &lc.y,
                &lc.made,
                &cache.g_mu,
                &cache.g_alpha,
                grad,
                &mut cache.gy,
            );
            for i in 0..d {
                cache.gy[i] += cache.gy_direct[i];
            }
            // transpose of the reverse permutation is the reversal itself
            cache.gz.clear();
            cache.gz.extend(cache.gy.iter().rev());
        }
    }
}

/// Reusable per-sample activation storage for training.
#[derive(Debug, Clone)]
pub struct FlowCache {
    layers: Vec<LayerCache>,
    gz: Vec<f64>,
    gy: Vec<f64>,
    gy_direct: Vec<f64>,
    g_mu: Vec<f64>,
    g_alpha: Vec<f64>,
}

#[derive(Debug, Clone)]
struct LayerCache {
    y: Vec<f64>,
    mu: Vec<f64>,
    alpha_raw: Vec<f64>,
    alpha_clamped: Vec<f64>,
    z: Vec<f64>,
    made: MadeCache,
}

impl FlowCache {
    pub fn for_flow(flow: &Flow) -> Self {
        let d = flow.dim();
        let layer = LayerCache {
            y: Vec::with_capacity(d),
            mu: vec![0.0; d],
            alpha_raw: vec![0.0; d],
            alpha_clamped: vec![0.0; d],
            z: Vec::with_capacity(d),
            made: MadeCache::default(),
        };
        Self {
            layers: vec![layer; flow.n_layers()],
            gz: Vec::with_capacity(d),
            gy: vec![0.0; d],
            gy_direct: vec![0.0; d],
            g_mu: vec![0.0; d],
            g_alpha: vec![0.0; d],
        }
    }
}
