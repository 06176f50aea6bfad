//! Adam with a linear warmup / linear decay learning-rate schedule.

use super::real::Real;
use super::tensor::TensorMap;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

pub struct Adam<T> {
    cfg: AdamConfig,
    m: TensorMap<T>,
    v: TensorMap<T>,
    t: u64,
}

impl<T: Real> Adam<T> {
    pub fn new(params: &TensorMap<T>, cfg: AdamConfig) -> Adam<T> {
        Adam {
            cfg,
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// One update over every tensor. Gradients are consumed as-is; the
    /// caller handles accumulation scaling.
    pub fn step(&mut self, params: &mut TensorMap<T>, grads: &TensorMap<T>, lr: f64) {
        self.t += 1;
        let b1 = T::from_f64(self.cfg.beta1);
        let b2 = T::from_f64(self.cfg.beta2);
        let one_minus_b1 = T::from_f64(1.0 - self.cfg.beta1);
        let one_minus_b2 = T::from_f64(1.0 - self.cfg.beta2);
        let eps = T::from_f64(self.cfg.eps);
        let bias1 = 1.0 - libm::pow(self.cfg.beta1, self.t as f64);
        let bias2 = 1.0 - libm::pow(self.cfg.beta2, self.t as f64);
        let m_scale = T::from_f64(1.0 / bias1);
        let v_scale = T::from_f64(1.0 / bias2);
        let lr_t = T::from_f64(lr);

        let names: alloc::vec::Vec<alloc::string::String> =
            params.names().map(alloc::string::String::from).collect();
        for name in names {
            let g = grads.get(&name).data();
            let m = self.m.get_mut(&name).data_mut();
            for (mv, &gv) in m.iter_mut().zip(g.iter()) {
                *mv = b1 * *mv + one_minus_b1 * gv;
            }
            let v = self.v.get_mut(&name).data_mut();
            for (vv, &gv) in v.iter_mut().zip(g.iter()) {
                *vv = b2 * *vv + one_minus_b2 * gv * gv;
            }
            let m = self.m.get(&name).data();
            let v = self.v.get(&name).data();
            let p = params.get_mut(&name).data_mut();
            for i in 0..p.len() {
                let m_hat = m[i] * m_scale;
                let v_hat = v[i] * v_scale;
                p[i] -= lr_t * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

/// Linear ramp 0 -> peak over `warmup` steps, then linear decay to 0 at
/// `total` steps. `step` counts completed optimizer steps.
pub fn lr_at(step: u64, warmup: u64, total: u64, peak: f64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    if warmup > 0 && step < warmup {
        return peak * step as f64 / warmup as f64;
    }
    if step >= total {
        return 0.0;
    }
    if total == warmup {
        return peak;
    }
    peak * (total - step) as f64 / (total - warmup) as f64
}
