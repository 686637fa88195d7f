use serde::{Deserialize, Serialize};

use super::network::{Grads, Network};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub step: u64,
}

impl AdamState {
    pub fn new(net: &Network, config: AdamConfig) -> Self {
        let zeros: Vec<Vec<f64>> = net.params().iter().map(|p| vec![0.0; p.value.len()]).collect();
        AdamState {
            config,
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }
}

/// One bias-corrected ADAM update of every parameter.
pub fn adam_step(net: &mut Network, grads: &Grads, state: &mut AdamState) -> Result<()> {
    let shapes_ok = grads.0.len() == state.m.len()
        && grads.0.iter().zip(&state.m).all(|(g, m)| g.len() == m.len())
        && net.params().iter().zip(&state.m).all(|(p, m)| p.value.len() == m.len());
    if !shapes_ok {
        return Err(Error::invalid("gradient, moment and parameter shapes differ"));
    }
    state.step += 1;
    let c = &state.config;
    let t = state.step as i32;
    let bc1 = 1.0 - c.beta1.powi(t);
    let bc2 = 1.0 - c.beta2.powi(t);
    let (m_all, v_all) = (&mut state.m, &mut state.v);
    net.update_params(|params| {
        for (k, p) in params.iter_mut().enumerate() {
            let (m, v, g) = (&mut m_all[k], &mut v_all[k], &grads.0[k]);
            for i in 0..p.value.len() {
                m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
                v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p.value[i] -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
            }
        }
    });
    Ok(())
}
