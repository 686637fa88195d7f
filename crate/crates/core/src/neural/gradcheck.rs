use super::network::{mse_loss, Grads, Network};
use super::seq::Seq;
use crate::error::Result;

pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_relative_error: f64,
    pub worst_param: String,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

impl GradCheck {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_relative_error < tolerance
    }
}

pub fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

/// Compare analytic MSE gradients against central finite differences.
pub fn gradient_check(net: &Network, x: &Seq, target: &[f64]) -> Result<GradCheck> {
    let cache = net.forward(x)?;
    let (_, d) = mse_loss(&cache.output().data, target);
    let analytic = net.backward(&cache, &d)?;
    compare_gradients(net, x, target, &analytic)
}

/// Finite-difference comparison against a caller-supplied gradient.
pub fn compare_gradients(net: &Network, x: &Seq, target: &[f64], analytic: &Grads) -> Result<GradCheck> {
    let mut probe = net.clone();
    let mut worst = GradCheck {
        max_relative_error: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
    };
    for k in 0..net.params().len() {
        for i in 0..net.params()[k].value.len() {
            let orig = net.params()[k].value[i];
            probe.update_params(|p| p[k].value[i] = orig + FD_STEP);
            let up = mse_loss(&probe.predict(x)?, target).0;
            probe.update_params(|p| p[k].value[i] = orig - FD_STEP);
            let down = mse_loss(&probe.predict(x)?, target).0;
            probe.update_params(|p| p[k].value[i] = orig);
            let numeric = (up - down) / (2.0 * FD_STEP);
            let a = analytic.0[k][i];
            let err = relative_error(a, numeric);
            if err > worst.max_relative_error || worst.worst_param.is_empty() {
                worst = GradCheck {
                    max_relative_error: err,
                    worst_param: net.params()[k].name.clone(),
                    worst_index: i,
                    analytic: a,
                    numeric,
                };
            }
        }
    }
    Ok(worst)
}
