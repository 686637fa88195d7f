use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::network::{mse_loss, Grads, Network, Param};
use super::seq::Seq;
use crate::error::{Error, Result};

/// Input windows with their target vectors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Examples {
    pub inputs: Vec<Seq>,
    pub targets: Vec<Vec<f64>>,
}

impl Examples {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn push(&mut self, input: Seq, target: Vec<f64>) {
        self.inputs.push(input);
        self.targets.push(target);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 15,
            batch_size: 32,
            adam: AdamConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_loss: Vec<f64>,
    pub validation_loss: Vec<f64>,
    /// Zero-based epoch with the lowest validation loss.
    pub best_epoch: usize,
    pub best_validation_loss: f64,
    /// Parameters after `best_epoch`; restored into the network on return.
    #[serde(skip)]
    pub checkpoint: Vec<Param>,
}

/// Mean per-example MSE.
pub fn evaluate_loss(net: &Network, data: &Examples) -> Result<f64> {
    let losses: Vec<f64> = data
        .inputs
        .par_iter()
        .zip(&data.targets)
        .map(|(x, y)| Ok(mse_loss(&net.predict(x)?, y).0))
        .collect::<Result<_>>()?;
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}

/// Batch loss and gradient averaged over the batch. Examples are processed
/// in parallel and reduced in index order, so the result does not depend on
/// the thread count.
pub fn batch_gradient(net: &Network, inputs: &[Seq], targets: &[Vec<f64>]) -> Result<(f64, Grads)> {
    let parts: Vec<(f64, Grads)> = inputs
        .par_iter()
        .zip(targets)
        .map(|(x, y)| {
            let cache = net.forward(x)?;
            let (loss, d) = mse_loss(&cache.output().data, y);
            Ok((loss, net.backward(&cache, &d)?))
        })
        .collect::<Result<_>>()?;
    let mut total = Grads::zeros_like(net.params());
    let mut loss = 0.0;
    for (l, g) in &parts {
        loss += l;
        total.add_assign(g);
    }
    let k = 1.0 / parts.len() as f64;
    total.scale(k);
    Ok((loss * k, total))
}

/// Chronological mini-batch ADAM on MSE with best-validation checkpointing.
pub fn train(net: &mut Network, train_set: &Examples, validation: &Examples, config: &TrainConfig) -> Result<TrainReport> {
    if train_set.is_empty() || validation.is_empty() {
        return Err(Error::invalid("training and validation sets must be non-empty"));
    }
    if config.epochs == 0 || config.batch_size == 0 {
        return Err(Error::Config("epochs and batch size must be positive".into()));
    }
    let mut adam = AdamState::new(net, config.adam.clone());
    let mut report = TrainReport {
        train_loss: Vec::with_capacity(config.epochs),
        validation_loss: Vec::with_capacity(config.epochs),
        best_epoch: 0,
        best_validation_loss: f64::INFINITY,
        checkpoint: net.params().to_vec(),
    };
    for epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        for (batch, start) in (0..train_set.len()).step_by(config.batch_size).enumerate() {
            let end = (start + config.batch_size).min(train_set.len());
            let (loss, grads) = batch_gradient(net, &train_set.inputs[start..end], &train_set.targets[start..end])?;
            if !loss.is_finite() || !grads.max_abs().is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch });
            }
            epoch_loss += loss * (end - start) as f64;
            adam_step(net, &grads, &mut adam)?;
        }
        let val = evaluate_loss(net, validation)?;
        if !val.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                batch: usize::MAX,
            });
        }
        report.train_loss.push(epoch_loss / train_set.len() as f64);
        report.validation_loss.push(val);
        log::debug!("epoch {epoch}: train {:.6} validation {val:.6}", report.train_loss[epoch]);
        if val < report.best_validation_loss {
            report.best_validation_loss = val;
            report.best_epoch = epoch;
            report.checkpoint = net.params().to_vec();
        }
    }
    net.set_params(report.checkpoint.clone())?;
    Ok(report)
}
