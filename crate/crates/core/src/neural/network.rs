use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::layers::*;
use super::seq::Seq;
use super::spec::{LayerKind, NetworkSpec, NodeRef};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub shape: Vec<usize>,
    pub value: Vec<f64>,
}

impl Param {
    fn new(name: String, shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Param {
            name,
            shape,
            value: vec![0.0; len],
        }
    }
}

/// Gradients aligned with [`Network::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grads(pub Vec<Vec<f64>>);

impl Grads {
    pub fn zeros_like(params: &[Param]) -> Self {
        Grads(params.iter().map(|p| vec![0.0; p.value.len()]).collect())
    }

    pub fn add_assign(&mut self, other: &Grads) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, k: f64) {
        self.0.iter_mut().flatten().for_each(|v| *v *= k);
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone)]
enum NodeCache {
    None,
    Lstm(LstmCache),
    Attention(AttentionCache),
}

/// Intermediates of one forward pass, tied to the parameter version it was
/// computed with.
#[derive(Debug, Clone)]
pub struct Cache {
    version: u64,
    input: Seq,
    outputs: Vec<Seq>,
    nodes: Vec<NodeCache>,
}

impl Cache {
    pub fn output(&self) -> &Seq {
        self.outputs.last().unwrap()
    }

    /// Attention weights (`t x t`, row per query) of layer `layer`, if it is
    /// an attention head.
    pub fn attention_weights(&self, layer: usize) -> Option<&[f64]> {
        match &self.nodes[layer] {
            NodeCache::Attention(c) => Some(&c.weights),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Network {
    spec: NetworkSpec,
    shapes: Vec<(usize, usize)>,
    params: Vec<Param>,
    ranges: Vec<Range<usize>>,
    version: u64,
}

fn input_shape(spec: &NetworkSpec, shapes: &[(usize, usize)], r: NodeRef) -> (usize, usize) {
    match r {
        NodeRef::Input => (spec.input_len, spec.input_vars),
        NodeRef::Layer(j) => shapes[j],
    }
}

impl Network {
    /// Validate the spec and initialize parameters uniformly in
    /// `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` (biases zero, LSTM forget bias 1).
    pub fn new(spec: NetworkSpec, seed: u64) -> Result<Self> {
        let shapes = spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::new();
        let mut ranges = Vec::new();
        for layer in &spec.layers {
            let start = params.len();
            let (t_in, f_in) = input_shape(&spec, &shapes, layer.inputs.first().copied().unwrap_or(NodeRef::Input));
            let name = &layer.name;
            match &layer.kind {
                LayerKind::Dense { units } => {
                    let n_in = t_in * f_in;
                    let mut w = Param::new(format!("{name}.kernel"), vec![*units, n_in]);
                    uniform(&mut rng, &mut w.value, n_in);
                    params.push(w);
                    params.push(Param::new(format!("{name}.bias"), vec![*units]));
                }
                LayerKind::Lstm { units, .. } => push_lstm(&mut params, &mut rng, name, f_in, *units),
                LayerKind::Conv1d { filters, kernel } => {
                    let mut w = Param::new(format!("{name}.kernel"), vec![*filters, *kernel, f_in]);
                    uniform(&mut rng, &mut w.value, kernel * f_in);
                    params.push(w);
                    params.push(Param::new(format!("{name}.bias"), vec![*filters]));
                }
                LayerKind::AttentionHead { units } => {
                    push_lstm(&mut params, &mut rng, &format!("{name}.encoder"), f_in, *units);
                    push_lstm(&mut params, &mut rng, &format!("{name}.alignment"), *units, *units);
                }
                LayerKind::Concat | LayerKind::Activation { .. } => {}
            }
            ranges.push(start..params.len());
        }
        Ok(Network {
            spec,
            shapes,
            params,
            ranges,
            version: 0,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn num_parameters(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    /// Incremented on every parameter change; caches from older versions are
    /// rejected by [`Network::backward`].
    pub fn version(&self) -> u64 {
        self.version
    }

    /// Mutate parameters in place; invalidates outstanding caches.
    pub fn update_params<F: FnOnce(&mut [Param])>(&mut self, f: F) {
        f(&mut self.params);
        self.version += 1;
    }

    /// Replace all parameters, checking names and shapes.
    pub fn set_params(&mut self, params: Vec<Param>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::invalid(format!(
                "expected {} parameter tensors, got {}",
                self.params.len(),
                params.len()
            )));
        }
        for (a, b) in self.params.iter().zip(&params) {
            if a.name != b.name || a.shape != b.shape || b.value.len() != a.value.len() {
                return Err(Error::invalid(format!(
                    "parameter {} {:?} does not match {} {:?}",
                    b.name, b.shape, a.name, a.shape
                )));
            }
        }
        self.params = params;
        self.version += 1;
        Ok(())
    }

    fn node_input<'a>(&self, r: NodeRef, x: &'a Seq, outputs: &'a [Seq]) -> &'a Seq {
        match r {
            NodeRef::Input => x,
            NodeRef::Layer(j) => &outputs[j],
        }
    }

    fn lstm_params(&self, first: usize, units: usize) -> LstmParams<'_> {
        LstmParams {
            w: &self.params[first].value,
            u: &self.params[first + 1].value,
            b: &self.params[first + 2].value,
            units,
        }
    }

    pub fn forward(&self, x: &Seq) -> Result<Cache> {
        if x.shape() != (self.spec.input_len, self.spec.input_vars) {
            return Err(Error::Shape {
                layer: "input".into(),
                message: format!(
                    "got {}x{}, expected {}x{}",
                    x.steps, x.features, self.spec.input_len, self.spec.input_vars
                ),
            });
        }
        let mut outputs: Vec<Seq> = Vec::with_capacity(self.spec.layers.len());
        let mut nodes = Vec::with_capacity(self.spec.layers.len());
        for (i, layer) in self.spec.layers.iter().enumerate() {
            let p0 = self.ranges[i].start;
            let (out, cache) = match &layer.kind {
                LayerKind::Concat => {
                    let parts: Vec<&Seq> = layer.inputs.iter().map(|&r| self.node_input(r, x, &outputs)).collect();
                    (concat_forward(&parts), NodeCache::None)
                }
                kind => {
                    let inp = self.node_input(layer.inputs[0], x, &outputs);
                    match kind {
                        LayerKind::Dense { .. } => (
                            dense_forward(inp, &self.params[p0].value, &self.params[p0 + 1].value),
                            NodeCache::None,
                        ),
                        LayerKind::Lstm {
                            units,
                            return_sequences,
                        } => {
                            let c = lstm_forward(inp, &self.lstm_params(p0, *units));
                            let out = if *return_sequences {
                                c.hidden.clone()
                            } else {
                                Seq::row_vector(c.hidden.row(c.hidden.steps - 1).to_vec())
                            };
                            (out, NodeCache::Lstm(c))
                        }
                        LayerKind::Conv1d { kernel, .. } => (
                            conv_forward(inp, &self.params[p0].value, &self.params[p0 + 1].value, *kernel),
                            NodeCache::None,
                        ),
                        LayerKind::AttentionHead { units } => {
                            let (out, c) = attention_forward(
                                inp,
                                &self.lstm_params(p0, *units),
                                &self.lstm_params(p0 + 3, *units),
                            );
                            (out, NodeCache::Attention(c))
                        }
                        LayerKind::Activation { function } => (activation_forward(inp, *function), NodeCache::None),
                        LayerKind::Concat => unreachable!(),
                    }
                }
            };
            debug_assert_eq!(out.shape(), self.shapes[i]);
            outputs.push(out);
            nodes.push(cache);
        }
        Ok(Cache {
            version: self.version,
            input: x.clone(),
            outputs,
            nodes,
        })
    }

    /// Output row only.
    pub fn predict(&self, x: &Seq) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.output().data.clone())
    }

    /// Forward passes over many inputs in parallel; order is preserved.
    pub fn predict_batch(&self, xs: &[Seq]) -> Result<Vec<Vec<f64>>> {
        xs.par_iter().map(|x| self.predict(x)).collect()
    }

    /// Parameter gradients given the loss gradient w.r.t. the output row.
    pub fn backward(&self, cache: &Cache, dout: &[f64]) -> Result<Grads> {
        if cache.version != self.version {
            return Err(Error::StaleCache);
        }
        let n_layers = self.spec.layers.len();
        if dout.len() != self.spec.output_len {
            return Err(Error::Shape {
                layer: self.spec.layers[n_layers - 1].name.clone(),
                message: format!("output gradient has {} values, expected {}", dout.len(), self.spec.output_len),
            });
        }
        let mut grads = Grads::zeros_like(&self.params);
        let mut d: Vec<Option<Seq>> = vec![None; n_layers];
        d[n_layers - 1] = Some(Seq::row_vector(dout.to_vec()));
        let x = &cache.input;
        for i in (0..n_layers).rev() {
            let Some(dy) = d[i].take() else { continue };
            let layer = &self.spec.layers[i];
            let p0 = self.ranges[i].start;
            let mut g = grads.0[self.ranges[i].clone()].iter_mut();
            let dins: Vec<Seq> = match &layer.kind {
                LayerKind::Concat => {
                    let widths: Vec<usize> = layer
                        .inputs
                        .iter()
                        .map(|&r| input_shape(&self.spec, &self.shapes, r).1)
                        .collect();
                    concat_backward(&widths, &dy)
                }
                kind => {
                    let inp = self.node_input(layer.inputs[0], x, &cache.outputs);
                    let dx = match kind {
                        LayerKind::Dense { .. } => {
                            let (dw, db) = (g.next().unwrap(), g.next().unwrap());
                            dense_backward(inp, &self.params[p0].value, &dy, dw, db)
                        }
                        LayerKind::Lstm {
                            units,
                            return_sequences,
                        } => {
                            let NodeCache::Lstm(c) = &cache.nodes[i] else { unreachable!() };
                            let dh = if *return_sequences {
                                dy
                            } else {
                                let mut full = Seq::zeros(inp.steps, *units);
                                full.row_mut(inp.steps - 1).copy_from_slice(&dy.data);
                                full
                            };
                            let (dw, du, db) = (g.next().unwrap(), g.next().unwrap(), g.next().unwrap());
                            lstm_backward(inp, &self.lstm_params(p0, *units), c, &dh, dw, du, db)
                        }
                        LayerKind::Conv1d { kernel, .. } => {
                            let (dw, db) = (g.next().unwrap(), g.next().unwrap());
                            conv_backward(inp, &self.params[p0].value, *kernel, &dy, dw, db)
                        }
                        LayerKind::AttentionHead { units } => {
                            let NodeCache::Attention(c) = &cache.nodes[i] else { unreachable!() };
                            let enc = [g.next().unwrap(), g.next().unwrap(), g.next().unwrap()].map(|v| v.as_mut_slice());
                            let al = [g.next().unwrap(), g.next().unwrap(), g.next().unwrap()].map(|v| v.as_mut_slice());
                            attention_backward(
                                inp,
                                &self.lstm_params(p0, *units),
                                &self.lstm_params(p0 + 3, *units),
                                c,
                                &dy,
                                enc,
                                al,
                            )
                        }
                        LayerKind::Activation { function } => activation_backward(&cache.outputs[i], &dy, *function),
                        LayerKind::Concat => unreachable!(),
                    };
                    vec![dx]
                }
            };
            for (&r, dx) in layer.inputs.iter().zip(dins) {
                if let NodeRef::Layer(j) = r {
                    match &mut d[j] {
                        Some(acc) => acc.add_assign(&dx),
                        slot => *slot = Some(dx),
                    }
                }
            }
        }
        Ok(grads)
    }
}

fn uniform(rng: &mut ChaCha8Rng, v: &mut [f64], fan_in: usize) {
    let a = 1.0 / (fan_in as f64).sqrt();
    for x in v {
        *x = rng.gen_range(-a..=a);
    }
}

fn push_lstm(params: &mut Vec<Param>, rng: &mut ChaCha8Rng, name: &str, f_in: usize, units: usize) {
    let fan_in = f_in + units;
    let mut w = Param::new(format!("{name}.w"), vec![4 * units, f_in]);
    uniform(rng, &mut w.value, fan_in);
    let mut u = Param::new(format!("{name}.u"), vec![4 * units, units]);
    uniform(rng, &mut u.value, fan_in);
    let mut b = Param::new(format!("{name}.b"), vec![4 * units]);
    b.value[units..2 * units].fill(1.0);
    params.push(w);
    params.push(u);
    params.push(b);
}

/// Mean squared error and its gradient w.r.t. `pred`.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let e = p - t;
            loss += e * e;
            2.0 * e / n
        })
        .collect();
    (loss / n, grad)
}
