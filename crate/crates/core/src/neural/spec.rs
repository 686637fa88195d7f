use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationFn {
    Tanh,
    Linear,
    /// Per-row softmax over features.
    Softmax,
}

impl fmt::Display for ActivationFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActivationFn::Tanh => "tanh",
            ActivationFn::Linear => "linear",
            ActivationFn::Softmax => "softmax",
        })
    }
}

impl FromStr for ActivationFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(ActivationFn::Tanh),
            "linear" => Ok(ActivationFn::Linear),
            "softmax" => Ok(ActivationFn::Softmax),
            _ => Err(Error::Config(format!("unknown activation {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LayerKind {
    /// Flattens its `steps x features` input, output `1 x units`.
    Dense { units: usize },
    Lstm { units: usize, return_sequences: bool },
    /// Stride 1, zero "same" padding.
    Conv1d { filters: usize, kernel: usize },
    /// Encoder LSTM, alignment LSTM over the encoder states, dot-product
    /// attention with keys = values = encoder states. Output `steps x units`.
    AttentionHead { units: usize },
    /// Feature-wise concatenation of inputs with equal step counts.
    Concat,
    Activation { function: ActivationFn },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRef {
    Input,
    Layer(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: LayerKind,
    pub inputs: Vec<NodeRef>,
}

/// Layers in topological order; the last layer is the output and must
/// produce `1 x output_len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_vars: usize,
    pub input_len: usize,
    pub output_len: usize,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn new(input_vars: usize, input_len: usize, output_len: usize) -> Self {
        NetworkSpec {
            input_vars,
            input_len,
            output_len,
            layers: Vec::new(),
        }
    }

    /// Append a layer and return a reference to it.
    pub fn push(&mut self, name: impl Into<String>, kind: LayerKind, inputs: Vec<NodeRef>) -> NodeRef {
        self.layers.push(LayerSpec {
            name: name.into(),
            kind,
            inputs,
        });
        NodeRef::Layer(self.layers.len() - 1)
    }

    /// Output shape of every layer, or the first composition error.
    pub fn validate(&self) -> Result<Vec<(usize, usize)>> {
        let shape_err = |layer: &str, message: String| Error::Shape {
            layer: layer.to_string(),
            message,
        };
        if self.input_vars == 0 || self.input_len == 0 || self.output_len == 0 {
            return Err(shape_err("input", "input and output sizes must be positive".into()));
        }
        if self.layers.is_empty() {
            return Err(shape_err("output", "network has no layers".into()));
        }
        let mut shapes: Vec<(usize, usize)> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let name = layer.name.as_str();
            let mut ins = Vec::with_capacity(layer.inputs.len());
            for r in &layer.inputs {
                ins.push(match *r {
                    NodeRef::Input => (self.input_len, self.input_vars),
                    NodeRef::Layer(j) if j < i => shapes[j],
                    NodeRef::Layer(j) => {
                        return Err(shape_err(name, format!("input refers to layer {j}, which is not earlier")))
                    }
                });
            }
            let single = || -> Result<(usize, usize)> {
                match ins.as_slice() {
                    [s] => Ok(*s),
                    _ => Err(shape_err(name, format!("expects one input, got {}", ins.len()))),
                }
            };
            let positive = |v: usize, what: &str| -> Result<()> {
                if v == 0 {
                    Err(shape_err(name, format!("{what} must be positive")))
                } else {
                    Ok(())
                }
            };
            let out = match &layer.kind {
                LayerKind::Dense { units } => {
                    positive(*units, "units")?;
                    single()?;
                    (1, *units)
                }
                LayerKind::Lstm {
                    units,
                    return_sequences,
                } => {
                    positive(*units, "units")?;
                    let (t, _) = single()?;
                    (if *return_sequences { t } else { 1 }, *units)
                }
                LayerKind::Conv1d { filters, kernel } => {
                    positive(*filters, "filters")?;
                    positive(*kernel, "kernel")?;
                    let (t, _) = single()?;
                    (t, *filters)
                }
                LayerKind::AttentionHead { units } => {
                    positive(*units, "units")?;
                    let (t, _) = single()?;
                    (t, *units)
                }
                LayerKind::Concat => {
                    if ins.is_empty() {
                        return Err(shape_err(name, "concat needs at least one input".into()));
                    }
                    let t = ins[0].0;
                    if let Some(bad) = ins.iter().find(|s| s.0 != t) {
                        return Err(shape_err(
                            name,
                            format!("cannot concatenate {} steps with {} steps", t, bad.0),
                        ));
                    }
                    (t, ins.iter().map(|s| s.1).sum())
                }
                LayerKind::Activation { .. } => single()?,
            };
            shapes.push(out);
        }
        let last = *shapes.last().unwrap();
        if last != (1, self.output_len) {
            return Err(shape_err(
                &self.layers.last().unwrap().name,
                format!(
                    "network output is {}x{}, expected 1x{}",
                    last.0, last.1, self.output_len
                ),
            ));
        }
        Ok(shapes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_compose() {
        let mut s = NetworkSpec::new(3, 10, 2);
        let c = s.push("conv", LayerKind::Conv1d { filters: 4, kernel: 3 }, vec![NodeRef::Input]);
        let a = s.push("att", LayerKind::AttentionHead { units: 5 }, vec![NodeRef::Input]);
        let cat = s.push("cat", LayerKind::Concat, vec![c, a]);
        s.push("out", LayerKind::Dense { units: 2 }, vec![cat]);
        assert_eq!(s.validate().unwrap(), vec![(10, 4), (10, 5), (10, 9), (1, 2)]);
    }

    #[test]
    fn errors_name_the_layer() {
        let mut s = NetworkSpec::new(1, 10, 1);
        let l = s.push("enc", LayerKind::Lstm { units: 4, return_sequences: false }, vec![NodeRef::Input]);
        s.push("cat", LayerKind::Concat, vec![l, NodeRef::Input]);
        match s.validate() {
            Err(Error::Shape { layer, .. }) => assert_eq!(layer, "cat"),
            other => panic!("{other:?}"),
        }

        let mut s = NetworkSpec::new(1, 10, 3);
        s.push("head", LayerKind::Dense { units: 2 }, vec![NodeRef::Input]);
        assert!(matches!(s.validate(), Err(Error::Shape { layer, .. }) if layer == "head"));

        let mut s = NetworkSpec::new(1, 10, 1);
        s.push("loop", LayerKind::Dense { units: 1 }, vec![NodeRef::Layer(0)]);
        assert!(s.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut s = NetworkSpec::new(2, 4, 1);
        let a = s.push("act", LayerKind::Activation { function: ActivationFn::Tanh }, vec![NodeRef::Input]);
        s.push("out", LayerKind::Dense { units: 1 }, vec![a]);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<NetworkSpec>(&text).unwrap(), s);
    }
}
