//! Network constructors for the model catalog.

use super::spec::{ActivationFn, LayerKind, NetworkSpec, NodeRef};

/// Stacked LSTMs (only the last one collapses to its final state) and a
/// linear head.
pub fn lstm_network(vars: usize, input_len: usize, units: &[usize], output_len: usize) -> NetworkSpec {
    let mut s = NetworkSpec::new(vars, input_len, output_len);
    let mut prev = NodeRef::Input;
    for (k, &u) in units.iter().enumerate() {
        prev = s.push(
            format!("lstm{k}"),
            LayerKind::Lstm {
                units: u,
                return_sequences: k + 1 < units.len(),
            },
            vec![prev],
        );
    }
    s.push("head", LayerKind::Dense { units: output_len }, vec![prev]);
    s
}

fn head_bank(s: &mut NetworkSpec, prefix: &str, heads: usize, units: usize, input: NodeRef) -> NodeRef {
    let outs: Vec<NodeRef> = (0..heads)
        .map(|h| s.push(format!("{prefix}.head{h}"), LayerKind::AttentionHead { units }, vec![input]))
        .collect();
    if heads == 1 {
        outs[0]
    } else {
        s.push(format!("{prefix}.concat"), LayerKind::Concat, outs)
    }
}

/// One or two banks of attention heads (every head sees the whole input),
/// concatenated and followed by a linear head.
pub fn attention_network(
    vars: usize,
    input_len: usize,
    heads: usize,
    layers: usize,
    units: usize,
    output_len: usize,
) -> NetworkSpec {
    let mut s = NetworkSpec::new(vars, input_len, output_len);
    let mut prev = NodeRef::Input;
    for l in 0..layers {
        prev = head_bank(&mut s, &format!("att{l}"), heads, units, prev);
    }
    s.push("head", LayerKind::Dense { units: output_len }, vec![prev]);
    s
}

/// Conv1d with tanh, then stacked LSTMs; `heads > 1` replicates the branch
/// per head and concatenates the final states.
pub fn cnn_lstm_network(
    vars: usize,
    input_len: usize,
    filters: usize,
    kernel: usize,
    lstm_units: &[usize],
    heads: usize,
    output_len: usize,
) -> NetworkSpec {
    let mut s = NetworkSpec::new(vars, input_len, output_len);
    let mut branches = Vec::new();
    for h in 0..heads.max(1) {
        let conv = s.push(format!("b{h}.conv"), LayerKind::Conv1d { filters, kernel }, vec![NodeRef::Input]);
        let mut prev = s.push(
            format!("b{h}.tanh"),
            LayerKind::Activation {
                function: ActivationFn::Tanh,
            },
            vec![conv],
        );
        for (k, &u) in lstm_units.iter().enumerate() {
            prev = s.push(
                format!("b{h}.lstm{k}"),
                LayerKind::Lstm {
                    units: u,
                    return_sequences: k + 1 < lstm_units.len(),
                },
                vec![prev],
            );
        }
        branches.push(prev);
    }
    let top = if branches.len() == 1 {
        branches[0]
    } else {
        s.push("concat", LayerKind::Concat, branches)
    };
    s.push("head", LayerKind::Dense { units: output_len }, vec![top]);
    s
}
