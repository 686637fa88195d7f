//! Forward and backward kernels for each layer kind.

use super::seq::Seq;
use super::spec::ActivationFn;

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `out[r] += sum_c m[r][c] * v[c]` for a `rows x cols` matrix.
#[inline]
fn matvec_add(m: &[f64], cols: usize, v: &[f64], out: &mut [f64]) {
    for (r, o) in out.iter_mut().enumerate() {
        let row = &m[r * cols..(r + 1) * cols];
        let mut acc = 0.0;
        for (a, b) in row.iter().zip(v) {
            acc += a * b;
        }
        *o += acc;
    }
}

/// `out[c] += sum_r m[r][c] * v[r]`.
#[inline]
fn matvec_t_add(m: &[f64], cols: usize, v: &[f64], out: &mut [f64]) {
    for (r, &vr) in v.iter().enumerate() {
        if vr == 0.0 {
            continue;
        }
        let row = &m[r * cols..(r + 1) * cols];
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * vr;
        }
    }
}

/// `g[r][c] += a[r] * b[c]`.
#[inline]
fn outer_add(g: &mut [f64], a: &[f64], b: &[f64]) {
    let cols = b.len();
    for (r, &ar) in a.iter().enumerate() {
        if ar == 0.0 {
            continue;
        }
        let row = &mut g[r * cols..(r + 1) * cols];
        for (o, bc) in row.iter_mut().zip(b) {
            *o += ar * bc;
        }
    }
}

// ---- dense ----

pub(crate) fn dense_forward(x: &Seq, w: &[f64], b: &[f64]) -> Seq {
    let mut y = b.to_vec();
    matvec_add(w, x.data.len(), &x.data, &mut y);
    Seq::row_vector(y)
}

pub(crate) fn dense_backward(x: &Seq, w: &[f64], dy: &Seq, dw: &mut [f64], db: &mut [f64]) -> Seq {
    let n_in = x.data.len();
    outer_add(dw, &dy.data, &x.data);
    for (g, d) in db.iter_mut().zip(&dy.data) {
        *g += d;
    }
    let mut dx = vec![0.0; n_in];
    matvec_t_add(w, n_in, &dy.data, &mut dx);
    Seq::from_vec(x.steps, x.features, dx)
}

// ---- lstm ----

/// Gate order i, f, g, o. `w` is `4u x f`, `u` is `4u x u`.
pub(crate) struct LstmParams<'a> {
    pub w: &'a [f64],
    pub u: &'a [f64],
    pub b: &'a [f64],
    pub units: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct LstmCache {
    /// Activated gates per step, `t x 4u`.
    gates: Vec<f64>,
    /// Cell states per step, `t x u`.
    cells: Vec<f64>,
    /// Hidden states per step, `t x u`.
    pub hidden: Seq,
}

pub(crate) fn lstm_forward(x: &Seq, p: &LstmParams) -> LstmCache {
    let u = p.units;
    let f = x.features;
    let t_len = x.steps;
    let mut gates = vec![0.0; t_len * 4 * u];
    let mut cells = vec![0.0; t_len * u];
    let mut hidden = Seq::zeros(t_len, u);
    let mut h_prev = vec![0.0; u];
    let mut c_prev = vec![0.0; u];
    let mut z = vec![0.0; 4 * u];
    for t in 0..t_len {
        z.copy_from_slice(p.b);
        matvec_add(p.w, f, x.row(t), &mut z);
        matvec_add(p.u, u, &h_prev, &mut z);
        let g = &mut gates[t * 4 * u..(t + 1) * 4 * u];
        for k in 0..u {
            let i_g = sigmoid(z[k]);
            let f_g = sigmoid(z[u + k]);
            let g_g = z[2 * u + k].tanh();
            let o_g = sigmoid(z[3 * u + k]);
            g[k] = i_g;
            g[u + k] = f_g;
            g[2 * u + k] = g_g;
            g[3 * u + k] = o_g;
            let c = f_g * c_prev[k] + i_g * g_g;
            cells[t * u + k] = c;
            hidden.data[t * u + k] = o_g * c.tanh();
        }
        c_prev.copy_from_slice(&cells[t * u..(t + 1) * u]);
        h_prev.copy_from_slice(hidden.row(t));
    }
    LstmCache { gates, cells, hidden }
}

/// Backpropagation through time. `dh` is the loss gradient w.r.t. every
/// hidden state (`t x u`).
pub(crate) fn lstm_backward(
    x: &Seq,
    p: &LstmParams,
    cache: &LstmCache,
    dh: &Seq,
    dw: &mut [f64],
    du: &mut [f64],
    db: &mut [f64],
) -> Seq {
    let u = p.units;
    let f = x.features;
    let mut dx = Seq::zeros(x.steps, f);
    let mut dh_next = vec![0.0; u];
    let mut dc_next = vec![0.0; u];
    let mut dz = vec![0.0; 4 * u];
    let zeros = vec![0.0; u];
    for t in (0..x.steps).rev() {
        let g = &cache.gates[t * 4 * u..(t + 1) * 4 * u];
        let c = &cache.cells[t * u..(t + 1) * u];
        let c_prev = if t > 0 { &cache.cells[(t - 1) * u..t * u] } else { &zeros[..] };
        let h_prev = if t > 0 { cache.hidden.row(t - 1) } else { &zeros[..] };
        for k in 0..u {
            let (i_g, f_g, g_g, o_g) = (g[k], g[u + k], g[2 * u + k], g[3 * u + k]);
            let tc = c[k].tanh();
            let dh_k = dh.data[t * u + k] + dh_next[k];
            let d_o = dh_k * tc;
            let dc = dh_k * o_g * (1.0 - tc * tc) + dc_next[k];
            dz[k] = dc * g_g * i_g * (1.0 - i_g);
            dz[u + k] = dc * c_prev[k] * f_g * (1.0 - f_g);
            dz[2 * u + k] = dc * i_g * (1.0 - g_g * g_g);
            dz[3 * u + k] = d_o * o_g * (1.0 - o_g);
            dc_next[k] = dc * f_g;
        }
        outer_add(dw, &dz, x.row(t));
        outer_add(du, &dz, h_prev);
        for (gb, d) in db.iter_mut().zip(&dz) {
            *gb += d;
        }
        matvec_t_add(p.w, f, &dz, dx.row_mut(t));
        dh_next.iter_mut().for_each(|v| *v = 0.0);
        matvec_t_add(p.u, u, &dz, &mut dh_next);
    }
    dx
}

// ---- conv1d ----

/// `w` is `filters x kernel x features`; left padding `(kernel - 1) / 2`.
pub(crate) fn conv_forward(x: &Seq, w: &[f64], b: &[f64], kernel: usize) -> Seq {
    let filters = b.len();
    let f = x.features;
    let left = (kernel - 1) / 2;
    let mut y = Seq::zeros(x.steps, filters);
    for t in 0..x.steps {
        for c in 0..filters {
            let mut acc = b[c];
            for k in 0..kernel {
                let src = t + k;
                if src < left || src - left >= x.steps {
                    continue;
                }
                let xr = x.row(src - left);
                let wr = &w[(c * kernel + k) * f..(c * kernel + k + 1) * f];
                acc += wr.iter().zip(xr).map(|(a, b)| a * b).sum::<f64>();
            }
            y.data[t * filters + c] = acc;
        }
    }
    y
}

pub(crate) fn conv_backward(
    x: &Seq,
    w: &[f64],
    kernel: usize,
    dy: &Seq,
    dw: &mut [f64],
    db: &mut [f64],
) -> Seq {
    let filters = db.len();
    let f = x.features;
    let left = (kernel - 1) / 2;
    let mut dx = Seq::zeros(x.steps, f);
    for t in 0..x.steps {
        for c in 0..filters {
            let d = dy.data[t * filters + c];
            db[c] += d;
            if d == 0.0 {
                continue;
            }
            for k in 0..kernel {
                let src = t + k;
                if src < left || src - left >= x.steps {
                    continue;
                }
                let s = src - left;
                let off = (c * kernel + k) * f;
                for j in 0..f {
                    dw[off + j] += d * x.data[s * f + j];
                    dx.data[s * f + j] += d * w[off + j];
                }
            }
        }
    }
    dx
}

// ---- attention ----

#[derive(Debug, Clone)]
pub(crate) struct AttentionCache {
    pub encoder: LstmCache,
    pub alignment: LstmCache,
    /// Attention weights, `t x t`; row = query.
    pub weights: Vec<f64>,
}

pub(crate) fn attention_forward(x: &Seq, enc: &LstmParams, align: &LstmParams) -> (Seq, AttentionCache) {
    let encoder = lstm_forward(x, enc);
    let alignment = lstm_forward(&encoder.hidden, align);
    let h = &encoder.hidden;
    let q = &alignment.hidden;
    let n = x.steps;
    let u = enc.units;
    let mut weights = vec![0.0; n * n];
    let mut ctx = Seq::zeros(n, u);
    for i in 0..n {
        let row = &mut weights[i * n..(i + 1) * n];
        for (j, e) in row.iter_mut().enumerate() {
            *e = q.row(i).iter().zip(h.row(j)).map(|(a, b)| a * b).sum();
        }
        softmax_in_place(row);
        debug_assert!(
            (row.iter().sum::<f64>() - 1.0).abs() < 1e-9 && row.iter().all(|&a| a >= 0.0),
            "attention weights must form a distribution"
        );
        let c = ctx.row_mut(i);
        for (j, &a) in row.iter().enumerate() {
            for (cv, hv) in c.iter_mut().zip(h.row(j)) {
                *cv += a * hv;
            }
        }
    }
    (
        ctx,
        AttentionCache {
            encoder,
            alignment,
            weights,
        },
    )
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn attention_backward(
    x: &Seq,
    enc: &LstmParams,
    align: &LstmParams,
    cache: &AttentionCache,
    dctx: &Seq,
    enc_grads: [&mut [f64]; 3],
    align_grads: [&mut [f64]; 3],
) -> Seq {
    let n = x.steps;
    let u = enc.units;
    let h = &cache.encoder.hidden;
    let q = &cache.alignment.hidden;
    let a = &cache.weights;
    let mut dh = Seq::zeros(n, u);
    let mut dq = Seq::zeros(n, u);
    let mut da = vec![0.0; n];
    for i in 0..n {
        let arow = &a[i * n..(i + 1) * n];
        let dc = dctx.row(i);
        for j in 0..n {
            da[j] = dc.iter().zip(h.row(j)).map(|(p, q)| p * q).sum();
            // context = A H
            for (d, c) in dh.row_mut(j).iter_mut().zip(dc) {
                *d += arow[j] * c;
            }
        }
        let dot: f64 = arow.iter().zip(&da).map(|(p, q)| p * q).sum();
        for j in 0..n {
            let ds = arow[j] * (da[j] - dot);
            if ds == 0.0 {
                continue;
            }
            // scores = Q H^T
            for k in 0..u {
                dq.data[i * u + k] += ds * h.data[j * u + k];
                dh.data[j * u + k] += ds * q.data[i * u + k];
            }
        }
    }
    let [aw, au, ab] = align_grads;
    let dh_from_align = lstm_backward(h, align, &cache.alignment, &dq, aw, au, ab);
    dh.add_assign(&dh_from_align);
    let [ew, eu, eb] = enc_grads;
    lstm_backward(x, enc, &cache.encoder, &dh, ew, eu, eb)
}

// ---- activation ----

pub(crate) fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for e in v.iter_mut() {
        *e = (*e - max).exp();
        sum += *e;
    }
    for e in v.iter_mut() {
        *e /= sum;
    }
}

pub(crate) fn activation_forward(x: &Seq, func: ActivationFn) -> Seq {
    let mut y = x.clone();
    match func {
        ActivationFn::Linear => {}
        ActivationFn::Tanh => y.data.iter_mut().for_each(|v| *v = v.tanh()),
        ActivationFn::Softmax => {
            for t in 0..y.steps {
                softmax_in_place(y.row_mut(t));
            }
        }
    }
    y
}

pub(crate) fn activation_backward(y: &Seq, dy: &Seq, func: ActivationFn) -> Seq {
    match func {
        ActivationFn::Linear => dy.clone(),
        ActivationFn::Tanh => Seq::from_vec(
            y.steps,
            y.features,
            y.data.iter().zip(&dy.data).map(|(v, d)| d * (1.0 - v * v)).collect(),
        ),
        ActivationFn::Softmax => {
            let mut dx = Seq::zeros(y.steps, y.features);
            for t in 0..y.steps {
                let yr = y.row(t);
                let dr = dy.row(t);
                let dot: f64 = yr.iter().zip(dr).map(|(a, b)| a * b).sum();
                for (o, (a, b)) in dx.row_mut(t).iter_mut().zip(yr.iter().zip(dr)) {
                    *o = a * (b - dot);
                }
            }
            dx
        }
    }
}

// ---- concat ----

pub(crate) fn concat_forward(parts: &[&Seq]) -> Seq {
    let steps = parts[0].steps;
    let features: usize = parts.iter().map(|p| p.features).sum();
    let mut y = Seq::zeros(steps, features);
    for t in 0..steps {
        let mut off = 0;
        let row = y.row_mut(t);
        for p in parts {
            row[off..off + p.features].copy_from_slice(p.row(t));
            off += p.features;
        }
    }
    y
}

pub(crate) fn concat_backward(widths: &[usize], dy: &Seq) -> Vec<Seq> {
    let mut off = 0;
    widths
        .iter()
        .map(|&w| {
            let mut d = Seq::zeros(dy.steps, w);
            for t in 0..dy.steps {
                d.row_mut(t).copy_from_slice(&dy.row(t)[off..off + w]);
            }
            off += w;
            d
        })
        .collect()
}
