//! Forward and backward passes of the BiLSTM encoder and the direction MLP.

use super::linalg::{axpy, sigmoid, softmax2};
use super::params::{ClassifierParams, LstmParams};

/// Vocabulary rows of one sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SentenceInput {
    pub words: Vec<usize>,
    pub pos: Vec<usize>,
}

impl SentenceInput {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Recurrent representation of each token, position order.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderState {
    pub eta: Vec<Vec<f64>>,
}

/// One edge to score. Positions are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Query {
    pub modifier: usize,
    pub head: usize,
    pub relation: usize,
    pub language: usize,
}

impl Query {
    /// Row of the direction table: 1 when the head follows the modifier.
    pub fn direction_row(&self) -> usize {
        usize::from(self.head > self.modifier)
    }
}

struct Step {
    z: Vec<f64>,
    /// Activated gates i, f, g, o.
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// Steps in processing order.
struct Trace {
    steps: Vec<Step>,
    reverse: bool,
}

fn lstm_forward(cell: &LstmParams, xs: &[Vec<f64>], reverse: bool) -> (Vec<Vec<f64>>, Trace) {
    let k = cell.width();
    let n = xs.len();
    let mut hs = vec![Vec::new(); n];
    let mut steps = Vec::with_capacity(n);
    let mut h = vec![0.0; k];
    let mut c = vec![0.0; k];
    let mut a = vec![0.0; 4 * k];
    for s in 0..n {
        let t = if reverse { n - 1 - s } else { s };
        let mut z = xs[t].clone();
        z.extend_from_slice(&h);
        cell.weight.affine(&z, cell.bias.as_slice(), &mut a);
        let mut gates = vec![0.0; 4 * k];
        for j in 0..k {
            gates[j] = sigmoid(a[j]);
            gates[k + j] = sigmoid(a[k + j]);
            gates[2 * k + j] = a[2 * k + j].tanh();
            gates[3 * k + j] = sigmoid(a[3 * k + j]);
        }
        let mut next_c = vec![0.0; k];
        let mut tanh_c = vec![0.0; k];
        for j in 0..k {
            next_c[j] = gates[k + j] * c[j] + gates[j] * gates[2 * k + j];
            tanh_c[j] = next_c[j].tanh();
            h[j] = gates[3 * k + j] * tanh_c[j];
        }
        c.clone_from(&next_c);
        hs[t] = h.clone();
        steps.push(Step { z, gates, c: next_c, tanh_c });
    }
    (hs, Trace { steps, reverse })
}

/// Accumulates parameter gradients and returns input gradients in
/// position order.
fn lstm_backward(cell: &LstmParams, grad: &mut LstmParams, trace: &Trace, dhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = cell.width();
    let input = cell.input_width();
    let n = trace.steps.len();
    let mut dxs = vec![Vec::new(); n];
    let mut dh_rec = vec![0.0; k];
    let mut dc_rec = vec![0.0; k];
    let mut da = vec![0.0; 4 * k];
    let zero = vec![0.0; k];
    for s in (0..n).rev() {
        let t = if trace.reverse { n - 1 - s } else { s };
        let step = &trace.steps[s];
        let c_prev = if s == 0 { &zero } else { &trace.steps[s - 1].c };
        let g = &step.gates;
        for j in 0..k {
            let dh = dhs[t][j] + dh_rec[j];
            let (i, f, cg, o) = (g[j], g[k + j], g[2 * k + j], g[3 * k + j]);
            let tc = step.tanh_c[j];
            let dc = dc_rec[j] + dh * o * (1.0 - tc * tc);
            da[j] = dc * cg * i * (1.0 - i);
            da[k + j] = dc * c_prev[j] * f * (1.0 - f);
            da[2 * k + j] = dc * i * (1.0 - cg * cg);
            da[3 * k + j] = dh * tc * o * (1.0 - o);
            dc_rec[j] = dc * f;
        }
        grad.weight.outer_acc(&da, &step.z);
        axpy(1.0, &da, grad.bias.as_mut_slice());
        let mut dz = vec![0.0; input + k];
        cell.weight.transpose_mul_acc(&da, &mut dz);
        dh_rec.copy_from_slice(&dz[input..]);
        dz.truncate(input);
        dxs[t] = dz;
    }
    dxs
}

struct EncoderTrace {
    /// Per layer: forward and backward traces.
    layers: Vec<(Trace, Trace)>,
}

fn embed(params: &ClassifierParams, input: &SentenceInput) -> Vec<Vec<f64>> {
    input
        .words
        .iter()
        .zip(&input.pos)
        .map(|(&w, &p)| {
            let mut x = params.word.row(w).to_vec();
            if let Some(fixed) = &params.word_fixed {
                axpy(1.0, fixed.row(w), &mut x);
            }
            x.extend_from_slice(params.pos.row(p));
            x
        })
        .collect()
}

fn encode_traced(params: &ClassifierParams, input: &SentenceInput) -> (EncoderState, EncoderTrace) {
    let mut xs = embed(params, input);
    let mut layers = Vec::with_capacity(params.lstm.len());
    for (fwd, bwd) in &params.lstm {
        let (hf, tf) = lstm_forward(fwd, &xs, false);
        let (hb, tb) = lstm_forward(bwd, &xs, true);
        xs = hf
            .into_iter()
            .zip(hb)
            .map(|(mut f, b)| {
                f.extend(b);
                f
            })
            .collect();
        layers.push((tf, tb));
    }
    (EncoderState { eta: xs }, EncoderTrace { layers })
}

/// Run the stacked BiLSTM over a sentence.
pub fn encode(params: &ClassifierParams, input: &SentenceInput) -> EncoderState {
    encode_traced(params, input).0
}

fn encode_backward(
    params: &ClassifierParams,
    grad: &mut ClassifierParams,
    input: &SentenceInput,
    trace: &EncoderTrace,
    mut d_eta: Vec<Vec<f64>>,
) {
    for (layer, (tf, tb)) in trace.layers.iter().enumerate().rev() {
        let k = params.lstm[layer].0.width();
        let d_fwd: Vec<Vec<f64>> = d_eta.iter().map(|d| d[..k].to_vec()).collect();
        let d_bwd: Vec<Vec<f64>> = d_eta.iter().map(|d| d[k..].to_vec()).collect();
        let (gf, gb) = &mut grad.lstm[layer];
        let mut dx = lstm_backward(&params.lstm[layer].0, gf, tf, &d_fwd);
        let dxb = lstm_backward(&params.lstm[layer].1, gb, tb, &d_bwd);
        for (a, b) in dx.iter_mut().zip(&dxb) {
            axpy(1.0, b, a);
        }
        d_eta = dx;
    }
    let dw = params.word.cols();
    for (t, dx) in d_eta.iter().enumerate() {
        axpy(1.0, &dx[..dw], grad.word.row_mut(input.words[t]));
        axpy(1.0, &dx[dw..], grad.pos.row_mut(input.pos[t]));
    }
}

struct ScoreTrace {
    q: Vec<f64>,
    phi: Vec<f64>,
    probs: [f64; 2],
}

fn query_vector(params: &ClassifierParams, state: &EncoderState, query: &Query) -> Vec<f64> {
    let mut q = Vec::with_capacity(params.hidden.cols());
    q.extend_from_slice(&state.eta[query.modifier - 1]);
    q.extend_from_slice(&state.eta[query.head - 1]);
    q.extend_from_slice(params.relation.row(query.relation));
    q.extend_from_slice(params.direction.row(query.direction_row()));
    q.extend_from_slice(params.language.row(query.language));
    q
}

fn score_traced(params: &ClassifierParams, state: &EncoderState, query: &Query) -> (ScoreTrace, Vec<f64>) {
    let q = query_vector(params, state, query);
    let mut pre = vec![0.0; params.hidden.rows()];
    params.hidden.affine(&q, params.hidden_bias.as_slice(), &mut pre);
    let phi: Vec<f64> = pre.iter().map(|&x| x.max(0.0)).collect();
    let mut s = [0.0; 2];
    params.output.affine(&phi, &[0.0, 0.0], &mut s);
    let probs = softmax2(s);
    (ScoreTrace { q, phi, probs }, pre)
}

/// `[p(head before modifier), p(head after modifier)]`.
pub fn score_direction(params: &ClassifierParams, state: &EncoderState, query: &Query) -> [f64; 2] {
    score_traced(params, state, query).0.probs
}

/// A query and its gold class (0: head-left, 1: head-right).
pub type Labeled = (Query, usize);

/// Summed negative log-likelihood of the labeled queries of one sentence.
pub fn sentence_loss(params: &ClassifierParams, input: &SentenceInput, items: &[Labeled]) -> f64 {
    sentence_loss_with_mask(params, input, items).0
}

/// Loss plus the relu activation pattern, used to detect kinks.
pub fn sentence_loss_with_mask(
    params: &ClassifierParams,
    input: &SentenceInput,
    items: &[Labeled],
) -> (f64, Vec<bool>) {
    let state = encode(params, input);
    let mut loss = 0.0;
    let mut mask = Vec::new();
    for (query, gold) in items {
        let (trace, pre) = score_traced(params, &state, query);
        loss -= trace.probs[*gold].ln();
        mask.extend(pre.iter().map(|&x| x > 0.0));
    }
    (loss, mask)
}

/// Loss of one sentence; gradients are added into `grad`.
pub fn sentence_backward(
    params: &ClassifierParams,
    grad: &mut ClassifierParams,
    input: &SentenceInput,
    items: &[Labeled],
) -> f64 {
    let (state, trace) = encode_traced(params, input);
    let dh = params.eta_dim();
    let mut d_eta = vec![vec![0.0; dh]; input.len()];
    let mut loss = 0.0;
    let rel_dim = params.relation.cols();
    for (query, gold) in items {
        let (st, _) = score_traced(params, &state, query);
        loss -= st.probs[*gold].ln();
        let mut ds = st.probs;
        ds[*gold] -= 1.0;
        grad.output.outer_acc(&ds, &st.phi);
        let mut dphi = vec![0.0; st.phi.len()];
        params.output.transpose_mul_acc(&ds, &mut dphi);
        for (d, &p) in dphi.iter_mut().zip(&st.phi) {
            if p <= 0.0 {
                *d = 0.0;
            }
        }
        grad.hidden.outer_acc(&dphi, &st.q);
        axpy(1.0, &dphi, grad.hidden_bias.as_mut_slice());
        let mut dq = vec![0.0; st.q.len()];
        params.hidden.transpose_mul_acc(&dphi, &mut dq);

        let (dm, rest) = dq.split_at(dh);
        let (dhd, rest) = rest.split_at(dh);
        let (dr, rest) = rest.split_at(rel_dim);
        let (dd, dl) = rest.split_at(2);
        axpy(1.0, dm, &mut d_eta[query.modifier - 1]);
        axpy(1.0, dhd, &mut d_eta[query.head - 1]);
        axpy(1.0, dr, grad.relation.row_mut(query.relation));
        axpy(1.0, dd, grad.direction.row_mut(query.direction_row()));
        axpy(1.0, dl, grad.language.row_mut(query.language));
    }
    encode_backward(params, grad, input, &trace, d_eta);
    loss
}

impl ClassifierParams {
    /// Width of one token representation.
    pub fn eta_dim(&self) -> usize {
        match self.lstm.last() {
            Some((f, b)) => f.width() + b.width(),
            None => self.word.cols() + self.pos.cols(),
        }
    }
}
