//! Minibatch Adam with gradient clipping and heldout early stopping.

use rand::seq::SliceRandom;
use rand::Rng;

use super::network::{encode, score_direction, sentence_backward, Labeled, SentenceInput};
use super::params::{ClassifierParams, Hyperparams};

/// A sentence and the labeled edges drawn from it.
#[derive(Clone, Debug)]
pub struct Example {
    pub input: SentenceInput,
    pub items: Vec<Labeled>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_nll: f64,
    pub heldout_nll: f64,
    pub heldout_accuracy: f64,
}

pub fn log_to_tsv(log: &[EpochLog]) -> String {
    let mut out = String::from("epoch\ttrain_nll\theldout_nll\theldout_acc\n");
    for e in log {
        out.push_str(&format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\n",
            e.epoch, e.train_nll, e.heldout_nll, e.heldout_accuracy
        ));
    }
    out
}

struct Adam {
    m: ClassifierParams,
    v: ClassifierParams,
    t: i32,
}

impl Adam {
    fn new(params: &ClassifierParams) -> Self {
        Adam {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }

    fn step(&mut self, params: &mut ClassifierParams, grad: &ClassifierParams, hp: &Hyperparams) {
        self.t += 1;
        let c1 = 1.0 - hp.beta1.powi(self.t);
        let c2 = 1.0 - hp.beta2.powi(self.t);
        let grads = grad.trainable();
        let tensors = params
            .trainable_mut()
            .into_iter()
            .zip(self.m.trainable_mut())
            .zip(self.v.trainable_mut())
            .zip(grads);
        for (((p, m), v), (_, g)) in tensors {
            let p = p.as_mut_slice();
            let m = m.as_mut_slice();
            let v = v.as_mut_slice();
            for (j, &gj) in g.as_slice().iter().enumerate() {
                if gj == 0.0 && m[j] == 0.0 && v[j] == 0.0 {
                    continue;
                }
                m[j] = hp.beta1 * m[j] + (1.0 - hp.beta1) * gj;
                v[j] = hp.beta2 * v[j] + (1.0 - hp.beta2) * gj * gj;
                let m_hat = m[j] / c1;
                let v_hat = v[j] / c2;
                p[j] -= hp.learning_rate * m_hat / (v_hat.sqrt() + hp.adam_eps);
            }
        }
    }
}

/// Mean NLL and accuracy. Ties go to the edge's current direction.
pub fn evaluate(params: &ClassifierParams, examples: &[Example]) -> (f64, f64) {
    let mut nll = 0.0;
    let mut correct = 0usize;
    let mut total = 0usize;
    for ex in examples {
        let state = encode(params, &ex.input);
        for (query, gold) in &ex.items {
            let p = score_direction(params, &state, query);
            nll -= p[*gold].ln();
            let predicted = if p[0] == p[1] {
                query.direction_row()
            } else {
                usize::from(p[1] > p[0])
            };
            correct += usize::from(predicted == *gold);
            total += 1;
        }
    }
    if total == 0 {
        return (0.0, 0.0);
    }
    (nll / total as f64, correct as f64 / total as f64)
}

/// Group sentences into batches of roughly `tokens` tokens.
fn batches(order: &[usize], examples: &[Example], tokens: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut count = 0;
    for &i in order {
        current.push(i);
        count += examples[i].input.len();
        if count >= tokens {
            out.push(std::mem::take(&mut current));
            count = 0;
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Train from `params`, returning the parameters with the best heldout NLL.
pub fn fit<R: Rng>(
    mut params: ClassifierParams,
    hp: &Hyperparams,
    train: &[Example],
    heldout: &[Example],
    rng: &mut R,
) -> (ClassifierParams, Vec<EpochLog>) {
    let mut adam = Adam::new(&params);
    let mut grad = params.zeros_like();
    let mut best = params.clone();
    let mut best_nll = f64::INFINITY;
    let mut stale = 0;
    let mut log = Vec::new();
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=hp.max_epochs {
        order.shuffle(rng);
        let mut train_loss = 0.0;
        let mut train_items = 0usize;
        for batch in batches(&order, train, hp.minibatch_tokens) {
            grad.fill_zero();
            let mut items = 0;
            for &i in &batch {
                train_loss += sentence_backward(&params, &mut grad, &train[i].input, &train[i].items);
                items += train[i].items.len();
            }
            if items == 0 {
                continue;
            }
            train_items += items;
            grad.scale(1.0 / items as f64);
            let norm = grad.squared_norm().sqrt();
            if norm > hp.clip_norm {
                grad.scale(hp.clip_norm / norm);
            }
            adam.step(&mut params, &grad, hp);
        }

        let (heldout_nll, heldout_accuracy) = evaluate(&params, heldout);
        log.push(EpochLog {
            epoch,
            train_nll: if train_items > 0 { train_loss / train_items as f64 } else { 0.0 },
            heldout_nll,
            heldout_accuracy,
        });
        if heldout_nll < best_nll {
            best_nll = heldout_nll;
            best = params.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale >= hp.patience {
                break;
            }
        }
    }
    (best, log)
}
